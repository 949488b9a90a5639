//! Prompt assembly and answering.
//!
//! Every question is asked about one company. Retrieval is restricted to that
//! company's chunks, and when nothing matches the engine returns
//! [`REFUSAL`] without calling the completion provider.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::embed::Embedder;
use crate::error::{Error, Result};
use crate::http::JsonClient;
use crate::retriever::{retrieve, Retrieval, RetrieverConfig};
use crate::store::{EmbeddedChunk, MetadataFilter, VectorStore};

pub const REFUSAL: &str = "No relevant documents found for the requested company.";
pub const DEFAULT_MAX_OUTPUT_TOKENS: usize = 1024;
pub const PROMPT_TEMPLATE_VERSION: u32 = 1;

const PROMPT_HEADER: &str = "You are answering questions about company earnings call transcripts.\n\
Use only the context passages below. If they do not contain the answer, say that the answer is not in the documents.";

/// Builds the prompt for `question` from `chunks`, keeping their order and full text.
///
/// ```text
/// <header>
///
/// Context:
/// [doc_id:seq] chunk text
///
/// [doc_id:seq] chunk text
///
/// Question: <question>
/// Answer:
/// ```
///
/// With no chunks the `Context:` block is omitted.
pub fn build_prompt(question: &str, chunks: &[&EmbeddedChunk]) -> String {
    let mut prompt = String::from(PROMPT_HEADER);
    prompt.push_str("\n\n");
    if !chunks.is_empty() {
        prompt.push_str("Context:\n");
        for chunk in chunks {
            prompt.push_str(&format!(
                "[{}:{}] {}\n\n",
                chunk.chunk.doc_id, chunk.chunk.seq, chunk.chunk.text
            ));
        }
    }
    prompt.push_str("Question: ");
    prompt.push_str(question);
    prompt.push_str("\nAnswer:");
    prompt
}

#[derive(Debug, Clone, Copy)]
pub struct CompletionRequest<'a> {
    pub prompt: &'a str,
    pub context: &'a [&'a EmbeddedChunk],
    pub max_output_tokens: usize,
}

pub trait CompletionProvider: Send + Sync {
    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String>;
}

/// Test double: answers with the retrieved chunk texts joined by newlines.
#[derive(Debug, Clone, Copy, Default)]
pub struct EchoContext;

impl CompletionProvider for EchoContext {
    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String> {
        Ok(request
            .context
            .iter()
            .map(|c| c.chunk.text.as_str())
            .collect::<Vec<_>>()
            .join("\n"))
    }
}

#[derive(Serialize)]
struct CompletionBody<'a> {
    model: &'a str,
    prompt: &'a str,
    max_output_tokens: usize,
}

#[derive(Deserialize)]
struct CompletionReply {
    text: String,
}

/// `{model, prompt, max_output_tokens}` → `{text}` over HTTP POST.
#[derive(Debug, Clone)]
pub struct RemoteCompletion {
    client: JsonClient,
    model: String,
}

impl RemoteCompletion {
    pub fn new(client: JsonClient, model: impl Into<String>) -> Self {
        RemoteCompletion {
            client,
            model: model.into(),
        }
    }
}

impl CompletionProvider for RemoteCompletion {
    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String> {
        let reply: CompletionReply = self.client.post(&CompletionBody {
            model: &self.model,
            prompt: request.prompt,
            max_output_tokens: request.max_output_tokens,
        })?;
        Ok(reply.text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompletionKind {
    EchoContext,
    HttpRemote,
}

/// Completion provider settings. The output token budget lives at the top
/// level of the engine configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompletionProviderSpec {
    pub kind: CompletionKind,
    pub endpoint: Option<String>,
    pub model_name: Option<String>,
    pub timeout_ms: u64,
}

impl Default for CompletionProviderSpec {
    fn default() -> Self {
        CompletionProviderSpec {
            kind: CompletionKind::EchoContext,
            endpoint: None,
            model_name: None,
            timeout_ms: 60_000,
        }
    }
}

impl CompletionProviderSpec {
    pub fn validate(&self) -> Result<()> {
        match (self.kind, &self.endpoint) {
            (CompletionKind::HttpRemote, None) => Err(Error::Config(
                "http_remote completion provider requires an endpoint".into(),
            )),
            (CompletionKind::EchoContext, Some(_)) => Err(Error::Config(
                "echo_context completion provider takes no endpoint".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn build(&self) -> Result<Box<dyn CompletionProvider>> {
        self.validate()?;
        match self.kind {
            CompletionKind::EchoContext => Ok(Box::new(EchoContext)),
            CompletionKind::HttpRemote => {
                let client = JsonClient::new(
                    self.endpoint.as_deref().unwrap_or_default(),
                    Duration::from_millis(self.timeout_ms),
                )?;
                Ok(Box::new(RemoteCompletion::new(
                    client,
                    self.model_name.clone().unwrap_or_default(),
                )))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub question: String,
    pub company: String,
    pub text: String,
    pub retrieved_chunk_ids: Vec<String>,
    pub no_context: bool,
}

/// A store plus the providers needed to answer questions against it.
pub struct Engine {
    pub store: VectorStore,
    pub retriever: RetrieverConfig,
    pub max_output_tokens: usize,
    embedder: Box<dyn Embedder>,
    completer: Box<dyn CompletionProvider>,
}

impl Engine {
    pub fn new(
        store: VectorStore,
        retriever: RetrieverConfig,
        embedder: Box<dyn Embedder>,
        completer: Box<dyn CompletionProvider>,
    ) -> Result<Self> {
        retriever.validate()?;
        if embedder.dim() != store.dim() {
            return Err(Error::DimensionMismatch {
                expected: store.dim(),
                found: embedder.dim(),
            });
        }
        Ok(Engine {
            store,
            retriever,
            max_output_tokens: DEFAULT_MAX_OUTPUT_TOKENS,
            embedder,
            completer,
        })
    }

    pub fn with_max_output_tokens(mut self, max_output_tokens: usize) -> Self {
        self.max_output_tokens = max_output_tokens;
        self
    }

    pub fn embedder(&self) -> &dyn Embedder {
        self.embedder.as_ref()
    }

    /// Answers `question` from `company`'s documents only.
    pub fn answer(&self, question: &str, company: &str) -> Result<Answer> {
        self.answer_with_filter(question, company, &MetadataFilter::company(company))
    }

    /// Like [`Engine::answer`] but with an explicit filter; `company` is only
    /// recorded on the answer. Passing [`MetadataFilter::all`] searches the
    /// pooled corpus.
    pub fn answer_with_filter(
        &self,
        question: &str,
        company: &str,
        filter: &MetadataFilter,
    ) -> Result<Answer> {
        let retrieval = retrieve(
            &self.store,
            question,
            filter,
            &self.retriever,
            self.embedder.as_ref(),
        )?;
        let chunks = match retrieval {
            Retrieval::NoMatch => {
                return Ok(Answer {
                    question: question.to_string(),
                    company: company.to_string(),
                    text: REFUSAL.to_string(),
                    retrieved_chunk_ids: Vec::new(),
                    no_context: true,
                })
            }
            Retrieval::Found(chunks) => chunks,
        };
        let prompt = build_prompt(question, &chunks);
        let text = self.completer.complete(&CompletionRequest {
            prompt: &prompt,
            context: &chunks,
            max_output_tokens: self.max_output_tokens,
        })?;
        Ok(Answer {
            question: question.to_string(),
            company: company.to_string(),
            text,
            retrieved_chunk_ids: chunks.iter().map(|c| c.id().to_string()).collect(),
            no_context: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::HashEmbedder;
    use crate::store::tests::item;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    #[derive(Default)]
    struct Counting(Arc<AtomicUsize>);

    impl CompletionProvider for Counting {
        fn complete(&self, _: &CompletionRequest<'_>) -> Result<String> {
            self.0.fetch_add(1, Ordering::SeqCst);
            Ok("counted".into())
        }
    }

    struct Failing;

    impl CompletionProvider for Failing {
        fn complete(&self, _: &CompletionRequest<'_>) -> Result<String> {
            Err(Error::Provider {
                attempts: 4,
                message: "down".into(),
            })
        }
    }

    fn store() -> VectorStore {
        let e = HashEmbedder::new(32).unwrap();
        let rows = [
            ("A:0", "A", "A outlook for the business is strong"),
            ("A:1", "A", "A revenue rose twelve percent"),
            ("B:0", "B", "B outlook for the business is cautious"),
            ("B:1", "B", "B holistic outlook remains weak"),
        ];
        let mut s = VectorStore::new(32);
        s.insert(
            rows.iter()
                .map(|(id, company, text)| {
                    let mut it = item(id, company, &[1.0]);
                    it.vector = e.embed_one(text);
                    it.chunk.text = text.to_string();
                    it.chunk.doc_id = format!("{company}-doc");
                    it
                })
                .collect(),
        )
        .unwrap();
        s
    }

    fn engine(completer: Box<dyn CompletionProvider>) -> Engine {
        Engine::new(
            store(),
            RetrieverConfig::default(),
            Box::new(HashEmbedder::new(32).unwrap()),
            completer,
        )
        .unwrap()
    }

    #[test]
    fn prompt_without_chunks() {
        let p = build_prompt("Why?", &[]);
        assert!(p.starts_with(PROMPT_HEADER));
        assert!(!p.contains("Context:"));
        assert!(p.ends_with("Question: Why?\nAnswer:"));
    }

    #[test]
    fn prompt_keeps_order_and_text() {
        let s = store();
        let chunks: Vec<&EmbeddedChunk> = ["B:1", "A:0", "B:0", "A:1"]
            .iter()
            .map(|id| s.get(id).unwrap())
            .collect();
        let p = build_prompt("q", &chunks);
        assert_eq!(p, build_prompt("q", &chunks));
        let positions: Vec<usize> = chunks
            .iter()
            .map(|c| p.find(&format!("[{}:{}] {}", c.chunk.doc_id, c.chunk.seq, c.chunk.text)).unwrap())
            .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn echo_answer_is_concatenated_context() {
        let e = engine(Box::new(EchoContext));
        let a = e.answer("What is the holistic outlook for the business?", "A").unwrap();
        assert!(!a.no_context);
        let expected: Vec<&str> = a
            .retrieved_chunk_ids
            .iter()
            .map(|id| e.store.get(id).unwrap().chunk.text.as_str())
            .collect();
        assert_eq!(a.text, expected.join("\n"));
        assert!(a
            .retrieved_chunk_ids
            .iter()
            .all(|id| e.store.get(id).unwrap().metadata.company == "A"));
    }

    #[test]
    fn absent_company_refuses_without_calling_provider() {
        let calls = Arc::new(AtomicUsize::new(0));
        let e = engine(Box::new(Counting(calls.clone())));
        let a = e.answer("anything", "ZZZ").unwrap();
        assert!(a.no_context);
        assert_eq!(a.text, REFUSAL);
        assert!(a.retrieved_chunk_ids.is_empty());
        assert_eq!(calls.load(Ordering::SeqCst), 0);
        e.answer("anything", "A").unwrap();
        assert_eq!(calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn provider_failure_is_an_error_not_a_refusal() {
        let e = engine(Box::new(Failing));
        assert!(matches!(e.answer("outlook", "A"), Err(Error::Provider { .. })));
    }

    #[test]
    fn embedder_dimension_must_match_store() {
        let r = Engine::new(
            store(),
            RetrieverConfig::default(),
            Box::new(HashEmbedder::new(16).unwrap()),
            Box::new(EchoContext),
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn spec_validation() {
        let remote = CompletionProviderSpec {
            kind: CompletionKind::HttpRemote,
            ..Default::default()
        };
        assert!(remote.validate().is_err());
        assert!(CompletionProviderSpec::default().build().is_ok());
    }
}
