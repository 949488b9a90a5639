//! The global JSON configuration file.
//!
//! Every key is optional; missing keys take the defaults shipped in
//! `config/default.json` (chunk size 1024, no overlap, 20 candidates,
//! 4 chunks per prompt, 1024 output tokens).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chunker::{default_separators, SplitterConfig, DEFAULT_CHUNK_OVERLAP, DEFAULT_CHUNK_SIZE};
use crate::embed::EmbeddingProviderSpec;
use crate::error::{Error, Result};
use crate::metrics::{token_embedder, ScorerSpec, ScoringProviders};
use crate::qa::{CompletionProviderSpec, Engine, DEFAULT_MAX_OUTPUT_TOKENS};
use crate::retriever::{RetrieverConfig, DEFAULT_FETCH_K, DEFAULT_LAMBDA, DEFAULT_SELECT_N};
use crate::store::VectorStore;

pub const DEFAULT_CONFIG_JSON: &str = include_str!("../config/default.json");
pub const DEFAULT_PARALLELISM: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub chunk_size: usize,
    pub chunk_overlap: usize,
    pub separators: Vec<String>,
    pub fetch_k: usize,
    pub select_n: usize,
    pub lambda: f64,
    pub max_output_tokens: usize,
    /// Upper bound on in-flight provider calls during evaluation.
    pub parallelism: usize,
    pub embedding: EmbeddingProviderSpec,
    pub completion: CompletionProviderSpec,
    /// Token embeddings for BERTScore; `null` leaves BERTScore absent.
    pub token_embedding: Option<EmbeddingProviderSpec>,
    /// Sequence scorer for BARTScore; `null` leaves BARTScore absent.
    pub sequence_scoring: Option<ScorerSpec>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            chunk_size: DEFAULT_CHUNK_SIZE,
            chunk_overlap: DEFAULT_CHUNK_OVERLAP,
            separators: default_separators(),
            fetch_k: DEFAULT_FETCH_K,
            select_n: DEFAULT_SELECT_N,
            lambda: DEFAULT_LAMBDA,
            max_output_tokens: DEFAULT_MAX_OUTPUT_TOKENS,
            parallelism: DEFAULT_PARALLELISM,
            embedding: EmbeddingProviderSpec::default(),
            completion: CompletionProviderSpec::default(),
            token_embedding: Some(EmbeddingProviderSpec::default()),
            sequence_scoring: None,
        }
    }
}

impl EngineConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: EngineConfig =
            serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&raw)
    }

    pub fn validate(&self) -> Result<()> {
        self.splitter().validate()?;
        self.retriever().validate()?;
        self.embedding.validate()?;
        self.completion.validate()?;
        if let Some(spec) = &self.token_embedding {
            spec.validate()?;
        }
        if self.max_output_tokens == 0 {
            return Err(Error::Config("max_output_tokens must be positive".into()));
        }
        if self.parallelism == 0 {
            return Err(Error::Config("parallelism must be positive".into()));
        }
        Ok(())
    }

    pub fn splitter(&self) -> SplitterConfig {
        SplitterConfig {
            chunk_size: self.chunk_size,
            chunk_overlap: self.chunk_overlap,
            separators: self.separators.clone(),
        }
    }

    pub fn retriever(&self) -> RetrieverConfig {
        RetrieverConfig {
            fetch_k: self.fetch_k,
            select_n: self.select_n,
            lambda: self.lambda,
        }
    }

    pub fn engine(&self, store: VectorStore) -> Result<Engine> {
        Ok(Engine::new(
            store,
            self.retriever(),
            self.embedding.build()?,
            self.completion.build()?,
        )?
        .with_max_output_tokens(self.max_output_tokens))
    }

    pub fn scoring_providers(&self) -> Result<ScoringProviders> {
        Ok(ScoringProviders {
            token_embedder: self.token_embedding.as_ref().map(token_embedder).transpose()?,
            sequence_scorer: self.sequence_scoring.as_ref().map(ScorerSpec::build).transpose()?,
        })
    }
}
