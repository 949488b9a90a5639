//! Answer-quality metrics against a ground-truth answer: Jaro similarity,
//! longest-common-subsequence similarity (characters) and word count (words),
//! BERTScore over token embeddings, and a BARTScore provider hook.

use std::collections::{BTreeMap, HashMap};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::embed::{
    cosine_similarity, lexical_tokens, EmbeddingProviderSpec, EmbeddingVector, HashEmbedder,
    ProviderKind,
};
use crate::error::{Error, Result};
use crate::http::JsonClient;

/// Jaro similarity over Unicode scalar values.
///
/// Two empty strings score 1; one empty string scores 0.
pub fn jaro(s1: &str, s2: &str) -> f64 {
    let a: Vec<char> = s1.chars().collect();
    let b: Vec<char> = s2.chars().collect();
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let window = (a.len().max(b.len()) / 2).saturating_sub(1);

    // Positions of each char in `b`, with a cursor past positions that are
    // matched or have fallen behind the window. Window bounds only move right,
    // so the earliest usable position is always at the cursor.
    let mut positions: HashMap<char, (Vec<usize>, usize)> = HashMap::new();
    for (j, &c) in b.iter().enumerate() {
        positions.entry(c).or_default().0.push(j);
    }

    let mut b_matched = vec![false; b.len()];
    let mut a_matched = Vec::new();
    for (i, &c) in a.iter().enumerate() {
        let Some((list, cursor)) = positions.get_mut(&c) else {
            continue;
        };
        let lo = i.saturating_sub(window);
        while *cursor < list.len() && list[*cursor] < lo {
            *cursor += 1;
        }
        if let Some(&j) = list.get(*cursor) {
            if j <= i + window {
                b_matched[j] = true;
                a_matched.push(c);
                *cursor += 1;
            }
        }
    }

    let m = a_matched.len();
    if m == 0 {
        return 0.0;
    }
    let b_in_order = b.iter().zip(&b_matched).filter(|(_, &hit)| hit).map(|(c, _)| c);
    let half_transpositions = a_matched
        .iter()
        .zip(b_in_order)
        .filter(|(x, y)| x != y)
        .count() as f64
        / 2.0;
    let m = m as f64;
    (m / a.len() as f64 + m / b.len() as f64 + (m - half_transpositions) / m) / 3.0
}

/// Length of the longest common subsequence (two-row dynamic program).
pub fn lcs_length<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut prev = vec![0usize; short.len() + 1];
    let mut curr = vec![0usize; short.len() + 1];
    for x in long {
        for (j, y) in short.iter().enumerate() {
            curr[j + 1] = if x == y {
                prev[j] + 1
            } else {
                curr[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[short.len()]
}

/// Character LCS length divided by the longer string's length.
pub fn lcs_similarity(s1: &str, s2: &str) -> f64 {
    let a: Vec<char> = s1.chars().collect();
    let b: Vec<char> = s2.chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    lcs_length(&a, &b) as f64 / longest as f64
}

/// Lowercased whitespace tokens; punctuation stays attached.
pub fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_lowercase).collect()
}

/// LCS length over word sequences.
pub fn lcs_word_count(s1: &str, s2: &str) -> usize {
    lcs_length(&words(s1), &words(s2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BertScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Greedy-matching BERTScore without idf weighting or baseline rescaling.
///
/// Recall averages, over reference tokens, the best cosine to any candidate
/// token; precision is the mirror image. Both are clamped to `[0, 1]`.
pub fn bertscore(candidate: &[EmbeddingVector], reference: &[EmbeddingVector]) -> Result<BertScore> {
    if candidate.is_empty() || reference.is_empty() {
        return Err(Error::Validation(
            "bertscore needs at least one candidate and one reference token".into(),
        ));
    }
    let sims: Vec<Vec<f64>> = candidate
        .iter()
        .map(|c| reference.iter().map(|r| cosine_similarity(c, r)).collect())
        .collect::<Result<_>>()?;

    let precision = sims
        .iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum::<f64>()
        / candidate.len() as f64;
    let recall = (0..reference.len())
        .map(|j| sims.iter().map(|row| row[j]).fold(f64::NEG_INFINITY, f64::max))
        .sum::<f64>()
        / reference.len() as f64;

    let precision = precision.clamp(0.0, 1.0);
    let recall = recall.clamp(0.0, 1.0);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(BertScore {
        precision,
        recall,
        f1,
    })
}

/// Produces one unit vector per token of a text.
pub trait TokenEmbedder: Send + Sync {
    fn embed_tokens(&self, text: &str) -> Result<Vec<EmbeddingVector>>;
}

/// Applies the hashed embedder to each lexical token independently.
#[derive(Debug, Clone, Copy)]
pub struct LocalTokenEmbedder(pub HashEmbedder);

impl TokenEmbedder for LocalTokenEmbedder {
    fn embed_tokens(&self, text: &str) -> Result<Vec<EmbeddingVector>> {
        Ok(lexical_tokens(text)
            .iter()
            .map(|t| self.0.embed_one(t))
            .collect())
    }
}

#[derive(Serialize)]
struct TokenEmbedRequest<'a> {
    model: &'a str,
    texts: [&'a str; 1],
}

#[derive(Deserialize)]
struct TokenEmbedResponse {
    token_embeddings: Vec<Vec<Vec<f64>>>,
}

/// `{model, texts: [text]}` → `{token_embeddings: [[[...], ...]]}`.
#[derive(Debug, Clone)]
pub struct RemoteTokenEmbedder {
    client: JsonClient,
    model: String,
}

impl RemoteTokenEmbedder {
    pub fn new(client: JsonClient, model: impl Into<String>) -> Self {
        RemoteTokenEmbedder {
            client,
            model: model.into(),
        }
    }
}

impl TokenEmbedder for RemoteTokenEmbedder {
    fn embed_tokens(&self, text: &str) -> Result<Vec<EmbeddingVector>> {
        let resp: TokenEmbedResponse = self.client.post(&TokenEmbedRequest {
            model: &self.model,
            texts: [text],
        })?;
        let [tokens]: [Vec<Vec<f64>>; 1] = resp.token_embeddings.try_into().map_err(|v: Vec<_>| {
            Error::Protocol(format!("expected token embeddings for 1 text, got {}", v.len()))
        })?;
        tokens
            .into_iter()
            .map(|v| EmbeddingVector::normalized(v).map_err(|e| Error::Protocol(e.to_string())))
            .collect()
    }
}

pub fn token_embedder(spec: &EmbeddingProviderSpec) -> Result<Box<dyn TokenEmbedder>> {
    spec.validate()?;
    match spec.kind {
        ProviderKind::DeterministicLocal => Ok(Box::new(LocalTokenEmbedder(HashEmbedder::new(spec.dim)?))),
        ProviderKind::HttpRemote => {
            let client = JsonClient::new(
                spec.endpoint.as_deref().unwrap_or_default(),
                Duration::from_millis(spec.timeout_ms),
            )?;
            Ok(Box::new(RemoteTokenEmbedder::new(
                client,
                spec.model_name.clone().unwrap_or_default(),
            )))
        }
    }
}

/// Scores how likely a model is to generate `candidate` from `reference`
/// (average token log-likelihood).
pub trait SequenceScorer: Send + Sync {
    fn score(&self, candidate: &str, reference: &str) -> Result<f64>;
}

/// Returns the same value for every pair.
#[derive(Debug, Clone, Copy)]
pub struct FixedScore(pub f64);

impl SequenceScorer for FixedScore {
    fn score(&self, _: &str, _: &str) -> Result<f64> {
        Ok(self.0)
    }
}

#[derive(Serialize)]
struct ScoreRequest<'a> {
    model: &'a str,
    candidate: &'a str,
    reference: &'a str,
}

#[derive(Deserialize)]
struct ScoreResponse {
    score: f64,
}

/// `{model, candidate, reference}` → `{score}`.
#[derive(Debug, Clone)]
pub struct RemoteScorer {
    client: JsonClient,
    model: String,
}

impl RemoteScorer {
    pub fn new(client: JsonClient, model: impl Into<String>) -> Self {
        RemoteScorer {
            client,
            model: model.into(),
        }
    }
}

impl SequenceScorer for RemoteScorer {
    fn score(&self, candidate: &str, reference: &str) -> Result<f64> {
        let resp: ScoreResponse = self.client.post(&ScoreRequest {
            model: &self.model,
            candidate,
            reference,
        })?;
        Ok(resp.score)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScorerSpec {
    pub endpoint: String,
    pub model_name: Option<String>,
    pub timeout_ms: u64,
}

impl Default for ScorerSpec {
    fn default() -> Self {
        ScorerSpec {
            endpoint: String::new(),
            model_name: None,
            timeout_ms: 60_000,
        }
    }
}

impl ScorerSpec {
    pub fn build(&self) -> Result<Box<dyn SequenceScorer>> {
        let client = JsonClient::new(&self.endpoint, Duration::from_millis(self.timeout_ms))?;
        Ok(Box::new(RemoteScorer::new(
            client,
            self.model_name.clone().unwrap_or_default(),
        )))
    }
}

/// BARTScore as reported by `scorer`; non-finite values are rejected.
pub fn bartscore(candidate: &str, reference: &str, scorer: &dyn SequenceScorer) -> Result<f64> {
    let value = scorer.score(candidate, reference)?;
    if !value.is_finite() {
        return Err(Error::Validation(format!("sequence score {value} is not finite")));
    }
    Ok(value)
}

/// Optional model-backed scorers. Missing providers leave their metric absent.
#[derive(Default)]
pub struct ScoringProviders {
    pub token_embedder: Option<Box<dyn TokenEmbedder>>,
    pub sequence_scorer: Option<Box<dyn SequenceScorer>>,
}

pub const BERTSCORE: &str = "bertscore";
pub const BARTSCORE: &str = "bartscore";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub jaro: f64,
    pub lcs_similarity: f64,
    pub lcs_word_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bertscore_f1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bartscore: Option<f64>,
    /// Why an optional metric is absent, keyed by metric name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub unavailable: BTreeMap<String, String>,
}

/// Scores one generated answer against its ground truth.
pub fn score_pair(generated: &str, ground_truth: &str, providers: &ScoringProviders) -> MetricReport {
    let mut unavailable = BTreeMap::new();

    let bertscore_f1 = match &providers.token_embedder {
        None => {
            unavailable.insert(BERTSCORE.to_string(), "no token-embedding provider".to_string());
            None
        }
        Some(embedder) => {
            let result = embedder
                .embed_tokens(generated)
                .and_then(|c| Ok((c, embedder.embed_tokens(ground_truth)?)))
                .and_then(|(c, r)| bertscore(&c, &r));
            match result {
                Ok(score) => Some(score.f1),
                Err(e) => {
                    unavailable.insert(BERTSCORE.to_string(), e.to_string());
                    None
                }
            }
        }
    };

    let bartscore = match &providers.sequence_scorer {
        None => {
            unavailable.insert(BARTSCORE.to_string(), "no sequence-scoring provider".to_string());
            None
        }
        Some(scorer) => match bartscore(generated, ground_truth, scorer.as_ref()) {
            Ok(v) => Some(v),
            Err(e) => {
                unavailable.insert(BARTSCORE.to_string(), e.to_string());
                None
            }
        },
    };

    MetricReport {
        jaro: jaro(generated, ground_truth),
        lcs_similarity: lcs_similarity(generated, ground_truth),
        lcs_word_count: lcs_word_count(generated, ground_truth),
        bertscore_f1,
        bartscore,
        unavailable,
    }
}
