//! Maximal Marginal Relevance re-ranking of a metadata-filtered candidate pool.
//!
//! The first pick is the most query-relevant candidate. Each later pick maximizes
//! `lambda * rel(d) - (1 - lambda) * max_{s in selected} cos(d, s)`.
//! Ties go to the smaller `chunk_id`.

use serde::{Deserialize, Serialize};

use crate::embed::{cosine_similarity, Embedder};
use crate::error::{Error, Result};
use crate::store::{rank_order, EmbeddedChunk, MetadataFilter, ScoredChunk, VectorStore};

pub const DEFAULT_FETCH_K: usize = 20;
pub const DEFAULT_SELECT_N: usize = 4;
pub const DEFAULT_LAMBDA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetrieverConfig {
    /// Candidate pool size drawn from the store.
    pub fetch_k: usize,
    /// Chunks placed into the prompt.
    pub select_n: usize,
    pub lambda: f64,
}

impl Default for RetrieverConfig {
    fn default() -> Self {
        RetrieverConfig {
            fetch_k: DEFAULT_FETCH_K,
            select_n: DEFAULT_SELECT_N,
            lambda: DEFAULT_LAMBDA,
        }
    }
}

impl RetrieverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fetch_k == 0 || self.select_n == 0 {
            return Err(Error::Config("fetch_k and select_n must be positive".into()));
        }
        if self.select_n > self.fetch_k {
            return Err(Error::Config(format!(
                "select_n ({}) must not exceed fetch_k ({})",
                self.select_n, self.fetch_k
            )));
        }
        check_lambda(self.lambda)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Validation(format!("lambda {lambda} is outside [0, 1]")));
    }
    Ok(())
}

/// Greedy MMR selection of up to `n` candidates, in selection order.
///
/// Candidate scores must be the cosine similarity to the query.
pub fn mmr_select<'a>(
    candidates: &[ScoredChunk<'a>],
    lambda: f64,
    n: usize,
) -> Result<Vec<&'a EmbeddedChunk>> {
    check_lambda(lambda)?;
    if n == 0 {
        return Err(Error::Validation("n must be at least 1".into()));
    }

    let mut remaining: Vec<ScoredChunk<'a>> = candidates.to_vec();
    // Running max similarity of each remaining candidate to the selected set.
    let mut redundancy: Vec<f64> = vec![f64::NEG_INFINITY; remaining.len()];
    let mut selected: Vec<&'a EmbeddedChunk> = Vec::with_capacity(n.min(remaining.len()));

    while selected.len() < n && !remaining.is_empty() {
        let score = |i: usize| -> f64 {
            if selected.is_empty() {
                remaining[i].score
            } else {
                lambda * remaining[i].score - (1.0 - lambda) * redundancy[i]
            }
        };
        let best = (0..remaining.len())
            .min_by(|&a, &b| {
                rank_order(score(a), remaining[a].chunk.id(), score(b), remaining[b].chunk.id())
            })
            .expect("remaining is non-empty");

        let pick = remaining.swap_remove(best).chunk;
        redundancy.swap_remove(best);
        for (cand, red) in remaining.iter().zip(redundancy.iter_mut()) {
            *red = red.max(cosine_similarity(&cand.chunk.vector, &pick.vector)?);
        }
        selected.push(pick);
    }
    Ok(selected)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Retrieval<'a> {
    Found(Vec<&'a EmbeddedChunk>),
    /// No chunk in the store satisfies the filter.
    NoMatch,
}

impl<'a> Retrieval<'a> {
    pub fn chunks(&self) -> &[&'a EmbeddedChunk] {
        match self {
            Retrieval::Found(chunks) => chunks,
            Retrieval::NoMatch => &[],
        }
    }

    pub fn is_no_match(&self) -> bool {
        matches!(self, Retrieval::NoMatch)
    }
}

/// Embeds `query`, takes the `fetch_k` best filtered matches and re-ranks them with MMR.
pub fn retrieve<'a>(
    store: &'a VectorStore,
    query: &str,
    filter: &MetadataFilter,
    cfg: &RetrieverConfig,
    embedder: &dyn Embedder,
) -> Result<Retrieval<'a>> {
    cfg.validate()?;
    let query_vec = embedder
        .embed(&[query])?
        .pop()
        .ok_or_else(|| Error::Protocol("embedder returned no vector for the query".into()))?;
    let candidates = store.filtered_top_k(&query_vec, filter, cfg.fetch_k)?;
    if candidates.is_empty() {
        return Ok(Retrieval::NoMatch);
    }
    let picked = mmr_select(&candidates, cfg.lambda, cfg.select_n)?;
    debug_assert!(picked.iter().all(|c| filter.matches(&c.metadata)));
    Ok(Retrieval::Found(picked))
}
