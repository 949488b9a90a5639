//! Sentence embeddings: a deterministic hashed bag-of-words embedder for
//! offline use and a remote HTTP provider.
//!
//! Every vector leaving this module is unit-normalized, so cosine similarity
//! downstream is a plain dot product.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::http::JsonClient;

/// Allowed deviation of a stored vector's L2 norm from 1.
pub const NORM_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_LOCAL_DIM: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    /// Scales `values` to unit length.
    pub fn normalized(mut values: Vec<f64>) -> Result<Self> {
        check_finite(&values)?;
        let norm = l2_norm(&values);
        if norm == 0.0 {
            return Err(Error::Validation("cannot normalize a zero vector".into()));
        }
        values.iter_mut().for_each(|v| *v /= norm);
        Ok(EmbeddingVector(values))
    }

    /// Accepts `values` as-is if they already form a unit vector.
    pub fn from_unit(values: Vec<f64>) -> Result<Self> {
        check_finite(&values)?;
        let norm = l2_norm(&values);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Validation(format!(
                "vector norm {norm} is not 1 within {NORM_TOLERANCE}"
            )));
        }
        Ok(EmbeddingVector(values))
    }

    /// The standard basis vector `e_index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dim {dim}");
        let mut values = vec![0.0; dim];
        values[index] = 1.0;
        EmbeddingVector(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.0)
    }
}

impl TryFrom<Vec<f64>> for EmbeddingVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        EmbeddingVector::from_unit(values)
    }
}

impl From<EmbeddingVector> for Vec<f64> {
    fn from(v: EmbeddingVector) -> Self {
        v.0
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Validation("embedding has dimension 0".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("embedding contains a non-finite value".into()));
    }
    Ok(())
}

fn l2_norm(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Cosine similarity of two unit vectors, clamped to `[-1, 1]`.
pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let dot: f64 = a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum();
    Ok(dot.clamp(-1.0, 1.0))
}

pub trait Embedder: Send + Sync {
    fn dim(&self) -> usize;

    /// One vector per input, in input order.
    fn embed(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>>;
}

/// Lowercased alphanumeric runs.
pub fn lexical_tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

/// FNV-1a, 64-bit.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes
        .iter()
        .fold(OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

/// Signed feature hashing of lowercased tokens into `dim` buckets.
///
/// The bucket is `hash % dim` and the sign comes from the top bit of the hash.
/// Text without tokens maps to `e_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashEmbedder {
    dim: usize,
}

impl HashEmbedder {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("embedding dim must be positive".into()));
        }
        Ok(HashEmbedder { dim })
    }

    pub fn embed_one(&self, text: &str) -> EmbeddingVector {
        let mut acc = vec![0.0f64; self.dim];
        for token in lexical_tokens(text) {
            let h = fnv1a64(token.as_bytes());
            let bucket = (h % self.dim as u64) as usize;
            acc[bucket] += if h >> 63 == 0 { 1.0 } else { -1.0 };
        }
        // Tokens can cancel out, so the zero check is on the sum, not the token count.
        EmbeddingVector::normalized(acc).unwrap_or_else(|_| EmbeddingVector::basis(self.dim, 0))
    }
}

impl Embedder for HashEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    model: &'a str,
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    embeddings: Vec<Vec<f64>>,
}

/// Remote embedder speaking `{model, texts[]}` → `{embeddings[[...]]}`.
#[derive(Debug, Clone)]
pub struct RemoteEmbedder {
    client: JsonClient,
    model: String,
    dim: usize,
    max_batch: usize,
}

impl RemoteEmbedder {
    pub fn new(client: JsonClient, model: impl Into<String>, dim: usize, max_batch: usize) -> Self {
        RemoteEmbedder {
            client,
            model: model.into(),
            dim,
            max_batch: max_batch.max(1),
        }
    }
}

impl Embedder for RemoteEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        let mut out = Vec::with_capacity(texts.len());
        for batch in texts.chunks(self.max_batch) {
            let resp: EmbedResponse = self.client.post(&EmbedRequest {
                model: &self.model,
                texts: batch,
            })?;
            if resp.embeddings.len() != batch.len() {
                return Err(Error::Protocol(format!(
                    "sent {} texts, received {} embeddings",
                    batch.len(),
                    resp.embeddings.len()
                )));
            }
            for values in resp.embeddings {
                if values.len() != self.dim {
                    return Err(Error::Protocol(format!(
                        "expected embeddings of dimension {}, received {}",
                        self.dim,
                        values.len()
                    )));
                }
                let v = EmbeddingVector::normalized(values)
                    .map_err(|e| Error::Protocol(e.to_string()))?;
                out.push(v);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    DeterministicLocal,
    HttpRemote,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingProviderSpec {
    pub kind: ProviderKind,
    pub dim: usize,
    pub endpoint: Option<String>,
    pub model_name: Option<String>,
    pub timeout_ms: u64,
    pub max_batch: usize,
}

impl Default for EmbeddingProviderSpec {
    fn default() -> Self {
        EmbeddingProviderSpec {
            kind: ProviderKind::DeterministicLocal,
            dim: DEFAULT_LOCAL_DIM,
            endpoint: None,
            model_name: None,
            timeout_ms: 30_000,
            max_batch: 64,
        }
    }
}

impl EmbeddingProviderSpec {
    pub fn local(dim: usize) -> Self {
        EmbeddingProviderSpec {
            dim,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("embedding dim must be positive".into()));
        }
        if self.max_batch == 0 {
            return Err(Error::Config("max_batch must be positive".into()));
        }
        match (self.kind, &self.endpoint) {
            (ProviderKind::HttpRemote, None) => Err(Error::Config(
                "http_remote embedding provider requires an endpoint".into(),
            )),
            (ProviderKind::DeterministicLocal, Some(_)) => Err(Error::Config(
                "deterministic_local embedding provider takes no endpoint".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn build(&self) -> Result<Box<dyn Embedder>> {
        self.validate()?;
        match self.kind {
            ProviderKind::DeterministicLocal => Ok(Box::new(HashEmbedder::new(self.dim)?)),
            ProviderKind::HttpRemote => {
                let endpoint = self.endpoint.as_deref().unwrap_or_default();
                let client = JsonClient::new(endpoint, Duration::from_millis(self.timeout_ms))?;
                Ok(Box::new(RemoteEmbedder::new(
                    client,
                    self.model_name.clone().unwrap_or_default(),
                    self.dim,
                    self.max_batch,
                )))
            }
        }
    }
}

pub fn embed_texts(texts: &[&str], provider: &EmbeddingProviderSpec) -> Result<Vec<EmbeddingVector>> {
    provider.build()?.embed(texts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn local(dim: usize) -> HashEmbedder {
        HashEmbedder::new(dim).unwrap()
    }

    #[test]
    fn fnv_reference_vectors() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn identical_strings_identical_vectors() {
        let v = embed_texts(&["revenue", "revenue"], &EmbeddingProviderSpec::local(64)).unwrap();
        assert_eq!(v[0], v[1]);
    }

    #[test]
    fn punctuation_only_difference_golden() {
        // Both strings reduce to the tokens ["revenue", "growth"].
        let e = local(64);
        let a = e.embed_one("revenue growth");
        let b = e.embed_one("revenue growth.");
        assert_eq!(a, b);
        assert!((cosine_similarity(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        let c = e.embed_one("revenue decline");
        let cos = cosine_similarity(&a, &c).unwrap();
        assert!((cos - 0.5).abs() < 1e-12, "{cos}");
    }

    #[test]
    fn empty_text_maps_to_first_basis_vector() {
        let v = local(8).embed_one("  ,.; ");
        assert_eq!(v, EmbeddingVector::basis(8, 0));
    }

    #[test]
    fn cosine_examples() {
        let x = EmbeddingVector::basis(2, 0);
        let y = EmbeddingVector::basis(2, 1);
        let neg = EmbeddingVector::from_unit(vec![-1.0, 0.0]).unwrap();
        assert_eq!(cosine_similarity(&x, &x).unwrap(), 1.0);
        assert_eq!(cosine_similarity(&x, &y).unwrap(), 0.0);
        assert_eq!(cosine_similarity(&x, &neg).unwrap(), -1.0);
        let z = EmbeddingVector::basis(3, 0);
        assert!(matches!(
            cosine_similarity(&x, &z),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn vector_validation() {
        assert!(EmbeddingVector::normalized(vec![0.0, 0.0]).is_err());
        assert!(EmbeddingVector::normalized(vec![f64::NAN, 1.0]).is_err());
        assert!(EmbeddingVector::normalized(vec![]).is_err());
        assert!(EmbeddingVector::from_unit(vec![1.0, 1.0]).is_err());
        let v: Result<EmbeddingVector, _> = serde_json::from_str("[0.6, 0.8]");
        assert!(v.is_ok());
        let bad: Result<EmbeddingVector, _> = serde_json::from_str("[3.0, 4.0]");
        assert!(bad.is_err());
    }

    #[test]
    fn provider_spec_validation() {
        let mut spec = EmbeddingProviderSpec {
            kind: ProviderKind::HttpRemote,
            ..Default::default()
        };
        assert!(spec.validate().is_err());
        spec.endpoint = Some("http://127.0.0.1:9/embed".into());
        assert!(spec.validate().is_ok());
        let local_with_endpoint = EmbeddingProviderSpec {
            endpoint: Some("http://x".into()),
            ..Default::default()
        };
        assert!(local_with_endpoint.validate().is_err());
        assert!(EmbeddingProviderSpec::local(0).validate().is_err());
    }

    proptest! {
        #[test]
        fn unit_norm(text in ".{0,200}", dim in 1usize..300) {
            let v = local(dim).embed_one(&text);
            prop_assert_eq!(v.dim(), dim);
            prop_assert!((v.norm() - 1.0).abs() <= 1e-9);
        }

        #[test]
        fn batch_equivalence(a in "[a-z ]{0,40}", b in "[a-z ]{0,40}") {
            let e = local(32);
            let batch = e.embed(&[&a, &b]).unwrap();
            prop_assert_eq!(&batch[0], &e.embed(&[&a]).unwrap()[0]);
            prop_assert_eq!(&batch[1], &e.embed(&[&b]).unwrap()[0]);
        }

        #[test]
        fn cosine_symmetric(a in "[a-z ]{0,40}", b in "[a-z ]{0,40}") {
            let e = local(16);
            let (va, vb) = (e.embed_one(&a), e.embed_one(&b));
            let ab = cosine_similarity(&va, &vb).unwrap();
            prop_assert_eq!(ab, cosine_similarity(&vb, &va).unwrap());
            prop_assert!((-1.0..=1.0).contains(&ab));
        }
    }
}
