//! In-memory vector store with exact metadata pre-filtering and JSONL persistence.
//!
//! Search is a brute-force scan: the filter is applied first, every matching
//! chunk is scored by cosine similarity, and results are ordered by
//! descending score with ties broken by ascending `chunk_id`.
//!
//! Mutation takes `&mut self`, so a store shared across threads behind a
//! `RwLock` (or plain `&`) gives many readers or one writer, and a failed
//! [`VectorStore::insert`] leaves the store untouched.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chunker::Chunk;
use crate::corpus::Document;
use crate::embed::{cosine_similarity, EmbeddingVector};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_TOP_K: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkMetadata {
    pub company: String,
    pub sector: String,
    pub quarter: String,
    pub doc_id: String,
}

impl ChunkMetadata {
    pub fn from_document(doc: &Document) -> Self {
        ChunkMetadata {
            company: doc.company.clone(),
            sector: doc.sector.clone(),
            quarter: doc.quarter.clone(),
            doc_id: doc.doc_id.clone(),
        }
    }

    pub fn get(&self, field: MetadataField) -> &str {
        match field {
            MetadataField::Company => &self.company,
            MetadataField::Sector => &self.sector,
            MetadataField::Quarter => &self.quarter,
            MetadataField::DocId => &self.doc_id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedChunk {
    pub chunk: Chunk,
    pub vector: EmbeddingVector,
    pub metadata: ChunkMetadata,
}

impl EmbeddedChunk {
    pub fn id(&self) -> &str {
        &self.chunk.chunk_id
    }

    fn validate(&self) -> Result<()> {
        if self.metadata.company.is_empty() || self.metadata.doc_id.is_empty() {
            return Err(Error::Validation(format!(
                "chunk `{}` is missing company or doc_id metadata",
                self.chunk.chunk_id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetadataField {
    Company,
    Sector,
    Quarter,
    DocId,
}

impl FromStr for MetadataField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "company" => Ok(MetadataField::Company),
            "sector" => Ok(MetadataField::Sector),
            "quarter" => Ok(MetadataField::Quarter),
            "doc_id" => Ok(MetadataField::DocId),
            other => Err(Error::Validation(format!("unknown metadata field `{other}`"))),
        }
    }
}

impl fmt::Display for MetadataField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetadataField::Company => "company",
            MetadataField::Sector => "sector",
            MetadataField::Quarter => "quarter",
            MetadataField::DocId => "doc_id",
        })
    }
}

/// Conjunction of exact-match predicates. The empty filter matches everything.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataFilter {
    predicates: BTreeMap<MetadataField, String>,
}

impl MetadataFilter {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn company(company: impl Into<String>) -> Self {
        Self::all().with(MetadataField::Company, company)
    }

    pub fn with(mut self, field: MetadataField, value: impl Into<String>) -> Self {
        self.predicates.insert(field, value.into());
        self
    }

    /// Parses `field=value` pairs, e.g. `["company=ACME", "quarter=FY2024-Q1"]`.
    pub fn parse<'a>(pairs: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut filter = Self::all();
        for pair in pairs {
            let (field, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::Validation(format!("expected field=value, got `{pair}`")))?;
            filter = filter.with(field.trim().parse()?, value.trim());
        }
        Ok(filter)
    }

    pub fn is_empty(&self) -> bool {
        self.predicates.is_empty()
    }

    pub fn get(&self, field: MetadataField) -> Option<&str> {
        self.predicates.get(&field).map(String::as_str)
    }

    pub fn matches(&self, meta: &ChunkMetadata) -> bool {
        self.predicates
            .iter()
            .all(|(field, value)| meta.get(*field) == value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredChunk<'a> {
    pub chunk: &'a EmbeddedChunk,
    pub score: f64,
}

/// Descending score, then ascending chunk id.
pub(crate) fn rank_order(a_score: f64, a_id: &str, b_score: f64, b_id: &str) -> Ordering {
    b_score.total_cmp(&a_score).then_with(|| a_id.cmp(b_id))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorStore {
    dim: usize,
    items: Vec<EmbeddedChunk>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    dim: usize,
}

impl VectorStore {
    pub fn new(dim: usize) -> Self {
        VectorStore {
            dim,
            items: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[EmbeddedChunk] {
        &self.items
    }

    pub fn get(&self, chunk_id: &str) -> Option<&EmbeddedChunk> {
        self.index.get(chunk_id).map(|&i| &self.items[i])
    }

    /// Inserts the whole batch or nothing.
    pub fn insert(&mut self, batch: Vec<EmbeddedChunk>) -> Result<usize> {
        let mut batch_ids = HashSet::with_capacity(batch.len());
        for item in &batch {
            if item.vector.dim() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: item.vector.dim(),
                });
            }
            item.validate()?;
            let id = item.id();
            if self.index.contains_key(id) || !batch_ids.insert(id) {
                return Err(Error::DuplicateId(id.to_string()));
            }
        }
        let count = batch.len();
        for item in batch {
            self.index.insert(item.chunk.chunk_id.clone(), self.items.len());
            self.items.push(item);
        }
        Ok(count)
    }

    /// The `k` chunks matching `filter` that are most similar to `query`.
    pub fn filtered_top_k(
        &self,
        query: &EmbeddingVector,
        filter: &MetadataFilter,
        k: usize,
    ) -> Result<Vec<ScoredChunk<'_>>> {
        if k == 0 {
            return Err(Error::Validation("k must be at least 1".into()));
        }
        if query.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: query.dim(),
            });
        }
        let mut hits = self
            .items
            .iter()
            .filter(|item| filter.matches(&item.metadata))
            .map(|item| {
                Ok(ScoredChunk {
                    chunk: item,
                    score: cosine_similarity(query, &item.vector)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        hits.sort_by(|a, b| rank_order(a.score, a.chunk.id(), b.score, b.chunk.id()));
        hits.truncate(k);
        Ok(hits)
    }

    /// Number of chunks matching `filter`.
    pub fn count_matching(&self, filter: &MetadataFilter) -> usize {
        self.items
            .iter()
            .filter(|item| filter.matches(&item.metadata))
            .count()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let header = Header {
            format_version: FORMAT_VERSION,
            dim: self.dim,
        };
        write_json_line(&mut w, &header).map_err(|e| Error::io(path, e))?;
        for item in &self.items {
            write_json_line(&mut w, item).map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines().enumerate();
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };

        let (_, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing header line".into()))?;
        let header = header.map_err(|e| Error::io(path, e))?;
        let header: Header =
            serde_json::from_str(&header).map_err(|e| parse_err(1, e.to_string()))?;
        if header.format_version != FORMAT_VERSION {
            return Err(Error::FormatVersion {
                expected: FORMAT_VERSION,
                found: header.format_version,
            });
        }

        let mut store = VectorStore::new(header.dim);
        let mut items = Vec::new();
        for (i, line) in lines {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let item: EmbeddedChunk =
                serde_json::from_str(&line).map_err(|e| parse_err(i + 1, e.to_string()))?;
            items.push(item);
        }
        store.insert(items)?;
        Ok(store)
    }
}

fn write_json_line<W: Write, T: Serialize>(w: &mut W, value: &T) -> std::io::Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    w.write_all(b"\n")
}
