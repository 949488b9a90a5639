//! Corpus loading: a JSON-lines manifest naming one plain-text transcript per line.
//!
//! ```text
//! {"doc_id":"acme-q1","company":"ACME","sector":"Materials","quarter":"FY2024-Q1","text_path":"texts/acme.txt"}
//! ```
//!
//! Relative `text_path` values resolve against the manifest's directory.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One transcript with the metadata used for filtering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub company: String,
    pub sector: String,
    pub quarter: String,
    pub source_path: String,
    pub text: String,
}

impl Document {
    pub fn validate(&self) -> Result<()> {
        if self.doc_id.is_empty() {
            return Err(Error::Validation("document has an empty doc_id".into()));
        }
        if self.company.is_empty() {
            return Err(Error::Validation(format!(
                "document `{}` has an empty company",
                self.doc_id
            )));
        }
        if self.text.is_empty() {
            return Err(Error::Validation(format!(
                "document `{}` has empty text",
                self.doc_id
            )));
        }
        Ok(())
    }

    /// Length of the text in characters (the unit chunk spans are measured in).
    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }
}

/// One manifest line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub doc_id: String,
    pub company: String,
    pub sector: String,
    pub quarter: String,
    pub text_path: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
}

impl CorpusManifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        for (i, line) in raw.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: ManifestEntry = serde_json::from_str(line).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
            entries.push(entry);
        }
        let manifest = CorpusManifest { entries };
        manifest.check_unique_ids()?;
        Ok(manifest)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = Vec::new();
        for entry in &self.entries {
            serde_json::to_writer(&mut out, entry).expect("manifest entries serialize");
            out.push(b'\n');
        }
        let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(&out).map_err(|e| Error::io(path, e))
    }

    fn check_unique_ids(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for entry in &self.entries {
            if !seen.insert(entry.doc_id.as_str()) {
                return Err(Error::DuplicateId(entry.doc_id.clone()));
            }
        }
        Ok(())
    }
}

/// Loads every document named by the manifest, in manifest order.
///
/// Either the whole corpus loads and validates, or an error is returned.
pub fn load_corpus(manifest_path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let manifest_path = manifest_path.as_ref();
    let manifest = CorpusManifest::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));

    manifest
        .entries
        .into_iter()
        .map(|entry| {
            let text_path = resolve(base, &entry.text_path);
            let bytes = fs::read(&text_path).map_err(|e| Error::io(&text_path, e))?;
            let text = String::from_utf8(bytes).map_err(|e| {
                Error::Validation(format!(
                    "{} is not valid UTF-8: {}",
                    text_path.display(),
                    e.utf8_error()
                ))
            })?;
            let doc = Document {
                doc_id: entry.doc_id,
                company: entry.company,
                sector: entry.sector,
                quarter: entry.quarter,
                source_path: text_path.to_string_lossy().into_owned(),
                text,
            };
            doc.validate()?;
            Ok(doc)
        })
        .collect()
}

fn resolve(base: &Path, text_path: &str) -> PathBuf {
    let p = Path::new(text_path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorpusStats {
    pub count: usize,
    /// Mean text length in characters; `None` for an empty corpus.
    pub mean_text_length: Option<f64>,
}

pub fn corpus_stats(docs: &[Document]) -> CorpusStats {
    let count = docs.len();
    let mean_text_length = if count == 0 {
        None
    } else {
        let total: usize = docs.iter().map(Document::char_len).sum();
        Some(total as f64 / count as f64)
    };
    CorpusStats {
        count,
        mean_text_length,
    }
}
