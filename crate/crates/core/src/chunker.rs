//! Recursive character splitting.
//!
//! Text is split on the first separator that occurs in it. Pieces that are
//! still longer than `chunk_size` are split again with the remaining
//! separators, and runs of small neighbouring pieces are merged greedily while
//! the merged length stays within `chunk_size`. Separators stay attached to
//! the piece before them, so with zero overlap the chunks tile the input.
//!
//! All lengths and spans are in characters (Unicode scalar values).

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};

pub const DEFAULT_CHUNK_SIZE: usize = 1024;
pub const DEFAULT_CHUNK_OVERLAP: usize = 0;
pub const DEFAULT_SEPARATORS: [&str; 4] = ["\n\n", "\n", " ", ""];

pub fn default_separators() -> Vec<String> {
    DEFAULT_SEPARATORS.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitterConfig {
    pub chunk_size: usize,
    pub chunk_overlap: usize,
    pub separators: Vec<String>,
}

impl Default for SplitterConfig {
    fn default() -> Self {
        SplitterConfig {
            chunk_size: DEFAULT_CHUNK_SIZE,
            chunk_overlap: DEFAULT_CHUNK_OVERLAP,
            separators: default_separators(),
        }
    }
}

impl SplitterConfig {
    pub fn new(chunk_size: usize, chunk_overlap: usize, separators: Vec<String>) -> Result<Self> {
        let cfg = SplitterConfig {
            chunk_size,
            chunk_overlap,
            separators,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.chunk_size == 0 {
            return Err(Error::Config("chunk_size must be positive".into()));
        }
        if self.chunk_overlap >= self.chunk_size {
            return Err(Error::Config(format!(
                "chunk_overlap ({}) must be smaller than chunk_size ({})",
                self.chunk_overlap, self.chunk_size
            )));
        }
        if self.separators.last().map(String::as_str) != Some("") {
            return Err(Error::Config(
                "separators must end with the empty string".into(),
            ));
        }
        Ok(())
    }
}

/// Half-open character range into a document's text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub span: Span,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub chunk_id: String,
    pub doc_id: String,
    pub seq: usize,
    pub span: Span,
    pub text: String,
}

impl Chunk {
    pub fn make_id(doc_id: &str, seq: usize) -> String {
        format!("{doc_id}:{seq}")
    }
}

/// Splits `text` into pieces of at most `cfg.chunk_size` characters.
///
/// The configuration is assumed valid (see [`SplitterConfig::validate`]).
pub fn split_text(text: &str, cfg: &SplitterConfig) -> Vec<Piece> {
    debug_assert!(cfg.validate().is_ok());
    let splitter = Splitter::new(text, &cfg.separators);
    let total = splitter.char_len();
    if total == 0 {
        return Vec::new();
    }

    if total <= cfg.chunk_size {
        return vec![splitter.piece(0..total)];
    }

    // Base pieces leave room for the overlap prefix so every chunk stays within chunk_size.
    let budget = cfg.chunk_size - cfg.chunk_overlap;
    let mut base = Vec::new();
    splitter.split(0..total, 0, budget, &mut base);

    let mut spans: Vec<Range<usize>> = Vec::with_capacity(base.len());
    for range in base {
        let start = match spans.last() {
            Some(prev) => range.start - cfg.chunk_overlap.min(prev.len()),
            None => range.start,
        };
        spans.push(start..range.end);
    }
    spans.into_iter().map(|r| splitter.piece(r)).collect()
}

/// Splits a document into chunks with ids `doc_id:seq`.
pub fn chunk_document(doc: &Document, cfg: &SplitterConfig) -> Vec<Chunk> {
    split_text(&doc.text, cfg)
        .into_iter()
        .enumerate()
        .map(|(seq, piece)| Chunk {
            chunk_id: Chunk::make_id(&doc.doc_id, seq),
            doc_id: doc.doc_id.clone(),
            seq,
            span: piece.span,
            text: piece.text,
        })
        .collect()
}

struct Splitter<'a> {
    text: &'a str,
    /// Byte offset of every char index, plus a trailing entry for `text.len()`.
    offsets: Vec<usize>,
    separators: &'a [String],
}

impl<'a> Splitter<'a> {
    fn new(text: &'a str, separators: &'a [String]) -> Self {
        let mut offsets: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        offsets.push(text.len());
        Splitter {
            text,
            offsets,
            separators,
        }
    }

    fn char_len(&self) -> usize {
        self.offsets.len() - 1
    }

    fn slice(&self, range: &Range<usize>) -> &'a str {
        &self.text[self.offsets[range.start]..self.offsets[range.end]]
    }

    fn piece(&self, range: Range<usize>) -> Piece {
        Piece {
            text: self.slice(&range).to_string(),
            span: Span {
                start: range.start,
                end: range.end,
            },
        }
    }

    fn char_index(&self, byte: usize) -> usize {
        self.offsets
            .binary_search(&byte)
            .expect("separator matches fall on char boundaries")
    }

    fn split(&self, range: Range<usize>, first_sep: usize, size: usize, out: &mut Vec<Range<usize>>) {
        if range.len() <= size {
            if !range.is_empty() {
                out.push(range);
            }
            return;
        }

        let slice = self.slice(&range);
        let found = self.separators[first_sep..]
            .iter()
            .position(|sep| sep.is_empty() || slice.contains(sep.as_str()))
            .map(|i| first_sep + i);

        let sep_idx = match found {
            Some(i) if !self.separators[i].is_empty() => i,
            // "" (or an exhausted list) falls back to fixed-width character windows.
            _ => {
                let mut start = range.start;
                while start < range.end {
                    let end = (start + size).min(range.end);
                    out.push(start..end);
                    start = end;
                }
                return;
            }
        };

        let sep = self.separators[sep_idx].as_str();
        let base_byte = self.offsets[range.start];
        let mut parts = Vec::new();
        let mut part_start = range.start;
        for (byte, matched) in slice.match_indices(sep) {
            let part_end = self.char_index(base_byte + byte + matched.len());
            parts.push(part_start..part_end);
            part_start = part_end;
        }
        if part_start < range.end {
            parts.push(part_start..range.end);
        }

        let mut pending: Option<Range<usize>> = None;
        for part in parts {
            if part.len() > size {
                if let Some(p) = pending.take() {
                    out.push(p);
                }
                self.split(part, sep_idx + 1, size, out);
                continue;
            }
            pending = match pending {
                Some(p) if p.len() + part.len() <= size => Some(p.start..part.end),
                Some(p) => {
                    out.push(p);
                    Some(part)
                }
                None => Some(part),
            };
        }
        if let Some(p) = pending {
            out.push(p);
        }
    }
}
