//! Metadata-filtered retrieval-augmented question answering over
//! multi-company document collections, plus an evaluation harness.
//!
//! The pipeline: [`corpus`] loads transcripts, [`chunker`] splits them,
//! [`embed`] turns chunks into unit vectors, [`store`] keeps them with their
//! company metadata, [`retriever`] pre-filters by company and re-ranks with
//! Maximal Marginal Relevance, and [`qa`] builds the prompt and calls the
//! completion provider. [`metrics`] and [`harness`] score answers against
//! ground truth with and without the company filter; [`simcorpus`] generates
//! a seeded corpus for offline experiments.

pub mod chunker;
pub mod config;
pub mod corpus;
pub mod embed;
pub mod error;
pub mod harness;
pub mod http;
pub mod metrics;
pub mod qa;
pub mod retriever;
pub mod simcorpus;
pub mod store;

pub use chunker::{chunk_document, split_text, Chunk, SplitterConfig};
pub use config::EngineConfig;
pub use corpus::{corpus_stats, load_corpus, Document};
pub use embed::{cosine_similarity, embed_texts, Embedder, EmbeddingVector, HashEmbedder};
pub use error::{Error, Result};
pub use harness::{ingest_documents, report_table, run_eval, EvalMode, EvalReport, QAPair};
pub use metrics::{bertscore, jaro, lcs_length, lcs_similarity, lcs_word_count, score_pair, MetricReport};
pub use qa::{build_prompt, Answer, Engine, REFUSAL};
pub use retriever::{mmr_select, retrieve, Retrieval, RetrieverConfig};
pub use store::{EmbeddedChunk, MetadataFilter, VectorStore};
