//! Maximal Marginal Relevance on unit vectors in the plane. The query points
//! along the x axis; two near-duplicates sit close to it.
//!
//! With lambda = 1 the selection is plain top-n by relevance. Lower values
//! trade relevance for coverage and skip the near-duplicate.

use metarag::chunker::{Chunk, Span};
use metarag::embed::{cosine_similarity, EmbeddingVector};
use metarag::retriever::mmr_select;
use metarag::store::{ChunkMetadata, EmbeddedChunk, ScoredChunk};

fn at_angle(id: &str, degrees: f64) -> metarag::Result<EmbeddedChunk> {
    let r = degrees.to_radians();
    Ok(EmbeddedChunk {
        chunk: Chunk {
            chunk_id: id.into(),
            doc_id: "d".into(),
            seq: 0,
            span: Span { start: 0, end: 0 },
            text: format!("{degrees} degrees"),
        },
        vector: EmbeddingVector::normalized(vec![r.cos(), r.sin()])?,
        metadata: ChunkMetadata {
            company: "Acme".into(),
            sector: "Energy".into(),
            quarter: "FY2024-Q1".into(),
            doc_id: "d".into(),
        },
    })
}

pub fn run_example() -> metarag::Result<String> {
    let items = [
        at_angle("c1", 10.0)?,
        at_angle("c2", 12.0)?,
        at_angle("c3", 40.0)?,
        at_angle("c4", -35.0)?,
        at_angle("c5", 80.0)?,
        at_angle("c6", -70.0)?,
    ];
    let query = EmbeddingVector::basis(2, 0);
    let scored = items
        .iter()
        .map(|c| Ok(ScoredChunk { chunk: c, score: cosine_similarity(&query, &c.vector)? }))
        .collect::<metarag::Result<Vec<_>>>()?;

    let mut out = String::new();
    for lambda in [1.0, 0.5, 0.0] {
        let ids: Vec<&str> = mmr_select(&scored, lambda, 3)?.iter().map(|c| c.id()).collect();
        out.push_str(&format!("lambda={lambda:.1} -> {}\n", ids.join(", ")));
    }
    Ok(out)
}

fn main() -> metarag::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
