//! Generates a small synthetic corpus, ingests it with the default
//! configuration and asks one question with and without the company filter.
//! The default completion provider echoes the retrieved context.

use metarag::harness::ingest_documents;
use metarag::simcorpus::{generate, SyntheticSpec};
use metarag::store::MetadataFilter;
use metarag::EngineConfig;

pub fn run_example() -> metarag::Result<String> {
    let dir = tempfile::tempdir().map_err(|e| metarag::Error::Validation(e.to_string()))?;
    let corpus = generate(&SyntheticSpec::new(4, 4, 11), dir.path())?;
    let config = EngineConfig::default();
    let embedder = config.embedding.build()?;
    let store = ingest_documents(&corpus.documents, &config.splitter(), embedder.as_ref())?;
    let engine = config.engine(store)?;

    // The first generic question: its wording does not name the company.
    let pair = &corpus.qa_pairs[4];
    let mut out = format!("Q: {}\ncompany: {}\n", pair.question, pair.company);
    for (label, filter) in [
        ("filtered", MetadataFilter::company(&pair.company)),
        ("pooled", MetadataFilter::all()),
    ] {
        let answer = engine.answer_with_filter(&pair.question, &pair.company, &filter)?;
        let companies: Vec<&str> = answer
            .retrieved_chunk_ids
            .iter()
            .filter_map(|id| engine.store.get(id))
            .map(|c| c.metadata.company.as_str())
            .collect();
        let opening: String = answer.text.chars().take(120).collect();
        out.push_str(&format!("{label}: sources from {companies:?}\n  {opening}...\n"));
    }
    let missing = engine.answer("What was the order book?", "Nonexistent Ltd")?;
    out.push_str(&format!("unknown company: {}\n", missing.text));
    Ok(out)
}

fn main() -> metarag::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
