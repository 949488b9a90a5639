//! Runs the QA set of a synthetic corpus twice, once filtering retrieval to
//! the asked-about company and once over the pooled store, and prints the
//! comparison table.

use metarag::harness::{ingest_documents, report_table, run_eval, EvalMode};
use metarag::simcorpus::{generate, SyntheticSpec};
use metarag::EngineConfig;

pub fn run_example() -> metarag::Result<String> {
    let dir = tempfile::tempdir().map_err(|e| metarag::Error::Validation(e.to_string()))?;
    let corpus = generate(&SyntheticSpec::new(6, 4, 2024), dir.path())?;
    let config = EngineConfig::default();
    let embedder = config.embedding.build()?;
    let store = ingest_documents(&corpus.documents, &config.splitter(), embedder.as_ref())?;
    let engine = config.engine(store)?;
    let scoring = config.scoring_providers()?;

    let reports = [EvalMode::WithoutMetadata, EvalMode::WithMetadata]
        .into_iter()
        .map(|mode| run_eval(&engine, &corpus.qa_pairs, mode, &scoring, config.parallelism))
        .collect::<metarag::Result<Vec<_>>>()?;
    Ok(report_table(&reports).text)
}

fn main() -> metarag::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
