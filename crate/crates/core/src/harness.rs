//! Evaluation driver: ingest a corpus into a store, answer a ground-truth QA
//! set with or without the company filter, score every answer, and render
//! the comparison table.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chunker::{chunk_document, SplitterConfig};
use crate::corpus::Document;
use crate::embed::Embedder;
use crate::error::{Error, Result};
use crate::metrics::{score_pair, MetricReport, ScoringProviders};
use crate::qa::Engine;
use crate::store::{ChunkMetadata, EmbeddedChunk, MetadataFilter, VectorStore};

/// One ground-truth question about one company.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QAPair {
    pub question: String,
    pub company: String,
    pub ground_truth: String,
}

impl QAPair {
    fn validate(&self) -> Result<()> {
        if self.question.is_empty() || self.company.is_empty() || self.ground_truth.is_empty() {
            return Err(Error::Validation(
                "QA pairs need a question, a company and a ground truth".into(),
            ));
        }
        Ok(())
    }
}

pub fn load_qa_set(path: impl AsRef<Path>) -> Result<Vec<QAPair>> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    raw.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            let pair: QAPair = serde_json::from_str(line).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
            pair.validate().map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
            Ok(pair)
        })
        .collect()
}

pub fn write_qa_set(path: impl AsRef<Path>, pairs: &[QAPair]) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for pair in pairs {
        serde_json::to_writer(&mut out, pair).expect("QA pairs serialize");
        out.push(b'\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Chunks and embeds `docs` into a fresh store of the embedder's dimension.
pub fn ingest_documents(
    docs: &[Document],
    splitter: &SplitterConfig,
    embedder: &dyn Embedder,
) -> Result<VectorStore> {
    splitter.validate()?;
    let mut store = VectorStore::new(embedder.dim());
    let mut batch = Vec::new();
    for doc in docs {
        doc.validate()?;
        let chunks = chunk_document(doc, splitter);
        let texts: Vec<&str> = chunks.iter().map(|c| c.text.as_str()).collect();
        let vectors = embedder.embed(&texts)?;
        let metadata = ChunkMetadata::from_document(doc);
        batch.extend(chunks.into_iter().zip(vectors).map(|(chunk, vector)| EmbeddedChunk {
            chunk,
            vector,
            metadata: metadata.clone(),
        }));
    }
    store.insert(batch)?;
    Ok(store)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    WithMetadata,
    WithoutMetadata,
}

impl EvalMode {
    pub fn label(self) -> &'static str {
        match self {
            EvalMode::WithMetadata => "with_metadata",
            EvalMode::WithoutMetadata => "without_metadata",
        }
    }

    fn filter(self, company: &str) -> MetadataFilter {
        match self {
            EvalMode::WithMetadata => MetadataFilter::company(company),
            EvalMode::WithoutMetadata => MetadataFilter::all(),
        }
    }
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "with" | "with_metadata" => Ok(EvalMode::WithMetadata),
            "without" | "without_metadata" => Ok(EvalMode::WithoutMetadata),
            other => Err(Error::Validation(format!(
                "unknown mode `{other}` (expected `with` or `without`)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub question: String,
    pub company: String,
    pub answer: String,
    pub retrieved_chunk_ids: Vec<String>,
    pub no_context: bool,
    /// Some retrieved chunk belongs to another company.
    pub cross_company: bool,
    pub metrics: MetricReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricMean {
    pub mean: f64,
    /// Pairs that carried this metric.
    pub count: usize,
}

impl MetricMean {
    fn of(values: impl Iterator<Item = f64>) -> Option<Self> {
        let (sum, count) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        (count > 0).then(|| MetricMean {
            mean: sum / count as f64,
            count,
        })
    }
}

/// Column means, in comparison-table order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricMeans {
    pub bertscore_f1: Option<MetricMean>,
    pub bartscore: Option<MetricMean>,
    pub jaro: Option<MetricMean>,
    pub lcs_similarity: Option<MetricMean>,
    pub lcs_word_count: Option<MetricMean>,
}

impl MetricMeans {
    pub fn from_reports<'a>(reports: impl Iterator<Item = &'a MetricReport> + Clone) -> Self {
        MetricMeans {
            bertscore_f1: MetricMean::of(reports.clone().filter_map(|r| r.bertscore_f1)),
            bartscore: MetricMean::of(reports.clone().filter_map(|r| r.bartscore)),
            jaro: MetricMean::of(reports.clone().map(|r| r.jaro)),
            lcs_similarity: MetricMean::of(reports.clone().map(|r| r.lcs_similarity)),
            lcs_word_count: MetricMean::of(reports.map(|r| r.lcs_word_count as f64)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub run_label: String,
    pub n_pairs: usize,
    /// Pairs for which retrieval found context (no refusal).
    pub n_answered: usize,
    /// Fraction of answered pairs whose retrieved chunks all belong to the
    /// queried company; 1.0 when nothing was answered.
    pub retrieval_precision: f64,
    pub means: MetricMeans,
    pub per_pair: Vec<PairOutcome>,
}

impl EvalReport {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut json = serde_json::to_vec_pretty(self).expect("reports serialize");
        json.push(b'\n');
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_slice(&raw).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }
}

/// Answers and scores every pair, with at most `parallelism` pairs in flight.
///
/// Results keep input order. The first answering failure aborts the run and
/// reports the index of the failing pair.
pub fn run_eval(
    engine: &Engine,
    qa_set: &[QAPair],
    mode: EvalMode,
    scoring: &ScoringProviders,
    parallelism: usize,
) -> Result<EvalReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start evaluation workers: {e}")))?;

    let outcomes: Vec<Result<PairOutcome>> = pool.install(|| {
        qa_set
            .par_iter()
            .map(|pair| evaluate_pair(engine, pair, mode, scoring))
            .collect()
    });

    let per_pair = outcomes
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| Error::Eval {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let answered: Vec<&PairOutcome> = per_pair.iter().filter(|p| !p.no_context).collect();
    let retrieval_precision = if answered.is_empty() {
        1.0
    } else {
        answered.iter().filter(|p| !p.cross_company).count() as f64 / answered.len() as f64
    };

    Ok(EvalReport {
        run_label: mode.label().to_string(),
        n_pairs: per_pair.len(),
        n_answered: answered.len(),
        retrieval_precision,
        means: MetricMeans::from_reports(per_pair.iter().map(|p| &p.metrics)),
        per_pair,
    })
}

fn evaluate_pair(
    engine: &Engine,
    pair: &QAPair,
    mode: EvalMode,
    scoring: &ScoringProviders,
) -> Result<PairOutcome> {
    pair.validate()?;
    let answer = engine.answer_with_filter(&pair.question, &pair.company, &mode.filter(&pair.company))?;
    let cross_company = answer.retrieved_chunk_ids.iter().any(|id| {
        engine
            .store
            .get(id)
            .is_none_or(|c| c.metadata.company != pair.company)
    });
    let metrics = score_pair(&answer.text, &pair.ground_truth, scoring);
    Ok(PairOutcome {
        question: answer.question,
        company: answer.company,
        answer: answer.text,
        retrieved_chunk_ids: answer.retrieved_chunk_ids,
        no_context: answer.no_context,
        cross_company,
        metrics,
    })
}

pub const REPORT_COLUMNS: [&str; 7] = [
    "run_label",
    "bertscore",
    "bartscore",
    "jaro_similarity",
    "lcs_subsequence_similarity",
    "lcs_subsequence_word_count",
    "retrieval_precision",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportTable {
    pub text: String,
    pub csv: String,
}

fn cells(report: &EvalReport) -> Vec<String> {
    let fmt = |m: Option<MetricMean>| m.map(|m| format!("{:.6}", m.mean));
    let m = &report.means;
    let mut row = vec![report.run_label.clone()];
    row.extend(
        [
            fmt(m.bertscore_f1),
            fmt(m.bartscore),
            fmt(m.jaro),
            fmt(m.lcs_similarity),
            fmt(m.lcs_word_count),
        ]
        .into_iter()
        .map(Option::unwrap_or_default),
    );
    row.push(format!("{:.6}", report.retrieval_precision));
    row
}

/// One row per report, in the order given. Absent metrics are empty in the
/// CSV and `n/a` in the text table.
pub fn report_table(reports: &[EvalReport]) -> ReportTable {
    let rows: Vec<Vec<String>> = reports.iter().map(cells).collect();

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(REPORT_COLUMNS).expect("in-memory CSV write");
    for row in &rows {
        writer.write_record(row).expect("in-memory CSV write");
    }
    let csv = String::from_utf8(writer.into_inner().expect("in-memory CSV flush"))
        .expect("CSV output is UTF-8");

    let display: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|c| if c.is_empty() { "n/a".to_string() } else { c.clone() })
                .collect()
        })
        .collect();
    let widths: Vec<usize> = (0..REPORT_COLUMNS.len())
        .map(|i| {
            display
                .iter()
                .map(|r| r[i].len())
                .chain([REPORT_COLUMNS[i].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut text = Vec::new();
    let line = |out: &mut Vec<u8>, cols: &[&str]| {
        let padded: Vec<String> = cols
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        writeln!(out, "{}", padded.join("  ").trim_end()).expect("in-memory write");
    };
    line(&mut text, &REPORT_COLUMNS);
    for row in &display {
        let cols: Vec<&str> = row.iter().map(String::as_str).collect();
        line(&mut text, &cols);
    }

    ReportTable {
        text: String::from_utf8(text).expect("table text is UTF-8"),
        csv,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::HashEmbedder;
    use crate::metrics::{FixedScore, LocalTokenEmbedder};
    use crate::qa::{CompletionProvider, CompletionRequest, EchoContext};
    use crate::retriever::RetrieverConfig;

    fn doc(id: &str, company: &str, text: &str) -> Document {
        Document {
            doc_id: id.into(),
            company: company.into(),
            sector: "Energy".into(),
            quarter: "FY2024-Q1".into(),
            source_path: String::new(),
            text: text.into(),
        }
    }

    fn engine_with(completer: Box<dyn CompletionProvider>) -> Engine {
        let docs = [
            doc("a", "A", "A outlook is bright.\n\nA revenue was 10.5 crore.\n\nA analysts asked about debt."),
            doc("b", "B", "B outlook is dim.\n\nB revenue was 20.5 crore.\n\nB analysts asked about costs."),
        ];
        let e = HashEmbedder::new(64).unwrap();
        let splitter = SplitterConfig::new(30, 0, crate::chunker::default_separators()).unwrap();
        let store = ingest_documents(&docs, &splitter, &e).unwrap();
        let retriever = RetrieverConfig { fetch_k: 20, select_n: 2, lambda: 0.5 };
        Engine::new(store, retriever, Box::new(e), completer).unwrap()
    }

    fn qa() -> Vec<QAPair> {
        vec![
            QAPair { question: "What is the outlook?".into(), company: "A".into(), ground_truth: "A outlook is bright.".into() },
            QAPair { question: "What is the outlook?".into(), company: "B".into(), ground_truth: "B outlook is dim.".into() },
            QAPair { question: "What was revenue?".into(), company: "C".into(), ground_truth: "unknown".into() },
        ]
    }

    fn providers() -> ScoringProviders {
        ScoringProviders {
            token_embedder: Some(Box::new(LocalTokenEmbedder(HashEmbedder::new(64).unwrap()))),
            sequence_scorer: Some(Box::new(FixedScore(-3.41))),
        }
    }

    #[test]
    fn ingest_matches_chunk_count() {
        let e = engine_with(Box::new(EchoContext));
        assert_eq!(e.store.len(), 6);
    }

    #[test]
    fn with_metadata_is_fully_precise() {
        let e = engine_with(Box::new(EchoContext));
        let r = run_eval(&e, &qa(), EvalMode::WithMetadata, &providers(), 2).unwrap();
        assert_eq!(r.n_pairs, 3);
        assert_eq!(r.n_answered, 2);
        assert_eq!(r.retrieval_precision, 1.0);
        assert!(r.per_pair[2].no_context);
        assert_eq!(r.means.bartscore.unwrap().mean, -3.41);
        assert_eq!(r.run_label, "with_metadata");
    }

    #[test]
    fn means_recompute() {
        let e = engine_with(Box::new(EchoContext));
        let r = run_eval(&e, &qa(), EvalMode::WithoutMetadata, &providers(), 3).unwrap();
        let jaro: f64 = r.per_pair.iter().map(|p| p.metrics.jaro).sum::<f64>() / 3.0;
        assert!((r.means.jaro.unwrap().mean - jaro).abs() < 1e-12);
        assert_eq!(r.means.jaro.unwrap().count, 3);
    }

    #[test]
    fn result_independent_of_parallelism() {
        let e = engine_with(Box::new(EchoContext));
        let serial = run_eval(&e, &qa(), EvalMode::WithoutMetadata, &providers(), 1).unwrap();
        let parallel = run_eval(&e, &qa(), EvalMode::WithoutMetadata, &providers(), 4).unwrap();
        assert_eq!(serial, parallel);
    }

    struct FailOn(&'static str);

    impl CompletionProvider for FailOn {
        fn complete(&self, request: &CompletionRequest<'_>) -> Result<String> {
            if request.prompt.contains(self.0) {
                Err(Error::Provider { attempts: 4, message: "boom".into() })
            } else {
                Ok("fine".into())
            }
        }
    }

    #[test]
    fn provider_failure_reports_pair_index() {
        let e = engine_with(Box::new(FailOn("B outlook")));
        let err = run_eval(&e, &qa(), EvalMode::WithMetadata, &providers(), 2).unwrap_err();
        assert!(matches!(err, Error::Eval { index: 1, .. }), "{err}");
    }

    #[test]
    fn qa_set_round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("qa.jsonl");
        write_qa_set(&path, &qa()).unwrap();
        assert_eq!(load_qa_set(&path).unwrap(), qa());
        fs::write(&path, r#"{"question":"q","company":"","ground_truth":"t"}"#).unwrap();
        assert!(load_qa_set(&path).is_err());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("with".parse::<EvalMode>().unwrap(), EvalMode::WithMetadata);
        assert_eq!("without_metadata".parse::<EvalMode>().unwrap(), EvalMode::WithoutMetadata);
        assert!("sideways".parse::<EvalMode>().is_err());
    }

    fn report(label: &str, jaro: f64) -> EvalReport {
        let mean = |v| Some(MetricMean { mean: v, count: 4 });
        EvalReport {
            run_label: label.into(),
            n_pairs: 4,
            n_answered: 4,
            retrieval_precision: 0.75,
            means: MetricMeans {
                bertscore_f1: mean(0.6),
                bartscore: None,
                jaro: mean(jaro),
                lcs_similarity: mean(0.37),
                lcs_word_count: mean(201.0),
            },
            per_pair: vec![],
        }
    }

    #[test]
    fn table_layout() {
        let t = report_table(&[report("without_metadata", 0.5), report("with_metadata", 0.66)]);
        let lines: Vec<&str> = t.csv.lines().collect();
        assert_eq!(
            lines[0],
            "run_label,bertscore,bartscore,jaro_similarity,lcs_subsequence_similarity,lcs_subsequence_word_count,retrieval_precision"
        );
        assert_eq!(lines[1], "without_metadata,0.600000,,0.500000,0.370000,201.000000,0.750000");
        assert!(lines[2].starts_with("with_metadata,"));
        assert_eq!(lines.len(), 3);
        assert!(t.text.contains("n/a"));
        assert_eq!(t.text.lines().count(), 3);

        let single = report_table(&[report("with_metadata", 0.66)]);
        assert_eq!(single.csv.lines().count(), 2);
        assert_eq!(single, report_table(&[report("with_metadata", 0.66)]));
    }

    #[test]
    fn report_json_round_trip() {
        let e = engine_with(Box::new(EchoContext));
        let r = run_eval(&e, &qa(), EvalMode::WithoutMetadata, &providers(), 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        r.save(&path).unwrap();
        assert_eq!(EvalReport::load(&path).unwrap(), r);
    }
}
