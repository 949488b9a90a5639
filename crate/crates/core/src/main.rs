use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use metarag::harness::{ingest_documents, load_qa_set, report_table, run_eval, EvalMode, EvalReport};
use metarag::simcorpus::{generate, SyntheticSpec};
use metarag::store::{MetadataFilter, VectorStore};
use metarag::{load_corpus, EngineConfig, Result};

#[derive(Parser)]
#[command(name = "metarag", version, about = "Company-filtered retrieval QA over transcripts")]
struct Cli {
    /// JSON engine configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Chunk and embed every document in a manifest into a store file.
    Ingest {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a seeded synthetic corpus and QA set.
    Synth {
        #[arg(long)]
        companies: usize,
        #[arg(long, default_value_t = 4)]
        facts: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Answer one question about one company.
    Ask {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        company: String,
        /// Search every company's chunks instead of only `--company`.
        #[arg(long)]
        no_filter: bool,
        question: String,
    },
    /// Answer and score a QA set, writing a JSON report.
    Eval {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        qa: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate one or more JSON reports.
    Report {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    With,
    Without,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => EngineConfig::load(path)?,
        None => EngineConfig::default(),
    };
    match cli.command {
        Command::Ingest { manifest, out } => {
            let docs = load_corpus(&manifest)?;
            let embedder = config.embedding.build()?;
            let store = ingest_documents(&docs, &config.splitter(), embedder.as_ref())?;
            store.save(&out)?;
            eprintln!("{} documents, {} chunks -> {}", docs.len(), store.len(), out.display());
        }
        Command::Synth { companies, facts, seed, out } => {
            let corpus = generate(&SyntheticSpec::new(companies, facts, seed), &out)?;
            println!("{}", corpus.manifest_path.display());
            println!("{}", corpus.qa_path.display());
        }
        Command::Ask { store, company, no_filter, question } => {
            let engine = config.engine(VectorStore::load(&store)?)?;
            let filter = if no_filter {
                MetadataFilter::all()
            } else {
                MetadataFilter::company(&company)
            };
            let answer = engine.answer_with_filter(&question, &company, &filter)?;
            println!("{}", answer.text);
            for id in &answer.retrieved_chunk_ids {
                eprintln!("source: {id}");
            }
        }
        Command::Eval { store, qa, mode, out } => {
            let engine = config.engine(VectorStore::load(&store)?)?;
            let pairs = load_qa_set(&qa)?;
            let mode = match mode {
                Mode::With => EvalMode::WithMetadata,
                Mode::Without => EvalMode::WithoutMetadata,
            };
            let scoring = config.scoring_providers()?;
            let report = run_eval(&engine, &pairs, mode, &scoring, config.parallelism)?;
            report.save(&out)?;
            print!("{}", report_table(std::slice::from_ref(&report)).text);
        }
        Command::Report { reports, format } => {
            let loaded = reports.iter().map(EvalReport::load).collect::<Result<Vec<_>>>()?;
            let table = report_table(&loaded);
            match format {
                Format::Text => print!("{}", table.text),
                Format::Csv => print!("{}", table.csv),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
