//! Two companies report the same kind of figure. A pooled search happily
//! returns the other company's chunk; the company filter cannot.

use metarag::chunker::{default_separators, SplitterConfig};
use metarag::corpus::Document;
use metarag::embed::{Embedder, HashEmbedder};
use metarag::harness::ingest_documents;
use metarag::store::MetadataFilter;

fn doc(id: &str, company: &str, text: &str) -> Document {
    Document {
        doc_id: id.into(),
        company: company.into(),
        sector: "Automobile".into(),
        quarter: "FY2024-Q1".into(),
        source_path: String::new(),
        text: text.into(),
    }
}

pub fn run_example() -> metarag::Result<String> {
    let docs = [
        doc(
            "alpha-q1",
            "Alpha Motors",
            "Alpha Motors reported an EBITDA margin of 14.2 percent.\n\nDealer inventory stayed lean.",
        ),
        doc(
            "beta-q1",
            "Beta Motors",
            "Beta Motors posted an EBITDA margin of 9.8 percent this quarter.\n\nExports were soft.",
        ),
    ];
    let embedder = HashEmbedder::new(256)?;
    let splitter = SplitterConfig::new(80, 0, default_separators())?;
    let store = ingest_documents(&docs, &splitter, &embedder)?;

    let question = "What EBITDA margin did Alpha Motors post this quarter?";
    let query = embedder.embed(&[question])?.remove(0);

    let mut out = format!("question: {question}\n");
    for (label, filter) in [
        ("pooled", MetadataFilter::all()),
        ("company=Alpha Motors", MetadataFilter::company("Alpha Motors")),
    ] {
        out.push_str(&format!("{label}\n"));
        for hit in store.filtered_top_k(&query, &filter, 2)? {
            out.push_str(&format!(
                "  {:.3} {:<12} {}\n",
                hit.score,
                hit.chunk.metadata.company,
                hit.chunk.chunk.text.trim_end()
            ));
        }
    }
    Ok(out)
}

fn main() -> metarag::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
