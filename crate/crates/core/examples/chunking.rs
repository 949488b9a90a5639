//! Splits a short transcript excerpt and prints each chunk with its span.
//!
//! Run with `cargo run --example chunking`.

use metarag::chunker::{default_separators, split_text, SplitterConfig};

const EXCERPT: &str = "Moderator: Good day and welcome to the call.\n\n\
Management: Revenue grew 12 percent on strong rural demand. Margins held steady.\n\n\
Analyst: Can you comment on raw material costs?\n\
Management: Costs eased through the quarter and we expect further relief.";

pub fn run_example() -> metarag::Result<String> {
    let mut out = String::new();
    for (size, overlap) in [(80, 0), (100, 20)] {
        let cfg = SplitterConfig::new(size, overlap, default_separators())?;
        out.push_str(&format!("chunk_size={size} chunk_overlap={overlap}\n"));
        for piece in split_text(EXCERPT, &cfg) {
            out.push_str(&format!(
                "  [{:>3}..{:>3}) {:?}\n",
                piece.span.start, piece.span.end, piece.text
            ));
        }
    }
    Ok(out)
}

fn main() -> metarag::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
