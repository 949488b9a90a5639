//! The offline embedder: signed feature hashing over lowercased word tokens.
//! Prints a cosine matrix for a handful of phrases.

use metarag::embed::{cosine_similarity, Embedder, HashEmbedder};

const PHRASES: [&str; 4] = [
    "revenue growth",
    "Revenue growth!",
    "revenue decline",
    "dividend per share",
];

pub fn run_example() -> metarag::Result<String> {
    let embedder = HashEmbedder::new(256)?;
    let vectors = embedder.embed(&PHRASES)?;
    let mut out = format!("{:<20}", "");
    for p in PHRASES {
        out.push_str(&format!("{:>20}", p));
    }
    out.push('\n');
    for (p, a) in PHRASES.iter().zip(&vectors) {
        out.push_str(&format!("{p:<20}"));
        for b in &vectors {
            out.push_str(&format!("{:>20.3}", cosine_similarity(a, b)?));
        }
        out.push('\n');
    }
    Ok(out)
}

fn main() -> metarag::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
