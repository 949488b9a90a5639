//! Scores a generated answer against ground truth with every offline metric.

use metarag::embed::HashEmbedder;
use metarag::metrics::{jaro, lcs_similarity, lcs_word_count, score_pair, LocalTokenEmbedder, ScoringProviders};

pub fn run_example() -> metarag::Result<String> {
    let truth = "Net profit at Alpha Motors stood at Rs 812.40 crore.";
    let candidates = [
        "Net profit at Alpha Motors stood at Rs 812.40 crore.",
        "Alpha Motors said net profit was Rs 812.40 crore for the quarter.",
        "Beta Motors reported net profit of Rs 95.10 crore.",
    ];
    let providers = ScoringProviders {
        token_embedder: Some(Box::new(LocalTokenEmbedder(HashEmbedder::new(256)?))),
        sequence_scorer: None,
    };

    let mut out = format!("truth: {truth}\n");
    for c in candidates {
        let report = score_pair(c, truth, &providers);
        out.push_str(&format!(
            "jaro={:.3} lcs_sim={:.3} lcs_words={} bertscore_f1={:.3}  {c}\n",
            jaro(c, truth),
            lcs_similarity(c, truth),
            lcs_word_count(c, truth),
            report.bertscore_f1.unwrap_or(f64::NAN),
        ));
    }
    out.push_str(&format!("jaro(MARTHA, MARHTA) = {:.6}\n", jaro("MARTHA", "MARHTA")));
    Ok(out)
}

fn main() -> metarag::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
