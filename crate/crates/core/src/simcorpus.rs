//! Seeded synthetic earnings-call corpus.
//!
//! Each company gets one transcript containing planted facts (template
//! sentences whose numeric payload occurs in no other transcript) and an
//! analyst Q&A section answering the same generic questions that every other
//! company's transcript also answers. The QA set pairs each fact question and
//! each generic question with the company-specific verbatim answer.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusManifest, Document, ManifestEntry};
use crate::error::{Error, Result};
use crate::harness::{write_qa_set, QAPair};

pub const GENERIC_QUESTIONS: [&str; 5] = [
    "What inquiries did analysts raise in this quarter?",
    "What pertinent details exist regarding industry trends for the quarter?",
    "Provide any insights into mergers and acquisitions (M&A) deliberated during the call.",
    "What essential and recurring subjects were discussed during the call?",
    "What is the holistic outlook for the business?",
];

pub const QUARTER: &str = "FY2024-Q1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_companies: usize,
    pub facts_per_company: usize,
    pub seed: u64,
    pub generic_questions: Vec<String>,
}

impl SyntheticSpec {
    pub fn new(n_companies: usize, facts_per_company: usize, seed: u64) -> Self {
        SyntheticSpec {
            n_companies,
            facts_per_company,
            seed,
            generic_questions: GENERIC_QUESTIONS.iter().map(|q| q.to_string()).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_companies < 2 {
            return Err(Error::Config("a synthetic corpus needs at least two companies".into()));
        }
        if self.facts_per_company == 0 {
            return Err(Error::Config("facts_per_company must be positive".into()));
        }
        Ok(())
    }
}

/// A planted fact: its payload string occurs in exactly one transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedFact {
    pub company: String,
    pub doc_id: String,
    pub payload: String,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub manifest_path: PathBuf,
    pub qa_path: PathBuf,
    pub documents: Vec<Document>,
    pub qa_pairs: Vec<QAPair>,
    pub planted: Vec<PlantedFact>,
}

const NAME_STEMS: [&str; 24] = [
    "Arvana", "Belmor", "Castellan", "Dravida", "Elmora", "Fenwick", "Galvani", "Haldane",
    "Istrana", "Jorvik", "Kestrel", "Lumora", "Marlowe", "Norvel", "Orrinsa", "Pellam",
    "Quillon", "Rydalis", "Sorelle", "Tamsin", "Ulvara", "Vardena", "Wexley", "Yarrowin",
];

const INDUSTRIES: [(&str, &str); 10] = [
    ("Motors", "Automobile"),
    ("Pharma", "Pharmaceuticals"),
    ("Steel", "Metals"),
    ("Power", "Energy - Power"),
    ("Finance", "Financial Services"),
    ("Telecom", "Telecommunication"),
    ("Foods", "Consumer Goods"),
    ("Cement", "Construction"),
    ("Infotech", "Information Technology"),
    ("Chemicals", "Chemicals"),
];

struct FactTemplate {
    metric: &'static str,
    sentence: &'static str,
    low: f64,
    high: f64,
}

const FACTS: [FactTemplate; 8] = [
    FactTemplate { metric: "revenue from operations", sentence: "{company} reported revenue from operations of Rs {v} crore for the quarter.", low: 1000.0, high: 90000.0 },
    FactTemplate { metric: "EBITDA margin", sentence: "EBITDA margin for {company} came in at {v} percent this quarter.", low: 5.0, high: 45.0 },
    FactTemplate { metric: "net profit", sentence: "Net profit at {company} stood at Rs {v} crore.", low: 100.0, high: 20000.0 },
    FactTemplate { metric: "order book", sentence: "The order book of {company} closed the quarter at Rs {v} crore.", low: 2000.0, high: 150000.0 },
    FactTemplate { metric: "capital expenditure", sentence: "{company} guided capital expenditure of Rs {v} crore for the full year.", low: 500.0, high: 30000.0 },
    FactTemplate { metric: "exports contribution to sales", sentence: "Exports contributed {v} percent of {company} sales in the quarter.", low: 2.0, high: 70.0 },
    FactTemplate { metric: "number of employees", sentence: "{company} ended the quarter with {v} thousand employees.", low: 1.0, high: 600.0 },
    FactTemplate { metric: "interim dividend", sentence: "The board of {company} declared an interim dividend of Rs {v} per share.", low: 0.5, high: 90.0 },
];

const TOPICS: [&str; 36] = [
    "rural demand", "urban consumption", "export orders", "raw material costs", "freight rates",
    "working capital", "digital channels", "pricing power", "capacity utilisation", "new product launches",
    "dealer inventory", "monsoon impact", "input cost inflation", "premiumisation", "market share gains",
    "debt reduction", "cash conversion", "regulatory approvals", "wage revisions", "energy transition",
    "plant automation", "credit quality", "deposit growth", "subscriber additions", "tariff revisions",
    "clinical pipeline", "generic pricing", "steel spreads", "coal availability", "renewable capacity",
    "cloud migration", "deal wins", "attrition trends", "cement volumes", "specialty chemicals", "logistics costs",
];

const TONES: [&str; 5] = ["positive", "cautious", "stable", "optimistic", "guarded"];

const FILLER: [&str; 30] = [
    "Management thanked participants for joining the call.",
    "The team remains focused on disciplined execution across all businesses.",
    "Operating conditions were broadly in line with expectations.",
    "The company continues to invest in people, processes and technology.",
    "Customer engagement remained healthy through the period.",
    "Cost optimisation programmes continued to deliver savings.",
    "The balance sheet remains strong and well capitalised.",
    "Execution on strategic priorities stayed on track.",
    "Management reiterated its commitment to governance and transparency.",
    "Supply chains were stable with no major disruptions reported.",
    "The leadership team highlighted progress on sustainability goals.",
    "Demand trends varied across geographies and product lines.",
    "Investments in capability building are expected to support future growth.",
    "The company maintained a prudent approach to capital allocation.",
    "Competitive intensity remained elevated in several markets.",
    "Management will share further updates at the next review.",
    "Working capital discipline was maintained through the quarter.",
    "The order pipeline continues to look reasonably healthy.",
    "Several initiatives announced last year are now delivering results.",
    "Pricing actions were taken selectively where market conditions allowed.",
    "The company remains watchful of global macroeconomic developments.",
    "Technology adoption across operations continued to improve efficiency.",
    "Inventory levels across the channel were at comfortable levels.",
    "The management team expressed confidence in the medium term outlook.",
    "Safety performance across sites remained a key area of focus.",
    "Brand investments were sustained despite a volatile environment.",
    "New partnerships were signed to broaden the distribution footprint.",
    "Return ratios remained above the cost of capital.",
    "Seasonal factors had a modest effect on quarterly performance.",
    "The company is evaluating opportunities in adjacent categories.",
];

/// Filler sentences per speaker turn. Turns come out at roughly 600 to 900
/// characters, so at the default chunk size each turn is its own chunk.
const FILLER_PER_TURN: usize = 9;

struct Company {
    name: String,
    sector: String,
    doc_id: String,
}

fn slug(name: &str) -> String {
    name.to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { '-' })
        .collect()
}

fn companies(rng: &mut ChaCha8Rng, n: usize) -> Vec<Company> {
    let mut combos: Vec<(usize, usize)> = (0..NAME_STEMS.len())
        .flat_map(|s| (0..INDUSTRIES.len()).map(move |i| (s, i)))
        .collect();
    combos.shuffle(rng);
    // Distinct stems first so company names rarely share a token.
    let mut used_stems = BTreeSet::new();
    let (mut first, mut rest): (Vec<_>, Vec<_>) = (Vec::new(), Vec::new());
    for combo in combos {
        if used_stems.insert(combo.0) {
            first.push(combo);
        } else {
            rest.push(combo);
        }
    }
    first
        .into_iter()
        .chain(rest)
        .cycle()
        .take(n)
        .enumerate()
        .map(|(i, (stem, industry))| {
            let round = i / (NAME_STEMS.len() * INDUSTRIES.len());
            let mut name = format!("{} {}", NAME_STEMS[stem], INDUSTRIES[industry].0);
            if round > 0 {
                name.push_str(&format!(" {}", roman(round + 1)));
            }
            Company {
                doc_id: format!("{}-{}", slug(&name), slug(QUARTER)),
                sector: INDUSTRIES[industry].1.to_string(),
                name,
            }
        })
        .collect()
}

fn roman(mut n: usize) -> String {
    const TABLE: [(usize, &str); 13] = [
        (1000, "M"), (900, "CM"), (500, "D"), (400, "CD"), (100, "C"), (90, "XC"),
        (50, "L"), (40, "XL"), (10, "X"), (9, "IX"), (5, "V"), (4, "IV"), (1, "I"),
    ];
    let mut out = String::new();
    for (value, glyph) in TABLE {
        while n >= value {
            out.push_str(glyph);
            n -= value;
        }
    }
    out
}

/// Payload strings that never contain one another.
struct Payloads(Vec<String>);

impl Payloads {
    fn draw(&mut self, rng: &mut ChaCha8Rng, low: f64, high: f64) -> String {
        loop {
            let cents = rng.gen_range((low * 100.0) as u64..(high * 100.0) as u64);
            let candidate = format!("{}.{:02}", cents / 100, cents % 100);
            let clash = self
                .0
                .iter()
                .any(|p| p.contains(&candidate) || candidate.contains(p.as_str()));
            if !clash {
                self.0.push(candidate.clone());
                return candidate;
            }
        }
    }
}

fn pick_distinct<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str], n: usize) -> Vec<&'a str> {
    pool.choose_multiple(rng, n).copied().collect()
}

fn filler(rng: &mut ChaCha8Rng, n: usize) -> String {
    pick_distinct(rng, &FILLER, n).join(" ")
}

fn generic_answer(
    rng: &mut ChaCha8Rng,
    payloads: &mut Payloads,
    index: usize,
    company: &str,
) -> (String, Option<String>) {
    let t = pick_distinct(rng, &TOPICS, 3);
    match index % 5 {
        0 => (
            format!("Analysts raised inquiries this quarter about {}, {} and the {} roadmap at {company}.", t[0], t[1], t[2]),
            None,
        ),
        1 => (
            format!("On industry trends for the quarter, {company} management pointed to {} and softer {}, while {} stayed steady.", t[0], t[1], t[2]),
            None,
        ),
        2 => {
            let target = format!("{} {}", NAME_STEMS[rng.gen_range(0..NAME_STEMS.len())], t[0]);
            let v = payloads.draw(rng, 50.0, 9000.0);
            (
                format!("During the call {company} discussed the proposed acquisition of a {target} business valued at Rs {v} crore."),
                Some(v),
            )
        }
        3 => (
            format!("Recurring subjects during the {company} call were {}, {} and {}.", t[0], t[1], t[2]),
            None,
        ),
        _ => (
            format!(
                "The holistic outlook for the {company} business is {}, with growth expected from {} and {}.",
                TONES[rng.gen_range(0..TONES.len())],
                t[0],
                t[1]
            ),
            None,
        ),
    }
}

/// Writes `manifest.jsonl`, `texts/*.txt` and `qa.jsonl` under `out_dir`.
pub fn generate(spec: &SyntheticSpec, out_dir: impl AsRef<Path>) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let out_dir = out_dir.as_ref();
    let texts_dir = out_dir.join("texts");
    fs::create_dir_all(&texts_dir).map_err(|e| Error::io(&texts_dir, e))?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut payloads = Payloads(Vec::new());
    let mut documents = Vec::with_capacity(spec.n_companies);
    let mut qa_pairs = Vec::new();
    let mut planted = Vec::new();
    let mut manifest = CorpusManifest::default();

    for company in companies(&mut rng, spec.n_companies) {
        let name = company.name.as_str();
        let mut paragraphs = vec![
            format!("{name} Earnings Conference Call\n{QUARTER}"),
            format!(
                "Moderator: Good day and welcome to the earnings conference call for the first quarter. {}",
                filler(&mut rng, FILLER_PER_TURN)
            ),
        ];

        for k in 0..spec.facts_per_company {
            let template = &FACTS[k % FACTS.len()];
            let metric = match k / FACTS.len() {
                0 => template.metric.to_string(),
                round => format!("{} for segment {}", template.metric, roman(round + 1)),
            };
            let v = payloads.draw(&mut rng, template.low, template.high);
            let mut sentence = template.sentence.replace("{company}", name).replace("{v}", &v);
            if k >= FACTS.len() {
                sentence = format!("Segment {}: {sentence}", roman(k / FACTS.len() + 1));
            }
            paragraphs.push(format!(
                "{sentence} {} That covers the {metric} at {name}.",
                filler(&mut rng, FILLER_PER_TURN)
            ));
            qa_pairs.push(QAPair {
                question: format!("What was the {metric} at {name}?"),
                company: name.to_string(),
                ground_truth: sentence,
            });
            planted.push(PlantedFact {
                company: name.to_string(),
                doc_id: company.doc_id.clone(),
                payload: v,
            });
        }

        paragraphs.push(format!("Question and answer session. {}", filler(&mut rng, 1)));
        for (qi, question) in spec.generic_questions.iter().enumerate() {
            let (answer, payload) = generic_answer(&mut rng, &mut payloads, qi, name);
            paragraphs.push(format!(
                "Analyst: {question}\nManagement: {answer} {}",
                filler(&mut rng, FILLER_PER_TURN - 1)
            ));
            qa_pairs.push(QAPair {
                question: question.clone(),
                company: name.to_string(),
                ground_truth: answer,
            });
            if let Some(v) = payload {
                planted.push(PlantedFact {
                    company: name.to_string(),
                    doc_id: company.doc_id.clone(),
                    payload: v,
                });
            }
        }
        paragraphs.push(format!("Moderator: That concludes the {name} call. {}", filler(&mut rng, 1)));

        let text = paragraphs.join("\n\n") + "\n";
        let rel_path = format!("texts/{}.txt", company.doc_id);
        let abs_path = out_dir.join(&rel_path);
        fs::write(&abs_path, &text).map_err(|e| Error::io(&abs_path, e))?;

        manifest.entries.push(ManifestEntry {
            doc_id: company.doc_id.clone(),
            company: name.to_string(),
            sector: company.sector.clone(),
            quarter: QUARTER.to_string(),
            text_path: rel_path,
        });
        documents.push(Document {
            doc_id: company.doc_id,
            company: name.to_string(),
            sector: company.sector,
            quarter: QUARTER.to_string(),
            source_path: abs_path.to_string_lossy().into_owned(),
            text,
        });
    }

    let manifest_path = out_dir.join("manifest.jsonl");
    manifest.write(&manifest_path)?;
    let qa_path = out_dir.join("qa.jsonl");
    write_qa_set(&qa_path, &qa_pairs)?;

    Ok(SyntheticCorpus {
        manifest_path,
        qa_path,
        documents,
        qa_pairs,
        planted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::load_corpus;

    #[test]
    fn counts() {
        let dir = tempfile::tempdir().unwrap();
        let c = generate(&SyntheticSpec::new(5, 4, 7), dir.path()).unwrap();
        assert_eq!(c.documents.len(), 5);
        let fact_pairs = c.qa_pairs.len() - 5 * GENERIC_QUESTIONS.len();
        assert!(fact_pairs >= 20);
        assert_eq!(load_corpus(&c.manifest_path).unwrap(), c.documents);
    }

    #[test]
    fn same_seed_same_bytes() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let ca = generate(&SyntheticSpec::new(4, 3, 99), a.path()).unwrap();
        let cb = generate(&SyntheticSpec::new(4, 3, 99), b.path()).unwrap();
        for rel in ["manifest.jsonl", "qa.jsonl"] {
            assert_eq!(fs::read(a.path().join(rel)).unwrap(), fs::read(b.path().join(rel)).unwrap());
        }
        for (da, db) in ca.documents.iter().zip(&cb.documents) {
            assert_eq!(fs::read(&da.source_path).unwrap(), fs::read(&db.source_path).unwrap());
        }
        let cc = generate(&SyntheticSpec::new(4, 3, 100), tempfile::tempdir().unwrap().path()).unwrap();
        assert_ne!(ca.documents[0].text, cc.documents[0].text);
    }

    #[test]
    fn payloads_occur_in_exactly_one_document() {
        let dir = tempfile::tempdir().unwrap();
        let c = generate(&SyntheticSpec::new(12, 10, 3), dir.path()).unwrap();
        for fact in &c.planted {
            let holders: Vec<&str> = c
                .documents
                .iter()
                .filter(|d| d.text.contains(&fact.payload))
                .map(|d| d.doc_id.as_str())
                .collect();
            assert_eq!(holders, vec![fact.doc_id.as_str()], "payload {}", fact.payload);
        }
    }

    #[test]
    fn answers_are_verbatim_and_generic_questions_shared() {
        let dir = tempfile::tempdir().unwrap();
        let c = generate(&SyntheticSpec::new(6, 4, 11), dir.path()).unwrap();
        for pair in &c.qa_pairs {
            let doc = c.documents.iter().find(|d| d.company == pair.company).unwrap();
            assert!(doc.text.contains(&pair.ground_truth), "{}", pair.ground_truth);
        }
        for q in GENERIC_QUESTIONS {
            let askers: BTreeSet<&str> = c
                .qa_pairs
                .iter()
                .filter(|p| p.question == q)
                .map(|p| p.company.as_str())
                .collect();
            assert_eq!(askers.len(), 6);
        }
    }

    #[test]
    fn many_companies_have_unique_names() {
        let dir = tempfile::tempdir().unwrap();
        let c = generate(&SyntheticSpec::new(250, 1, 5), dir.path()).unwrap();
        let names: BTreeSet<&str> = c.documents.iter().map(|d| d.company.as_str()).collect();
        assert_eq!(names.len(), 250);
    }

    #[test]
    fn rejects_single_company() {
        let dir = tempfile::tempdir().unwrap();
        assert!(generate(&SyntheticSpec::new(1, 4, 0), dir.path()).is_err());
    }

    #[test]
    fn roman_numerals() {
        assert_eq!(roman(2), "II");
        assert_eq!(roman(4), "IV");
        assert_eq!(roman(9), "IX");
        assert_eq!(roman(14), "XIV");
        assert_eq!(roman(40), "XL");
    }
}
