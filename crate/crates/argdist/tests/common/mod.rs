//! Shared helpers for the integration and acceptance suites.

use std::path::Path;
use std::process::{Command, Output};

/// (verb lemma, past form) for each side of a designed pair, plus the
/// three argument nouns the pair shares.
pub type SyntheticPair = ((&'static str, &'static str), (&'static str, &'static str), (&'static str, &'static str, &'static str));

/// The ten designed antonym pairs; all words are in the bundled lexicon
/// and irregular-verb table.
pub const SYNTHETIC_PAIRS: [SyntheticPair; 10] = [
    (("rise", "rose"), ("fall", "fell"), ("index", "share", "point")),
    (("gain", "gained"), ("lose", "lost"), ("price", "stock", "yield")),
    (("climb", "climbed"), ("tumble", "tumbled"), ("cent", "profit", "rate")),
    (("jump", "jumped"), ("slip", "slipped"), ("market", "bank", "bond")),
    (("rally", "rallied"), ("retreat", "retreated"), ("dollar", "euro", "pound")),
    (("advance", "advanced"), ("slide", "slid"), ("economy", "quarter", "company")),
    (("surge", "surged"), ("plunge", "plunged"), ("firm", "trader", "investor")),
    (("recover", "recovered"), ("worsen", "worsened"), ("analyst", "government", "fund")),
    (("soar", "soared"), ("plummet", "plummeted"), ("asset", "debt", "loan")),
    (("rebound", "rebounded"), ("dip", "dipped"), ("deal", "sale", "revenue")),
];

/// Build the synthetic mini-corpus: for each pair both verbs take the
/// same three arguments in similar proportions, and a distractor verb
/// takes disjoint arguments.
pub fn synthetic_corpus_sentences() -> Vec<String> {
    let mut sentences = Vec::new();
    for ((_, past_up), (_, past_down), (a, b, c)) in SYNTHETIC_PAIRS {
        for _ in 0..6 {
            sentences.push(format!("The {a} {past_up} 3 {b}s."));
            sentences.push(format!("The {a} {past_down} 3 {b}s."));
        }
        for _ in 0..4 {
            sentences.push(format!("The {c} {past_up} 2 {b}s."));
            sentences.push(format!("The {c} {past_down} 2 {b}s."));
        }
    }
    for _ in 0..5 {
        sentences.push("The contract traded 4 futures.".to_string());
    }
    sentences
}

/// One JSONL document per synthetic sentence, so dedup keeps them all
/// (each sentence is unique) and article order is the input order.
pub fn synthetic_corpus_jsonl() -> String {
    synthetic_corpus_sentences()
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{{\"id\": \"s{i:04}\", \"source\": \"synthetic\", \"body\": {s:?}}}\n"))
        .collect()
}

/// Gold rows over the synthetic vocabulary: within-pair rows and a few
/// cross-pair rows so similarity varies and Pearson is defined.
pub fn synthetic_gold_csv() -> String {
    let mut out = String::from("prompt,response,task1_pct,task2_pct,total_pct,free_only\n");
    out.push_str("rise,fall,73,42,57,false\n");
    out.push_str("rise,lose,5,8,7,false\n");
    out.push_str("gain,lose,33,92,63,false\n");
    out.push_str("gain,tumble,0,8,4,false\n");
    out.push_str("climb,tumble,46,17,31,false\n");
    out.push_str("jump,slip,10,20,15,false\n");
    out.push_str("rally,retreat,7,42,24,false\n");
    out
}

pub fn argdist_binary() -> &'static str {
    env!("CARGO_BIN_EXE_argdist")
}

pub fn run_argdist<I, S>(dir: &Path, args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(argdist_binary())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("argdist binary runs")
}
