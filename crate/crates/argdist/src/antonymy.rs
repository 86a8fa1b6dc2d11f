//! Antonym ranking and evaluation against the bundled human-judgment
//! gold data.
//!
//! The gold file carries, for each prompt word, the antonym responses
//! people produced in a free-generation task (task 1) and a
//! match-the-opposite task (task 2), as percentages of presentations.
//! Evaluation correlates distributional similarity with those
//! percentages and checks how often the most-frequently-identified
//! response is ranked first or second by similarity.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::similarity::{similarity, SimilarityConfig, SimilarityError};
use crate::vectors::VectorStore;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("gold row {row}: {field} = {value} outside [0, 100]")]
    PercentageOutOfRange {
        row: usize,
        field: &'static str,
        value: f64,
    },
    #[error("gold row {row}: free-only response must have task2_pct = 0, got {task2}")]
    FreeOnlyWithTask2 { row: usize, task2: f64 },
    #[error("gold row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("prompt {prompt:?} absent from vector store")]
    PromptMissing { prompt: String },
    #[error("empty candidate list for prompt {prompt:?}")]
    EmptyCandidates { prompt: String },
    #[error("pearson requires equal-length sequences, got {left} and {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("pearson requires at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("pearson undefined for a constant sequence")]
    ConstantSequence,
    #[error("no candidate-set size known for prompt {prompt:?}")]
    MissingCandidateSet { prompt: String },
    #[error("candidate set for prompt {prompt:?} is empty")]
    ZeroCandidates { prompt: String },
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One gold row: a prompt-response antonym pair with its human
/// identification percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldRecord {
    pub prompt: String,
    pub response: String,
    pub task1_pct: f64,
    pub task2_pct: f64,
    pub total_pct: f64,
    pub free_only: bool,
}

/// Gold records plus soft-consistency warnings (the bundled table
/// contains one row whose total is off its task mean by more than
/// rounding allows; that is reported, not rejected).
#[derive(Debug, Default)]
pub struct GoldData {
    pub records: Vec<GoldRecord>,
    pub warnings: Vec<String>,
}

/// Load and validate gold CSV
/// (`prompt,response,task1_pct,task2_pct,total_pct,free_only`).
pub fn load_gold<R: Read>(reader: R) -> Result<GoldData, EvalError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut data = GoldData::default();
    for (i, row) in rdr.deserialize::<GoldRecord>().enumerate() {
        let row_no = i + 2; // header is row 1
        let record = row.map_err(|e| EvalError::MalformedRow {
            row: row_no,
            reason: e.to_string(),
        })?;
        for (field, value) in [
            ("task1_pct", record.task1_pct),
            ("task2_pct", record.task2_pct),
            ("total_pct", record.total_pct),
        ] {
            if !(0.0..=100.0).contains(&value) || !value.is_finite() {
                return Err(EvalError::PercentageOutOfRange {
                    row: row_no,
                    field,
                    value,
                });
            }
        }
        if record.prompt.is_empty() || record.response.is_empty() {
            return Err(EvalError::MalformedRow {
                row: row_no,
                reason: "empty prompt or response".into(),
            });
        }
        if record.free_only && record.task2_pct != 0.0 {
            return Err(EvalError::FreeOnlyWithTask2 {
                row: row_no,
                task2: record.task2_pct,
            });
        }
        let mean = (record.task1_pct + record.task2_pct) / 2.0;
        if (record.total_pct - mean).abs() > 0.5 {
            data.warnings.push(format!(
                "row {row_no}: total_pct {} differs from task mean {mean} by more than 0.5 ({}-{})",
                record.total_pct, record.prompt, record.response
            ));
        }
        data.records.push(record);
    }
    Ok(data)
}

/// Serialize gold records in the exact CSV format [`load_gold`] accepts.
pub fn write_gold(records: &[GoldRecord]) -> String {
    let mut out = String::from("prompt,response,task1_pct,task2_pct,total_pct,free_only\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.prompt, r.response, r.task1_pct, r.task2_pct, r.total_pct, r.free_only
        ));
    }
    out
}

/// The bundled 56-row gold fixture.
pub fn bundled_gold() -> GoldData {
    load_gold(include_str!("../gold/table3.csv").as_bytes()).expect("bundled gold fixture is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedCandidate {
    pub lemma: String,
    pub score: f64,
}

/// Candidates ordered by descending similarity to the prompt; ties break
/// lexicographically.
#[derive(Debug, Clone, Serialize)]
pub struct Ranking {
    pub prompt: String,
    pub candidates: Vec<RankedCandidate>,
    /// Candidates skipped because the store has no vector for them.
    pub missing: Vec<String>,
}

/// Rank candidate antonyms for a prompt by similarity of argument
/// distributions. The prompt itself and duplicates are dropped from the
/// candidate list; candidates without vectors are reported in
/// `missing`.
pub fn rank_candidates(
    prompt: &str,
    candidates: &[String],
    store: &VectorStore,
    config: &SimilarityConfig,
) -> Result<Ranking, EvalError> {
    if candidates.is_empty() {
        return Err(EvalError::EmptyCandidates {
            prompt: prompt.to_string(),
        });
    }
    let prompt_vector = store.get_text(prompt).ok_or_else(|| EvalError::PromptMissing {
        prompt: prompt.to_string(),
    })?;
    let mut seen = HashSet::new();
    let mut ranked = Vec::new();
    let mut missing = Vec::new();
    for candidate in candidates {
        if candidate == prompt || !seen.insert(candidate.clone()) {
            continue;
        }
        match store.get_text(candidate) {
            Some(vector) => {
                let score = similarity(prompt_vector, vector, config)?;
                ranked.push(RankedCandidate {
                    lemma: candidate.clone(),
                    score: score.value,
                });
            }
            None => missing.push(candidate.clone()),
        }
    }
    sort_ranking(&mut ranked);
    Ok(Ranking {
        prompt: prompt.to_string(),
        candidates: ranked,
        missing,
    })
}

fn sort_ranking(candidates: &mut [RankedCandidate]) {
    candidates.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .expect("similarity scores are finite")
            .then_with(|| a.lemma.cmp(&b.lemma))
    });
}

/// Sample Pearson product-moment correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, EvalError> {
    if xs.len() != ys.len() {
        return Err(EvalError::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 3 {
        return Err(EvalError::TooFewPoints(xs.len()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(EvalError::ConstantSequence);
    }
    Ok((cov / (vx.sqrt() * vy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct FailedPair {
    pub prompt: String,
    pub response: String,
    pub error: String,
}

/// Per-prompt evaluation detail.
#[derive(Debug, Clone, Serialize)]
pub struct PromptOutcome {
    pub prompt: String,
    /// Most-frequently-identified response: max total_pct, ties broken
    /// by task2_pct then lexicographically.
    pub favored: String,
    /// Scored responses ranked by descending similarity.
    pub ranking: Vec<RankedCandidate>,
    /// 1-based rank of the favored response, when it was scored.
    pub favored_rank: Option<usize>,
    /// Number of scored gold pairs for this prompt.
    pub scored_pairs: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub config: SimilarityConfig,
    /// Gold pairs that received a similarity score.
    pub n_pairs: usize,
    /// Prompts whose favored response was scored (the top-k denominator).
    pub n_prompts: usize,
    pub pearson_task1: Option<f64>,
    pub pearson_task2: Option<f64>,
    pub pearson_total: Option<f64>,
    /// Fraction of prompts whose favored response ranks first / within
    /// the top two by similarity.
    pub top1_rate: f64,
    pub top2_rate: f64,
    /// The same hits weighted by each prompt's scored pair count, for
    /// the per-pair reading of the rates.
    pub top1_rate_pairs: f64,
    pub top2_rate_pairs: f64,
    pub uncovered: Vec<String>,
    pub failed: Vec<FailedPair>,
    pub prompts: Vec<PromptOutcome>,
}

/// Evaluate with an arbitrary similarity source: `None` marks a pair the
/// source cannot cover, `Some(Err)` a failed computation. Pair failures
/// never abort the run.
pub fn evaluate_with<F>(gold: &[GoldRecord], config: SimilarityConfig, sim: F) -> EvaluationReport
where
    F: Fn(&str, &str) -> Option<Result<f64, String>>,
{
    let mut scored: Vec<(&GoldRecord, f64)> = Vec::new();
    let mut uncovered = Vec::new();
    let mut failed = Vec::new();
    for record in gold {
        match sim(&record.prompt, &record.response) {
            Some(Ok(score)) => scored.push((record, score)),
            Some(Err(error)) => failed.push(FailedPair {
                prompt: record.prompt.clone(),
                response: record.response.clone(),
                error,
            }),
            None => uncovered.push(format!("{}-{}", record.prompt, record.response)),
        }
    }

    let sims: Vec<f64> = scored.iter().map(|(_, s)| *s).collect();
    let correlate = |pick: fn(&GoldRecord) -> f64| -> Option<f64> {
        let xs: Vec<f64> = scored.iter().map(|(r, _)| pick(r)).collect();
        pearson(&xs, &sims).ok()
    };

    // Group gold by prompt; the favored response comes from all gold
    // rows, rankings from the scored ones.
    let mut by_prompt: BTreeMap<&str, Vec<&GoldRecord>> = BTreeMap::new();
    for record in gold {
        by_prompt.entry(&record.prompt).or_default().push(record);
    }
    let scored_of = |prompt: &str| -> Vec<(&GoldRecord, f64)> {
        scored
            .iter()
            .filter(|(r, _)| r.prompt == prompt)
            .map(|(r, s)| (*r, *s))
            .collect()
    };

    let mut prompts = Vec::new();
    let mut included = 0usize;
    let mut top1_hits = 0usize;
    let mut top2_hits = 0usize;
    let mut pair_weight = 0usize;
    let mut top1_pair_weight = 0usize;
    let mut top2_pair_weight = 0usize;

    for (prompt, records) in &by_prompt {
        let favored = records
            .iter()
            .min_by(|a, b| {
                b.total_pct
                    .partial_cmp(&a.total_pct)
                    .expect("finite percentages")
                    .then_with(|| {
                        b.task2_pct
                            .partial_cmp(&a.task2_pct)
                            .expect("finite percentages")
                    })
                    .then_with(|| a.response.cmp(&b.response))
            })
            .expect("non-empty group")
            .response
            .clone();
        let prompt_scored = scored_of(prompt);
        let mut ranking: Vec<RankedCandidate> = prompt_scored
            .iter()
            .map(|(r, s)| RankedCandidate {
                lemma: r.response.clone(),
                score: *s,
            })
            .collect();
        sort_ranking(&mut ranking);
        let favored_rank = ranking
            .iter()
            .position(|c| c.lemma == favored)
            .map(|p| p + 1);
        if let Some(rank) = favored_rank {
            included += 1;
            pair_weight += ranking.len();
            if rank == 1 {
                top1_hits += 1;
                top1_pair_weight += ranking.len();
            }
            if rank <= 2 {
                top2_hits += 1;
                top2_pair_weight += ranking.len();
            }
        }
        prompts.push(PromptOutcome {
            prompt: prompt.to_string(),
            favored,
            scored_pairs: ranking.len(),
            favored_rank,
            ranking,
        });
    }

    let rate = |hits: usize, denom: usize| if denom == 0 { 0.0 } else { hits as f64 / denom as f64 };

    EvaluationReport {
        config,
        n_pairs: scored.len(),
        n_prompts: included,
        pearson_task1: correlate(|r| r.task1_pct),
        pearson_task2: correlate(|r| r.task2_pct),
        pearson_total: correlate(|r| r.total_pct),
        top1_rate: rate(top1_hits, included),
        top2_rate: rate(top2_hits, included),
        top1_rate_pairs: rate(top1_pair_weight, pair_weight),
        top2_rate_pairs: rate(top2_pair_weight, pair_weight),
        uncovered,
        failed,
        prompts,
    }
}

/// Evaluate a vector store against gold data: similarity for every
/// covered pair, Pearson of similarity against the task percentages, and
/// top-1/top-2 rates for the most-frequently-identified responses.
pub fn evaluate(gold: &[GoldRecord], store: &VectorStore, config: &SimilarityConfig) -> EvaluationReport {
    evaluate_with(gold, *config, |prompt, response| {
        let x = store.get_text(prompt)?;
        let y = store.get_text(response)?;
        Some(similarity(x, y, config).map(|s| s.value).map_err(|e| e.to_string()))
    })
}

/// Conservative chance level: the mean over prompts of one over the
/// number of available choices (the fixed contrast sheet plus responses
/// only produced in free generation).
pub fn chance_estimate(
    gold: &[GoldRecord],
    candidate_set_sizes: &BTreeMap<String, usize>,
) -> Result<f64, EvalError> {
    let prompts: BTreeSet<&str> = gold.iter().map(|r| r.prompt.as_str()).collect();
    if prompts.is_empty() {
        return Err(EvalError::ZeroCandidates {
            prompt: "<no prompts>".into(),
        });
    }
    let mut denominators = Vec::with_capacity(prompts.len());
    for prompt in &prompts {
        let base = candidate_set_sizes
            .get(*prompt)
            .copied()
            .ok_or_else(|| EvalError::MissingCandidateSet {
                prompt: prompt.to_string(),
            })?;
        let free_only = gold
            .iter()
            .filter(|r| r.prompt == *prompt && r.free_only)
            .count();
        let available = base + free_only;
        if available == 0 {
            return Err(EvalError::ZeroCandidates {
                prompt: prompt.to_string(),
            });
        }
        denominators.push(available as u64);
    }
    Ok(mean_of_reciprocals(&denominators))
}

/// Mean of 1/d over the denominators, accumulated as an exact reduced
/// fraction so uniform sets give the exact closed form (n equal
/// 20-choice sets yield exactly 0.05). Falls back to float summation if
/// the fraction overflows u128.
fn mean_of_reciprocals(denominators: &[u64]) -> f64 {
    fn gcd(mut a: u128, mut b: u128) -> u128 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a.max(1)
    }
    let exact = || -> Option<f64> {
        let mut num: u128 = 0;
        let mut den: u128 = 1;
        for &d in denominators {
            let d = d as u128;
            num = num.checked_mul(d)?.checked_add(den)?;
            den = den.checked_mul(d)?;
            let g = gcd(num, den);
            num /= g;
            den /= g;
        }
        den = den.checked_mul(denominators.len() as u128)?;
        let g = gcd(num, den);
        Some((num / g) as f64 / (den / g) as f64)
    };
    exact().unwrap_or_else(|| {
        let sum: f64 = denominators.iter().map(|d| 1.0 / *d as f64).sum();
        sum / denominators.len() as f64
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::{CoarseTag, Lemma};
    use crate::vectors::{ArgumentVector, VectorMap};
    use proptest::prelude::*;

    fn record(prompt: &str, response: &str, t1: f64, t2: f64, total: f64) -> GoldRecord {
        GoldRecord {
            prompt: prompt.into(),
            response: response.into(),
            task1_pct: t1,
            task2_pct: t2,
            total_pct: total,
            free_only: false,
        }
    }

    fn store(vectors: &[(&str, &[(&str, u64)])]) -> VectorStore {
        let mut map = VectorMap::new();
        for (verb, entries) in vectors {
            let lemma = Lemma::new(*verb, CoarseTag::Verb);
            let mut v = ArgumentVector::new(lemma.clone());
            for (arg, count) in *entries {
                v.add(Lemma::new(*arg, CoarseTag::Noun), *count);
            }
            map.insert(lemma, v);
        }
        VectorStore::from_map(map)
    }

    #[test]
    fn load_gold_valid_rows() {
        let csv = "prompt,response,task1_pct,task2_pct,total_pct,free_only\n\
                   increase,decrease,100,100,100,false\n\
                   weak,strong,93,100,96,false\n\
                   rise,fall,73,42,57,false\n";
        let data = load_gold(csv.as_bytes()).unwrap();
        assert_eq!(data.records.len(), 3);
        assert!(data.warnings.is_empty());
        assert_eq!(data.records[0].total_pct, 100.0);
    }

    #[test]
    fn load_gold_rejects_out_of_range() {
        let csv = "prompt,response,task1_pct,task2_pct,total_pct,free_only\n\
                   rise,fall,104,42,57,false\n";
        match load_gold(csv.as_bytes()).unwrap_err() {
            EvalError::PercentageOutOfRange { row, field, value } => {
                assert_eq!(row, 2);
                assert_eq!(field, "task1_pct");
                assert_eq!(value, 104.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn load_gold_rejects_malformed_row() {
        let csv = "prompt,response,task1_pct,task2_pct,total_pct,free_only\n\
                   rise,fall,not-a-number,42,57,false\n";
        assert!(matches!(
            load_gold(csv.as_bytes()).unwrap_err(),
            EvalError::MalformedRow { row: 2, .. }
        ));
    }

    #[test]
    fn load_gold_rejects_free_only_with_task2() {
        let csv = "prompt,response,task1_pct,task2_pct,total_pct,free_only\n\
                   rise,fall,10,42,26,true\n";
        assert!(matches!(
            load_gold(csv.as_bytes()).unwrap_err(),
            EvalError::FreeOnlyWithTask2 { row: 2, .. }
        ));
    }

    #[test]
    fn load_gold_warns_on_inconsistent_total() {
        let csv = "prompt,response,task1_pct,task2_pct,total_pct,free_only\n\
                   decline,incline,30,0,13,true\n";
        let data = load_gold(csv.as_bytes()).unwrap();
        assert_eq!(data.records.len(), 1);
        assert_eq!(data.warnings.len(), 1);
    }

    #[test]
    fn bundled_fixture_has_56_rows_one_warning() {
        let data = bundled_gold();
        assert_eq!(data.records.len(), 56);
        // decline-incline (30, 0, 13) is the gold table's one
        // mean-consistency outlier.
        assert_eq!(data.warnings.len(), 1);
        assert!(data.warnings[0].contains("decline-incline"));
    }

    #[test]
    fn gold_round_trip() {
        let data = bundled_gold();
        let text = write_gold(&data.records);
        let back = load_gold(text.as_bytes()).unwrap();
        assert_eq!(back.records, data.records);
    }

    #[test]
    fn rank_singleton() {
        let s = store(&[("rise", &[("index", 2)]), ("fall", &[("index", 3)])]);
        let ranking = rank_candidates(
            "rise",
            &["fall".to_string()],
            &s,
            &SimilarityConfig::default(),
        )
        .unwrap();
        assert_eq!(ranking.candidates.len(), 1);
        assert_eq!(ranking.candidates[0].lemma, "fall");
    }

    #[test]
    fn rank_ties_break_lexicographically() {
        // drop and fall have identical vectors, hence identical scores.
        let s = store(&[
            ("rise", &[("index", 2), ("share", 1)]),
            ("fall", &[("index", 2), ("share", 1)]),
            ("drop", &[("index", 2), ("share", 1)]),
        ]);
        let ranking = rank_candidates(
            "rise",
            &["fall".to_string(), "drop".to_string()],
            &s,
            &SimilarityConfig::default(),
        )
        .unwrap();
        let names: Vec<&str> = ranking.candidates.iter().map(|c| c.lemma.as_str()).collect();
        assert_eq!(names, ["drop", "fall"]);
    }

    #[test]
    fn rank_shared_arguments_beat_disjoint() {
        let s = store(&[
            ("rise", &[("index", 5), ("share", 3)]),
            ("fall", &[("index", 5), ("share", 3)]),
            ("eat", &[("sandwich", 9)]),
        ]);
        let ranking = rank_candidates(
            "rise",
            &["eat".to_string(), "fall".to_string()],
            &s,
            &SimilarityConfig::default(),
        )
        .unwrap();
        assert_eq!(ranking.candidates[0].lemma, "fall");
        assert!(ranking.candidates[0].score > ranking.candidates[1].score);
        assert_eq!(ranking.candidates[1].score, 0.0);
    }

    #[test]
    fn rank_missing_prompt_errors() {
        let s = store(&[("fall", &[("index", 3)])]);
        assert!(matches!(
            rank_candidates("rise", &["fall".to_string()], &s, &SimilarityConfig::default()),
            Err(EvalError::PromptMissing { .. })
        ));
    }

    #[test]
    fn rank_empty_candidates_errors() {
        let s = store(&[("rise", &[("index", 3)])]);
        assert!(matches!(
            rank_candidates("rise", &[], &s, &SimilarityConfig::default()),
            Err(EvalError::EmptyCandidates { .. })
        ));
    }

    #[test]
    fn rank_reports_missing_candidates_and_skips_prompt() {
        let s = store(&[("rise", &[("index", 3)]), ("fall", &[("index", 1)])]);
        let ranking = rank_candidates(
            "rise",
            &["rise".to_string(), "fall".to_string(), "soar".to_string()],
            &s,
            &SimilarityConfig::default(),
        )
        .unwrap();
        assert_eq!(ranking.candidates.len(), 1);
        assert_eq!(ranking.missing, vec!["soar".to_string()]);
    }

    #[test]
    fn pearson_perfect_linear() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        assert!((pearson(&xs, &ys).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_perfect_inverse() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson(&xs, &ys).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_hand_fixture() {
        let got = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((got - 0.8).abs() < 1e-12);
    }

    #[test]
    fn pearson_constant_errors() {
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(EvalError::ConstantSequence)
        ));
    }

    #[test]
    fn pearson_too_few_points() {
        assert!(matches!(
            pearson(&[1.0, 2.0], &[1.0, 2.0]),
            Err(EvalError::TooFewPoints(2))
        ));
    }

    #[test]
    fn evaluate_singleton_prompt_top1() {
        let gold = vec![record("rise", "fall", 73.0, 42.0, 57.0)];
        let s = store(&[
            ("rise", &[("index", 5), ("share", 3)]),
            ("fall", &[("index", 5), ("share", 3)]),
        ]);
        let report = evaluate(&gold, &s, &SimilarityConfig::default());
        assert_eq!(report.n_pairs, 1);
        assert_eq!(report.top1_rate, 1.0);
        assert_eq!(report.top2_rate, 1.0);
        assert!(report.pearson_task1.is_none(), "fewer than 3 points");
    }

    #[test]
    fn evaluate_uncovered_pairs_reported() {
        let gold = vec![
            record("rise", "fall", 73.0, 42.0, 57.0),
            record("rise", "ghost", 10.0, 0.0, 5.0),
        ];
        let s = store(&[
            ("rise", &[("index", 5)]),
            ("fall", &[("index", 5)]),
        ]);
        let report = evaluate(&gold, &s, &SimilarityConfig::default());
        assert_eq!(report.n_pairs, 1);
        assert_eq!(report.uncovered, vec!["rise-ghost".to_string()]);
    }

    #[test]
    fn evaluate_favored_uses_task2_then_lexicographic_ties() {
        let gold = vec![
            record("fall", "gain", 0.0, 8.0, 4.0),
            record("fall", "increase", 0.0, 8.0, 4.0),
        ];
        let s = store(&[
            ("fall", &[("index", 5), ("share", 2)]),
            ("gain", &[("index", 5), ("share", 2)]),
            ("increase", &[("other", 7)]),
        ]);
        let report = evaluate(&gold, &s, &SimilarityConfig::default());
        assert_eq!(report.prompts.len(), 1);
        assert_eq!(report.prompts[0].favored, "gain");
        assert_eq!(report.prompts[0].favored_rank, Some(1));
    }

    #[test]
    fn evaluate_matches_injected_similarity_ordering() {
        // Strictly increasing transforms of the scores leave rankings,
        // and so the top-k rates, unchanged.
        let data = bundled_gold();
        let base = evaluate_with(&data.records, SimilarityConfig::default(), |p, r| {
            Some(Ok((p.len() * 7 + r.len()) as f64 % 13.0))
        });
        let transformed = evaluate_with(&data.records, SimilarityConfig::default(), |p, r| {
            Some(Ok(2.0 * ((p.len() * 7 + r.len()) as f64 % 13.0) + 1.0))
        });
        assert_eq!(base.top1_rate, transformed.top1_rate);
        assert_eq!(base.top2_rate, transformed.top2_rate);
        assert_eq!(base.n_prompts, transformed.n_prompts);
    }

    #[test]
    fn chance_uniform_20_choices() {
        let gold = vec![
            record("a", "x", 10.0, 10.0, 10.0),
            record("b", "y", 10.0, 10.0, 10.0),
        ];
        let sizes: BTreeMap<String, usize> =
            [("a".to_string(), 20), ("b".to_string(), 20)].into();
        assert_eq!(chance_estimate(&gold, &sizes).unwrap(), 0.05);
    }

    #[test]
    fn chance_single_prompt_four_choices() {
        let gold = vec![record("a", "x", 10.0, 10.0, 10.0)];
        let sizes: BTreeMap<String, usize> = [("a".to_string(), 4)].into();
        assert_eq!(chance_estimate(&gold, &sizes).unwrap(), 0.25);
    }

    #[test]
    fn chance_counts_free_only_responses() {
        let mut free = record("a", "z", 10.0, 0.0, 5.0);
        free.free_only = true;
        let gold = vec![record("a", "x", 10.0, 10.0, 10.0), free];
        let sizes: BTreeMap<String, usize> = [("a".to_string(), 15)].into();
        // 15 sheet words plus one free-only response.
        assert_eq!(chance_estimate(&gold, &sizes).unwrap(), 1.0 / 16.0);
    }

    #[test]
    fn chance_on_bundled_gold_near_five_percent() {
        // 15-word contrast sheets plus each prompt's observed free-only
        // responses give a conservative chance level close to 5%.
        let data = bundled_gold();
        let sizes: BTreeMap<String, usize> = data
            .records
            .iter()
            .map(|r| (r.prompt.clone(), 15))
            .collect();
        let chance = chance_estimate(&data.records, &sizes).unwrap();
        assert!((0.04..=0.08).contains(&chance), "chance {chance}");
    }

    #[test]
    fn chance_zero_candidates_errors() {
        let gold = vec![record("a", "x", 10.0, 10.0, 10.0)];
        let sizes: BTreeMap<String, usize> = [("a".to_string(), 0)].into();
        assert!(matches!(
            chance_estimate(&gold, &sizes),
            Err(EvalError::ZeroCandidates { .. })
        ));
    }

    proptest! {
        #[test]
        fn pearson_affine_invariance(
            pairs in proptest::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 3..20),
            a in 0.1f64..5.0,
            b in -10.0f64..10.0,
        ) {
            let xs: Vec<f64> = pairs.iter().map(|(x, _)| *x).collect();
            let ys: Vec<f64> = pairs.iter().map(|(_, y)| *y).collect();
            let transformed: Vec<f64> = ys.iter().map(|y| a * y + b).collect();
            if let (Ok(base), Ok(after)) = (pearson(&xs, &ys), pearson(&xs, &transformed)) {
                prop_assert!((base - after).abs() < 1e-9);
            }
            let flipped: Vec<f64> = ys.iter().map(|y| -a * y + b).collect();
            if let (Ok(base), Ok(after)) = (pearson(&xs, &ys), pearson(&xs, &flipped)) {
                prop_assert!((base + after).abs() < 1e-9);
            }
        }

        #[test]
        fn ranking_is_permutation_invariant(seed in 0u64..1000) {
            let s = store(&[
                ("rise", &[("index", 5), ("share", 3), ("point", 1)]),
                ("fall", &[("index", 5), ("share", 2)]),
                ("gain", &[("index", 1), ("point", 4)]),
                ("eat", &[("sandwich", 2)]),
            ]);
            let mut candidates = vec!["fall".to_string(), "gain".to_string(), "eat".to_string()];
            // Rotate by seed for a cheap deterministic permutation.
            candidates.rotate_left((seed % 3) as usize);
            let ranking = rank_candidates("rise", &candidates, &s, &SimilarityConfig::default()).unwrap();
            let names: Vec<&str> = ranking.candidates.iter().map(|c| c.lemma.as_str()).collect();
            prop_assert_eq!(names, vec!["fall", "gain", "eat"]);
            for w in ranking.candidates.windows(2) {
                prop_assert!(w[0].score >= w[1].score);
            }
        }
    }
}
