//! End-to-end tests of the argdist binary: wiring, exit codes and the
//! pipeline-equals-stages invariant.

use std::fs;

mod common;
use common::{run_argdist, synthetic_corpus_jsonl, synthetic_gold_csv};

const STORE_TSV: &str = "fall\tindex\t5\nfall\tshare\t3\nrise\tindex\t5\nrise\tshare\t3\nsink\tbond\t4\n";

#[test]
fn unknown_subcommand_exits_2_with_empty_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_argdist(dir.path(), ["frobnicate"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(output.stdout.is_empty());
    assert!(!output.stderr.is_empty());
}

#[test]
fn unknown_flag_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_argdist(dir.path(), ["rank", "--bogus-flag"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(output.stdout.is_empty());
}

#[test]
fn missing_input_exits_1_named_error() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_argdist(
        dir.path(),
        ["tag", "--in", "no-such-corpus.jsonl", "--out", "tagged.vrt"],
    );
    assert_eq!(output.status.code(), Some(1));
    assert!(output.stdout.is_empty());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("no-such-corpus.jsonl"), "stderr: {stderr}");
}

#[test]
fn rank_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("v.tsv"), STORE_TSV).unwrap();
    let output = run_argdist(
        dir.path(),
        [
            "rank",
            "--store",
            "v.tsv",
            "--prompt",
            "rise",
            "--candidates",
            "fall,sink",
        ],
    );
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "rank,candidate,score");
    assert!(lines[1].starts_with("1,fall,"), "got {:?}", lines[1]);
    assert!(lines[2].starts_with("2,sink,"), "got {:?}", lines[2]);
}

#[test]
fn rank_missing_prompt_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("v.tsv"), STORE_TSV).unwrap();
    let output = run_argdist(
        dir.path(),
        ["rank", "--store", "v.tsv", "--prompt", "soar", "--candidates", "fall"],
    );
    assert_eq!(output.status.code(), Some(1));
    assert!(output.stdout.is_empty());
    assert!(String::from_utf8_lossy(&output.stderr).contains("soar"));
}

#[test]
fn sim_writes_pair_scores() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("v.tsv"), STORE_TSV).unwrap();
    fs::write(dir.path().join("pairs.csv"), "rise,fall\nrise,sink\n").unwrap();
    let output = run_argdist(
        dir.path(),
        [
            "sim",
            "--store",
            "v.tsv",
            "--pairs",
            "pairs.csv",
            "--measure",
            "cosine",
            "--out",
            "scores.csv",
        ],
    );
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let scores = fs::read_to_string(dir.path().join("scores.csv")).unwrap();
    let lines: Vec<&str> = scores.lines().collect();
    assert_eq!(lines[0], "verb1,verb2,measure,score");
    assert_eq!(lines[1], "rise,fall,cosine,1");
    assert_eq!(lines[2], "rise,sink,cosine,0");
}

#[test]
fn eval_writes_report_json() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("v.tsv"), STORE_TSV).unwrap();
    fs::write(
        dir.path().join("gold.csv"),
        "prompt,response,task1_pct,task2_pct,total_pct,free_only\n\
         rise,fall,73,42,57,false\nrise,sink,10,25,18,false\n",
    )
    .unwrap();
    let output = run_argdist(
        dir.path(),
        ["eval", "--store", "v.tsv", "--gold", "gold.csv", "--out", "report.json"],
    );
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["n_pairs"], 2);
    assert_eq!(report["top1_rate"], 1.0);
    assert!(dir.path().join("report.json.manifest.json").exists());
}

#[test]
fn import_tagged_maps_external_tags() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("ext.vrt"), "fell\tVVD\tfall\nDow\tNP\tDow\n\n").unwrap();
    fs::write(dir.path().join("map.csv"), "external_tag,coarse_tag\nVVD,verb\nNP,noun\n").unwrap();
    let output = run_argdist(
        dir.path(),
        [
            "import-tagged",
            "--in",
            "ext.vrt",
            "--map",
            "map.csv",
            "--out",
            "tagged.vrt",
        ],
    );
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let tagged = fs::read_to_string(dir.path().join("tagged.vrt")).unwrap();
    assert_eq!(tagged, "fell\tverb\tfall\nDow\tnoun\tdow\n\n");
}

#[test]
fn import_tagged_malformed_line_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("ext.vrt"), "fell\tVVD\n").unwrap();
    fs::write(dir.path().join("map.csv"), "external_tag,coarse_tag\nVVD,verb\n").unwrap();
    let output = run_argdist(
        dir.path(),
        ["import-tagged", "--in", "ext.vrt", "--map", "map.csv", "--out", "t.vrt"],
    );
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("line 1"));
}

#[test]
fn ingest_reports_dedup() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = "Shares in the market rose steadily all day long today";
    let docs = format!(
        "{{\"id\": \"a\", \"body\": \"{prefix} first version\"}}\n\
         {{\"id\": \"b\", \"body\": \"{prefix} second version\"}}\n\
         {{\"id\": \"c\", \"body\": \"A different story entirely about bonds falling.\"}}\n"
    );
    fs::write(dir.path().join("docs.jsonl"), docs).unwrap();
    let output = run_argdist(
        dir.path(),
        [
            "ingest",
            "--input",
            "docs.jsonl",
            "--format",
            "jsonl",
            "--out",
            "corpus.jsonl",
        ],
    );
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let corpus = fs::read_to_string(dir.path().join("corpus.jsonl")).unwrap();
    assert_eq!(corpus.lines().count(), 2);
    let report: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("corpus.jsonl.report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["read"], 3);
    assert_eq!(report["kept"], 2);
    assert_eq!(report["dropped_duplicates"], 1);
    assert_eq!(report["collisions"][0]["kept_id"], "a");
}

#[test]
fn ingest_textdir_mode_sorts_files() {
    let dir = tempfile::tempdir().unwrap();
    let docs = dir.path().join("docs");
    fs::create_dir(&docs).unwrap();
    fs::write(docs.join("b.txt"), "Bonds fell sharply again today in London.").unwrap();
    fs::write(docs.join("a.txt"), "Shares rose sharply again today in Tokyo.").unwrap();
    let output = run_argdist(
        dir.path(),
        [
            "ingest",
            "--input",
            "docs",
            "--format",
            "textdir",
            "--out",
            "corpus.jsonl",
        ],
    );
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let corpus = fs::read_to_string(dir.path().join("corpus.jsonl")).unwrap();
    let ids: Vec<String> = corpus
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["id"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(ids, ["a.txt", "b.txt"]);
}

#[test]
fn extract_adjective_predicates_flag() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("tagged.vrt"),
        "Shares\tnoun\tshare\nare\tverb\tbe\nweak\tadjective\tweak\n\n",
    )
    .unwrap();
    let without = run_argdist(
        dir.path(),
        ["extract", "--in", "tagged.vrt", "--out", "plain.tsv"],
    );
    assert_eq!(without.status.code(), Some(0));
    assert_eq!(fs::read_to_string(dir.path().join("plain.tsv")).unwrap(), "");

    let with = run_argdist(
        dir.path(),
        [
            "extract",
            "--in",
            "tagged.vrt",
            "--adjective-predicates",
            "--out",
            "adj.tsv",
        ],
    );
    assert_eq!(with.status.code(), Some(0));
    assert_eq!(
        fs::read_to_string(dir.path().join("adj.tsv")).unwrap(),
        "weak\tsubject\tshare\t1\n"
    );
}

#[test]
fn eval_optional_pair_scores_csv() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("v.tsv"), STORE_TSV).unwrap();
    fs::write(
        dir.path().join("gold.csv"),
        "prompt,response,task1_pct,task2_pct,total_pct,free_only\n\
         rise,fall,73,42,57,false\n",
    )
    .unwrap();
    let output = run_argdist(
        dir.path(),
        [
            "eval",
            "--store",
            "v.tsv",
            "--gold",
            "gold.csv",
            "--out",
            "report.json",
            "--pairs-out",
            "pairs.csv",
        ],
    );
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let pairs = fs::read_to_string(dir.path().join("pairs.csv")).unwrap();
    assert_eq!(pairs, "prompt,response,score\nrise,fall,1\n");
}

#[test]
fn seed_flag_is_accepted_and_unused() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("v.tsv"), STORE_TSV).unwrap();
    let output = run_argdist(
        dir.path(),
        [
            "rank", "--store", "v.tsv", "--prompt", "rise", "--candidates", "fall", "--seed", "7",
        ],
    );
    assert_eq!(output.status.code(), Some(0));
}

#[test]
fn config_file_missing_path_exits_1_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("v.tsv"), STORE_TSV).unwrap();
    fs::write(dir.path().join("argdist.toml"), "[extract]\nstoplist = \"absent.txt\"\n").unwrap();
    let output = run_argdist(
        dir.path(),
        [
            "rank",
            "--config",
            "argdist.toml",
            "--store",
            "v.tsv",
            "--prompt",
            "rise",
            "--candidates",
            "fall",
        ],
    );
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("absent.txt"));
}

/// Running `pipeline` equals running the stages individually with the
/// same config: the final report (and intermediate files) are
/// byte-identical.
#[test]
fn pipeline_equals_individual_stages() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("corpus_in.jsonl"), synthetic_corpus_jsonl()).unwrap();
    fs::write(dir.path().join("gold.csv"), synthetic_gold_csv()).unwrap();

    let output = run_argdist(
        dir.path(),
        [
            "pipeline",
            "--input",
            "corpus_in.jsonl",
            "--format",
            "jsonl",
            "--gold",
            "gold.csv",
            "--out-dir",
            "chained",
        ],
    );
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));

    fs::create_dir_all(dir.path().join("staged")).unwrap();
    let steps: Vec<Vec<&str>> = vec![
        vec![
            "ingest", "--input", "corpus_in.jsonl", "--format", "jsonl", "--out",
            "staged/corpus.jsonl",
        ],
        vec!["tag", "--in", "staged/corpus.jsonl", "--out", "staged/tagged.vrt"],
        vec!["extract", "--in", "staged/tagged.vrt", "--out", "staged/triples.tsv"],
        vec!["vectors", "--in", "staged/triples.tsv", "--out", "staged/vectors.tsv"],
        vec![
            "eval", "--store", "staged/vectors.tsv", "--gold", "gold.csv", "--out",
            "staged/report.json",
        ],
    ];
    for step in steps {
        let output = run_argdist(dir.path(), step.clone());
        assert!(
            output.status.success(),
            "step {:?}: {}",
            step,
            String::from_utf8_lossy(&output.stderr)
        );
    }

    for name in ["corpus.jsonl", "tagged.vrt", "triples.tsv", "vectors.tsv", "report.json"] {
        let chained = fs::read(dir.path().join("chained").join(name)).unwrap();
        let staged = fs::read(dir.path().join("staged").join(name)).unwrap();
        assert_eq!(chained, staged, "{name} differs between pipeline and stages");
    }
}

#[test]
fn extract_jsonl_format() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("tagged.vrt"),
        "The\tother\tthe\nindex\tnoun\tindex\nfell\tverb\tfall\n\n",
    )
    .unwrap();
    let output = run_argdist(
        dir.path(),
        [
            "extract",
            "--in",
            "tagged.vrt",
            "--format",
            "jsonl",
            "--out",
            "triples.jsonl",
        ],
    );
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let triples = fs::read_to_string(dir.path().join("triples.jsonl")).unwrap();
    let row: serde_json::Value = serde_json::from_str(triples.lines().next().unwrap()).unwrap();
    assert_eq!(row["verb"], "fall");
    assert_eq!(row["relation"], "subject");
    assert_eq!(row["argument"], "index");
}

#[test]
fn vectors_relation_selection_subject_only() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("triples.tsv"),
        "fall\tsubject\tindex\t5\nfall\tobject\tpoint\t3\n",
    )
    .unwrap();
    let output = run_argdist(
        dir.path(),
        [
            "vectors",
            "--in",
            "triples.tsv",
            "--relations",
            "subj",
            "--out",
            "v.tsv",
        ],
    );
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let store = fs::read_to_string(dir.path().join("v.tsv")).unwrap();
    assert_eq!(store, "fall\tindex\t5\n");
}
