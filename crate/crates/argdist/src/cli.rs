//! The `argdist` command line: one subcommand per pipeline stage plus
//! `pipeline`, which chains ingest, tag, extract, vectors and eval.
//!
//! Exit status: 0 on success, 1 on input errors, 2 on usage errors.
//! Diagnostics go to stderr; data goes to files or stdout.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::annotate::{read_pretagged, tag, write_pretagged, TagMap, TaggedToken};
use crate::antonymy::{evaluate, load_gold, rank_candidates};
use crate::config::{sha256_hex, Manifest, PipelineConfig, Resources};
use crate::corpus::{
    ingest, read_jsonl, sentences_of, Article, IngestOptions, RawDocument,
};
use crate::extract::{chunk, count_triples, extract_triples, read_triples_tsv, write_triples_tsv};
use crate::similarity::{similarity, Measure};
use crate::vectors::{build_vectors_from_counts, Fill, VectorStore};

#[derive(Parser, Debug)]
#[command(
    name = "argdist",
    version,
    about = "Verb argument-distribution extraction and distributional antonym ranking"
)]
pub struct Cli {
    /// TOML config file; flags override config values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Reserved for future use; no current operation is stochastic.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Normalize and deduplicate raw documents into a corpus file.
    Ingest(IngestArgs),
    /// POS-tag and lemmatize a corpus with the baseline tagger.
    Tag(TagArgs),
    /// Import an externally tagged corpus in vertical format.
    ImportTagged(ImportTaggedArgs),
    /// Extract (verb, argument, relation) triples from a tagged corpus.
    Extract(ExtractArgs),
    /// Aggregate triples into per-verb argument vectors.
    Vectors(VectorsArgs),
    /// Score verb pairs under a similarity measure.
    Sim(SimArgs),
    /// Rank candidate antonyms for a prompt.
    Rank(RankArgs),
    /// Evaluate a vector store against gold antonym data.
    Eval(EvalArgs),
    /// Run ingest, tag, extract, vectors and eval in sequence.
    Pipeline(PipelineArgs),
}

fn parse_measure(s: &str) -> std::result::Result<Measure, String> {
    Measure::parse(s).ok_or_else(|| format!("unknown measure {s:?} (cosine|euclidean|kl)"))
}

fn parse_fill(s: &str) -> std::result::Result<Fill, String> {
    Fill::parse(s).ok_or_else(|| format!("unknown fill {s:?} (zero|one)"))
}

/// Similarity flags shared by sim, rank, eval and pipeline.
#[derive(Args, Debug, Clone)]
pub struct SimilarityFlags {
    #[arg(long, value_parser = parse_measure)]
    pub measure: Option<Measure>,
    #[arg(long, value_parser = parse_fill)]
    pub fill: Option<Fill>,
    /// Keep only the k highest-count arguments of each vector.
    #[arg(long)]
    pub truncate: Option<usize>,
    /// Additive smoothing constant.
    #[arg(long)]
    pub alpha: Option<f64>,
}

impl SimilarityFlags {
    fn apply(&self, config: &mut PipelineConfig) {
        if let Some(m) = self.measure {
            config.similarity.measure = Some(m.as_str().to_string());
        }
        if let Some(f) = self.fill {
            config.similarity.fill = Some(f.as_str().to_string());
        }
        if self.truncate.is_some() {
            config.similarity.truncate = self.truncate;
        }
        if self.alpha.is_some() {
            config.similarity.alpha = self.alpha;
        }
    }
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// jsonl: one document object per line; textdir: one file per document.
    #[arg(long, default_value = "jsonl")]
    pub format: String,
    /// Abbreviation list used by downstream sentence segmentation.
    #[arg(long)]
    pub abbrev: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TagArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub abbrev: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ImportTaggedArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// CSV mapping external tags onto the coarse set.
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub stoplist: Option<PathBuf>,
    /// Max token gap between a verb group and its argument NP.
    #[arg(long)]
    pub window: Option<usize>,
    /// Give predicative adjectives argument vectors.
    #[arg(long)]
    pub adjective_predicates: bool,
    /// tsv (aggregated counts) or jsonl (per-sentence triples).
    #[arg(long, default_value = "tsv")]
    pub format: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct VectorsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Comma-separated subset of subject,object.
    #[arg(long)]
    pub relations: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SimArgs {
    #[arg(long)]
    pub store: PathBuf,
    /// CSV of verb pairs, one "verb1,verb2" per line.
    #[arg(long)]
    pub pairs: PathBuf,
    #[command(flatten)]
    pub similarity: SimilarityFlags,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RankArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long)]
    pub prompt: String,
    /// Comma-separated candidate lemmas.
    #[arg(long)]
    pub candidates: String,
    #[command(flatten)]
    pub similarity: SimilarityFlags,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    #[command(flatten)]
    pub similarity: SimilarityFlags,
    #[arg(long, default_value = "report.json")]
    pub out: PathBuf,
    /// Also write per-pair scores as CSV (prompt,response,score).
    #[arg(long)]
    pub pairs_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PipelineArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "jsonl")]
    pub format: String,
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long)]
    pub abbrev: Option<PathBuf>,
    #[arg(long)]
    pub stoplist: Option<PathBuf>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub adjective_predicates: bool,
    #[arg(long)]
    pub relations: Option<String>,
    #[command(flatten)]
    pub similarity: SimilarityFlags,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Entry point used by `main`; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits 0 for --help/--version, 2 for usage errors.
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("argdist: error: {e:#}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs > 0 {
            // Ignore failure: the global pool can only be set once.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build_global();
        }
    }
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    match cli.command {
        Command::Ingest(args) => {
            if let Some(abbrev) = &args.abbrev {
                require_exists(abbrev)?;
                config.corpus.abbreviations = Some(abbrev.clone());
            }
            let resources = Resources::resolve(&config)?;
            stage_ingest(&args.input, &args.format, &args.out, &resources)
        }
        Command::Tag(args) => {
            if let Some(abbrev) = &args.abbrev {
                require_exists(abbrev)?;
                config.corpus.abbreviations = Some(abbrev.clone());
            }
            let resources = Resources::resolve(&config)?;
            stage_tag(&args.input, &args.out, &resources)
        }
        Command::ImportTagged(args) => {
            let resources = Resources::resolve(&config)?;
            cmd_import_tagged(&args, &resources)
        }
        Command::Extract(args) => {
            if let Some(stoplist) = &args.stoplist {
                require_exists(stoplist)?;
                config.extract.stoplist = Some(stoplist.clone());
            }
            if args.window.is_some() {
                config.extract.window = args.window;
            }
            if args.adjective_predicates {
                config.extract.adjective_predicates = Some(true);
            }
            let resources = Resources::resolve(&config)?;
            stage_extract(&args.input, &args.out, &args.format, &resources)
        }
        Command::Vectors(args) => {
            if args.relations.is_some() {
                config.vectors.relations = args.relations.clone();
            }
            let resources = Resources::resolve(&config)?;
            stage_vectors(&args.input, &args.out, &resources)
        }
        Command::Sim(args) => {
            args.similarity.apply(&mut config);
            let resources = Resources::resolve(&config)?;
            cmd_sim(&args, &resources)
        }
        Command::Rank(args) => {
            args.similarity.apply(&mut config);
            let resources = Resources::resolve(&config)?;
            cmd_rank(&args, &resources)
        }
        Command::Eval(args) => {
            args.similarity.apply(&mut config);
            let resources = Resources::resolve(&config)?;
            let report = stage_eval(&args.store, &args.gold, &args.out, &resources)?;
            if let Some(pairs_out) = &args.pairs_out {
                let mut csv = String::from("prompt,response,score\n");
                for prompt in &report.prompts {
                    for candidate in &prompt.ranking {
                        csv.push_str(&format!(
                            "{},{},{}\n",
                            prompt.prompt, candidate.lemma, candidate.score
                        ));
                    }
                }
                write_file(pairs_out, &csv)?;
            }
            Ok(())
        }
        Command::Pipeline(args) => {
            if let Some(abbrev) = &args.abbrev {
                require_exists(abbrev)?;
                config.corpus.abbreviations = Some(abbrev.clone());
            }
            if let Some(stoplist) = &args.stoplist {
                require_exists(stoplist)?;
                config.extract.stoplist = Some(stoplist.clone());
            }
            if args.window.is_some() {
                config.extract.window = args.window;
            }
            if args.adjective_predicates {
                config.extract.adjective_predicates = Some(true);
            }
            if args.relations.is_some() {
                config.vectors.relations = args.relations.clone();
            }
            args.similarity.apply(&mut config);
            let resources = Resources::resolve(&config)?;
            cmd_pipeline(&args, &resources)
        }
    }
}

fn require_exists(path: &Path) -> Result<()> {
    if !path.exists() {
        bail!("no such file: {}", path.display());
    }
    Ok(())
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_file(path: &Path, data: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, data).with_context(|| format!("cannot write {}", path.display()))
}

fn read_documents(input: &Path, format: &str) -> Result<Vec<std::result::Result<RawDocument, String>>> {
    match format {
        "jsonl" => {
            let file = fs::File::open(input)
                .with_context(|| format!("cannot open {}", input.display()))?;
            Ok(read_jsonl(BufReader::new(file)))
        }
        "textdir" => {
            let mut paths: Vec<PathBuf> = fs::read_dir(input)
                .with_context(|| format!("cannot open directory {}", input.display()))?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.is_file())
                .collect();
            paths.sort();
            let mut docs = Vec::new();
            for path in paths {
                let name = path
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default();
                match String::from_utf8(fs::read(&path)?) {
                    Ok(body) => docs.push(Ok(RawDocument {
                        id: Some(name),
                        body,
                        ..Default::default()
                    })),
                    Err(e) => docs.push(Err(format!("{name}: undecodable bytes: {e}"))),
                }
            }
            Ok(docs)
        }
        other => bail!("unknown input format {other:?} (jsonl|textdir)"),
    }
}

fn input_digest(input: &Path, format: &str) -> Result<String> {
    match format {
        "textdir" => {
            let mut paths: Vec<PathBuf> = fs::read_dir(input)?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.is_file())
                .collect();
            paths.sort();
            let mut combined = String::new();
            for path in paths {
                combined.push_str(&path.file_name().unwrap_or_default().to_string_lossy());
                combined.push(':');
                combined.push_str(&sha256_hex(&fs::read(&path)?));
                combined.push('\n');
            }
            Ok(sha256_hex(combined.as_bytes()))
        }
        _ => Ok(sha256_hex(&read_file(input)?)),
    }
}

fn stage_ingest(input: &Path, format: &str, out: &Path, resources: &Resources) -> Result<()> {
    let documents = read_documents(input, format)?;
    let outcome = ingest(documents, &IngestOptions::default());
    let mut lines = String::new();
    for article in &outcome.articles {
        lines.push_str(&serde_json::to_string(article)?);
        lines.push('\n');
    }
    write_file(out, &lines)?;
    let report_path = sibling(out, ".report.json");
    write_file(
        &report_path,
        &(serde_json::to_string_pretty(&outcome.report)? + "\n"),
    )?;
    Manifest::new("ingest", &resources.config_hash)
        .with_input("documents", input_digest(input, format)?)
        .write_beside(out)?;
    eprintln!(
        "ingest: read {} kept {} dropped {} skipped {}",
        outcome.report.read,
        outcome.report.kept,
        outcome.report.dropped_duplicates,
        outcome.report.skipped.len()
    );
    Ok(())
}

fn read_articles(path: &Path) -> Result<Vec<Article>> {
    let file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut articles = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let article: Article = serde_json::from_str(&line)
            .with_context(|| format!("{}: bad article on line {}", path.display(), i + 1))?;
        articles.push(article);
    }
    Ok(articles)
}

fn stage_tag(input: &Path, out: &Path, resources: &Resources) -> Result<()> {
    let articles = read_articles(input)?;
    let sentences: Vec<Vec<String>> = articles
        .iter()
        .flat_map(|a| sentences_of(a, &resources.abbreviations))
        .map(|s| s.tokens)
        .collect();
    let tagged: Vec<Vec<TaggedToken>> = sentences
        .par_iter()
        .map(|tokens| tag(tokens, &resources.lexicon, &resources.tables))
        .collect();
    write_file(out, &write_pretagged(&tagged))?;
    Manifest::new("tag", &resources.config_hash)
        .with_input("corpus", sha256_hex(&read_file(input)?))
        .write_beside(out)?;
    eprintln!("tag: {} sentences from {} articles", tagged.len(), articles.len());
    Ok(())
}

fn cmd_import_tagged(args: &ImportTaggedArgs, resources: &Resources) -> Result<()> {
    let map_text = read_file(&args.map)?;
    let map = TagMap::from_csv(map_text.as_slice())?;
    let file = fs::File::open(&args.input)
        .with_context(|| format!("cannot open {}", args.input.display()))?;
    let imported = read_pretagged(BufReader::new(file), Some(&map))?;
    for warning in &imported.warnings {
        eprintln!("import-tagged: warning: {warning}");
    }
    write_file(&args.out, &write_pretagged(&imported.sentences))?;
    Manifest::new("import-tagged", &resources.config_hash)
        .with_input("vertical", sha256_hex(&read_file(&args.input)?))
        .with_input("tag_map", sha256_hex(&map_text))
        .write_beside(&args.out)?;
    eprintln!("import-tagged: {} sentences", imported.sentences.len());
    Ok(())
}

fn read_tagged(path: &Path) -> Result<Vec<Vec<TaggedToken>>> {
    let file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let imported = read_pretagged(BufReader::new(file), None)?;
    for warning in &imported.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(imported.sentences)
}

fn stage_extract(input: &Path, out: &Path, format: &str, resources: &Resources) -> Result<()> {
    let sentences = read_tagged(input)?;
    let options = &resources.extract_options;
    let per_sentence: Vec<Vec<crate::extract::ArgumentTriple>> = sentences
        .par_iter()
        .map(|sentence| {
            let chunks = chunk(sentence, options);
            extract_triples(sentence, &chunks, options)
        })
        .collect();
    match format {
        "tsv" => {
            let counts = count_triples(per_sentence.iter().flatten());
            write_file(out, &write_triples_tsv(&counts))?;
        }
        "jsonl" => {
            let mut lines = String::new();
            for (i, triples) in per_sentence.iter().enumerate() {
                for t in triples {
                    lines.push_str(&serde_json::to_string(&serde_json::json!({
                        "sentence": i,
                        "verb": t.verb.text,
                        "relation": t.relation.as_str(),
                        "argument": t.argument.text,
                    }))?);
                    lines.push('\n');
                }
            }
            write_file(out, &lines)?;
        }
        other => bail!("unknown triples format {other:?} (tsv|jsonl)"),
    }
    Manifest::new("extract", &resources.config_hash)
        .with_input("tagged", sha256_hex(&read_file(input)?))
        .write_beside(out)?;
    let total: usize = per_sentence.iter().map(Vec::len).sum();
    eprintln!("extract: {} triples from {} sentences", total, sentences.len());
    Ok(())
}

fn stage_vectors(input: &Path, out: &Path, resources: &Resources) -> Result<()> {
    let file = fs::File::open(input).with_context(|| format!("cannot open {}", input.display()))?;
    let counts = read_triples_tsv(BufReader::new(file))?;
    let map = build_vectors_from_counts(&counts, resources.relations);
    let store = VectorStore::from_map(map);
    write_file(out, &store.to_tsv())?;
    Manifest::new("vectors", &resources.config_hash)
        .with_input("triples", sha256_hex(&read_file(input)?))
        .with_note("relations", &resources.relations.names().join(","))
        .write_beside(out)?;
    eprintln!("vectors: {} verbs", store.len());
    Ok(())
}

fn load_store(path: &Path) -> Result<VectorStore> {
    let file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(VectorStore::from_tsv(BufReader::new(file))?)
}

fn cmd_sim(args: &SimArgs, resources: &Resources) -> Result<()> {
    let store = load_store(&args.store)?;
    let pairs_text = read_file(&args.pairs)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(pairs_text.as_slice());
    let mut out = String::from("verb1,verb2,measure,score\n");
    let config = &resources.similarity;
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() < 2 {
            bail!("pairs row {}: expected 2 fields", i + 1);
        }
        let (a, b) = (record[0].trim().to_string(), record[1].trim().to_string());
        if i == 0 && a == "verb1" && b == "verb2" {
            continue;
        }
        let x = store
            .get_text(&a)
            .with_context(|| format!("verb {a:?} absent from store"))?;
        let y = store
            .get_text(&b)
            .with_context(|| format!("verb {b:?} absent from store"))?;
        let score = similarity(x, y, config)?;
        out.push_str(&format!("{a},{b},{},{}\n", config.measure, score.value));
    }
    write_file(&args.out, &out)?;
    Manifest::new("sim", &resources.config_hash)
        .with_input("store", sha256_hex(&read_file(&args.store)?))
        .with_input("pairs", sha256_hex(&pairs_text))
        .write_beside(&args.out)?;
    Ok(())
}

fn cmd_rank(args: &RankArgs, resources: &Resources) -> Result<()> {
    let store = load_store(&args.store)?;
    let candidates: Vec<String> = args
        .candidates
        .split(',')
        .map(str::trim)
        .filter(|c| !c.is_empty())
        .map(str::to_string)
        .collect();
    let ranking = rank_candidates(&args.prompt, &candidates, &store, &resources.similarity)?;
    for missing in &ranking.missing {
        eprintln!("rank: {missing:?} absent from store, skipped");
    }
    println!("rank,candidate,score");
    for (i, c) in ranking.candidates.iter().enumerate() {
        println!("{},{},{}", i + 1, c.lemma, c.score);
    }
    Ok(())
}

fn stage_eval(
    store_path: &Path,
    gold_path: &Path,
    out: &Path,
    resources: &Resources,
) -> Result<crate::antonymy::EvaluationReport> {
    let store = load_store(store_path)?;
    let gold_bytes = read_file(gold_path)?;
    let gold = load_gold(gold_bytes.as_slice())?;
    for warning in &gold.warnings {
        eprintln!("eval: gold warning: {warning}");
    }
    let report = evaluate(&gold.records, &store, &resources.similarity);
    write_file(out, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    Manifest::new("eval", &resources.config_hash)
        .with_input("store", sha256_hex(&read_file(store_path)?))
        .with_input("gold", sha256_hex(&gold_bytes))
        .write_beside(out)?;
    eprintln!(
        "eval: {} pairs, {} prompts, top1 {:.3}, top2 {:.3}",
        report.n_pairs, report.n_prompts, report.top1_rate, report.top2_rate
    );
    Ok(report)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_pipeline(args: &PipelineArgs, resources: &Resources) -> Result<()> {
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    let corpus = args.out_dir.join("corpus.jsonl");
    let tagged = args.out_dir.join("tagged.vrt");
    let triples = args.out_dir.join("triples.tsv");
    let vectors = args.out_dir.join("vectors.tsv");
    let report = args.out_dir.join("report.json");
    stage_ingest(&args.input, &args.format, &corpus, resources)?;
    stage_tag(&corpus, &tagged, resources)?;
    stage_extract(&tagged, &triples, "tsv", resources)?;
    stage_vectors(&triples, &vectors, resources)?;
    stage_eval(&vectors, &args.gold, &report, resources)?;
    Ok(())
}
