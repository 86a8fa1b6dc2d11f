//! Pipeline configuration: a TOML file with one section per pipeline
//! stage, resolved into loaded resources. Command-line flags override
//! config values; everything falls back to the bundled defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::annotate::{AnnotateError, LemmaTables, TagMap, TaggingLexicon};
use crate::corpus::AbbreviationList;
use crate::extract::{ExtractOptions, Stoplist};
use crate::similarity::{Measure, SimilarityConfig};
use crate::vectors::{Fill, RelationSelection};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file {path}: {source}")]
    Unreadable {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config file {path}: {reason}")]
    Invalid { path: PathBuf, reason: String },
    #[error("configured path does not exist: {path}")]
    MissingPath { path: PathBuf },
    #[error("invalid {field}: {value:?}")]
    BadValue { field: &'static str, value: String },
    #[error(transparent)]
    Annotate(#[from] AnnotateError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub corpus: CorpusSection,
    #[serde(default)]
    pub annotate: AnnotateSection,
    #[serde(default)]
    pub extract: ExtractSection,
    #[serde(default)]
    pub vectors: VectorsSection,
    #[serde(default)]
    pub similarity: SimilaritySection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    pub abbreviations: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotateSection {
    pub lexicon: Option<PathBuf>,
    pub irregular_verbs: Option<PathBuf>,
    pub irregular_nouns: Option<PathBuf>,
    pub tag_map: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractSection {
    pub stoplist: Option<PathBuf>,
    pub window: Option<usize>,
    pub adjective_predicates: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorsSection {
    /// Comma-separated relations, e.g. "subject,object" or "subj".
    pub relations: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimilaritySection {
    pub measure: Option<String>,
    pub fill: Option<String>,
    pub truncate: Option<usize>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

impl PipelineConfig {
    /// Parse a config file and verify every referenced path exists.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Unreadable {
            path: path.to_path_buf(),
            source,
        })?;
        let config: PipelineConfig =
            toml::from_str(&text).map_err(|e| ConfigError::Invalid {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })?;
        // Paths in the file are relative to the file's directory.
        let base = path.parent().unwrap_or(Path::new("."));
        let config = config.rebase(base);
        config.validate_paths()?;
        Ok(config)
    }

    fn rebase(mut self, base: &Path) -> Self {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&path);
                }
            }
        };
        fix(&mut self.corpus.abbreviations);
        fix(&mut self.annotate.lexicon);
        fix(&mut self.annotate.irregular_verbs);
        fix(&mut self.annotate.irregular_nouns);
        fix(&mut self.annotate.tag_map);
        fix(&mut self.extract.stoplist);
        fix(&mut self.output.dir);
        self
    }

    fn validate_paths(&self) -> Result<(), ConfigError> {
        for path in [
            &self.corpus.abbreviations,
            &self.annotate.lexicon,
            &self.annotate.irregular_verbs,
            &self.annotate.irregular_nouns,
            &self.annotate.tag_map,
            &self.extract.stoplist,
        ]
        .into_iter()
        .flatten()
        {
            if !path.exists() {
                return Err(ConfigError::MissingPath { path: path.clone() });
            }
        }
        Ok(())
    }
}

/// Everything a pipeline run needs, loaded and ready, plus the hash that
/// identifies this configuration in output manifests.
pub struct Resources {
    pub abbreviations: AbbreviationList,
    pub lexicon: TaggingLexicon,
    pub tables: LemmaTables,
    pub tag_map: Option<TagMap>,
    pub extract_options: ExtractOptions,
    pub relations: RelationSelection,
    pub similarity: SimilarityConfig,
    pub config_hash: String,
}

/// Digest of the semantic configuration: data-file contents and
/// parameters, never paths or parallelism settings.
#[derive(Serialize)]
struct ConfigFingerprint<'a> {
    abbreviations_sha256: &'a str,
    lexicon_sha256: &'a str,
    irregular_verbs_sha256: &'a str,
    irregular_nouns_sha256: &'a str,
    stoplist_sha256: &'a str,
    tag_map_sha256: Option<&'a str>,
    window: Option<usize>,
    adjective_predicates: bool,
    relations: Vec<&'static str>,
    measure: &'a str,
    fill: &'a str,
    truncate: Option<usize>,
    alpha: f64,
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

fn read_or_default(path: &Option<PathBuf>, default: &'static str) -> Result<String, ConfigError> {
    match path {
        Some(p) => Ok(fs::read_to_string(p)?),
        None => Ok(default.to_string()),
    }
}

impl Resources {
    pub fn resolve(config: &PipelineConfig) -> Result<Self, ConfigError> {
        let abbrev_text =
            read_or_default(&config.corpus.abbreviations, include_str!("../data/abbreviations.txt"))?;
        let lexicon_text =
            read_or_default(&config.annotate.lexicon, include_str!("../data/lexicon.tsv"))?;
        let verbs_text = read_or_default(
            &config.annotate.irregular_verbs,
            include_str!("../data/irregular_verbs.tsv"),
        )?;
        let nouns_text = read_or_default(
            &config.annotate.irregular_nouns,
            include_str!("../data/irregular_nouns.tsv"),
        )?;
        let stoplist_text =
            read_or_default(&config.extract.stoplist, include_str!("../data/stoplist.txt"))?;

        let abbreviations = AbbreviationList::from_lines(&abbrev_text);
        let lexicon = TaggingLexicon::from_tsv(&lexicon_text);
        let tables = LemmaTables::new(&verbs_text, &nouns_text, &lexicon);
        let stoplist = Stoplist::from_lines(&stoplist_text);

        let tag_map_text = match &config.annotate.tag_map {
            Some(p) => Some(fs::read_to_string(p)?),
            None => None,
        };
        let tag_map = match &tag_map_text {
            Some(text) => Some(TagMap::from_csv(text.as_bytes())?),
            None => None,
        };

        let mut extract_options = ExtractOptions::default();
        extract_options.stoplist = stoplist;
        // `window = 0` means whole sentence.
        extract_options.window = config.extract.window.filter(|w| *w > 0);
        extract_options.adjective_predicates = config.extract.adjective_predicates.unwrap_or(false);

        let relations = match &config.vectors.relations {
            Some(s) => RelationSelection::parse(s).ok_or(ConfigError::BadValue {
                field: "vectors.relations",
                value: s.clone(),
            })?,
            None => RelationSelection::default(),
        };

        let measure = match &config.similarity.measure {
            Some(s) => Measure::parse(s).ok_or(ConfigError::BadValue {
                field: "similarity.measure",
                value: s.clone(),
            })?,
            None => Measure::Cosine,
        };
        let fill = match &config.similarity.fill {
            Some(s) => Fill::parse(s).ok_or(ConfigError::BadValue {
                field: "similarity.fill",
                value: s.clone(),
            })?,
            None => Fill::Zero,
        };
        let similarity = SimilarityConfig {
            measure,
            fill,
            truncate_k: config.similarity.truncate.filter(|k| *k > 0),
            alpha: config.similarity.alpha.unwrap_or(0.0),
        };

        let abbrev_sha = sha256_hex(abbrev_text.as_bytes());
        let lexicon_sha = sha256_hex(lexicon_text.as_bytes());
        let verbs_sha = sha256_hex(verbs_text.as_bytes());
        let nouns_sha = sha256_hex(nouns_text.as_bytes());
        let stoplist_sha = sha256_hex(stoplist_text.as_bytes());
        let tag_map_sha = tag_map_text.as_deref().map(|t| sha256_hex(t.as_bytes()));
        let fingerprint = ConfigFingerprint {
            abbreviations_sha256: &abbrev_sha,
            lexicon_sha256: &lexicon_sha,
            irregular_verbs_sha256: &verbs_sha,
            irregular_nouns_sha256: &nouns_sha,
            stoplist_sha256: &stoplist_sha,
            tag_map_sha256: tag_map_sha.as_deref(),
            window: extract_options.window,
            adjective_predicates: extract_options.adjective_predicates,
            relations: relations.names(),
            measure: similarity.measure.as_str(),
            fill: similarity.fill.as_str(),
            truncate: similarity.truncate_k,
            alpha: similarity.alpha,
        };
        let config_hash = sha256_hex(
            serde_json::to_string(&fingerprint)
                .expect("fingerprint serializes")
                .as_bytes(),
        );

        Ok(Self {
            abbreviations,
            lexicon,
            tables,
            tag_map,
            extract_options,
            relations,
            similarity,
            config_hash,
        })
    }

    pub fn defaults() -> Self {
        Self::resolve(&PipelineConfig::default()).expect("bundled defaults resolve")
    }
}

/// Sidecar manifest written next to every output file.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_hash: String,
    /// Content hashes of the inputs this output was derived from.
    pub inputs: BTreeMap<String, String>,
    /// Settings worth surfacing without decoding the config hash.
    pub notes: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(command: &str, config_hash: &str) -> Self {
        Self {
            tool: "argdist",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config_hash: config_hash.to_string(),
            inputs: BTreeMap::new(),
            notes: BTreeMap::new(),
        }
    }

    pub fn with_input(mut self, label: &str, sha256: String) -> Self {
        self.inputs.insert(label.to_string(), sha256);
        self
    }

    pub fn with_note(mut self, label: &str, value: &str) -> Self {
        self.notes.insert(label.to_string(), value.to_string());
        self
    }

    /// Write `<output>.manifest.json` next to the output file.
    pub fn write_beside(&self, output: &Path) -> std::io::Result<()> {
        let mut path = output.as_os_str().to_owned();
        path.push(".manifest.json");
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(PathBuf::from(path), json)
    }
}
