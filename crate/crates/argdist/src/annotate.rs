//! Part-of-speech tagging and lemmatization.
//!
//! Two routes produce tagged sentences: the built-in baseline tagger
//! (lexicon lookup plus suffix heuristics) and [`read_pretagged`], which
//! imports the output of an external tagger in vertical format.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnnotateError {
    #[error("line {line}: expected 3 tab-separated fields, got {got}")]
    MalformedLine { line: usize, got: usize },
    #[error("line {line}: empty surface and lemma")]
    EmptyToken { line: usize },
    #[error("tag map row {row}: unknown coarse tag {tag:?}")]
    UnknownCoarseTag { row: usize, tag: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The closed coarse tag set. Everything downstream distinguishes only
/// these seven classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoarseTag {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Number,
    Punct,
    Other,
}

impl CoarseTag {
    pub fn as_str(self) -> &'static str {
        match self {
            CoarseTag::Noun => "noun",
            CoarseTag::Verb => "verb",
            CoarseTag::Adjective => "adjective",
            CoarseTag::Adverb => "adverb",
            CoarseTag::Number => "number",
            CoarseTag::Punct => "punct",
            CoarseTag::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "noun" => Some(CoarseTag::Noun),
            "verb" => Some(CoarseTag::Verb),
            "adjective" => Some(CoarseTag::Adjective),
            "adverb" => Some(CoarseTag::Adverb),
            "number" => Some(CoarseTag::Number),
            "punct" => Some(CoarseTag::Punct),
            "other" => Some(CoarseTag::Other),
            _ => None,
        }
    }
}

impl fmt::Display for CoarseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A lemma is identified by text AND part of speech: "fall" as a noun and
/// "fall" as a verb are distinct lemmas.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Lemma {
    pub text: String,
    pub pos: CoarseTag,
}

impl Lemma {
    pub fn new(text: impl Into<String>, pos: CoarseTag) -> Self {
        let text = text.into();
        debug_assert!(!text.is_empty());
        debug_assert_eq!(text, text.to_lowercase());
        Self { text, pos }
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.text, self.pos)
    }
}

/// One token with its coarse tag and lowercase lemma.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedToken {
    pub surface: String,
    pub pos: CoarseTag,
    pub lemma: String,
}

impl TaggedToken {
    pub fn lemma(&self) -> Lemma {
        Lemma::new(self.lemma.clone(), self.pos)
    }
}

/// Base-form tagging lexicon: lowercase word to coarse tag.
#[derive(Debug, Clone, Default)]
pub struct TaggingLexicon {
    map: HashMap<String, CoarseTag>,
}

impl TaggingLexicon {
    /// Parse "word<TAB>tag" lines; '#' lines are comments. Later entries
    /// do not override earlier ones, so list order sets priority.
    pub fn from_tsv(text: &str) -> Self {
        let mut map = HashMap::new();
        for line in data_lines(text) {
            if let Some((word, tag)) = line.split_once('\t') {
                if let Some(tag) = CoarseTag::parse(tag.trim()) {
                    map.entry(word.trim().to_lowercase()).or_insert(tag);
                }
            }
        }
        Self { map }
    }

    pub fn get(&self, word: &str) -> Option<CoarseTag> {
        self.map.get(word).copied()
    }

    pub fn contains_as(&self, word: &str, pos: CoarseTag) -> bool {
        self.map.get(word) == Some(&pos)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }
}

/// Irregular-form tables plus the set of known base forms used to
/// validate e-restoration during suffix stripping.
#[derive(Debug, Clone, Default)]
pub struct LemmaTables {
    verbs: HashMap<String, String>,
    nouns: HashMap<String, String>,
    known_bases: HashSet<String>,
}

impl LemmaTables {
    pub fn new(verbs_tsv: &str, nouns_tsv: &str, lexicon: &TaggingLexicon) -> Self {
        let parse = |text: &str| -> HashMap<String, String> {
            data_lines(text)
                .filter_map(|line| line.split_once('\t'))
                .map(|(form, lemma)| (form.trim().to_lowercase(), lemma.trim().to_lowercase()))
                .collect()
        };
        let verbs = parse(verbs_tsv);
        let nouns = parse(nouns_tsv);
        let mut known_bases: HashSet<String> =
            lexicon.words().map(str::to_string).collect();
        known_bases.extend(verbs.values().cloned());
        known_bases.extend(nouns.values().cloned());
        Self {
            verbs,
            nouns,
            known_bases,
        }
    }

    pub fn verb_forms(&self) -> impl Iterator<Item = (&str, &str)> {
        self.verbs.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn noun_forms(&self) -> impl Iterator<Item = (&str, &str)> {
        self.nouns.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    fn known(&self, word: &str) -> bool {
        self.known_bases.contains(word)
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim_end)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

/// Bundled defaults.
pub fn default_lexicon() -> TaggingLexicon {
    TaggingLexicon::from_tsv(include_str!("../data/lexicon.tsv"))
}

pub fn default_tables() -> LemmaTables {
    LemmaTables::new(
        include_str!("../data/irregular_verbs.tsv"),
        include_str!("../data/irregular_nouns.tsv"),
        &default_lexicon(),
    )
}

fn is_punct_token(token: &str) -> bool {
    !token.is_empty() && !token.chars().any(|c| c.is_alphanumeric())
}

fn is_number_token(token: &str) -> bool {
    token.chars().any(|c| c.is_ascii_digit())
        && token
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | ',' | '-' | '+'))
}

/// Tag a tokenized sentence: lexicon lookup first, then suffix
/// heuristics, else `other`. One output token per input token.
pub fn tag(tokens: &[String], lexicon: &TaggingLexicon, tables: &LemmaTables) -> Vec<TaggedToken> {
    tokens
        .iter()
        .map(|surface| {
            let pos = tag_one(surface, lexicon, tables);
            let lemma = lemmatize(surface, pos, tables);
            TaggedToken {
                surface: surface.clone(),
                pos,
                lemma,
            }
        })
        .collect()
}

fn tag_one(surface: &str, lexicon: &TaggingLexicon, tables: &LemmaTables) -> CoarseTag {
    if is_punct_token(surface) {
        return CoarseTag::Punct;
    }
    if is_number_token(surface) {
        return CoarseTag::Number;
    }
    let lower = surface.to_lowercase();
    if tables.verbs.contains_key(&lower) {
        return CoarseTag::Verb;
    }
    if tables.nouns.contains_key(&lower) {
        return CoarseTag::Noun;
    }
    if let Some(tag) = lexicon.get(&lower) {
        return tag;
    }
    // Inflection of a known base?
    if strip_verb_suffix(&lower, tables)
        .map(|base| lexicon.contains_as(&base, CoarseTag::Verb))
        .unwrap_or(false)
    {
        return CoarseTag::Verb;
    }
    if strip_noun_suffix(&lower)
        .map(|base| lexicon.contains_as(&base, CoarseTag::Noun))
        .unwrap_or(false)
    {
        return CoarseTag::Noun;
    }
    if lower.ends_with("ed") || lower.ends_with("ing") {
        return CoarseTag::Verb;
    }
    if lower.ends_with("ly") {
        return CoarseTag::Adverb;
    }
    if ["ness", "tion", "sion", "ment", "ity", "ism"]
        .iter()
        .any(|s| lower.ends_with(s))
    {
        return CoarseTag::Noun;
    }
    if ["ous", "ful", "ive", "able", "ible"]
        .iter()
        .any(|s| lower.ends_with(s))
    {
        return CoarseTag::Adjective;
    }
    if surface.chars().next().map(char::is_uppercase).unwrap_or(false) {
        return CoarseTag::Noun;
    }
    if lower.ends_with('s') {
        return CoarseTag::Noun;
    }
    CoarseTag::Other
}

/// Lowercase lemma for a surface form: irregular-table lookup wins,
/// otherwise per-POS suffix stripping, iterated to a fixpoint so the
/// result is idempotent.
pub fn lemmatize(surface: &str, pos: CoarseTag, tables: &LemmaTables) -> String {
    let mut current = surface.to_lowercase();
    if !matches!(pos, CoarseTag::Verb | CoarseTag::Noun) {
        return current;
    }
    loop {
        let table_hit = match pos {
            CoarseTag::Verb => tables.verbs.get(&current),
            _ => tables.nouns.get(&current),
        };
        if let Some(lemma) = table_hit {
            return lemma.clone();
        }
        let stripped = match pos {
            CoarseTag::Verb => strip_verb_suffix(&current, tables),
            _ => strip_noun_suffix(&current),
        };
        match stripped {
            Some(next) if next != current => current = next,
            _ => return current,
        }
    }
}

fn ends_doubled_consonant(word: &str) -> bool {
    let chars: Vec<char> = word.chars().collect();
    let n = chars.len();
    if n < 2 {
        return false;
    }
    let (a, b) = (chars[n - 2], chars[n - 1]);
    a == b && a.is_ascii_alphabetic() && !matches!(a, 'a' | 'e' | 'i' | 'o' | 'u' | 'l' | 's' | 'z')
}

fn strip_verb_suffix(word: &str, tables: &LemmaTables) -> Option<String> {
    let n = word.len();
    if let Some(stem) = word.strip_suffix("ies") {
        if stem.len() >= 2 {
            return Some(format!("{stem}y"));
        }
    }
    if n >= 5
        && ["sses", "xes", "zes", "ches", "shes"]
            .iter()
            .any(|s| word.ends_with(s))
    {
        return Some(word[..n - 2].to_string());
    }
    if word.ends_with('s') && !word.ends_with("ss") && !word.ends_with("us") && n >= 4 {
        return Some(word[..n - 1].to_string());
    }
    if let Some(stem) = word.strip_suffix("ied") {
        if stem.len() >= 2 {
            return Some(format!("{stem}y"));
        }
    }
    if word.ends_with("ed") && !word.ends_with("eed") && n >= 4 {
        let stem = &word[..n - 2];
        if tables.known(stem) {
            return Some(stem.to_string());
        }
        let restored = format!("{stem}e");
        if tables.known(&restored) {
            return Some(restored);
        }
        if ends_doubled_consonant(stem) {
            let undoubled = &stem[..stem.len() - 1];
            return Some(undoubled.to_string());
        }
        if stem.len() >= 3 {
            return Some(stem.to_string());
        }
        return None;
    }
    if word.ends_with("ing") && n >= 5 {
        let stem = &word[..n - 3];
        if tables.known(stem) {
            return Some(stem.to_string());
        }
        let restored = format!("{stem}e");
        if tables.known(&restored) {
            return Some(restored);
        }
        if ends_doubled_consonant(stem) {
            return Some(stem[..stem.len() - 1].to_string());
        }
        if stem.len() >= 3 {
            return Some(stem.to_string());
        }
        return None;
    }
    None
}

fn strip_noun_suffix(word: &str) -> Option<String> {
    let n = word.len();
    if let Some(stem) = word.strip_suffix("ies") {
        if stem.len() >= 2 {
            return Some(format!("{stem}y"));
        }
    }
    if n >= 5
        && ["sses", "xes", "zes", "ches", "shes"]
            .iter()
            .any(|s| word.ends_with(s))
    {
        return Some(word[..n - 2].to_string());
    }
    if word.ends_with('s')
        && !word.ends_with("ss")
        && !word.ends_with("us")
        && !word.ends_with("is")
        && n >= 4
    {
        return Some(word[..n - 1].to_string());
    }
    None
}

/// Mapping from an external tagset (for example TreeTagger) onto the
/// coarse tags.
#[derive(Debug, Clone, Default)]
pub struct TagMap {
    map: HashMap<String, CoarseTag>,
}

impl TagMap {
    /// Load from CSV with header `external_tag,coarse_tag`.
    pub fn from_csv<R: std::io::Read>(reader: R) -> Result<Self, AnnotateError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let mut map = HashMap::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            let external = row.get(0).unwrap_or("").trim().to_string();
            let coarse = row.get(1).unwrap_or("").trim();
            let tag = CoarseTag::parse(coarse).ok_or(AnnotateError::UnknownCoarseTag {
                row: i + 2,
                tag: coarse.to_string(),
            })?;
            map.insert(external, tag);
        }
        Ok(Self { map })
    }

    pub fn get(&self, external: &str) -> Option<CoarseTag> {
        self.map.get(external).copied()
    }
}

pub fn default_treetagger_map() -> TagMap {
    TagMap::from_csv(include_str!("../data/tagmap_treetagger.csv").as_bytes())
        .expect("bundled tag map is valid")
}

/// Result of importing a pre-tagged corpus.
#[derive(Debug, Default)]
pub struct Pretagged {
    pub sentences: Vec<Vec<TaggedToken>>,
    pub warnings: Vec<String>,
}

/// Read vertical-format text: one `surface<TAB>pos<TAB>lemma` line per
/// token, blank line between sentences. With a tag map, external tags are
/// mapped onto the coarse set; without one, coarse tag names are expected
/// directly. Unmapped tags become `other` with a warning.
pub fn read_pretagged<R: BufRead>(reader: R, map: Option<&TagMap>) -> Result<Pretagged, AnnotateError> {
    let mut out = Pretagged::default();
    let mut current: Vec<TaggedToken> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            if !current.is_empty() {
                out.sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(AnnotateError::MalformedLine {
                line: line_no,
                got: fields.len(),
            });
        }
        let (surface, raw_tag, raw_lemma) = (fields[0], fields[1], fields[2]);
        let pos = match map {
            Some(m) => m.get(raw_tag),
            None => CoarseTag::parse(raw_tag),
        }
        .unwrap_or_else(|| {
            out.warnings
                .push(format!("line {line_no}: unmapped tag {raw_tag:?} -> other"));
            CoarseTag::Other
        });
        let mut lemma = raw_lemma.trim().to_lowercase();
        if lemma.is_empty() {
            lemma = surface.trim().to_lowercase();
        }
        if lemma.is_empty() {
            return Err(AnnotateError::EmptyToken { line: line_no });
        }
        current.push(TaggedToken {
            surface: surface.to_string(),
            pos,
            lemma,
        });
    }
    if !current.is_empty() {
        out.sentences.push(current);
    }
    Ok(out)
}

/// Serialize tagged sentences to the vertical format accepted by
/// [`read_pretagged`] with no tag map.
pub fn write_pretagged(sentences: &[Vec<TaggedToken>]) -> String {
    let mut out = String::new();
    for sentence in sentences {
        for token in sentence {
            out.push_str(&token.surface);
            out.push('\t');
            out.push_str(token.pos.as_str());
            out.push('\t');
            out.push_str(&token.lemma);
            out.push('\n');
        }
        out.push('\n');
    }
    out
}
