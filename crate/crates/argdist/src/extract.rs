//! Shallow parsing: greedy noun-phrase / verb-group chunking and
//! extraction of (verb, argument, relation) triples.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::{CoarseTag, Lemma, TaggedToken};

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("triples line {line}: expected 4 tab-separated fields, got {got}")]
    MalformedTriplesLine { line: usize, got: usize },
    #[error("triples line {line}: {reason}")]
    BadTriplesValue { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Subject,
    Object,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Subject => "subject",
            Relation::Object => "object",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "subject" | "subj" => Some(Relation::Subject),
            "object" | "obj" => Some(Relation::Object),
            _ => None,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChunkKind {
    NounPhrase,
    VerbGroup,
}

/// A token span within one sentence. `end` is exclusive; `head` indexes
/// into the sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Chunk {
    pub kind: ChunkKind,
    pub start: usize,
    pub end: usize,
    pub head: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ArgumentTriple {
    pub verb: Lemma,
    pub argument: Lemma,
    pub relation: Relation,
}

/// Argument lemmas never emitted as triples.
#[derive(Debug, Clone, Default)]
pub struct Stoplist {
    set: HashSet<String>,
}

impl Stoplist {
    pub fn from_lines(text: &str) -> Self {
        let set = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        Self { set }
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.set.contains(lemma)
    }
}

pub fn default_stoplist() -> Stoplist {
    Stoplist::from_lines(include_str!("../data/stoplist.txt"))
}

const DETERMINERS: &[&str] = &["the", "a", "an", "this", "that", "these", "those"];

/// Copulas, auxiliaries and modals: never verb-group heads.
const AUXILIARIES: &[&str] = &[
    "be", "have", "do", "will", "would", "can", "could", "shall", "should", "may", "might", "must",
];

#[derive(Debug, Clone)]
pub struct ExtractOptions {
    pub stoplist: Stoplist,
    /// Maximum token gap between a verb group and its argument NP;
    /// `None` searches the whole sentence.
    pub window: Option<usize>,
    /// Treat copula + adjective ("shares are weak") as a verb group
    /// headed by the adjective, so adjectives acquire argument vectors.
    pub adjective_predicates: bool,
    determiners: HashSet<String>,
    auxiliaries: HashSet<String>,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            stoplist: default_stoplist(),
            window: None,
            adjective_predicates: false,
            determiners: DETERMINERS.iter().map(|s| s.to_string()).collect(),
            auxiliaries: AUXILIARIES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl ExtractOptions {
    pub fn is_auxiliary(&self, lemma: &str) -> bool {
        self.auxiliaries.contains(lemma)
    }

    fn is_determiner(&self, token: &TaggedToken) -> bool {
        self.determiners.contains(&token.surface.to_lowercase())
    }
}

/// Greedy left-to-right chunking.
///
/// Noun phrases match `determiner? adjective* noun+` (head: last noun) or
/// `number noun?` (head: the noun, else the number). Verb groups are
/// maximal runs of verbs and adverbs containing at least one verb (head:
/// last verb). With `adjective_predicates`, an all-auxiliary verb group
/// followed by adjectives extends over them and the last adjective
/// becomes the head.
pub fn chunk(sentence: &[TaggedToken], options: &ExtractOptions) -> Vec<Chunk> {
    let mut chunks = Vec::new();
    let mut i = 0;
    while i < sentence.len() {
        if let Some(np) = match_noun_phrase(sentence, i, options) {
            i = np.end;
            chunks.push(np);
            continue;
        }
        if let Some(vg) = match_verb_group(sentence, i, options) {
            i = vg.end;
            chunks.push(vg);
            continue;
        }
        i += 1;
    }
    chunks
}

fn match_noun_phrase(sentence: &[TaggedToken], at: usize, options: &ExtractOptions) -> Option<Chunk> {
    // determiner? adjective* noun+
    let mut j = at;
    if j < sentence.len() && options.is_determiner(&sentence[j]) {
        j += 1;
    }
    while j < sentence.len() && sentence[j].pos == CoarseTag::Adjective {
        j += 1;
    }
    let nouns_start = j;
    while j < sentence.len() && sentence[j].pos == CoarseTag::Noun {
        j += 1;
    }
    if j > nouns_start {
        return Some(Chunk {
            kind: ChunkKind::NounPhrase,
            start: at,
            end: j,
            head: j - 1,
        });
    }
    // number noun?
    if sentence[at].pos == CoarseTag::Number {
        let mut end = at + 1;
        let mut head = at;
        if end < sentence.len() && sentence[end].pos == CoarseTag::Noun {
            head = end;
            end += 1;
        }
        return Some(Chunk {
            kind: ChunkKind::NounPhrase,
            start: at,
            end,
            head,
        });
    }
    None
}

fn match_verb_group(sentence: &[TaggedToken], at: usize, options: &ExtractOptions) -> Option<Chunk> {
    let mut end = at;
    let mut last_verb = None;
    while end < sentence.len()
        && matches!(sentence[end].pos, CoarseTag::Verb | CoarseTag::Adverb)
    {
        if sentence[end].pos == CoarseTag::Verb {
            last_verb = Some(end);
        }
        end += 1;
    }
    let last_verb = last_verb?;
    let mut head = last_verb;
    if options.adjective_predicates {
        let all_aux = sentence[at..end]
            .iter()
            .filter(|t| t.pos == CoarseTag::Verb)
            .all(|t| options.is_auxiliary(&t.lemma));
        if all_aux {
            let mut adj_end = end;
            while adj_end < sentence.len() && sentence[adj_end].pos == CoarseTag::Adjective {
                adj_end += 1;
            }
            if adj_end > end {
                head = adj_end - 1;
                end = adj_end;
            }
        }
    }
    Some(Chunk {
        kind: ChunkKind::VerbGroup,
        start: at,
        end,
        head,
    })
}

/// Emit (verb, argument, relation) triples: for each verb group, the head
/// of the nearest noun phrase entirely to its left is the subject and the
/// head of the nearest one entirely to its right is the object, both
/// within the configured window. Stoplisted arguments and
/// auxiliary-headed verb groups yield nothing.
pub fn extract_triples(
    sentence: &[TaggedToken],
    chunks: &[Chunk],
    options: &ExtractOptions,
) -> Vec<ArgumentTriple> {
    let noun_phrases: Vec<&Chunk> = chunks
        .iter()
        .filter(|c| c.kind == ChunkKind::NounPhrase)
        .collect();
    let mut triples = Vec::new();
    for vg in chunks.iter().filter(|c| c.kind == ChunkKind::VerbGroup) {
        let head = &sentence[vg.head];
        if head.pos == CoarseTag::Verb && options.is_auxiliary(&head.lemma) {
            continue;
        }
        let verb = head.lemma();
        let within = |gap: usize| options.window.map(|w| gap <= w).unwrap_or(true);
        let subject = noun_phrases
            .iter()
            .filter(|np| np.end <= vg.start && within(vg.start - np.end))
            .max_by_key(|np| np.end);
        let object = noun_phrases
            .iter()
            .filter(|np| np.start >= vg.end && within(np.start - vg.end))
            .min_by_key(|np| np.start);
        for (np, relation) in [(subject, Relation::Subject), (object, Relation::Object)] {
            if let Some(np) = np {
                let arg = &sentence[np.head];
                if options.stoplist.contains(&arg.lemma) {
                    continue;
                }
                triples.push(ArgumentTriple {
                    verb: verb.clone(),
                    argument: arg.lemma(),
                    relation,
                });
            }
        }
    }
    triples
}

/// Aggregated triple counts keyed by (verb text, relation, argument
/// text), the on-disk form of a triples file.
pub type TripleCounts = BTreeMap<(String, Relation, String), u64>;

pub fn count_triples<'a, I: IntoIterator<Item = &'a ArgumentTriple>>(triples: I) -> TripleCounts {
    let mut counts = TripleCounts::new();
    for t in triples {
        *counts
            .entry((t.verb.text.clone(), t.relation, t.argument.text.clone()))
            .or_insert(0) += 1;
    }
    counts
}

/// Serialize as TSV `verb<TAB>relation<TAB>argument<TAB>count`, sorted.
pub fn write_triples_tsv(counts: &TripleCounts) -> String {
    let mut out = String::new();
    for ((verb, relation, argument), count) in counts {
        out.push_str(&format!("{verb}\t{relation}\t{argument}\t{count}\n"));
    }
    out
}

pub fn read_triples_tsv<R: BufRead>(reader: R) -> Result<TripleCounts, ExtractError> {
    let mut counts = TripleCounts::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(ExtractError::MalformedTriplesLine {
                line: line_no,
                got: fields.len(),
            });
        }
        let relation = Relation::parse(fields[1]).ok_or_else(|| ExtractError::BadTriplesValue {
            line: line_no,
            reason: format!("unknown relation {:?}", fields[1]),
        })?;
        let count: u64 = fields[3].parse().map_err(|e| ExtractError::BadTriplesValue {
            line: line_no,
            reason: format!("bad count {:?}: {e}", fields[3]),
        })?;
        *counts
            .entry((fields[0].to_string(), relation, fields[2].to_string()))
            .or_insert(0) += count;
    }
    Ok(counts)
}
