//! Sparse per-verb argument-frequency vectors: aggregation from triples,
//! alignment over a shared vocabulary, tail truncation and additive
//! smoothing, plus the on-disk store format.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::{CoarseTag, Lemma};
use crate::extract::{ArgumentTriple, Relation, TripleCounts};

#[derive(Debug, Error)]
pub enum VectorError {
    #[error("cannot align two empty vectors")]
    EmptyAlignment,
    #[error("smoothing constant must be non-negative, got {0}")]
    NegativeAlpha(f64),
    #[error("store line {line}: expected 3 tab-separated fields, got {got}")]
    MalformedStoreLine { line: usize, got: usize },
    #[error("store line {line}: {reason}")]
    BadStoreValue { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which grammatical relations contribute to vector counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSelection {
    pub subject: bool,
    pub object: bool,
}

impl Default for RelationSelection {
    fn default() -> Self {
        Self {
            subject: true,
            object: true,
        }
    }
}

impl RelationSelection {
    pub fn includes(&self, relation: Relation) -> bool {
        match relation {
            Relation::Subject => self.subject,
            Relation::Object => self.object,
        }
    }

    /// Parse "subj,obj" / "subject" style lists.
    pub fn parse(s: &str) -> Option<Self> {
        let mut sel = Self {
            subject: false,
            object: false,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match Relation::parse(part)? {
                Relation::Subject => sel.subject = true,
                Relation::Object => sel.object = true,
            }
        }
        if sel.subject || sel.object {
            Some(sel)
        } else {
            None
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.subject {
            out.push("subject");
        }
        if self.object {
            out.push("object");
        }
        out
    }
}

/// Sparse argument-frequency vector of one verb. Absent arguments mean
/// zero; stored counts are always positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArgumentVector {
    verb: Lemma,
    counts: BTreeMap<Lemma, u64>,
    total: u64,
}

impl ArgumentVector {
    pub fn new(verb: Lemma) -> Self {
        Self {
            verb,
            counts: BTreeMap::new(),
            total: 0,
        }
    }

    pub fn verb(&self) -> &Lemma {
        &self.verb
    }

    pub fn counts(&self) -> &BTreeMap<Lemma, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn get(&self, argument: &Lemma) -> u64 {
        self.counts.get(argument).copied().unwrap_or(0)
    }

    pub fn add(&mut self, argument: Lemma, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(argument).or_insert(0) += count;
        self.total += count;
    }

    /// Commutative monoid merge: counts add.
    pub fn merge(&mut self, other: &ArgumentVector) {
        for (arg, count) in &other.counts {
            self.add(arg.clone(), *count);
        }
    }
}

/// A map from verb lemma to its argument vector.
pub type VectorMap = BTreeMap<Lemma, ArgumentVector>;

/// Aggregate triples into per-verb vectors over the selected relations.
/// The result is independent of input order.
pub fn build_vectors<I>(triples: I, relations: RelationSelection) -> VectorMap
where
    I: IntoIterator<Item = ArgumentTriple>,
{
    let mut map = VectorMap::new();
    for t in triples {
        if !relations.includes(t.relation) {
            continue;
        }
        map.entry(t.verb.clone())
            .or_insert_with(|| ArgumentVector::new(t.verb))
            .add(t.argument, 1);
    }
    map
}

/// Aggregate a triples file (already counted) into per-verb vectors.
/// Verbs load as verb lemmas and arguments as noun lemmas; the text file
/// format does not carry parts of speech.
pub fn build_vectors_from_counts(counts: &TripleCounts, relations: RelationSelection) -> VectorMap {
    let mut map = VectorMap::new();
    for ((verb, relation, argument), count) in counts {
        if !relations.includes(*relation) {
            continue;
        }
        let verb = Lemma::new(verb.clone(), CoarseTag::Verb);
        map.entry(verb.clone())
            .or_insert_with(|| ArgumentVector::new(verb))
            .add(Lemma::new(argument.clone(), CoarseTag::Noun), *count);
    }
    map
}

/// Merge two vector maps (commutative, associative); supports parallel
/// shard aggregation.
pub fn merge_vector_maps(mut left: VectorMap, right: VectorMap) -> VectorMap {
    for (verb, vector) in right {
        match left.get_mut(&verb) {
            Some(existing) => existing.merge(&vector),
            None => {
                left.insert(verb, vector);
            }
        }
    }
    left
}

/// Fill value for vocabulary positions absent from one vector of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fill {
    Zero,
    One,
}

impl Fill {
    pub fn value(self) -> f64 {
        match self {
            Fill::Zero => 0.0,
            Fill::One => 1.0,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "zero" | "0" => Some(Fill::Zero),
            "one" | "1" => Some(Fill::One),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Fill::Zero => "zero",
            Fill::One => "one",
        }
    }
}

/// Two vectors laid out densely over the sorted union of their argument
/// vocabularies.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPair {
    vocabulary: Vec<Lemma>,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl AlignedPair {
    pub fn from_dense(a: Vec<f64>, b: Vec<f64>) -> Self {
        assert_eq!(a.len(), b.len());
        let vocabulary = (0..a.len())
            .map(|i| Lemma::new(format!("c{i:06}"), CoarseTag::Noun))
            .collect();
        Self { vocabulary, a, b }
    }

    pub fn vocabulary(&self) -> &[Lemma] {
        &self.vocabulary
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocabulary.is_empty()
    }
}

/// Lay two sparse vectors over the sorted union of their vocabularies;
/// positions absent from one vector take the fill value.
pub fn align(x: &ArgumentVector, y: &ArgumentVector, fill: Fill) -> Result<AlignedPair, VectorError> {
    if x.is_empty() && y.is_empty() {
        return Err(VectorError::EmptyAlignment);
    }
    let mut vocabulary: Vec<Lemma> = Vec::with_capacity(x.len() + y.len());
    let mut xi = x.counts.keys().peekable();
    let mut yi = y.counts.keys().peekable();
    loop {
        match (xi.peek(), yi.peek()) {
            (Some(&a), Some(&b)) => {
                use std::cmp::Ordering::*;
                match a.cmp(b) {
                    Less => {
                        vocabulary.push(a.clone());
                        xi.next();
                    }
                    Greater => {
                        vocabulary.push(b.clone());
                        yi.next();
                    }
                    Equal => {
                        vocabulary.push(a.clone());
                        xi.next();
                        yi.next();
                    }
                }
            }
            (Some(&a), None) => {
                vocabulary.push(a.clone());
                xi.next();
            }
            (None, Some(&b)) => {
                vocabulary.push(b.clone());
                yi.next();
            }
            (None, None) => break,
        }
    }
    let project = |v: &ArgumentVector| -> Vec<f64> {
        vocabulary
            .iter()
            .map(|lemma| match v.counts.get(lemma) {
                Some(c) => *c as f64,
                None => fill.value(),
            })
            .collect()
    };
    Ok(AlignedPair {
        a: project(x),
        b: project(y),
        vocabulary,
    })
}

/// Keep the k highest-count arguments; boundary ties keep the
/// lexicographically smaller lemma. Returns the vector unchanged when k
/// covers it.
pub fn truncate_tail(v: &ArgumentVector, k: usize) -> ArgumentVector {
    assert!(k >= 1, "truncate_tail requires k >= 1");
    if k >= v.len() {
        return v.clone();
    }
    let mut entries: Vec<(&Lemma, &u64)> = v.counts.iter().collect();
    entries.sort_by(|(la, ca), (lb, cb)| cb.cmp(ca).then_with(|| la.cmp(lb)));
    let mut out = ArgumentVector::new(v.verb.clone());
    for (lemma, count) in entries.into_iter().take(k) {
        out.add(lemma.clone(), *count);
    }
    out
}

/// Add alpha to every component of both sequences.
pub fn smooth(pair: &AlignedPair, alpha: f64) -> Result<AlignedPair, VectorError> {
    if alpha < 0.0 {
        return Err(VectorError::NegativeAlpha(alpha));
    }
    Ok(AlignedPair {
        vocabulary: pair.vocabulary.clone(),
        a: pair.a.iter().map(|v| v + alpha).collect(),
        b: pair.b.iter().map(|v| v + alpha).collect(),
    })
}

/// A persisted collection of argument vectors, keyed by verb text. The
/// store file flattens lemmas to their text.
#[derive(Debug, Clone, Default)]
pub struct VectorStore {
    vectors: BTreeMap<Lemma, ArgumentVector>,
}

impl VectorStore {
    pub fn from_map(map: VectorMap) -> Self {
        Self { vectors: map }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Lemma, &ArgumentVector)> {
        self.vectors.iter()
    }

    /// Look a verb up by text alone, any part of speech; deterministic
    /// because lemmas are ordered by (text, pos).
    pub fn get_text(&self, text: &str) -> Option<&ArgumentVector> {
        self.vectors
            .iter()
            .find(|(lemma, _)| lemma.text == text)
            .map(|(_, v)| v)
    }

    pub fn contains_text(&self, text: &str) -> bool {
        self.get_text(text).is_some()
    }

    /// Serialize as TSV `verb<TAB>argument<TAB>count`, merging lemmas
    /// that share text. Lines are sorted, so output is reproducible.
    pub fn to_tsv(&self) -> String {
        let mut flat: BTreeMap<&str, BTreeMap<&str, u64>> = BTreeMap::new();
        for (verb, vector) in &self.vectors {
            let entry = flat.entry(&verb.text).or_default();
            for (arg, count) in &vector.counts {
                *entry.entry(&arg.text).or_insert(0) += count;
            }
        }
        let mut out = String::new();
        for (verb, args) in flat {
            for (arg, count) in args {
                out.push_str(&format!("{verb}\t{arg}\t{count}\n"));
            }
        }
        out
    }

    pub fn from_tsv<R: BufRead>(reader: R) -> Result<Self, VectorError> {
        let mut map = VectorMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(VectorError::MalformedStoreLine {
                    line: line_no,
                    got: fields.len(),
                });
            }
            let count: u64 = fields[2].parse().map_err(|e| VectorError::BadStoreValue {
                line: line_no,
                reason: format!("bad count {:?}: {e}", fields[2]),
            })?;
            if count == 0 {
                return Err(VectorError::BadStoreValue {
                    line: line_no,
                    reason: "stored counts must be positive".into(),
                });
            }
            if fields[0].is_empty() || fields[1].is_empty() {
                return Err(VectorError::BadStoreValue {
                    line: line_no,
                    reason: "empty verb or argument".into(),
                });
            }
            let verb = Lemma::new(fields[0].to_lowercase(), CoarseTag::Verb);
            map.entry(verb.clone())
                .or_insert_with(|| ArgumentVector::new(verb))
                .add(Lemma::new(fields[1].to_lowercase(), CoarseTag::Noun), count);
        }
        Ok(Self { vectors: map })
    }
}
