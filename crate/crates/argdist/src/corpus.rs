//! Corpus ingestion: markup stripping, whitespace normalization,
//! first-50-character deduplication, sentence segmentation and tokenization.

use std::collections::HashSet;
use std::io::BufRead;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of characters of normalized body text used as the dedup key.
pub const DEDUP_KEY_LEN: usize = 50;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("document {index}: {reason}")]
    Document { index: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One raw input document, before normalization.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: Option<String>,
    pub source: Option<String>,
    pub date: Option<String>,
    pub title: Option<String>,
    pub body: String,
}

/// One deduplicated, markup-free article.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub date: Option<NaiveDate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub body: String,
}

/// A tokenized sentence of one article.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub article_id: String,
    pub index: usize,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    /// Prefix for ids generated when a document carries none.
    pub id_prefix: String,
    /// Source label used when a document carries none.
    pub default_source: String,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            id_prefix: "doc".to_string(),
            default_source: "unknown".to_string(),
        }
    }
}

/// Per-document problem recorded during ingestion; the run continues.
#[derive(Debug, Clone, Serialize)]
pub struct DocumentIssue {
    pub index: usize,
    pub id: Option<String>,
    pub reason: String,
}

/// Summary of one ingestion run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct DedupReport {
    pub read: usize,
    pub kept: usize,
    pub dropped_duplicates: usize,
    pub skipped: Vec<DocumentIssue>,
    /// Dedup keys that collided, with the id kept and the ids dropped.
    pub collisions: Vec<KeyCollision>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KeyCollision {
    pub key: String,
    pub kept_id: String,
    pub dropped_ids: Vec<String>,
}

#[derive(Debug)]
pub struct IngestOutcome {
    pub articles: Vec<Article>,
    pub report: DedupReport,
}

/// Normalize raw documents and drop duplicates, keeping the first
/// occurrence of each dedup key. Documents that cannot be normalized are
/// recorded in the report and skipped; ingestion never aborts on one
/// document.
pub fn ingest<I>(documents: I, options: &IngestOptions) -> IngestOutcome
where
    I: IntoIterator<Item = Result<RawDocument, String>>,
{
    let mut articles = Vec::new();
    let mut report = DedupReport::default();
    let mut seen: HashSet<String> = HashSet::new();
    let mut collisions: Vec<KeyCollision> = Vec::new();

    for (index, doc) in documents.into_iter().enumerate() {
        report.read += 1;
        let doc = match doc {
            Ok(doc) => doc,
            Err(reason) => {
                report.skipped.push(DocumentIssue {
                    index,
                    id: None,
                    reason,
                });
                continue;
            }
        };
        let id = doc
            .id
            .clone()
            .unwrap_or_else(|| format!("{}-{:06}", options.id_prefix, index));
        let body = normalize_body(&doc.body);
        let key = dedup_key(&body);
        if !seen.insert(key.clone()) {
            report.dropped_duplicates += 1;
            match collisions.iter_mut().find(|c| c.key == key) {
                Some(c) => c.dropped_ids.push(id),
                None => {
                    let kept_id = articles
                        .iter()
                        .find(|a: &&Article| dedup_key(&a.body) == key)
                        .map(|a| a.id.clone())
                        .unwrap_or_default();
                    collisions.push(KeyCollision {
                        key,
                        kept_id,
                        dropped_ids: vec![id],
                    });
                }
            }
            continue;
        }
        let date = match &doc.date {
            Some(raw) => match NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
                Ok(d) => Some(d),
                Err(_) => {
                    report
                        .warnings
                        .push(format!("document {id}: unparseable date {raw:?}, dropped"));
                    None
                }
            },
            None => None,
        };
        articles.push(Article {
            id,
            source: doc
                .source
                .clone()
                .unwrap_or_else(|| options.default_source.clone()),
            date,
            title: doc.title.clone(),
            body,
        });
    }
    report.kept = articles.len();
    report.collisions = collisions;
    IngestOutcome { articles, report }
}

/// Read JSON Lines documents; each undecodable or malformed line becomes a
/// per-document error in the stream rather than aborting the read.
pub fn read_jsonl<R: BufRead>(reader: R) -> Vec<Result<RawDocument, String>> {
    let mut out = Vec::new();
    let mut line_no = 0usize;
    for raw in reader.split(b'\n') {
        line_no += 1;
        let raw = match raw {
            Ok(raw) => raw,
            Err(e) => {
                out.push(Err(format!("line {line_no}: read error: {e}")));
                continue;
            }
        };
        if raw.iter().all(|b| b.is_ascii_whitespace()) {
            continue;
        }
        let text = match String::from_utf8(raw) {
            Ok(text) => text,
            Err(e) => {
                out.push(Err(format!("line {line_no}: undecodable bytes: {e}")));
                continue;
            }
        };
        match serde_json::from_str::<RawDocument>(&text) {
            Ok(doc) => out.push(Ok(doc)),
            Err(e) => out.push(Err(format!("line {line_no}: malformed document: {e}"))),
        }
    }
    out
}

/// Strip markup tags, decode basic entities and collapse whitespace runs.
pub fn normalize_body(body: &str) -> String {
    let stripped = strip_tags(body);
    let decoded = decode_entities(&stripped);
    collapse_whitespace(&decoded)
}

fn strip_tags(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(open) = rest.find('<') {
        match rest[open..].find('>') {
            Some(close) => {
                out.push_str(&rest[..open]);
                // A removed tag still separates words: "a<br>b" -> "a b".
                out.push(' ');
                rest = &rest[open + close + 1..];
            }
            None => break,
        }
    }
    out.push_str(rest);
    out
}

fn decode_entities(text: &str) -> String {
    text.replace("&amp;", "&")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&#39;", "'")
        .replace("&apos;", "'")
        .replace("&nbsp;", " ")
}

fn collapse_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last_space = true;
    for c in text.chars() {
        if c.is_whitespace() {
            if !last_space {
                out.push(' ');
                last_space = true;
            }
        } else {
            out.push(c);
            last_space = false;
        }
    }
    while out.ends_with(' ') {
        out.pop();
    }
    out
}

/// First [`DEDUP_KEY_LEN`] characters of an already-normalized body;
/// shorter bodies return the whole body.
pub fn dedup_key(body: &str) -> String {
    body.chars().take(DEDUP_KEY_LEN).collect()
}

/// Abbreviations whose trailing '.' never ends a sentence.
#[derive(Debug, Clone, Default)]
pub struct AbbreviationList {
    entries: HashSet<String>,
}

impl AbbreviationList {
    pub fn from_lines(text: &str) -> Self {
        let entries = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect();
        Self { entries }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.contains(token)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Default abbreviation list bundled with the crate.
pub fn default_abbreviations() -> AbbreviationList {
    AbbreviationList::from_lines(include_str!("../data/abbreviations.txt"))
}

/// Byte span of one sentence within a body.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SentenceSpan {
    pub start: usize,
    pub end: usize,
}

impl SentenceSpan {
    pub fn text<'a>(&self, body: &'a str) -> &'a str {
        &body[self.start..self.end]
    }
}

/// Split markup-free text into sentence spans. '.', '!' and '?' terminate
/// a sentence unless the '.' closes an abbreviation or sits between
/// digits. Text without a terminator is one sentence.
pub fn segment_sentences(body: &str, abbreviations: &AbbreviationList) -> Vec<SentenceSpan> {
    let bytes = body.as_bytes();
    let mut spans = Vec::new();
    let mut start = skip_whitespace(bytes, 0);
    let mut i = start;
    while i < bytes.len() {
        let b = bytes[i];
        if b == b'.' || b == b'!' || b == b'?' {
            if b == b'.' {
                // A dot glued to a following letter or digit is internal:
                // "U.S.", "e.g.", "3.5".
                if i + 1 < bytes.len() && bytes[i + 1].is_ascii_alphanumeric() {
                    i += 1;
                    continue;
                }
                let word_start = bytes[..i]
                    .iter()
                    .rposition(|b| b.is_ascii_whitespace())
                    .map(|p| p + 1)
                    .unwrap_or(0);
                let word = &body[word_start..=i];
                if abbreviations.contains(word) {
                    i += 1;
                    continue;
                }
            }
            // Consume a run of terminators ("..."/"?!") and a closing
            // quote or bracket if one follows.
            let mut end = i + 1;
            while end < bytes.len() && matches!(bytes[end], b'.' | b'!' | b'?') {
                end += 1;
            }
            while end < bytes.len() && matches!(bytes[end], b'"' | b'\'' | b')' | b']') {
                end += 1;
            }
            spans.push(SentenceSpan { start, end });
            start = skip_whitespace(bytes, end);
            i = start;
        } else {
            i += 1;
        }
    }
    if start < bytes.len() {
        let mut end = bytes.len();
        while end > start && bytes[end - 1].is_ascii_whitespace() {
            end -= 1;
        }
        if end > start {
            spans.push(SentenceSpan { start, end });
        }
    }
    spans
}

fn skip_whitespace(bytes: &[u8], mut i: usize) -> usize {
    while i < bytes.len() && bytes[i].is_ascii_whitespace() {
        i += 1;
    }
    i
}

const LEADING_PUNCT: &[char] = &['(', '[', '{', '"', '\'', '`', '$', '#', '\u{201c}', '\u{2018}'];
const TRAILING_PUNCT: &[char] = &[
    '.', ',', ';', ':', '!', '?', ')', ']', '}', '"', '\'', '%', '\u{201d}', '\u{2019}',
];

/// Split one sentence into surface tokens: whitespace-separated words with
/// leading and trailing punctuation detached. Internal hyphens, decimal
/// points and digit-group commas stay inside their token.
pub fn tokenize(sentence_text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in sentence_text.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut lo = 0;
        let mut hi = chars.len();
        while lo < hi && LEADING_PUNCT.contains(&chars[lo]) {
            lo += 1;
        }
        while hi > lo && TRAILING_PUNCT.contains(&chars[hi - 1]) {
            // Keep a '.' or ',' that separates two digits ("3.5", "3,500").
            let c = chars[hi - 1];
            if (c == '.' || c == ',')
                && hi >= 2
                && hi < chars.len()
                && chars[hi - 2].is_ascii_digit()
                && chars[hi].is_ascii_digit()
            {
                break;
            }
            hi -= 1;
        }
        for &c in &chars[..lo] {
            tokens.push(c.to_string());
        }
        if lo < hi {
            tokens.push(chars[lo..hi].iter().collect());
        }
        for &c in &chars[hi..] {
            tokens.push(c.to_string());
        }
    }
    tokens
}

/// Segment and tokenize one article body. Sentences that tokenize to
/// nothing are dropped (a [`Sentence`] always has at least one token).
pub fn sentences_of(article: &Article, abbreviations: &AbbreviationList) -> Vec<Sentence> {
    segment_sentences(&article.body, abbreviations)
        .iter()
        .filter_map(|span| {
            let tokens = tokenize(span.text(&article.body));
            if tokens.is_empty() {
                None
            } else {
                Some(tokens)
            }
        })
        .enumerate()
        .map(|(index, tokens)| Sentence {
            article_id: article.id.clone(),
            index,
            tokens,
        })
        .collect()
}
