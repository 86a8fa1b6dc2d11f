//! Verb argument-distribution extraction and distributional antonym ranking.
//!
//! The pipeline turns a raw news corpus into per-verb argument-frequency
//! vectors and scores candidate antonym pairs by the similarity of their
//! argument distributions:
//!
//! ```text
//! raw documents -> corpus (ingest, segment, tokenize)
//!               -> annotate (POS tag + lemmatize, or import pre-tagged)
//!               -> extract (NP/VG chunking, (verb, argument, relation) triples)
//!               -> vectors (sparse per-verb argument counts)
//!               -> similarity (cosine / euclidean / KL with preprocessing)
//!               -> antonymy (ranking + evaluation against human gold data)
//! ```
//!
//! Every stage is a pure function over immutable inputs; all iteration
//! orders are deterministic so repeated runs produce byte-identical output.

pub mod annotate;
pub mod antonymy;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod extract;
pub mod similarity;
pub mod vectors;

pub use annotate::{CoarseTag, Lemma, TaggedToken};
pub use corpus::Article;
pub use extract::{ArgumentTriple, Relation};
pub use similarity::{Measure, SimilarityConfig, SimilarityScore};
pub use vectors::{AlignedPair, ArgumentVector, Fill, VectorStore};
