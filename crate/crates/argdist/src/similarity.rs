//! Distribution similarity measures: cosine, Euclidean-derived and
//! symmetrized Kullback-Leibler, behind a shared preprocessing pipeline
//! (truncate, align, smooth).
//!
//! All three are symmetric similarities oriented "higher is more
//! similar": cosine in [0,1] on non-negative input, euclidean and KL in
//! (0,1].

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vectors::{align, smooth, truncate_tail, AlignedPair, ArgumentVector, Fill, VectorError};

#[derive(Debug, Error)]
pub enum SimilarityError {
    #[error("cosine undefined: zero-norm sequence")]
    ZeroNorm,
    #[error("distribution undefined: zero-total sequence")]
    ZeroTotal,
    #[error("KL undefined: nonpositive component after preprocessing")]
    NonPositiveComponent,
    #[error("vector for {verb:?} is empty")]
    EmptyVector { verb: String },
    #[error("invalid similarity config: {0}")]
    InvalidConfig(String),
    #[error("similarity({x}, {y}) failed: {source}")]
    ForPair {
        x: String,
        y: String,
        #[source]
        source: Box<SimilarityError>,
    },
    #[error(transparent)]
    Vector(#[from] VectorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Cosine,
    Euclidean,
    Kl,
}

impl Measure {
    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Cosine => "cosine",
            Measure::Euclidean => "euclidean",
            Measure::Kl => "kl",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "cosine" => Some(Measure::Cosine),
            "euclidean" => Some(Measure::Euclidean),
            "kl" => Some(Measure::Kl),
            _ => None,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Preprocessing and measure selection for one similarity computation.
///
/// The default mirrors the best-performing setup: cosine over zero-filled
/// vectors, tail uncut, no smoothing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityConfig {
    pub measure: Measure,
    pub fill: Fill,
    pub truncate_k: Option<usize>,
    pub alpha: f64,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        Self {
            measure: Measure::Cosine,
            fill: Fill::Zero,
            truncate_k: None,
            alpha: 0.0,
        }
    }
}

impl SimilarityConfig {
    pub fn validate(&self) -> Result<(), SimilarityError> {
        if self.alpha < 0.0 {
            return Err(SimilarityError::InvalidConfig(format!(
                "alpha must be non-negative, got {}",
                self.alpha
            )));
        }
        if let Some(k) = self.truncate_k {
            if k == 0 {
                return Err(SimilarityError::InvalidConfig(
                    "truncate_k must be at least 1".into(),
                ));
            }
        }
        if self.measure == Measure::Kl && self.alpha == 0.0 && self.fill != Fill::One {
            return Err(SimilarityError::InvalidConfig(
                "kl requires alpha > 0 or fill=one for strict positivity".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScore {
    pub value: f64,
    pub measure: Measure,
    pub higher_is_more_similar: bool,
}

/// dot(a,b) / (|a| |b|), clamped into [0,1] for non-negative input.
pub fn cosine(pair: &AlignedPair) -> Result<f64, SimilarityError> {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in pair.a().iter().zip(pair.b()) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(SimilarityError::ZeroNorm);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(0.0, 1.0))
}

fn l1_normalize(values: &[f64]) -> Result<Vec<f64>, SimilarityError> {
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return Err(SimilarityError::ZeroTotal);
    }
    Ok(values.iter().map(|v| v / total).collect())
}

/// 1 / (1 + d) where d is the Euclidean distance between the
/// L1-normalized sequences; 1.0 for identical distributions.
pub fn euclidean_similarity(pair: &AlignedPair) -> Result<f64, SimilarityError> {
    let p = l1_normalize(pair.a())?;
    let q = l1_normalize(pair.b())?;
    let d = p
        .iter()
        .zip(&q)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    Ok(1.0 / (1.0 + d))
}

/// exp(-D) where D is the symmetrized divergence
/// (KL(p||q) + KL(q||p)) / 2 over the smoothed, L1-normalized sequences.
/// Natural logarithm; every component must be positive after smoothing.
pub fn kl_similarity(pair: &AlignedPair, alpha: f64) -> Result<f64, SimilarityError> {
    let smoothed = smooth(pair, alpha)?;
    let p = l1_normalize(smoothed.a())?;
    let q = l1_normalize(smoothed.b())?;
    if p.iter().chain(&q).any(|v| *v <= 0.0) {
        return Err(SimilarityError::NonPositiveComponent);
    }
    let kl = |from: &[f64], to: &[f64]| -> f64 {
        from.iter()
            .zip(to)
            .map(|(x, y)| x * (x / y).ln())
            .sum::<f64>()
    };
    let divergence = 0.5 * (kl(&p, &q) + kl(&q, &p));
    Ok((-divergence.max(0.0)).exp())
}

/// Full pipeline for one verb pair: truncate each vector, align with the
/// configured fill, smooth, then apply the measure. Errors identify the
/// pair.
pub fn similarity(
    x: &ArgumentVector,
    y: &ArgumentVector,
    config: &SimilarityConfig,
) -> Result<SimilarityScore, SimilarityError> {
    config.validate()?;
    let for_pair = |e: SimilarityError| SimilarityError::ForPair {
        x: x.verb().text.clone(),
        y: y.verb().text.clone(),
        source: Box::new(e),
    };
    if x.is_empty() {
        return Err(SimilarityError::EmptyVector {
            verb: x.verb().text.clone(),
        });
    }
    if y.is_empty() {
        return Err(SimilarityError::EmptyVector {
            verb: y.verb().text.clone(),
        });
    }
    let (tx, ty);
    let (x, y) = match config.truncate_k {
        Some(k) => {
            tx = truncate_tail(x, k);
            ty = truncate_tail(y, k);
            (&tx, &ty)
        }
        None => (x, y),
    };
    let pair = align(x, y, config.fill).map_err(SimilarityError::from).map_err(&for_pair)?;
    let pair = smooth(&pair, config.alpha).map_err(SimilarityError::from).map_err(&for_pair)?;
    let value = match config.measure {
        Measure::Cosine => cosine(&pair),
        Measure::Euclidean => euclidean_similarity(&pair),
        // Smoothing already happened once in the shared pipeline.
        Measure::Kl => kl_similarity(&pair, 0.0),
    }
    .map_err(for_pair)?;
    Ok(SimilarityScore {
        value,
        measure: config.measure,
        higher_is_more_similar: true,
    })
}
