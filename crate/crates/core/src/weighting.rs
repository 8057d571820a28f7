//! Count, probability and PPMI weights, plus the path weighting φ(τ, w)
//! applied when vectorizing.
//!
//! With shift k and smoothing α:
//!
//! ```text
//! pmi_α(w, τ, w′) = ln( #(w,w′,τ) · #(*,*,τ)^α / (#(w,*,τ) · #(*,w′,τ)^α) )
//! sppmi           = max(pmi_α − ln k, 0)
//! ```
//!
//! Any zero count in the formula gives 0.

use thiserror::Error;

use crate::apt::{Apt, AptNode, LexemeId, WeightKind};
use crate::corpus::Lexeme;
use crate::lexicon::Lexicon;
use crate::path::CooccurrenceType;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightingError {
    #[error("{0} has no co-occurrences")]
    EmptyApt(String),
    #[error("unknown lexeme {0}")]
    UnknownLexeme(String),
    #[error("expected {expected} weights, found {found}")]
    WeightKindMismatch { expected: WeightKind, found: WeightKind },
    #[error("invalid weighting configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    Count,
    Probability,
    Ppmi,
}

/// Where PPMI happens relative to composition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pipeline {
    /// Compose probabilities, then transform the result to PPMI.
    ComposeFirst,
    /// Transform each elementary APT to PPMI, then compose.
    ComposeSecond,
}

/// φ(τ, w), the per-path factor of a vector dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PathWeighting {
    Constant,
    /// 1 / order(τ), with 1 at the anchor.
    Harmonic,
    /// p(τ | w) = #(w,*,τ) / #(w,*,*).
    PathProbability,
}

macro_rules! keyword_enum {
    ($ty:ident { $($name:literal => $variant:ident),+ $(,)? }) => {
        impl std::str::FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s.to_ascii_lowercase().replace('-', "_").as_str() {
                    $($name => Ok($ty::$variant),)+
                    _ => Err(format!(
                        "unknown {} {s:?} (expected one of: {})",
                        stringify!($ty),
                        [$($name),+].join(", ")
                    )),
                }
            }
        }

        impl std::fmt::Display for $ty {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(match self {
                    $($ty::$variant => $name,)+
                })
            }
        }
    };
}

pub(crate) use keyword_enum;

keyword_enum!(Scheme { "count" => Count, "probability" => Probability, "ppmi" => Ppmi });
keyword_enum!(Pipeline { "compose_first" => ComposeFirst, "compose_second" => ComposeSecond });
keyword_enum!(PathWeighting {
    "constant" => Constant,
    "harmonic" => Harmonic,
    "path_probability" => PathProbability,
});

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightingConfig {
    pub scheme: Scheme,
    /// Context distribution smoothing exponent in (0, 1]; 1 disables it.
    pub cds_alpha: f64,
    /// PPMI shift k ≥ 1; 1 disables it.
    pub shift_k: f64,
    pub pipeline: Pipeline,
    pub path_weighting: PathWeighting,
}

impl Default for WeightingConfig {
    fn default() -> Self {
        WeightingConfig {
            scheme: Scheme::Ppmi,
            cds_alpha: 1.0,
            shift_k: 10.0,
            pipeline: Pipeline::ComposeSecond,
            path_weighting: PathWeighting::Constant,
        }
    }
}

impl WeightingConfig {
    pub fn validate(&self) -> Result<(), WeightingError> {
        if !(self.cds_alpha > 0.0 && self.cds_alpha <= 1.0) {
            return Err(WeightingError::InvalidConfig(format!(
                "cds alpha must lie in (0, 1], got {}",
                self.cds_alpha
            )));
        }
        if !(self.shift_k >= 1.0 && self.shift_k.is_finite()) {
            return Err(WeightingError::InvalidConfig(format!(
                "shift k must be a finite value ≥ 1, got {}",
                self.shift_k
            )));
        }
        Ok(())
    }

    /// Weights the composition operators see.
    pub fn composition_kind(&self) -> WeightKind {
        match (self.scheme, self.pipeline) {
            (Scheme::Count, _) => WeightKind::Count,
            (Scheme::Probability, _) | (Scheme::Ppmi, Pipeline::ComposeFirst) => WeightKind::Probability,
            (Scheme::Ppmi, Pipeline::ComposeSecond) => WeightKind::Ppmi,
        }
    }

    /// Weights of the final representation.
    pub fn output_kind(&self) -> WeightKind {
        match self.scheme {
            Scheme::Count => WeightKind::Count,
            Scheme::Probability => WeightKind::Probability,
            Scheme::Ppmi => WeightKind::Ppmi,
        }
    }
}

fn expect_kind(a: &Apt, expected: WeightKind) -> Result<(), WeightingError> {
    if a.kind() == expected {
        Ok(())
    } else {
        Err(WeightingError::WeightKindMismatch {
            expected,
            found: a.kind(),
        })
    }
}

/// Divide every count by the grand total #(w,*,*).
pub fn to_probability(a: &Apt, l: &Lexicon, w: LexemeId) -> Result<Apt, WeightingError> {
    expect_kind(a, WeightKind::Count)?;
    let total = l.grand_total(w);
    if total <= 0.0 {
        return Err(WeightingError::EmptyApt(l.lexeme(w).to_string()));
    }
    Ok(a.map_weights(WeightKind::Probability, |_, _, v| v / total))
}

/// Shifted, smoothed PPMI from the four counts of the formula.
pub fn sppmi(joint: f64, row: f64, feature: f64, type_total: f64, alpha: f64, shift_k: f64) -> f64 {
    if joint <= 0.0 || row <= 0.0 || feature <= 0.0 || type_total <= 0.0 {
        return 0.0;
    }
    let pmi = joint.ln() + alpha * type_total.ln() - row.ln() - alpha * feature.ln();
    (pmi - shift_k.ln()).max(0.0)
}

/// PPMI of the entry `(τ, w2)` in the elementary APT of `w`.
pub fn ppmi(l: &Lexicon, w: LexemeId, ty: &CooccurrenceType, w2: LexemeId, alpha: f64, shift_k: f64) -> f64 {
    sppmi(
        l.apt(w).get(ty, w2),
        l.path_total(w, ty),
        l.feature_total(ty, w2),
        l.type_total(ty),
        alpha,
        shift_k,
    )
}

/// φ(τ, w) for a lexicon entry.
pub fn path_weight_id(phi: PathWeighting, l: &Lexicon, w: LexemeId, ty: &CooccurrenceType) -> f64 {
    match phi {
        PathWeighting::Constant => 1.0,
        PathWeighting::Harmonic => match ty.order() {
            0 => 1.0,
            n => 1.0 / n as f64,
        },
        PathWeighting::PathProbability => {
            let total = l.grand_total(w);
            if total > 0.0 {
                l.path_total(w, ty) / total
            } else {
                0.0
            }
        }
    }
}

pub fn path_weight(phi: PathWeighting, l: &Lexicon, w: &Lexeme, ty: &CooccurrenceType) -> Result<f64, WeightingError> {
    let id = l.id(w).ok_or_else(|| WeightingError::UnknownLexeme(w.to_string()))?;
    Ok(path_weight_id(phi, l, id, ty))
}

/// Whose marginals stand in for #(w,*,τ) and #(w,*,*).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightingContext {
    /// An elementary APT: the lexicon marginals of the lexeme.
    Lexeme(LexemeId),
    /// A composed APT: probabilities are rescaled to pseudo-counts by
    /// `grand_total` and row marginals are the composed row sums.
    Composed { grand_total: f64 },
}

/// Turn `a` into PPMI weights.
///
/// Count input is weighted directly. Probability input (the compose-first
/// pipeline) is first rescaled to pseudo-counts; for a lexeme context this
/// recovers the original counts exactly.
pub fn apply_weighting(
    a: &Apt,
    l: &Lexicon,
    ctx: WeightingContext,
    cfg: &WeightingConfig,
) -> Result<Apt, WeightingError> {
    let expected = match cfg.pipeline {
        Pipeline::ComposeFirst => WeightKind::Probability,
        Pipeline::ComposeSecond => WeightKind::Count,
    };
    expect_kind(a, expected)?;
    let scale = match (a.kind(), ctx) {
        (WeightKind::Count, _) => 1.0,
        (_, WeightingContext::Lexeme(w)) => l.grand_total(w),
        (_, WeightingContext::Composed { grand_total }) => grand_total,
    };
    let (alpha, k) = (cfg.cds_alpha, cfg.shift_k);
    let nodes = a
        .nodes()
        .iter()
        .filter_map(|node| {
            let row = match ctx {
                WeightingContext::Lexeme(w) => l.path_total(w, &node.ty),
                WeightingContext::Composed { .. } => node.total() * scale,
            };
            let type_total = l.type_total(&node.ty);
            let members: Vec<_> = node
                .members
                .iter()
                .map(|&(w2, v)| {
                    let feature = l.feature_total(&node.ty, w2);
                    (w2, sppmi(v * scale, row, feature, type_total, alpha, k))
                })
                .filter(|&(_, v)| v > 0.0)
                .collect();
            (!members.is_empty()).then(|| AptNode {
                ty: node.ty.clone(),
                members,
            })
        })
        .collect();
    Ok(Apt::from_sorted_nodes(WeightKind::Ppmi, nodes))
}

/// The elementary APT of `w` weighted for the composition stage.
pub fn elementary_stage(l: &Lexicon, w: LexemeId, cfg: &WeightingConfig) -> Result<Apt, WeightingError> {
    let counts = l.apt(w);
    match cfg.composition_kind() {
        WeightKind::Count => Ok(counts.clone()),
        WeightKind::Probability => {
            if counts.is_empty() {
                Ok(Apt::empty(WeightKind::Probability))
            } else {
                to_probability(counts, l, w)
            }
        }
        WeightKind::Ppmi => apply_weighting(counts, l, WeightingContext::Lexeme(w), cfg),
    }
}

/// Bring a composed APT (weighted for composition) to the output weighting.
pub fn final_stage(
    composed: Apt,
    l: &Lexicon,
    ctx: WeightingContext,
    cfg: &WeightingConfig,
) -> Result<Apt, WeightingError> {
    expect_kind(&composed, cfg.composition_kind())?;
    if cfg.scheme == Scheme::Ppmi && cfg.pipeline == Pipeline::ComposeFirst {
        apply_weighting(&composed, l, ctx, cfg)
    } else {
        Ok(composed)
    }
}
