//! Vectors over `⟨τ, w′⟩` dimensions, cosine similarity and brute-force
//! nearest neighbours.

use std::collections::HashMap;
use std::io::{self, Write};

use crate::apt::{Apt, LexemeId};
use crate::corpus::Lexeme;
use crate::exec::Execution;
use crate::lexicon::Lexicon;
use crate::path::CooccurrenceType;
use crate::weighting::{
    apply_weighting, path_weight_id, to_probability, PathWeighting, Scheme, WeightingConfig, WeightingContext,
    WeightingError,
};

/// Sparse vector sorted by dimension, no explicit zeros.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureVector {
    dims: Vec<((CooccurrenceType, LexemeId), f64)>,
}

impl FeatureVector {
    pub fn from_entries<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = ((CooccurrenceType, LexemeId), f64)>,
    {
        let mut dims: Vec<_> = entries.into_iter().filter(|&(_, v)| v != 0.0).collect();
        dims.sort_by(|a, b| a.0.cmp(&b.0));
        dims.dedup_by(|later, earlier| {
            if later.0 == earlier.0 {
                earlier.1 += later.1;
                true
            } else {
                false
            }
        });
        dims.retain(|&(_, v)| v != 0.0);
        FeatureVector { dims }
    }

    pub fn dims(&self) -> &[((CooccurrenceType, LexemeId), f64)] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn get(&self, ty: &CooccurrenceType, w: LexemeId) -> f64 {
        self.dims
            .binary_search_by(|((t, id), _)| (t, *id).cmp(&(ty, w)))
            .map(|i| self.dims[i].1)
            .unwrap_or(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.dims.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: f64) -> FeatureVector {
        FeatureVector::from_entries(self.dims.iter().map(|(k, v)| (k.clone(), v * c)))
    }

    pub fn add(&self, other: &FeatureVector) -> FeatureVector {
        FeatureVector::from_entries(self.dims.iter().chain(&other.dims).cloned())
    }
}

/// The final weights of a lexeme on its own, as a neighbour candidate.
pub fn elementary_apt(l: &Lexicon, w: LexemeId, cfg: &WeightingConfig) -> Result<Apt, WeightingError> {
    let counts = l.apt(w);
    match cfg.scheme {
        Scheme::Count => Ok(counts.clone()),
        Scheme::Probability => to_probability(counts, l, w),
        Scheme::Ppmi => {
            // Both pipelines coincide for a single lexeme.
            let second = WeightingConfig {
                pipeline: crate::weighting::Pipeline::ComposeSecond,
                ..*cfg
            };
            apply_weighting(counts, l, WeightingContext::Lexeme(w), &second)
        }
    }
}

/// V(A)[⟨τ,w′⟩] = φ(τ, w) · A(τ, w′), with φ taken from `phi_lexeme`.
pub fn vectorize(
    a: &Apt,
    l: &Lexicon,
    cfg: &WeightingConfig,
    phi_lexeme: Option<LexemeId>,
) -> Result<FeatureVector, WeightingError> {
    if a.kind() != cfg.output_kind() {
        return Err(WeightingError::WeightKindMismatch {
            expected: cfg.output_kind(),
            found: a.kind(),
        });
    }
    let phi = cfg.path_weighting;
    let dims = a
        .nodes()
        .iter()
        .flat_map(|node| {
            let factor = match (phi, phi_lexeme) {
                (PathWeighting::Constant, _) => 1.0,
                (PathWeighting::Harmonic, _) => match node.ty.order() {
                    0 => 1.0,
                    n => 1.0 / n as f64,
                },
                (PathWeighting::PathProbability, Some(w)) => path_weight_id(phi, l, w, &node.ty),
                (PathWeighting::PathProbability, None) => 0.0,
            };
            node.members
                .iter()
                .map(move |&(w2, v)| ((node.ty.clone(), w2), factor * v))
        })
        .filter(|&(_, v)| v != 0.0)
        .collect();
    // Nodes are sorted by type and members by lexeme, so dims already are.
    Ok(FeatureVector { dims })
}

/// Dot product over the shared dimensions, with the count of shared ones.
fn dot(u: &FeatureVector, v: &FeatureVector) -> (f64, usize) {
    let (a, b) = (&u.dims, &v.dims);
    let (mut i, mut j, mut acc, mut shared) = (0, 0, 0.0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    (acc, shared)
}

/// Cosine similarity; 0 when either vector is empty.
pub fn cosine(u: &FeatureVector, v: &FeatureVector) -> f64 {
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (dot(u, v).0 / (nu * nv)).clamp(-1.0, 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Neighbor {
    pub lexeme: Lexeme,
    pub score: f64,
    /// No dimension shared with the query; the score is a placeholder 0.
    pub zero_intersection: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NeighborList {
    pub query: String,
    pub entries: Vec<Neighbor>,
}

impl NeighborList {
    /// `rank TAB lexeme TAB score TAB zero_intersection` rows.
    pub fn write_tsv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "# query\t{}", self.query)?;
        writeln!(out, "rank\tlexeme\tscore\tzero_intersection")?;
        for (rank, n) in self.entries.iter().enumerate() {
            writeln!(
                out,
                "{}\t{}\t{:.6}\t{}",
                rank + 1,
                n.lexeme,
                n.score,
                n.zero_intersection as u8
            )?;
        }
        Ok(())
    }

    pub fn write_table<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let width = self
            .entries
            .iter()
            .map(|n| n.lexeme.to_string().chars().count())
            .max()
            .unwrap_or(0)
            .max("lexeme".len());
        writeln!(out, "neighbours of {}", self.query)?;
        writeln!(out, "{:>4}  {:<width$}  {:>8}", "rank", "lexeme", "cosine")?;
        for (rank, n) in self.entries.iter().enumerate() {
            let mark = if n.zero_intersection {
                "  (no shared features)"
            } else {
                ""
            };
            writeln!(
                out,
                "{:>4}  {:<width$}  {:>8.4}{mark}",
                rank + 1,
                n.lexeme.to_string(),
                n.score
            )?;
        }
        Ok(())
    }
}

/// Candidate vectors of every lexicon entry, with dimensions interned to
/// integers so scoring compares `u32`s.
pub struct NeighborIndex<'l> {
    lexicon: &'l Lexicon,
    cfg: WeightingConfig,
    features: HashMap<(CooccurrenceType, LexemeId), u32>,
    vectors: Vec<Vec<(u32, f64)>>,
    norms: Vec<f64>,
    exec: Execution,
}

impl<'l> NeighborIndex<'l> {
    pub fn build(l: &'l Lexicon, cfg: &WeightingConfig, exec: Execution) -> Result<Self, WeightingError> {
        let ids: Vec<LexemeId> = l.ids().collect();
        let typed: Vec<FeatureVector> = exec
            .map(&ids, |&w| {
                let apt = if l.apt(w).is_empty() {
                    Apt::empty(cfg.output_kind())
                } else {
                    elementary_apt(l, w, cfg)?
                };
                vectorize(&apt, l, cfg, Some(w))
            })
            .into_iter()
            .collect::<Result<_, _>>()?;
        let mut features = HashMap::new();
        let mut vectors = Vec::with_capacity(typed.len());
        for v in &typed {
            let mut row: Vec<(u32, f64)> = v
                .dims
                .iter()
                .map(|(key, x)| {
                    let next = features.len() as u32;
                    (*features.entry(key.clone()).or_insert(next), *x)
                })
                .collect();
            row.sort_by_key(|&(id, _)| id);
            vectors.push(row);
        }
        let norms = typed.iter().map(FeatureVector::norm).collect();
        Ok(NeighborIndex {
            lexicon: l,
            cfg: *cfg,
            features,
            vectors,
            norms,
            exec,
        })
    }

    pub fn lexicon(&self) -> &'l Lexicon {
        self.lexicon
    }

    pub fn config(&self) -> &WeightingConfig {
        &self.cfg
    }

    /// Rank every entry (optionally only those with POS `pos_filter`)
    /// against `query` and keep the best `n`. Ties go to the lexeme that
    /// renders first.
    pub fn neighbors(
        &self,
        query: &FeatureVector,
        descriptor: &str,
        n: usize,
        pos_filter: Option<&str>,
    ) -> NeighborList {
        let l = self.lexicon;
        let mut q: Vec<(u32, f64)> = query
            .dims
            .iter()
            .filter_map(|(key, v)| self.features.get(key).map(|&id| (id, *v)))
            .collect();
        q.sort_by_key(|&(id, _)| id);
        let q_norm = query.norm();
        let candidates: Vec<LexemeId> = l
            .ids()
            .filter(|&w| pos_filter.is_none_or(|pos| l.lexeme(w).pos == pos))
            .collect();
        let scored = self.exec.map(&candidates, |&w| {
            let (mut acc, mut shared) = (0.0, 0usize);
            let row = &self.vectors[w.index()];
            let (mut i, mut j) = (0, 0);
            while i < q.len() && j < row.len() {
                match q[i].0.cmp(&row[j].0) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        acc += q[i].1 * row[j].1;
                        shared += 1;
                        i += 1;
                        j += 1;
                    }
                }
            }
            let denom = q_norm * self.norms[w.index()];
            let score = if shared == 0 || denom == 0.0 {
                0.0
            } else {
                (acc / denom).clamp(-1.0, 1.0)
            };
            (w, score, shared == 0)
        });
        let mut ranked: Vec<(String, LexemeId, f64, bool)> = scored
            .into_iter()
            .map(|(w, s, z)| (l.lexeme(w).to_string(), w, s, z))
            .collect();
        ranked.sort_by(|a, b| b.2.total_cmp(&a.2).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(n);
        NeighborList {
            query: descriptor.to_string(),
            entries: ranked
                .into_iter()
                .map(|(_, w, score, zero_intersection)| Neighbor {
                    lexeme: l.lexeme(w).clone(),
                    score,
                    zero_intersection,
                })
                .collect(),
        }
    }
}

/// Neighbours of an APT, building a throwaway index.
pub fn neighbors(
    query: &Apt,
    l: &Lexicon,
    cfg: &WeightingConfig,
    n: usize,
    pos_filter: Option<&str>,
    phi_lexeme: Option<LexemeId>,
) -> Result<NeighborList, WeightingError> {
    let index = NeighborIndex::build(l, cfg, Execution::default())?;
    let v = vectorize(query, l, cfg, phi_lexeme)?;
    let descriptor = phi_lexeme.map(|w| l.lexeme(w).to_string()).unwrap_or_default();
    Ok(index.neighbors(&v, &descriptor, n, pos_filter))
}
