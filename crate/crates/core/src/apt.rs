//! The anchored packed tree value.
//!
//! An [`Apt`] maps `(co-occurrence type, lexeme)` to a weight. Entries are
//! grouped type-major: each [`AptNode`] is the weighted lexeme multiset
//! reached by one path from the anchor, so node extraction and alignment
//! touch only the node in question. Absent keys have weight zero and are
//! never stored.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::path::CooccurrenceType;

/// Dense id of a lexeme inside a lexicon vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LexemeId(pub u32);

impl LexemeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// What the weights of an APT mean.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WeightKind {
    Count,
    Probability,
    Ppmi,
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightKind::Count => "count",
            WeightKind::Probability => "probability",
            WeightKind::Ppmi => "ppmi",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AptError {
    #[error("co-occurrence type {0:?} is not canonical")]
    NonCanonicalType(String),
}

/// One node: the lexemes reached by `ty`, sorted by id, all weights non-zero.
#[derive(Clone, Debug, PartialEq)]
pub struct AptNode {
    pub ty: CooccurrenceType,
    pub members: Vec<(LexemeId, f64)>,
}

impl AptNode {
    pub fn get(&self, w: LexemeId) -> f64 {
        self.members
            .binary_search_by_key(&w, |&(id, _)| id)
            .map(|i| self.members[i].1)
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.members.iter().map(|&(_, v)| v).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Apt {
    kind: WeightKind,
    nodes: Vec<AptNode>,
}

impl Apt {
    pub fn empty(kind: WeightKind) -> Self {
        Apt {
            kind,
            nodes: Vec::new(),
        }
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    /// Number of stored `(type, lexeme)` entries.
    pub fn len(&self) -> usize {
        self.nodes.iter().map(|n| n.members.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Non-empty nodes in type order.
    pub fn nodes(&self) -> &[AptNode] {
        &self.nodes
    }

    fn find(&self, ty: &CooccurrenceType) -> Option<&AptNode> {
        self.nodes
            .binary_search_by(|node| node.ty.cmp(ty))
            .ok()
            .map(|i| &self.nodes[i])
    }

    /// Members stored under `ty`, if any.
    pub fn members(&self, ty: &CooccurrenceType) -> &[(LexemeId, f64)] {
        self.find(ty).map(|n| n.members.as_slice()).unwrap_or(&[])
    }

    pub fn get(&self, ty: &CooccurrenceType, w: LexemeId) -> f64 {
        self.find(ty).map(|n| n.get(w)).unwrap_or(0.0)
    }

    /// The weighted multiset at `ty`; `node(&CooccurrenceType::empty())` is the anchor.
    pub fn node(&self, ty: &CooccurrenceType) -> Result<AptNode, AptError> {
        if !ty.is_canonical() {
            return Err(AptError::NonCanonicalType(ty.to_string()));
        }
        Ok(self.find(ty).cloned().unwrap_or_else(|| AptNode {
            ty: ty.clone(),
            members: Vec::new(),
        }))
    }

    pub fn anchor(&self) -> &[(LexemeId, f64)] {
        self.members(&CooccurrenceType::empty())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&CooccurrenceType, LexemeId, f64)> + '_ {
        self.nodes
            .iter()
            .flat_map(|node| node.members.iter().map(move |&(w, v)| (&node.ty, w, v)))
    }

    pub fn total(&self) -> f64 {
        self.nodes.iter().map(AptNode::total).sum()
    }

    /// Keep only entries whose type has order at most `k`.
    pub fn restrict_order(&self, k: usize) -> Apt {
        Apt {
            kind: self.kind,
            nodes: self.nodes.iter().filter(|n| n.ty.order() <= k).cloned().collect(),
        }
    }

    /// Rewrite every weight; results equal to zero are dropped.
    pub fn map_weights<F>(&self, kind: WeightKind, mut f: F) -> Apt
    where
        F: FnMut(&CooccurrenceType, LexemeId, f64) -> f64,
    {
        let nodes = self
            .nodes
            .iter()
            .filter_map(|node| {
                let members: Vec<_> = node
                    .members
                    .iter()
                    .map(|&(w, v)| (w, f(&node.ty, w, v)))
                    .filter(|&(_, v)| v != 0.0)
                    .collect();
                (!members.is_empty()).then(|| AptNode {
                    ty: node.ty.clone(),
                    members,
                })
            })
            .collect();
        Apt { kind, nodes }
    }

    /// Keep the entries accepted by `keep`.
    pub fn filter<F>(&self, mut keep: F) -> Apt
    where
        F: FnMut(&CooccurrenceType, LexemeId, f64) -> bool,
    {
        let kind = self.kind;
        self.map_weights(kind, |ty, w, v| if keep(ty, w, v) { v } else { 0.0 })
    }

    /// Assemble from nodes that are already sorted and deduplicated.
    pub(crate) fn from_sorted_nodes(kind: WeightKind, nodes: Vec<AptNode>) -> Apt {
        debug_assert!(nodes.windows(2).all(|w| w[0].ty < w[1].ty));
        debug_assert!(nodes.iter().all(|n| !n.is_empty() && n.ty.is_canonical()));
        Apt { kind, nodes }
    }
}

impl<'a> From<&'a Apt> for Cow<'a, Apt> {
    fn from(a: &'a Apt) -> Self {
        Cow::Borrowed(a)
    }
}

impl From<Apt> for Cow<'_, Apt> {
    fn from(a: Apt) -> Self {
        Cow::Owned(a)
    }
}

/// Accumulates entries, summing repeated keys.
#[derive(Clone, Debug)]
pub struct AptBuilder {
    kind: WeightKind,
    nodes: BTreeMap<CooccurrenceType, BTreeMap<LexemeId, f64>>,
}

impl AptBuilder {
    pub fn new(kind: WeightKind) -> Self {
        AptBuilder {
            kind,
            nodes: BTreeMap::new(),
        }
    }

    /// Add `weight` to the entry at `(ty, w)`. `ty` must be canonical.
    pub fn add(&mut self, ty: &CooccurrenceType, w: LexemeId, weight: f64) {
        debug_assert!(ty.is_canonical(), "APT keys are canonical: {ty}");
        if let Some(node) = self.nodes.get_mut(ty) {
            *node.entry(w).or_insert(0.0) += weight;
        } else {
            self.nodes.insert(ty.clone(), BTreeMap::from([(w, weight)]));
        }
    }

    pub fn build(self) -> Apt {
        let nodes = self
            .nodes
            .into_iter()
            .filter_map(|(ty, members)| {
                let members: Vec<_> = members.into_iter().filter(|&(_, v)| v != 0.0).collect();
                (!members.is_empty()).then_some(AptNode { ty, members })
            })
            .collect();
        Apt::from_sorted_nodes(self.kind, nodes)
    }
}

impl FromIterator<(CooccurrenceType, LexemeId, f64)> for Apt {
    /// Collects count entries.
    fn from_iter<I: IntoIterator<Item = (CooccurrenceType, LexemeId, f64)>>(iter: I) -> Self {
        let mut builder = AptBuilder::new(WeightKind::Count);
        for (ty, w, v) in iter {
            builder.add(&ty, w, v);
        }
        builder.build()
    }
}
