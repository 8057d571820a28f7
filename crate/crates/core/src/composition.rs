//! Composition by alignment.
//!
//! Each constituent's APT is offset by its path to the root of the phrase
//! tree, which puts every constituent in the root's coordinate frame, and
//! the aligned APTs are merged pointwise. Offsetting is lazy: an
//! [`OffsetApt`] stores the displacement and reduces types on access, and
//! only [`OffsetApt::materialize`] rewrites keys.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::io::{self, Write};

use thiserror::Error;

use crate::apt::{Apt, AptNode, LexemeId, WeightKind};
use crate::corpus::{DependencyTree, Lexeme};
use crate::lexicon::Lexicon;
use crate::path::CooccurrenceType;
use crate::weighting::{
    elementary_stage, final_stage, keyword_enum, WeightingConfig, WeightingContext, WeightingError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompositionError {
    #[error("nothing to merge")]
    EmptyInputSet,
    #[error("cannot merge {expected} weights with {found} weights")]
    WeightKindMismatch { expected: WeightKind, found: WeightKind },
    #[error("offset {0:?} is not canonical")]
    NonCanonicalOffset(String),
    #[error("unknown lexeme {0}")]
    UnknownLexeme(String),
    #[error("node {index} out of range for a tree of {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },
    #[error(transparent)]
    Weighting(#[from] WeightingError),
}

/// Pointwise merge operators. Absent entries count as 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MergeKind {
    Min,
    Sum,
    Mult,
    Max,
    /// Sum where every input is positive, else 0.
    IntersectiveAdd,
}

keyword_enum!(MergeKind {
    "min" => Min,
    "sum" => Sum,
    "mult" => Mult,
    "max" => Max,
    "intersective_add" => IntersectiveAdd,
});

impl MergeKind {
    pub const ALL: [MergeKind; 5] = [
        MergeKind::Min,
        MergeKind::Sum,
        MergeKind::Mult,
        MergeKind::Max,
        MergeKind::IntersectiveAdd,
    ];

    /// Whether a zero in one input forces a zero in the result.
    pub fn is_intersective(self) -> bool {
        matches!(self, MergeKind::Min | MergeKind::Mult | MergeKind::IntersectiveAdd)
    }
}

/// An APT seen from an anchor displaced along `delta`.
#[derive(Clone, Debug)]
pub struct OffsetApt<'a> {
    base: Cow<'a, Apt>,
    delta: CooccurrenceType,
}

impl<'a> OffsetApt<'a> {
    pub fn new(base: impl Into<Cow<'a, Apt>>, delta: CooccurrenceType) -> Result<Self, CompositionError> {
        if !delta.is_canonical() {
            return Err(CompositionError::NonCanonicalOffset(delta.to_string()));
        }
        Ok(OffsetApt {
            base: base.into(),
            delta,
        })
    }

    pub fn base(&self) -> &Apt {
        &self.base
    }

    pub fn delta(&self) -> &CooccurrenceType {
        &self.delta
    }

    pub fn kind(&self) -> WeightKind {
        self.base.kind()
    }

    /// Members at `ty` of the displaced view.
    pub fn members(&self, ty: &CooccurrenceType) -> &[(LexemeId, f64)] {
        if !ty.is_canonical() {
            return &[];
        }
        self.base.members(&self.delta.concat_reduce(ty))
    }

    pub fn get(&self, ty: &CooccurrenceType, w: LexemeId) -> f64 {
        if !ty.is_canonical() {
            return 0.0;
        }
        self.base.get(&self.delta.concat_reduce(ty), w)
    }

    /// Rewrite every stored type τ′ to reduce(δ⁻¹τ′), dropping the ones that
    /// leave canonical form. The map is injective, so no masses collide.
    pub fn materialize(&self) -> Apt {
        if self.delta.is_empty() {
            return self.base.clone().into_owned();
        }
        let back = self.delta.inverse();
        let mut nodes: Vec<AptNode> = self
            .base
            .nodes()
            .iter()
            .filter_map(|node| {
                let ty = back.concat_reduce(&node.ty);
                ty.is_canonical().then(|| AptNode {
                    ty,
                    members: node.members.clone(),
                })
            })
            .collect();
        nodes.sort_by(|a, b| a.ty.cmp(&b.ty));
        Apt::from_sorted_nodes(self.base.kind(), nodes)
    }
}

/// `A^δ` materialized.
pub fn offset(a: &Apt, delta: &CooccurrenceType) -> Result<Apt, CompositionError> {
    Ok(OffsetApt::new(a, delta.clone())?.materialize())
}

#[derive(Clone, Copy)]
struct Acc {
    present: usize,
    sum: f64,
    min: f64,
    max: f64,
    prod: f64,
    all_positive: bool,
}

impl Acc {
    fn new(v: f64) -> Self {
        Acc {
            present: 1,
            sum: v,
            min: v,
            max: v,
            prod: v,
            all_positive: v > 0.0,
        }
    }

    fn add(&mut self, v: f64) {
        self.present += 1;
        self.sum += v;
        self.min = self.min.min(v);
        self.max = self.max.max(v);
        self.prod *= v;
        self.all_positive &= v > 0.0;
    }

    fn finish(self, kind: MergeKind, inputs: usize) -> f64 {
        let everywhere = self.present == inputs;
        match kind {
            MergeKind::Sum => self.sum,
            MergeKind::Min if everywhere => self.min,
            MergeKind::Min => self.min.min(0.0),
            MergeKind::Max if everywhere => self.max,
            MergeKind::Max => self.max.max(0.0),
            MergeKind::Mult if everywhere => self.prod,
            MergeKind::Mult => 0.0,
            MergeKind::IntersectiveAdd if everywhere && self.all_positive => self.sum,
            MergeKind::IntersectiveAdd => 0.0,
        }
    }
}

/// Pointwise merge over the union of supports. Values are combined in input
/// order, so the result is deterministic.
pub fn merge<'x, I>(kind: MergeKind, apts: I) -> Result<Apt, CompositionError>
where
    I: IntoIterator<Item = &'x Apt>,
{
    let apts: Vec<&Apt> = apts.into_iter().collect();
    let first = apts.first().ok_or(CompositionError::EmptyInputSet)?;
    for a in &apts {
        if a.kind() != first.kind() {
            return Err(CompositionError::WeightKindMismatch {
                expected: first.kind(),
                found: a.kind(),
            });
        }
    }
    if apts.len() == 1 {
        return Ok((*first).clone());
    }
    let inputs = apts.len();
    let mut by_type: BTreeMap<&CooccurrenceType, Vec<&AptNode>> = BTreeMap::new();
    for a in &apts {
        for node in a.nodes() {
            by_type.entry(&node.ty).or_default().push(node);
        }
    }
    let mut nodes = Vec::with_capacity(by_type.len());
    let mut scratch: Vec<(LexemeId, f64)> = Vec::new();
    for (ty, group) in by_type {
        if matches!(kind, MergeKind::Mult | MergeKind::IntersectiveAdd) && group.len() < inputs {
            continue;
        }
        scratch.clear();
        for node in &group {
            scratch.extend_from_slice(&node.members);
        }
        // Stable, so entries of one lexeme stay in input order.
        scratch.sort_by_key(|&(w, _)| w);
        let mut members = Vec::new();
        let mut i = 0;
        while i < scratch.len() {
            let (w, v) = scratch[i];
            let mut acc = Acc::new(v);
            i += 1;
            while i < scratch.len() && scratch[i].0 == w {
                acc.add(scratch[i].1);
                i += 1;
            }
            let merged = acc.finish(kind, inputs);
            if merged != 0.0 {
                members.push((w, merged));
            }
        }
        if !members.is_empty() {
            nodes.push(AptNode {
                ty: ty.clone(),
                members,
            });
        }
    }
    Ok(Apt::from_sorted_nodes(first.kind(), nodes))
}

/// Lexemes missing from the lexicon.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum OovPolicy {
    /// Fail with [`CompositionError::UnknownLexeme`].
    #[default]
    Strict,
    /// Contribute an empty APT.
    Lenient,
}

/// One constituent after alignment.
#[derive(Clone, Debug)]
pub struct Aligned<'a> {
    pub node: usize,
    pub lexeme: Lexeme,
    pub id: Option<LexemeId>,
    pub view: OffsetApt<'a>,
}

/// The composed APT of a dependency tree.
#[derive(Clone, Debug)]
pub struct ComposedTree {
    pub apt: Apt,
    pub tree: DependencyTree,
    /// δ_i: path from node i to the root.
    pub offsets: Vec<CooccurrenceType>,
    pub kind: MergeKind,
    /// Nodes whose lexeme was not in the lexicon.
    pub oov: Vec<usize>,
}

impl ComposedTree {
    pub fn root(&self) -> usize {
        self.tree.root()
    }

    pub fn head_lexeme(&self) -> &Lexeme {
        self.tree.lexeme(self.tree.root())
    }

    /// The composed APT read from the anchor of node `i`.
    pub fn contextualize(&self, i: usize) -> Result<Apt, CompositionError> {
        let delta = self.offsets.get(i).ok_or(CompositionError::IndexOutOfRange {
            index: i,
            len: self.offsets.len(),
        })?;
        offset(&self.apt, &delta.inverse())
    }

    /// Text dump: a header naming each node with its offset, then one
    /// `path TAB coterm TAB weight` row per entry.
    pub fn write_text<W: Write>(&self, out: &mut W, l: &Lexicon) -> io::Result<()> {
        writeln!(out, "# composed merge={} weights={}", self.kind, self.apt.kind())?;
        for (i, lexeme) in self.tree.lexemes().iter().enumerate() {
            let head = match self.tree.head(i) {
                Some((h, label)) => format!("{}\t{label}", h + 1),
                None => "0\troot".to_string(),
            };
            writeln!(
                out,
                "# node\t{}\t{lexeme}\t{head}\t{}",
                i + 1,
                self.offsets[i].to_column()
            )?;
        }
        write_apt_text(out, &self.apt, l)
    }
}

/// `path TAB coterm TAB weight` rows of an APT.
pub fn write_apt_text<W: Write>(out: &mut W, apt: &Apt, l: &Lexicon) -> io::Result<()> {
    for (ty, w, v) in apt.entries() {
        writeln!(out, "{}\t{}\t{v}", ty.to_column(), l.lexeme(w))?;
    }
    Ok(())
}

/// Composition with a fixed merge operator, weighting pipeline and
/// out-of-vocabulary policy.
#[derive(Clone, Debug)]
pub struct Composer<'l> {
    lexicon: &'l Lexicon,
    kind: MergeKind,
    weighting: WeightingConfig,
    oov: OovPolicy,
}

impl<'l> Composer<'l> {
    pub fn new(lexicon: &'l Lexicon, kind: MergeKind, weighting: WeightingConfig) -> Self {
        Composer {
            lexicon,
            kind,
            weighting,
            oov: OovPolicy::Strict,
        }
    }

    pub fn with_oov(mut self, oov: OovPolicy) -> Self {
        self.oov = oov;
        self
    }

    pub fn lexicon(&self) -> &'l Lexicon {
        self.lexicon
    }

    pub fn kind(&self) -> MergeKind {
        self.kind
    }

    pub fn weighting(&self) -> &WeightingConfig {
        &self.weighting
    }

    /// The elementary APT of `lexeme` as composition consumes it.
    pub fn stage_apt(&self, lexeme: &Lexeme) -> Result<(Option<LexemeId>, Cow<'l, Apt>), CompositionError> {
        let l = self.lexicon;
        match l.id(lexeme) {
            Some(id) => {
                let apt = match self.weighting.composition_kind() {
                    WeightKind::Count => Cow::Borrowed(l.apt(id)),
                    _ => Cow::Owned(elementary_stage(l, id, &self.weighting)?),
                };
                Ok((Some(id), apt))
            }
            None => match self.oov {
                OovPolicy::Strict => Err(CompositionError::UnknownLexeme(lexeme.to_string())),
                OovPolicy::Lenient => {
                    log::warn!("{lexeme} is not in the lexicon; using an empty APT");
                    Ok((None, Cow::Owned(Apt::empty(self.weighting.composition_kind()))))
                }
            },
        }
    }

    /// Offset each node's APT by its path to the root.
    pub fn align(&self, tree: &DependencyTree) -> Result<Vec<Aligned<'l>>, CompositionError> {
        let root = tree.root();
        (0..tree.len())
            .map(|i| {
                let lexeme = tree.lexeme(i).clone();
                let (id, apt) = self.stage_apt(&lexeme)?;
                let delta = tree.tree_path(i, root).expect("nodes of a valid tree reach the root");
                Ok(Aligned {
                    node: i,
                    id,
                    lexeme,
                    view: OffsetApt::new(apt, delta)?,
                })
            })
            .collect()
    }

    fn finish(
        &self,
        tree: &DependencyTree,
        aligned: &[Aligned<'l>],
        merged: Apt,
    ) -> Result<ComposedTree, CompositionError> {
        let l = self.lexicon;
        let oov: Vec<usize> = aligned.iter().filter(|a| a.id.is_none()).map(|a| a.node).collect();
        if !oov.is_empty() && self.kind.is_intersective() && aligned.len() > 1 {
            log::warn!("unknown lexemes under {} merge leave an empty composition", self.kind);
        }
        let ctx = match aligned {
            [single] if single.id.is_some() => WeightingContext::Lexeme(single.id.unwrap()),
            _ => WeightingContext::Composed {
                grand_total: aligned.iter().filter_map(|a| a.id).map(|id| l.grand_total(id)).sum(),
            },
        };
        let apt = final_stage(merged, l, ctx, &self.weighting)?;
        Ok(ComposedTree {
            apt,
            tree: tree.clone(),
            offsets: aligned.iter().map(|a| a.view.delta().clone()).collect(),
            kind: self.kind,
            oov,
        })
    }

    /// Align every node and merge in one step.
    pub fn compose(&self, tree: &DependencyTree) -> Result<ComposedTree, CompositionError> {
        let aligned = self.align(tree)?;
        let views: Vec<Apt> = aligned.iter().map(|a| a.view.materialize()).collect();
        let merged = merge(self.kind, &views)?;
        self.finish(tree, &aligned, merged)
    }

    /// Left-to-right composition: the first two nodes are merged, then the
    /// result is merged with the third, and so on, all in the root frame.
    pub fn compose_incremental(&self, tree: &DependencyTree) -> Result<ComposedTree, CompositionError> {
        let aligned = self.align(tree)?;
        let mut acc: Option<Apt> = None;
        for a in &aligned {
            let view = a.view.materialize();
            acc = Some(match acc {
                None => view,
                Some(prev) => merge(self.kind, [&prev, &view])?,
            });
        }
        let merged = acc.ok_or(CompositionError::EmptyInputSet)?;
        self.finish(tree, &aligned, merged)
    }
}

/// Offset the count APT of every node of `tree` by its path to the root.
pub fn align<'l>(tree: &DependencyTree, l: &'l Lexicon) -> Result<Vec<Aligned<'l>>, CompositionError> {
    let counts = WeightingConfig {
        scheme: crate::weighting::Scheme::Count,
        ..WeightingConfig::default()
    };
    Composer::new(l, MergeKind::Sum, counts).align(tree)
}

/// Compose `tree` with the given merge operator and weighting.
pub fn compose_tree(
    tree: &DependencyTree,
    l: &Lexicon,
    kind: MergeKind,
    cfg: &WeightingConfig,
) -> Result<ComposedTree, CompositionError> {
    Composer::new(l, kind, *cfg).compose(tree)
}
