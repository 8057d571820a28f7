//! Distributional lexicons: elementary APTs aggregated over a corpus, with
//! the marginal counts needed for probabilities and PPMI.
//!
//! Building is shard-per-worker: each chunk of trees is counted into its own
//! [`LexiconBuilder`], the builders are merged, and [`LexiconBuilder::finish`]
//! sorts the vocabulary so lexeme ids never depend on how the work was split.

mod extract;
mod format;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use thiserror::Error;

use crate::apt::{Apt, AptNode, LexemeId, WeightKind};
use crate::corpus::{open_corpus, parse_conll, CorpusError, DependencyTree, Lexeme};
use crate::exec::Execution;
use crate::path::CooccurrenceType;
use crate::weighting::keyword_enum;

pub use extract::{extract_cooccurrences, extract_positions};
pub use format::{read_text_file, FormatError, TEXT_MAGIC};

/// Trees counted per worker chunk.
const CHUNK_TREES: usize = 512;
/// Trees held in memory at once while streaming.
const BATCH_TREES: usize = 16 * 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MultiRootPolicy {
    /// Reject sentences with several HEAD=0 tokens.
    Reject,
    /// Split them into one tree per root.
    Split,
}

keyword_enum!(MultiRootPolicy { "reject" => Reject, "split" => Split });

/// How a corpus is read and which co-occurrences are kept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IngestionConfig {
    /// Maximum reduced path length kept at extraction.
    pub order_cap: usize,
    /// Take LEMMA rather than FORM when a lemma is present.
    pub use_lemma: bool,
    pub lowercase: bool,
    /// Optional tag coarsening, applied to the POS column.
    pub pos_map: BTreeMap<String, String>,
    /// Edges with these labels stay in the tree but block extraction.
    pub excluded_labels: BTreeSet<String>,
    pub multi_root: MultiRootPolicy,
    /// Abort on the first bad sentence instead of skipping it.
    pub strict: bool,
    /// Minimum corpus-wide feature count kept by [`Lexicon::filter_features`].
    pub feature_threshold: u64,
}

impl Default for IngestionConfig {
    fn default() -> Self {
        IngestionConfig {
            order_cap: 2,
            use_lemma: true,
            lowercase: true,
            pos_map: BTreeMap::new(),
            excluded_labels: ["punct", "p"].iter().map(|s| s.to_string()).collect(),
            multi_root: MultiRootPolicy::Reject,
            strict: false,
            feature_threshold: 1000,
        }
    }
}

impl IngestionConfig {
    /// Apply the casing and tag mapping used at ingestion to a query lexeme.
    pub fn normalize(&self, lexeme: &Lexeme) -> Lexeme {
        let form = if self.lowercase {
            lexeme.form.to_lowercase()
        } else {
            lexeme.form.clone()
        };
        let pos = self
            .pos_map
            .get(&lexeme.pos)
            .cloned()
            .unwrap_or_else(|| lexeme.pos.clone());
        Lexeme { form, pos }
    }

    /// Whether counts produced under the two configs can be added together.
    pub fn same_extraction(&self, other: &IngestionConfig) -> bool {
        self.order_cap == other.order_cap
            && self.use_lemma == other.use_lemma
            && self.lowercase == other.lowercase
            && self.pos_map == other.pos_map
            && self.excluded_labels == other.excluded_labels
            && self.multi_root == other.multi_root
    }
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("lexicons built with different settings: {0}")]
    ConfigMismatch(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Format(#[from] FormatError),
}

/// Per-shard counting state with insertion-order ids.
#[derive(Clone, Debug)]
pub struct LexiconBuilder {
    cfg: IngestionConfig,
    vocab: HashMap<Lexeme, u32>,
    lexemes: Vec<Lexeme>,
    paths: HashMap<CooccurrenceType, u32>,
    path_list: Vec<CooccurrenceType>,
    /// target → (path, coterm) → count
    counts: Vec<HashMap<(u32, u32), u64>>,
    tokens: Vec<u64>,
    trees: u64,
}

impl LexiconBuilder {
    pub fn new(cfg: &IngestionConfig) -> Self {
        LexiconBuilder {
            cfg: cfg.clone(),
            vocab: HashMap::new(),
            lexemes: Vec::new(),
            paths: HashMap::new(),
            path_list: Vec::new(),
            counts: Vec::new(),
            tokens: Vec::new(),
            trees: 0,
        }
    }

    fn intern_lexeme(&mut self, lexeme: &Lexeme) -> u32 {
        if let Some(&id) = self.vocab.get(lexeme) {
            return id;
        }
        let id = self.lexemes.len() as u32;
        self.vocab.insert(lexeme.clone(), id);
        self.lexemes.push(lexeme.clone());
        self.counts.push(HashMap::new());
        self.tokens.push(0);
        id
    }

    fn intern_path(&mut self, ty: &CooccurrenceType) -> u32 {
        if let Some(&id) = self.paths.get(ty) {
            return id;
        }
        let id = self.path_list.len() as u32;
        self.paths.insert(ty.clone(), id);
        self.path_list.push(ty.clone());
        id
    }

    pub fn add_tree(&mut self, tree: &DependencyTree) {
        self.trees += 1;
        let ids: Vec<u32> = tree.lexemes().iter().map(|l| self.intern_lexeme(l)).collect();
        let mut found = Vec::new();
        for source in 0..tree.len() {
            if tree.is_excluded(source) {
                continue;
            }
            self.tokens[ids[source] as usize] += 1;
            found.clear();
            extract::walk_from(tree, source, self.cfg.order_cap, &mut |target, path| {
                found.push((target, path.clone()))
            });
            for (target, path) in found.drain(..) {
                let path_id = self.intern_path(&path);
                *self.counts[ids[source] as usize]
                    .entry((path_id, ids[target]))
                    .or_insert(0) += 1;
            }
        }
    }

    /// Fold another shard into this one.
    pub fn merge(mut self, other: LexiconBuilder) -> LexiconBuilder {
        let lexeme_map: Vec<u32> = other.lexemes.iter().map(|l| self.intern_lexeme(l)).collect();
        let path_map: Vec<u32> = other.path_list.iter().map(|p| self.intern_path(p)).collect();
        for (src, counts) in other.counts.into_iter().enumerate() {
            let target = lexeme_map[src] as usize;
            self.tokens[target] += other.tokens[src];
            let table = &mut self.counts[target];
            for ((path, coterm), n) in counts {
                *table
                    .entry((path_map[path as usize], lexeme_map[coterm as usize]))
                    .or_insert(0) += n;
            }
        }
        self.trees += other.trees;
        self
    }

    /// Canonical lexicon: vocabulary sorted, so ids follow lexeme order.
    pub fn finish(self) -> Lexicon {
        let mut order: Vec<u32> = (0..self.lexemes.len() as u32).collect();
        order.sort_by(|&a, &b| self.lexemes[a as usize].cmp(&self.lexemes[b as usize]));
        let mut new_id = vec![0u32; order.len()];
        for (new, &old) in order.iter().enumerate() {
            new_id[old as usize] = new as u32;
        }
        let vocab: Vec<Lexeme> = order.iter().map(|&i| self.lexemes[i as usize].clone()).collect();
        let mut apts = Vec::with_capacity(vocab.len());
        let mut tokens = Vec::with_capacity(vocab.len());
        let mut counts = self.counts;
        for &old in &order {
            let table = std::mem::take(&mut counts[old as usize]);
            let mut nodes: BTreeMap<&CooccurrenceType, Vec<(LexemeId, f64)>> = BTreeMap::new();
            for ((path, coterm), n) in table {
                nodes
                    .entry(&self.path_list[path as usize])
                    .or_default()
                    .push((LexemeId(new_id[coterm as usize]), n as f64));
            }
            let nodes = nodes
                .into_iter()
                .map(|(ty, mut members)| {
                    members.sort_by_key(|&(id, _)| id);
                    AptNode {
                        ty: ty.clone(),
                        members,
                    }
                })
                .collect();
            apts.push(Apt::from_sorted_nodes(WeightKind::Count, nodes));
            tokens.push(self.tokens[old as usize]);
        }
        Lexicon::from_parts(self.cfg, vocab, apts, tokens, self.trees)
    }
}

/// Elementary count APTs plus marginals.
///
/// After [`Lexicon::filter_features`] the APTs lose rare features but every
/// marginal keeps its unfiltered value.
#[derive(Clone, Debug, PartialEq)]
pub struct Lexicon {
    config: IngestionConfig,
    /// Threshold already applied, if any.
    filtered_at: Option<u64>,
    vocab: Vec<Lexeme>,
    index: HashMap<Lexeme, LexemeId>,
    apts: Vec<Apt>,
    /// #(w,*,τ), sorted by type.
    path_totals: Vec<Vec<(CooccurrenceType, f64)>>,
    /// #(w,*,*)
    grand_totals: Vec<f64>,
    /// #(*,w′,τ)
    feature_totals: HashMap<(CooccurrenceType, LexemeId), f64>,
    /// #(*,*,τ)
    type_totals: BTreeMap<CooccurrenceType, f64>,
    tokens: Vec<u64>,
    trees: u64,
}

impl Lexicon {
    pub fn empty(cfg: &IngestionConfig) -> Self {
        Lexicon::from_parts(cfg.clone(), Vec::new(), Vec::new(), Vec::new(), 0)
    }

    /// Assemble from sorted vocabulary and unfiltered count APTs; every
    /// marginal is derived from the APTs.
    fn from_parts(config: IngestionConfig, vocab: Vec<Lexeme>, apts: Vec<Apt>, tokens: Vec<u64>, trees: u64) -> Self {
        debug_assert!(vocab.windows(2).all(|w| w[0] < w[1]));
        let index = vocab
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), LexemeId(i as u32)))
            .collect();
        let mut path_totals = Vec::with_capacity(apts.len());
        let mut grand_totals = Vec::with_capacity(apts.len());
        let mut feature_totals: HashMap<(CooccurrenceType, LexemeId), f64> = HashMap::new();
        let mut type_totals: BTreeMap<CooccurrenceType, f64> = BTreeMap::new();
        for apt in &apts {
            let mut rows = Vec::with_capacity(apt.nodes().len());
            for node in apt.nodes() {
                let total = node.total();
                rows.push((node.ty.clone(), total));
                *type_totals.entry(node.ty.clone()).or_insert(0.0) += total;
                for &(w, n) in &node.members {
                    *feature_totals.entry((node.ty.clone(), w)).or_insert(0.0) += n;
                }
            }
            grand_totals.push(rows.iter().map(|(_, v)| v).sum());
            path_totals.push(rows);
        }
        Lexicon {
            config,
            filtered_at: None,
            vocab,
            index,
            apts,
            path_totals,
            grand_totals,
            feature_totals,
            type_totals,
            tokens,
            trees,
        }
    }

    pub fn config(&self) -> &IngestionConfig {
        &self.config
    }

    pub fn filtered_at(&self) -> Option<u64> {
        self.filtered_at
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vocab(&self) -> &[Lexeme] {
        &self.vocab
    }

    pub fn ids(&self) -> impl Iterator<Item = LexemeId> {
        (0..self.vocab.len() as u32).map(LexemeId)
    }

    pub fn lexeme(&self, id: LexemeId) -> &Lexeme {
        &self.vocab[id.index()]
    }

    pub fn id(&self, lexeme: &Lexeme) -> Option<LexemeId> {
        self.index.get(lexeme).copied()
    }

    /// The elementary count APT of `id`.
    pub fn apt(&self, id: LexemeId) -> &Apt {
        &self.apts[id.index()]
    }

    /// #(w,*,*)
    pub fn grand_total(&self, w: LexemeId) -> f64 {
        self.grand_totals[w.index()]
    }

    /// #(w,*,τ)
    pub fn path_total(&self, w: LexemeId, ty: &CooccurrenceType) -> f64 {
        let rows = &self.path_totals[w.index()];
        rows.binary_search_by(|(t, _)| t.cmp(ty))
            .map(|i| rows[i].1)
            .unwrap_or(0.0)
    }

    /// All `(τ, #(w,*,τ))` rows of `w`.
    pub fn path_totals(&self, w: LexemeId) -> &[(CooccurrenceType, f64)] {
        &self.path_totals[w.index()]
    }

    /// #(*,w′,τ)
    pub fn feature_total(&self, ty: &CooccurrenceType, coterm: LexemeId) -> f64 {
        // The probe key is only built when the type is known at all.
        if !self.type_totals.contains_key(ty) {
            return 0.0;
        }
        self.feature_totals.get(&(ty.clone(), coterm)).copied().unwrap_or(0.0)
    }

    /// #(*,*,τ)
    pub fn type_total(&self, ty: &CooccurrenceType) -> f64 {
        self.type_totals.get(ty).copied().unwrap_or(0.0)
    }

    pub fn type_totals(&self) -> &BTreeMap<CooccurrenceType, f64> {
        &self.type_totals
    }

    /// Number of distinct `(τ, w′)` features with a corpus count.
    pub fn feature_count(&self) -> usize {
        self.feature_totals.len()
    }

    /// Number of `(τ, w′)` features still present in some APT.
    pub fn stored_feature_count(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        for apt in &self.apts {
            for (ty, w, _) in apt.entries() {
                seen.insert((ty, w));
            }
        }
        seen.len()
    }

    pub fn entry_count(&self) -> usize {
        self.apts.iter().map(Apt::len).sum()
    }

    /// Occurrences of `w` as a token.
    pub fn token_count(&self, w: LexemeId) -> u64 {
        self.tokens[w.index()]
    }

    pub fn total_tokens(&self) -> u64 {
        self.tokens.iter().sum()
    }

    pub fn trees(&self) -> u64 {
        self.trees
    }

    /// Check the marginal identities. Sums are compared exactly, which is
    /// sound while every marginal is an integer count below 2^53.
    pub fn check_consistency(&self) -> Result<(), String> {
        let mut type_sums: BTreeMap<&CooccurrenceType, f64> = BTreeMap::new();
        for w in self.ids() {
            let rows = self.path_totals(w);
            let sum: f64 = rows.iter().map(|(_, v)| v).sum();
            if sum != self.grand_total(w) {
                return Err(format!(
                    "#({},*,*) = {} but rows sum to {sum}",
                    self.lexeme(w),
                    self.grand_total(w)
                ));
            }
            for (ty, v) in rows {
                *type_sums.entry(ty).or_insert(0.0) += v;
            }
            if self.filtered_at.is_none() {
                for node in self.apt(w).nodes() {
                    let row = self.path_total(w, &node.ty);
                    if node.total() != row {
                        return Err(format!(
                            "#({},*,{}) = {row} but node sums to {}",
                            self.lexeme(w),
                            node.ty,
                            node.total()
                        ));
                    }
                }
                if self.apt(w).nodes().len() != rows.len() {
                    return Err(format!("{} has marginal rows without entries", self.lexeme(w)));
                }
            }
        }
        if type_sums.len() != self.type_totals.len() {
            return Err("type totals cover a different set of types".into());
        }
        for (ty, v) in &self.type_totals {
            if type_sums.get(ty).copied() != Some(*v) {
                return Err(format!("#(*,*,{ty}) = {v} disagrees with row sums"));
            }
        }
        let mut feature_sum_by_type: BTreeMap<&CooccurrenceType, f64> = BTreeMap::new();
        for ((ty, _), v) in &self.feature_totals {
            *feature_sum_by_type.entry(ty).or_insert(0.0) += v;
        }
        for (ty, v) in &self.type_totals {
            if feature_sum_by_type.get(ty).copied() != Some(*v) {
                return Err(format!("Σ #(*,w′,{ty}) disagrees with #(*,*,{ty})"));
            }
        }
        Ok(())
    }

    /// Pointwise sum of two lexicons built under the same settings.
    pub fn merge_partial(a: &Lexicon, b: &Lexicon) -> Result<Lexicon, LexiconError> {
        if !a.config.same_extraction(&b.config) {
            return Err(LexiconError::ConfigMismatch(format!(
                "{:?} vs {:?}",
                a.config, b.config
            )));
        }
        if a.filtered_at.is_some() || b.filtered_at.is_some() {
            return Err(LexiconError::ConfigMismatch(
                "filtered lexicons cannot be merged".into(),
            ));
        }
        let mut vocab: Vec<Lexeme> = a.vocab.iter().chain(&b.vocab).cloned().collect();
        vocab.sort();
        vocab.dedup();
        let index: HashMap<&Lexeme, u32> = vocab.iter().enumerate().map(|(i, l)| (l, i as u32)).collect();
        let remap = |lex: &Lexicon| -> Vec<u32> { lex.vocab.iter().map(|l| index[l]).collect() };
        let (map_a, map_b) = (remap(a), remap(b));
        let mut builders: Vec<BTreeMap<CooccurrenceType, BTreeMap<LexemeId, f64>>> = vec![BTreeMap::new(); vocab.len()];
        let mut tokens = vec![0u64; vocab.len()];
        for (lex, map) in [(a, &map_a), (b, &map_b)] {
            for w in lex.ids() {
                let target = map[w.index()] as usize;
                tokens[target] += lex.token_count(w);
                for (ty, coterm, v) in lex.apt(w).entries() {
                    *builders[target]
                        .entry(ty.clone())
                        .or_default()
                        .entry(LexemeId(map[coterm.index()]))
                        .or_insert(0.0) += v;
                }
            }
        }
        let apts = builders
            .into_iter()
            .map(|nodes| {
                let nodes = nodes
                    .into_iter()
                    .map(|(ty, members)| AptNode {
                        ty,
                        members: members.into_iter().collect(),
                    })
                    .collect();
                Apt::from_sorted_nodes(WeightKind::Count, nodes)
            })
            .collect();
        let mut config = a.config.clone();
        config.feature_threshold = a.config.feature_threshold.max(b.config.feature_threshold);
        Ok(Lexicon::from_parts(config, vocab, apts, tokens, a.trees + b.trees))
    }

    /// Drop every feature `(τ, w′)` whose corpus total #(*,w′,τ) is below
    /// `threshold`. Marginals keep their unfiltered values.
    pub fn filter_features(&self, threshold: u64) -> Lexicon {
        let limit = threshold as f64;
        let apts = self
            .apts
            .iter()
            .map(|apt| apt.filter(|ty, w, _| self.feature_total(ty, w) >= limit))
            .collect();
        let mut out = self.clone();
        out.apts = apts;
        out.filtered_at = Some(self.filtered_at.map_or(threshold, |t| t.max(threshold)));
        out.config.feature_threshold = threshold;
        out
    }
}

/// Count a stream of trees in batches, each batch chunked across workers.
fn count_batched<I, E>(trees: I, cfg: &IngestionConfig, exec: Execution) -> Result<LexiconBuilder, E>
where
    I: IntoIterator<Item = Result<DependencyTree, E>>,
{
    let mut acc = LexiconBuilder::new(cfg);
    let mut batch = Vec::with_capacity(BATCH_TREES);
    let flush = |batch: &mut Vec<DependencyTree>, acc: LexiconBuilder| {
        let partial = exec.fold_chunks(
            batch,
            CHUNK_TREES,
            |chunk| {
                let mut b = LexiconBuilder::new(cfg);
                for tree in chunk {
                    b.add_tree(tree);
                }
                b
            },
            LexiconBuilder::merge,
        );
        batch.clear();
        match partial {
            Some(p) => acc.merge(p),
            None => acc,
        }
    };
    for tree in trees {
        batch.push(tree?);
        if batch.len() == BATCH_TREES {
            acc = flush(&mut batch, acc);
        }
    }
    Ok(flush(&mut batch, acc))
}

/// Count trees into a lexicon, chunked across workers.
pub fn build_lexicon_with<I>(trees: I, cfg: &IngestionConfig, exec: Execution) -> Lexicon
where
    I: IntoIterator<Item = DependencyTree>,
{
    match count_batched(trees.into_iter().map(Ok::<_, std::convert::Infallible>), cfg, exec) {
        Ok(builder) => builder.finish(),
        Err(never) => match never {},
    }
}

/// Count trees into a lexicon using the default execution strategy.
pub fn build_lexicon<I>(trees: I, cfg: &IngestionConfig) -> Lexicon
where
    I: IntoIterator<Item = DependencyTree>,
{
    build_lexicon_with(trees, cfg, Execution::default())
}

/// What happened while ingesting corpus files.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub files: usize,
    pub skipped_sentences: usize,
}

/// Parse and count several CoNLL files. Files are read concurrently and
/// the trees of each file are counted in parallel batches.
pub fn build_from_files(
    paths: &[PathBuf],
    cfg: &IngestionConfig,
    exec: Execution,
) -> Result<(Lexicon, IngestReport), LexiconError> {
    let per_file = exec.map(paths, |path| -> Result<(LexiconBuilder, usize), CorpusError> {
        let mut reader = parse_conll(open_corpus(path)?, cfg);
        let builder = count_batched(reader.by_ref(), cfg, exec)?;
        Ok((builder, reader.skipped()))
    });
    let mut acc = LexiconBuilder::new(cfg);
    let mut report = IngestReport {
        files: paths.len(),
        skipped_sentences: 0,
    };
    for result in per_file {
        let (builder, skipped) = result?;
        report.skipped_sentences += skipped;
        acc = acc.merge(builder);
    }
    Ok((acc.finish(), report))
}
