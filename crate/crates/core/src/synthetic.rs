//! Seeded random dependency corpora for benchmarks and scale tests.

use std::io::{self, Write};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{DependencyTree, Lexeme};
use crate::path::DependencyLabel;

const TAGS: [&str; 6] = ["NN", "VB", "JJ", "RB", "DT", "IN"];
const LABELS: [&str; 8] = ["nsubj", "dobj", "amod", "det", "advmod", "nmod", "case", "compound"];

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    /// Stop once this many tokens have been generated.
    pub tokens: usize,
    pub seed: u64,
    /// Distinct forms per tag.
    pub vocab_per_tag: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Exponent of the Zipf distribution over forms.
    pub zipf: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            tokens: 10_000,
            seed: 7,
            vocab_per_tag: 2_000,
            min_len: 4,
            max_len: 30,
            zipf: 1.05,
        }
    }
}

/// Infinite stream of random trees.
pub struct SyntheticCorpus {
    cfg: SyntheticConfig,
    rng: ChaCha8Rng,
    forms: WeightedIndex<f64>,
    labels: Vec<DependencyLabel>,
    emitted: usize,
}

impl SyntheticCorpus {
    pub fn new(cfg: &SyntheticConfig) -> Self {
        let weights: Vec<f64> = (1..=cfg.vocab_per_tag.max(1))
            .map(|r| 1.0 / (r as f64).powf(cfg.zipf))
            .collect();
        SyntheticCorpus {
            cfg: cfg.clone(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            forms: WeightedIndex::new(weights).expect("positive weights"),
            labels: LABELS.iter().map(|l| DependencyLabel::new(l).unwrap()).collect(),
            emitted: 0,
        }
    }

    fn tree(&mut self) -> DependencyTree {
        let lo = self.cfg.min_len.max(1);
        let n = self.rng.random_range(lo..=self.cfg.max_len.max(lo));
        let nodes: Vec<Lexeme> = (0..n)
            .map(|_| {
                let tag = TAGS[self.rng.random_range(0..TAGS.len())];
                let form = self.forms.sample(&mut self.rng);
                Lexeme {
                    form: format!("{}{form}", tag.to_ascii_lowercase()),
                    pos: tag.to_string(),
                }
            })
            .collect();
        // A random recursive tree rooted at a random position.
        let root = self.rng.random_range(0..n);
        let mut order: Vec<usize> = (0..n).filter(|&i| i != root).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, self.rng.random_range(0..=i));
        }
        let mut placed = vec![root];
        let mut edges = Vec::with_capacity(n.saturating_sub(1));
        for &i in &order {
            let head = placed[self.rng.random_range(0..placed.len())];
            let label = self.labels[self.rng.random_range(0..self.labels.len())];
            edges.push((head, i, label));
            placed.push(i);
        }
        DependencyTree::new(nodes, edges).expect("random recursive trees are trees")
    }
}

impl Iterator for SyntheticCorpus {
    type Item = DependencyTree;

    fn next(&mut self) -> Option<DependencyTree> {
        if self.emitted >= self.cfg.tokens {
            return None;
        }
        let tree = self.tree();
        self.emitted += tree.len();
        Some(tree)
    }
}

pub fn generate_trees(cfg: &SyntheticConfig) -> Vec<DependencyTree> {
    SyntheticCorpus::new(cfg).collect()
}

/// Write the corpus as CoNLL-U, returning the token count.
pub fn write_conll<W: Write>(cfg: &SyntheticConfig, out: &mut W) -> io::Result<usize> {
    let mut tokens = 0;
    for tree in SyntheticCorpus::new(cfg) {
        tokens += tree.len();
        tree.write_conll(out)?;
    }
    Ok(tokens)
}
