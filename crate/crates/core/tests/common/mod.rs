//! Independent oracles shared by the integration tests and the acceptance
//! harness. Nothing here reuses the library's reduction or extraction code.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use apt_core::{build_lexicon, parse_conll, Apt, CooccurrenceType, DependencyTree, IngestionConfig, Lexeme, Lexicon};

pub mod laws;

/// `(label, is_inverse)`
pub type RawElement = (String, bool);

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn toy_trees(order_cap: usize) -> Vec<DependencyTree> {
    let text = std::fs::read_to_string(data_path("toy.conll")).unwrap();
    let cfg = IngestionConfig {
        order_cap,
        ..IngestionConfig::default()
    };
    parse_conll(text.as_bytes(), &cfg)
        .collect::<Result<Vec<_>, _>>()
        .unwrap()
}

pub fn toy_config(order_cap: usize) -> IngestionConfig {
    IngestionConfig {
        order_cap,
        ..IngestionConfig::default()
    }
}

pub fn toy_lexicon(order_cap: usize) -> Lexicon {
    build_lexicon(toy_trees(order_cap), &toy_config(order_cap))
}

pub fn lex(s: &str) -> Lexeme {
    s.parse().unwrap()
}

pub fn ty(s: &str) -> CooccurrenceType {
    s.parse().unwrap()
}

pub fn parse_raw(s: &str) -> Vec<RawElement> {
    if s.is_empty() || s == ":" {
        return Vec::new();
    }
    s.split('.')
        .map(|e| match e.strip_prefix('_') {
            Some(label) => (label.to_string(), true),
            None => (e.to_string(), false),
        })
        .collect()
}

pub fn render_raw(path: &[RawElement]) -> String {
    path.iter()
        .map(|(l, inv)| if *inv { format!("_{l}") } else { l.clone() })
        .collect::<Vec<_>>()
        .join(".")
}

fn cancels(a: &RawElement, b: &RawElement) -> bool {
    a.0 == b.0 && a.1 != b.1
}

/// Rewrite the leftmost cancelling pair until none remain.
pub fn reduce_leftmost(path: &[RawElement]) -> Vec<RawElement> {
    let mut p = path.to_vec();
    loop {
        match (0..p.len().saturating_sub(1)).find(|&i| cancels(&p[i], &p[i + 1])) {
            Some(i) => {
                p.drain(i..i + 2);
            }
            None => return p,
        }
    }
}

/// Rewrite the rightmost cancelling pair until none remain.
pub fn reduce_rightmost(path: &[RawElement]) -> Vec<RawElement> {
    let mut p = path.to_vec();
    loop {
        match (0..p.len().saturating_sub(1))
            .rev()
            .find(|&i| cancels(&p[i], &p[i + 1]))
        {
            Some(i) => {
                p.drain(i..i + 2);
            }
            None => return p,
        }
    }
}

pub fn raw_inverse(path: &[RawElement]) -> Vec<RawElement> {
    path.iter().rev().map(|(l, inv)| (l.clone(), !inv)).collect()
}

/// No forward step is followed by an inverse step.
pub fn raw_canonical(path: &[RawElement]) -> bool {
    !path.windows(2).any(|w| !w[0].1 && w[1].1)
}

/// The unreduced walk from `i` to `j`: up to the common ancestor, then down.
pub fn raw_tree_path(tree: &DependencyTree, i: usize, j: usize) -> Vec<RawElement> {
    let ancestors = |mut n: usize| {
        let mut chain = vec![n];
        while let Some((h, _)) = tree.head(n) {
            chain.push(h);
            n = h;
        }
        chain
    };
    let (up, down) = (ancestors(i), ancestors(j));
    let lca = *up.iter().find(|n| down.contains(n)).unwrap();
    let mut path = Vec::new();
    for &n in up.iter().take_while(|&&n| n != lca) {
        path.push((tree.head(n).unwrap().1.as_str().to_string(), true));
    }
    let descent: Vec<usize> = down.iter().copied().take_while(|&n| n != lca).collect();
    for &n in descent.iter().rev() {
        path.push((tree.head(n).unwrap().1.as_str().to_string(), false));
    }
    path
}

/// `(w, w′, τ) → count` over every ordered pair of non-excluded nodes.
pub fn brute_force_counts(trees: &[DependencyTree], order_cap: usize) -> BTreeMap<(String, String, String), u64> {
    let mut counts = BTreeMap::new();
    for tree in trees {
        for i in 0..tree.len() {
            for j in 0..tree.len() {
                if tree.is_excluded(i) || tree.is_excluded(j) {
                    continue;
                }
                let reduced = reduce_leftmost(&raw_tree_path(tree, i, j));
                if reduced.len() <= order_cap {
                    *counts
                        .entry((
                            tree.lexeme(i).to_string(),
                            tree.lexeme(j).to_string(),
                            render_raw(&reduced),
                        ))
                        .or_insert(0) += 1;
                }
            }
        }
    }
    counts
}

/// The same table read back from a lexicon.
pub fn lexicon_counts(l: &Lexicon) -> BTreeMap<(String, String, String), u64> {
    let mut counts = BTreeMap::new();
    for w in l.ids() {
        for (t, coterm, n) in l.apt(w).entries() {
            counts.insert(
                (l.lexeme(w).to_string(), l.lexeme(coterm).to_string(), t.to_string()),
                n as u64,
            );
        }
    }
    counts
}

/// `(τ rendered, coterm rendered) → weight` for comparisons across lexicons.
pub fn apt_table(apt: &Apt, l: &Lexicon) -> BTreeMap<(String, String), f64> {
    apt.entries()
        .map(|(t, w, v)| ((t.to_string(), l.lexeme(w).to_string()), v))
        .collect()
}

/// Offset by hand: every stored τ′ becomes reduce(δ⁻¹τ′), kept if canonical.
pub fn oracle_offset(table: &BTreeMap<(String, String), f64>, delta: &[RawElement]) -> BTreeMap<(String, String), f64> {
    let back = raw_inverse(delta);
    let mut out = BTreeMap::new();
    for ((t, w), v) in table {
        let mut path = back.clone();
        path.extend(parse_raw(t));
        let reduced = reduce_leftmost(&path);
        if raw_canonical(&reduced) {
            *out.entry((render_raw(&reduced), w.clone())).or_insert(0.0) += v;
        }
    }
    out
}

/// "folded dry clothes": folded -dobj-> clothes -amod-> dry.
pub fn folded_dry_clothes() -> DependencyTree {
    DependencyTree::new(
        vec![lex("folded/VBD"), lex("dry/JJ"), lex("clothes/NNS")],
        [(0, 2, "dobj".parse().unwrap()), (2, 1, "amod".parse().unwrap())],
    )
    .unwrap()
}

/// Naive PPMI straight from the brute-force count table.
pub fn naive_ppmi(
    counts: &BTreeMap<(String, String, String), u64>,
    w: &str,
    w2: &str,
    t: &str,
    alpha: f64,
    k: f64,
) -> f64 {
    let mut joint = 0.0;
    let mut row = 0.0;
    let mut col = 0.0;
    let mut all = 0.0;
    for ((a, b, c), &n) in counts {
        if c != t {
            continue;
        }
        let n = n as f64;
        all += n;
        if a == w {
            row += n;
        }
        if b == w2 {
            col += n;
        }
        if a == w && b == w2 {
            joint += n;
        }
    }
    if joint == 0.0 || row == 0.0 || col == 0.0 {
        return 0.0;
    }
    let pmi = ((joint * all.powf(alpha)) / (row * col.powf(alpha))).ln();
    (pmi - k.ln()).max(0.0)
}
