//! Phrase specs: `dependent relation head [relation head ...]`.
//!
//! `dry/JJ amod clothes/NNS dobj folded/VBD` is the chain dry ← clothes ←
//! folded; the last word is the root. A single word is a one-node tree.

use anyhow::{bail, Context, Result};
use apt_core::path::DependencyLabel;
use apt_core::{DependencyTree, Lexeme};

pub fn parse_spec(spec: &str) -> Result<DependencyTree> {
    let tokens: Vec<&str> = spec.split_whitespace().collect();
    if tokens.is_empty() {
        bail!("empty phrase spec");
    }
    if tokens.len().is_multiple_of(2) {
        bail!("phrase spec {spec:?} must alternate words and relations, ending on a word");
    }
    let mut words = Vec::new();
    let mut edges = Vec::new();
    for (i, token) in tokens.iter().enumerate() {
        if i % 2 == 0 {
            let (form, pos) = token
                .rsplit_once('/')
                .filter(|(f, p)| !f.is_empty() && !p.is_empty())
                .with_context(|| format!("word {token:?} must be written form/POS"))?;
            words.push(Lexeme::new(form, pos).with_context(|| format!("word {token:?}"))?);
        } else {
            let label = DependencyLabel::new(token).with_context(|| format!("relation {token:?}"))?;
            let dependent = i / 2;
            edges.push((dependent + 1, dependent, label));
        }
    }
    DependencyTree::new(words, edges).with_context(|| format!("phrase spec {spec:?}"))
}
