mod common;

use std::collections::BTreeMap;

use apt_core::similarity::elementary_apt;
use apt_core::{
    compose_tree, cosine, merge, neighbors, path_weight, vectorize, DependencyTree, Execution, FeatureVector, LexemeId,
    MergeKind, NeighborIndex, PathWeighting, Scheme, WeightingConfig,
};
use common::*;
use proptest::prelude::*;

fn cfg(phi: PathWeighting) -> WeightingConfig {
    WeightingConfig {
        shift_k: 1.0,
        path_weighting: phi,
        ..WeightingConfig::default()
    }
}

fn oracle_cosine(a: &BTreeMap<(String, String), f64>, b: &BTreeMap<(String, String), f64>) -> (f64, bool) {
    let dot: f64 = a.iter().filter_map(|(k, x)| b.get(k).map(|y| x * y)).sum();
    let shared = a.keys().any(|k| b.contains_key(k));
    let na = a.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.values().map(|x| x * x).sum::<f64>().sqrt();
    if !shared || na == 0.0 || nb == 0.0 {
        (0.0, !shared)
    } else {
        (dot / (na * nb), false)
    }
}

#[test]
fn every_lexeme_is_its_own_best_match() {
    let l = toy_lexicon(2);
    let c = cfg(PathWeighting::Constant);
    let index = NeighborIndex::build(&l, &c, Execution::Sequential).unwrap();
    for w in l.ids() {
        let v = vectorize(&elementary_apt(&l, w, &c).unwrap(), &l, &c, Some(w)).unwrap();
        let list = index.neighbors(&v, "q", 3, None);
        assert!((list.entries[0].score - 1.0).abs() < 1e-12);
        let me = list
            .entries
            .iter()
            .find(|n| n.lexeme == *l.lexeme(w))
            .unwrap_or_else(|| panic!("{} missing from its own list", l.lexeme(w)));
        assert!((me.score - 1.0).abs() < 1e-12);
    }
}

#[test]
fn long_lists_are_complete_and_ordered() {
    let l = toy_lexicon(2);
    let c = cfg(PathWeighting::Constant);
    let dry = l.id(&lex("dry/JJ")).unwrap();
    let list = neighbors(&elementary_apt(&l, dry, &c).unwrap(), &l, &c, 1000, None, Some(dry)).unwrap();
    assert_eq!(list.entries.len(), l.len());
    for pair in list.entries.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        assert!(a.score > b.score || (a.score == b.score && a.lexeme.to_string() < b.lexeme.to_string()));
    }
    let adjectives = neighbors(
        &elementary_apt(&l, dry, &c).unwrap(),
        &l,
        &c,
        1000,
        Some("JJ"),
        Some(dry),
    )
    .unwrap();
    assert!(adjectives.entries.iter().all(|n| n.lexeme.pos == "JJ"));
    assert_eq!(adjectives.entries[0].lexeme, lex("dry/JJ"));
}

#[test]
fn parallel_and_sequential_rankings_agree() {
    let l = toy_lexicon(3);
    let c = cfg(PathWeighting::Harmonic);
    let seq = NeighborIndex::build(&l, &c, Execution::Sequential).unwrap();
    let par = NeighborIndex::build(&l, &c, Execution::Parallel).unwrap();
    for w in l.ids() {
        let v = vectorize(&elementary_apt(&l, w, &c).unwrap(), &l, &c, Some(w)).unwrap();
        assert_eq!(seq.neighbors(&v, "q", 10, None), par.neighbors(&v, "q", 10, None));
    }
}

#[test]
fn scaling_the_query_keeps_the_ranking() {
    let l = toy_lexicon(2);
    let c = cfg(PathWeighting::Constant);
    let index = NeighborIndex::build(&l, &c, Execution::Sequential).unwrap();
    for w in l.ids() {
        let v = vectorize(&elementary_apt(&l, w, &c).unwrap(), &l, &c, Some(w)).unwrap();
        let base: Vec<_> = index
            .neighbors(&v, "q", 100, None)
            .entries
            .into_iter()
            .map(|n| n.lexeme)
            .collect();
        for s in [0.25, 8.0, 1024.0] {
            let scaled: Vec<_> = index
                .neighbors(&v.scale(s), "q", 100, None)
                .entries
                .into_iter()
                .map(|n| n.lexeme)
                .collect();
            assert_eq!(base, scaled);
        }
    }
}

#[test]
fn constant_path_weighting_is_linear() {
    let l = toy_lexicon(2);
    let counts = WeightingConfig {
        scheme: Scheme::Count,
        ..WeightingConfig::default()
    };
    for (a, b) in [
        ("dry/JJ", "wet/JJ"),
        ("wine/NN", "clothes/NNS"),
        ("we/PRP", "bought/VBD"),
    ] {
        let (a, b) = (l.apt(l.id(&lex(a)).unwrap()), l.apt(l.id(&lex(b)).unwrap()));
        let sum = merge(MergeKind::Sum, [a, b]).unwrap();
        let lhs = vectorize(&sum, &l, &counts, None).unwrap();
        let rhs = vectorize(a, &l, &counts, None)
            .unwrap()
            .add(&vectorize(b, &l, &counts, None).unwrap());
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn path_probability_dimensions() {
    let l = toy_lexicon(2);
    let c = cfg(PathWeighting::PathProbability);
    let dry = l.id(&lex("dry/JJ")).unwrap();
    let apt = elementary_apt(&l, dry, &c).unwrap();
    let v = vectorize(&apt, &l, &c, Some(dry)).unwrap();
    let counts = brute_force_counts(&toy_trees(2), 2);
    let all: u64 = counts
        .iter()
        .filter(|((a, _, _), _)| a == "dry/JJ")
        .map(|(_, n)| n)
        .sum();
    for (t, w2, x) in apt.entries() {
        let row: u64 = counts
            .iter()
            .filter(|((a, _, p), _)| a == "dry/JJ" && *p == t.to_string())
            .map(|(_, n)| n)
            .sum();
        let want = row as f64 / all as f64 * x;
        assert!((v.get(t, w2) - want).abs() < 1e-12);
    }
    assert_eq!(
        path_weight(PathWeighting::PathProbability, &l, &lex("dry/JJ"), &ty("")).unwrap(),
        l.path_total(dry, &ty("")) / l.grand_total(dry)
    );
    assert!(vectorize(&apt, &l, &c, None).unwrap().is_empty());
    let wrong = WeightingConfig {
        scheme: Scheme::Count,
        ..c
    };
    assert!(vectorize(&apt, &l, &wrong, Some(dry)).is_err());
}

#[test]
fn min_composed_neighbours_follow_the_cosine_grid() {
    let l = toy_lexicon(2);
    let c = cfg(PathWeighting::Constant);
    let tree = DependencyTree::new(
        vec![lex("dry/JJ"), lex("clothes/NNS")],
        [(1, 0, "amod".parse().unwrap())],
    )
    .unwrap();
    let composed = compose_tree(&tree, &l, MergeKind::Min, &c).unwrap();
    let head = l.id(&lex("clothes/NNS")).unwrap();
    let list = neighbors(&composed.apt, &l, &c, usize::MAX, None, Some(head)).unwrap();
    assert_eq!(list.entries.len(), l.len());

    let query = apt_table(&composed.apt, &l);
    assert!(!query.is_empty());
    let mut zero = 0;
    for n in &list.entries {
        let w = l.id(&n.lexeme).unwrap();
        let (want, empty) = oracle_cosine(&query, &apt_table(&elementary_apt(&l, w, &c).unwrap(), &l));
        assert!((n.score - want).abs() < 1e-12, "{}", n.lexeme);
        assert_eq!(n.zero_intersection, empty, "{}", n.lexeme);
        zero += usize::from(empty);
    }
    assert!(zero > 0);
    // Nothing outside the support of the intersection can score.
    let support: Vec<&String> = query.keys().map(|(_, w)| w).collect();
    for n in list.entries.iter().filter(|n| n.score > 0.0) {
        let w = l.id(&n.lexeme).unwrap();
        let theirs = apt_table(&elementary_apt(&l, w, &c).unwrap(), &l);
        assert!(theirs.keys().any(|(_, x)| support.contains(&x)));
    }
}

#[test]
fn output_formats() {
    let l = toy_lexicon(2);
    let c = cfg(PathWeighting::Constant);
    let dry = l.id(&lex("dry/JJ")).unwrap();
    let list = neighbors(&elementary_apt(&l, dry, &c).unwrap(), &l, &c, 2, None, Some(dry)).unwrap();
    let mut tsv = Vec::new();
    list.write_tsv(&mut tsv).unwrap();
    let tsv = String::from_utf8(tsv).unwrap();
    assert!(tsv.starts_with("# query\tdry/JJ\n"));
    assert!(tsv.contains("1\tdry/JJ\t1.000000\t0\n"));
    let mut table = Vec::new();
    list.write_table(&mut table).unwrap();
    assert!(String::from_utf8(table).unwrap().contains("dry/JJ"));
}

fn vector() -> impl Strategy<Value = FeatureVector> {
    prop::collection::vec((0usize..3, 0u32..5, -4i32..5), 0..12).prop_map(|dims| {
        FeatureVector::from_entries(dims.into_iter().map(|(t, w, x)| {
            let t = ["", "amod", "_dobj"][t];
            ((t.parse().unwrap(), LexemeId(w)), x as f64)
        }))
    })
}

proptest! {
    #[test]
    fn cosine_laws(u in vector(), v in vector(), c in 0.01f64..100.0) {
        let uv = cosine(&u, &v);
        prop_assert_eq!(uv, cosine(&v, &u));
        prop_assert!((-1.0..=1.0).contains(&uv));
        prop_assert!((cosine(&u.scale(c), &v) - uv).abs() < 1e-12);
        if !u.is_empty() {
            prop_assert!((cosine(&u, &u) - 1.0).abs() < 1e-12);
        }
    }
}
