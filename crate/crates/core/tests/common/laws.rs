//! Algebraic laws as reusable proptest checks, so the regular test suite and
//! the acceptance harness run the same code at different case counts.

use std::collections::BTreeSet;

use apt_core::path::{DependencyLabel, PathElement};
use apt_core::{merge, offset, Apt, CooccurrenceType, DependencyTree, Lexeme, LexemeId, MergeKind, WeightKind};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use super::{raw_canonical, reduce_leftmost, reduce_rightmost, render_raw, RawElement};

const LABELS: [&str; 4] = ["amod", "dobj", "nsubj", "det"];

pub type Check = Result<(), TestCaseError>;

pub fn raw_path(max_len: usize) -> impl Strategy<Value = Vec<RawElement>> {
    prop::collection::vec((0..LABELS.len(), any::<bool>()), 0..=max_len)
        .prop_map(|v| v.into_iter().map(|(l, inv)| (LABELS[l].to_string(), inv)).collect())
}

/// Inverse steps followed by forward steps.
pub fn canonical_path(max_half: usize) -> impl Strategy<Value = CooccurrenceType> {
    (
        prop::collection::vec(0..LABELS.len(), 0..=max_half),
        prop::collection::vec(0..LABELS.len(), 0..=max_half),
    )
        .prop_map(|(up, down)| {
            CooccurrenceType::reduce(
                up.into_iter()
                    .map(|l| PathElement::inverse(label(l)))
                    .chain(down.into_iter().map(|l| PathElement::forward(label(l)))),
            )
        })
}

/// Two offsets whose concatenation is canonical. When a random pair fails,
/// the inverse prefix of the second is dropped, which always repairs it.
pub fn composable_offsets() -> impl Strategy<Value = (CooccurrenceType, CooccurrenceType)> {
    (canonical_path(2), canonical_path(2)).prop_map(|(d1, d2)| {
        if d1.concat_reduce(&d2).is_canonical() {
            (d1, d2)
        } else {
            let down = d2.elements().iter().copied().filter(|e| !e.is_inverse());
            (d1, CooccurrenceType::reduce(down))
        }
    })
}

/// A count-weighted APT with small integer weights.
pub fn apt(max_entries: usize) -> impl Strategy<Value = Apt> {
    prop::collection::vec((canonical_path(2), 0u32..6, 1u32..5), 0..=max_entries).prop_map(|entries| {
        entries
            .into_iter()
            .map(|(t, w, n)| (t, LexemeId(w), n as f64))
            .collect()
    })
}

/// Parent pointers for a random tree on `n` nodes rooted at 0.
pub fn tree() -> impl Strategy<Value = DependencyTree> {
    (1usize..10)
        .prop_flat_map(|n| {
            let parents: Vec<BoxedStrategy<(usize, usize)>> = (1..n).map(|i| (0..i, 0..LABELS.len()).boxed()).collect();
            (Just(n), parents)
        })
        .prop_map(|(n, parents)| {
            let nodes = (0..n)
                .map(|i| Lexeme {
                    form: format!("w{i}"),
                    pos: "NN".into(),
                })
                .collect();
            let edges = parents.into_iter().enumerate().map(|(i, (h, l))| (h, i + 1, label(l)));
            DependencyTree::new(nodes, edges).unwrap()
        })
}

pub fn merge_kind() -> impl Strategy<Value = MergeKind> {
    prop::sample::select(MergeKind::ALL.to_vec())
}

fn label(i: usize) -> DependencyLabel {
    DependencyLabel::new(LABELS[i]).unwrap()
}

fn to_elements(raw: &[RawElement]) -> Vec<PathElement> {
    raw.iter()
        .map(|(l, inv)| {
            let label = DependencyLabel::new(l).unwrap();
            if *inv {
                PathElement::inverse(label)
            } else {
                PathElement::forward(label)
            }
        })
        .collect()
}

pub fn reduction_idempotent(raw: Vec<RawElement>) -> Check {
    let once = CooccurrenceType::reduce(to_elements(&raw));
    let twice = CooccurrenceType::reduce(once.elements().iter().copied());
    prop_assert_eq!(&once, &twice);
    prop_assert_eq!(once.order() % 2, raw.len() % 2);
    Ok(())
}

pub fn reduction_confluent(raw: Vec<RawElement>) -> Check {
    let left = render_raw(&reduce_leftmost(&raw));
    let right = render_raw(&reduce_rightmost(&raw));
    prop_assert_eq!(&left, &right);
    prop_assert_eq!(CooccurrenceType::reduce(to_elements(&raw)).to_string(), left);
    Ok(())
}

pub fn inverse_laws(raw: Vec<RawElement>) -> Check {
    let t = CooccurrenceType::reduce(to_elements(&raw));
    prop_assert_eq!(&t.inverse().inverse(), &t);
    prop_assert!(t.concat_reduce(&t.inverse()).is_empty());
    prop_assert!(t.inverse().concat_reduce(&t).is_empty());
    prop_assert_eq!(t.inverse().order(), t.order());
    Ok(())
}

pub fn tree_paths_canonical(tree: DependencyTree) -> Check {
    for i in 0..tree.len() {
        for j in 0..tree.len() {
            let t = tree.tree_path(i, j).unwrap();
            let raw = super::raw_tree_path(&tree, i, j);
            prop_assert!(t.is_canonical(), "{} -> {}: {}", i, j, t);
            prop_assert!(raw_canonical(&raw));
            prop_assert_eq!(t.to_string(), render_raw(&reduce_leftmost(&raw)));
            prop_assert_eq!(CooccurrenceType::reduce(t.elements().iter().copied()), t);
        }
    }
    Ok(())
}

fn keys(a: &Apt) -> BTreeSet<(CooccurrenceType, LexemeId)> {
    a.entries().map(|(t, w, _)| (t.clone(), w)).collect()
}

/// offset(offset(a, δ1), δ2) = offset(a, δ1δ2) wherever the intermediate
/// type reduce(δ2τ) is canonical, and is empty elsewhere.
pub fn offset_composition(a: Apt, d1: CooccurrenceType, d2: CooccurrenceType) -> Check {
    let d12 = d1.concat_reduce(&d2);
    prop_assert!(d12.is_canonical());
    let twice = offset(&offset(&a, &d1).unwrap(), &d2).unwrap();
    let once = offset(&a, &d12).unwrap();
    for (t, w) in keys(&twice).union(&keys(&once)) {
        if d2.concat_reduce(t).is_canonical() {
            prop_assert_eq!(twice.get(t, *w), once.get(t, *w), "at {} {:?}", t, w);
        } else {
            prop_assert_eq!(twice.get(t, *w), 0.0);
        }
    }
    Ok(())
}

pub fn lossy_round_trip(a: Apt, d: CooccurrenceType) -> Check {
    let back = offset(&offset(&a, &d).unwrap(), &d.inverse()).unwrap();
    let di = d.inverse();
    for (t, w) in keys(&a).union(&keys(&back)) {
        if di.concat_reduce(t).is_canonical() {
            prop_assert_eq!(back.get(t, *w), a.get(t, *w), "at {} {:?}", t, w);
        } else {
            prop_assert_eq!(back.get(t, *w), 0.0);
        }
    }
    Ok(())
}

pub fn merge_laws(kind: MergeKind, a: Apt, b: Apt, c: Apt) -> Check {
    let m = |xs: &[&Apt]| merge(kind, xs.iter().copied()).unwrap();
    prop_assert_eq!(m(&[&a, &b]), m(&[&b, &a]));
    let ab = m(&[&a, &b]);
    let bc = m(&[&b, &c]);
    let left = m(&[&ab, &c]);
    prop_assert_eq!(&left, &m(&[&a, &bc]));
    prop_assert_eq!(&left, &m(&[&a, &b, &c]));
    prop_assert_eq!(left.kind(), WeightKind::Count);
    prop_assert!(left.entries().all(|(_, _, v)| v != 0.0));
    if matches!(kind, MergeKind::Min | MergeKind::Max) {
        prop_assert_eq!(m(&[&a, &a]), a.clone());
    }
    let all: BTreeSet<_> = [&a, &b, &c].iter().flat_map(|x| keys(x)).collect();
    for (t, w) in &all {
        let v = left.get(t, *w);
        for x in [&a, &b, &c] {
            match kind {
                MergeKind::Min => prop_assert!(v <= x.get(t, *w)),
                MergeKind::Max => prop_assert!(v >= x.get(t, *w)),
                _ => {}
            }
        }
    }
    Ok(())
}
