mod common;

use std::collections::BTreeMap;

use apt_core::{
    align, compose_tree, merge, offset, Apt, Composer, CompositionError, DependencyTree, MergeKind, OffsetApt,
    OovPolicy, Scheme, WeightingConfig,
};
use common::*;

fn counts() -> WeightingConfig {
    WeightingConfig {
        scheme: Scheme::Count,
        ..WeightingConfig::default()
    }
}

fn members_at(apt: &Apt, l: &apt_core::Lexicon, t: &str) -> Vec<String> {
    apt.members(&ty(t))
        .iter()
        .map(|&(w, _)| l.lexeme(w).to_string())
        .collect()
}

#[test]
fn dry_offset_to_the_verb() {
    let l = toy_lexicon(3);
    let dry = l.apt(l.id(&lex("dry/JJ")).unwrap());
    let moved = offset(dry, &ty("_amod._dobj")).unwrap();
    assert_eq!(members_at(&moved, &l, "nsubj"), ["he/PRP", "we/PRP"]);
    assert_eq!(members_at(&moved, &l, "dobj.amod.advmod"), ["slightly/RB"]);
    let vocab: Vec<String> = moved.entries().map(|(_, w, _)| l.lexeme(w).to_string()).collect();
    assert!(!vocab.iter().any(|w| w == "caused/VBD" || w == "laughter/NN"));
    // The unshifted APT does reach them.
    let base: Vec<String> = dry.entries().map(|(_, w, _)| l.lexeme(w).to_string()).collect();
    assert!(base.iter().any(|w| w == "caused/VBD") && base.iter().any(|w| w == "laughter/NN"));

    let view = OffsetApt::new(dry, ty("_amod._dobj")).unwrap();
    assert_eq!(view.members(&ty("nsubj")), moved.members(&ty("nsubj")));
    assert_eq!(offset(dry, &ty("")).unwrap(), *dry);
}

#[test]
fn offsets_match_the_hand_oracle() {
    let l = toy_lexicon(3);
    for w in l.ids() {
        let table = apt_table(l.apt(w), &l);
        for delta in ["_amod", "_amod._dobj", "_nsubj", "dobj", "_dobj.nsubj", "_det.amod"] {
            let got = apt_table(&offset(l.apt(w), &ty(delta)).unwrap(), &l);
            assert_eq!(
                got,
                oracle_offset(&table, &parse_raw(delta)),
                "{} by {delta}",
                l.lexeme(w)
            );
        }
    }
}

#[test]
fn three_word_alignment() {
    let l = toy_lexicon(2);
    let tree = folded_dry_clothes();
    let aligned = align(&tree, &l).unwrap();
    let offsets: BTreeMap<String, String> = aligned
        .iter()
        .map(|a| (a.lexeme.to_string(), a.view.delta().to_string()))
        .collect();
    let expected: BTreeMap<String, String> = [("dry/JJ", "_amod._dobj"), ("clothes/NNS", "_dobj"), ("folded/VBD", "")]
        .iter()
        .map(|&(a, b)| (a.to_string(), b.to_string()))
        .collect();
    assert_eq!(offsets, expected);
    for a in &aligned {
        let oracle = render_raw(&reduce_leftmost(&raw_tree_path(&tree, a.node, tree.root())));
        assert_eq!(a.view.delta().to_string(), oracle);
    }
}

fn oracle_sum(tree: &DependencyTree, l: &apt_core::Lexicon) -> BTreeMap<(String, String), f64> {
    let mut total = BTreeMap::new();
    for i in 0..tree.len() {
        let table = apt_table(l.apt(l.id(tree.lexeme(i)).unwrap()), l);
        let delta = reduce_leftmost(&raw_tree_path(tree, i, tree.root()));
        for (k, v) in oracle_offset(&table, &delta) {
            *total.entry(k).or_insert(0.0) += v;
        }
    }
    total
}

#[test]
fn three_word_sum_merge() {
    for k in [2, 3] {
        let l = toy_lexicon(k);
        let tree = folded_dry_clothes();
        let composed = compose_tree(&tree, &l, MergeKind::Sum, &counts()).unwrap();
        assert_eq!(apt_table(&composed.apt, &l), oracle_sum(&tree, &l), "k = {k}");
        assert_eq!(composed.offsets[composed.root()], ty(""));
    }
}

#[test]
fn min_merge_keeps_only_shared_anchor_lexemes() {
    let l = toy_lexicon(2);
    let composed = compose_tree(&folded_dry_clothes(), &l, MergeKind::Min, &counts()).unwrap();
    let anchor: Vec<(String, f64)> = composed
        .apt
        .anchor()
        .iter()
        .map(|&(w, v)| (l.lexeme(w).to_string(), v))
        .collect();
    assert_eq!(anchor, [("folded/VBD".to_string(), 1.0)]);

    let aligned: Vec<Apt> = align(&folded_dry_clothes(), &l)
        .unwrap()
        .iter()
        .map(|a| a.view.materialize())
        .collect();
    for (t, w, v) in composed.apt.entries() {
        let expected = aligned.iter().map(|a| a.get(t, w)).fold(f64::INFINITY, f64::min);
        assert_eq!(v, expected);
        assert!(v > 0.0);
    }
}

#[test]
fn one_node_tree_is_the_elementary_apt() {
    let l = toy_lexicon(2);
    let wine = DependencyTree::new(vec![lex("wine/NN")], []).unwrap();
    let id = l.id(&lex("wine/NN")).unwrap();
    for kind in MergeKind::ALL {
        let composed = compose_tree(&wine, &l, kind, &counts()).unwrap();
        assert_eq!(composed.apt, *l.apt(id));
    }
    let ppmi = WeightingConfig {
        shift_k: 1.0,
        ..WeightingConfig::default()
    };
    let composed = compose_tree(&wine, &l, MergeKind::Min, &ppmi).unwrap();
    assert_eq!(
        composed.apt,
        apt_core::similarity::elementary_apt(&l, id, &ppmi).unwrap()
    );
}

#[test]
fn contextualization() {
    let l = toy_lexicon(2);
    let composed = compose_tree(&folded_dry_clothes(), &l, MergeKind::Sum, &counts()).unwrap();
    assert_eq!(composed.contextualize(composed.root()).unwrap(), composed.apt);
    assert!(matches!(
        composed.contextualize(7),
        Err(CompositionError::IndexOutOfRange { index: 7, len: 3 })
    ));

    let dry_node = 1;
    let in_context = composed.contextualize(dry_node).unwrap();
    // The adjective's anchor is what the aligned APTs put one step down the
    // object and its modifier, seen from the verb.
    let aligned = align(&folded_dry_clothes(), &l).unwrap();
    let mut expected: BTreeMap<String, f64> = BTreeMap::new();
    let down = composed.offsets[dry_node].inverse();
    assert_eq!(down, ty("dobj.amod"));
    for a in &aligned {
        for &(w, v) in a.view.members(&down) {
            *expected.entry(l.lexeme(w).to_string()).or_insert(0.0) += v;
        }
    }
    let got: BTreeMap<String, f64> = in_context
        .anchor()
        .iter()
        .map(|&(w, v)| (l.lexeme(w).to_string(), v))
        .collect();
    assert_eq!(got, expected);
    assert!(got.contains_key("dry/JJ") && got.contains_key("clean/JJ"));

    let back = offset(&in_context, &composed.offsets[dry_node]).unwrap();
    for (t, w, v) in back.entries() {
        assert_eq!(composed.apt.get(t, w), v);
    }
}

#[test]
fn incremental_equals_one_step_for_associative_merges() {
    let l = toy_lexicon(3);
    let tree = folded_dry_clothes();
    for kind in MergeKind::ALL {
        let composer = Composer::new(&l, kind, counts());
        let one = composer.compose(&tree).unwrap();
        let inc = composer.compose_incremental(&tree).unwrap();
        assert_eq!(one.apt, inc.apt, "{kind}");
    }
}

#[test]
fn word_order_changes_the_composition() {
    let l = toy_lexicon(2);
    let nn = || "nn".parse().unwrap();
    let a = DependencyTree::new(vec![lex("wine/NN"), lex("clothes/NNS")], [(1, 0, nn())]).unwrap();
    let b = DependencyTree::new(vec![lex("clothes/NNS"), lex("wine/NN")], [(1, 0, nn())]).unwrap();
    assert_ne!(
        l.apt(l.id(&lex("wine/NN")).unwrap()),
        l.apt(l.id(&lex("clothes/NNS")).unwrap())
    );
    for kind in [MergeKind::Sum, MergeKind::Max] {
        let ca = compose_tree(&a, &l, kind, &counts()).unwrap();
        let cb = compose_tree(&b, &l, kind, &counts()).unwrap();
        assert_ne!(ca.apt, cb.apt, "{kind}");
    }
}

#[test]
fn out_of_vocabulary_policies() {
    let l = toy_lexicon(2);
    let tree = DependencyTree::new(
        vec![lex("purple/JJ"), lex("clothes/NNS")],
        [(1, 0, "amod".parse().unwrap())],
    )
    .unwrap();
    let strict = Composer::new(&l, MergeKind::Sum, counts());
    assert!(matches!(strict.compose(&tree), Err(CompositionError::UnknownLexeme(_))));
    let lenient = Composer::new(&l, MergeKind::Sum, counts()).with_oov(OovPolicy::Lenient);
    let sum = lenient.compose(&tree).unwrap();
    assert_eq!(sum.oov, vec![0]);
    assert_eq!(sum.apt, *l.apt(l.id(&lex("clothes/NNS")).unwrap()));
    let min = Composer::new(&l, MergeKind::Min, counts()).with_oov(OovPolicy::Lenient);
    assert!(min.compose(&tree).unwrap().apt.is_empty());
}

#[test]
fn compose_first_single_word_is_plain_ppmi() {
    let l = toy_lexicon(2);
    let first = WeightingConfig {
        pipeline: apt_core::Pipeline::ComposeFirst,
        shift_k: 1.0,
        ..WeightingConfig::default()
    };
    let second = WeightingConfig {
        pipeline: apt_core::Pipeline::ComposeSecond,
        ..first
    };
    let tree = DependencyTree::new(vec![lex("clothes/NNS")], []).unwrap();
    let a = compose_tree(&tree, &l, MergeKind::Sum, &first).unwrap();
    let b = compose_tree(&tree, &l, MergeKind::Sum, &second).unwrap();
    let (ta, tb) = (apt_table(&a.apt, &l), apt_table(&b.apt, &l));
    assert_eq!(ta.keys().collect::<Vec<_>>(), tb.keys().collect::<Vec<_>>());
    for (k, v) in &ta {
        assert!((v - tb[k]).abs() < 1e-12, "{k:?}");
    }
    let phrase = compose_tree(&folded_dry_clothes(), &l, MergeKind::Sum, &first).unwrap();
    assert_eq!(phrase.apt.kind(), apt_core::WeightKind::Ppmi);
    assert!(phrase.apt.entries().all(|(_, _, v)| v > 0.0));
}

#[test]
fn merge_rejects_bad_inputs() {
    assert_eq!(
        merge(MergeKind::Min, Vec::<&Apt>::new()),
        Err(CompositionError::EmptyInputSet)
    );
    let l = toy_lexicon(2);
    let a = l.apt(l.id(&lex("dry/JJ")).unwrap());
    let p =
        apt_core::similarity::elementary_apt(&l, l.id(&lex("dry/JJ")).unwrap(), &WeightingConfig::default()).unwrap();
    assert!(matches!(
        merge(MergeKind::Sum, [a, &p]),
        Err(CompositionError::WeightKindMismatch { .. })
    ));
    assert_eq!(merge(MergeKind::Min, [a, a]).unwrap(), *a);
    let zero = Apt::empty(a.kind());
    assert_eq!(merge(MergeKind::Sum, [a, &zero]).unwrap(), *a);
}

#[test]
fn text_dump_lists_offsets() {
    let l = toy_lexicon(2);
    let composed = compose_tree(&folded_dry_clothes(), &l, MergeKind::Sum, &counts()).unwrap();
    let mut out = Vec::new();
    composed.write_text(&mut out, &l).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("# node\t2\tdry/JJ\t3\tamod\t_amod._dobj\n"));
    assert!(text.contains("# node\t1\tfolded/VBD\t0\troot\t:\n"));
    assert!(text.contains(":\tfolded/VBD\t"));
}
