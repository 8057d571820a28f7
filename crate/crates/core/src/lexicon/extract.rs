//! Typed co-occurrence extraction from a single tree.

use crate::corpus::{DependencyTree, Lexeme};
use crate::path::{CooccurrenceType, Direction, PathElement};

/// Walk the undirected tree from `source`, maintaining the reduced path on
/// a stack, and report every node whose reduced path has order at most
/// `order_cap`. Excluded nodes are neither reported nor traversed.
///
/// Once the last step of the path is forward, every further step is a
/// forward descent that cannot cancel, so the walk stops as soon as such a
/// path exceeds the cap.
pub(crate) fn walk_from<F>(tree: &DependencyTree, source: usize, order_cap: usize, visit: &mut F)
where
    F: FnMut(usize, &CooccurrenceType),
{
    if tree.is_excluded(source) {
        return;
    }
    let mut path = CooccurrenceType::empty();
    visit(source, &path);
    walk(tree, source, usize::MAX, &mut path, order_cap, visit);
}

fn step(path: &mut CooccurrenceType, element: PathElement) -> Option<PathElement> {
    match path.last() {
        Some(top) if top.cancels(element) => path.pop(),
        _ => {
            path.push(element);
            None
        }
    }
}

fn undo(path: &mut CooccurrenceType, cancelled: Option<PathElement>) {
    match cancelled {
        Some(restored) => path.push(restored),
        None => {
            path.pop();
        }
    }
}

fn walk<F>(
    tree: &DependencyTree,
    node: usize,
    came_from: usize,
    path: &mut CooccurrenceType,
    order_cap: usize,
    visit: &mut F,
) where
    F: FnMut(usize, &CooccurrenceType),
{
    let enter = |next: usize, element: PathElement, path: &mut CooccurrenceType, visit: &mut F| {
        let cancelled = step(path, element);
        let grows_only = path.last().map(|e| e.direction == Direction::Forward).unwrap_or(false);
        if !(grows_only && path.order() > order_cap) {
            if path.order() <= order_cap {
                debug_assert!(path.is_canonical());
                visit(next, path);
            }
            walk(tree, next, node, path, order_cap, visit);
        }
        undo(path, cancelled);
    };
    if let Some((head, label)) = tree.head(node) {
        if head != came_from {
            enter(head, PathElement::inverse(label), path, visit);
        }
    }
    for &child in tree.children(node) {
        if child != came_from && !tree.is_excluded(child) {
            let (_, label) = tree.head(child).expect("child has a head");
            enter(child, PathElement::forward(label), path, visit);
        }
    }
}

/// All `(source, target, type)` node triples of a tree with reduced order at
/// most `order_cap`, including each node paired with itself at the empty path.
pub fn extract_positions(tree: &DependencyTree, order_cap: usize) -> Vec<(usize, usize, CooccurrenceType)> {
    let mut out = Vec::new();
    for source in 0..tree.len() {
        walk_from(tree, source, order_cap, &mut |target, path| {
            out.push((source, target, path.clone()))
        });
    }
    out
}

/// The typed co-occurrences `⟨w, w′, τ⟩` of a tree, one per ordered node pair.
pub fn extract_cooccurrences(tree: &DependencyTree, order_cap: usize) -> Vec<(Lexeme, Lexeme, CooccurrenceType)> {
    extract_positions(tree, order_cap)
        .into_iter()
        .map(|(i, j, ty)| (tree.lexeme(i).clone(), tree.lexeme(j).clone(), ty))
        .collect()
}
