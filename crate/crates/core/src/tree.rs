//! Recourse summary trees: axis-parallel splits over binary predicates with
//! one action index per leaf.

use std::cmp::Ordering;
use std::sync::Arc;

use crate::binarize::{BinarizedView, Predicate};
use crate::bitset::BitSet;
use crate::schema::Instance;

/// A tree node. Instances whose predicate bit is 1 go to the `pass` child,
/// the others to the `fail` child.
///
/// Trees are totally ordered: a leaf sorts before any branch, leaves by
/// action index, branches by (predicate, fail subtree, pass subtree). Among
/// trees with equal value the smallest one is reported.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RecourseSummaryTree {
    Leaf { action: usize },
    Branch(Arc<Branch>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Branch {
    pub predicate: usize,
    pub fail: RecourseSummaryTree,
    pub pass: RecourseSummaryTree,
}

impl RecourseSummaryTree {
    pub fn leaf(action: usize) -> Self {
        RecourseSummaryTree::Leaf { action }
    }

    pub fn branch(predicate: usize, fail: RecourseSummaryTree, pass: RecourseSummaryTree) -> Self {
        RecourseSummaryTree::Branch(Arc::new(Branch { predicate, fail, pass }))
    }

    pub fn depth(&self) -> usize {
        match self {
            RecourseSummaryTree::Leaf { .. } => 0,
            RecourseSummaryTree::Branch(b) => 1 + b.fail.depth().max(b.pass.depth()),
        }
    }

    pub fn branch_count(&self) -> usize {
        match self {
            RecourseSummaryTree::Leaf { .. } => 0,
            RecourseSummaryTree::Branch(b) => 1 + b.fail.branch_count() + b.pass.branch_count(),
        }
    }

    /// Leaf actions in left-to-right order (fail side first); a leaf's id is
    /// its position in this list.
    pub fn leaf_actions(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.walk_leaves(&mut |a| out.push(a));
        out
    }

    fn walk_leaves(&self, visit: &mut impl FnMut(usize)) {
        match self {
            RecourseSummaryTree::Leaf { action } => visit(*action),
            RecourseSummaryTree::Branch(b) => {
                b.fail.walk_leaves(visit);
                b.pass.walk_leaves(visit);
            }
        }
    }

    /// Predicates tested anywhere in the tree, sorted and deduplicated.
    pub fn predicates_used(&self) -> Vec<usize> {
        fn collect(t: &RecourseSummaryTree, out: &mut Vec<usize>) {
            if let RecourseSummaryTree::Branch(b) = t {
                out.push(b.predicate);
                collect(&b.fail, out);
                collect(&b.pass, out);
            }
        }
        let mut out = Vec::new();
        collect(self, &mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Routes by an arbitrary predicate oracle; returns (leaf id, action).
    pub fn route_with(&self, mut holds: impl FnMut(usize) -> bool) -> (usize, usize) {
        let mut node = self;
        let mut offset = 0;
        loop {
            match node {
                RecourseSummaryTree::Leaf { action } => return (offset, *action),
                RecourseSummaryTree::Branch(b) => {
                    if holds(b.predicate) {
                        offset += b.fail.leaf_count();
                        node = &b.pass;
                    } else {
                        node = &b.fail;
                    }
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            RecourseSummaryTree::Leaf { .. } => 1,
            RecourseSummaryTree::Branch(b) => b.fail.leaf_count() + b.pass.leaf_count(),
        }
    }

    /// Routes a raw instance by evaluating the original-feature tests.
    pub fn route(&self, x: &Instance, predicates: &[Predicate]) -> (usize, usize) {
        self.route_with(|p| predicates[p].holds(x))
    }

    /// Routes a row of a binarized view by its recorded bits.
    pub fn route_row(&self, view: &BinarizedView, row: usize) -> (usize, usize) {
        self.route_with(|p| view.bit(row, p))
    }

    /// The subset of `rows` reaching each leaf, indexed by leaf id.
    pub fn leaf_subsets(&self, view: &BinarizedView, rows: &BitSet) -> Vec<BitSet> {
        fn split(t: &RecourseSummaryTree, view: &BinarizedView, rows: BitSet, out: &mut Vec<BitSet>) {
            match t {
                RecourseSummaryTree::Leaf { .. } => out.push(rows),
                RecourseSummaryTree::Branch(b) => {
                    let column = view.column(b.predicate);
                    split(&b.fail, view, rows.difference(column), out);
                    split(&b.pass, view, rows.intersection(column), out);
                }
            }
        }
        let mut out = Vec::new();
        split(self, view, rows.clone(), &mut out);
        out
    }
}

/// Orders the branch `(predicate, fail, pass)` against an existing tree
/// without building it.
pub(crate) fn cmp_branch(
    predicate: usize,
    fail: &RecourseSummaryTree,
    pass: &RecourseSummaryTree,
    other: &RecourseSummaryTree,
) -> Ordering {
    match other {
        RecourseSummaryTree::Leaf { .. } => Ordering::Greater,
        RecourseSummaryTree::Branch(b) => predicate
            .cmp(&b.predicate)
            .then_with(|| fail.cmp(&b.fail))
            .then_with(|| pass.cmp(&b.pass)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(a: usize) -> RecourseSummaryTree {
        RecourseSummaryTree::leaf(a)
    }

    fn view() -> BinarizedView {
        // four rows; predicate 0 holds for rows 2 and 3, predicate 1 for 1 and 3
        BinarizedView::from_columns(
            vec![
                Predicate::IsSet { feature: 0 },
                Predicate::IsSet { feature: 1 },
            ],
            vec![BitSet::from_indices(4, [2, 3]), BitSet::from_indices(4, [1, 3])],
            4,
        )
    }

    #[test]
    fn shape() {
        let t = RecourseSummaryTree::branch(0, leaf(1), RecourseSummaryTree::branch(1, leaf(2), leaf(3)));
        assert_eq!((t.depth(), t.branch_count(), t.leaf_count()), (2, 2, 3));
        assert_eq!(t.leaf_actions(), vec![1, 2, 3]);
        assert_eq!(t.predicates_used(), vec![0, 1]);
        assert_eq!((leaf(4).depth(), leaf(4).branch_count()), (0, 0));
    }

    #[test]
    fn routing_follows_bits() {
        let v = view();
        let t = RecourseSummaryTree::branch(0, leaf(1), RecourseSummaryTree::branch(1, leaf(2), leaf(3)));
        let routed: Vec<_> = (0..4).map(|r| t.route_row(&v, r)).collect();
        assert_eq!(routed, vec![(0, 1), (0, 1), (1, 2), (2, 3)]);
        assert_eq!(leaf(7).route_row(&v, 2), (0, 7));
    }

    #[test]
    fn leaf_subsets_partition_the_rows() {
        let v = view();
        let t = RecourseSummaryTree::branch(1, RecourseSummaryTree::branch(0, leaf(0), leaf(0)), leaf(5));
        let subsets = t.leaf_subsets(&v, &BitSet::full(4));
        let lists: Vec<_> = subsets.iter().map(BitSet::to_vec).collect();
        assert_eq!(lists, vec![vec![0], vec![2], vec![1, 3]]);
        for r in 0..4 {
            assert!(subsets[t.route_row(&v, r).0].contains(r));
        }
    }

    #[test]
    fn ordering() {
        assert!(leaf(9) < RecourseSummaryTree::branch(0, leaf(0), leaf(0)));
        assert!(leaf(1) < leaf(2));
        let a = RecourseSummaryTree::branch(0, leaf(5), leaf(0));
        let b = RecourseSummaryTree::branch(1, leaf(0), leaf(0));
        let c = RecourseSummaryTree::branch(0, leaf(5), leaf(1));
        assert!(a < b && a < c && c < b);
        assert_eq!(cmp_branch(0, &leaf(5), &leaf(1), &c), Ordering::Equal);
        assert_eq!(cmp_branch(0, &leaf(5), &leaf(0), &c), Ordering::Less);
        assert_eq!(cmp_branch(0, &leaf(0), &leaf(0), &leaf(3)), Ordering::Greater);
    }
}
