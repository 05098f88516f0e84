use std::collections::BTreeMap;

use super::{check_inputs, SolverConfig};
use crate::binarize::BinarizedView;
use crate::cache::{best_leaf_solutions, CacheMatrix};
use crate::error::{Error, Result};
use crate::pareto::{CostLossPair, ParetoArchive};
use crate::tree::RecourseSummaryTree;

const MAX_PREDICATES: usize = 10;
const MAX_DEPTH: usize = 2;

/// A candidate subtree: value, branch-node count, tree.
type Candidate = (CostLossPair, usize, RecourseSummaryTree);

/// Enumerates every tree of depth at most `d` over every predicate and
/// keeps the nondominated values, each with its smallest tree. Leaves only
/// take actions that are nondominated for their own subset, which loses no
/// nondominated tree. Intended as a test oracle for small inputs.
pub fn brute_force_solve(
    cache: &CacheMatrix,
    view: &BinarizedView,
    config: &SolverConfig,
) -> Result<ParetoArchive<RecourseSummaryTree>> {
    check_inputs(cache, view, config)?;
    if view.num_predicates() > MAX_PREDICATES || config.max_depth > MAX_DEPTH {
        return Err(Error::Config(format!(
            "exhaustive search is limited to {MAX_PREDICATES} predicates and depth {MAX_DEPTH}"
        )));
    }
    let rows: Vec<usize> = (0..cache.rows()).collect();
    let mut best: BTreeMap<CostLossPair, RecourseSummaryTree> = BTreeMap::new();
    let mut keep = |v: CostLossPair, nodes: usize, tree: RecourseSummaryTree| {
        if nodes > config.max_nodes {
            return;
        }
        match best.get(&v) {
            Some(existing) if *existing <= tree => {}
            _ => {
                best.insert(v, tree);
            }
        }
    };

    for (v, a) in leaf_options(&rows, cache, config) {
        keep(v, 0, RecourseSummaryTree::leaf(a));
    }
    if config.max_depth > 0 {
        for p in 0..view.num_predicates() {
            let (fail, pass) = partition(&rows, view, p);
            let left = enumerate(&fail, config.max_depth - 1, cache, view, config);
            let right = enumerate(&pass, config.max_depth - 1, cache, view, config);
            for (vl, nl, tl) in &left {
                for (vr, nr, tr) in &right {
                    keep(
                        *vl + *vr,
                        1 + nl + nr,
                        RecourseSummaryTree::branch(p, tl.clone(), tr.clone()),
                    );
                }
            }
        }
    }
    Ok(ParetoArchive::nondom(best))
}

fn partition(rows: &[usize], view: &BinarizedView, p: usize) -> (Vec<usize>, Vec<usize>) {
    rows.iter().partition(|&&i| !view.bit(i, p))
}

fn leaf_options(rows: &[usize], cache: &CacheMatrix, config: &SolverConfig) -> Vec<(CostLossPair, usize)> {
    if rows.len() < config.min_leaf {
        return Vec::new();
    }
    best_leaf_solutions(rows, cache).into_entries()
}

/// Every feasible subtree of depth at most `depth` over `rows`.
fn enumerate(
    rows: &[usize],
    depth: usize,
    cache: &CacheMatrix,
    view: &BinarizedView,
    config: &SolverConfig,
) -> Vec<Candidate> {
    let mut out: Vec<Candidate> = leaf_options(rows, cache, config)
        .into_iter()
        .map(|(v, a)| (v, 0, RecourseSummaryTree::leaf(a)))
        .collect();
    if depth == 0 {
        return out;
    }
    for p in 0..view.num_predicates() {
        let (fail, pass) = partition(rows, view, p);
        let left = enumerate(&fail, depth - 1, cache, view, config);
        let right = enumerate(&pass, depth - 1, cache, view, config);
        for (vl, nl, tl) in &left {
            for (vr, nr, tr) in &right {
                out.push((*vl + *vr, 1 + nl + nr, RecourseSummaryTree::branch(p, tl.clone(), tr.clone())));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binarize::Predicate;
    use crate::bitset::BitSet;

    #[test]
    fn hand_enumerated_depth_one() {
        // rows 0,1 pass predicate 0; action 1 fixes row 0 and 1 at cost 1
        // each, action 0 is the null action
        let cache = CacheMatrix::from_cells(
            10,
            vec![vec![0, 1], vec![0, 1], vec![0, 1]],
            vec![vec![true, false], vec![true, false], vec![true, true]],
        );
        let view = BinarizedView::from_columns(
            vec![Predicate::IsSet { feature: 0 }, Predicate::IsSet { feature: 1 }],
            vec![BitSet::from_indices(3, [0, 1]), BitSet::from_indices(3, [2])],
            3,
        );
        let front = brute_force_solve(&cache, &view, &SolverConfig::new(1, 1, 1)).unwrap();
        // leaves: (0,3) and (3,1); splitting off row 2 with the null action: (2,1)
        assert_eq!(front.values(), vec![CostLossPair::new(0, 3), CostLossPair::new(2, 1)]);
        let leaf = RecourseSummaryTree::leaf;
        assert_eq!(front.entries()[1].1, RecourseSummaryTree::branch(0, leaf(0), leaf(1)));
    }

    #[test]
    fn guard() {
        let cache = CacheMatrix::from_cells(10, vec![vec![0]], vec![vec![true]]);
        let view = BinarizedView::from_columns(
            (0..11).map(|f| Predicate::IsSet { feature: f }).collect(),
            (0..11).map(|_| BitSet::empty(1)).collect(),
            1,
        );
        assert!(brute_force_solve(&cache, &view, &SolverConfig::new(1, 1, 1)).is_err());
    }
}
