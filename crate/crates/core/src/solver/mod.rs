//! Exact bi-objective dynamic program over recourse summary trees.
//!
//! A subproblem is an instance subset together with the remaining depth and
//! branch-node budget. Its front is the nondominated union of the leaf
//! options and, for every predicate that splits the subset into two
//! feasible parts, the merged fronts of the two children under every split
//! of the remaining budget. Fronts are memoized per subproblem.

mod brute;
mod leaf;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering as AtomicOrdering};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use brute::brute_force_solve;

use crate::binarize::BinarizedView;
use crate::bitset::BitSet;
use crate::cache::{with_threads, CacheMatrix};
use crate::error::{Error, Result};
use crate::pareto::{CostLossPair, ParetoArchive};
use crate::tree::{cmp_branch, RecourseSummaryTree};
use leaf::LeafEvaluator;

pub const DEFAULT_MAX_DEPTH: usize = 3;
pub const DEFAULT_MAX_NODES: usize = 7;
pub const DEFAULT_MIN_LEAF: usize = 50;
const MAX_DEPTH_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_depth: usize,
    /// Maximum number of branch nodes.
    pub max_nodes: usize,
    pub min_leaf: usize,
    #[serde(skip)]
    pub timeout: Option<Duration>,
    /// Worker threads; 0 uses the ambient rayon pool.
    #[serde(skip)]
    pub threads: usize,
    /// Disables bound-based pruning when false; the front must not change.
    #[serde(skip)]
    pub pruning: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_depth: DEFAULT_MAX_DEPTH,
            max_nodes: DEFAULT_MAX_NODES,
            min_leaf: DEFAULT_MIN_LEAF,
            timeout: None,
            threads: 0,
            pruning: true,
        }
    }
}

impl SolverConfig {
    pub fn new(max_depth: usize, max_nodes: usize, min_leaf: usize) -> Self {
        SolverConfig {
            max_depth,
            max_nodes,
            min_leaf,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_depth > MAX_DEPTH_LIMIT {
            return Err(Error::Config(format!("depth {} exceeds {MAX_DEPTH_LIMIT}", self.max_depth)));
        }
        let full = (1usize << self.max_depth) - 1;
        if self.max_nodes > full {
            return Err(Error::Config(format!(
                "max nodes {} exceeds the {full} branch nodes of a depth-{} tree",
                self.max_nodes, self.max_depth
            )));
        }
        if self.min_leaf == 0 {
            return Err(Error::Config("min leaf size must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Complete,
    TimedOut,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    /// Subproblems solved (memo misses).
    pub subproblems: u64,
    pub cache_hits: u64,
    /// Splits skipped as degenerate, infeasible or duplicate.
    pub pruned_splits: u64,
    /// Subproblems whose splits were skipped by the lower bound.
    pub bound_prunes: u64,
    pub leaf_evaluations: u64,
    /// Actions left after merging identical cache columns.
    pub distinct_actions: usize,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub front: ParetoArchive<RecourseSummaryTree>,
    pub status: SolveStatus,
    pub stats: SolverStats,
}

/// A search state: the instances routed here and the predicates already
/// tested on the path from the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    pub rows: BitSet,
    pub used: BitSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Fail,
    Pass,
}

impl State {
    pub fn root(rows: usize, predicates: usize) -> Self {
        State {
            rows: BitSet::full(rows),
            used: BitSet::empty(predicates),
        }
    }

    /// The child state on one side of predicate `p`.
    pub fn transition(&self, view: &BinarizedView, p: usize, side: Side) -> State {
        let column = view.column(p);
        let rows = match side {
            Side::Fail => self.rows.difference(column),
            Side::Pass => self.rows.intersection(column),
        };
        let mut used = self.used.clone();
        used.insert(p);
        State { rows, used }
    }
}

/// Per-instance minimum cost and loss over all actions; their sums over a
/// subset bound every solution value of that subset from below.
pub struct LowerBound {
    row_cost: Vec<u64>,
    row_loss: Vec<u64>,
}

impl LowerBound {
    pub fn new(cache: &CacheMatrix) -> Self {
        let row_cost = (0..cache.rows())
            .map(|i| cache.cost_row(i).iter().copied().min().unwrap_or(0) as u64)
            .collect();
        let row_loss = (0..cache.rows())
            .map(|i| (0..cache.actions()).all(|a| cache.loss(i, a)) as u64)
            .collect();
        LowerBound { row_cost, row_loss }
    }

    pub fn lower_bound(&self, rows: &BitSet) -> CostLossPair {
        rows.iter().fold(CostLossPair::ZERO, |acc, i| {
            acc + CostLossPair::new(self.row_cost[i], self.row_loss[i])
        })
    }
}

/// Accumulates candidate trees, keeping for each loss the cheapest tree
/// (smallest under tree order on ties), and sweeps out dominated entries at
/// the end.
#[derive(Default)]
pub(crate) struct FrontBuilder {
    by_loss: BTreeMap<u64, (u64, RecourseSummaryTree)>,
}

impl FrontBuilder {
    pub fn offer(&mut self, v: CostLossPair, tree: RecourseSummaryTree) {
        match self.by_loss.get_mut(&v.loss) {
            Some(slot) if (v.cost, &tree) < (slot.0, &slot.1) => *slot = (v.cost, tree),
            Some(_) => {}
            None => {
                self.by_loss.insert(v.loss, (v.cost, tree));
            }
        }
    }

    pub fn offer_branch(
        &mut self,
        v: CostLossPair,
        predicate: usize,
        fail: &RecourseSummaryTree,
        pass: &RecourseSummaryTree,
    ) {
        let better = match self.by_loss.get(&v.loss) {
            None => true,
            Some((cost, tree)) => {
                v.cost < *cost || (v.cost == *cost && cmp_branch(predicate, fail, pass, tree).is_lt())
            }
        };
        if better {
            let tree = RecourseSummaryTree::branch(predicate, fail.clone(), pass.clone());
            self.by_loss.insert(v.loss, (v.cost, tree));
        }
    }

    pub fn extend(&mut self, front: ParetoArchive<RecourseSummaryTree>) {
        for (v, t) in front.into_entries() {
            self.offer(v, t);
        }
    }

    pub fn covers(&self, v: &CostLossPair) -> bool {
        self.by_loss.range(..=v.loss).any(|(_, (cost, _))| *cost <= v.cost)
    }

    pub fn finish(self) -> ParetoArchive<RecourseSummaryTree> {
        let mut staircase = Vec::new();
        let mut min_cost = u64::MAX;
        for (loss, (cost, tree)) in self.by_loss {
            if cost < min_cost {
                min_cost = cost;
                staircase.push((CostLossPair::new(cost, loss), tree));
            }
        }
        staircase.reverse();
        ParetoArchive::from_sorted_unchecked(staircase)
    }
}

type Front = Arc<ParetoArchive<RecourseSummaryTree>>;

struct Search<'a> {
    view: &'a BinarizedView,
    config: &'a SolverConfig,
    leaves: LeafEvaluator,
    bound: LowerBound,
    deadline: Option<Instant>,
    timed_out: AtomicBool,
    memo: Mutex<HashMap<(BitSet, usize, usize), Front>>,
    leaf_memo: Mutex<HashMap<BitSet, Arc<ParetoArchive<usize>>>>,
    subproblems: AtomicU64,
    cache_hits: AtomicU64,
    pruned_splits: AtomicU64,
    bound_prunes: AtomicU64,
    leaf_evaluations: AtomicU64,
}

/// Largest useful (depth, budget) for a subset of `n >= min_leaf` rows: a
/// tree with `b` branch nodes has `b + 1` leaves and depth at most `b`.
fn normalize(n: usize, depth: usize, budget: usize, min_leaf: usize) -> (usize, usize) {
    let budget = budget.min((1 << depth) - 1).min(n / min_leaf - 1);
    (depth.min(budget), budget)
}

impl Search<'_> {
    fn expired(&self) -> bool {
        if self.timed_out.load(AtomicOrdering::Relaxed) {
            return true;
        }
        match self.deadline {
            Some(d) if Instant::now() >= d => {
                self.timed_out.store(true, AtomicOrdering::Relaxed);
                true
            }
            _ => false,
        }
    }

    fn count(counter: &AtomicU64) {
        counter.fetch_add(1, AtomicOrdering::Relaxed);
    }

    fn cached_leaf(&self, rows: &BitSet) -> Option<Arc<ParetoArchive<usize>>> {
        self.leaf_memo.lock().unwrap().get(rows).cloned()
    }

    fn store_leaf(&self, rows: &BitSet, sums: &[u64]) -> Arc<ParetoArchive<usize>> {
        Self::count(&self.leaf_evaluations);
        let front = Arc::new(self.leaves.front(sums, rows.count()));
        self.leaf_memo
            .lock()
            .unwrap()
            .entry(rows.clone())
            .or_insert(front)
            .clone()
    }

    fn leaf_front(&self, rows: &BitSet) -> Arc<ParetoArchive<usize>> {
        match self.cached_leaf(rows) {
            Some(front) => front,
            None => self.store_leaf(rows, &self.leaves.sums(rows)),
        }
    }

    /// Fills the leaf memo for both children of a split, summing only the
    /// smaller side directly.
    fn prepare_children(&self, parent: &BitSet, parent_sums: &OnceLock<Vec<u64>>, children: [&BitSet; 2]) {
        for child in children {
            if self.cached_leaf(child).is_none() {
                let sums = self.leaves.child_sums(child, parent, || {
                    parent_sums.get_or_init(|| self.leaves.sums(parent)).clone()
                });
                self.store_leaf(child, &sums);
            }
        }
    }

    /// Front of subproblem (state, depth, budget) and whether it is
    /// complete.
    fn solve_node(&self, state: &State, depth: usize, budget: usize) -> (Front, bool) {
        let n = state.rows.count();
        if n < self.config.min_leaf {
            return (Arc::new(ParetoArchive::empty()), true);
        }
        let (depth, budget) = normalize(n, depth, budget, self.config.min_leaf);
        let key = (state.rows.clone(), depth, budget);
        if let Some(front) = self.memo.lock().unwrap().get(&key) {
            Self::count(&self.cache_hits);
            return (front.clone(), true);
        }

        let mut builder = FrontBuilder::default();
        for (v, a) in self.leaf_front(&state.rows).iter() {
            builder.offer(*v, RecourseSummaryTree::leaf(*a));
        }
        let mut complete = true;
        if depth > 0 {
            let ideal = self.bound.lower_bound(&state.rows);
            if self.config.pruning && builder.covers(&ideal) {
                // no split can beat a leaf that already reaches the bound
                Self::count(&self.bound_prunes);
            } else if self.expired() {
                complete = false;
            } else {
                complete = self.split(state, depth, budget, &mut builder);
            }
        }

        let front = Arc::new(builder.finish());
        if complete {
            Self::count(&self.subproblems);
            self.memo.lock().unwrap().entry(key).or_insert_with(|| front.clone());
        }
        (front, complete)
    }

    fn split(&self, state: &State, depth: usize, budget: usize, builder: &mut FrontBuilder) -> bool {
        let min_leaf = self.config.min_leaf;
        let mut seen: HashSet<BitSet> = HashSet::new();
        let mut splits = Vec::new();
        for p in 0..self.view.num_predicates() {
            if state.used.contains(p) {
                continue;
            }
            let fail = state.transition(self.view, p, Side::Fail);
            let pass = state.transition(self.view, p, Side::Pass);
            // degenerate, infeasible, or the same partition as an earlier predicate
            if fail.rows.count() < min_leaf
                || pass.rows.count() < min_leaf
                || seen.contains(&fail.rows)
                || seen.contains(&pass.rows)
            {
                Self::count(&self.pruned_splits);
                continue;
            }
            seen.insert(fail.rows.clone());
            seen.insert(pass.rows.clone());
            splits.push((p, fail, pass));
        }

        let parent_sums = OnceLock::new();
        let results: Vec<(FrontBuilder, bool)> = splits
            .par_iter()
            .map(|(p, fail, pass)| {
                let mut local = FrontBuilder::default();
                if self.expired() {
                    return (local, false);
                }
                self.prepare_children(&state.rows, &parent_sums, [&fail.rows, &pass.rows]);
                let mut complete = true;
                for (b_fail, b_pass) in budget_splits(budget, depth, fail.rows.count(), pass.rows.count(), min_leaf) {
                    let (left, left_done) = self.solve_node(fail, depth - 1, b_fail);
                    let (right, right_done) = self.solve_node(pass, depth - 1, b_pass);
                    complete &= left_done && right_done;
                    for (vl, tl) in left.iter() {
                        for (vr, tr) in right.iter() {
                            local.offer_branch(*vl + *vr, *p, tl, tr);
                        }
                    }
                }
                (local, complete)
            })
            .collect();

        let mut complete = true;
        for (local, done) in results {
            complete &= done;
            builder.extend(local.finish());
        }
        complete
    }
}

/// Child budget pairs `(left, right)` with `left + right = budget - 1`,
/// each capped at what its child can use, dropping pairs that another pair
/// covers in both components.
fn budget_splits(budget: usize, depth: usize, n_fail: usize, n_pass: usize, min_leaf: usize) -> Vec<(usize, usize)> {
    let cap = |n: usize| ((1usize << (depth - 1)) - 1).min(n / min_leaf - 1);
    let (cap_fail, cap_pass) = (cap(n_fail), cap(n_pass));
    let total = budget - 1;
    let pairs: Vec<(usize, usize)> = (0..=total.min(cap_fail))
        .map(|l| (l, (total - l).min(cap_pass)))
        .collect();
    pairs
        .iter()
        .enumerate()
        .filter(|(k, (_, r))| pairs.get(k + 1).is_none_or(|(_, next_r)| next_r < r))
        .map(|(_, pair)| *pair)
        .collect()
}

fn check_inputs(cache: &CacheMatrix, view: &BinarizedView, config: &SolverConfig) -> Result<()> {
    config.validate()?;
    if cache.rows() != view.rows() {
        return Err(Error::Config(format!(
            "cache has {} rows but the binarized view has {}",
            cache.rows(),
            view.rows()
        )));
    }
    if cache.rows() < config.min_leaf {
        return Err(Error::Infeasible(format!(
            "{} affected instances cannot fill a leaf of at least {}",
            cache.rows(),
            config.min_leaf
        )));
    }
    Ok(())
}

/// Computes the Pareto front of recourse summary trees over all rows of
/// `cache`. With a timeout the search deepens one level at a time and, when
/// time runs out, returns every nondominated tree found so far.
pub fn solve(cache: &CacheMatrix, view: &BinarizedView, config: &SolverConfig) -> Result<SolveResult> {
    check_inputs(cache, view, config)?;
    let started = Instant::now();
    let search = Search {
        view,
        config,
        leaves: LeafEvaluator::new(cache)?,
        bound: LowerBound::new(cache),
        deadline: config.timeout.map(|t| started + t),
        timed_out: AtomicBool::new(false),
        memo: Mutex::new(HashMap::new()),
        leaf_memo: Mutex::new(HashMap::new()),
        subproblems: AtomicU64::new(0),
        cache_hits: AtomicU64::new(0),
        pruned_splits: AtomicU64::new(0),
        bound_prunes: AtomicU64::new(0),
        leaf_evaluations: AtomicU64::new(0),
    };
    let root = State::root(cache.rows(), view.num_predicates());
    let depths: Vec<usize> = if config.timeout.is_some() {
        (0..=config.max_depth).collect()
    } else {
        vec![config.max_depth]
    };

    let (front, status) = with_threads(config.threads, || {
        let mut best: Option<Front> = None;
        for depth in depths {
            let budget = config.max_nodes.min((1 << depth) - 1);
            let (front, complete) = search.solve_node(&root, depth, budget);
            if complete {
                best = Some(front);
                continue;
            }
            let mut merged = FrontBuilder::default();
            if let Some(previous) = best {
                merged.extend((*previous).clone());
            }
            merged.extend((*front).clone());
            return (merged.finish(), SolveStatus::TimedOut);
        }
        let front = best.expect("at least one depth is searched");
        (Arc::unwrap_or_clone(front), SolveStatus::Complete)
    })?;

    let load = |c: &AtomicU64| c.load(AtomicOrdering::Relaxed);
    let stats = SolverStats {
        subproblems: load(&search.subproblems),
        cache_hits: load(&search.cache_hits),
        pruned_splits: load(&search.pruned_splits),
        bound_prunes: load(&search.bound_prunes),
        leaf_evaluations: load(&search.leaf_evaluations),
        distinct_actions: search.leaves.width(),
        wall_time_ms: started.elapsed().as_millis() as u64,
    };
    log::info!(
        "solve: {} front points, status {:?}, {} subproblems, {} memo hits, {} ms",
        front.len(),
        status,
        stats.subproblems,
        stats.cache_hits,
        stats.wall_time_ms
    );
    Ok(SolveResult { front, status, stats })
}

/// Summed cached value of a tree over all rows, recomputed from scratch.
pub fn tree_value(tree: &RecourseSummaryTree, cache: &CacheMatrix, view: &BinarizedView) -> CostLossPair {
    (0..cache.rows()).fold(CostLossPair::ZERO, |acc, i| {
        let (_, a) = tree.route_row(view, i);
        acc + cache.cell(i, a)
    })
}

/// True when the tree satisfies the structural limits and every leaf
/// receives at least `min_leaf` rows.
pub fn tree_is_feasible(tree: &RecourseSummaryTree, view: &BinarizedView, config: &SolverConfig) -> bool {
    tree.depth() <= config.max_depth
        && tree.branch_count() <= config.max_nodes
        && tree
            .leaf_subsets(view, &BitSet::full(view.rows()))
            .iter()
            .all(|s| s.count() >= config.min_leaf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binarize::Predicate;
    use crate::cache::best_leaf_solutions;

    fn leaf(a: usize) -> RecourseSummaryTree {
        RecourseSummaryTree::leaf(a)
    }

    fn bits(n: usize, rows: &[usize]) -> BitSet {
        BitSet::from_indices(n, rows.iter().copied())
    }

    fn view(n: usize, columns: &[&[usize]]) -> BinarizedView {
        BinarizedView::from_columns(
            (0..columns.len()).map(|f| Predicate::IsSet { feature: f }).collect(),
            columns.iter().map(|c| bits(n, c)).collect(),
            n,
        )
    }

    /// Two groups: rows 0-2 are fixed by action 1, rows 3-4 by action 2;
    /// predicate 0 separates them.
    fn two_groups() -> (CacheMatrix, BinarizedView) {
        let cost = vec![
            vec![0, 1, 9],
            vec![0, 1, 9],
            vec![0, 1, 9],
            vec![0, 9, 2],
            vec![0, 9, 2],
        ];
        let loss = vec![
            vec![true, false, true],
            vec![true, false, true],
            vec![true, false, true],
            vec![true, true, false],
            vec![true, true, false],
        ];
        let cache = CacheMatrix::from_cells(10, cost, loss);
        (cache, view(5, &[&[3, 4], &[0, 3]]))
    }

    #[test]
    fn transition_partitions() {
        let v = view(5, &[&[3, 4], &[0, 1, 2, 3, 4]]);
        let s = State::root(5, 2);
        let fail = s.transition(&v, 0, Side::Fail);
        let pass = s.transition(&v, 0, Side::Pass);
        assert_eq!((fail.rows.count(), pass.rows.count()), (3, 2));
        assert!(fail.used.contains(0) && !fail.used.contains(1));
        let all = s.transition(&v, 1, Side::Pass);
        assert!(s.transition(&v, 1, Side::Fail).rows.is_empty());
        assert_eq!(all.rows.count(), 5);
    }

    #[test]
    fn depth_zero_is_the_leaf_front() {
        let (cache, v) = two_groups();
        let result = solve(&cache, &v, &SolverConfig::new(0, 0, 1)).unwrap();
        let leaf_front = best_leaf_solutions(&[0, 1, 2, 3, 4], &cache);
        assert_eq!(result.front.values(), leaf_front.values());
        assert_eq!(result.status, SolveStatus::Complete);
    }

    #[test]
    fn one_split_separates_the_groups() {
        let (cache, v) = two_groups();
        let result = solve(&cache, &v, &SolverConfig::new(1, 1, 1)).unwrap();
        let best = result.front.entries().last().unwrap();
        assert_eq!(best.0, CostLossPair::new(3 + 4, 0));
        assert_eq!(best.1, RecourseSummaryTree::branch(0, leaf(1), leaf(2)));
        assert_eq!(result.front.entries()[0], (CostLossPair::new(0, 5), leaf(0)));
    }

    #[test]
    fn null_only_action_set() {
        let cache = CacheMatrix::from_cells(10, vec![vec![0]; 6], vec![vec![true]; 6]);
        let v = view(6, &[&[0, 1], &[2, 3, 4]]);
        let result = solve(&cache, &v, &SolverConfig::new(2, 3, 1)).unwrap();
        assert_eq!(result.front.entries(), &[(CostLossPair::new(0, 6), leaf(0))]);
    }

    #[test]
    fn too_few_instances_is_infeasible() {
        let (cache, v) = two_groups();
        let err = solve(&cache, &v, &SolverConfig::new(1, 1, 6)).unwrap_err();
        assert!(err.is_infeasible());
    }

    #[test]
    fn min_leaf_blocks_small_splits() {
        let (cache, v) = two_groups();
        // predicate 0 leaves 2 rows on one side, predicate 1 leaves 2 too
        let result = solve(&cache, &v, &SolverConfig::new(1, 1, 3)).unwrap();
        assert!(result.front.iter().all(|(_, t)| t.depth() == 0));
    }

    #[test]
    fn witnesses_reproduce_their_values() {
        let (cache, v) = two_groups();
        let config = SolverConfig::new(2, 3, 1);
        let result = solve(&cache, &v, &config).unwrap();
        for (value, tree) in result.front.iter() {
            assert_eq!(tree_value(tree, &cache, &v), *value);
            assert!(tree_is_feasible(tree, &v, &config));
        }
    }

    #[test]
    fn config_limits() {
        assert!(SolverConfig::new(2, 4, 1).validate().is_err());
        assert!(SolverConfig::new(2, 3, 0).validate().is_err());
        assert!(SolverConfig::new(3, 7, 50).validate().is_ok());
    }

    #[test]
    fn budget_pairs() {
        // depth 2 children can use at most 1 node each
        assert_eq!(budget_splits(3, 2, 100, 100, 1), vec![(1, 1)]);
        assert_eq!(budget_splits(2, 2, 100, 100, 1), vec![(0, 1), (1, 0)]);
        assert_eq!(budget_splits(3, 3, 100, 100, 1), vec![(0, 2), (1, 1), (2, 0)]);
        // a child of 3 rows with min leaf 2 cannot split
        assert_eq!(budget_splits(3, 3, 3, 100, 2), vec![(0, 2)]);
    }

    #[test]
    fn lower_bound_sums_row_minima() {
        let (cache, _) = two_groups();
        let lb = LowerBound::new(&cache);
        assert_eq!(lb.lower_bound(&bits(5, &[0, 3])), CostLossPair::new(0, 0));
        let single = CacheMatrix::from_cells(10, vec![vec![4, 2]], vec![vec![false, true]]);
        assert_eq!(LowerBound::new(&single).lower_bound(&bits(1, &[0])), CostLossPair::new(2, 0));
    }

    #[test]
    fn front_builder_keeps_smallest_tree_on_ties() {
        let mut b = FrontBuilder::default();
        let v = CostLossPair::new(3, 1);
        b.offer_branch(v, 2, &leaf(0), &leaf(0));
        b.offer_branch(v, 1, &leaf(4), &leaf(0));
        b.offer(CostLossPair::new(5, 1), leaf(0));
        b.offer(CostLossPair::new(9, 0), leaf(7));
        let front = b.finish();
        assert_eq!(
            front.entries(),
            &[
                (v, RecourseSummaryTree::branch(1, leaf(4), leaf(0))),
                (CostLossPair::new(9, 0), leaf(7))
            ]
        );
    }
}
