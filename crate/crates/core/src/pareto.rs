//! Bi-objective solution values and nondominated archives.
//!
//! Costs are carried as integer ticks: every percentile shift is a count
//! difference over the size of the dataset the CDFs were fitted on, so sums
//! of costs are exact and independent of summation order. Divide by that
//! size to get the real-valued cost.

use std::ops::Add;

use serde::{Deserialize, Serialize};

/// A solution value `(cost, loss)`; both objectives are minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct CostLossPair {
    /// Summed cost in ticks.
    pub cost: u64,
    /// Number of instances whose action fails.
    pub loss: u64,
}

impl CostLossPair {
    pub const ZERO: CostLossPair = CostLossPair { cost: 0, loss: 0 };

    pub const fn new(cost: u64, loss: u64) -> Self {
        CostLossPair { cost, loss }
    }

    /// Strict Pareto dominance: no worse in both objectives and not equal.
    pub fn dominates(&self, other: &CostLossPair) -> bool {
        self.cost <= other.cost && self.loss <= other.loss && self != other
    }

    /// True when `self` is no worse than `other` in both objectives.
    pub fn weakly_dominates(&self, other: &CostLossPair) -> bool {
        self.cost <= other.cost && self.loss <= other.loss
    }

    pub fn combine(self, other: CostLossPair) -> CostLossPair {
        CostLossPair {
            cost: self.cost + other.cost,
            loss: self.loss + other.loss,
        }
    }
}

impl Add for CostLossPair {
    type Output = CostLossPair;

    fn add(self, rhs: CostLossPair) -> CostLossPair {
        self.combine(rhs)
    }
}

pub fn dominates(v: &CostLossPair, w: &CostLossPair) -> bool {
    v.dominates(w)
}

pub fn combine(v: CostLossPair, w: CostLossPair) -> CostLossPair {
    v.combine(w)
}

/// A nondominated set of valued payloads, sorted by cost ascending (and so
/// by loss strictly descending). Among entries with equal values the one
/// with the smallest payload is kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParetoArchive<P> {
    entries: Vec<(CostLossPair, P)>,
}

impl<P> Default for ParetoArchive<P> {
    fn default() -> Self {
        ParetoArchive { entries: Vec::new() }
    }
}

impl<P> ParetoArchive<P> {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Wraps entries the caller guarantees are already a sorted staircase.
    pub(crate) fn from_sorted_unchecked(entries: Vec<(CostLossPair, P)>) -> Self {
        debug_assert!(entries
            .windows(2)
            .all(|w| w[0].0.cost < w[1].0.cost && w[0].0.loss > w[1].0.loss));
        ParetoArchive { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(CostLossPair, P)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(CostLossPair, P)> {
        self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &(CostLossPair, P)> {
        self.entries.iter()
    }

    pub fn values(&self) -> Vec<CostLossPair> {
        self.entries.iter().map(|(v, _)| *v).collect()
    }

    /// True when some entry weakly dominates `v`.
    pub fn covers(&self, v: &CostLossPair) -> bool {
        self.entries.iter().any(|(u, _)| u.weakly_dominates(v))
    }

    pub fn map<Q>(self, f: impl FnMut(P) -> Q) -> ParetoArchive<Q> {
        let mut f = f;
        ParetoArchive {
            entries: self.entries.into_iter().map(|(v, p)| (v, f(p))).collect(),
        }
    }
}

impl<P: Ord> ParetoArchive<P> {
    /// The nondominated subset of `values`.
    pub fn nondom(values: impl IntoIterator<Item = (CostLossPair, P)>) -> Self {
        let mut all: Vec<(CostLossPair, P)> = values.into_iter().collect();
        all.sort_by(|(va, pa), (vb, pb)| va.cmp(vb).then_with(|| pa.cmp(pb)));
        let mut entries = Vec::new();
        let mut best_loss = u64::MAX;
        for (v, p) in all {
            if v.loss < best_loss {
                best_loss = v.loss;
                entries.push((v, p));
            }
        }
        ParetoArchive { entries }
    }
}

/// Nondominated sums of one entry from each archive; payloads pair up.
pub fn merge<A: Ord + Clone, B: Ord + Clone>(
    left: &ParetoArchive<A>,
    right: &ParetoArchive<B>,
) -> ParetoArchive<(A, B)> {
    ParetoArchive::nondom(left.iter().flat_map(|(vl, pl)| {
        right
            .iter()
            .map(move |(vr, pr)| (*vl + *vr, (pl.clone(), pr.clone())))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(cost: u64, loss: u64) -> CostLossPair {
        CostLossPair::new(cost, loss)
    }

    fn archive(points: &[(u64, u64)]) -> ParetoArchive<usize> {
        ParetoArchive::nondom(points.iter().enumerate().map(|(i, &(c, l))| (v(c, l), i)))
    }

    #[test]
    fn dominance_examples() {
        // costs in tenths
        assert!(v(1, 2).dominates(&v(2, 3)));
        assert!(!v(1, 3).dominates(&v(2, 2)));
        assert!(!v(2, 2).dominates(&v(1, 3)));
        assert!(!v(1, 2).dominates(&v(1, 2)));
    }

    #[test]
    fn combine_examples() {
        assert_eq!(v(2, 1) + v(3, 4), v(5, 5));
        assert_eq!(v(7, 9) + CostLossPair::ZERO, v(7, 9));
        assert_eq!(v(2, 1) + v(3, 4), v(3, 4) + v(2, 1));
    }

    #[test]
    fn nondom_examples() {
        assert_eq!(archive(&[(1, 1), (2, 0), (3, 3)]).values(), vec![v(1, 1), v(2, 0)]);
        let same = archive(&[(4, 4), (4, 4), (4, 4)]);
        assert_eq!(same.len(), 1);
        // tie keeps the smallest payload
        assert_eq!(same.entries()[0].1, 0);
    }

    #[test]
    fn merge_examples() {
        assert_eq!(merge(&archive(&[(0, 3)]), &archive(&[(0, 2)])).values(), vec![v(0, 5)]);
        let m = merge(&archive(&[(0, 5), (2, 0)]), &archive(&[(0, 4), (1, 0)]));
        assert_eq!(m.values(), vec![v(0, 9), v(1, 5), v(2, 4), v(3, 0)]);
        assert!(merge(&archive(&[(1, 1)]), &ParetoArchive::<usize>::empty()).is_empty());
    }
}
