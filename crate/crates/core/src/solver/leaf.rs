//! Fast leaf evaluation: column sums over a deduplicated, packed copy of the
//! cache.

use std::collections::HashMap;
use std::hash::{DefaultHasher, Hash, Hasher};

use rayon::prelude::*;

use crate::bitset::BitSet;
use crate::cache::CacheMatrix;
use crate::error::{Error, Result};
use crate::pareto::{CostLossPair, ParetoArchive};

const CHUNK: usize = 512;
const LOSS_BITS: u32 = 32;
const LOSS_MASK: u64 = (1 << LOSS_BITS) - 1;

/// Cache cells packed as `cost << 32 | loss`, so one add sums both
/// objectives. Actions whose whole column matches an earlier action are
/// dropped; they can never win a tie against it.
pub(crate) struct LeafEvaluator {
    representatives: Vec<usize>,
    cells: Vec<u64>,
}

impl LeafEvaluator {
    pub fn new(cache: &CacheMatrix) -> Result<Self> {
        let rows = cache.rows();
        let worst = rows as u128 * cache.scale() as u128;
        if worst >= 1u128 << (64 - LOSS_BITS) || rows as u64 > LOSS_MASK {
            return Err(Error::Config(format!(
                "{rows} affected instances with a CDF population of {} overflow packed leaf sums",
                cache.scale()
            )));
        }
        let column = |a: usize| (0..rows).map(move |i| cache.cell(i, a));
        let mut seen: HashMap<u64, Vec<usize>> = HashMap::new();
        let mut representatives = Vec::new();
        for a in 0..cache.actions() {
            let mut h = DefaultHasher::new();
            for v in column(a) {
                v.hash(&mut h);
            }
            let bucket = seen.entry(h.finish()).or_default();
            if bucket.iter().any(|&b| column(b).eq(column(a))) {
                continue;
            }
            bucket.push(a);
            representatives.push(a);
        }
        let width = representatives.len();
        let mut cells = Vec::with_capacity(rows * width);
        for i in 0..rows {
            let row = cache.cost_row(i);
            cells.extend(
                representatives
                    .iter()
                    .map(|&a| (row[a] as u64) << LOSS_BITS | cache.loss(i, a) as u64),
            );
        }
        Ok(LeafEvaluator { representatives, cells })
    }

    pub fn width(&self) -> usize {
        self.representatives.len()
    }

    /// Packed column sums over `rows`.
    pub fn sums(&self, rows: &BitSet) -> Vec<u64> {
        let width = self.width();
        let members = rows.to_vec();
        let mut out = vec![0u64; width];
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(k, chunk)| {
            let start = k * CHUNK;
            for &i in &members {
                let row = &self.cells[i * width + start..i * width + start + chunk.len()];
                for (o, c) in chunk.iter_mut().zip(row) {
                    *o += c;
                }
            }
        });
        out
    }

    /// Sums over `rows`, using the parent's sums when `rows` is the larger
    /// part of `parent`.
    pub fn child_sums(&self, rows: &BitSet, parent: &BitSet, parent_sums: impl FnOnce() -> Vec<u64>) -> Vec<u64> {
        let size = rows.count();
        if 2 * size <= parent.count() {
            return self.sums(rows);
        }
        let mut out = parent_sums();
        let rest = self.sums(&parent.difference(rows));
        out.par_iter_mut().zip(rest.par_iter()).for_each(|(o, r)| *o -= r);
        out
    }

    /// The nondominated leaf values from packed sums over a subset of
    /// `size` rows, each with its smallest action index.
    pub fn front(&self, sums: &[u64], size: usize) -> ParetoArchive<usize> {
        let mut best: Vec<Option<(u64, usize)>> = vec![None; size + 1];
        for (c, &s) in sums.iter().enumerate() {
            let (cost, loss) = (s >> LOSS_BITS, (s & LOSS_MASK) as usize);
            // representatives ascend, so the first strict minimum is the smallest index
            if best[loss].is_none_or(|(bc, _)| cost < bc) {
                best[loss] = Some((cost, c));
            }
        }
        let mut staircase = Vec::new();
        let mut min_cost = u64::MAX;
        for (loss, slot) in best.into_iter().enumerate() {
            if let Some((cost, c)) = slot {
                if cost < min_cost {
                    min_cost = cost;
                    staircase.push((CostLossPair::new(cost, loss as u64), self.representatives[c]));
                }
            }
        }
        staircase.reverse();
        ParetoArchive::from_sorted_unchecked(staircase)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::best_leaf_solutions;

    #[test]
    fn matches_direct_evaluation() {
        let cache = CacheMatrix::from_cells(
            10,
            vec![vec![0, 3, 3, 1, 2], vec![0, 1, 1, 5, 2], vec![0, 2, 2, 0, 2]],
            vec![
                vec![true, false, false, true, false],
                vec![true, true, true, false, false],
                vec![true, false, false, true, true],
            ],
        );
        let eval = LeafEvaluator::new(&cache).unwrap();
        // action 2 duplicates action 1
        assert_eq!(eval.width(), 4);
        for subset in [vec![0], vec![1, 2], vec![0, 1, 2], vec![0, 2]] {
            let rows = BitSet::from_indices(3, subset.iter().copied());
            let fast = eval.front(&eval.sums(&rows), subset.len());
            assert_eq!(fast, best_leaf_solutions(&subset, &cache), "{subset:?}");
        }
    }

    #[test]
    fn subtraction_matches_direct_sums() {
        let cache = CacheMatrix::from_cells(
            4,
            (0..5).map(|i| vec![i, 4 - i, 2]).collect(),
            (0..5).map(|i| vec![i % 2 == 0, i % 3 == 0, true]).collect(),
        );
        let eval = LeafEvaluator::new(&cache).unwrap();
        let parent = BitSet::from_indices(5, [0, 1, 3, 4]);
        let big = BitSet::from_indices(5, [0, 1, 4]);
        let derived = eval.child_sums(&big, &parent, || eval.sums(&parent));
        assert_eq!(derived, eval.sums(&big));
    }
}
