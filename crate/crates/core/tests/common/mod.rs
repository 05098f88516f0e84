#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use recourse_core::binarize::{BinarizedView, Predicate};
use recourse_core::bitset::BitSet;
use recourse_core::cache::CacheMatrix;

/// A random cache and predicate view. Action 0 is the null action (free,
/// always fails). Costs are small integers so that ties are common, and
/// some predicate columns repeat or mirror earlier ones.
pub fn random_problem(rng: &mut ChaCha8Rng, rows: usize, predicates: usize, actions: usize) -> (CacheMatrix, BinarizedView) {
    let mut cost = Vec::with_capacity(rows);
    let mut loss = Vec::with_capacity(rows);
    for _ in 0..rows {
        let mut c = vec![0u32];
        let mut l = vec![true];
        for _ in 1..actions {
            c.push(rng.gen_range(0..6));
            l.push(rng.gen_bool(0.4));
        }
        cost.push(c);
        loss.push(l);
    }
    let cache = CacheMatrix::from_cells(10, cost, loss);

    let mut columns: Vec<BitSet> = Vec::with_capacity(predicates);
    for p in 0..predicates {
        let column = match rng.gen_range(0..10) {
            0 if p > 0 => columns[rng.gen_range(0..p)].clone(),
            1 if p > 0 => BitSet::full(rows).difference(&columns[rng.gen_range(0..p)]),
            2 => BitSet::full(rows),
            _ => {
                let density = rng.gen_range(0.1..0.9);
                BitSet::from_indices(rows, (0..rows).filter(|_| rng.gen_bool(density)))
            }
        };
        columns.push(column);
    }
    let view = BinarizedView::from_columns(
        (0..predicates).map(|f| Predicate::IsSet { feature: f }).collect(),
        columns,
        rows,
    );
    (cache, view)
}
