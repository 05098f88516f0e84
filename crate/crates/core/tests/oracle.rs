mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recourse_core::solver::{brute_force_solve, solve, tree_is_feasible, tree_value, SolverConfig};

#[test]
fn dynamic_program_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..300 {
        let rows = rng.gen_range(1..=60);
        let (predicates, actions) = (rng.gen_range(1..=6), rng.gen_range(1..=12));
        let (cache, view) = common::random_problem(&mut rng, rows, predicates, actions);
        let depth = rng.gen_range(0..=2);
        let nodes = rng.gen_range(0..=3usize.min((1 << depth) - 1));
        let min_leaf = if case % 3 == 0 { rng.gen_range(1..=rows.min(8)) } else { 1 };
        let config = SolverConfig::new(depth, nodes, min_leaf);

        let dp = solve(&cache, &view, &config).unwrap();
        let brute = brute_force_solve(&cache, &view, &config).unwrap();
        assert_eq!(dp.front.values(), brute.values(), "case {case}: {config:?}");
        for ((v, tree), (_, expected)) in dp.front.iter().zip(brute.iter()) {
            assert_eq!(tree_value(tree, &cache, &view), *v, "case {case}");
            assert!(tree_is_feasible(tree, &view, &config), "case {case}");
            assert_eq!(tree, expected, "case {case}: witness differs at {v:?}");
        }
    }
}

#[test]
fn pruning_does_not_change_the_front() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..100 {
        let rows = rng.gen_range(10..=80);
        let (predicates, actions) = (rng.gen_range(2..=8), rng.gen_range(1..=10));
        let (cache, view) = common::random_problem(&mut rng, rows, predicates, actions);
        let mut config = SolverConfig::new(3, rng.gen_range(0..=7), rng.gen_range(1..=4));
        let pruned = solve(&cache, &view, &config).unwrap();
        config.pruning = false;
        let plain = solve(&cache, &view, &config).unwrap();
        assert_eq!(pruned.front, plain.front, "case {case}");
    }
}
