mod common;

use proptest::prelude::*;
use qdcart::{
    fit_dcart, fit_qdcart, grid_1d, sql, DyadicSolver, LatticeShape, QuantileLevel, SolverConfig, SortedSegment,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

fn tau(t: f64) -> QuantileLevel {
    QuantileLevel::new(t).unwrap()
}

fn shape_strategy() -> impl Strategy<Value = LatticeShape> {
    prop_oneof![
        (1usize..=16).prop_map(|n| LatticeShape::line(n).unwrap()),
        (1usize..=4, 1usize..=4).prop_map(|(a, b)| LatticeShape::new(vec![a, b]).unwrap()),
        (1usize..=2, 1usize..=2, 1usize..=3).prop_map(|(a, b, c)| LatticeShape::new(vec![a, b, c]).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dp_matches_enumeration(
        shape in shape_strategy(),
        seed in any::<u64>(),
        t in prop::sample::select(vec![0.1, 0.3, 0.5, 0.9]),
        lambda in prop::sample::select(vec![0.1, 0.7, 1.0, 10.0]),
        gamma in 1usize..=4,
    ) {
        prop_assume!(gamma <= shape.len());
        let y = mixed_values(&mut ChaCha8Rng::seed_from_u64(seed), shape.len());
        let fit = fit_qdcart(&shape, &y, &SolverConfig::qdcart(t, lambda, gamma).unwrap()).unwrap();
        let all = all_rdps(&shape, &y, tau(t), lambda, gamma);
        let best = all.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(fit.objective, best);
        prop_assert_eq!(tree_value(&shape, &y, tau(t), lambda, fit.partition.tree()), best);
        prop_assert!(fit.partition.tree().is_dyadic());
        let recomputed = fit.recompute_objective(&y);
        prop_assert!((recomputed - best).abs() <= 1e-9 * best.abs().max(1.0));
    }
}

#[test]
fn objective_is_nondecreasing_and_concave_in_lambda() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for dims in [vec![50], vec![128], vec![9, 11], vec![16, 16]] {
        let shape = LatticeShape::new(dims).unwrap();
        let y = mixed_values(&mut rng, shape.len());
        let solver = DyadicSolver::qdcart(&shape, &y, tau(0.3), 2).unwrap();
        let grid = grid_1d();
        let values: Vec<f64> = grid
            .values()
            .iter()
            .map(|&l| solver.fit(l).unwrap().objective)
            .collect();
        let lambdas = grid.values();
        for w in values.windows(2) {
            assert!(w[1] >= w[0]);
        }
        for k in 1..values.len() - 1 {
            let (a, b, c) = (lambdas[k - 1], lambdas[k], lambdas[k + 1]);
            let chord = values[k - 1] + (values[k + 1] - values[k - 1]) * (b - a) / (c - a);
            assert!(values[k] >= chord - 1e-9 * chord.abs(), "concavity fails at lambda {b}");
        }
    }
}

#[test]
fn penalty_at_root_loss_saturates() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for dims in [vec![33], vec![64], vec![5, 7], vec![8, 8], vec![2, 4, 4]] {
        let shape = LatticeShape::new(dims).unwrap();
        for t in [0.1, 0.5, 0.9] {
            let y = mixed_values(&mut rng, shape.len());
            let root = sql(tau(t), &SortedSegment::from_unsorted(y.clone()).unwrap()).sql;
            for gamma in [1, 2, 5] {
                let solver = DyadicSolver::qdcart(&shape, &y, tau(t), gamma).unwrap();
                for lambda in [root, 1.5 * root, 10.0 * root] {
                    let fit = solver.fit(lambda).unwrap();
                    assert_eq!(fit.leaf_count(), 1, "{shape}, tau {t}, lambda {lambda}");
                    assert_eq!(fit.objective, root + lambda);
                }
            }
        }
    }
}

#[test]
fn permuting_inside_a_leaf_keeps_its_loss() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let shape = LatticeShape::new(vec![12, 10]).unwrap();
    let y = mixed_values(&mut rng, shape.len());
    let fit = fit_qdcart(&shape, &y, &SolverConfig::qdcart(0.7, 0.5, 3).unwrap()).unwrap();
    for leaf in fit.partition.leaves() {
        let cells: Vec<usize> = leaf.cells(&shape).collect();
        let mut shuffled = y.clone();
        let mut values: Vec<f64> = cells.iter().map(|&c| y[c]).collect();
        values.shuffle(&mut rng);
        for (&c, &v) in cells.iter().zip(&values) {
            shuffled[c] = v;
        }
        assert_eq!(
            leaf_sql(&shape, &y, tau(0.7), leaf),
            leaf_sql(&shape, &shuffled, tau(0.7), leaf)
        );
    }
}

#[test]
fn dcart_leaves_hold_means() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let shape = LatticeShape::new(vec![16, 8]).unwrap();
    let y: Vec<f64> = (0..shape.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
    let fit = fit_dcart(&shape, &y, &SolverConfig::dcart(0.5, 2).unwrap()).unwrap();
    fit.partition.check(&shape, 2).unwrap();
    for leaf in fit.partition.leaves() {
        let cells: Vec<usize> = leaf.cells(&shape).collect();
        let mean = cells.iter().map(|&c| y[c]).sum::<f64>() / cells.len() as f64;
        for &c in &cells {
            assert!((fit.theta_hat[c] - mean).abs() < 1e-12);
        }
    }
    let recomputed = fit.recompute_objective(&y);
    assert!((recomputed - fit.objective).abs() <= 1e-9 * fit.objective);
}

#[test]
fn worked_example_end_to_end() {
    let shape = LatticeShape::line(4).unwrap();
    let y = [0.0, 0.0, 10.0, 10.0];
    let fit = fit_qdcart(&shape, &y, &SolverConfig::qdcart(0.5, 1.0, 1).unwrap()).unwrap();
    assert_eq!(fit.theta_hat, y.to_vec());
    assert_eq!(fit.objective, 2.0);
    assert_eq!(fit.leaf_count(), 2);
}
