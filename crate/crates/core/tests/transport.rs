mod common;

use common::{ot_all_trees, ot_vertex_oracle, random_measure, random_uniform_measure, rng};
use cytolot::measures::squared_cost_matrix;
use cytolot::{map_induced_plan, solve_ot, wasserstein2, DiscreteMeasure};
use ndarray::array;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

#[test]
fn oracle_agrees_on_known_values() {
    let a = DiscreteMeasure::uniform("a", array![[0.0], [1.0]]).unwrap();
    let b = DiscreteMeasure::uniform("b", array![[1.0], [2.0]]).unwrap();
    let c = squared_cost_matrix(a.support(), b.support());
    let oracle = ot_vertex_oracle(
        a.weights().as_slice().unwrap(),
        b.weights().as_slice().unwrap(),
        &c,
    );
    assert!((oracle - 1.0).abs() < 1e-12);
}

#[test]
fn tree_oracle_matches_full_tree_enumeration() {
    let mut r = rng(3);
    for _ in 0..40 {
        let (n, m) = (r.random_range(1..=4), r.random_range(1..=5));
        let a = random_measure(&mut r, "a", n, 2, 2.0);
        let b = random_measure(&mut r, "b", m, 2, 2.0);
        let c = squared_cost_matrix(a.support(), b.support());
        let (wa, wb) = (a.weights().to_vec(), b.weights().to_vec());
        let full = ot_all_trees(&wa, &wb, &c);
        let walk = ot_vertex_oracle(&wa, &wb, &c);
        assert!((full - walk).abs() < 1e-12, "{full} vs {walk}");
    }
}

#[test]
fn six_by_six_matches_oracle() {
    let mut r = rng(11);
    for _ in 0..5 {
        let a = random_measure(&mut r, "a", 6, 3, 2.0);
        let b = random_measure(&mut r, "b", 6, 3, 2.0);
        let c = squared_cost_matrix(a.support(), b.support());
        let oracle = ot_vertex_oracle(
            a.weights().as_slice().unwrap(),
            b.weights().as_slice().unwrap(),
            &c,
        );
        let plan = solve_ot(&a, &b).unwrap();
        assert!(
            (plan.cost - oracle).abs() < 1e-8,
            "{} vs {}",
            plan.cost,
            oracle
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cost_matches_vertex_enumeration(seed in any::<u64>(), n in 1usize..=6, m in 1usize..=6, d in 1usize..=3) {
        let mut r = rng(seed);
        let a = random_measure(&mut r, "a", n, d, 3.0);
        let b = random_measure(&mut r, "b", m, d, 3.0);
        let c = squared_cost_matrix(a.support(), b.support());
        let oracle = ot_vertex_oracle(a.weights().as_slice().unwrap(), b.weights().as_slice().unwrap(), &c);
        let plan = solve_ot(&a, &b).unwrap();
        prop_assert!((plan.cost - oracle).abs() < 1e-8);
        prop_assert!(plan.marginal_error(&a, &b) < 1e-9);
        prop_assert!(plan.matrix.iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn metric_axioms(seed in any::<u64>(), n in 1usize..=5, d in 1usize..=3) {
        let mut r = rng(seed);
        let x = random_measure(&mut r, "x", n, d, 2.0);
        let (ny, nz) = (r.random_range(1..=5), r.random_range(1..=5));
        let y = random_measure(&mut r, "y", ny, d, 2.0);
        let z = random_measure(&mut r, "z", nz, d, 2.0);
        let xy = wasserstein2(&x, &y).unwrap();
        let yx = wasserstein2(&y, &x).unwrap();
        let xz = wasserstein2(&x, &z).unwrap();
        let zy = wasserstein2(&z, &y).unwrap();
        prop_assert!(xy >= 0.0);
        prop_assert!((xy - yx).abs() < 1e-8);
        prop_assert!(xy <= xz + zy + 1e-8);
        prop_assert!(wasserstein2(&x, &x).unwrap() < 1e-8);
    }

    #[test]
    fn permuted_atoms_are_the_same_measure(seed in any::<u64>(), n in 1usize..=6) {
        let mut r = rng(seed);
        let x = random_measure(&mut r, "x", n, 2, 2.0);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut r);
        let support = x.support().select(ndarray::Axis(0), &order);
        let weights = x.weights().select(ndarray::Axis(0), &order);
        let y = DiscreteMeasure::new("y", support, weights).unwrap();
        prop_assert!(solve_ot(&x, &y).unwrap().cost < 1e-14);
    }

    #[test]
    fn distinct_measures_are_apart(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let x = random_measure(&mut r, "x", n, 2, 2.0);
        let shifted = x.translated(&[1e-3, 0.0]).unwrap();
        prop_assert!(wasserstein2(&x, &shifted).unwrap() > 0.0);
    }

    #[test]
    fn uniform_equal_size_plans_are_permutations(seed in any::<u64>(), n in 1usize..=7, d in 1usize..=3) {
        let mut r = rng(seed);
        let x = random_uniform_measure(&mut r, "x", n, d, 2.0);
        let y = random_uniform_measure(&mut r, "y", n, d, 2.0);
        let plan = solve_ot(&x, &y).unwrap();
        for row in plan.matrix.rows() {
            let nonzero: Vec<f64> = row.iter().copied().filter(|&p| p > 1e-12).collect();
            prop_assert_eq!(nonzero.len(), 1);
            prop_assert!((nonzero[0] - 1.0 / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn map_induced_plans_never_beat_the_optimum(seed in any::<u64>(), n in 1usize..=6) {
        let mut r = rng(seed);
        let x = random_uniform_measure(&mut r, "x", n, 2, 2.0);
        let y = random_uniform_measure(&mut r, "y", n, 2, 2.0);
        let mut assignment: Vec<usize> = (0..n).collect();
        assignment.shuffle(&mut r);
        let induced = map_induced_plan(&x, &assignment, &y).unwrap();
        prop_assert!(induced.cost >= solve_ot(&x, &y).unwrap().cost - 1e-12);
    }

    #[test]
    fn translation_adds_mean_terms(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let x = random_measure(&mut r, "x", n, 2, 2.0);
        let ny = r.random_range(1..=5);
        let y = random_measure(&mut r, "y", ny, 2, 2.0);
        let t = [r.random_range(-3.0..3.0), r.random_range(-3.0..3.0)];
        let base = solve_ot(&x, &y).unwrap().cost;
        let moved = solve_ot(&x.translated(&t).unwrap(), &y.translated(&t).unwrap()).unwrap().cost;
        prop_assert!((base - moved).abs() < 1e-8);
    }
}
