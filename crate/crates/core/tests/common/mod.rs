#![allow(dead_code)]

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use wass_coreset::{compute_distance_matrix, DistanceMatrix, FeatureMatrix, Metric, Selection, TransportSolution};

pub fn gaussian_features(seed: u64, n: usize, dim: usize) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n * dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    FeatureMatrix::new(n, dim, values).unwrap()
}

pub fn gaussian_instance(seed: u64, n: usize, dim: usize) -> DistanceMatrix {
    compute_distance_matrix(&gaussian_features(seed, n, dim), Metric::Euclidean).unwrap()
}

pub fn random_selection(rng: &mut impl Rng, n: usize, budget: usize) -> Selection {
    let idx = rand::seq::index::sample(rng, n, budget).into_vec();
    Selection::from_indices(n, &idx).unwrap()
}

/// Transport value from a generic dense LP over all N*N plan entries.
#[allow(clippy::needless_range_loop)]
pub fn lp_wasserstein(dist: &DistanceMatrix, sel: &Selection) -> f64 {
    let n = dist.n();
    let b = sel.budget() as f64;
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<Vec<_>> =
        (0..n).map(|i| (0..n).map(|j| lp.add_var(dist.get(i, j), (0.0, f64::INFINITY))).collect()).collect();
    for i in 0..n {
        let row: Vec<_> = (0..n).map(|j| (vars[i][j], 1.0)).collect();
        lp.add_constraint(&row[..], ComparisonOp::Eq, 1.0 / n as f64);
    }
    for j in 0..n {
        let col: Vec<_> = (0..n).map(|i| (vars[i][j], 1.0)).collect();
        let rhs = if sel.contains(j) { 1.0 / b } else { 0.0 };
        lp.add_constraint(&col[..], ComparisonOp::Eq, rhs);
    }
    lp.solve().unwrap().objective()
}

/// Asserts primal feasibility, dual feasibility, zero gap, complementary slackness and basis size.
pub fn assert_transport_invariants(dist: &DistanceMatrix, sel: &Selection, sol: &TransportSolution) {
    let n = dist.n();
    let b = sel.budget();
    let mut row_sums = vec![0.0; n];
    let mut col_sums = vec![0.0; n];
    for e in &sol.plan {
        assert!(e.mass > 0.0);
        row_sums[e.row] += e.mass;
        col_sums[e.col] += e.mass;
        let slack = dist.get(e.row, e.col) - (sol.mu[e.row] - sol.lambda[e.col]);
        assert!(slack.abs() <= 1e-7, "complementary slackness violated by {slack}");
    }
    for i in 0..n {
        assert!((row_sums[i] - 1.0 / n as f64).abs() <= 1e-9);
        let target = if sel.contains(i) { 1.0 / b as f64 } else { 0.0 };
        assert!((col_sums[i] - target).abs() <= 1e-9);
    }
    for i in 0..n {
        for j in 0..n {
            assert!(sol.mu[i] - sol.lambda[j] <= dist.get(i, j) + 1e-9, "dual infeasible at ({i}, {j})");
        }
    }
    assert!((sol.value - sol.dual_objective(sel)).abs() <= 1e-7);
    assert!(sol.plan.len() < n + b);
}
