//! Exact discrete Wasserstein distance between the uniform measure on the pool and the uniform
//! measure on a selection.
//!
//! Dual convention: the returned potentials maximize `(1/N) sum(mu) - (1/B) sum(lambda_j pi_j)`
//! subject to `mu_i - lambda_j <= D_ij`. Potentials of unselected points carry no weight in the
//! objective; they are always set to the tightest feasible value
//! `lambda_j = max_i (mu_i - D_ij)` (the c-transform of `mu`).

mod network_simplex;

use serde::{Deserialize, Serialize};

use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};
use network_simplex::Transportation;

/// Binary indicator over the pool with cardinality `budget`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Selection {
    n: usize,
    indices: Vec<usize>,
}

impl Selection {
    /// Builds a selection from distinct in-range indices (any order).
    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Self> {
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateIndex(w[0]));
            }
        }
        if let Some(&bad) = sorted.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, n });
        }
        if sorted.is_empty() {
            return Err(Error::InvalidSelection("selection must contain at least one point".into()));
        }
        Ok(Self { n, indices: sorted })
    }

    pub fn from_indicator(indicator: &[bool]) -> Result<Self> {
        let idx: Vec<usize> = indicator.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
        Self::from_indices(indicator.len(), &idx)
    }

    pub fn all(n: usize) -> Self {
        Self { n, indices: (0..n).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn budget(&self) -> usize {
        self.indices.len()
    }

    /// Selected indices in increasing order.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn indicator(&self) -> Vec<bool> {
        let mut out = vec![false; self.n];
        self.indices.iter().for_each(|&i| out[i] = true);
        out
    }

    /// Indicator as a 0/1 real vector.
    pub fn as_vector(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.indices.iter().for_each(|&i| out[i] = 1.0);
        out
    }

    /// Number of indices shared with `other`.
    pub fn overlap(&self, other: &Selection) -> usize {
        self.indices.iter().filter(|&&i| other.contains(i)).count()
    }
}

/// One positive entry of a transport plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub row: usize,
    pub col: usize,
    pub mass: f64,
}

/// Optimal primal plan and dual potentials of one transport solve.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution {
    pub value: f64,
    pub plan: Vec<PlanEntry>,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub pivots: usize,
}

impl TransportSolution {
    /// `(1/N) sum(mu) - (1/B) sum_{j selected} lambda_j`.
    pub fn dual_objective(&self, sel: &Selection) -> f64 {
        let n = self.mu.len() as f64;
        let b = sel.budget() as f64;
        self.mu.iter().sum::<f64>() / n - sel.indices().iter().map(|&j| self.lambda[j]).sum::<f64>() / b
    }
}

fn check_inputs(dist: &DistanceMatrix, sel: &Selection) -> Result<()> {
    if dist.n() != sel.n() {
        return Err(Error::DimensionMismatch { expected: dist.n(), got: sel.n() });
    }
    Ok(())
}

fn pivot_cap(rows: usize, cols: usize) -> usize {
    50 * (rows + cols)
}

/// Exact W(C(pi), D) over the full `N x N` transport network; unselected columns carry zero demand.
pub fn wasserstein(dist: &DistanceMatrix, sel: &Selection) -> Result<TransportSolution> {
    check_inputs(dist, sel)?;
    let n = dist.n();
    let cols: Vec<usize> = (0..n).collect();
    let demand: Vec<i64> = (0..n).map(|j| if sel.contains(j) { n as i64 } else { 0 }).collect();
    solve_with_columns(dist, sel, &cols, &demand)
}

/// Same optimum as [`wasserstein`] from the `N x B` network restricted to selected columns;
/// duals of unselected points are completed by the c-transform.
pub fn wasserstein_reduced(dist: &DistanceMatrix, sel: &Selection) -> Result<TransportSolution> {
    check_inputs(dist, sel)?;
    let n = dist.n();
    let cols = sel.indices().to_vec();
    let demand = vec![n as i64; cols.len()];
    solve_with_columns(dist, sel, &cols, &demand)
}

fn solve_with_columns(
    dist: &DistanceMatrix,
    sel: &Selection,
    cols: &[usize],
    demand: &[i64],
) -> Result<TransportSolution> {
    let n = dist.n();
    let budget = sel.budget();
    // Masses scaled by N*B: supply B per row, demand N per selected column.
    let problem = Transportation::new(dist, cols, budget as i64, demand);
    let basic = problem.solve(pivot_cap(n, cols.len()))?;

    let scale = (n * budget) as f64;
    let mut value = 0.0;
    let mut plan = Vec::with_capacity(basic.flows.len());
    for &(i, j, f) in &basic.flows {
        let col = cols[j];
        value += f as f64 * dist.get(i, col);
        plan.push(PlanEntry { row: i, col, mass: f as f64 / scale });
    }
    value /= scale;
    plan.sort_unstable_by_key(|e| (e.row, e.col));

    let mu = basic.row_potential;
    let mut lambda = vec![f64::NAN; n];
    for (j, &col) in cols.iter().enumerate() {
        if demand[j] > 0 {
            lambda[col] = -basic.col_potential[j];
        }
    }
    for (j, slot) in lambda.iter_mut().enumerate() {
        if slot.is_nan() {
            *slot = c_transform(dist, &mu, j);
        }
    }

    Ok(TransportSolution { value, plan, lambda, mu, pivots: basic.pivots })
}

/// Tightest feasible potential for column `j`: `max_i (mu_i - D_ij)`.
pub fn c_transform(dist: &DistanceMatrix, mu: &[f64], j: usize) -> f64 {
    mu.iter().enumerate().map(|(i, &m)| m - dist.get(i, j)).fold(f64::NEG_INFINITY, f64::max)
}
