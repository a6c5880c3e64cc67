//! Exhaustive search over all selections of a small pool.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};
use crate::transport::{wasserstein, Selection};

/// Largest number of subsets the oracle agrees to evaluate.
pub const MAX_SUBSETS: u128 = 1_000_000;

/// Values closer than this (relative) count as ties; ties go to the lexicographically smallest
/// selection.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub w_star: f64,
    pub sel_star: Selection,
    /// Every evaluated selection (sorted indices) and its value, when requested.
    pub all_values: Option<BTreeMap<Vec<usize>, f64>>,
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// All `k`-subsets of `items` in lexicographic order.
fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > items.len() {
        return out;
    }
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let Some(pos) = (0..k).rev().find(|&p| idx[p] != p + items.len() - k) else { break };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
    out
}

/// Minimum `W(C(pi), D)` over every selection of size `budget` containing `fixed_one`.
pub fn brute_force_optimum(
    dist: &DistanceMatrix,
    budget: usize,
    fixed_one: &[usize],
    keep_values: bool,
) -> Result<OracleResult> {
    let n = dist.n();
    if budget == 0 || budget > n {
        return Err(Error::InvalidSelection(format!("budget {budget} outside 1..={n}")));
    }
    let fixed =
        if fixed_one.is_empty() { Vec::new() } else { Selection::from_indices(n, fixed_one)?.indices().to_vec() };
    if fixed.len() > budget {
        return Err(Error::InvalidSelection("more fixed indices than the budget".into()));
    }
    let free: Vec<usize> = (0..n).filter(|i| fixed.binary_search(i).is_err()).collect();
    let k = budget - fixed.len();
    let count = binomial(free.len(), k);
    if count > MAX_SUBSETS {
        return Err(Error::TooLarge { count, limit: MAX_SUBSETS });
    }

    let mut subsets: Vec<Vec<usize>> = combinations(&free, k)
        .into_iter()
        .map(|mut s| {
            s.extend_from_slice(&fixed);
            s.sort_unstable();
            s
        })
        .collect();
    subsets.sort_unstable();

    let values: Vec<f64> = subsets
        .par_iter()
        .map(|s| wasserstein(dist, &Selection::from_indices(n, s)?).map(|sol| sol.value))
        .collect::<Result<_>>()?;

    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = TIE_TOL * best.abs().max(1.0);
    let pos = values.iter().position(|&v| v <= best + tol).expect("at least one subset");
    let sel_star = Selection::from_indices(n, &subsets[pos])?;
    let all_values = keep_values.then(|| subsets.into_iter().zip(values).collect());
    Ok(OracleResult { w_star: best, sel_star, all_values })
}
