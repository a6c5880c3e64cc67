//! Heuristic selections used as warm starts and comparison points.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};
use crate::transport::Selection;

/// Alternating assign/update sweeps stop after this many rounds.
pub const KMEDOIDS_MAX_SWEEPS: usize = 100;

fn check(n: usize, budget: usize, fixed_one: &[usize]) -> Result<Vec<usize>> {
    if budget == 0 || budget > n {
        return Err(Error::InvalidSelection(format!("budget {budget} outside 1..={n}")));
    }
    if fixed_one.is_empty() {
        return Ok(Vec::new());
    }
    let fixed = Selection::from_indices(n, fixed_one)?.indices().to_vec();
    if fixed.len() > budget {
        return Err(Error::InvalidSelection("more fixed indices than the budget".into()));
    }
    Ok(fixed)
}

/// Uniform sample without replacement over the non-fixed indices, plus `fixed_one`.
pub fn random_select(n: usize, budget: usize, fixed_one: &[usize], seed: u64) -> Result<Selection> {
    let mut chosen = check(n, budget, fixed_one)?;
    let pool: Vec<usize> = (0..n).filter(|i| chosen.binary_search(i).is_err()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = sample(&mut rng, pool.len(), budget - chosen.len());
    chosen.extend(picks.iter().map(|p| pool[p]));
    Selection::from_indices(n, &chosen)
}

/// Farthest-first traversal from `fixed_one`, or from a seeded random point when it is empty.
/// Ties go to the lowest index.
pub fn kcenters_select(dist: &DistanceMatrix, budget: usize, fixed_one: &[usize], seed: u64) -> Result<Selection> {
    let n = dist.n();
    let mut chosen = check(n, budget, fixed_one)?;
    if chosen.is_empty() {
        chosen.push(ChaCha8Rng::seed_from_u64(seed).gen_range(0..n));
    }
    let mut nearest = vec![f64::INFINITY; n];
    let mut selected = vec![false; n];
    for &c in &chosen {
        selected[c] = true;
        nearest.iter_mut().zip(dist.row(c)).for_each(|(m, &d)| *m = m.min(d));
    }
    while chosen.len() < budget {
        let mut far = None;
        for i in (0..n).filter(|&i| !selected[i]) {
            if far.is_none_or(|f: usize| nearest[i] > nearest[f]) {
                far = Some(i);
            }
        }
        let f = far.expect("budget does not exceed the pool");
        selected[f] = true;
        chosen.push(f);
        nearest.iter_mut().zip(dist.row(f)).for_each(|(m, &d)| *m = m.min(d));
    }
    Selection::from_indices(n, &chosen)
}

/// Sum of distances from every point to its nearest medoid.
pub fn kmedoids_objective(dist: &DistanceMatrix, medoids: &Selection) -> f64 {
    (0..dist.n()).map(|i| medoids.indices().iter().map(|&m| dist.get(i, m)).fold(f64::INFINITY, f64::min)).sum()
}

/// k-medoids by alternating assignment and medoid updates from a k-means++ style start.
pub fn kmedoids_select(dist: &DistanceMatrix, budget: usize, seed: u64) -> Result<Selection> {
    kmedoids_with_fixed(dist, budget, &[], seed).map(|(sel, _)| sel)
}

/// As [`kmedoids_select`], with the points of `fixed_one` kept as medoids throughout. Also returns
/// the objective after every sweep.
pub fn kmedoids_with_fixed(
    dist: &DistanceMatrix,
    budget: usize,
    fixed_one: &[usize],
    seed: u64,
) -> Result<(Selection, Vec<f64>)> {
    let n = dist.n();
    let fixed = check(n, budget, fixed_one)?;
    let mut medoids = seed_medoids(dist, budget, &fixed, seed);
    let mut is_fixed = vec![false; n];
    fixed.iter().for_each(|&i| is_fixed[i] = true);

    let mut history = Vec::new();
    for _ in 0..KMEDOIDS_MAX_SWEEPS {
        medoids.sort_unstable();
        let clusters = assign(dist, &medoids);
        history.push(clusters.iter().zip(&medoids).map(|(c, &m)| c.iter().map(|&i| dist.get(i, m)).sum::<f64>()).sum());
        let mut changed = false;
        for (slot, members) in clusters.iter().enumerate() {
            let current = medoids[slot];
            if is_fixed[current] {
                continue;
            }
            let cost = |cand: usize| members.iter().map(|&i| dist.get(cand, i)).sum::<f64>();
            let mut best = (cost(current), current);
            for &cand in members {
                let c = cost(cand);
                if c < best.0 || (c == best.0 && cand < best.1 && best.1 != current) {
                    best = (c, cand);
                }
            }
            if best.1 != current {
                medoids[slot] = best.1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let sel = Selection::from_indices(n, &medoids)?;
    history.push(kmedoids_objective(dist, &sel));
    Ok((sel, history))
}

/// Members of each medoid's cluster; medoids keep themselves, other ties go to the lowest medoid.
fn assign(dist: &DistanceMatrix, medoids: &[usize]) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); medoids.len()];
    for i in 0..dist.n() {
        let slot = match medoids.binary_search(&i) {
            Ok(own) => own,
            Err(_) => {
                let row = dist.row(i);
                let mut best = 0;
                for (s, &m) in medoids.iter().enumerate().skip(1) {
                    if row[m] < row[medoids[best]] {
                        best = s;
                    }
                }
                best
            }
        };
        clusters[slot].push(i);
    }
    clusters
}

/// Distance-squared weighted sampling; falls back to the lowest free index once every point
/// coincides with a medoid.
fn seed_medoids(dist: &DistanceMatrix, budget: usize, fixed: &[usize], seed: u64) -> Vec<usize> {
    let n = dist.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut medoids = fixed.to_vec();
    if medoids.is_empty() {
        medoids.push(rng.gen_range(0..n));
    }
    let mut nearest = vec![f64::INFINITY; n];
    let mut chosen = vec![false; n];
    for &m in &medoids {
        chosen[m] = true;
        nearest.iter_mut().zip(dist.row(m)).for_each(|(x, &d)| *x = x.min(d));
    }
    while medoids.len() < budget {
        let weights: Vec<f64> = (0..n).map(|i| if chosen[i] { 0.0 } else { nearest[i] * nearest[i] }).collect();
        let total: f64 = weights.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = None;
            for (i, &w) in weights.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.expect("positive total weight")
        } else {
            (0..n).find(|&i| !chosen[i]).expect("budget does not exceed the pool")
        };
        chosen[pick] = true;
        medoids.push(pick);
        nearest.iter_mut().zip(dist.row(pick)).for_each(|(x, &d)| *x = x.min(d));
    }
    medoids
}
