//! Feature matrices and the base-metric cost matrix built from them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries below this are snapped to exactly zero.
pub const ZERO_CLAMP: f64 = 1e-12;

const SYMMETRY_TOL: f64 = 1e-9;

/// Dense row-major `n_points x dim` matrix of embedding vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_points: usize,
    dim: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(n_points: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::Shape(format!("need at least 2 points, got {n_points}")));
        }
        if dim == 0 {
            return Err(Error::Shape("feature dimension must be at least 1".into()));
        }
        if values.len() != n_points * dim {
            return Err(Error::Shape(format!(
                "expected {} values for {n_points}x{dim}, got {}",
                n_points * dim,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput { row: pos / dim, col: pos % dim });
        }
        Ok(Self { n_points, dim, values })
    }

    /// Builds a matrix from a list of equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::Shape(format!("row {i} has {} columns, expected {dim}", r.len())));
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), dim, values)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    /// Euclidean distance between L2-normalized rows (chord length on the unit sphere).
    Cosine,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "cosine" => Ok(Metric::Cosine),
            other => Err(Error::Config(format!("unknown metric '{other}'"))),
        }
    }
}

/// Symmetric, zero-diagonal, non-negative `n x n` cost matrix. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
    metric: Metric,
    max_entry: f64,
}

impl DistanceMatrix {
    /// Validates and wraps a row-major `n x n` matrix. Near-zero entries are clamped to zero and the
    /// matrix is symmetrized exactly (asymmetry beyond `1e-9` is rejected).
    pub fn from_entries(n: usize, mut entries: Vec<f64>, metric: Metric) -> Result<Self> {
        if n == 0 {
            return Err(Error::Shape("distance matrix must be non-empty".into()));
        }
        if entries.len() != n * n {
            return Err(Error::Shape(format!("expected {} entries for {n}x{n}, got {}", n * n, entries.len())));
        }
        for i in 0..n {
            for j in 0..n {
                let v = entries[i * n + j];
                if !v.is_finite() {
                    return Err(Error::NonFiniteInput { row: i, col: j });
                }
                if v < 0.0 {
                    return Err(Error::InvalidDistance(format!("negative entry at ({i}, {j})")));
                }
            }
            if entries[i * n + i] > ZERO_CLAMP {
                return Err(Error::InvalidDistance(format!("non-zero diagonal at {i}")));
            }
        }
        for i in 0..n {
            entries[i * n + i] = 0.0;
            for j in (i + 1)..n {
                let (a, b) = (entries[i * n + j], entries[j * n + i]);
                if (a - b).abs() > SYMMETRY_TOL * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::InvalidDistance(format!("asymmetric at ({i}, {j})")));
                }
                if metric == Metric::Cosine && a > 2.0 + SYMMETRY_TOL {
                    return Err(Error::InvalidDistance(format!("cosine entry exceeds 2 at ({i}, {j})")));
                }
                let v = clamp_entry(a, metric);
                entries[i * n + j] = v;
                entries[j * n + i] = v;
            }
        }
        let max_entry = entries.iter().copied().fold(0.0, f64::max);
        Ok(Self { n, entries, metric, max_entry })
    }

    /// Distances between points on a line, mostly useful for small worked instances.
    pub fn from_line(points: &[f64]) -> Result<Self> {
        let rows: Vec<[f64; 1]> = points.iter().map(|&p| [p]).collect();
        compute_distance_matrix(&FeatureMatrix::from_rows(&rows)?, Metric::Euclidean)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn max_entry(&self) -> f64 {
        self.max_entry
    }

    /// Largest entry in row `i`.
    pub fn row_max(&self, i: usize) -> f64 {
        self.row(i).iter().copied().fold(0.0, f64::max)
    }

    /// Smallest strictly positive entry in row `i`, if any.
    pub fn row_min_positive(&self, i: usize) -> Option<f64> {
        self.row(i).iter().copied().filter(|&v| v > 0.0).min_by(f64::total_cmp)
    }
}

fn clamp_entry(v: f64, metric: Metric) -> f64 {
    let v = if v < ZERO_CLAMP { 0.0 } else { v };
    match metric {
        Metric::Cosine => v.min(2.0),
        Metric::Euclidean => v,
    }
}

/// Pairwise base-metric distances between the rows of `features`.
pub fn compute_distance_matrix(features: &FeatureMatrix, metric: Metric) -> Result<DistanceMatrix> {
    let n = features.n_points();
    let dim = features.dim();
    if let Some(pos) = features.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput { row: pos / dim, col: pos % dim });
    }

    let normalized;
    let points: &[f64] = match metric {
        Metric::Euclidean => features.values(),
        Metric::Cosine => {
            let mut out = features.values().to_vec();
            for (i, row) in out.chunks_mut(dim).enumerate() {
                let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm == 0.0 {
                    return Err(Error::ZeroVectorUnderCosine { row: i });
                }
                row.iter_mut().for_each(|v| *v /= norm);
            }
            normalized = out;
            &normalized
        }
    };

    let mut entries = vec![0.0; n * n];
    entries.par_chunks_mut(n).enumerate().for_each(|(i, out)| {
        let xi = &points[i * dim..(i + 1) * dim];
        for (j, slot) in out.iter_mut().enumerate() {
            if i == j {
                continue;
            }
            // Evaluate each unordered pair in a fixed orientation so the result is exactly symmetric.
            let (a, b) =
                if i < j { (xi, &points[j * dim..(j + 1) * dim]) } else { (&points[j * dim..(j + 1) * dim], xi) };
            let d = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
            *slot = clamp_entry(d, metric);
        }
    });

    let max_entry = entries.iter().copied().fold(0.0, f64::max);
    Ok(DistanceMatrix { n, entries, metric, max_entry })
}
