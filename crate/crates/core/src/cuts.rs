//! Linear constraints over `(eta, pi)` for the relaxed master problem.
//!
//! Cuts that involve `eta` read `eta >= coeffs . pi + rhs`; pruning cuts read
//! `coeffs . pi >= rhs` (near) or `coeffs . pi <= rhs` (far).

use serde::{Deserialize, Serialize};

use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};
use crate::transport::{Selection, TransportSolution};

/// Absolute slack allowed when checking a cut, scaled by `max(1, |rhs|)`.
pub const CUT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CutKind {
    Benders,
    LowerBound,
    Triangle,
    DualIneq,
    PruneNear,
    PruneFar,
}

impl CutKind {
    pub fn involves_eta(self) -> bool {
        !matches!(self, CutKind::PruneNear | CutKind::PruneFar)
    }
}

/// Whether the enhanced optimality cuts account for mass that stays put at zero cost.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutMode {
    #[default]
    Corrected,
    /// Uncorrected coefficients; can cut off the optimum when `B/N` is not small.
    PaperLiteral,
}

impl std::str::FromStr for CutMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corrected" => Ok(CutMode::Corrected),
            "paper-literal" | "paper_literal" => Ok(CutMode::PaperLiteral),
            other => Err(Error::Config(format!("unknown cut mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub kind: CutKind,
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

impl Cut {
    pub fn involves_eta(&self) -> bool {
        self.kind.involves_eta()
    }

    /// `coeffs . pi` over the selected indices.
    pub fn dot(&self, sel: &Selection) -> f64 {
        sel.indices().iter().map(|&i| self.coeffs[i]).sum()
    }

    /// Right-hand side `coeffs . pi + rhs` of an eta cut evaluated at `sel`.
    pub fn eta_bound(&self, sel: &Selection) -> f64 {
        self.dot(sel) + self.rhs
    }

    fn tol(&self) -> f64 {
        CUT_TOL * self.rhs.abs().max(1.0)
    }

    /// Whether `(eta, sel)` satisfies the cut. `eta` is ignored by pruning cuts.
    pub fn is_satisfied(&self, eta: f64, sel: &Selection) -> bool {
        match self.kind {
            CutKind::PruneNear => self.dot(sel) >= self.rhs - self.tol(),
            CutKind::PruneFar => self.dot(sel) <= self.rhs + self.tol(),
            _ => eta >= self.eta_bound(sel) - self.tol(),
        }
    }
}

fn check_selection(dist: &DistanceMatrix, sel: &Selection) -> Result<()> {
    if sel.n() != dist.n() {
        return Err(Error::DimensionMismatch { expected: dist.n(), got: sel.n() });
    }
    Ok(())
}

fn check_solution(sol: &TransportSolution, sel: &Selection) -> Result<()> {
    if sol.lambda.len() != sel.n() || sol.mu.len() != sel.n() {
        return Err(Error::DimensionMismatch { expected: sel.n(), got: sol.lambda.len() });
    }
    Ok(())
}

/// Dual-feasibility bound `eta >= (1/N) sum(mu) - (1/B) lambda . pi`. Exact at `sel_hat`.
pub fn benders_cut(sol: &TransportSolution, sel_hat: &Selection) -> Result<Cut> {
    check_solution(sol, sel_hat)?;
    let n = sel_hat.n() as f64;
    let b = sel_hat.budget() as f64;
    Ok(Cut {
        kind: CutKind::Benders,
        coeffs: sol.lambda.iter().map(|l| -l / b).collect(),
        rhs: sol.mu.iter().sum::<f64>() / n,
    })
}

/// Onset cut from nearest-neighbour distances.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundCut {
    pub cut: Cut,
    /// Set when some point has no positive distance to any other point; the cut is then
    /// uninformative for that point.
    pub degenerate: bool,
}

/// `eta >= sum_i w_i pi_i` with `w_i` built from the nearest positive distance of point `i`.
///
/// In corrected mode `w_i = max(1/B - z_i/N, 0) * dmin(i)` where `z_i` counts the points at zero
/// distance from `i` (itself included): that much of the mass arriving at `i` can come for free.
pub fn lower_bound_cut(dist: &DistanceMatrix, budget: usize, mode: CutMode) -> Result<LowerBoundCut> {
    let n = dist.n();
    if budget == 0 || budget > n {
        return Err(Error::InvalidSelection(format!("budget {budget} outside 1..={n}")));
    }
    let inv_b = 1.0 / budget as f64;
    let mut degenerate = false;
    let coeffs = (0..n)
        .map(|i| {
            let Some(dmin) = dist.row_min_positive(i) else {
                degenerate = true;
                return 0.0;
            };
            match mode {
                CutMode::PaperLiteral => inv_b * dmin,
                CutMode::Corrected => {
                    let zeros = dist.row(i).iter().filter(|&&v| v == 0.0).count();
                    (inv_b - zeros as f64 / n as f64).max(0.0) * dmin
                }
            }
        })
        .collect();
    if degenerate {
        log::warn!("lower bound cut: some point has no positive distance to the rest of the pool");
    }
    Ok(LowerBoundCut { cut: Cut { kind: CutKind::LowerBound, coeffs, rhs: 0.0 }, degenerate })
}

/// `eta >= (1/B) sum_i c_i pi_i - w_hat` with `c_i` the distance from `i` to the nearest point of
/// `sel_hat`. Corrected mode keeps zero distances (so `c_i = 0` on `sel_hat`); literal mode only
/// looks at positive ones.
pub fn triangle_cut(dist: &DistanceMatrix, sel_hat: &Selection, w_hat: f64, mode: CutMode) -> Result<Cut> {
    check_selection(dist, sel_hat)?;
    let b = sel_hat.budget() as f64;
    let coeffs = (0..dist.n())
        .map(|i| {
            let near = sel_hat.indices().iter().map(|&j| dist.get(i, j));
            let c = match mode {
                CutMode::Corrected => near.fold(f64::INFINITY, f64::min),
                CutMode::PaperLiteral => near.filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min),
            };
            if c.is_finite() {
                c / b
            } else {
                0.0
            }
        })
        .collect();
    Ok(Cut { kind: CutKind::Triangle, coeffs, rhs: -w_hat })
}

/// `eta >= w_hat + (1/B) lambda . pi - (1/N) sum(mu) - (1/B) sum_i maxrow(i) pi_i`.
///
/// With c-transform potentials on unselected points the right side never exceeds zero, so the cut
/// is valid but weak; it is still guarded at runtime by the driver.
pub fn dual_ineq_cut(dist: &DistanceMatrix, sol: &TransportSolution, sel_hat: &Selection) -> Result<Cut> {
    check_selection(dist, sel_hat)?;
    check_solution(sol, sel_hat)?;
    let n = dist.n() as f64;
    let b = sel_hat.budget() as f64;
    let coeffs = (0..dist.n()).map(|i| (sol.lambda[i] - dist.row_max(i)) / b).collect();
    Ok(Cut { kind: CutKind::DualIneq, coeffs, rhs: sol.value - sol.mu.iter().sum::<f64>() / n })
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Config(format!("pruning parameter {beta} must lie in (0, 1)")));
    }
    Ok(())
}

/// Keep the search inside a Hamming ball: `pi . pi_hat >= beta_plus * B`.
pub fn prune_near_cut(sel_hat: &Selection, beta_plus: f64) -> Result<Cut> {
    check_beta(beta_plus)?;
    Ok(Cut { kind: CutKind::PruneNear, coeffs: sel_hat.as_vector(), rhs: beta_plus * sel_hat.budget() as f64 })
}

/// Remove a Hamming ball: `pi . pi_hat <= beta_minus * B`.
pub fn prune_far_cut(sel_hat: &Selection, beta_minus: f64) -> Result<Cut> {
    check_beta(beta_minus)?;
    Ok(Cut { kind: CutKind::PruneFar, coeffs: sel_hat.as_vector(), rhs: beta_minus * sel_hat.budget() as f64 })
}
