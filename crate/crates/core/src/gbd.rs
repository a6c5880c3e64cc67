//! Benders decomposition driver: alternates exact transport solves with master solves until the
//! bounds meet or time runs out.

use std::collections::HashSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cuts::{
    benders_cut, dual_ineq_cut, lower_bound_cut, prune_far_cut, prune_near_cut, triangle_cut, Cut, CutKind, CutMode,
};
use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};
use crate::master::{lp_relaxation, solve_master, MasterProblem, MasterSolution, MasterStatus};
use crate::transport::{wasserstein, wasserstein_reduced, Selection, TransportSolution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbdConfig {
    pub epsilon: f64,
    pub total_time_limit_s: f64,
    pub master_time_limit_s: f64,
    pub master_gap_tol: f64,
    pub use_eoc: bool,
    pub use_pruning: bool,
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub cut_mode: CutMode,
    pub dual_ineq_guard: bool,
    pub seed: u64,
}

impl Default for GbdConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            total_time_limit_s: 3.0 * 3600.0,
            master_time_limit_s: 180.0,
            master_gap_tol: 0.10,
            use_eoc: true,
            use_pruning: false,
            beta_plus: 0.6,
            beta_minus: 0.99,
            cut_mode: CutMode::Corrected,
            dual_ineq_guard: true,
            seed: 0,
        }
    }
}

impl GbdConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if !(self.total_time_limit_s >= 0.0) || !(self.master_time_limit_s >= 0.0) {
            return bad("time limits must be non-negative");
        }
        if !(self.master_gap_tol >= 0.0) {
            return bad("master gap must be non-negative");
        }
        for beta in [self.beta_plus, self.beta_minus] {
            if !(beta > 0.0 && beta < 1.0) {
                return bad("pruning parameters must lie in (0, 1)");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub lb: f64,
    pub ub: f64,
    pub incumbent_w: f64,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundsTrace {
    pub rows: Vec<TraceRow>,
}

impl BoundsTrace {
    pub const CSV_HEADER: &'static str = "iter,lb,ub,incumbent_w,elapsed_s";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{:.6}\n", r.iter, r.lb, r.ub, r.incumbent_w, r.elapsed_s));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GbdStatus {
    Converged,
    TimeLimit,
}

/// Number of cuts of each kind installed during a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutCounts {
    pub benders: usize,
    pub lower_bound: usize,
    pub triangle: usize,
    pub dual_ineq: usize,
    pub prune_near: usize,
    pub prune_far: usize,
    /// Cuts rejected by the incumbent guard.
    pub rejected: usize,
}

impl CutCounts {
    fn record(&mut self, kind: CutKind) {
        match kind {
            CutKind::Benders => self.benders += 1,
            CutKind::LowerBound => self.lower_bound += 1,
            CutKind::Triangle => self.triangle += 1,
            CutKind::DualIneq => self.dual_ineq += 1,
            CutKind::PruneNear => self.prune_near += 1,
            CutKind::PruneFar => self.prune_far += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbdResult {
    pub best: Selection,
    pub best_value: f64,
    pub trace: BoundsTrace,
    pub status: GbdStatus,
    pub iterations: usize,
    pub cut_counts: CutCounts,
    /// Set when a dual inequality cut failed the incumbent guard and the family was switched off.
    pub dual_ineq_disabled: bool,
}

/// Whether `cut` holds at `(eta = best_value, pi = best)`.
pub fn incumbent_guard(cut: &Cut, best: &Selection, best_value: f64) -> bool {
    cut.is_satisfied(best_value, best)
}

fn transport(dist: &DistanceMatrix, sel: &Selection) -> Result<TransportSolution> {
    if 4 * sel.budget() <= dist.n() {
        wasserstein_reduced(dist, sel)
    } else {
        wasserstein(dist, sel)
    }
}

struct Driver<'a> {
    config: &'a GbdConfig,
    master: MasterProblem,
    counts: CutCounts,
    dual_ineq_enabled: bool,
}

impl Driver<'_> {
    fn install(&mut self, cut: Cut) {
        self.counts.record(cut.kind);
        self.master.cuts.push(cut);
    }

    /// Drops enhanced cuts that the incumbent violates. A violated dual inequality cut switches
    /// the whole family off.
    fn enforce_guard(&mut self, best: &Selection, best_value: f64) {
        let mut disable = false;
        let mut rejected = 0;
        self.master.cuts.retain(|c| {
            let guarded = matches!(c.kind, CutKind::Triangle | CutKind::DualIneq);
            if !guarded || incumbent_guard(c, best, best_value) {
                return true;
            }
            log::warn!("{:?} cut violated at the incumbent (value {best_value}); dropped", c.kind);
            disable |= c.kind == CutKind::DualIneq;
            rejected += 1;
            false
        });
        self.counts.rejected += rejected;
        if disable && self.config.dual_ineq_guard {
            self.master.cuts.retain(|c| c.kind != CutKind::DualIneq);
            self.dual_ineq_enabled = false;
        }
    }

    /// Drops the oldest far cut, or the oldest near cut when no far cut is left.
    fn relax_pruning(&mut self) -> bool {
        for kind in [CutKind::PruneFar, CutKind::PruneNear] {
            if let Some(pos) = self.master.cuts.iter().position(|c| c.kind == kind) {
                log::info!("relaxing pruning: dropping oldest {kind:?} cut");
                self.master.cuts.remove(pos);
                return true;
            }
        }
        false
    }

    fn solve_master(&mut self, warm: &Selection, time_s: f64, gap: f64) -> Result<Option<MasterSolution>> {
        self.master.time_limit_s = time_s;
        self.master.rel_gap_tol = gap;
        loop {
            match solve_master(&self.master, Some(warm)) {
                Ok(sol) => return Ok(Some(sol)),
                Err(Error::MasterInfeasible) if self.relax_pruning() => continue,
                Err(Error::MasterNoIncumbent) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
    }
}

impl Driver<'_> {
    fn has_pruning(&self) -> bool {
        self.master.cuts.iter().any(|c| matches!(c.kind, CutKind::PruneNear | CutKind::PruneFar))
    }

    /// Lower bound on the unpruned problem. With pruning rows present the master bound only covers
    /// the pruned region, so the LP relaxation without those rows is used instead.
    fn global_bound(&mut self, ms: &MasterSolution) -> Result<f64> {
        if !self.has_pruning() {
            return Ok(ms.lower_bound);
        }
        let (pruning, kept): (Vec<Cut>, Vec<Cut>) = std::mem::take(&mut self.master.cuts)
            .into_iter()
            .partition(|c| matches!(c.kind, CutKind::PruneNear | CutKind::PruneFar));
        self.master.cuts = kept;
        let bound = lp_relaxation(&self.master);
        self.master.cuts.extend(pruning);
        bound.map(|(b, _)| b)
    }

    /// Next master point and a valid lower bound. A revisited point without a proof is re-solved
    /// at gap zero; a proof that only covers the pruned region relaxes the pruning instead.
    fn next_point(
        &mut self,
        best: &Selection,
        ub: f64,
        visited: &HashSet<Selection>,
        deadline: impl Fn() -> f64,
    ) -> Result<Option<(MasterSolution, f64)>> {
        let mut gap = self.config.master_gap_tol;
        loop {
            let remaining = deadline();
            if remaining <= 0.0 {
                return Ok(None);
            }
            let Some(ms) = self.solve_master(best, self.config.master_time_limit_s.min(remaining), gap)? else {
                return Ok(None);
            };
            let bound = self.global_bound(&ms)?;
            if !visited.contains(&ms.selection) || ub - bound < self.config.epsilon {
                return Ok(Some((ms, bound)));
            }
            match ms.status {
                MasterStatus::Optimal if self.relax_pruning() => {}
                MasterStatus::GapLimit if gap > 0.0 => gap = 0.0,
                _ => return Ok(Some((ms, bound))),
            }
        }
    }
}

/// Minimizes `W(C(pi), D)` over selections of size `budget` containing `fixed_one`, starting from
/// `warm_start`.
pub fn select_coreset(
    dist: &DistanceMatrix,
    budget: usize,
    fixed_one: &[usize],
    warm_start: &Selection,
    config: &GbdConfig,
) -> Result<GbdResult> {
    let start = Instant::now();
    config.validate()?;
    let n = dist.n();
    if warm_start.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: warm_start.n() });
    }
    if budget == 0 || budget > n || warm_start.budget() != budget {
        return Err(Error::InvalidSelection(format!(
            "warm start has {} points, budget is {budget} (pool {n})",
            warm_start.budget()
        )));
    }
    if let Some(&i) = fixed_one.iter().find(|&&i| !warm_start.contains(i)) {
        return Err(Error::InvalidSelection(format!("warm start misses fixed index {i}")));
    }

    let mut master = MasterProblem::new(n, budget);
    master.fixed_one = fixed_one.to_vec();
    master.fixed_one.sort_unstable();
    master.fixed_one.dedup();
    let mut driver = Driver { config, master, counts: CutCounts::default(), dual_ineq_enabled: true };
    if config.use_eoc {
        driver.install(lower_bound_cut(dist, budget, config.cut_mode)?.cut);
    }

    let elapsed = || start.elapsed().as_secs_f64();
    let mut trace = BoundsTrace::default();
    let mut visited: HashSet<Selection> = HashSet::new();
    let mut best = warm_start.clone();
    let mut ub = f64::INFINITY;
    let mut lb = 0.0_f64;
    let mut pi_hat = warm_start.clone();
    let mut iter = 0;

    let status = loop {
        let sol = transport(dist, &pi_hat)?;
        let w = sol.value;
        let in_near_set = w <= ub;
        if w < ub {
            ub = w;
            best = pi_hat.clone();
        }
        lb = lb.min(ub);

        driver.install(benders_cut(&sol, &pi_hat)?);
        if config.use_eoc {
            driver.install(triangle_cut(dist, &pi_hat, w, config.cut_mode)?);
            if driver.dual_ineq_enabled {
                driver.install(dual_ineq_cut(dist, &sol, &pi_hat)?);
            }
            driver.enforce_guard(&best, ub);
        }
        if config.use_pruning {
            let cut = if in_near_set {
                prune_near_cut(&pi_hat, config.beta_plus)?
            } else {
                prune_far_cut(&pi_hat, config.beta_minus)?
            };
            driver.install(cut);
        }
        visited.insert(pi_hat.clone());

        let remaining = config.total_time_limit_s - elapsed();
        if ub - lb < config.epsilon || remaining <= 0.0 {
            trace.rows.push(TraceRow { iter, lb, ub, incumbent_w: ub, elapsed_s: elapsed() });
            break if ub - lb < config.epsilon { GbdStatus::Converged } else { GbdStatus::TimeLimit };
        }

        let Some((ms, bound)) = driver.next_point(&best, ub, &visited, || config.total_time_limit_s - elapsed())?
        else {
            trace.rows.push(TraceRow { iter, lb, ub, incumbent_w: ub, elapsed_s: elapsed() });
            break GbdStatus::TimeLimit;
        };
        lb = lb.max(bound).min(ub);
        log::debug!("iteration {iter}: lb {lb} ub {ub} master {:?} eta {}", ms.status, ms.eta);
        trace.rows.push(TraceRow { iter, lb, ub, incumbent_w: ub, elapsed_s: elapsed() });

        if ub - lb < config.epsilon {
            break GbdStatus::Converged;
        }
        if elapsed() >= config.total_time_limit_s {
            break GbdStatus::TimeLimit;
        }
        pi_hat = ms.selection;
        iter += 1;
    };

    Ok(GbdResult {
        best,
        best_value: ub,
        trace,
        status,
        iterations: iter + 1,
        cut_counts: driver.counts,
        dual_ineq_disabled: !driver.dual_ineq_enabled,
    })
}
