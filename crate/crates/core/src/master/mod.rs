//! Relaxed master problem: choose `pi` with `|pi| = B` minimizing `eta` subject to the
//! accumulated cuts.
//!
//! Solved by best-first branch and bound over LP relaxations, with a rounding heuristic at every
//! node and swap local search on the piecewise-linear model `max_k (rhs_k + g_k . pi)` at the root.

mod lp;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::cuts::{Cut, CutKind, CUT_TOL};
use crate::error::{Error, Result};
use crate::transport::Selection;
use lp::{LinearProgram, LpOutcome, Row, Sense};

const INTEGRALITY_TOL: f64 = 1e-6;
/// Share of the time limit the root local search may use before the LP is attempted.
const ROOT_SEARCH_SHARE: f64 = 0.4;
/// Eta cuts in a node LP before lazy row generation starts, and cuts added per round.
const INITIAL_ROWS: usize = 8;
const ROWS_PER_ROUND: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct MasterProblem {
    pub n: usize,
    pub budget: usize,
    pub fixed_one: Vec<usize>,
    pub fixed_zero: Vec<usize>,
    pub cuts: Vec<Cut>,
    pub time_limit_s: f64,
    pub rel_gap_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MasterStatus {
    Optimal,
    GapLimit,
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasterSolution {
    pub eta: f64,
    pub selection: Selection,
    pub lower_bound: f64,
    pub status: MasterStatus,
    pub nodes: usize,
}

impl MasterProblem {
    /// Empty problem with a 180 s limit and a 10% relative gap.
    pub fn new(n: usize, budget: usize) -> Self {
        Self {
            n,
            budget,
            fixed_one: Vec::new(),
            fixed_zero: Vec::new(),
            cuts: Vec::new(),
            time_limit_s: 180.0,
            rel_gap_tol: 0.10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidMaster(msg));
        if self.budget == 0 || self.budget > self.n {
            return bad(format!("budget {} outside 1..={}", self.budget, self.n));
        }
        if !self.cuts.iter().any(Cut::involves_eta) {
            return bad("at least one cut must bound eta".into());
        }
        if let Some(c) = self.cuts.iter().find(|c| c.coeffs.len() != self.n) {
            return bad(format!("cut has {} coefficients, expected {}", c.coeffs.len(), self.n));
        }
        if self.cuts.iter().any(|c| !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite())) {
            return bad("cut with non-finite data".into());
        }
        let mut seen = vec![0u8; self.n];
        for (list, tag) in [(&self.fixed_one, 1u8), (&self.fixed_zero, 2u8)] {
            for &i in list.iter() {
                if i >= self.n {
                    return Err(Error::IndexOutOfRange { index: i, n: self.n });
                }
                if seen[i] != 0 {
                    return bad(format!("index {i} fixed twice"));
                }
                seen[i] = tag;
            }
        }
        if self.fixed_one.len() > self.budget {
            return bad("more indices fixed to one than the budget".into());
        }
        if !(self.time_limit_s >= 0.0) || !(self.rel_gap_tol >= 0.0) {
            return bad("time limit and gap must be non-negative".into());
        }
        Ok(())
    }

    /// Model value `max_k (rhs_k + g_k . pi)` over the eta cuts.
    pub fn model_value(&self, sel: &Selection) -> f64 {
        self.cuts.iter().filter(|c| c.involves_eta()).map(|c| c.eta_bound(sel)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Cardinality, fixings and pruning cuts hold at `sel`.
    pub fn is_feasible(&self, sel: &Selection) -> bool {
        sel.n() == self.n
            && sel.budget() == self.budget
            && self.fixed_one.iter().all(|&i| sel.contains(i))
            && !self.fixed_zero.iter().any(|&i| sel.contains(i))
            && self.cuts.iter().filter(|c| !c.involves_eta()).all(|c| c.is_satisfied(0.0, sel))
    }
}

/// LP relaxation value and fractional `pi` (length `N`) under the problem's fixings.
pub fn lp_relaxation(problem: &MasterProblem) -> Result<(f64, Vec<f64>)> {
    problem.validate()?;
    let search = Search::new(problem, Instant::now() + Duration::from_secs(3600 * 24 * 365));
    let fix = search.root_fixing();
    match search.node_lp(&fix, None)? {
        NodeLp::Solved { bound, pi } => Ok((bound, pi)),
        NodeLp::Infeasible => Err(Error::MasterInfeasible),
        NodeLp::Interrupted => Err(Error::SolverFailure("LP relaxation interrupted".into())),
    }
}

/// Solves the master to optimality, to the relative gap, or until the time limit.
pub fn solve_master(problem: &MasterProblem, warm_start: Option<&Selection>) -> Result<MasterSolution> {
    problem.validate()?;
    let start = Instant::now();
    let deadline = start + Duration::from_secs_f64(problem.time_limit_s.min(1e9));
    Search::new(problem, deadline).run(warm_start, start)
}

const FREE: i8 = -1;

enum NodeLp {
    Solved { bound: f64, pi: Vec<f64> },
    Infeasible,
    Interrupted,
}

struct Node {
    key: f64,
    seq: u64,
    fix: Vec<i8>,
    /// Parent relaxation, used to seed the node's active cuts.
    hint: Option<Rc<Vec<f64>>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Max-heap order: smallest key first, then earliest insertion.
    fn cmp(&self, other: &Self) -> Ordering {
        other.key.total_cmp(&self.key).then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Incumbent {
    sel: Selection,
    eta: f64,
}

struct Search<'a> {
    p: &'a MasterProblem,
    deadline: Instant,
    eta_cuts: Vec<&'a Cut>,
    prune_cuts: Vec<&'a Cut>,
    /// Eta-cut coefficients transposed: `gt[i * K + k]`.
    gt: Vec<f64>,
    incumbent: Option<Incumbent>,
}

impl<'a> Search<'a> {
    fn new(p: &'a MasterProblem, deadline: Instant) -> Self {
        let eta_cuts: Vec<&Cut> = p.cuts.iter().filter(|c| c.involves_eta()).collect();
        let prune_cuts = p.cuts.iter().filter(|c| !c.involves_eta()).collect();
        let k = eta_cuts.len();
        let mut gt = vec![0.0; p.n * k];
        for (ci, c) in eta_cuts.iter().enumerate() {
            for (i, &g) in c.coeffs.iter().enumerate() {
                gt[i * k + ci] = g;
            }
        }
        Self { p, deadline, eta_cuts, prune_cuts, gt, incumbent: None }
    }

    fn timed_out(&self) -> bool {
        Instant::now() >= self.deadline
    }

    fn root_fixing(&self) -> Vec<i8> {
        let mut fix = vec![FREE; self.p.n];
        self.p.fixed_one.iter().for_each(|&i| fix[i] = 1);
        self.p.fixed_zero.iter().for_each(|&i| fix[i] = 0);
        fix
    }

    fn offer(&mut self, sel: Selection) {
        if !self.p.is_feasible(&sel) {
            return;
        }
        let eta = self.p.model_value(&sel);
        let better = match &self.incumbent {
            None => true,
            Some(inc) => eta < inc.eta - 1e-12 * inc.eta.abs().max(1.0),
        };
        if better {
            self.incumbent = Some(Incumbent { sel, eta });
        }
    }

    fn incumbent_eta(&self) -> f64 {
        self.incumbent.as_ref().map_or(f64::INFINITY, |inc| inc.eta)
    }

    fn bland_after(&self) -> usize {
        10 * (self.p.n + self.p.cuts.len())
    }

    /// LP relaxation at a node. Fixed variables are substituted out and `eta` is shifted by a
    /// valid lower bound so it can carry a zero lower bound. Eta cuts enter lazily: the LP starts
    /// from the cuts that bind hardest at `hint` and grows until no cut is violated.
    fn node_lp(&self, fix: &[i8], hint: Option<&[f64]>) -> Result<NodeLp> {
        let free: Vec<usize> = (0..self.p.n).filter(|&i| fix[i] == FREE).collect();
        let ones: Vec<usize> = (0..self.p.n).filter(|&i| fix[i] == 1).collect();
        if ones.len() > self.p.budget || ones.len() + free.len() < self.p.budget {
            return Ok(NodeLp::Infeasible);
        }
        let remaining = (self.p.budget - ones.len()) as f64;
        let nf = free.len();

        let fixed_part = |c: &Cut| ones.iter().map(|&i| c.coeffs[i]).sum::<f64>();
        let shift = self
            .eta_cuts
            .iter()
            .map(|c| c.rhs + fixed_part(c) + free.iter().map(|&i| c.coeffs[i].min(0.0)).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        let cut_at = |c: &Cut, pi: &[f64]| c.rhs + c.coeffs.iter().zip(pi).map(|(g, x)| g * x).sum::<f64>();

        let start: Vec<f64> = match hint {
            Some(h) => fix.iter().zip(h).map(|(&f, &x)| if f == FREE { x } else { f as f64 }).collect(),
            None => {
                let share = if nf > 0 { remaining / nf as f64 } else { 0.0 };
                fix.iter().map(|&f| if f == FREE { share } else { f as f64 }).collect()
            }
        };
        let mut by_value: Vec<(usize, f64)> =
            self.eta_cuts.iter().enumerate().map(|(k, c)| (k, cut_at(c, &start))).collect();
        by_value.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut active = vec![false; self.eta_cuts.len()];
        by_value.iter().take(INITIAL_ROWS).for_each(|&(k, _)| active[k] = true);

        let mut base_rows = Vec::with_capacity(self.prune_cuts.len() + 1);
        for c in &self.prune_cuts {
            let mut coeffs: Vec<f64> = free.iter().map(|&i| c.coeffs[i]).collect();
            coeffs.push(0.0);
            let sense = if c.kind == CutKind::PruneNear { Sense::Ge } else { Sense::Le };
            let slack = if sense == Sense::Ge { -CUT_TOL } else { CUT_TOL } * c.rhs.abs().max(1.0);
            base_rows.push(Row { coeffs, sense, rhs: c.rhs - fixed_part(c) + slack });
        }
        let mut card = vec![1.0; nf];
        card.push(0.0);
        base_rows.push(Row { coeffs: card, sense: Sense::Eq, rhs: remaining });

        let mut cost = vec![0.0; nf];
        cost.push(1.0);
        let mut upper = vec![1.0; nf];
        upper.push(f64::INFINITY);

        loop {
            let mut rows = base_rows.clone();
            for (c, _) in self.eta_cuts.iter().zip(&active).filter(|(_, &a)| a) {
                let mut coeffs: Vec<f64> = free.iter().map(|&i| -c.coeffs[i]).collect();
                coeffs.push(1.0);
                rows.push(Row { coeffs, sense: Sense::Ge, rhs: c.rhs + fixed_part(c) - shift });
            }
            let program = LinearProgram { cost: cost.clone(), lower: vec![0.0; nf + 1], upper: upper.clone(), rows };
            let (x, objective) = match program.solve(self.bland_after(), Some(self.deadline))? {
                LpOutcome::Optimal { x, objective } => (x, objective),
                LpOutcome::Infeasible => return Ok(NodeLp::Infeasible),
                LpOutcome::Interrupted => return Ok(NodeLp::Interrupted),
                LpOutcome::Unbounded => return Err(Error::SolverFailure("master relaxation unbounded".into())),
            };
            let mut pi: Vec<f64> = fix.iter().map(|&f| if f == 1 { 1.0 } else { 0.0 }).collect();
            free.iter().zip(&x).for_each(|(&i, &v)| pi[i] = v);
            let bound = objective + shift;

            let tol = 1e-9 * bound.abs().max(1.0);
            let mut violated: Vec<(usize, f64)> = self
                .eta_cuts
                .iter()
                .enumerate()
                .filter(|&(k, _)| !active[k])
                .map(|(k, c)| (k, cut_at(c, &pi) - bound))
                .filter(|&(_, v)| v > tol)
                .collect();
            if violated.is_empty() {
                return Ok(NodeLp::Solved { bound, pi });
            }
            violated.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            violated.iter().take(ROWS_PER_ROUND).for_each(|&(k, _)| active[k] = true);
        }
    }

    /// Ones plus the largest fractional values (ties to the lowest index) up to the budget.
    fn round(&self, fix: &[i8], pi: &[f64]) -> Option<Selection> {
        let mut chosen: Vec<usize> = (0..self.p.n).filter(|&i| fix[i] == 1).collect();
        let mut free: Vec<usize> = (0..self.p.n).filter(|&i| fix[i] == FREE).collect();
        free.sort_by(|&a, &b| pi[b].total_cmp(&pi[a]).then(a.cmp(&b)));
        let need = self.p.budget.checked_sub(chosen.len())?;
        if free.len() < need {
            return None;
        }
        chosen.extend_from_slice(&free[..need]);
        Selection::from_indices(self.p.n, &chosen).ok()
    }

    /// Best-improvement single swaps on the model value, keeping fixings and pruning cuts.
    fn local_search(&self, start: &Selection, deadline: Instant) -> Selection {
        let n = self.p.n;
        let k = self.eta_cuts.len();
        let mut member = start.indicator();
        let mut locked = vec![false; n];
        self.p.fixed_one.iter().chain(&self.p.fixed_zero).for_each(|&i| locked[i] = true);

        let mut v: Vec<f64> = self.eta_cuts.iter().map(|c| c.eta_bound(start)).collect();
        let mut r: Vec<f64> = self.prune_cuts.iter().map(|c| c.dot(start)).collect();
        let prune_ok = |r: &[f64], i: usize, j: usize| {
            self.prune_cuts.iter().zip(r).all(|(c, &ri)| {
                let val = ri + c.coeffs[i] - c.coeffs[j];
                let tol = CUT_TOL * c.rhs.abs().max(1.0);
                if c.kind == CutKind::PruneNear {
                    val >= c.rhs - tol
                } else {
                    val <= c.rhs + tol
                }
            })
        };

        let mut w = vec![0.0; k];
        let mut order: Vec<usize> = (0..k).collect();
        loop {
            let current = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut best = current - 1e-12 * current.abs().max(1.0);
            let mut best_swap = None;
            'outer: for j in 0..n {
                if !member[j] || locked[j] {
                    continue;
                }
                if Instant::now() >= deadline {
                    break 'outer;
                }
                let gj = &self.gt[j * k..(j + 1) * k];
                for c in 0..k {
                    w[c] = v[c] - gj[c];
                }
                order.sort_unstable_by(|&a, &b| w[b].total_cmp(&w[a]));
                for i in 0..n {
                    if member[i] || locked[i] || !prune_ok(&r, i, j) {
                        continue;
                    }
                    let gi = &self.gt[i * k..(i + 1) * k];
                    let mut m = f64::NEG_INFINITY;
                    for &c in &order {
                        m = m.max(w[c] + gi[c]);
                        if m >= best {
                            break;
                        }
                    }
                    if m < best {
                        best = m;
                        best_swap = Some((j, i));
                    }
                }
            }
            let Some((j, i)) = best_swap else { break };
            member[j] = false;
            member[i] = true;
            let (gi, gj) = (&self.gt[i * k..(i + 1) * k], &self.gt[j * k..(j + 1) * k]);
            for ((vc, a), b) in v.iter_mut().zip(gi).zip(gj) {
                *vc += a - b;
            }
            for (ri, c) in r.iter_mut().zip(&self.prune_cuts) {
                *ri += c.coeffs[i] - c.coeffs[j];
            }
        }
        Selection::from_indicator(&member).expect("swaps preserve cardinality")
    }

    /// Fixes forced by cardinality; `None` when the node is empty.
    fn propagate(&self, fix: &mut [i8]) -> Option<()> {
        let ones = fix.iter().filter(|&&f| f == 1).count();
        let free = fix.iter().filter(|&&f| f == FREE).count();
        if ones > self.p.budget || ones + free < self.p.budget {
            return None;
        }
        let fill = if ones == self.p.budget {
            0
        } else if ones + free == self.p.budget {
            1
        } else {
            return Some(());
        };
        fix.iter_mut().filter(|f| **f == FREE).for_each(|f| *f = fill);
        Some(())
    }

    fn run(mut self, warm_start: Option<&Selection>, start: Instant) -> Result<MasterSolution> {
        let p = self.p;
        let abs_tol = |eta: f64| 1e-9 * eta.abs().max(1.0);
        let prune_tol = |eta: f64| abs_tol(eta).max(p.rel_gap_tol * eta.abs());

        let mut root = self.root_fixing();
        if self.propagate(&mut root).is_none() {
            return Err(Error::MasterInfeasible);
        }

        if let Some(ws) = warm_start.filter(|ws| ws.n() == p.n) {
            self.offer(ws.clone());
            if self.incumbent.is_some() {
                let budget = self.deadline.min(start + (self.deadline - start).mul_f64(ROOT_SEARCH_SHARE));
                let improved = self.local_search(ws, budget);
                self.offer(improved);
            }
        }

        // Trivial bound from the eta cuts over the box; valid even if the root LP is cut short.
        let trivial_bound = self
            .eta_cuts
            .iter()
            .map(|c| {
                c.rhs
                    + c.coeffs
                        .iter()
                        .zip(&root)
                        .map(|(&g, &f)| match f {
                            1 => g,
                            0 => 0.0,
                            _ => g.min(0.0),
                        })
                        .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max);

        let mut heap = BinaryHeap::new();
        let mut seq = 0u64;
        let mut nodes = 0usize;
        let mut gap_pruned = f64::INFINITY;
        heap.push(Node { key: trivial_bound, seq, fix: root, hint: None });

        let finish = |s: &Search, lower: f64, status: MasterStatus, nodes: usize| match &s.incumbent {
            Some(inc) => Ok(MasterSolution {
                eta: inc.eta,
                selection: inc.sel.clone(),
                lower_bound: lower.min(inc.eta),
                status,
                nodes,
            }),
            None if status == MasterStatus::TimeLimit => Err(Error::MasterNoIncumbent),
            None => Err(Error::MasterInfeasible),
        };

        while let Some(node) = heap.pop() {
            let inc = self.incumbent_eta();
            if node.key >= inc - prune_tol(inc) {
                // Best-first: every remaining node is prunable as well.
                let lower = node.key.min(gap_pruned);
                let status = if lower >= inc - abs_tol(inc) { MasterStatus::Optimal } else { MasterStatus::GapLimit };
                return finish(&self, lower, status, nodes);
            }
            if self.timed_out() {
                return finish(&self, node.key.min(gap_pruned), MasterStatus::TimeLimit, nodes);
            }
            nodes += 1;

            let free = node.fix.iter().filter(|&&f| f == FREE).count();
            if free == 0 {
                let sel = self.round(&node.fix, &[]);
                if let Some(sel) = sel {
                    self.offer(sel);
                }
                continue;
            }

            let (bound, pi) = match self.node_lp(&node.fix, node.hint.as_deref().map(Vec::as_slice))? {
                NodeLp::Solved { bound, pi } => (bound.max(node.key), pi),
                NodeLp::Infeasible => continue,
                NodeLp::Interrupted => return finish(&self, node.key.min(gap_pruned), MasterStatus::TimeLimit, nodes),
            };

            if let Some(sel) = self.round(&node.fix, &pi) {
                let is_root = nodes == 1;
                self.offer(sel.clone());
                if is_root && self.p.is_feasible(&sel) {
                    let improved = self.local_search(&sel, self.deadline);
                    self.offer(improved);
                }
            }

            let inc = self.incumbent_eta();
            if bound >= inc - prune_tol(inc) {
                if bound < inc - abs_tol(inc) {
                    gap_pruned = gap_pruned.min(bound);
                }
                continue;
            }

            // Most fractional free variable, ties to the lowest index.
            let branch = (0..p.n)
                .filter(|&i| node.fix[i] == FREE)
                .map(|i| (i, (pi[i] - 0.5).abs()))
                .filter(|&(_, d)| d < 0.5 - INTEGRALITY_TOL)
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            let Some((bi, _)) = branch else {
                // Integral relaxation: its rounding is the node optimum and was offered above.
                continue;
            };

            let hint = Rc::new(pi);
            for value in [1i8, 0] {
                let mut fix = node.fix.clone();
                fix[bi] = value;
                if self.propagate(&mut fix).is_some() {
                    seq += 1;
                    heap.push(Node { key: bound, seq, fix, hint: Some(Rc::clone(&hint)) });
                }
            }
        }

        let lower = gap_pruned.min(self.incumbent_eta());
        let inc = self.incumbent_eta();
        let status = if lower >= inc - abs_tol(inc) { MasterStatus::Optimal } else { MasterStatus::GapLimit };
        finish(&self, lower, status, nodes)
    }
}
