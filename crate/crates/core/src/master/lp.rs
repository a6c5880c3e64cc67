//! Dense bounded-variable primal simplex (two phases) for the small master relaxations.

use std::time::Instant;

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `min cost . x` subject to `rows` and `lower <= x <= upper` (lower bounds finite).
#[derive(Debug, Clone, Default)]
pub(crate) struct LinearProgram {
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal {
        x: Vec<f64>,
        objective: f64,
    },
    Infeasible,
    Unbounded,
    /// Deadline passed before optimality was established.
    Interrupted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Basic,
    AtLower,
    AtUpper,
}

struct Tableau {
    m: usize,
    cols: usize,
    /// `B^-1 A`, row-major.
    a: Vec<f64>,
    /// Values of the basic variables.
    beta: Vec<f64>,
    basis: Vec<usize>,
    status: Vec<Status>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Reduced costs of the current phase.
    d: Vec<f64>,
    /// Columns that may never enter (artificials).
    frozen: Vec<bool>,
}

enum Step {
    Optimal,
    Unbounded,
    Moved { degenerate: bool },
}

impl Tableau {
    fn value(&self, j: usize) -> f64 {
        match self.status[j] {
            Status::AtLower => self.lower[j],
            Status::AtUpper => self.upper[j],
            Status::Basic => {
                let r = self.basis.iter().position(|&b| b == j).expect("basic column");
                self.beta[r]
            }
        }
    }

    fn reset_costs(&mut self, cost: &[f64]) {
        self.d.copy_from_slice(cost);
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.a[r * self.cols..(r + 1) * self.cols];
                for (dj, &arj) in self.d.iter_mut().zip(row) {
                    *dj -= cb * arj;
                }
            }
        }
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.cols {
            if self.frozen[j] || self.upper[j] - self.lower[j] <= 0.0 {
                continue;
            }
            let dir = match self.status[j] {
                Status::AtLower if self.d[j] < -OPT_TOL => 1.0,
                Status::AtUpper if self.d[j] > OPT_TOL => -1.0,
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            let score = self.d[j].abs();
            if best.is_none_or(|(_, _, s)| score > s) {
                best = Some((j, dir, score));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn step(&mut self, bland: bool) -> Step {
        let Some((j, dir)) = self.choose_entering(bland) else { return Step::Optimal };
        let cols = self.cols;

        // Ratio test over basic variables, plus the entering variable's own range.
        let mut t_max = self.upper[j] - self.lower[j];
        let mut leave: Option<(usize, bool)> = None;
        let mut leave_key = (f64::INFINITY, usize::MAX);
        for r in 0..self.m {
            let alpha = dir * self.a[r * cols + j];
            let b = self.basis[r];
            let limit = if alpha > PIVOT_TOL {
                (self.beta[r] - self.lower[b]).max(0.0) / alpha
            } else if alpha < -PIVOT_TOL && self.upper[b].is_finite() {
                (self.upper[b] - self.beta[r]).max(0.0) / -alpha
            } else {
                continue;
            };
            // Smallest ratio; ties to the lowest basic index under Bland, else the largest pivot.
            let tie_key = if bland { b as f64 } else { -alpha.abs() };
            let better =
                limit < t_max - 1e-12 || (limit <= t_max + 1e-12 && leave.is_some() && (tie_key, b) < leave_key);
            if better || (leave.is_none() && limit <= t_max) {
                t_max = limit.min(t_max);
                leave = Some((r, alpha > 0.0));
                leave_key = (tie_key, b);
            }
        }
        if t_max.is_infinite() {
            return Step::Unbounded;
        }

        let t = t_max;
        for r in 0..self.m {
            let a = self.a[r * cols + j];
            if a != 0.0 {
                self.beta[r] -= t * dir * a;
            }
        }

        match leave {
            None => {
                // Bound flip.
                self.status[j] = if dir > 0.0 { Status::AtUpper } else { Status::AtLower };
            }
            Some((r, to_lower)) => {
                let out = self.basis[r];
                self.status[out] = if to_lower { Status::AtLower } else { Status::AtUpper };
                let entering_value = if dir > 0.0 { self.lower[j] + t } else { self.upper[j] - t };
                self.basis[r] = j;
                self.status[j] = Status::Basic;
                self.beta[r] = entering_value;
                self.pivot(r, j);
            }
        }
        Step::Moved { degenerate: t <= 1e-12 }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let cols = self.cols;
        let p = self.a[r * cols + j];
        {
            let row = &mut self.a[r * cols..(r + 1) * cols];
            row.iter_mut().for_each(|v| *v /= p);
        }
        let pivot_row: Vec<f64> = self.a[r * cols..(r + 1) * cols].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * cols + j];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[i * cols..(i + 1) * cols];
            for (v, &pr) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            row[j] = 0.0;
        }
        let f = self.d[j];
        if f != 0.0 {
            for (v, &pr) in self.d.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            self.d[j] = 0.0;
        }
    }

    fn run(&mut self, bland_after: usize, max_steps: usize, deadline: Option<Instant>) -> Result<Option<Step>> {
        let mut degenerate_run = 0;
        for step in 0..max_steps {
            if step % 64 == 0 && deadline.is_some_and(|d| Instant::now() >= d) {
                return Ok(None);
            }
            match self.step(degenerate_run > bland_after) {
                Step::Moved { degenerate } => {
                    degenerate_run = if degenerate { degenerate_run + 1 } else { 0 };
                }
                done => return Ok(Some(done)),
            }
        }
        Err(Error::SolverFailure(format!("simplex step limit of {max_steps} exceeded")))
    }
}

impl LinearProgram {
    /// Solves the program; switches to Bland's rule after `bland_after` consecutive degenerate
    /// steps.
    pub fn solve(&self, bland_after: usize, deadline: Option<Instant>) -> Result<LpOutcome> {
        let n = self.cost.len();
        let m = self.rows.len();
        debug_assert!(self.lower.iter().all(|l| l.is_finite()));
        if self.lower.iter().zip(&self.upper).any(|(l, u)| l > u) {
            return Ok(LpOutcome::Infeasible);
        }

        // Columns: structural | one slack per inequality row | one artificial shared by all
        // violated inequality rows | one artificial per equality row.
        let mut next = n;
        let slack_of: Vec<Option<usize>> = self
            .rows
            .iter()
            .map(|row| {
                (row.sense != Sense::Eq).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect();
        let art0 = next;
        let shared = art0;
        next += 1;
        let own_art: Vec<Option<usize>> = self
            .rows
            .iter()
            .map(|row| {
                (row.sense == Sense::Eq).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect();
        let cols = next;

        let mut lower = self.lower.clone();
        let mut upper = self.upper.clone();
        lower.resize(cols, 0.0);
        upper.resize(cols, f64::INFINITY);

        let mut a = vec![0.0; m * cols];
        let mut beta = vec![0.0; m];
        let mut basis = vec![0; m];
        let mut status = vec![Status::AtLower; cols];
        let mut phase1_cost = vec![0.0; cols];
        let frozen = vec![false; cols];
        let mut violated = Vec::new();

        for (r, row) in self.rows.iter().enumerate() {
            let dst = &mut a[r * cols..(r + 1) * cols];
            dst[..n].copy_from_slice(&row.coeffs);
            let residual = row.rhs - (0..n).map(|j| row.coeffs[j] * lower[j]).sum::<f64>();
            if let Some(s) = slack_of[r] {
                // Scale the row so the slack column is +1.
                let sign = if row.sense == Sense::Le { 1.0 } else { -1.0 };
                dst.iter_mut().for_each(|v| *v *= sign);
                dst[s] = 1.0;
                basis[r] = s;
                beta[r] = residual * sign;
                if beta[r] < 0.0 {
                    dst[shared] = -1.0;
                    violated.push(r);
                }
            } else {
                let art = own_art[r].expect("equality rows own an artificial");
                let sign = if residual >= 0.0 { 1.0 } else { -1.0 };
                dst.iter_mut().for_each(|v| *v *= sign);
                dst[art] = 1.0;
                basis[r] = art;
                beta[r] = residual.abs();
                phase1_cost[art] = 1.0;
            }
            status[basis[r]] = Status::Basic;
        }

        let mut tab = Tableau { m, cols, a, beta, basis, status, lower, upper, d: vec![0.0; cols], frozen };
        if let Some(&worst) = violated.iter().min_by(|&&x, &&y| tab.beta[x].total_cmp(&tab.beta[y])) {
            // Raise the shared artificial until every violated row is satisfied.
            let level = -tab.beta[worst];
            for &r in &violated {
                tab.beta[r] += level;
            }
            let out = tab.basis[worst];
            tab.status[out] = Status::AtLower;
            tab.basis[worst] = shared;
            tab.status[shared] = Status::Basic;
            tab.beta[worst] = level;
            tab.pivot(worst, shared);
            phase1_cost[shared] = 1.0;
        } else {
            tab.frozen[shared] = true;
            tab.upper[shared] = 0.0;
        }
        let max_steps = 200 * (cols + m) + 1000;

        if phase1_cost.iter().any(|&c| c != 0.0) {
            tab.reset_costs(&phase1_cost);
            match tab.run(bland_after, max_steps, deadline)? {
                None => return Ok(LpOutcome::Interrupted),
                Some(Step::Unbounded) => return Err(Error::SolverFailure("phase one reported unbounded".into())),
                _ => {}
            }
            let infeasibility: f64 = (0..m).filter(|&r| tab.basis[r] >= art0).map(|r| tab.beta[r]).sum();
            let scale = self.rows.iter().map(|r| r.rhs.abs()).fold(1.0, f64::max);
            if infeasibility > FEAS_TOL * scale {
                return Ok(LpOutcome::Infeasible);
            }
            // Artificials are pinned at zero from here on.
            for k in art0..cols {
                tab.frozen[k] = true;
                tab.upper[k] = 0.0;
            }
            for r in 0..m {
                if tab.basis[r] >= art0 {
                    tab.beta[r] = 0.0;
                    let row = &tab.a[r * cols..(r + 1) * cols];
                    if let Some(j) = (0..art0).find(|&j| tab.status[j] != Status::Basic && row[j].abs() > 1e-7) {
                        let out = tab.basis[r];
                        tab.status[out] = Status::AtLower;
                        tab.beta[r] = tab.value(j);
                        tab.basis[r] = j;
                        tab.status[j] = Status::Basic;
                        tab.pivot(r, j);
                    }
                }
            }
        }

        let mut cost = self.cost.clone();
        cost.resize(cols, 0.0);
        tab.reset_costs(&cost);
        match tab.run(bland_after, max_steps, deadline)? {
            None => return Ok(LpOutcome::Interrupted),
            Some(Step::Unbounded) => return Ok(LpOutcome::Unbounded),
            _ => {}
        }

        let mut x: Vec<f64> = (0..n)
            .map(|j| match tab.status[j] {
                Status::AtLower => tab.lower[j],
                Status::AtUpper => tab.upper[j],
                Status::Basic => 0.0,
            })
            .collect();
        for r in 0..m {
            if tab.basis[r] < n {
                let j = tab.basis[r];
                x[j] = tab.beta[r].clamp(self.lower[j], self.upper[j]);
            }
        }
        let objective = x.iter().zip(&self.cost).map(|(v, c)| v * c).sum();
        Ok(LpOutcome::Optimal { x, objective })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(coeffs: &[f64], sense: Sense, rhs: f64) -> Row {
        Row { coeffs: coeffs.to_vec(), sense, rhs }
    }

    fn optimum(lp: &LinearProgram) -> (Vec<f64>, f64) {
        match lp.solve(50, None).unwrap() {
            LpOutcome::Optimal { x, objective } => (x, objective),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36.
        let lp = LinearProgram {
            cost: vec![-3.0, -5.0],
            lower: vec![0.0, 0.0],
            upper: vec![f64::INFINITY, f64::INFINITY],
            rows: vec![
                row(&[1.0, 0.0], Sense::Le, 4.0),
                row(&[0.0, 2.0], Sense::Le, 12.0),
                row(&[3.0, 2.0], Sense::Le, 18.0),
            ],
        };
        let (x, obj) = optimum(&lp);
        assert!((obj + 36.0).abs() < 1e-9);
        assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn bounded_variables_and_equality() {
        // min -x0 - 2x1 - 3x2, x in [0,1]^3, x0 + x1 + x2 = 2 -> x = (0,1,1).
        let lp = LinearProgram {
            cost: vec![-1.0, -2.0, -3.0],
            lower: vec![0.0; 3],
            upper: vec![1.0; 3],
            rows: vec![row(&[1.0, 1.0, 1.0], Sense::Eq, 2.0)],
        };
        let (x, obj) = optimum(&lp);
        assert!((obj + 5.0).abs() < 1e-9);
        assert!((x[0]).abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9 && (x[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ge_rows_need_phase_one() {
        // min x + y s.t. x + 2y >= 4, 3x + y >= 6 -> (1.6, 1.2), 2.8.
        let lp = LinearProgram {
            cost: vec![1.0, 1.0],
            lower: vec![0.0, 0.0],
            upper: vec![f64::INFINITY; 2],
            rows: vec![row(&[1.0, 2.0], Sense::Ge, 4.0), row(&[3.0, 1.0], Sense::Ge, 6.0)],
        };
        let (_, obj) = optimum(&lp);
        assert!((obj - 2.8).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let infeasible = LinearProgram {
            cost: vec![1.0],
            lower: vec![0.0],
            upper: vec![1.0],
            rows: vec![row(&[1.0], Sense::Ge, 2.0)],
        };
        assert_eq!(infeasible.solve(50, None).unwrap(), LpOutcome::Infeasible);

        let unbounded = LinearProgram {
            cost: vec![-1.0, 0.0],
            lower: vec![0.0, 0.0],
            upper: vec![f64::INFINITY; 2],
            rows: vec![row(&[1.0, -1.0], Sense::Le, 1.0)],
        };
        assert_eq!(unbounded.solve(50, None).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let lp = LinearProgram {
            cost: vec![1.0, 2.0],
            lower: vec![0.0, 0.0],
            upper: vec![5.0, 5.0],
            rows: vec![row(&[1.0, 1.0], Sense::Eq, 3.0), row(&[2.0, 2.0], Sense::Eq, 6.0)],
        };
        let (x, obj) = optimum(&lp);
        assert!((obj - 3.0).abs() < 1e-9);
        assert!((x[0] - 3.0).abs() < 1e-9);
    }
}
