//! Network simplex specialized to the bipartite transportation problem.
//!
//! Rows are every pool point (uniform integer supply), columns are an arbitrary list of pool
//! points with integer demands. Flows stay integral, so primal feasibility is exact; only the
//! potentials carry floating-point error.

use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct TreeArc {
    row: usize,
    col: usize,
    flow: i64,
}

/// Optimal basic solution of one transportation problem.
#[derive(Debug, Clone)]
pub(crate) struct BasicSolution {
    /// `(row, column, flow)` for every basic arc carrying positive flow.
    pub flows: Vec<(usize, usize, i64)>,
    /// Row potentials `u` with `u_i + v_j <= c_ij`, tight on basic arcs.
    pub row_potential: Vec<f64>,
    pub col_potential: Vec<f64>,
    pub pivots: usize,
}

pub(crate) struct Transportation<'a> {
    dist: &'a DistanceMatrix,
    /// Pool index backing each column.
    cols: &'a [usize],
    supply: i64,
    demand: &'a [i64],
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

struct Tree {
    m: usize,
    n: usize,
    arcs: Vec<TreeArc>,
    adj: Vec<Vec<usize>>,
    parent: Vec<usize>,
    parent_arc: Vec<usize>,
    depth: Vec<usize>,
    potential: Vec<f64>,
    stack: Vec<usize>,
}

const NONE: usize = usize::MAX;

impl Tree {
    fn new(m: usize, n: usize, arcs: Vec<TreeArc>) -> Self {
        let mut adj = vec![Vec::new(); m + n];
        for (slot, a) in arcs.iter().enumerate() {
            adj[a.row].push(slot);
            adj[m + a.col].push(slot);
        }
        Self {
            m,
            n,
            arcs,
            adj,
            parent: vec![NONE; m + n],
            parent_arc: vec![NONE; m + n],
            depth: vec![0; m + n],
            potential: vec![0.0; m + n],
            stack: Vec::with_capacity(m + n),
        }
    }

    fn other_end(&self, slot: usize, node: usize) -> usize {
        let a = &self.arcs[slot];
        if node < self.m {
            self.m + a.col
        } else {
            a.row
        }
    }

    /// Roots the tree at row 0 and computes parents, depths and potentials (`u_0 = 0`).
    fn build(&mut self, cost: &impl Fn(usize, usize) -> f64) -> Result<()> {
        self.parent.iter_mut().for_each(|p| *p = NONE);
        self.parent[0] = 0;
        self.parent_arc[0] = NONE;
        self.depth[0] = 0;
        self.potential[0] = 0.0;
        let visited = self.relabel_from(0, cost);
        if visited != self.m + self.n {
            return Err(Error::SolverFailure("basis is not spanning".into()));
        }
        Ok(())
    }

    /// Recomputes labels of every node below `start`, whose own labels must already be set.
    /// Returns the number of labelled nodes including `start`.
    fn relabel_from(&mut self, start: usize, cost: &impl Fn(usize, usize) -> f64) -> usize {
        self.stack.clear();
        self.stack.push(start);
        let mut visited = 1;
        while let Some(node) = self.stack.pop() {
            for k in 0..self.adj[node].len() {
                let slot = self.adj[node][k];
                if slot == self.parent_arc[node] {
                    continue;
                }
                let child = self.other_end(slot, node);
                let a = self.arcs[slot];
                self.parent[child] = node;
                self.parent_arc[child] = slot;
                self.depth[child] = self.depth[node] + 1;
                self.potential[child] = cost(a.row, a.col) - self.potential[node];
                self.stack.push(child);
                visited += 1;
            }
        }
        visited
    }

    fn replace(&mut self, leaving: usize, entering: TreeArc) {
        let old = self.arcs[leaving];
        for node in [old.row, self.m + old.col] {
            let pos = self.adj[node].iter().position(|&s| s == leaving).expect("arc in adjacency");
            self.adj[node].swap_remove(pos);
        }
        self.arcs[leaving] = entering;
        self.adj[entering.row].push(leaving);
        self.adj[self.m + entering.col].push(leaving);
    }
}

impl<'a> Transportation<'a> {
    pub fn new(dist: &'a DistanceMatrix, cols: &'a [usize], supply: i64, demand: &'a [i64]) -> Self {
        debug_assert_eq!(cols.len(), demand.len());
        debug_assert_eq!(supply * dist.n() as i64, demand.iter().sum::<i64>());
        Self { dist, cols, supply, demand }
    }

    #[inline]
    fn cost(&self, row: usize, col: usize) -> f64 {
        self.dist.get(row, self.cols[col])
    }

    /// Greedy least-cost allocation, completed to a spanning tree with zero-flow arcs.
    fn initial_basis(&self) -> Vec<TreeArc> {
        let m = self.dist.n();
        let n = self.cols.len();
        let positive: Vec<usize> = (0..n).filter(|&j| self.demand[j] > 0).collect();

        let mut candidates: Vec<(f64, usize, usize)> = Vec::with_capacity(m * positive.len());
        for i in 0..m {
            for &j in &positive {
                candidates.push((self.cost(i, j), i, j));
            }
        }
        candidates.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        let mut supply_left = vec![self.supply; m];
        let mut demand_left = self.demand.to_vec();
        let mut uf = UnionFind::new(m + n);
        let mut arcs = Vec::with_capacity(m + n - 1);
        for &(_, i, j) in &candidates {
            if supply_left[i] == 0 || demand_left[j] == 0 {
                continue;
            }
            let f = supply_left[i].min(demand_left[j]);
            supply_left[i] -= f;
            demand_left[j] -= f;
            uf.union(i, m + j);
            arcs.push(TreeArc { row: i, col: j, flow: f });
        }

        // Every row now touches a positive-demand column, so linking those columns to row 0's
        // component connects all rows.
        for &j in &positive {
            if uf.find(m + j) == uf.find(0) {
                continue;
            }
            let mut best: Option<(f64, usize)> = None;
            for i in 0..m {
                if uf.find(i) == uf.find(0) {
                    let c = self.cost(i, j);
                    if best.is_none_or(|(bc, _)| c < bc) {
                        best = Some((c, i));
                    }
                }
            }
            let (_, i) = best.expect("row 0 is in its own component");
            uf.union(i, m + j);
            arcs.push(TreeArc { row: i, col: j, flow: 0 });
        }
        for j in 0..n {
            if self.demand[j] == 0 {
                // Hang each empty column off the row for the same pool point (zero cost).
                let i = self.cols[j];
                uf.union(i, m + j);
                arcs.push(TreeArc { row: i, col: j, flow: 0 });
            }
        }
        arcs
    }

    pub fn solve(&self, max_pivots: usize) -> Result<BasicSolution> {
        let m = self.dist.n();
        let n = self.cols.len();
        let cost = |i: usize, j: usize| self.cost(i, j);
        let mut tree = Tree::new(m, n, self.initial_basis());
        if tree.arcs.len() != m + n - 1 {
            return Err(Error::SolverFailure(format!(
                "initial basis has {} arcs, expected {}",
                tree.arcs.len(),
                m + n - 1
            )));
        }
        tree.build(&cost)?;

        let n_arcs = m * n;
        let tol = 1e-11 * self.dist.max_entry().max(1.0);
        let block = ((n_arcs as f64).sqrt().ceil() as usize).max(16).min(n_arcs);
        let mut next = 0usize;
        let mut pivots = 0usize;
        let mut degenerate_run = 0usize;
        let bland_after = m + n;

        let reduced = |tree: &Tree, a: usize| {
            let (i, j) = (a / n, a % n);
            cost(i, j) - tree.potential[i] - tree.potential[m + j]
        };

        loop {
            let use_bland = degenerate_run > bland_after;
            let entering = if use_bland {
                (0..n_arcs).find(|&a| reduced(&tree, a) < -tol)
            } else {
                // Block pricing: best candidate within the first block that has one.
                let mut found = None;
                let mut scanned = 0;
                while scanned < n_arcs && found.is_none() {
                    let mut best = (-tol, NONE);
                    let len = block.min(n_arcs - scanned);
                    for k in 0..len {
                        let a = (next + k) % n_arcs;
                        let rc = reduced(&tree, a);
                        if rc < best.0 {
                            best = (rc, a);
                        }
                    }
                    next = (next + len) % n_arcs;
                    scanned += len;
                    if best.1 != NONE {
                        found = Some(best.1);
                    }
                }
                found
            };
            let Some(entering) = entering else { break };

            pivots += 1;
            if pivots > max_pivots {
                return Err(Error::SolverFailure(format!("pivot limit of {max_pivots} exceeded")));
            }
            let theta = self.pivot(&mut tree, entering / n, entering % n, &cost)?;
            degenerate_run = if theta == 0 { degenerate_run + 1 } else { 0 };
        }

        let flows = tree.arcs.iter().filter(|a| a.flow > 0).map(|a| (a.row, a.col, a.flow)).collect();
        Ok(BasicSolution {
            flows,
            row_potential: tree.potential[..m].to_vec(),
            col_potential: tree.potential[m..].to_vec(),
            pivots,
        })
    }

    /// Pushes flow around the cycle closed by arc `(row, col)`; returns the step length.
    ///
    /// The leaving arc is the first blocking arc met when walking the cycle from its apex in the
    /// direction of the entering arc. This keeps the tree strongly feasible with respect to row 0
    /// (every zero-flow arc points away from the root), which rules out cycling.
    fn pivot(&self, tree: &mut Tree, row: usize, col: usize, cost: &impl Fn(usize, usize) -> f64) -> Result<i64> {
        let m = tree.m;
        // `down`: arcs from the apex to `row`, collected bottom-up; traversed parent -> child,
        // so they gain flow when the parent is a row (child is a column).
        // `up`: arcs from `col` to the apex, traversed child -> parent; gain flow when the child
        // is a row.
        let mut down: Vec<(usize, bool)> = Vec::new();
        let mut up: Vec<(usize, bool)> = Vec::new();
        let (mut a, mut b) = (row, m + col);
        while a != b {
            if tree.depth[a] >= tree.depth[b] {
                down.push((tree.parent_arc[a], a >= m));
                a = tree.parent[a];
            } else {
                up.push((tree.parent_arc[b], b < m));
                b = tree.parent[b];
            }
        }
        let on_row_side = down.len();
        let cycle: Vec<(usize, bool)> = down.into_iter().rev().chain(up).collect();

        let mut theta = i64::MAX;
        let mut leaving = NONE;
        let mut leaving_pos = 0;
        for (pos, &(slot, increases)) in cycle.iter().enumerate() {
            if !increases && tree.arcs[slot].flow < theta {
                theta = tree.arcs[slot].flow;
                leaving = slot;
                leaving_pos = pos;
            }
        }
        if leaving == NONE {
            return Err(Error::SolverFailure("unbounded pivot cycle".into()));
        }
        for &(slot, increases) in &cycle {
            if increases {
                tree.arcs[slot].flow += theta;
            } else {
                tree.arcs[slot].flow -= theta;
            }
        }
        tree.replace(leaving, TreeArc { row, col, flow: theta });

        // Removing the leaving arc detaches the subtree holding whichever endpoint of the
        // entering arc sat below it; that subtree now hangs from the entering arc.
        let (inner, outer) = if leaving_pos < on_row_side { (row, m + col) } else { (m + col, row) };
        tree.parent[inner] = outer;
        tree.parent_arc[inner] = leaving;
        tree.depth[inner] = tree.depth[outer] + 1;
        tree.potential[inner] = cost(row, col) - tree.potential[outer];
        tree.relabel_from(inner, cost);
        Ok(theta)
    }
}
