//! Bounded-variable primal simplex on [`StandardLp`].
//!
//! The solver keeps one logical column per row (a unit column with bounds
//! `[0, 0]`) so that a cold start always has an identity basis and a warm
//! basis that went singular can be repaired. Phase 1 minimizes the sum of
//! basic bound violations with a composite cost that is rebuilt each
//! iteration, so warm starts after a bound change need no artificial
//! problem. Duals follow the convention `A'y_b + y_lb + y_ub = c` with
//! `y_lb >= 0` and `y_ub <= 0`, each bound dual nonzero only for a nonbasic
//! column sitting at that bound.

mod lu;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::standard::{is_infinite, StandardLp};
use lu::LuFactor;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplexOptions {
    pub feas_tol: f64,
    pub opt_tol: f64,
    /// Reduced-cost tolerance of the cleanup pass run after the first
    /// optimality test succeeds.
    pub polish_tol: f64,
    pub pivot_tol: f64,
    pub refactor_every: usize,
    /// Consecutive non-improving pivots before switching to Bland's rule.
    pub bland_after: usize,
    pub iter_limit: Option<usize>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            feas_tol: 1e-7,
            opt_tol: 1e-7,
            polish_tol: 1e-10,
            pivot_tol: 1e-9,
            refactor_every: 50,
            bland_after: 1000,
            iter_limit: None,
        }
    }
}

impl SimplexOptions {
    pub fn with_iter_limit(mut self, limit: Option<usize>) -> Self {
        self.iter_limit = limit;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ColStatus {
    Lower,
    Upper,
    Basic,
    /// Nonbasic free column held at zero.
    Free,
}

/// Basis over the structural columns followed by one logical per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    status: Vec<ColStatus>,
    basic: Vec<usize>,
    num_structural: usize,
}

impl Basis {
    pub fn num_structural(&self) -> usize {
        self.num_structural
    }

    pub fn status(&self, j: usize) -> ColStatus {
        self.status[j]
    }

    /// Basic columns in basis order; indices `>= num_structural` are row
    /// logicals.
    pub fn basic(&self) -> &[usize] {
        &self.basic
    }

    /// Structural columns at their lower bound (free nonbasic columns included).
    pub fn set_l(&self) -> Vec<usize> {
        self.filter(|s| matches!(s, ColStatus::Lower | ColStatus::Free))
    }

    pub fn set_b(&self) -> Vec<usize> {
        self.filter(|s| s == ColStatus::Basic)
    }

    pub fn set_u(&self) -> Vec<usize> {
        self.filter(|s| s == ColStatus::Upper)
    }

    fn filter(&self, pred: impl Fn(ColStatus) -> bool) -> Vec<usize> {
        (0..self.num_structural).filter(|&j| pred(self.status[j])).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualValues {
    pub y_b: Vec<f64>,
    pub y_lb: Vec<f64>,
    pub y_ub: Vec<f64>,
}

impl DualValues {
    /// `y_b'b + y_lb'lo + y_ub'hi`, skipping sentinel bounds.
    pub fn objective(&self, rhs: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
        let mut z: f64 = self.y_b.iter().zip(rhs).map(|(y, b)| y * b).sum();
        for j in 0..self.y_lb.len() {
            if !is_infinite(lower[j]) {
                z += self.y_lb[j] * lower[j];
            }
            if !is_infinite(upper[j]) {
                z += self.y_ub[j] * upper[j];
            }
        }
        z
    }

    /// Reduced costs `y_lb + y_ub`.
    pub fn reduced_costs(&self) -> Vec<f64> {
        self.y_lb.iter().zip(&self.y_ub).map(|(a, b)| a + b).collect()
    }

    /// Largest entry of `|A'y_b + y_lb + y_ub - c|`.
    pub fn stationarity_residual(&self, lp: &StandardLp) -> f64 {
        (0..lp.num_cols())
            .map(|j| (lp.matrix.dot_column(j, &self.y_b) + self.y_lb[j] + self.y_ub[j] - lp.objective[j]).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural values; empty for `Infeasible` and `Unbounded`.
    pub x: Vec<f64>,
    pub objective: f64,
    pub duals: Option<DualValues>,
    pub basis: Basis,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpError {
    SingularBasis,
    NumericalBreakdown,
    Dimension,
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::SingularBasis => f.write_str("basis refactorization failed after repair"),
            LpError::NumericalBreakdown => f.write_str("simplex lost feasibility beyond tolerance"),
            LpError::Dimension => f.write_str("bounds or warm basis do not match the LP"),
        }
    }
}

/// Solves `lp` under its own bounds.
pub fn solve_lp(lp: &StandardLp, warm: Option<&Basis>, opts: &SimplexOptions) -> Result<LpSolution, LpError> {
    solve_lp_bounded(lp, &lp.lower, &lp.upper, warm, opts)
}

/// Solves `lp` with its bounds replaced by `lower` / `upper`.
pub fn solve_lp_bounded(
    lp: &StandardLp,
    lower: &[f64],
    upper: &[f64],
    warm: Option<&Basis>,
    opts: &SimplexOptions,
) -> Result<LpSolution, LpError> {
    let n = lp.num_cols();
    if lower.len() != n || upper.len() != n {
        return Err(LpError::Dimension);
    }
    if lower.iter().zip(upper).any(|(l, u)| l > u) {
        // Crossed bounds: trivially infeasible.
        let basis = cold_basis(n, lp.num_rows(), lower, upper);
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            x: Vec::new(),
            objective: f64::INFINITY,
            duals: None,
            basis,
            iterations: 0,
        });
    }
    let mut solver = Solver::new(lp, lower, upper, warm, *opts)?;
    solver.run()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlacknessCheck {
    pub holds: bool,
    pub max_violation: f64,
}

/// Checks `(x - lo) . y_lb = 0` and `(x - hi) . y_ub = 0` elementwise under
/// the LP's own bounds.
pub fn check_complementary_slackness(x: &[f64], duals: &DualValues, lp: &StandardLp, tol: f64) -> SlacknessCheck {
    check_complementary_slackness_bounded(x, duals, &lp.lower, &lp.upper, tol)
}

pub fn check_complementary_slackness_bounded(
    x: &[f64],
    duals: &DualValues,
    lower: &[f64],
    upper: &[f64],
    tol: f64,
) -> SlacknessCheck {
    let mut worst: f64 = 0.0;
    for j in 0..x.len() {
        if !is_infinite(lower[j]) {
            worst = worst.max(((x[j] - lower[j]) * duals.y_lb[j]).abs());
        }
        if !is_infinite(upper[j]) {
            worst = worst.max(((x[j] - upper[j]) * duals.y_ub[j]).abs());
        }
    }
    SlacknessCheck { holds: worst <= tol, max_violation: worst }
}

fn default_nonbasic(lower: f64, upper: f64) -> ColStatus {
    if !is_infinite(lower) {
        ColStatus::Lower
    } else if !is_infinite(upper) {
        ColStatus::Upper
    } else {
        ColStatus::Free
    }
}

fn cold_basis(n: usize, m: usize, lower: &[f64], upper: &[f64]) -> Basis {
    let mut status: Vec<ColStatus> = (0..n).map(|j| default_nonbasic(lower[j], upper[j])).collect();
    status.extend(core::iter::repeat(ColStatus::Basic).take(m));
    Basis { status, basic: (n..n + m).collect(), num_structural: n }
}

struct Eta {
    row: usize,
    alpha: Vec<f64>,
}

enum Step {
    Flip,
    Leave { pos: usize, to: ColStatus },
}

struct Solver<'a> {
    lp: &'a StandardLp,
    n: usize,
    m: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    status: Vec<ColStatus>,
    basic: Vec<usize>,
    x: Vec<f64>,
    lu: LuFactor,
    etas: Vec<Eta>,
    opts: SimplexOptions,
    iterations: usize,
    col_buf: Vec<f64>,
}

impl<'a> Solver<'a> {
    fn new(
        lp: &'a StandardLp,
        lower: &[f64],
        upper: &[f64],
        warm: Option<&Basis>,
        opts: SimplexOptions,
    ) -> Result<Self, LpError> {
        let n = lp.num_cols();
        let m = lp.num_rows();
        let mut lo = lower.to_vec();
        let mut hi = upper.to_vec();
        lo.extend(core::iter::repeat(0.0).take(m));
        hi.extend(core::iter::repeat(0.0).take(m));
        let mut cost = lp.objective.clone();
        cost.extend(core::iter::repeat(0.0).take(m));

        let basis = match warm {
            Some(b) if b.num_structural == n && b.status.len() == n + m && b.basic.len() == m => b.clone(),
            Some(_) => return Err(LpError::Dimension),
            None => cold_basis(n, m, lower, upper),
        };
        let mut status = basis.status;
        for j in 0..n + m {
            if status[j] != ColStatus::Basic {
                status[j] = match status[j] {
                    ColStatus::Upper if !is_infinite(hi[j]) => ColStatus::Upper,
                    ColStatus::Lower if !is_infinite(lo[j]) => ColStatus::Lower,
                    _ => default_nonbasic(lo[j], hi[j]),
                };
            }
        }
        let mut solver = Solver {
            lp,
            n,
            m,
            lower: lo,
            upper: hi,
            cost,
            status,
            basic: basis.basic,
            x: vec![0.0; n + m],
            lu: LuFactor::identity(m),
            etas: Vec::new(),
            opts,
            iterations: 0,
            col_buf: vec![0.0; m],
        };
        solver.refactor()?;
        solver.compute_primal();
        Ok(solver)
    }

    fn load_column(&self, j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        if j < self.n {
            for (i, a) in self.lp.matrix.column(j) {
                out[i] = a;
            }
        } else {
            out[j - self.n] = 1.0;
        }
    }

    fn column_dot(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            self.lp.matrix.dot_column(j, y)
        } else {
            y[j - self.n]
        }
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        self.etas.clear();
        for _ in 0..=self.m {
            let basic = &self.basic;
            let lp = self.lp;
            let n = self.n;
            let res = LuFactor::factor(
                self.m,
                |k, col| {
                    let j = basic[k];
                    if j < n {
                        for (i, a) in lp.matrix.column(j) {
                            col[i] = a;
                        }
                    } else {
                        col[j - n] = 1.0;
                    }
                },
                self.opts.pivot_tol,
            );
            match res {
                Ok(lu) => {
                    self.lu = lu;
                    return Ok(());
                }
                Err(def) => {
                    let row = def
                        .free_rows
                        .iter()
                        .copied()
                        .find(|&r| self.status[self.n + r] != ColStatus::Basic)
                        .ok_or(LpError::SingularBasis)?;
                    let out = self.basic[def.position];
                    self.status[out] = self.nearest_bound_status(out);
                    self.basic[def.position] = self.n + row;
                    self.status[self.n + row] = ColStatus::Basic;
                }
            }
        }
        Err(LpError::SingularBasis)
    }

    fn nearest_bound_status(&self, j: usize) -> ColStatus {
        let (lo, hi, v) = (self.lower[j], self.upper[j], self.x[j]);
        match (is_infinite(lo), is_infinite(hi)) {
            (false, false) => {
                if (v - lo).abs() <= (hi - v).abs() {
                    ColStatus::Lower
                } else {
                    ColStatus::Upper
                }
            }
            _ => default_nonbasic(lo, hi),
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.status[j] {
            ColStatus::Lower => self.lower[j],
            ColStatus::Upper => self.upper[j],
            _ => 0.0,
        }
    }

    fn compute_primal(&mut self) {
        let mut r = self.lp.rhs.clone();
        for j in 0..self.n + self.m {
            if self.status[j] == ColStatus::Basic {
                continue;
            }
            let v = self.nonbasic_value(j);
            self.x[j] = v;
            if v != 0.0 {
                if j < self.n {
                    for (i, a) in self.lp.matrix.column(j) {
                        r[i] -= a * v;
                    }
                } else {
                    r[j - self.n] -= v;
                }
            }
        }
        self.ftran_vec(&mut r);
        for (k, &j) in self.basic.iter().enumerate() {
            self.x[j] = r[k];
        }
    }

    fn ftran_vec(&self, v: &mut [f64]) {
        self.lu.solve(v);
        for eta in &self.etas {
            let pivot = v[eta.row] / eta.alpha[eta.row];
            if pivot != 0.0 {
                for (i, a) in eta.alpha.iter().enumerate() {
                    if i != eta.row {
                        v[i] -= a * pivot;
                    }
                }
            }
            v[eta.row] = pivot;
        }
    }

    fn btran_vec(&self, v: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let mut s = v[eta.row];
            for (i, a) in eta.alpha.iter().enumerate() {
                if i != eta.row {
                    s -= a * v[i];
                }
            }
            v[eta.row] = s / eta.alpha[eta.row];
        }
        self.lu.solve_transpose(v);
    }

    fn infeasibility(&self, k: usize) -> f64 {
        let j = self.basic[k];
        let v = self.x[j];
        if v < self.lower[j] - self.opts.feas_tol {
            v - self.lower[j]
        } else if v > self.upper[j] + self.opts.feas_tol {
            v - self.upper[j]
        } else {
            0.0
        }
    }

    fn is_primal_feasible(&self) -> bool {
        (0..self.m).all(|k| self.infeasibility(k) == 0.0)
    }

    /// Duals of the current phase: composite infeasibility costs in phase 1,
    /// true costs in phase 2.
    fn duals(&self, phase1: bool) -> Vec<f64> {
        let mut y: Vec<f64> = (0..self.m)
            .map(|k| {
                if phase1 {
                    let inf = self.infeasibility(k);
                    if inf < 0.0 {
                        -1.0
                    } else if inf > 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    self.cost[self.basic[k]]
                }
            })
            .collect();
        self.btran_vec(&mut y);
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64], phase1: bool) -> f64 {
        let c = if phase1 { 0.0 } else { self.cost[j] };
        c - self.column_dot(j, y)
    }

    /// Entering column and its reduced cost, or `None` at optimality.
    fn price(&self, y: &[f64], phase1: bool, tol: f64, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.n {
            let st = self.status[j];
            if st == ColStatus::Basic || self.lower[j] == self.upper[j] {
                continue;
            }
            let d = self.reduced_cost(j, y, phase1);
            let gain = match st {
                ColStatus::Lower => -d,
                ColStatus::Upper => d,
                ColStatus::Free => d.abs(),
                ColStatus::Basic => unreachable!(),
            };
            if gain > tol {
                if bland {
                    return Some((j, d));
                }
                if best.map_or(true, |(_, bd)| gain > bd.abs()) {
                    best = Some((j, d));
                }
            }
        }
        best
    }

    fn ratio_test(&self, alpha: &[f64], dir: f64, q: usize, bland: bool) -> (f64, Step) {
        let tol = self.opts.feas_tol;
        // First pass: bound on the step with bounds relaxed by tol (Harris).
        let mut t_relaxed = f64::INFINITY;
        let mut limits: Vec<(usize, f64, f64, ColStatus)> = Vec::new();
        for k in 0..self.m {
            let a = alpha[k];
            if a.abs() <= self.opts.pivot_tol {
                continue;
            }
            let j = self.basic[k];
            let delta = -dir * a;
            let (v, lo, hi) = (self.x[j], self.lower[j], self.upper[j]);
            let below = v < lo - tol;
            let above = v > hi + tol;
            let (exact, relaxed, to) = if delta < 0.0 {
                if above {
                    ((v - hi) / -delta, (v - hi + tol) / -delta, ColStatus::Upper)
                } else if below || is_infinite(lo) {
                    continue;
                } else {
                    ((v - lo).max(0.0) / -delta, (v - lo + tol) / -delta, ColStatus::Lower)
                }
            } else if below {
                ((lo - v) / delta, (lo - v + tol) / delta, ColStatus::Lower)
            } else if above || is_infinite(hi) {
                continue;
            } else {
                ((hi - v).max(0.0) / delta, (hi - v + tol) / delta, ColStatus::Upper)
            };
            t_relaxed = t_relaxed.min(relaxed);
            limits.push((k, exact, a.abs(), to));
        }
        let flip = if is_infinite(self.lower[q]) || is_infinite(self.upper[q]) {
            f64::INFINITY
        } else {
            self.upper[q] - self.lower[q]
        };
        let chosen = if bland {
            let t_min = limits.iter().map(|l| l.1).fold(f64::INFINITY, f64::min);
            limits.iter().filter(|l| l.1 <= t_min + 1e-12).min_by_key(|l| self.basic[l.0]).copied()
        } else {
            limits
                .iter()
                .filter(|l| l.1 <= t_relaxed)
                .max_by(|a, b| a.2.partial_cmp(&b.2).unwrap().then(b.0.cmp(&a.0)))
                .copied()
        };
        match chosen {
            Some((k, t, _, to)) if t < flip => (t.max(0.0), Step::Leave { pos: k, to }),
            _ => (flip, Step::Flip),
        }
    }

    fn snapshot_basis(&self) -> Basis {
        Basis { status: self.status.clone(), basic: self.basic.clone(), num_structural: self.n }
    }

    fn finish(&self, status: LpStatus) -> LpSolution {
        let basis = self.snapshot_basis();
        match status {
            LpStatus::Optimal => {
                let y = self.duals(false);
                let mut y_lb = vec![0.0; self.n];
                let mut y_ub = vec![0.0; self.n];
                let mut x = self.x[..self.n].to_vec();
                for j in 0..self.n {
                    let st = self.status[j];
                    if st == ColStatus::Basic {
                        continue;
                    }
                    x[j] = self.nonbasic_value(j);
                    let d = self.reduced_cost(j, &y, false);
                    if self.lower[j] == self.upper[j] {
                        y_lb[j] = d.max(0.0);
                        y_ub[j] = d.min(0.0);
                    } else if st == ColStatus::Lower {
                        y_lb[j] = d.max(0.0);
                    } else if st == ColStatus::Upper {
                        y_ub[j] = d.min(0.0);
                    }
                }
                let objective = self.lp.objective_value(&x);
                LpSolution {
                    status,
                    x,
                    objective,
                    duals: Some(DualValues { y_b: y, y_lb, y_ub }),
                    basis,
                    iterations: self.iterations,
                }
            }
            LpStatus::IterationLimit => {
                let x = self.x[..self.n].to_vec();
                let objective = self.lp.objective_value(&x);
                LpSolution { status, x, objective, duals: None, basis, iterations: self.iterations }
            }
            LpStatus::Infeasible | LpStatus::Unbounded => LpSolution {
                status,
                x: Vec::new(),
                objective: if status == LpStatus::Infeasible { f64::INFINITY } else { f64::NEG_INFINITY },
                duals: None,
                basis,
                iterations: self.iterations,
            },
        }
    }

    fn run(&mut self) -> Result<LpSolution, LpError> {
        let hard_cap = 200 * (self.n + self.m) + 20_000;
        let mut stalled = 0usize;
        let mut bland = self.opts.bland_after == 0;
        let mut polishing = false;
        let mut polish_budget = 2 * self.m + 10;
        let mut alpha = vec![0.0; self.m];
        loop {
            if let Some(limit) = self.opts.iter_limit {
                if self.iterations >= limit {
                    return Ok(self.finish(LpStatus::IterationLimit));
                }
            }
            if self.iterations >= hard_cap {
                return Err(LpError::NumericalBreakdown);
            }
            let phase1 = !self.is_primal_feasible();
            let y = self.duals(phase1);
            let tol = if polishing { self.opts.polish_tol } else { self.opts.opt_tol };
            let Some((q, d)) = self.price(&y, phase1, tol, bland) else {
                // Verify on a fresh factorization before concluding.
                if !self.etas.is_empty() {
                    self.refactor()?;
                    self.compute_primal();
                    continue;
                }
                if phase1 {
                    return Ok(self.finish(LpStatus::Infeasible));
                }
                if !polishing {
                    polishing = true;
                    continue;
                }
                return Ok(self.finish(LpStatus::Optimal));
            };
            if polishing {
                if polish_budget == 0 {
                    return Ok(self.finish(LpStatus::Optimal));
                }
                polish_budget -= 1;
            }
            let dir = match self.status[q] {
                ColStatus::Lower => 1.0,
                ColStatus::Upper => -1.0,
                _ => {
                    if d < 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };
            let mut col = core::mem::take(&mut self.col_buf);
            self.load_column(q, &mut col);
            alpha.copy_from_slice(&col);
            self.col_buf = col;
            self.ftran_vec(&mut alpha);
            let (t, step) = self.ratio_test(&alpha, dir, q, bland);
            if t == f64::INFINITY {
                if phase1 {
                    return Err(LpError::NumericalBreakdown);
                }
                return Ok(self.finish(LpStatus::Unbounded));
            }
            self.iterations += 1;
            if t * d.abs() > 1e-12 {
                stalled = 0;
                bland = self.opts.bland_after == 0;
            } else {
                stalled += 1;
                if stalled >= self.opts.bland_after {
                    bland = true;
                }
            }
            let entering_value = self.x[q] + dir * t;
            for k in 0..self.m {
                let j = self.basic[k];
                self.x[j] -= dir * t * alpha[k];
            }
            match step {
                Step::Flip => {
                    self.status[q] = if dir > 0.0 { ColStatus::Upper } else { ColStatus::Lower };
                    self.x[q] = self.nonbasic_value(q);
                }
                Step::Leave { pos, to } => {
                    let out = self.basic[pos];
                    self.status[out] = to;
                    self.x[out] = self.nonbasic_value(out);
                    self.basic[pos] = q;
                    self.status[q] = ColStatus::Basic;
                    self.x[q] = entering_value;
                    self.etas.push(Eta { row: pos, alpha: alpha.clone() });
                    if self.etas.len() >= self.opts.refactor_every {
                        self.refactor()?;
                        self.compute_primal();
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests;
