use alloc::vec;
use alloc::vec::Vec;

use crate::bnb::compute_locks;
use crate::instance::{MilpInstance, Sense};
use crate::num;
use crate::simplex::{ColStatus, LpSolution, LpStatus};

use super::GraphError;

pub const VAR_FEATURES: usize = 14;
pub const CONS_FEATURES: usize = 8;

/// Window used for integer variables without a finite lower bound.
const UNBOUNDED_HALF_WIDTH: i64 = 1 << 15;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub row: usize,
    pub col: usize,
    /// `A_ij / ||A_i||`.
    pub coef: f64,
}

/// Variable and constraint nodes of one instance, joined by one edge per
/// nonzero coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteGraph {
    pub num_vars: usize,
    pub num_cons: usize,
    /// Row-major `num_vars x VAR_FEATURES`.
    pub var_feats: Vec<f64>,
    /// Row-major `num_cons x CONS_FEATURES`.
    pub cons_feats: Vec<f64>,
    pub edges: Vec<Edge>,
    /// Divable integer variables the model predicts, ascending.
    pub candidates: Vec<usize>,
    /// Integer domain `[lo, hi]` of each candidate.
    pub domains: Vec<(i64, i64)>,
}

impl BipartiteGraph {
    pub fn var_row(&self, j: usize) -> &[f64] {
        &self.var_feats[j * VAR_FEATURES..(j + 1) * VAR_FEATURES]
    }

    pub fn cons_row(&self, i: usize) -> &[f64] {
        &self.cons_feats[i * CONS_FEATURES..(i + 1) * CONS_FEATURES]
    }

    pub fn var_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.num_vars];
        for e in &self.edges {
            d[e.col] += 1;
        }
        d
    }

    pub fn cons_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.num_cons];
        for e in &self.edges {
            d[e.row] += 1;
        }
        d
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        let shapes_ok = self.var_feats.len() == self.num_vars * VAR_FEATURES
            && self.cons_feats.len() == self.num_cons * CONS_FEATURES
            && self.domains.len() == self.candidates.len()
            && self.candidates.iter().all(|&j| j < self.num_vars)
            && self.edges.iter().all(|e| e.row < self.num_cons && e.col < self.num_vars);
        if !shapes_ok {
            return Err(GraphError::ShapeMismatch);
        }
        if self.var_feats.iter().chain(&self.cons_feats).any(|v| !v.is_finite()) {
            return Err(GraphError::NonFiniteFeature);
        }
        Ok(())
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn sign(v: f64, tol: f64) -> f64 {
    if v > tol {
        1.0
    } else if v < -tol {
        -1.0
    } else {
        0.0
    }
}

/// Integer domain of variable `j`, with a fixed-size window standing in for
/// infinite bounds.
pub fn integer_domain(inst: &MilpInstance, j: usize, lp_value: f64) -> (i64, i64) {
    let lo_finite = inst.lower[j].is_finite();
    let hi_finite = inst.upper[j].is_finite();
    let lo = if lo_finite {
        num::ceil(inst.lower[j] - 1e-9) as i64
    } else if hi_finite {
        num::floor(inst.upper[j] + 1e-9) as i64 - 2 * UNBOUNDED_HALF_WIDTH + 1
    } else {
        num::round(lp_value) as i64 - UNBOUNDED_HALF_WIDTH
    };
    let hi = if hi_finite { num::floor(inst.upper[j] + 1e-9) as i64 } else { lo + 2 * UNBOUNDED_HALF_WIDTH - 1 };
    (lo, hi)
}

/// Builds the graph from the instance and its optimal root LP solution.
pub fn extract_graph(inst: &MilpInstance, root: &LpSolution) -> Result<BipartiteGraph, GraphError> {
    if root.status != LpStatus::Optimal {
        return Err(GraphError::RootNotOptimal);
    }
    let duals = root.duals.as_ref().ok_or(GraphError::RootNotOptimal)?;
    let n = inst.num_vars();
    let m = inst.num_rows();
    let x = &root.x[..n];
    let reduced = duals.reduced_costs();
    let locks = compute_locks(inst);
    let degrees = inst.column_degrees();
    let c_scale = inst.objective.iter().fold(0.0f64, |a, c| a.max(c.abs()));

    let mut var_feats = Vec::with_capacity(n * VAR_FEATURES);
    for j in 0..n {
        let (lo, hi) = (inst.lower[j], inst.upper[j]);
        let is_int = inst.is_integer(j);
        let value = if lo.is_finite() && hi.is_finite() && hi > lo {
            (x[j] - lo) / (hi - lo)
        } else {
            x[j] / (1.0 + x[j].abs())
        };
        let deg = degrees[j].max(1) as f64;
        var_feats.extend_from_slice(&[
            if c_scale > 0.0 { inst.objective[j] / c_scale } else { 0.0 },
            flag(is_int),
            flag(is_int && lo == 0.0 && hi == 1.0),
            flag(lo.is_finite()),
            flag(hi.is_finite()),
            value,
            if is_int { num::fractionality(x[j]) } else { 0.0 },
            sign(reduced[j], 1e-9),
            flag(lo.is_finite() && (x[j] - lo).abs() <= 1e-9),
            flag(hi.is_finite() && (x[j] - hi).abs() <= 1e-9),
            locks[j].up as f64 / deg,
            locks[j].down as f64 / deg,
            degrees[j] as f64 / m.max(1) as f64,
            flag(root.basis.status(j) == ColStatus::Basic),
        ]);
    }

    let norms: Vec<f64> = inst.rows.iter().map(|r| num::sqrt(r.iter().map(|&(_, a)| a * a).sum())).collect();
    let max_norm = norms.iter().fold(0.0f64, |a, &b| a.max(b));
    let y_scale = duals.y_b.iter().fold(0.0f64, |a, y| a.max(y.abs()));
    let mut cons_feats = Vec::with_capacity(m * CONS_FEATURES);
    let mut edges = Vec::with_capacity(inst.nnz());
    for (i, row) in inst.rows.iter().enumerate() {
        let norm = norms[i];
        let scaled = |v: f64| if norm > 0.0 { v / norm } else { 0.0 };
        let activity = inst.row_activity(i, x);
        cons_feats.extend_from_slice(&[
            flag(inst.sense[i] == Sense::Le),
            flag(inst.sense[i] == Sense::Ge),
            flag(inst.sense[i] == Sense::Eq),
            scaled(inst.rhs[i]),
            if max_norm > 0.0 { norm / max_norm } else { 0.0 },
            if y_scale > 0.0 { duals.y_b[i] / y_scale } else { 0.0 },
            scaled(inst.rhs[i] - activity),
            row.len() as f64 / n.max(1) as f64,
        ]);
        for &(j, a) in row {
            if a != 0.0 {
                edges.push(Edge { row: i, col: j, coef: scaled(a) });
            }
        }
    }

    let candidates: Vec<usize> =
        inst.candidates().into_iter().filter(|&j| inst.is_integer(j) && inst.lower[j] < inst.upper[j]).collect();
    let domains = candidates.iter().map(|&j| integer_domain(inst, j, x[j])).collect();
    let g = BipartiteGraph { num_vars: n, num_cons: m, var_feats, cons_feats, edges, candidates, domains };
    g.validate()?;
    Ok(g)
}
