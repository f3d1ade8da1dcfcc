//! Bounded standard form `min c'x  s.t.  Ax = b,  lo <= x <= hi`.
//!
//! Every `<=` row gains a slack `+s`, every `>=` row a surplus `-s`, both with
//! bounds `[0, inf)`. Equality rows are left alone. Infinite bounds are stored
//! as the sentinel [`INF_BOUND`].

use alloc::vec;
use alloc::vec::Vec;

use crate::instance::{MilpInstance, Sense};

/// Magnitude at or above which a bound is treated as infinite.
pub const INF_BOUND: f64 = 1e20;

#[inline]
pub fn is_infinite(bound: f64) -> bool {
    bound.abs() >= INF_BOUND
}

fn to_sentinel(v: f64) -> f64 {
    if v >= INF_BOUND {
        INF_BOUND
    } else if v <= -INF_BOUND {
        -INF_BOUND
    } else {
        v
    }
}

/// Where a standard-form column came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnOrigin {
    Var(usize),
    Slack(usize),
}

/// Compressed sparse column matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CscMatrix {
    pub nrows: usize,
    pub col_start: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CscMatrix {
    pub fn ncols(&self) -> usize {
        self.col_start.len() - 1
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_start[j]..self.col_start[j + 1];
        self.row_idx[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    /// `y' A_j`.
    pub fn dot_column(&self, j: usize, y: &[f64]) -> f64 {
        self.column(j).map(|(i, a)| a * y[i]).sum()
    }

    /// `A x`.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (i, a) in self.column(j) {
                    out[i] += a * xj;
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StandardLp {
    pub objective: Vec<f64>,
    pub matrix: CscMatrix,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Index of the first slack column; original variables come first.
    pub slack_start: usize,
    pub origin: Vec<ColumnOrigin>,
}

impl StandardLp {
    pub fn num_cols(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest bound or row violation of `x` under the given bounds.
    pub fn max_violation(&self, x: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.num_cols() {
            worst = worst.max(lower[j] - x[j]).max(x[j] - upper[j]);
        }
        let ax = self.matrix.mul(x);
        for (a, b) in ax.iter().zip(&self.rhs) {
            worst = worst.max((a - b).abs());
        }
        worst
    }

    /// Extends a point over the original variables with the slack values that
    /// make every row an equality.
    pub fn extend_point(&self, inst: &MilpInstance, x: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.num_cols()];
        full[..self.slack_start].copy_from_slice(&x[..self.slack_start]);
        for (col, origin) in self.origin.iter().enumerate().skip(self.slack_start) {
            if let ColumnOrigin::Slack(i) = *origin {
                let act = inst.row_activity(i, x);
                full[col] = match inst.sense[i] {
                    Sense::Le => inst.rhs[i] - act,
                    Sense::Ge => act - inst.rhs[i],
                    Sense::Eq => 0.0,
                };
            }
        }
        full
    }
}

/// Converts an instance to bounded standard form.
pub fn to_standard_form(inst: &MilpInstance) -> StandardLp {
    let n = inst.num_vars();
    let m = inst.num_rows();
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, row) in inst.rows.iter().enumerate() {
        for &(j, a) in row {
            if a != 0.0 {
                cols[j].push((i, a));
            }
        }
    }
    let mut objective = inst.objective.clone();
    let mut lower: Vec<f64> = inst.lower.iter().copied().map(to_sentinel).collect();
    let mut upper: Vec<f64> = inst.upper.iter().copied().map(to_sentinel).collect();
    let mut origin: Vec<ColumnOrigin> = (0..n).map(ColumnOrigin::Var).collect();
    for i in 0..m {
        let coef = match inst.sense[i] {
            Sense::Le => 1.0,
            Sense::Ge => -1.0,
            Sense::Eq => continue,
        };
        cols.push(vec![(i, coef)]);
        objective.push(0.0);
        lower.push(0.0);
        upper.push(INF_BOUND);
        origin.push(ColumnOrigin::Slack(i));
    }
    let mut col_start = Vec::with_capacity(cols.len() + 1);
    let mut row_idx = Vec::new();
    let mut vals = Vec::new();
    col_start.push(0);
    for col in &cols {
        for &(i, a) in col {
            row_idx.push(i);
            vals.push(a);
        }
        col_start.push(row_idx.len());
    }
    StandardLp {
        objective,
        matrix: CscMatrix { nrows: m, col_start, row_idx, vals },
        rhs: inst.rhs.clone(),
        lower,
        upper,
        slack_start: n,
        origin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn le_row_gains_nonnegative_slack() {
        let mut inst = MilpInstance::new("le", 2);
        inst.add_row(vec![(0, 1.0), (1, 1.0)], Sense::Le, 3.0);
        let lp = to_standard_form(&inst);
        assert_eq!(lp.num_cols(), 3);
        assert_eq!(lp.origin[2], ColumnOrigin::Slack(0));
        assert_eq!(lp.matrix.column(2).collect::<Vec<_>>(), vec![(0, 1.0)]);
        assert_eq!((lp.lower[2], lp.upper[2]), (0.0, INF_BOUND));
        assert_eq!(lp.objective[2], 0.0);
    }

    #[test]
    fn equality_rows_add_no_slack() {
        let mut inst = MilpInstance::new("eq", 3);
        inst.add_row(vec![(0, 1.0), (2, -2.0)], Sense::Eq, 1.0);
        inst.add_row(vec![(1, 4.0)], Sense::Eq, 2.0);
        let lp = to_standard_form(&inst);
        assert_eq!(lp.num_cols(), 3);
        assert_eq!(lp.slack_start, 3);
        assert_eq!(lp.matrix.column(2).collect::<Vec<_>>(), vec![(0, -2.0)]);
    }

    #[test]
    fn ge_row_gets_surplus_with_negative_coefficient() {
        let mut inst = MilpInstance::new("ge", 1);
        inst.add_row(vec![(0, 2.0)], Sense::Ge, 1.0);
        let lp = to_standard_form(&inst);
        assert_eq!(lp.matrix.column(1).collect::<Vec<_>>(), vec![(0, -1.0)]);
        let full = lp.extend_point(&inst, &[3.0]);
        assert_eq!(full, vec![3.0, 5.0]);
    }

    #[test]
    fn infinite_bounds_become_sentinels() {
        let mut inst = MilpInstance::new("free", 1);
        inst.lower[0] = f64::NEG_INFINITY;
        let lp = to_standard_form(&inst);
        assert_eq!((lp.lower[0], lp.upper[0]), (-INF_BOUND, INF_BOUND));
        assert!(is_infinite(lp.lower[0]));
    }
}
