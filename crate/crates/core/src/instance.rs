//! Mixed integer linear programs in the form `min c'x` subject to sparse
//! rows with senses, variable bounds and an integer index set.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::num;

/// Row sense of a linear constraint `a'x (<=|>=|=) b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn as_char(self) -> char {
        match self {
            Sense::Le => 'L',
            Sense::Ge => 'G',
            Sense::Eq => 'E',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'L' | 'l' => Some(Sense::Le),
            'G' | 'g' => Some(Sense::Ge),
            'E' | 'e' => Some(Sense::Eq),
            _ => None,
        }
    }
}

/// One sparse constraint row as `(column, coefficient)` pairs.
pub type Row = Vec<(usize, f64)>;

#[derive(Clone, Debug, PartialEq)]
pub struct MilpInstance {
    pub name: String,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    pub sense: Vec<Sense>,
    pub rhs: Vec<f64>,
    /// Lower bounds; `f64::NEG_INFINITY` when unbounded.
    pub lower: Vec<f64>,
    /// Upper bounds; `f64::INFINITY` when unbounded.
    pub upper: Vec<f64>,
    /// Sorted indices of integer variables.
    pub integers: Vec<usize>,
    pub divable: Vec<bool>,
    pub var_names: Option<Vec<String>>,
    pub row_names: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceError {
    BoundOrder { var: usize, lower: f64, upper: f64 },
    IndexOutOfRange { what: &'static str, index: usize },
    NonFinite { what: &'static str, index: usize },
    DuplicateEntry { row: usize, col: usize },
    DivableNotInteger { var: usize },
    UnsortedIntegers,
    Length { what: &'static str, expected: usize, got: usize },
}

impl fmt::Display for InstanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceError::BoundOrder { var, lower, upper } => {
                write!(f, "variable {var} has lower bound {lower} above upper bound {upper}")
            }
            InstanceError::IndexOutOfRange { what, index } => {
                write!(f, "{what} index {index} out of range")
            }
            InstanceError::NonFinite { what, index } => write!(f, "non-finite {what} at {index}"),
            InstanceError::DuplicateEntry { row, col } => {
                write!(f, "duplicate coefficient at row {row}, column {col}")
            }
            InstanceError::DivableNotInteger { var } => {
                write!(f, "variable {var} is divable but not integer")
            }
            InstanceError::UnsortedIntegers => f.write_str("integer index set is not strictly increasing"),
            InstanceError::Length { what, expected, got } => {
                write!(f, "{what} has length {got}, expected {expected}")
            }
        }
    }
}

/// First violated condition found by [`MilpInstance::check_feasible`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Length,
    Bound { var: usize, value: f64 },
    Integrality { var: usize, value: f64 },
    Row { row: usize, activity: f64 },
}

impl MilpInstance {
    /// Empty instance over `n` continuous variables in `[0, inf)`.
    pub fn new(name: impl Into<String>, n: usize) -> Self {
        MilpInstance {
            name: name.into(),
            objective: vec![0.0; n],
            rows: Vec::new(),
            sense: Vec::new(),
            rhs: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
            integers: Vec::new(),
            divable: vec![false; n],
            var_names: None,
            row_names: None,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn add_row(&mut self, row: Row, sense: Sense, rhs: f64) -> usize {
        self.rows.push(row);
        self.sense.push(sense);
        self.rhs.push(rhs);
        self.rows.len() - 1
    }

    /// Declares `j` a binary variable and marks it divable.
    pub fn make_binary(&mut self, j: usize) {
        self.lower[j] = 0.0;
        self.upper[j] = 1.0;
        self.make_integer(j, true);
    }

    pub fn make_integer(&mut self, j: usize, divable: bool) {
        if let Err(pos) = self.integers.binary_search(&j) {
            self.integers.insert(pos, j);
        }
        self.divable[j] = divable;
    }

    pub fn is_integer(&self, j: usize) -> bool {
        self.integers.binary_search(&j).is_ok()
    }

    /// Per-variable flags for the integer set.
    pub fn integer_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.num_vars()];
        for &j in &self.integers {
            mask[j] = true;
        }
        mask
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn row_activity(&self, i: usize, x: &[f64]) -> f64 {
        self.rows[i].iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Number of rows each column appears in.
    pub fn column_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_vars()];
        for row in &self.rows {
            for &(j, _) in row {
                deg[j] += 1;
            }
        }
        deg
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        let n = self.num_vars();
        let m = self.num_rows();
        for (what, len, expected) in [
            ("lower", self.lower.len(), n),
            ("upper", self.upper.len(), n),
            ("divable", self.divable.len(), n),
            ("sense", self.sense.len(), m),
            ("rhs", self.rhs.len(), m),
        ] {
            if len != expected {
                return Err(InstanceError::Length { what, expected, got: len });
            }
        }
        for j in 0..n {
            if !self.objective[j].is_finite() {
                return Err(InstanceError::NonFinite { what: "objective", index: j });
            }
            if self.lower[j].is_nan() || self.upper[j].is_nan() {
                return Err(InstanceError::NonFinite { what: "bound", index: j });
            }
            if self.lower[j] > self.upper[j] || self.lower[j] == f64::INFINITY || self.upper[j] == f64::NEG_INFINITY {
                return Err(InstanceError::BoundOrder { var: j, lower: self.lower[j], upper: self.upper[j] });
            }
        }
        if self.integers.windows(2).any(|w| w[0] >= w[1]) {
            return Err(InstanceError::UnsortedIntegers);
        }
        if let Some(&j) = self.integers.iter().find(|&&j| j >= n) {
            return Err(InstanceError::IndexOutOfRange { what: "integer", index: j });
        }
        let mask = self.integer_mask();
        if let Some(j) = (0..n).find(|&j| self.divable[j] && !mask[j]) {
            return Err(InstanceError::DivableNotInteger { var: j });
        }
        let mut seen = vec![usize::MAX; n];
        for (i, row) in self.rows.iter().enumerate() {
            if !self.rhs[i].is_finite() {
                return Err(InstanceError::NonFinite { what: "rhs", index: i });
            }
            for &(j, a) in row {
                if j >= n {
                    return Err(InstanceError::IndexOutOfRange { what: "column", index: j });
                }
                if !a.is_finite() {
                    return Err(InstanceError::NonFinite { what: "coefficient", index: i });
                }
                if seen[j] == i {
                    return Err(InstanceError::DuplicateEntry { row: i, col: j });
                }
                seen[j] = i;
            }
        }
        Ok(())
    }

    /// Checks bounds, integrality on the integer set and every row, all with
    /// absolute tolerance `tol`.
    pub fn check_feasible(&self, x: &[f64], tol: f64) -> Result<(), Violation> {
        if x.len() != self.num_vars() {
            return Err(Violation::Length);
        }
        for (j, &v) in x.iter().enumerate() {
            if !v.is_finite() || v < self.lower[j] - tol || v > self.upper[j] + tol {
                return Err(Violation::Bound { var: j, value: v });
            }
        }
        for &j in &self.integers {
            if !num::is_integral(x[j], tol) {
                return Err(Violation::Integrality { var: j, value: x[j] });
            }
        }
        for i in 0..self.num_rows() {
            let act = self.row_activity(i, x);
            let ok = match self.sense[i] {
                Sense::Le => act <= self.rhs[i] + tol,
                Sense::Ge => act >= self.rhs[i] - tol,
                Sense::Eq => (act - self.rhs[i]).abs() <= tol,
            };
            if !ok {
                return Err(Violation::Row { row: i, activity: act });
            }
        }
        Ok(())
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        self.check_feasible(x, tol).is_ok()
    }

    /// Divable variables in index order; the candidate domain of the model.
    pub fn candidates(&self) -> Vec<usize> {
        (0..self.num_vars()).filter(|&j| self.divable[j]).collect()
    }

    /// Whether every objective coefficient on every variable is integral and
    /// all variables are integer, so objective values are integers.
    pub fn has_integral_objective(&self) -> bool {
        let mask = self.integer_mask();
        self.objective.iter().enumerate().all(|(j, &c)| c == 0.0 || (mask[j] && num::is_integral(c, 0.0)))
    }
}
