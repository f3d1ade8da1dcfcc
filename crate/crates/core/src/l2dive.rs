//! The learned diver. A model predicts an integer assignment once per dive;
//! each step then prefers variables whose predicted value violates
//! complementary slackness against the current LP duals, since tightening
//! exactly those bounds makes a feasible prediction LP-optimal.

use alloc::vec::Vec;
use core::fmt;

use crate::diving::{Direction, DiveContext, ScoreDecision, Scorer};
use crate::graphnet::{extract_graph, predict_assignment, GnnParams, GraphError, Strategy};
use crate::instance::MilpInstance;
use crate::simplex::{solve_lp, solve_lp_bounded, DualValues, LpError, LpStatus, SimplexOptions};
use crate::standard::{is_infinite, to_standard_form};

/// Slackness products at or below this magnitude count as satisfied.
pub const SLACKNESS_TOL: f64 = 1e-7;

/// Variables whose predicted value violates complementary slackness at the
/// lower or upper bound.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TightenSet {
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
}

impl TightenSet {
    pub fn contains(&self, j: usize) -> bool {
        self.lower.binary_search(&j).is_ok() || self.upper.binary_search(&j).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty() && self.upper.is_empty()
    }

    /// Sorted union of both sides.
    pub fn union(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.lower.iter().chain(&self.upper).copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum L2DiveError {
    /// The last LP was not solved to optimality, so it has no duals.
    MissingDuals,
    RootNotOptimal(LpStatus),
    Lp(LpError),
    Graph(GraphError),
}

impl fmt::Display for L2DiveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            L2DiveError::MissingDuals => f.write_str("no dual values: last LP was not optimal"),
            L2DiveError::RootNotOptimal(s) => write!(f, "root LP ended with status {s:?}"),
            L2DiveError::Lp(e) => write!(f, "LP failure: {e}"),
            L2DiveError::Graph(e) => write!(f, "model failure: {e}"),
        }
    }
}

impl From<LpError> for L2DiveError {
    fn from(e: LpError) -> Self {
        L2DiveError::Lp(e)
    }
}

impl From<GraphError> for L2DiveError {
    fn from(e: GraphError) -> Self {
        L2DiveError::Graph(e)
    }
}

/// Scans `indices` (ascending) with predicted `values` for
/// `(v - lo) * y_lb > tol` and `(v - hi) * y_ub > tol`. Infinite bounds
/// never enter the set.
pub fn compute_tighten_set(
    indices: &[usize],
    values: &[f64],
    duals: Option<&DualValues>,
    lower: &[f64],
    upper: &[f64],
    tol: f64,
) -> Result<TightenSet, L2DiveError> {
    let duals = duals.ok_or(L2DiveError::MissingDuals)?;
    let mut set = TightenSet::default();
    for (&j, &v) in indices.iter().zip(values) {
        if !is_infinite(lower[j]) && (v - lower[j]) * duals.y_lb[j] > tol {
            set.lower.push(j);
        }
        if !is_infinite(upper[j]) && (v - upper[j]) * duals.y_ub[j] > tol {
            set.upper.push(j);
        }
    }
    Ok(set)
}

/// How a chosen variable's bound moves toward its predicted value `v`
/// given the current LP value `x`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DirectionRule {
    /// Raise the lower bound when `v > x`, lower the upper bound when
    /// `v < x`, fix when equal. Every step cuts off the current LP point.
    #[default]
    Consistent,
    /// Raise the lower bound to `v` when `v <= x` and lower the upper bound
    /// to `v` when `v >= x`. For binaries this never excludes the current
    /// LP point unless `v == x`.
    Verbatim,
}

impl DirectionRule {
    pub fn direction(self, v: f64, x: f64) -> Direction {
        if (v - x).abs() <= 1e-9 {
            return Direction::Fix(v);
        }
        match (self, v > x) {
            (DirectionRule::Consistent, true) | (DirectionRule::Verbatim, false) => Direction::TightenLowerTo(v),
            (DirectionRule::Consistent, false) | (DirectionRule::Verbatim, true) => Direction::TightenUpperTo(v),
        }
    }
}

/// Prediction held fixed for one dive.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    /// Candidate variables, ascending.
    pub candidates: Vec<usize>,
    pub values: Vec<i64>,
    /// Model probability of each predicted value.
    pub confidence: Vec<f64>,
}

impl Prediction {
    fn position(&self, j: usize) -> Option<usize> {
        self.candidates.binary_search(&j).ok()
    }

    /// Runs the model on the graph of `inst` at the LP solution `start`.
    pub fn from_model(
        params: &GnnParams,
        inst: &MilpInstance,
        start: &crate::simplex::LpSolution,
        strategy: Strategy,
    ) -> Result<Self, L2DiveError> {
        let g = extract_graph(inst, start)?;
        let pred = params.predict(&g)?;
        let values = predict_assignment(&pred, strategy);
        let confidence = values.iter().enumerate().map(|(k, &v)| pred.value_prob(k, v)).collect();
        Ok(Prediction { candidates: g.candidates, values, confidence })
    }
}

/// Scores `q(x̂_j) + 1{j in J}` and tightens toward the prediction.
pub struct L2Dive<'m> {
    model: Option<&'m GnnParams>,
    strategy: Strategy,
    pub rule: DirectionRule,
    pub tol: f64,
    prediction: Option<Prediction>,
    /// Set when the model could not run at the start of the last dive.
    pub last_error: Option<L2DiveError>,
}

impl<'m> L2Dive<'m> {
    pub fn new(model: &'m GnnParams, strategy: Strategy) -> Self {
        L2Dive {
            model: Some(model),
            strategy,
            rule: DirectionRule::default(),
            tol: SLACKNESS_TOL,
            prediction: None,
            last_error: None,
        }
    }

    /// A diver that always uses the given prediction instead of a model.
    pub fn with_prediction(prediction: Prediction) -> L2Dive<'static> {
        L2Dive {
            model: None,
            strategy: Strategy::Mode,
            rule: DirectionRule::default(),
            tol: SLACKNESS_TOL,
            prediction: Some(prediction),
            last_error: None,
        }
    }

    pub fn prediction(&self) -> Option<&Prediction> {
        self.prediction.as_ref()
    }

    /// Tighten set of the current prediction against the context's duals.
    pub fn tighten_set(&self, ctx: &DiveContext<'_>) -> Result<TightenSet, L2DiveError> {
        let Some(p) = &self.prediction else {
            return Ok(TightenSet::default());
        };
        let mut idx = Vec::with_capacity(ctx.candidates.len());
        let mut vals = Vec::with_capacity(ctx.candidates.len());
        for &j in &ctx.candidates {
            if let Some(k) = p.position(j) {
                idx.push(j);
                vals.push((p.values[k] as f64).clamp(ctx.lower[j], ctx.upper[j]));
            }
        }
        compute_tighten_set(&idx, &vals, ctx.current.duals.as_ref(), &ctx.lower, &ctx.upper, self.tol)
    }
}

impl Scorer for L2Dive<'_> {
    fn name(&self) -> &str {
        "l2dive"
    }

    fn begin_dive(&mut self, ctx: &DiveContext<'_>) {
        let Some(model) = self.model else {
            return;
        };
        match Prediction::from_model(model, ctx.instance, ctx.start, self.strategy) {
            Ok(p) => {
                self.prediction = Some(p);
                self.last_error = None;
            }
            Err(e) => {
                self.prediction = None;
                self.last_error = Some(e);
            }
        }
    }

    fn select(&mut self, ctx: &DiveContext<'_>) -> Option<ScoreDecision> {
        let j_set = self.tighten_set(ctx).unwrap_or_default();
        let pred = self.prediction.as_ref();
        let mut best: Option<ScoreDecision> = None;
        for &j in &ctx.candidates {
            let (value, confidence) = match pred.and_then(|p| p.position(j)) {
                Some(k) => (p_value(pred, k), pred.map_or(0.0, |p| p.confidence[k])),
                // no prediction for this variable: round the LP value with no confidence
                None => (libm::round(ctx.value(j)), 0.0),
            };
            let v = value.clamp(ctx.lower[j], ctx.upper[j]);
            let score = confidence + if j_set.contains(j) { 1.0 } else { 0.0 };
            if best.map_or(true, |b| score > b.score) {
                best = Some(ScoreDecision { var: j, direction: self.rule.direction(v, ctx.value(j)), score });
            }
        }
        best
    }
}

fn p_value(pred: Option<&Prediction>, k: usize) -> f64 {
    pred.map_or(0.0, |p| p.values[k] as f64)
}

/// Outcome of checking that tightening the slackness-violating bounds makes
/// a feasible integral point optimal for the restricted LP.
#[derive(Clone, Debug, PartialEq)]
pub struct TightenedOptimalityReport {
    pub tighten: TightenSet,
    /// Largest bound or row violation of the point in the restricted LP.
    pub max_violation: f64,
    pub point_objective: f64,
    pub restricted_objective: f64,
    pub holds: bool,
}

/// Solves the root LP of `inst`, tightens every standard-form column
/// (slacks included) in the tighten set of the feasible point `x` to its
/// value, re-solves, and compares objectives.
pub fn verify_tightened_optimality(
    inst: &MilpInstance,
    x: &[f64],
    opts: &SimplexOptions,
) -> Result<TightenedOptimalityReport, L2DiveError> {
    let lp = to_standard_form(inst);
    let root = solve_lp(&lp, None, opts)?;
    if root.status != LpStatus::Optimal {
        return Err(L2DiveError::RootNotOptimal(root.status));
    }
    let point = lp.extend_point(inst, x);
    let all: Vec<usize> = (0..lp.num_cols()).collect();
    let tighten = compute_tighten_set(&all, &point, root.duals.as_ref(), &lp.lower, &lp.upper, SLACKNESS_TOL)?;
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    for &j in &tighten.lower {
        lower[j] = point[j];
    }
    for &j in &tighten.upper {
        upper[j] = point[j];
    }
    let max_violation = lp.max_violation(&point, &lower, &upper);
    let restricted = solve_lp_bounded(&lp, &lower, &upper, Some(&root.basis), opts)?;
    if restricted.status != LpStatus::Optimal {
        return Err(L2DiveError::RootNotOptimal(restricted.status));
    }
    let point_objective = inst.objective_value(x);
    let holds = max_violation <= 1e-6 && (restricted.objective - point_objective).abs() <= 1e-6;
    Ok(TightenedOptimalityReport {
        tighten,
        max_violation,
        point_objective,
        restricted_objective: restricted.objective,
        holds,
    })
}
