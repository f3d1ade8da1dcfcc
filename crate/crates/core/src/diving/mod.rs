//! Generic diving: repeatedly tighten one variable bound chosen by a
//! [`Scorer`], resolve the LP from the previous basis, and try to round.

mod scorers;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::bnb::{round_solution, Locks};
use crate::instance::MilpInstance;
use crate::num;
use crate::simplex::{solve_lp_bounded, LpError, LpSolution, LpStatus, SimplexOptions};
use crate::standard::StandardLp;

pub use scorers::{
    Coefficient, Fractional, Linesearch, LowerDiver, PseudocostLite, RandomDiver, UpperDiver, Vectorlength,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiveConfig {
    /// Maximum number of LP resolves, i.e. tightenings that cut off the
    /// current LP point.
    pub d_max: usize,
    /// Pivot cap for each LP resolve.
    pub lp_iter_limit: Option<usize>,
    /// Stop once the LP bound is no better than this value.
    pub cutoff: Option<f64>,
    pub int_tol: f64,
    pub feas_tol: f64,
    pub simplex: SimplexOptions,
}

impl Default for DiveConfig {
    fn default() -> Self {
        DiveConfig {
            d_max: 10,
            lp_iter_limit: Some(1000),
            cutoff: None,
            int_tol: 1e-6,
            feas_tol: 1e-6,
            simplex: SimplexOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Direction {
    TightenLowerTo(f64),
    TightenUpperTo(f64),
    Fix(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreDecision {
    pub var: usize,
    pub direction: Direction,
    pub score: f64,
}

/// Feedback after a successful resolve, used by learning scorers such as
/// pseudocosts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation {
    pub var: usize,
    pub upward: bool,
    /// How far the variable was pushed from its LP value.
    pub distance: f64,
    /// Nonnegative increase of the LP objective.
    pub degradation: f64,
}

/// Everything a scorer may inspect when picking the next tightening.
pub struct DiveContext<'a> {
    pub instance: &'a MilpInstance,
    pub lp: &'a StandardLp,
    pub locks: &'a [Locks],
    /// LP solution the dive started from.
    pub start: &'a LpSolution,
    /// Latest LP solution inside the dive.
    pub current: LpSolution,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Unfixed integer divable variables, ascending.
    pub candidates: Vec<usize>,
    pub depth: usize,
    pub d_max: usize,
}

impl DiveContext<'_> {
    pub fn value(&self, j: usize) -> f64 {
        self.current.x[j]
    }

    pub fn fractional_candidates(&self, tol: f64) -> impl Iterator<Item = usize> + '_ {
        self.candidates.iter().copied().filter(move |&j| !num::is_integral(self.current.x[j], tol))
    }
}

pub trait Scorer {
    fn name(&self) -> &str;

    fn begin_dive(&mut self, _ctx: &DiveContext<'_>) {}

    /// Must return a decision on some candidate whenever the candidate set
    /// is nonempty.
    fn select(&mut self, ctx: &DiveContext<'_>) -> Option<ScoreDecision>;

    fn observe(&mut self, _obs: &Observation) {}
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Infeasible,
    DepthLimit,
    IterLimit,
    Integral,
    CutoffExceeded,
    /// No unfixed candidate remained while the LP point was still fractional.
    Exhausted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiveResult {
    /// Feasible solutions found, in discovery order.
    pub solutions: Vec<(Vec<f64>, f64)>,
    pub termination: Termination,
    pub depth_reached: usize,
    pub lp_iterations: usize,
}

impl DiveResult {
    pub fn best(&self) -> Option<&(Vec<f64>, f64)> {
        self.solutions.iter().min_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn best_objective(&self) -> Option<f64> {
        self.best().map(|s| s.1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DiveError {
    StartNotOptimal,
    /// The scorer returned nothing, or a variable outside the candidates.
    ScorerContract(String),
    Lp(LpError),
}

impl fmt::Display for DiveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiveError::StartNotOptimal => f.write_str("dive must start from an optimal LP solution"),
            DiveError::ScorerContract(m) => write!(f, "scorer contract violated: {m}"),
            DiveError::Lp(e) => write!(f, "LP failure during dive: {e}"),
        }
    }
}

impl From<LpError> for DiveError {
    fn from(e: LpError) -> Self {
        DiveError::Lp(e)
    }
}

fn candidate_set(inst: &MilpInstance, lower: &[f64], upper: &[f64]) -> Vec<usize> {
    inst.integers.iter().copied().filter(|&j| inst.divable[j] && lower[j] < upper[j]).collect()
}

fn integral_on_ints(inst: &MilpInstance, x: &[f64], tol: f64) -> bool {
    inst.integers.iter().all(|&j| num::is_integral(x[j], tol))
}

/// Runs one dive from `start`, an optimal solution of `lp` under
/// `lower`/`upper`. Bound tightenings never leave the given box.
#[allow(clippy::too_many_arguments)]
pub fn dive(
    inst: &MilpInstance,
    lp: &StandardLp,
    locks: &[Locks],
    start: &LpSolution,
    lower: &[f64],
    upper: &[f64],
    cfg: &DiveConfig,
    scorer: &mut dyn Scorer,
) -> Result<DiveResult, DiveError> {
    if start.status != LpStatus::Optimal {
        return Err(DiveError::StartNotOptimal);
    }
    let n = inst.num_vars();
    let opts = cfg.simplex.with_iter_limit(cfg.lp_iter_limit);
    let mut ctx = DiveContext {
        instance: inst,
        lp,
        locks,
        start,
        current: start.clone(),
        lower: lower.to_vec(),
        upper: upper.to_vec(),
        candidates: candidate_set(inst, lower, upper),
        depth: 0,
        d_max: cfg.d_max,
    };
    let mut result =
        DiveResult { solutions: Vec::new(), termination: Termination::DepthLimit, depth_reached: 0, lp_iterations: 0 };
    let record = |x: &[f64], result: &mut DiveResult| {
        let z = inst.objective_value(&x[..n]);
        result.solutions.push((x[..n].to_vec(), z));
    };

    let cut_off = |z: f64| cfg.cutoff.is_some_and(|c| z >= c - 1e-9);
    if cut_off(ctx.current.objective) {
        result.termination = Termination::CutoffExceeded;
        return Ok(result);
    }
    if let Some(sol) = round_solution(&ctx.current.x, inst, locks, cfg.feas_tol) {
        let integral = integral_on_ints(inst, &ctx.current.x, cfg.int_tol);
        record(&sol, &mut result);
        if integral {
            result.termination = Termination::Integral;
            return Ok(result);
        }
    }

    scorer.begin_dive(&ctx);
    while ctx.depth < cfg.d_max {
        if ctx.candidates.is_empty() {
            result.termination = Termination::Exhausted;
            return Ok(result);
        }
        let decision = scorer
            .select(&ctx)
            .ok_or_else(|| DiveError::ScorerContract(alloc::format!("{} returned no decision", scorer.name())))?;
        let j = decision.var;
        if ctx.candidates.binary_search(&j).is_err() {
            return Err(DiveError::ScorerContract(alloc::format!("{} chose non-candidate {j}", scorer.name())));
        }
        let before = ctx.current.x[j];
        let (old_lo, old_hi) = (ctx.lower[j], ctx.upper[j]);
        let target = match decision.direction {
            Direction::TightenLowerTo(v) => {
                ctx.lower[j] = ctx.lower[j].max(v);
                v
            }
            Direction::TightenUpperTo(v) => {
                ctx.upper[j] = ctx.upper[j].min(v);
                v
            }
            Direction::Fix(v) => {
                ctx.lower[j] = v;
                ctx.upper[j] = v;
                v
            }
        };
        if ctx.lower[j] > ctx.upper[j] || ctx.lower[j] < lower[j] || ctx.upper[j] > upper[j] {
            ctx.depth += 1;
            result.depth_reached = ctx.depth;
            result.termination = Termination::Infeasible;
            return Ok(result);
        }
        // A change that keeps the LP point feasible leaves it optimal with
        // the same duals: no resolve, and no depth spent. A step that changes
        // nothing still costs depth so the loop always terminates.
        let keeps_point = ctx.lower[j] <= before + cfg.feas_tol && before <= ctx.upper[j] + cfg.feas_tol;
        if keeps_point {
            if ctx.lower[j] == old_lo && ctx.upper[j] == old_hi {
                ctx.depth += 1;
                result.depth_reached = ctx.depth;
            }
            ctx.candidates.retain(|&k| ctx.lower[k] < ctx.upper[k]);
            continue;
        }
        ctx.depth += 1;
        result.depth_reached = ctx.depth;

        let sol = solve_lp_bounded(lp, &ctx.lower, &ctx.upper, Some(&ctx.current.basis), &opts)?;
        result.lp_iterations += sol.iterations;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => {
                result.termination = Termination::Infeasible;
                return Ok(result);
            }
            LpStatus::IterationLimit => {
                result.termination = Termination::IterLimit;
                return Ok(result);
            }
            // a bounded start cannot become unbounded by tightening
            LpStatus::Unbounded => return Err(DiveError::Lp(LpError::NumericalBreakdown)),
        }
        scorer.observe(&Observation {
            var: j,
            upward: target > before,
            distance: (target - before).abs(),
            degradation: (sol.objective - ctx.current.objective).max(0.0),
        });
        ctx.current = sol;
        ctx.candidates.retain(|&k| ctx.lower[k] < ctx.upper[k]);

        if cut_off(ctx.current.objective) {
            result.termination = Termination::CutoffExceeded;
            return Ok(result);
        }
        if let Some(sol) = round_solution(&ctx.current.x, inst, locks, cfg.feas_tol) {
            let integral = integral_on_ints(inst, &ctx.current.x, cfg.int_tol);
            record(&sol, &mut result);
            if integral {
                result.termination = Termination::Integral;
                return Ok(result);
            }
        }
    }
    result.termination = Termination::DepthLimit;
    Ok(result)
}

/// Names accepted by [`scorer_by_name`], excluding the learned diver which
/// needs a trained model.
pub const HEURISTIC_NAMES: [&str; 8] =
    ["fractional", "coefficient", "linesearch", "vectorlength", "pseudocost", "lower", "upper", "random"];

/// Builds one of the standard heuristic scorers.
pub fn scorer_by_name(name: &str, seed: u64) -> Option<Box<dyn Scorer>> {
    Some(match name {
        "fractional" => Box::new(Fractional),
        "coefficient" => Box::new(Coefficient),
        "linesearch" => Box::new(Linesearch),
        "vectorlength" => Box::new(Vectorlength),
        "pseudocost" => Box::new(PseudocostLite::default()),
        "lower" => Box::new(LowerDiver),
        "upper" => Box::new(UpperDiver),
        "random" => Box::new(RandomDiver::new(seed)),
        _ => return None,
    })
}
