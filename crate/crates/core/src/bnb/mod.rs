//! Best-first branch and bound with plunging, optional diving heuristics,
//! a solution pool, and exhaustive enumeration of optimal solutions.

mod pool;
mod rounding;

use alloc::collections::BinaryHeap;
use alloc::rc::Rc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

pub use pool::{PoolEntry, SolutionPool};
pub use rounding::{compute_locks, round_solution, Locks};

use crate::clock::Clock;
use crate::diving::{dive, DiveConfig, DiveError, Scorer};
use crate::instance::{InstanceError, MilpInstance, Sense};
use crate::num;
use crate::simplex::{solve_lp_bounded, Basis, LpError, LpSolution, LpStatus, SimplexOptions};
use crate::standard::{to_standard_form, StandardLp};

/// Margin below the incumbent a node bound must reach to stay open.
pub const PRUNE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    OptimalProven,
    Infeasible,
    Unbounded,
    Limit,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveConfig {
    /// Seconds as measured by the supplied clock.
    pub time_limit: f64,
    pub node_limit: usize,
    pub pool_capacity: usize,
    pub int_tol: f64,
    pub feas_tol: f64,
    /// Try simple rounding at every node.
    pub node_rounding: bool,
    /// Children taken depth-first before returning to the best bound.
    pub max_plunge: usize,
    pub simplex: SimplexOptions,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            time_limit: f64::INFINITY,
            node_limit: usize::MAX,
            pool_capacity: 10,
            int_tol: 1e-6,
            feas_tol: 1e-6,
            node_rounding: true,
            max_plunge: 4,
            simplex: SimplexOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    pub t: f64,
    pub primal: f64,
    pub dual: f64,
}

/// Timestamped primal and dual bounds. The primal bound never increases and
/// the dual bound never decreases.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveTrace {
    pub points: Vec<TracePoint>,
}

impl SolveTrace {
    fn push(&mut self, t: f64, primal: f64, dual: f64) {
        let (primal, dual) = match self.points.last() {
            Some(p) => (primal.min(p.primal), dual.max(p.dual)),
            None => (primal, dual),
        };
        if self.points.last().is_some_and(|p| p.primal == primal && p.dual == dual) {
            return;
        }
        self.points.push(TracePoint { t, primal, dual });
    }

    pub fn last(&self) -> Option<&TracePoint> {
        self.points.last()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes: usize,
    pub lp_iterations: usize,
    /// Nodes dropped because their LP failed numerically.
    pub node_errors: usize,
    pub dives: usize,
    pub dive_solutions: usize,
    pub max_depth: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub pool: SolutionPool,
    pub trace: SolveTrace,
    pub dual_bound: f64,
    pub stats: SolveStats,
    /// Optimal LP solution at the root, when it exists.
    pub root: Option<LpSolution>,
}

impl SolveOutcome {
    pub fn incumbent(&self) -> Option<&PoolEntry> {
        self.pool.best()
    }

    pub fn primal_bound(&self) -> f64 {
        self.incumbent().map_or(f64::INFINITY, |e| e.objective)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BnbError {
    Instance(InstanceError),
    RootLp(LpError),
    Dive(DiveError),
    /// Enumeration needs a proven optimum first.
    OptimumNotProven(SolveStatus),
}

impl fmt::Display for BnbError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BnbError::Instance(e) => write!(f, "invalid instance: {e:?}"),
            BnbError::RootLp(e) => write!(f, "root LP failed: {e}"),
            BnbError::Dive(e) => write!(f, "dive failed: {e}"),
            BnbError::OptimumNotProven(s) => write!(f, "optimum not proven (status {s:?})"),
        }
    }
}

/// A diving heuristic run inside the tree at processed-node indices
/// `offset, offset + freq, ...` (only at `offset` when `freq` is 0).
pub struct DiverSlot<'s> {
    pub scorer: &'s mut dyn Scorer,
    pub freq: usize,
    pub offset: usize,
    pub dive: DiveConfig,
}

impl DiverSlot<'_> {
    pub fn fires_at(&self, k: usize) -> bool {
        if k < self.offset {
            return false;
        }
        if self.freq == 0 {
            k == self.offset
        } else {
            (k - self.offset) % self.freq == 0
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Optimize,
    Enumerate,
}

struct Node {
    /// Bound changes `(col, lo, hi)` relative to the root box, applied in order.
    changes: Vec<(usize, f64, f64)>,
    bound: f64,
    depth: usize,
    basis: Option<Rc<Basis>>,
}

struct Queued {
    bound: f64,
    seq: usize,
    node: Node,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // max-heap: smallest bound first, then oldest
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Search<'a, 'c> {
    inst: &'a MilpInstance,
    lp: StandardLp,
    locks: Vec<Locks>,
    cfg: &'a SolveConfig,
    clock: &'c dyn Clock,
    mode: Mode,
    pool: SolutionPool,
    trace: SolveTrace,
    stats: SolveStats,
    heap: BinaryHeap<Queued>,
    seq: usize,
}

impl Search<'_, '_> {
    fn incumbent(&self) -> f64 {
        match self.mode {
            Mode::Optimize => self.pool.best().map_or(f64::INFINITY, |e| e.objective),
            Mode::Enumerate => f64::INFINITY,
        }
    }

    fn offer(&mut self, x: Vec<f64>) -> bool {
        if !self.inst.is_feasible(&x, self.cfg.feas_tol) {
            return false;
        }
        let z = self.inst.objective_value(&x);
        self.pool.insert(x, z)
    }

    fn queue(&mut self, node: Node) {
        self.seq += 1;
        self.heap.push(Queued { bound: node.bound, seq: self.seq, node });
    }

    fn open_bound(&self, plunge: Option<&Node>) -> f64 {
        let heap_min = self.heap.peek().map_or(f64::INFINITY, |q| q.bound);
        plunge.map_or(heap_min, |n| heap_min.min(n.bound))
    }

    fn record(&mut self, plunge: Option<&Node>) {
        let primal = self.incumbent();
        let dual = self.open_bound(plunge).min(primal);
        let t = self.clock.elapsed();
        self.trace.push(t, primal, dual);
    }

    fn bounds_for(&self, node: &Node) -> (Vec<f64>, Vec<f64>) {
        let mut lo = self.lp.lower.clone();
        let mut hi = self.lp.upper.clone();
        for &(j, l, h) in &node.changes {
            lo[j] = l;
            hi[j] = h;
        }
        (lo, hi)
    }

    fn child(&self, parent: &Node, basis: &Rc<Basis>, bound: f64, j: usize, lo: f64, hi: f64) -> Node {
        let mut changes = parent.changes.clone();
        changes.push((j, lo, hi));
        Node { changes, bound, depth: parent.depth + 1, basis: Some(basis.clone()) }
    }

    fn run(&mut self, divers: &mut [DiverSlot<'_>]) -> Result<(SolveStatus, Option<LpSolution>), BnbError> {
        let mut root_solution = None;
        let mut plunge: Option<Node> = None;
        let mut plunge_depth = 0usize;
        self.queue(Node { changes: Vec::new(), bound: f64::NEG_INFINITY, depth: 0, basis: None });

        loop {
            let node = match plunge.take() {
                Some(n) => n,
                None => {
                    plunge_depth = 0;
                    match self.heap.pop() {
                        Some(q) => q.node,
                        None => break,
                    }
                }
            };
            if node.bound >= self.incumbent() - PRUNE_TOL {
                continue;
            }
            if self.stats.nodes >= self.cfg.node_limit || self.clock.elapsed() >= self.cfg.time_limit {
                self.queue(node);
                self.record(None);
                return Ok((SolveStatus::Limit, root_solution));
            }

            let k = self.stats.nodes;
            self.stats.nodes += 1;
            self.stats.max_depth = self.stats.max_depth.max(node.depth);
            let (lo, hi) = self.bounds_for(&node);
            let solved = solve_lp_bounded(&self.lp, &lo, &hi, node.basis.as_deref(), &self.cfg.simplex);
            let sol = match solved {
                Ok(s) => s,
                Err(e) if node.depth == 0 => return Err(BnbError::RootLp(e)),
                Err(_) => {
                    self.stats.node_errors += 1;
                    continue;
                }
            };
            self.stats.lp_iterations += sol.iterations;
            self.clock.charge(sol.iterations);
            match sol.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible if node.depth == 0 => return Ok((SolveStatus::Infeasible, None)),
                LpStatus::Unbounded if node.depth == 0 => return Ok((SolveStatus::Unbounded, None)),
                LpStatus::IterationLimit if node.depth == 0 => {
                    return Err(BnbError::RootLp(LpError::NumericalBreakdown))
                }
                LpStatus::Infeasible => {
                    self.record(plunge.as_ref());
                    continue;
                }
                _ => {
                    self.stats.node_errors += 1;
                    continue;
                }
            }
            if node.depth == 0 {
                root_solution = Some(sol.clone());
            }
            let z = sol.objective;
            if z >= self.incumbent() - PRUNE_TOL {
                self.record(plunge.as_ref());
                continue;
            }

            let integral = self.inst.integers.iter().all(|&j| num::is_integral(sol.x[j], self.cfg.int_tol));
            if self.mode == Mode::Optimize {
                if self.cfg.node_rounding || integral {
                    if let Some(x) = round_solution(&sol.x, self.inst, &self.locks, self.cfg.feas_tol) {
                        self.offer(x);
                    }
                }
                for slot in divers.iter_mut() {
                    if !slot.fires_at(k) {
                        continue;
                    }
                    let mut dcfg = slot.dive;
                    let inc = self.incumbent();
                    if inc.is_finite() {
                        dcfg.cutoff = Some(dcfg.cutoff.map_or(inc, |c| c.min(inc)));
                    }
                    let res = dive(self.inst, &self.lp, &self.locks, &sol, &lo, &hi, &dcfg, &mut *slot.scorer)
                        .map_err(BnbError::Dive)?;
                    self.stats.dives += 1;
                    self.stats.lp_iterations += res.lp_iterations;
                    self.clock.charge(res.lp_iterations);
                    for (x, _) in res.solutions {
                        if self.offer(x) {
                            self.stats.dive_solutions += 1;
                        }
                    }
                }
                if integral || z >= self.incumbent() - PRUNE_TOL {
                    self.record(plunge.as_ref());
                    continue;
                }
            }

            let basis = Rc::new(sol.basis.clone());
            let children = match self.mode {
                Mode::Optimize => {
                    let j = self.branching_variable(&sol.x);
                    let x = sol.x[j];
                    let down = self.child(&node, &basis, z, j, lo[j], num::floor(x));
                    let up = self.child(&node, &basis, z, j, num::ceil(x), hi[j]);
                    if x - num::floor(x) >= 0.5 {
                        [Some(up), Some(down)]
                    } else {
                        [Some(down), Some(up)]
                    }
                }
                Mode::Enumerate => {
                    if integral {
                        let x: Vec<f64> = (0..self.inst.num_vars())
                            .map(|j| if self.inst.is_integer(j) { num::round(sol.x[j]) } else { sol.x[j] })
                            .collect();
                        self.offer(x);
                        if self.pool.len() >= self.pool.capacity() {
                            return Ok((SolveStatus::Limit, root_solution));
                        }
                    }
                    match self.enumeration_split(&sol.x, &lo, &hi, integral) {
                        Some((j, v)) => {
                            let down = (lo[j] <= v).then(|| self.child(&node, &basis, z, j, lo[j], v));
                            let up = (v + 1.0 <= hi[j]).then(|| self.child(&node, &basis, z, j, v + 1.0, hi[j]));
                            [down, up]
                        }
                        None => [None, None],
                    }
                }
            };
            let [first, second] = children;
            if let Some(second) = second {
                self.queue(second);
            }
            if let Some(first) = first {
                if plunge_depth < self.cfg.max_plunge {
                    plunge_depth += 1;
                    plunge = Some(first);
                } else {
                    self.queue(first);
                }
            }
            self.record(plunge.as_ref());
        }
        self.record(None);
        Ok((SolveStatus::OptimalProven, root_solution))
    }

    /// Most fractional integer variable, lowest index on ties.
    fn branching_variable(&self, x: &[f64]) -> usize {
        let mut best = (usize::MAX, -1.0);
        for &j in &self.inst.integers {
            let f = num::fractionality(x[j]);
            if f > self.cfg.int_tol && f > best.1 {
                best = (j, f);
            }
        }
        best.0
    }

    /// Split point for enumeration: the most fractional integer when the LP
    /// point is fractional, else the first unfixed divable variable at its
    /// value.
    fn enumeration_split(&self, x: &[f64], lo: &[f64], hi: &[f64], integral: bool) -> Option<(usize, f64)> {
        if !integral {
            let j = self.branching_variable(x);
            return Some((j, num::floor(x[j])));
        }
        let j = self.inst.integers.iter().copied().find(|&j| self.inst.divable[j] && lo[j] < hi[j])?;
        let v = num::round(x[j]);
        // keep the current point in the lower child unless it sits on the upper bound
        Some(if v + 1.0 <= hi[j] { (j, v) } else { (j, v - 1.0) })
    }
}

fn start_search<'a, 'c>(
    inst: &'a MilpInstance,
    cfg: &'a SolveConfig,
    clock: &'c dyn Clock,
    mode: Mode,
    pool: SolutionPool,
) -> Result<Search<'a, 'c>, BnbError> {
    inst.validate().map_err(BnbError::Instance)?;
    Ok(Search {
        inst,
        lp: to_standard_form(inst),
        locks: compute_locks(inst),
        cfg,
        clock,
        mode,
        pool,
        trace: SolveTrace::default(),
        stats: SolveStats::default(),
        heap: BinaryHeap::new(),
        seq: 0,
    })
}

fn divable_vars(inst: &MilpInstance) -> Vec<usize> {
    inst.integers.iter().copied().filter(|&j| inst.divable[j]).collect()
}

/// Minimizes `inst`, running each diver in `divers` on its schedule.
pub fn branch_and_bound(
    inst: &MilpInstance,
    cfg: &SolveConfig,
    divers: &mut [DiverSlot<'_>],
    clock: &dyn Clock,
) -> Result<SolveOutcome, BnbError> {
    let pool = SolutionPool::new(cfg.pool_capacity, divable_vars(inst));
    let mut search = start_search(inst, cfg, clock, Mode::Optimize, pool)?;
    let (status, root) = search.run(divers)?;
    let dual_bound = match status {
        SolveStatus::OptimalProven => search.incumbent(),
        SolveStatus::Infeasible => f64::INFINITY,
        SolveStatus::Unbounded => f64::NEG_INFINITY,
        SolveStatus::Limit => search.trace.last().map_or(f64::NEG_INFINITY, |p| p.dual),
    };
    // an exhausted tree without incumbent means no integer point exists
    let status = match status {
        SolveStatus::OptimalProven if search.pool.is_empty() => SolveStatus::Infeasible,
        s => s,
    };
    Ok(SolveOutcome { status, pool: search.pool, trace: search.trace, dual_bound, stats: search.stats, root })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Enumeration {
    pub optimum: f64,
    /// Distinct optimal solutions, distinct on the divable variables.
    pub solutions: Vec<PoolEntry>,
    /// False when a node, time, or capacity limit cut the search short.
    pub complete: bool,
}

/// Lists optimal solutions that differ on the divable variables, up to
/// `cfg.pool_capacity` of them.
pub fn enumerate_optima(inst: &MilpInstance, cfg: &SolveConfig, clock: &dyn Clock) -> Result<Enumeration, BnbError> {
    let first = branch_and_bound(inst, cfg, &mut [], clock)?;
    if first.status != SolveStatus::OptimalProven {
        return Err(BnbError::OptimumNotProven(first.status));
    }
    let optimum = first.primal_bound();
    let mut restricted = inst.clone();
    let objective: Vec<(usize, f64)> =
        inst.objective.iter().enumerate().filter(|(_, &c)| c != 0.0).map(|(j, &c)| (j, c)).collect();
    let slack = 1e-6 * (1.0 + optimum.abs());
    restricted.add_row(objective.clone(), Sense::Le, optimum + slack);
    restricted.add_row(objective, Sense::Ge, optimum - slack);
    if let Some(names) = restricted.row_names.as_mut() {
        names.push("opt_le".into());
        names.push("opt_ge".into());
    }

    let mut enum_cfg = *cfg;
    enum_cfg.node_rounding = false;
    // one spare slot tells "exactly at capacity" apart from "more exist"
    let pool = SolutionPool::new(cfg.pool_capacity + 1, divable_vars(inst));
    let mut search = start_search(&restricted, &enum_cfg, clock, Mode::Enumerate, pool)?;
    let (status, _) = search.run(&mut [])?;
    let mut solutions = search.pool.entries().to_vec();
    solutions.truncate(cfg.pool_capacity);
    for s in &mut solutions {
        s.objective = inst.objective_value(&s.x);
    }
    Ok(Enumeration { optimum, solutions, complete: status == SolveStatus::OptimalProven })
}
