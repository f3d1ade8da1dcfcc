//! The classic hand-written diving rules.
//!
//! Rules that work on fractional candidates fall back to fixing the first
//! candidate at its (integral) LP value when nothing is fractional, so a
//! dive can still make progress on general integers.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Direction, DiveContext, Observation, ScoreDecision, Scorer};
use crate::num;

const INT_TOL: f64 = 1e-6;

fn down(ctx: &DiveContext<'_>, j: usize, score: f64) -> ScoreDecision {
    ScoreDecision { var: j, direction: Direction::TightenUpperTo(num::floor(ctx.value(j))), score }
}

fn up(ctx: &DiveContext<'_>, j: usize, score: f64) -> ScoreDecision {
    ScoreDecision { var: j, direction: Direction::TightenLowerTo(num::ceil(ctx.value(j))), score }
}

fn fix_first(ctx: &DiveContext<'_>) -> Option<ScoreDecision> {
    let j = *ctx.candidates.first()?;
    let v = num::round(ctx.value(j)).clamp(ctx.lower[j], ctx.upper[j]);
    Some(ScoreDecision { var: j, direction: Direction::Fix(v), score: 0.0 })
}

/// Picks the fractional candidate minimizing `key`, lowest index on ties.
fn argmin_fractional<K>(ctx: &DiveContext<'_>, mut key: K) -> Option<ScoreDecision>
where
    K: FnMut(usize) -> Option<ScoreDecision>,
{
    let mut best: Option<ScoreDecision> = None;
    for j in ctx.fractional_candidates(INT_TOL) {
        if let Some(d) = key(j) {
            if best.map_or(true, |b| d.score < b.score) {
                best = Some(d);
            }
        }
    }
    best
}

/// Rounds the least fractional variable to its nearest integer.
#[derive(Clone, Copy, Debug, Default)]
pub struct Fractional;

fn nearest(ctx: &DiveContext<'_>, j: usize) -> ScoreDecision {
    let x = ctx.value(j);
    let f = x - num::floor(x);
    if f < 0.5 {
        down(ctx, j, f)
    } else {
        up(ctx, j, 1.0 - f)
    }
}

impl Scorer for Fractional {
    fn name(&self) -> &str {
        "fractional"
    }

    fn select(&mut self, ctx: &DiveContext<'_>) -> Option<ScoreDecision> {
        argmin_fractional(ctx, |j| Some(nearest(ctx, j))).or_else(|| fix_first(ctx))
    }
}

/// Rounds in the direction with fewer locks, preferring variables with the
/// fewest such locks and then the smallest rounding distance.
#[derive(Clone, Copy, Debug, Default)]
pub struct Coefficient;

impl Scorer for Coefficient {
    fn name(&self) -> &str {
        "coefficient"
    }

    fn select(&mut self, ctx: &DiveContext<'_>) -> Option<ScoreDecision> {
        argmin_fractional(ctx, |j| {
            let x = ctx.value(j);
            let f = x - num::floor(x);
            let l = ctx.locks[j];
            let go_down = l.down < l.up || (l.down == l.up && f < 0.5);
            // lock count dominates, distance breaks ties
            Some(if go_down { down(ctx, j, l.down as f64 + f) } else { up(ctx, j, l.up as f64 + (1.0 - f)) })
        })
        .or_else(|| fix_first(ctx))
    }
}

/// Follows the ray from the dive's starting LP point through the current
/// one and rounds the variable that would hit an integer first.
#[derive(Clone, Copy, Debug, Default)]
pub struct Linesearch;

impl Scorer for Linesearch {
    fn name(&self) -> &str {
        "linesearch"
    }

    fn select(&mut self, ctx: &DiveContext<'_>) -> Option<ScoreDecision> {
        argmin_fractional(ctx, |j| {
            let x = ctx.value(j);
            let x0 = ctx.start.x[j];
            if x < x0 - INT_TOL {
                Some(down(ctx, j, (x - num::floor(x)) / (x0 - x)))
            } else if x > x0 + INT_TOL {
                Some(up(ctx, j, (num::ceil(x) - x) / (x - x0)))
            } else {
                None
            }
        })
        .or_else(|| Fractional.select(ctx))
    }
}

/// Rounds in the direction that worsens the objective, scoring the
/// objective change per row the column touches.
#[derive(Clone, Copy, Debug, Default)]
pub struct Vectorlength;

impl Scorer for Vectorlength {
    fn name(&self) -> &str {
        "vectorlength"
    }

    fn select(&mut self, ctx: &DiveContext<'_>) -> Option<ScoreDecision> {
        argmin_fractional(ctx, |j| {
            let x = ctx.value(j);
            let c = ctx.instance.objective[j];
            let rows = (ctx.lp.matrix.col_start[j + 1] - ctx.lp.matrix.col_start[j]) as f64;
            let score = |dist: f64| (c.abs() * dist + 1e-9) / (rows + 1.0);
            Some(if c >= 0.0 { up(ctx, j, score(num::ceil(x) - x)) } else { down(ctx, j, score(x - num::floor(x))) })
        })
        .or_else(|| fix_first(ctx))
    }
}

/// Pseudocosts learned across dives from observed objective degradation,
/// started at `|c_j|` per unit.
#[derive(Clone, Debug, Default)]
pub struct PseudocostLite {
    // per variable: (sum, count) for down and up moves
    down: Vec<(f64, usize)>,
    up: Vec<(f64, usize)>,
}

impl PseudocostLite {
    fn estimate(table: &[(f64, usize)], j: usize, cold: f64) -> f64 {
        match table.get(j) {
            Some(&(sum, count)) if count > 0 => sum / count as f64,
            _ => cold,
        }
    }

    pub fn unit_costs(&self, j: usize, cold: f64) -> (f64, f64) {
        (Self::estimate(&self.down, j, cold), Self::estimate(&self.up, j, cold))
    }
}

impl Scorer for PseudocostLite {
    fn name(&self) -> &str {
        "pseudocost"
    }

    fn begin_dive(&mut self, ctx: &DiveContext<'_>) {
        let n = ctx.instance.num_vars();
        if self.down.len() < n {
            self.down.resize(n, (0.0, 0));
            self.up.resize(n, (0.0, 0));
        }
    }

    fn select(&mut self, ctx: &DiveContext<'_>) -> Option<ScoreDecision> {
        argmin_fractional(ctx, |j| {
            let x = ctx.value(j);
            let f = x - num::floor(x);
            let (pd, pu) = self.unit_costs(j, ctx.instance.objective[j].abs());
            let (cd, cu) = (pd * f, pu * (1.0 - f));
            Some(if cd <= cu { down(ctx, j, cd) } else { up(ctx, j, cu) })
        })
        .or_else(|| fix_first(ctx))
    }

    fn observe(&mut self, obs: &Observation) {
        if obs.distance <= 1e-9 {
            return;
        }
        let table = if obs.upward { &mut self.up } else { &mut self.down };
        if table.len() <= obs.var {
            table.resize(obs.var + 1, (0.0, 0));
        }
        let entry = &mut table[obs.var];
        entry.0 += obs.degradation / obs.distance;
        entry.1 += 1;
    }
}

fn first_fractional(ctx: &DiveContext<'_>) -> Option<usize> {
    ctx.fractional_candidates(INT_TOL).next()
}

/// Rounds the lowest-index fractional candidate down.
#[derive(Clone, Copy, Debug, Default)]
pub struct LowerDiver;

impl Scorer for LowerDiver {
    fn name(&self) -> &str {
        "lower"
    }

    fn select(&mut self, ctx: &DiveContext<'_>) -> Option<ScoreDecision> {
        first_fractional(ctx).map(|j| down(ctx, j, 0.0)).or_else(|| fix_first(ctx))
    }
}

/// Rounds the lowest-index fractional candidate up.
#[derive(Clone, Copy, Debug, Default)]
pub struct UpperDiver;

impl Scorer for UpperDiver {
    fn name(&self) -> &str {
        "upper"
    }

    fn select(&mut self, ctx: &DiveContext<'_>) -> Option<ScoreDecision> {
        first_fractional(ctx).map(|j| up(ctx, j, 0.0)).or_else(|| fix_first(ctx))
    }
}

/// Rounds a uniformly chosen fractional candidate in a random direction.
#[derive(Clone, Debug)]
pub struct RandomDiver {
    rng: ChaCha8Rng,
}

impl RandomDiver {
    pub fn new(seed: u64) -> Self {
        RandomDiver { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Scorer for RandomDiver {
    fn name(&self) -> &str {
        "random"
    }

    fn select(&mut self, ctx: &DiveContext<'_>) -> Option<ScoreDecision> {
        let fractional: Vec<usize> = ctx.fractional_candidates(INT_TOL).collect();
        if fractional.is_empty() {
            return fix_first(ctx);
        }
        let j = fractional[self.rng.gen_range(0..fractional.len())];
        Some(if self.rng.gen_bool(0.5) { down(ctx, j, 0.0) } else { up(ctx, j, 0.0) })
    }
}
