use divekit_core::bnb::{branch_and_bound, enumerate_optima, SolveConfig, SolveStatus};
use divekit_core::num::is_integral;
use divekit_core::simplex::{solve_lp, LpStatus};
use divekit_core::to_standard_form;
use serde::Serialize;

use super::{par_map, HarnessError, NamedInstance};
use crate::clock::ClockKind;
use crate::corpus::{Corpus, CorpusEntry, PoolSolution};

#[derive(Clone, Debug, Serialize)]
pub struct CollectConfig {
    pub node_limit: usize,
    /// Seconds per instance on the chosen clock.
    pub time_limit: f64,
    /// Solutions kept per instance from branch and bound.
    pub pool_capacity: usize,
    /// Replace the pool by every optimal assignment on symmetric families.
    pub enumerate_symmetric: bool,
    pub enumeration_cap: usize,
    pub clock: ClockKind,
}

impl Default for CollectConfig {
    fn default() -> Self {
        CollectConfig {
            node_limit: 50_000,
            time_limit: 60.0,
            pool_capacity: 1,
            enumerate_symmetric: true,
            enumeration_cap: 64,
            clock: ClockKind::Work,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CollectOutcome {
    pub corpus: Corpus,
    /// Instances whose root LP was already integral.
    pub dropped: Vec<String>,
    pub failed: Vec<(String, String)>,
}

enum Collected {
    Entry(CorpusEntry),
    Dropped,
    Failed(String),
}

fn collect_one(inst: &NamedInstance, cfg: &CollectConfig) -> Collected {
    let m = &inst.instance;
    let lp = to_standard_form(m);
    let root = match solve_lp(&lp, None, &Default::default()) {
        Ok(r) if r.status == LpStatus::Optimal => r,
        Ok(r) => return Collected::Failed(format!("root LP status {:?}", r.status)),
        Err(e) => return Collected::Failed(format!("root LP: {e}")),
    };
    if m.integers.iter().all(|&j| is_integral(root.x[j], 1e-6)) {
        return Collected::Dropped;
    }
    let solve = SolveConfig {
        time_limit: cfg.time_limit,
        node_limit: cfg.node_limit,
        pool_capacity: cfg.pool_capacity.max(1),
        ..SolveConfig::default()
    };
    let clock = cfg.clock.start();
    let out = match branch_and_bound(m, &solve, &mut [], clock.as_ref()) {
        Ok(o) => o,
        Err(e) => return Collected::Failed(format!("branch and bound: {e}")),
    };
    if out.pool.is_empty() {
        return Collected::Failed(format!("no feasible solution ({:?})", out.status));
    }
    let proven = out.status == SolveStatus::OptimalProven;
    let mut pool: Vec<PoolSolution> =
        out.pool.entries().iter().map(|e| PoolSolution { x: e.x.clone(), objective: e.objective }).collect();
    let mut enumerated = false;
    if proven && cfg.enumerate_symmetric && inst.family.is_some_and(|f| f.is_symmetric()) {
        let enum_cfg = SolveConfig { pool_capacity: cfg.enumeration_cap.max(1), ..solve };
        let clock = cfg.clock.start();
        if let Ok(e) = enumerate_optima(m, &enum_cfg, clock.as_ref()) {
            pool = e.solutions.into_iter().map(|s| PoolSolution { x: s.x, objective: s.objective }).collect();
            enumerated = true;
        }
    }
    Collected::Entry(CorpusEntry { id: inst.id.clone(), optimum: out.primal_bound(), proven, enumerated, pool })
}

/// Solves every instance and keeps its solution pool. Instances solved by
/// the root LP are dropped; failures are reported and skipped.
pub fn collect(instances: &[NamedInstance], cfg: &CollectConfig, jobs: usize) -> Result<CollectOutcome, HarnessError> {
    let results = par_map(jobs, instances, |inst| collect_one(inst, cfg))?;
    let mut entries = Vec::new();
    let mut dropped = Vec::new();
    let mut failed = Vec::new();
    for (inst, r) in instances.iter().zip(results) {
        match r {
            Collected::Entry(e) => entries.push(e),
            Collected::Dropped => dropped.push(inst.id.clone()),
            Collected::Failed(why) => failed.push((inst.id.clone(), why)),
        }
    }
    entries.sort_by(|a, b| a.id.cmp(&b.id));
    dropped.sort();
    failed.sort();
    Ok(CollectOutcome { corpus: Corpus::new(entries), dropped, failed })
}
