use std::collections::HashMap;
use std::time::Instant;

use divekit_core::bnb::{branch_and_bound, compute_locks, DiverSlot, SolveConfig, SolveStatus};
use divekit_core::clock::{Clock, WorkClock};
use divekit_core::diving::{dive, DiveConfig, Scorer};
use divekit_core::graphnet::GnnParams;
use divekit_core::metrics::{primal_dual_gap, primal_dual_integral, primal_gap};
use divekit_core::simplex::{solve_lp, LpStatus};
use divekit_core::to_standard_form;
use serde::{Deserialize, Serialize};

use super::{make_scorer, mean_stderr, par_map, HarnessError, NamedInstance};
use crate::clock::ClockKind;

/// One row of a results table. Fields that do not apply are left empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub instance: String,
    pub method: String,
    pub seed: u64,
    pub status: String,
    /// Infinite when no solution was found.
    pub primal_gap: Option<f64>,
    pub primal_dual_gap: Option<f64>,
    pub primal_dual_integral: Option<f64>,
    pub solve_time: f64,
    pub dive_depth: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiverSpec {
    pub name: String,
    pub d_max: usize,
    pub lp_iter_limit: Option<usize>,
}

impl DiverSpec {
    pub fn new(name: &str, d_max: usize) -> Self {
        DiverSpec { name: name.into(), d_max, lp_iter_limit: DiveConfig::default().lp_iter_limit }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiveSummary {
    pub method: String,
    pub instances: usize,
    pub failed: usize,
    pub failure_rate: f64,
    /// Over dives that found a solution.
    pub mean_primal_gap: f64,
    pub stderr_primal_gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiveTable {
    pub records: Vec<MetricRecord>,
    pub summary: Vec<DiveSummary>,
}

fn elapsed(kind: ClockKind, wall: Instant, lp_iterations: usize) -> f64 {
    match kind {
        ClockKind::Wall => wall.elapsed().as_secs_f64(),
        ClockKind::Work => {
            let c = WorkClock::default();
            c.charge(lp_iterations);
            c.elapsed()
        }
    }
}

/// One dive per instance and diver from the root LP, scored against the
/// known optimum of each instance. Every diver must have the same budget.
pub fn eval_dives(
    instances: &[NamedInstance],
    optima: &HashMap<String, f64>,
    divers: &[DiverSpec],
    seed: u64,
    model: Option<&GnnParams>,
    clock: ClockKind,
    jobs: usize,
) -> Result<DiveTable, HarnessError> {
    if let Some(first) = divers.first() {
        if let Some(d) = divers.iter().find(|d| d.d_max != first.d_max || d.lp_iter_limit != first.lp_iter_limit) {
            return Err(HarnessError::MixedBudgets(format!("{} vs {}", first.name, d.name)));
        }
    }
    for d in divers {
        make_scorer(&d.name, seed, model)?;
    }
    for inst in instances {
        if !optima.contains_key(&inst.id) {
            return Err(HarnessError::MissingOptimum(inst.id.clone()));
        }
    }
    let indexed: Vec<(usize, &NamedInstance)> = instances.iter().enumerate().collect();
    let rows = par_map(jobs, &indexed, |&(k, inst)| {
        let best = optima[&inst.id];
        let m = &inst.instance;
        let lp = to_standard_form(m);
        let locks = compute_locks(m);
        let start = solve_lp(&lp, None, &Default::default());
        let mut out = Vec::with_capacity(divers.len());
        for d in divers {
            let dive_seed = seed.wrapping_add(k as u64);
            let mut rec = MetricRecord {
                instance: inst.id.clone(),
                method: d.name.clone(),
                seed: dive_seed,
                status: String::new(),
                primal_gap: Some(f64::INFINITY),
                primal_dual_gap: None,
                primal_dual_integral: None,
                solve_time: 0.0,
                dive_depth: None,
            };
            let start = match &start {
                Ok(s) if s.status == LpStatus::Optimal => s,
                _ => {
                    rec.status = "root-lp-failed".into();
                    out.push(rec);
                    continue;
                }
            };
            let cfg = DiveConfig { d_max: d.d_max, lp_iter_limit: d.lp_iter_limit, ..DiveConfig::default() };
            let mut scorer = make_scorer(&d.name, dive_seed, model).expect("checked above");
            let wall = Instant::now();
            match dive(m, &lp, &locks, start, &lp.lower, &lp.upper, &cfg, scorer.as_mut()) {
                Ok(r) => {
                    rec.solve_time = elapsed(clock, wall, r.lp_iterations);
                    rec.dive_depth = Some(r.depth_reached);
                    rec.status = format!("{:?}", r.termination).to_lowercase();
                    if let Some(z) = r.best_objective() {
                        rec.primal_gap = Some(primal_gap(z, best));
                    }
                }
                Err(e) => rec.status = format!("error: {e}"),
            }
            out.push(rec);
        }
        out
    })?;
    let mut records: Vec<MetricRecord> = rows.into_iter().flatten().collect();
    records.sort_by(|a, b| (&a.instance, &a.method).cmp(&(&b.instance, &b.method)));

    let summary = divers
        .iter()
        .map(|d| {
            let mine: Vec<&MetricRecord> = records.iter().filter(|r| r.method == d.name).collect();
            let gaps: Vec<f64> = mine.iter().filter_map(|r| r.primal_gap).filter(|g| g.is_finite()).collect();
            let failed = mine.len() - gaps.len();
            let (mean, se) = mean_stderr(&gaps);
            DiveSummary {
                method: d.name.clone(),
                instances: mine.len(),
                failed,
                failure_rate: if mine.is_empty() { 0.0 } else { failed as f64 / mine.len() as f64 },
                mean_primal_gap: if gaps.is_empty() { f64::INFINITY } else { mean },
                stderr_primal_gap: se,
            }
        })
        .collect();
    Ok(DiveTable { records, summary })
}

/// When and how often a diver runs inside branch and bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub diver: String,
    pub freq: usize,
    pub offset: usize,
}

/// A named solver configuration; no slots means no diving.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BnbMethod {
    pub name: String,
    pub slots: Vec<ScheduleSpec>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvalBnbConfig {
    /// Horizon for the primal-dual integral and the solve limit.
    pub time_limit: f64,
    pub node_limit: usize,
    pub seeds: Vec<u64>,
    pub d_max: usize,
    pub lp_iter_limit: Option<usize>,
    pub clock: ClockKind,
}

impl Default for EvalBnbConfig {
    fn default() -> Self {
        EvalBnbConfig {
            time_limit: 60.0,
            node_limit: usize::MAX,
            seeds: vec![0, 1, 2],
            d_max: 100,
            lp_iter_limit: DiveConfig::default().lp_iter_limit,
            clock: ClockKind::Work,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BnbSummary {
    pub method: String,
    pub runs: usize,
    pub solved: usize,
    pub mean_integral: f64,
    /// Standard error of the per-seed mean integral.
    pub stderr_integral: f64,
    pub mean_time: f64,
    /// Instances where this method had the best seed-averaged integral;
    /// every tied method wins.
    pub wins: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BnbTable {
    pub records: Vec<MetricRecord>,
    pub summary: Vec<BnbSummary>,
}

pub const WIN_TIE_NOTE: &str = "wins: ties within 1e-9 award a win to every tied method";

/// Runs branch and bound for every instance, method and seed.
pub fn eval_bnb(
    instances: &[NamedInstance],
    optima: &HashMap<String, f64>,
    methods: &[BnbMethod],
    cfg: &EvalBnbConfig,
    model: Option<&GnnParams>,
    jobs: usize,
) -> Result<BnbTable, HarnessError> {
    if !cfg.time_limit.is_finite() || cfg.time_limit <= 0.0 {
        return Err(HarnessError::Config("eval-bnb needs a finite positive time limit".into()));
    }
    for s in methods.iter().flat_map(|m| &m.slots) {
        make_scorer(&s.diver, 0, model)?;
    }
    let mut runs = Vec::new();
    for inst in instances {
        for method in methods {
            for &seed in &cfg.seeds {
                runs.push((inst, method, seed));
            }
        }
    }
    let solve = SolveConfig { time_limit: cfg.time_limit, node_limit: cfg.node_limit, ..SolveConfig::default() };
    let dive_cfg = DiveConfig { d_max: cfg.d_max, lp_iter_limit: cfg.lp_iter_limit, ..DiveConfig::default() };
    let mut records = par_map(jobs, &runs, |&(inst, method, seed)| {
        let mut scorers: Vec<Box<dyn Scorer + '_>> =
            method.slots.iter().map(|s| make_scorer(&s.diver, seed, model).expect("checked above")).collect();
        let mut slots: Vec<DiverSlot<'_>> = scorers
            .iter_mut()
            .zip(&method.slots)
            .map(|(sc, s)| DiverSlot { scorer: sc.as_mut(), freq: s.freq, offset: s.offset, dive: dive_cfg })
            .collect();
        let clock = cfg.clock.start();
        let mut rec = MetricRecord {
            instance: inst.id.clone(),
            method: method.name.clone(),
            seed,
            status: String::new(),
            primal_gap: None,
            primal_dual_gap: None,
            primal_dual_integral: None,
            solve_time: cfg.time_limit,
            dive_depth: None,
        };
        match branch_and_bound(&inst.instance, &solve, &mut slots, clock.as_ref()) {
            Ok(out) => {
                let last = out.trace.last();
                rec.status = format!("{:?}", out.status).to_lowercase();
                rec.primal_dual_gap = Some(last.map_or(1.0, |p| primal_dual_gap(p.primal, p.dual)));
                rec.primal_dual_integral = Some(primal_dual_integral(&out.trace, cfg.time_limit));
                if out.status == SolveStatus::OptimalProven {
                    rec.solve_time = last.map_or(0.0, |p| p.t).min(cfg.time_limit);
                }
                rec.primal_gap = optima.get(&inst.id).map(|&best| primal_gap(out.primal_bound(), best));
            }
            Err(e) => rec.status = format!("error: {e}"),
        }
        rec
    })?;
    records.sort_by(|a, b| (&a.instance, &a.method, a.seed).cmp(&(&b.instance, &b.method, b.seed)));

    // seed-averaged integral per (instance, method)
    let mut per_instance: HashMap<(&str, &str), Vec<f64>> = HashMap::new();
    for r in &records {
        per_instance
            .entry((r.instance.as_str(), r.method.as_str()))
            .or_default()
            .push(r.primal_dual_integral.unwrap_or(cfg.time_limit));
    }
    let mut wins: HashMap<&str, usize> = HashMap::new();
    for inst in instances {
        let means: Vec<(&str, f64)> = methods
            .iter()
            .map(|m| {
                let v = &per_instance[&(inst.id.as_str(), m.name.as_str())];
                (m.name.as_str(), v.iter().sum::<f64>() / v.len() as f64)
            })
            .collect();
        let best = means.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
        for (name, v) in means {
            if v <= best + 1e-9 {
                *wins.entry(name).or_default() += 1;
            }
        }
    }

    let summary = methods
        .iter()
        .map(|m| {
            let mine: Vec<&MetricRecord> = records.iter().filter(|r| r.method == m.name).collect();
            let integrals: Vec<f64> = mine.iter().map(|r| r.primal_dual_integral.unwrap_or(cfg.time_limit)).collect();
            let per_seed: Vec<f64> = cfg
                .seeds
                .iter()
                .map(|&s| {
                    let v: Vec<f64> = mine
                        .iter()
                        .filter(|r| r.seed == s)
                        .map(|r| r.primal_dual_integral.unwrap_or(cfg.time_limit))
                        .collect();
                    mean_stderr(&v).0
                })
                .collect();
            let times: Vec<f64> = mine.iter().map(|r| r.solve_time).collect();
            BnbSummary {
                method: m.name.clone(),
                runs: mine.len(),
                solved: mine.iter().filter(|r| r.status == "optimalproven").count(),
                mean_integral: mean_stderr(&integrals).0,
                stderr_integral: mean_stderr(&per_seed).1,
                mean_time: mean_stderr(&times).0,
                wins: wins.get(m.name.as_str()).copied().unwrap_or(0),
            }
        })
        .collect();
    Ok(BnbTable { records, summary })
}
