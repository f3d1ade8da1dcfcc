use std::collections::HashMap;

use divekit_core::graphnet::GnnParams;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{eval_bnb, BnbMethod, EvalBnbConfig, HarnessError, NamedInstance, ScheduleSpec};

/// Per-diver frequency choice relative to its default interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FreqChoice {
    Off,
    /// Twice as often: half the interval.
    Double,
    Default,
    /// Half as often: twice the interval.
    Half,
}

const FREQ_CHOICES: [FreqChoice; 4] = [FreqChoice::Off, FreqChoice::Double, FreqChoice::Default, FreqChoice::Half];

/// Default interval and first node for every registered diver.
pub fn default_schedule(diver: &str) -> ScheduleSpec {
    let offset = match diver {
        "coefficient" => 1,
        "pseudocost" => 2,
        "fractional" => 3,
        "vectorlength" => 4,
        "linesearch" => 6,
        _ => 0,
    };
    ScheduleSpec { diver: diver.to_string(), freq: 10, offset }
}

fn apply(diver: &str, freq: FreqChoice, default_offset: bool) -> Option<ScheduleSpec> {
    let d = default_schedule(diver);
    let freq = match freq {
        FreqChoice::Off => return None,
        FreqChoice::Double => (d.freq / 2).max(1),
        FreqChoice::Default => d.freq,
        FreqChoice::Half => d.freq * 2,
    };
    Some(ScheduleSpec { freq, offset: if default_offset { d.offset } else { 0 }, ..d })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TuneObjective {
    /// Mean primal-dual integral.
    Integral,
    /// Mean solve time.
    Time,
}

#[derive(Clone, Debug, Serialize)]
pub struct TuneConfig {
    /// Random configurations tried besides the default one.
    pub samples: usize,
    pub seed: u64,
    pub objective: TuneObjective,
    pub divers: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TuneResult {
    pub best: BnbMethod,
    pub best_score: f64,
    pub default_score: f64,
    /// Every configuration tried with its score, the default first.
    pub tried: Vec<(BnbMethod, f64)>,
    /// Branch-and-bound runs spent.
    pub solver_calls: usize,
}

/// Random search over diver schedules. The default schedule is always scored
/// and is kept unless some sample is strictly better.
pub fn tune(
    instances: &[NamedInstance],
    optima: &HashMap<String, f64>,
    bnb: &EvalBnbConfig,
    cfg: &TuneConfig,
    model: Option<&GnnParams>,
    jobs: usize,
) -> Result<TuneResult, HarnessError> {
    if cfg.samples == 0 {
        return Err(HarnessError::Config("tune needs at least one sample".into()));
    }
    let default = BnbMethod { name: "default".into(), slots: cfg.divers.iter().map(|d| default_schedule(d)).collect() };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut candidates = vec![default];
    for s in 0..cfg.samples {
        let slots = cfg
            .divers
            .iter()
            .filter_map(|d| apply(d, *FREQ_CHOICES.choose(&mut rng).unwrap(), rand::Rng::gen(&mut rng)))
            .collect();
        candidates.push(BnbMethod { name: format!("sample-{s}"), slots });
    }
    let table = eval_bnb(instances, optima, &candidates, bnb, model, jobs)?;
    let score = |name: &str| {
        let s = table.summary.iter().find(|s| s.method == name).expect("every candidate is summarized");
        match cfg.objective {
            TuneObjective::Integral => s.mean_integral,
            TuneObjective::Time => s.mean_time,
        }
    };
    let tried: Vec<(BnbMethod, f64)> = candidates.iter().map(|m| (m.clone(), score(&m.name))).collect();
    let default_score = tried[0].1;
    let (best, best_score) = tried.iter().fold(&tried[0], |acc, c| if c.1 < acc.1 { c } else { acc }).clone();
    Ok(TuneResult { best, best_score, default_score, tried, solver_calls: table.records.len() })
}
