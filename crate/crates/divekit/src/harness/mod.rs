//! Data collection, training, benchmarking and tuning over many instances.
//! Work is spread over a rayon pool; every result list is sorted by a stable
//! key before it is returned, so output never depends on scheduling.

mod collect;
mod eval;
mod train;
mod tune;
mod verify;

use std::path::{Path, PathBuf};

use divekit_core::diving::{scorer_by_name, Scorer, HEURISTIC_NAMES};
use divekit_core::generate::Family;
use divekit_core::graphnet::{GnnParams, Strategy};
use divekit_core::l2dive::L2Dive;
use divekit_core::MilpInstance;
use rayon::prelude::*;

use crate::format::{read_instance, FormatError};

pub use collect::{collect, CollectConfig, CollectOutcome};
pub use eval::{
    eval_bnb, eval_dives, BnbMethod, BnbSummary, BnbTable, DiveSummary, DiveTable, DiverSpec, EvalBnbConfig,
    MetricRecord, ScheduleSpec, WIN_TIE_NOTE,
};
pub use train::{build_examples, train_model, ModelConfig};
pub use tune::{default_schedule, tune, FreqChoice, TuneConfig, TuneObjective, TuneResult};
pub use verify::{verify, VerifyCheck, VerifyConfig};

/// An instance with the identifier used in every output row.
#[derive(Clone, Debug)]
pub struct NamedInstance {
    pub id: String,
    pub family: Option<Family>,
    pub instance: MilpInstance,
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("unknown diver {0:?}")]
    UnknownDiver(String),
    #[error("diver l2dive needs a model (--model)")]
    MissingModel,
    #[error("divers in one table must share d_max and lp_iter_limit; got {0}")]
    MixedBudgets(String),
    #[error("no known optimum for instance {0}")]
    MissingOptimum(String),
    #[error("{0}")]
    Config(String),
    #[error("model: {0}")]
    Model(divekit_core::graphnet::GraphError),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl From<divekit_core::graphnet::GraphError> for HarnessError {
    fn from(e: divekit_core::graphnet::GraphError) -> Self {
        HarnessError::Model(e)
    }
}

/// Every name the diver registry accepts.
pub fn diver_names() -> Vec<&'static str> {
    let mut v = HEURISTIC_NAMES.to_vec();
    v.push("l2dive");
    v
}

/// Builds a registered diver. The learned diver uses the mode prediction.
pub fn make_scorer<'m>(
    name: &str,
    seed: u64,
    model: Option<&'m GnnParams>,
) -> Result<Box<dyn Scorer + 'm>, HarnessError> {
    if name == "l2dive" {
        let model = model.ok_or(HarnessError::MissingModel)?;
        return Ok(Box::new(L2Dive::new(model, Strategy::Mode)));
    }
    scorer_by_name(name, seed).ok_or_else(|| HarnessError::UnknownDiver(name.to_string()))
}

/// Order-preserving parallel map on a pool of `jobs` threads (0 = all cores).
pub(crate) fn par_map<T, R, F>(jobs: usize, items: &[T], f: F) -> Result<Vec<R>, HarnessError>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

/// Mean and standard error of the mean; the error is zero below two samples.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Family named by an id prefix such as `set-cover-00017`.
pub fn family_from_id(id: &str) -> Option<Family> {
    Family::ALL.into_iter().find(|f| id.strip_prefix(f.name()).is_some_and(|rest| rest.starts_with('-')))
}

/// Every `.json` and `.mps` instance in `dir`, sorted by file stem, which
/// becomes the instance id.
pub fn load_instances(dir: &Path) -> Result<Vec<NamedInstance>, FormatError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("json" | "mps")))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let id = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            let instance = read_instance(&p)?;
            Ok(NamedInstance { family: family_from_id(&id), id, instance })
        })
        .collect()
}
