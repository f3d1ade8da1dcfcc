use std::collections::HashMap;

use divekit_core::graphnet::{
    default_temperature, extract_graph, target_distribution, train, AdamConfig, Example, GnnDims, GnnParams,
    GradResult, TrainReport, TrainingConfig, DEFAULT_HEADS, HIDDEN,
};
use divekit_core::simplex::solve_lp;
use divekit_core::to_standard_form;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{par_map, HarnessError, NamedInstance};
use crate::corpus::Corpus;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelConfig {
    pub hidden: usize,
    pub heads: usize,
    pub init_seed: u64,
    /// Fixed softmax temperature; per-pool default when absent.
    pub tau: Option<f64>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub valid_every: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let t = TrainingConfig::default();
        ModelConfig {
            hidden: HIDDEN,
            heads: DEFAULT_HEADS,
            init_seed: 0,
            tau: t.tau,
            // a larger step and more epochs than the core defaults did
            // better on held-out set cover at desk scale
            learning_rate: 3e-3,
            epochs: 60,
            batch_size: t.batch_size,
            valid_every: t.valid_every,
            seed: t.seed,
        }
    }
}

impl ModelConfig {
    pub fn training(&self) -> TrainingConfig {
        TrainingConfig {
            tau: self.tau,
            adam: AdamConfig { learning_rate: self.learning_rate, ..AdamConfig::default() },
            epochs: self.epochs,
            batch_size: self.batch_size,
            valid_every: self.valid_every,
            seed: self.seed,
        }
    }

    pub fn dims(&self) -> GnnDims {
        GnnDims { heads: self.heads, ..GnnDims::with_hidden(self.hidden) }
    }
}

/// Root graph plus target distribution for every corpus entry whose instance
/// is present, in corpus order. Entries that fail are returned separately.
pub fn build_examples(
    corpus: &Corpus,
    instances: &[NamedInstance],
    tau: Option<f64>,
    jobs: usize,
) -> Result<(Vec<Example>, Vec<(String, String)>), HarnessError> {
    let by_id: HashMap<&str, &NamedInstance> = instances.iter().map(|i| (i.id.as_str(), i)).collect();
    let results = par_map(jobs, &corpus.entries, |entry| -> Result<Example, String> {
        let inst = by_id.get(entry.id.as_str()).ok_or("instance not found")?;
        let lp = to_standard_form(&inst.instance);
        let root = solve_lp(&lp, None, &Default::default()).map_err(|e| e.to_string())?;
        let graph = extract_graph(&inst.instance, &root).map_err(|e| e.to_string())?;
        let pool = entry.pool_entries();
        let objectives: Vec<f64> = pool.iter().map(|p| p.objective).collect();
        let tau = tau.unwrap_or_else(|| default_temperature(&objectives));
        let target = target_distribution(&pool, &graph.candidates, tau).map_err(|e| e.to_string())?;
        Ok(Example { graph, target })
    })?;
    let mut examples = Vec::new();
    let mut failed = Vec::new();
    for (entry, r) in corpus.entries.iter().zip(results) {
        match r {
            Ok(e) => examples.push(e),
            Err(why) => failed.push((entry.id.clone(), why)),
        }
    }
    Ok((examples, failed))
}

/// Trains a fresh model, evaluating per-example gradients in parallel.
pub fn train_model(
    train_set: &[Example],
    valid_set: &[Example],
    cfg: &ModelConfig,
    jobs: usize,
) -> Result<(GnnParams, TrainReport), HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let mut params = GnnParams::init(cfg.dims(), cfg.init_seed);
    let report = train(&mut params, train_set, valid_set, &cfg.training(), |idx, f| -> Vec<GradResult> {
        pool.install(|| idx.par_iter().map(|&i| f(i)).collect())
    })?;
    Ok((params, report))
}
