use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{adam_step, AdamConfig, AdamState};
use super::features::BipartiteGraph;
use super::model::{GnnParams, NormStats};
use super::target::TargetDistribution;
use super::GraphError;

#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub graph: BipartiteGraph,
    pub target: TargetDistribution,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainingConfig {
    /// Softmax temperature for building targets; `None` picks a per-pool
    /// default from the objective spread.
    pub tau: Option<f64>,
    pub adam: AdamConfig,
    pub epochs: usize,
    pub batch_size: usize,
    /// Validate every this many epochs (and after the last one).
    pub valid_every: usize,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig { tau: None, adam: AdamConfig::default(), epochs: 50, batch_size: 16, valid_every: 1, seed: 0 }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), GraphError> {
        let tau_ok = self.tau.map_or(true, |t| t > 0.0 && t.is_finite());
        let rates_ok = self.adam.learning_rate > 0.0 && self.adam.eps > 0.0;
        let betas_ok = (0.0..1.0).contains(&self.adam.beta1) && (0.0..1.0).contains(&self.adam.beta2);
        if !tau_ok {
            return Err(GraphError::InvalidTemperature);
        }
        if !rates_ok || !betas_ok || self.batch_size == 0 {
            return Err(GraphError::InvalidConfig);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochReport {
    pub epoch: usize,
    /// Mean per-graph KL seen during the epoch, before each batch update.
    pub train_loss: f64,
    pub valid_loss: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub epochs: Vec<EpochReport>,
    pub best_epoch: usize,
}

pub type GradResult = Result<(f64, Vec<f64>), GraphError>;

/// Per-example loss and gradient, indexed into the training set.
pub type GradFn<'a> = dyn Fn(usize) -> GradResult + Sync + 'a;

/// Evaluates `f` at every index, in order. The std crate swaps in a parallel
/// version; results must come back in index order either way.
pub fn sequential_map(indices: &[usize], f: &GradFn<'_>) -> Vec<GradResult> {
    indices.iter().map(|&i| f(i)).collect()
}

/// Mean evaluation-mode KL over `examples`.
pub fn mean_loss(params: &GnnParams, examples: &[Example]) -> Result<f64, GraphError> {
    if examples.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for e in examples {
        total += params.loss(&e.graph, &params.running, &e.target)?;
    }
    Ok(total / examples.len() as f64)
}

/// Minibatch ADAM on the KL objective. With a validation set the parameters
/// of the best validation epoch are kept; otherwise the final ones.
pub fn train<M>(
    params: &mut GnnParams,
    train_set: &[Example],
    valid_set: &[Example],
    cfg: &TrainingConfig,
    map: M,
) -> Result<TrainReport, GraphError>
where
    M: Fn(&[usize], &GradFn<'_>) -> Vec<GradResult>,
{
    cfg.validate()?;
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = AdamState::new(params.num_params());
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut epochs = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, GnnParams)> = None;

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let graphs: Vec<&BipartiteGraph> = batch.iter().map(|&i| &train_set[i].graph).collect();
            let stats = NormStats::from_batch(&graphs);
            params.update_running(&stats);
            let results = {
                let p: &GnnParams = params;
                let f = |i: usize| p.loss_and_grad(&train_set[i].graph, &stats, &train_set[i].target);
                map(batch, &f)
            };
            let mut grad = alloc::vec![0.0; params.num_params()];
            for r in results {
                let (loss, g) = r?;
                loss_sum += loss;
                for (a, b) in grad.iter_mut().zip(&g) {
                    *a += b;
                }
            }
            let scale = 1.0 / batch.len() as f64;
            grad.iter_mut().for_each(|g| *g *= scale);
            adam_step(&mut params.theta, &grad, &mut state, &cfg.adam)?;
        }
        let train_loss = loss_sum / train_set.len().max(1) as f64;
        let last = epoch + 1 == cfg.epochs;
        let valid_loss = if !valid_set.is_empty() && (last || (epoch + 1) % cfg.valid_every.max(1) == 0) {
            Some(mean_loss(params, valid_set)?)
        } else {
            None
        };
        epochs.push(EpochReport { epoch, train_loss, valid_loss });
        if let Some(v) = valid_loss {
            if best.as_ref().map_or(true, |b| v < b.0) {
                best = Some((v, epoch, params.clone()));
            }
        }
    }

    let best_epoch = match best {
        Some((_, epoch, snapshot)) => {
            *params = snapshot;
            epoch
        }
        None => epochs.iter().min_by(|a, b| a.train_loss.total_cmp(&b.train_loss)).map_or(0, |e| e.epoch),
    };
    Ok(TrainReport { epochs, best_epoch })
}
