//! Bipartite variable/constraint graph network that predicts a factorized
//! Bernoulli distribution over integer assignments of the divable
//! variables, trained by KL divergence to a pool-derived target.

mod adam;
mod features;
mod model;
mod target;
mod train;

use core::fmt;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use features::{extract_graph, integer_domain, BipartiteGraph, Edge, CONS_FEATURES, VAR_FEATURES};
pub use model::{ConvLayout, GnnDims, GnnParams, Layout, NormStats, DEFAULT_HEADS, HIDDEN};
pub use target::{
    bits_for, decode, default_temperature, encode, kl_loss, predict_assignment, target_distribution,
    PredictedDistribution, Strategy, TargetDistribution, LOG_CLAMP,
};
pub use train::{
    mean_loss, sequential_map, train, EpochReport, Example, GradFn, GradResult, TrainReport, TrainingConfig,
};

/// Tag stored with checkpoints; bump whenever features change meaning.
pub const FEATURE_SET: &str = "v14-c8-e1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphError {
    ShapeMismatch,
    NonFiniteFeature,
    NonFiniteParameter,
    NonFiniteGradient {
        index: usize,
    },
    RootNotOptimal,
    EmptyPool,
    InvalidTemperature,
    InvalidConfig,
    /// A target assignment falls outside the candidate domains.
    DomainMismatch,
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::ShapeMismatch => f.write_str("parameter or graph shapes are inconsistent"),
            GraphError::NonFiniteFeature => f.write_str("graph contains a non-finite feature"),
            GraphError::NonFiniteParameter => f.write_str("parameters contain a non-finite value"),
            GraphError::NonFiniteGradient { index } => write!(f, "non-finite gradient at parameter {index}"),
            GraphError::RootNotOptimal => f.write_str("root LP is not optimal"),
            GraphError::EmptyPool => f.write_str("solution pool is empty"),
            GraphError::InvalidTemperature => f.write_str("temperature must be positive and finite"),
            GraphError::InvalidConfig => f.write_str("invalid training configuration"),
            GraphError::DomainMismatch => f.write_str("target assignment outside candidate domains"),
        }
    }
}

#[cfg(test)]
mod tests;
