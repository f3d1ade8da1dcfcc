use alloc::vec;
use alloc::vec::Vec;

use super::GraphError;
use crate::num;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        AdamState { m: vec![0.0; len], v: vec![0.0; len], step: 0 }
    }
}

/// One bias-corrected ADAM update. A non-finite gradient leaves both the
/// parameters and the state untouched.
pub fn adam_step(theta: &mut [f64], grad: &[f64], state: &mut AdamState, cfg: &AdamConfig) -> Result<(), GraphError> {
    if theta.len() != grad.len() || state.m.len() != grad.len() {
        return Err(GraphError::ShapeMismatch);
    }
    if let Some(index) = grad.iter().position(|g| !g.is_finite()) {
        return Err(GraphError::NonFiniteGradient { index });
    }
    state.step += 1;
    let t = state.step as f64;
    let c1 = 1.0 - num::pow(cfg.beta1, t);
    let c2 = 1.0 - num::pow(cfg.beta2, t);
    for i in 0..theta.len() {
        let g = grad[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        theta[i] -= cfg.learning_rate * m_hat / (num::sqrt(v_hat) + cfg.eps);
    }
    Ok(())
}
