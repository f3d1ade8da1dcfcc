//! Target distributions built from solution pools, the factorized
//! Bernoulli prediction, the KL objective, and decoding of assignments.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::features::BipartiteGraph;
use super::GraphError;
use crate::bnb::PoolEntry;
use crate::num;

/// Floor applied inside every logarithm.
pub const LOG_CLAMP: f64 = 1e-12;

/// Bits needed for the domain `[lo, hi]`, capped at `max_bits`. Binaries use
/// one bit.
pub fn bits_for(lo: i64, hi: i64, max_bits: usize) -> usize {
    let range = hi.saturating_sub(lo).max(0) as u64;
    let needed = (u64::BITS - range.leading_zeros()) as usize;
    needed.clamp(1, max_bits.max(1))
}

/// Offset of `v` from `lo`, clamped into what `bits` can represent.
pub fn encode(v: i64, lo: i64, bits: usize) -> u64 {
    let max = if bits >= 63 { i64::MAX } else { (1i64 << bits) - 1 };
    v.saturating_sub(lo).clamp(0, max) as u64
}

pub fn decode(code: u64, lo: i64, hi: i64) -> i64 {
    let v = lo.saturating_add(code.min(i64::MAX as u64) as i64);
    v.clamp(lo, hi)
}

/// Probability mass over candidate assignments; assignments list values in
/// the graph's candidate order.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetDistribution {
    pub support: Vec<(Vec<i64>, f64)>,
}

impl TargetDistribution {
    pub fn point(assignment: Vec<i64>) -> Self {
        TargetDistribution { support: vec![(assignment, 1.0)] }
    }

    pub fn check(&self, g: &BipartiteGraph) -> Result<(), GraphError> {
        if self.support.is_empty() {
            return Err(GraphError::EmptyPool);
        }
        for (x, p) in &self.support {
            if x.len() != g.candidates.len() || !p.is_finite() || *p < 0.0 {
                return Err(GraphError::DomainMismatch);
            }
            if x.iter().zip(&g.domains).any(|(&v, &(lo, hi))| v < lo || v > hi) {
                return Err(GraphError::DomainMismatch);
            }
        }
        Ok(())
    }
}

/// `0.5 * (max z - min z + 1)` over the pool objectives.
pub fn default_temperature(objectives: &[f64]) -> f64 {
    let lo = objectives.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = objectives.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo.is_finite() && hi.is_finite() {
        0.5 * (hi - lo + 1.0)
    } else {
        0.5
    }
}

/// Softmax of `-z / tau` over the pool, marginalized onto the candidates.
/// Entries that agree on every candidate are merged, keeping first-seen
/// order.
pub fn target_distribution(
    entries: &[PoolEntry],
    candidates: &[usize],
    tau: f64,
) -> Result<TargetDistribution, GraphError> {
    if entries.is_empty() {
        return Err(GraphError::EmptyPool);
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(GraphError::InvalidTemperature);
    }
    let z_min = entries.iter().map(|e| e.objective).fold(f64::INFINITY, f64::min);
    let mut support: Vec<(Vec<i64>, f64)> = Vec::new();
    for e in entries {
        let x: Vec<i64> = candidates.iter().map(|&j| num::round(e.x[j]) as i64).collect();
        let w = num::exp(-(e.objective - z_min) / tau);
        match support.iter_mut().find(|(y, _)| *y == x) {
            Some(slot) => slot.1 += w,
            None => support.push((x, w)),
        }
    }
    let total: f64 = support.iter().map(|s| s.1).sum();
    support.iter_mut().for_each(|s| s.1 /= total);
    Ok(TargetDistribution { support })
}

/// Independent Bernoulli means per candidate, one per encoding bit
/// (least significant first).
#[derive(Clone, Debug, PartialEq)]
pub struct PredictedDistribution {
    pub candidates: Vec<usize>,
    pub domains: Vec<(i64, i64)>,
    pub means: Vec<Vec<f64>>,
}

impl PredictedDistribution {
    pub fn from_logits(g: &BipartiteGraph, logits: &[f64], heads: usize) -> Self {
        let means = g
            .candidates
            .iter()
            .zip(&g.domains)
            .map(|(&j, &(lo, hi))| (0..bits_for(lo, hi, heads)).map(|b| num::sigmoid(logits[j * heads + b])).collect())
            .collect();
        PredictedDistribution { candidates: g.candidates.clone(), domains: g.domains.clone(), means }
    }

    /// `q(x_k = v)` for the `k`-th candidate, without clamping.
    pub fn value_prob(&self, k: usize, v: i64) -> f64 {
        let mu = &self.means[k];
        let code = encode(v, self.domains[k].0, mu.len());
        mu.iter().enumerate().map(|(b, &m)| if code >> b & 1 == 1 { m } else { 1.0 - m }).product()
    }

    /// `log q(x)` with each Bernoulli term clamped at [`LOG_CLAMP`].
    pub fn log_prob(&self, x: &[i64]) -> f64 {
        log_prob(&self.means, &self.domains, x)
    }
}

fn log_prob(means: &[Vec<f64>], domains: &[(i64, i64)], x: &[i64]) -> f64 {
    let mut lp = 0.0;
    for (k, mu) in means.iter().enumerate() {
        let code = encode(x[k], domains[k].0, mu.len());
        for (b, &m) in mu.iter().enumerate() {
            let q = if code >> b & 1 == 1 { m } else { 1.0 - m };
            lp += num::ln(q.max(LOG_CLAMP));
        }
    }
    lp
}

/// `sum_x p(x) (log p(x) - log q(x))` over the target support.
pub fn kl_loss(pred: &PredictedDistribution, target: &TargetDistribution) -> f64 {
    kl_from_means(&pred.means, &pred.domains, target).0
}

/// KL loss plus its gradient with respect to each head's logit.
pub(crate) fn kl_from_means(
    means: &[Vec<f64>],
    domains: &[(i64, i64)],
    target: &TargetDistribution,
) -> (f64, Vec<Vec<f64>>) {
    let mut loss = 0.0;
    let mut grad: Vec<Vec<f64>> = means.iter().map(|m| vec![0.0; m.len()]).collect();
    for (x, p) in &target.support {
        if *p <= 0.0 {
            continue;
        }
        loss += p * (num::ln(*p) - log_prob(means, domains, x));
        for (k, mu) in means.iter().enumerate() {
            let code = encode(x[k], domains[k].0, mu.len());
            for (b, &m) in mu.iter().enumerate() {
                // derivative of -log(max(q, clamp)) through the sigmoid
                let d = if code >> b & 1 == 1 {
                    if m > LOG_CLAMP {
                        -(1.0 - m)
                    } else {
                        0.0
                    }
                } else if 1.0 - m > LOG_CLAMP {
                    m
                } else {
                    0.0
                };
                grad[k][b] += p * d;
            }
        }
    }
    (loss, grad)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Most likely bit per head, ties at 0.5 going to 0.
    Mode,
    Sample(u64),
}

/// Candidate values decoded from the heads, in candidate order.
pub fn predict_assignment(pred: &PredictedDistribution, strategy: Strategy) -> Vec<i64> {
    let mut rng = match strategy {
        Strategy::Sample(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        Strategy::Mode => None,
    };
    pred.means
        .iter()
        .zip(&pred.domains)
        .map(|(mu, &(lo, hi))| {
            let mut code = 0u64;
            for (b, &m) in mu.iter().enumerate() {
                let bit = match rng.as_mut() {
                    Some(r) => r.gen::<f64>() < m,
                    None => m > 0.5,
                };
                code |= (bit as u64) << b;
            }
            decode(code, lo, hi)
        })
        .collect()
}
