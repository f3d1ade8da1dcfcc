//! Parameters and the forward/backward passes of the bipartite GNN.
//!
//! All trainable weights live in one flat vector addressed through
//! [`Layout`], which keeps the optimizer, serialization, and finite
//! difference checks trivial. Batch normalization sits directly on the input
//! features, so its statistics do not depend on any parameter and only the
//! affine scale and shift receive gradients.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::features::{BipartiteGraph, CONS_FEATURES, VAR_FEATURES};
use super::target::{bits_for, kl_from_means, PredictedDistribution, TargetDistribution};
use super::GraphError;
use crate::num;

pub const HIDDEN: usize = 64;
pub const DEFAULT_HEADS: usize = 8;
const BN_EPS: f64 = 1e-5;
const BN_MOMENTUM: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GnnDims {
    pub var_feats: usize,
    pub cons_feats: usize,
    pub hidden: usize,
    /// Bernoulli heads per variable, the widest supported bit encoding.
    pub heads: usize,
}

impl Default for GnnDims {
    fn default() -> Self {
        GnnDims { var_feats: VAR_FEATURES, cons_feats: CONS_FEATURES, hidden: HIDDEN, heads: DEFAULT_HEADS }
    }
}

impl GnnDims {
    pub fn with_hidden(hidden: usize) -> Self {
        GnnDims { hidden, ..GnnDims::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvLayout {
    pub wm: Range<usize>,
    pub bm: Range<usize>,
    pub we: Range<usize>,
    pub u: Range<usize>,
    pub bu: Range<usize>,
}

/// Offsets of every parameter block inside the flat vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub bn_v_gamma: Range<usize>,
    pub bn_v_beta: Range<usize>,
    pub bn_c_gamma: Range<usize>,
    pub bn_c_beta: Range<usize>,
    pub ve1_w: Range<usize>,
    pub ve1_b: Range<usize>,
    pub ve2_w: Range<usize>,
    pub ve2_b: Range<usize>,
    pub ce1_w: Range<usize>,
    pub ce1_b: Range<usize>,
    pub ce2_w: Range<usize>,
    pub ce2_b: Range<usize>,
    pub conv_vc: ConvLayout,
    pub conv_cv: ConvLayout,
    pub o1_w: Range<usize>,
    pub o1_b: Range<usize>,
    pub o2_w: Range<usize>,
    pub o2_b: Range<usize>,
    pub total: usize,
}

impl Layout {
    pub fn new(d: &GnnDims) -> Self {
        let mut at = 0;
        let mut take = |len: usize| {
            let r = at..at + len;
            at += len;
            r
        };
        let h = d.hidden;
        let bn_v_gamma = take(d.var_feats);
        let bn_v_beta = take(d.var_feats);
        let bn_c_gamma = take(d.cons_feats);
        let bn_c_beta = take(d.cons_feats);
        let ve1_w = take(h * d.var_feats);
        let ve1_b = take(h);
        let ve2_w = take(h * h);
        let ve2_b = take(h);
        let ce1_w = take(h * d.cons_feats);
        let ce1_b = take(h);
        let ce2_w = take(h * h);
        let ce2_b = take(h);
        let mut conv = || ConvLayout { wm: take(h * h), bm: take(h), we: take(h), u: take(h * h), bu: take(h) };
        let conv_vc = conv();
        let conv_cv = conv();
        let o1_w = take(h * h);
        let o1_b = take(h);
        let o2_w = take(d.heads * h);
        let o2_b = take(d.heads);
        Layout {
            bn_v_gamma,
            bn_v_beta,
            bn_c_gamma,
            bn_c_beta,
            ve1_w,
            ve1_b,
            ve2_w,
            ve2_b,
            ce1_w,
            ce1_b,
            ce2_w,
            ce2_b,
            conv_vc,
            conv_cv,
            o1_w,
            o1_b,
            o2_w,
            o2_b,
            total: at,
        }
    }

    /// Blocks that are weight matrices, as `(range, fan_in, fan_out)`.
    fn matrices(&self, d: &GnnDims) -> Vec<(Range<usize>, usize, usize)> {
        let h = d.hidden;
        vec![
            (self.ve1_w.clone(), d.var_feats, h),
            (self.ve2_w.clone(), h, h),
            (self.ce1_w.clone(), d.cons_feats, h),
            (self.ce2_w.clone(), h, h),
            (self.conv_vc.wm.clone(), h, h),
            (self.conv_vc.u.clone(), h, h),
            (self.conv_cv.wm.clone(), h, h),
            (self.conv_cv.u.clone(), h, h),
            (self.o1_w.clone(), h, h),
            (self.o2_w.clone(), h, d.heads),
        ]
    }
}

/// Per-feature mean and (population) variance of the input features.
#[derive(Clone, Debug, PartialEq)]
pub struct NormStats {
    pub v_mean: Vec<f64>,
    pub v_var: Vec<f64>,
    pub c_mean: Vec<f64>,
    pub c_var: Vec<f64>,
}

impl NormStats {
    pub fn identity(d: &GnnDims) -> Self {
        NormStats {
            v_mean: vec![0.0; d.var_feats],
            v_var: vec![1.0; d.var_feats],
            c_mean: vec![0.0; d.cons_feats],
            c_var: vec![1.0; d.cons_feats],
        }
    }

    /// Statistics over every node of every graph in the batch.
    pub fn from_batch(graphs: &[&BipartiteGraph]) -> Self {
        let (v_mean, v_var) = column_stats(graphs.iter().map(|g| (g.var_feats.as_slice(), g.num_vars)), VAR_FEATURES);
        let (c_mean, c_var) = column_stats(graphs.iter().map(|g| (g.cons_feats.as_slice(), g.num_cons)), CONS_FEATURES);
        NormStats { v_mean, v_var, c_mean, c_var }
    }

    fn is_finite(&self) -> bool {
        self.v_mean.iter().chain(&self.v_var).chain(&self.c_mean).chain(&self.c_var).all(|v| v.is_finite())
    }
}

fn column_stats<'a>(blocks: impl Iterator<Item = (&'a [f64], usize)> + Clone, width: usize) -> (Vec<f64>, Vec<f64>) {
    let mut mean = vec![0.0; width];
    let mut count = 0usize;
    for (data, rows) in blocks.clone() {
        for r in 0..rows {
            for (k, m) in mean.iter_mut().enumerate() {
                *m += data[r * width + k];
            }
        }
        count += rows;
    }
    if count == 0 {
        return (mean, vec![1.0; width]);
    }
    mean.iter_mut().for_each(|m| *m /= count as f64);
    let mut var = vec![0.0; width];
    for (data, rows) in blocks {
        for r in 0..rows {
            for (k, v) in var.iter_mut().enumerate() {
                let d = data[r * width + k] - mean[k];
                *v += d * d;
            }
        }
    }
    var.iter_mut().for_each(|v| *v /= count as f64);
    (mean, var)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GnnParams {
    pub dims: GnnDims,
    pub theta: Vec<f64>,
    /// Running batch-norm statistics used in evaluation.
    pub running: NormStats,
    /// False until the first training batch has seeded `running`.
    pub running_initialized: bool,
}

impl GnnParams {
    /// All weights and biases zero, batch-norm scale one.
    pub fn zeros(dims: GnnDims) -> Self {
        let layout = Layout::new(&dims);
        let mut theta = vec![0.0; layout.total];
        theta[layout.bn_v_gamma.clone()].fill(1.0);
        theta[layout.bn_c_gamma.clone()].fill(1.0);
        GnnParams { dims, theta, running: NormStats::identity(&dims), running_initialized: false }
    }

    /// Glorot-uniform weights, zero biases, and small edge modulation.
    pub fn init(dims: GnnDims, seed: u64) -> Self {
        let mut p = GnnParams::zeros(dims);
        let layout = p.layout();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (r, fan_in, fan_out) in layout.matrices(&dims) {
            let a = num::sqrt(6.0 / (fan_in + fan_out) as f64);
            p.theta[r].iter_mut().for_each(|w| *w = rng.gen_range(-a..a));
        }
        for r in [layout.conv_vc.we.clone(), layout.conv_cv.we.clone()] {
            p.theta[r].iter_mut().for_each(|w| *w = rng.gen_range(-0.1..0.1));
        }
        p
    }

    pub fn layout(&self) -> Layout {
        Layout::new(&self.dims)
    }

    pub fn num_params(&self) -> usize {
        self.theta.len()
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        let d = &self.dims;
        let shapes = self.theta.len() == Layout::new(d).total
            && self.running.v_mean.len() == d.var_feats
            && self.running.v_var.len() == d.var_feats
            && self.running.c_mean.len() == d.cons_feats
            && self.running.c_var.len() == d.cons_feats
            && d.var_feats == VAR_FEATURES
            && d.cons_feats == CONS_FEATURES
            && d.heads >= 1;
        if !shapes {
            return Err(GraphError::ShapeMismatch);
        }
        if !self.theta.iter().all(|v| v.is_finite()) || !self.running.is_finite() {
            return Err(GraphError::NonFiniteParameter);
        }
        Ok(())
    }

    /// Folds batch statistics into the running averages.
    pub fn update_running(&mut self, batch: &NormStats) {
        if !self.running_initialized {
            self.running = batch.clone();
            self.running_initialized = true;
            return;
        }
        let blend = |run: &mut [f64], new: &[f64]| {
            for (r, n) in run.iter_mut().zip(new) {
                *r = (1.0 - BN_MOMENTUM) * *r + BN_MOMENTUM * n;
            }
        };
        blend(&mut self.running.v_mean, &batch.v_mean);
        blend(&mut self.running.v_var, &batch.v_var);
        blend(&mut self.running.c_mean, &batch.c_mean);
        blend(&mut self.running.c_var, &batch.c_var);
    }

    /// Raw output logits, `num_vars x heads`, under the given statistics.
    pub fn logits(&self, g: &BipartiteGraph, stats: &NormStats) -> Result<Vec<f64>, GraphError> {
        self.check_graph(g)?;
        Ok(Forward::run(self, g, stats).logits)
    }

    /// Evaluation-mode prediction using the running statistics.
    pub fn predict(&self, g: &BipartiteGraph) -> Result<PredictedDistribution, GraphError> {
        self.predict_with(g, &self.running)
    }

    pub fn predict_with(&self, g: &BipartiteGraph, stats: &NormStats) -> Result<PredictedDistribution, GraphError> {
        let logits = self.logits(g, stats)?;
        Ok(PredictedDistribution::from_logits(g, &logits, self.dims.heads))
    }

    /// KL loss of one graph and its gradient with respect to `theta`.
    pub fn loss_and_grad(
        &self,
        g: &BipartiteGraph,
        stats: &NormStats,
        target: &TargetDistribution,
    ) -> Result<(f64, Vec<f64>), GraphError> {
        self.check_graph(g)?;
        target.check(g)?;
        let fwd = Forward::run(self, g, stats);
        let k = self.dims.heads;
        let means: Vec<Vec<f64>> = g
            .candidates
            .iter()
            .zip(&g.domains)
            .map(|(&j, &(lo, hi))| (0..bits_for(lo, hi, k)).map(|b| num::sigmoid(fwd.logits[j * k + b])).collect())
            .collect();
        let (loss, dmeans) = kl_from_means(&means, &g.domains, target);
        let mut dlogits = vec![0.0; g.num_vars * k];
        for (c, &j) in g.candidates.iter().enumerate() {
            dlogits[j * k..j * k + dmeans[c].len()].copy_from_slice(&dmeans[c]);
        }
        Ok((loss, fwd.backward(self, g, &dlogits)))
    }

    /// KL loss only, for validation and finite differences.
    pub fn loss(&self, g: &BipartiteGraph, stats: &NormStats, target: &TargetDistribution) -> Result<f64, GraphError> {
        let pred = self.predict_with(g, stats)?;
        target.check(g)?;
        Ok(super::target::kl_loss(&pred, target))
    }

    /// Smallest `|pre-activation|` over every ReLU in the network. Finite
    /// difference checks are only meaningful when perturbations cannot push
    /// an input across zero.
    pub fn relu_margin(&self, g: &BipartiteGraph, stats: &NormStats) -> Result<f64, GraphError> {
        self.check_graph(g)?;
        let f = Forward::run(self, g, stats);
        let all = [&f.v.a1, &f.v.a2, &f.c.a1, &f.c.a2, &f.conv_vc.pre, &f.conv_cv.pre, &f.ao1];
        Ok(all.iter().flat_map(|v| v.iter()).fold(f64::INFINITY, |m, x| m.min(x.abs())))
    }

    fn check_graph(&self, g: &BipartiteGraph) -> Result<(), GraphError> {
        if self.dims.var_feats != VAR_FEATURES || self.dims.cons_feats != CONS_FEATURES {
            return Err(GraphError::ShapeMismatch);
        }
        g.validate()
    }
}

/// `y = x W' + b` over `rows` rows; `w` is `out x inp` row-major.
fn linear(x: &[f64], rows: usize, inp: usize, w: &[f64], b: &[f64], out: usize) -> Vec<f64> {
    let mut y = vec![0.0; rows * out];
    for r in 0..rows {
        let xr = &x[r * inp..(r + 1) * inp];
        for o in 0..out {
            let wo = &w[o * inp..(o + 1) * inp];
            y[r * out + o] = b[o] + dot(xr, wo);
        }
    }
    y
}

/// Accumulates weight and bias gradients of [`linear`] and returns `dx`.
#[allow(clippy::too_many_arguments)]
fn linear_backward(
    dy: &[f64],
    x: &[f64],
    rows: usize,
    inp: usize,
    out: usize,
    w: &[f64],
    dw: &mut [f64],
    db: &mut [f64],
) -> Vec<f64> {
    let mut dx = vec![0.0; rows * inp];
    for r in 0..rows {
        let xr = &x[r * inp..(r + 1) * inp];
        let dxr = &mut dx[r * inp..(r + 1) * inp];
        for o in 0..out {
            let g = dy[r * out + o];
            if g == 0.0 {
                continue;
            }
            db[o] += g;
            let wo = &w[o * inp..(o + 1) * inp];
            let dwo = &mut dw[o * inp..(o + 1) * inp];
            for i in 0..inp {
                dwo[i] += g * xr[i];
                dxr[i] += g * wo[i];
            }
        }
    }
    dx
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn relu(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| x.max(0.0)).collect()
}

fn relu_grad(dy: &[f64], pre: &[f64]) -> Vec<f64> {
    dy.iter().zip(pre).map(|(&g, &p)| if p > 0.0 { g } else { 0.0 }).collect()
}

/// Edge list seen from the receiving side: `(dst, src, coef)`.
type Pairs = Vec<(usize, usize, f64)>;

struct ConvCache {
    sum: Vec<f64>,
    coef_sum: Vec<f64>,
    deg: Vec<usize>,
    agg: Vec<f64>,
    pre: Vec<f64>,
    out: Vec<f64>,
}

fn conv_forward(
    theta: &[f64],
    cl: &ConvLayout,
    h: usize,
    src: &[f64],
    dst: &[f64],
    n_dst: usize,
    pairs: &Pairs,
) -> ConvCache {
    let mut sum = vec![0.0; n_dst * h];
    let mut coef_sum = vec![0.0; n_dst];
    let mut deg = vec![0usize; n_dst];
    for &(d, s, e) in pairs {
        for k in 0..h {
            sum[d * h + k] += src[s * h + k];
        }
        coef_sum[d] += e;
        deg[d] += 1;
    }
    let wm = &theta[cl.wm.clone()];
    let bm = &theta[cl.bm.clone()];
    let we = &theta[cl.we.clone()];
    let mut agg = vec![0.0; n_dst * h];
    for d in 0..n_dst {
        if deg[d] == 0 {
            continue;
        }
        let scale = 1.0 / num::sqrt(deg[d] as f64);
        let sd = &sum[d * h..(d + 1) * h];
        for o in 0..h {
            let msg = dot(&wm[o * h..(o + 1) * h], sd) + deg[d] as f64 * bm[o] + coef_sum[d] * we[o];
            agg[d * h + o] = scale * msg;
        }
    }
    let mut pre = linear(&agg, n_dst, h, &theta[cl.u.clone()], &theta[cl.bu.clone()], h);
    for (p, x) in pre.iter_mut().zip(dst) {
        *p += x;
    }
    let out = relu(&pre);
    ConvCache { sum, coef_sum, deg, agg, pre, out }
}

/// Returns `(d_src, d_dst)` and accumulates parameter gradients.
#[allow(clippy::too_many_arguments)]
fn conv_backward(
    theta: &[f64],
    grad: &mut [f64],
    cl: &ConvLayout,
    h: usize,
    cache: &ConvCache,
    dout: &[f64],
    n_src: usize,
    pairs: &Pairs,
) -> (Vec<f64>, Vec<f64>) {
    let n_dst = cache.deg.len();
    let dpre = relu_grad(dout, &cache.pre);
    let dagg = {
        let (du, dbu) = split_two(grad, cl.u.clone(), cl.bu.clone());
        linear_backward(&dpre, &cache.agg, n_dst, h, h, &theta[cl.u.clone()], du, dbu)
    };
    let wm = &theta[cl.wm.clone()];
    let mut dsum = vec![0.0; n_dst * h];
    for d in 0..n_dst {
        if cache.deg[d] == 0 {
            continue;
        }
        let scale = 1.0 / num::sqrt(cache.deg[d] as f64);
        let sd = &cache.sum[d * h..(d + 1) * h];
        for o in 0..h {
            let g = scale * dagg[d * h + o];
            if g == 0.0 {
                continue;
            }
            grad[cl.bm.start + o] += g * cache.deg[d] as f64;
            grad[cl.we.start + o] += g * cache.coef_sum[d];
            let row = cl.wm.start + o * h;
            for i in 0..h {
                grad[row + i] += g * sd[i];
                dsum[d * h + i] += g * wm[o * h + i];
            }
        }
    }
    let mut dsrc = vec![0.0; n_src * h];
    for &(d, s, _) in pairs {
        for k in 0..h {
            dsrc[s * h + k] += dsum[d * h + k];
        }
    }
    (dsrc, dpre)
}

/// Two disjoint mutable blocks of the gradient vector; `a` must precede `b`.
fn split_two(grad: &mut [f64], a: Range<usize>, b: Range<usize>) -> (&mut [f64], &mut [f64]) {
    debug_assert!(a.end <= b.start);
    let (left, right) = grad.split_at_mut(b.start);
    (&mut left[a], &mut right[..b.end - b.start])
}

struct Embed {
    xhat: Vec<f64>,
    z0: Vec<f64>,
    a1: Vec<f64>,
    h1: Vec<f64>,
    a2: Vec<f64>,
    h: Vec<f64>,
}

struct EmbedBlocks<'a> {
    gamma: &'a Range<usize>,
    beta: &'a Range<usize>,
    w1: &'a Range<usize>,
    b1: &'a Range<usize>,
    w2: &'a Range<usize>,
    b2: &'a Range<usize>,
}

fn embed_forward(
    theta: &[f64],
    blocks: &EmbedBlocks<'_>,
    feats: &[f64],
    rows: usize,
    width: usize,
    h: usize,
    mean: &[f64],
    var: &[f64],
) -> Embed {
    let gamma = &theta[blocks.gamma.clone()];
    let beta = &theta[blocks.beta.clone()];
    let inv: Vec<f64> = var.iter().map(|v| 1.0 / num::sqrt(v + BN_EPS)).collect();
    let mut xhat = vec![0.0; rows * width];
    let mut z0 = vec![0.0; rows * width];
    for r in 0..rows {
        for k in 0..width {
            let xh = (feats[r * width + k] - mean[k]) * inv[k];
            xhat[r * width + k] = xh;
            z0[r * width + k] = gamma[k] * xh + beta[k];
        }
    }
    let a1 = linear(&z0, rows, width, &theta[blocks.w1.clone()], &theta[blocks.b1.clone()], h);
    let h1 = relu(&a1);
    let a2 = linear(&h1, rows, h, &theta[blocks.w2.clone()], &theta[blocks.b2.clone()], h);
    let hh = relu(&a2);
    Embed { xhat, z0, a1, h1, a2, h: hh }
}

fn embed_backward(
    theta: &[f64],
    grad: &mut [f64],
    blocks: &EmbedBlocks<'_>,
    cache: &Embed,
    dh: &[f64],
    rows: usize,
    width: usize,
    h: usize,
) {
    let da2 = relu_grad(dh, &cache.a2);
    let dh1 = {
        let (dw, db) = split_two(grad, blocks.w2.clone(), blocks.b2.clone());
        linear_backward(&da2, &cache.h1, rows, h, h, &theta[blocks.w2.clone()], dw, db)
    };
    let da1 = relu_grad(&dh1, &cache.a1);
    let dz0 = {
        let (dw, db) = split_two(grad, blocks.w1.clone(), blocks.b1.clone());
        linear_backward(&da1, &cache.z0, rows, width, h, &theta[blocks.w1.clone()], dw, db)
    };
    for r in 0..rows {
        for k in 0..width {
            let g = dz0[r * width + k];
            grad[blocks.gamma.start + k] += g * cache.xhat[r * width + k];
            grad[blocks.beta.start + k] += g;
        }
    }
}

struct Forward {
    layout: Layout,
    v: Embed,
    c: Embed,
    vc_pairs: Pairs,
    cv_pairs: Pairs,
    conv_vc: ConvCache,
    conv_cv: ConvCache,
    ao1: Vec<f64>,
    o: Vec<f64>,
    logits: Vec<f64>,
}

impl Forward {
    fn run(p: &GnnParams, g: &BipartiteGraph, stats: &NormStats) -> Forward {
        let d = &p.dims;
        let h = d.hidden;
        let l = p.layout();
        let theta = &p.theta;
        let (n, m) = (g.num_vars, g.num_cons);
        let vb = EmbedBlocks {
            gamma: &l.bn_v_gamma,
            beta: &l.bn_v_beta,
            w1: &l.ve1_w,
            b1: &l.ve1_b,
            w2: &l.ve2_w,
            b2: &l.ve2_b,
        };
        let cb = EmbedBlocks {
            gamma: &l.bn_c_gamma,
            beta: &l.bn_c_beta,
            w1: &l.ce1_w,
            b1: &l.ce1_b,
            w2: &l.ce2_w,
            b2: &l.ce2_b,
        };
        let v = embed_forward(theta, &vb, &g.var_feats, n, d.var_feats, h, &stats.v_mean, &stats.v_var);
        let c = embed_forward(theta, &cb, &g.cons_feats, m, d.cons_feats, h, &stats.c_mean, &stats.c_var);
        let vc_pairs: Pairs = g.edges.iter().map(|e| (e.row, e.col, e.coef)).collect();
        let cv_pairs: Pairs = g.edges.iter().map(|e| (e.col, e.row, e.coef)).collect();
        let conv_vc = conv_forward(theta, &l.conv_vc, h, &v.h, &c.h, m, &vc_pairs);
        let conv_cv = conv_forward(theta, &l.conv_cv, h, &conv_vc.out, &v.h, n, &cv_pairs);
        let ao1 = linear(&conv_cv.out, n, h, &theta[l.o1_w.clone()], &theta[l.o1_b.clone()], h);
        let o = relu(&ao1);
        let logits = linear(&o, n, h, &theta[l.o2_w.clone()], &theta[l.o2_b.clone()], d.heads);
        Forward { layout: l, v, c, vc_pairs, cv_pairs, conv_vc, conv_cv, ao1, o, logits }
    }

    fn backward(&self, p: &GnnParams, g: &BipartiteGraph, dlogits: &[f64]) -> Vec<f64> {
        let d = &p.dims;
        let h = d.hidden;
        let l = &self.layout;
        let theta = &p.theta;
        let (n, m) = (g.num_vars, g.num_cons);
        let mut grad = vec![0.0; l.total];

        let do_ = {
            let (dw, db) = split_two(&mut grad, l.o2_w.clone(), l.o2_b.clone());
            linear_backward(dlogits, &self.o, n, h, d.heads, &theta[l.o2_w.clone()], dw, db)
        };
        let dao1 = relu_grad(&do_, &self.ao1);
        let dhv2 = {
            let (dw, db) = split_two(&mut grad, l.o1_w.clone(), l.o1_b.clone());
            linear_backward(&dao1, &self.conv_cv.out, n, h, h, &theta[l.o1_w.clone()], dw, db)
        };
        let (dhc2, mut dhv) = conv_backward(theta, &mut grad, &l.conv_cv, h, &self.conv_cv, &dhv2, m, &self.cv_pairs);
        let (dhv_msg, dhc) = conv_backward(theta, &mut grad, &l.conv_vc, h, &self.conv_vc, &dhc2, n, &self.vc_pairs);
        for (a, b) in dhv.iter_mut().zip(&dhv_msg) {
            *a += b;
        }

        let vb = EmbedBlocks {
            gamma: &l.bn_v_gamma,
            beta: &l.bn_v_beta,
            w1: &l.ve1_w,
            b1: &l.ve1_b,
            w2: &l.ve2_w,
            b2: &l.ve2_b,
        };
        let cb = EmbedBlocks {
            gamma: &l.bn_c_gamma,
            beta: &l.bn_c_beta,
            w1: &l.ce1_w,
            b1: &l.ce1_b,
            w2: &l.ce2_w,
            b2: &l.ce2_b,
        };
        embed_backward(theta, &mut grad, &vb, &self.v, &dhv, n, d.var_feats, h);
        embed_backward(theta, &mut grad, &cb, &self.c, &dhc, m, d.cons_feats, h);
        grad
    }
}
