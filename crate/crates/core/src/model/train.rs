//! Full-batch training: loss, reverse-mode gradients through
//! encode -> decode -> loss, optimizers, and finite-difference checking.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::{
    log_norm_distance, sigmoid, EpochMetric, FinalStats, RunRecord, PROB_CLAMP,
};
use crate::model::decoder::{gram_term, sign_decode};
use crate::model::encoder::normalized_adjacency;
use crate::model::{ArchitectureSpec, Model, ModelParams, RealTerm};
use crate::rank::matrix_rank;

/// Which entries of the score matrix enter the loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossMask {
    AllEntries,
    OffDiagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerKind {
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
    PlainGd,
}

impl OptimizerKind {
    pub fn adam() -> Self {
        OptimizerKind::Adam { beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    pub optimizer: OptimizerKind,
    pub loss_mask: LossMask,
    pub record_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            lambda: 1e-7,
            epochs: 30_000,
            seed: 0,
            optimizer: OptimizerKind::adam(),
            loss_mask: LossMask::AllEntries,
            record_every: 100,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::invalid("regularization weight must be nonnegative"));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record interval must be at least 1"));
        }
        Ok(())
    }
}

#[inline]
fn masked(mask: LossMask, i: usize, j: usize) -> bool {
    match mask {
        LossMask::AllEntries => true,
        LossMask::OffDiagonal => i != j,
    }
}

/// Summed binary cross-entropy of sigma(Atilde) against the 0/1 target plus
/// lambda times the unsquared Frobenius norm of the residual, over the
/// masked entries.
pub fn loss(a: &DMatrix<f64>, atilde: &DMatrix<f64>, lambda: f64, mask: LossMask) -> Result<f64> {
    Ok(loss_and_grad(a, atilde, lambda, mask)?.0)
}

fn loss_and_grad(
    a: &DMatrix<f64>,
    atilde: &DMatrix<f64>,
    lambda: f64,
    mask: LossMask,
) -> Result<(f64, DMatrix<f64>)> {
    if a.shape() != atilde.shape() || a.nrows() != a.ncols() {
        return Err(Error::shape(format!(
            "loss needs matching square matrices, got {:?} and {:?}",
            a.shape(),
            atilde.shape()
        )));
    }
    let n = a.nrows();
    // -ln of the probability clamp; log terms saturate at this value
    let ln_clamp = -PROB_CLAMP.ln();
    let softplus = |x: f64| {
        if x > 0.0 {
            x + (-x).exp().ln_1p()
        } else {
            x.exp().ln_1p()
        }
    };
    let mut bce = 0.0;
    let mut frob_sq = 0.0;
    let mut grad = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            if !masked(mask, i, j) {
                continue;
            }
            let target = a[(i, j)];
            let score = atilde[(i, j)];
            // softplus(-s) = -ln(sigma(s)), softplus(s) = -ln(1 - sigma(s)),
            // each capped where the probability clamp flattens the loss
            let sp_pos = softplus(score);
            let sp_neg = softplus(-score);
            bce += target * sp_neg.min(ln_clamp) + (1.0 - target) * sp_pos.min(ln_clamp);
            let g_pos = if sp_pos < ln_clamp { sigmoid(score) } else { 0.0 };
            let g_neg = if sp_neg < ln_clamp { sigmoid(-score) } else { 0.0 };
            grad[(i, j)] = (1.0 - target) * g_pos - target * g_neg;
            let d = target - score;
            frob_sq += d * d;
        }
    }
    let frob = frob_sq.sqrt();
    if lambda > 0.0 && frob > 1e-300 {
        for j in 0..n {
            for i in 0..n {
                if masked(mask, i, j) {
                    grad[(i, j)] += lambda * (atilde[(i, j)] - a[(i, j)]) / frob;
                }
            }
        }
    }
    Ok((bce + lambda * frob, grad))
}

#[derive(Debug, Clone)]
pub struct RealTermGrads {
    pub w0: DMatrix<f64>,
    pub w1: DMatrix<f64>,
    pub cutoffs: [Option<DVector<f64>>; 4],
}

#[derive(Debug, Clone)]
pub enum Gradients {
    Real { terms: Vec<RealTermGrads> },
    Complex { w0_re: DMatrix<f64>, w0_im: DMatrix<f64>, w1_re: DMatrix<f64>, w1_im: DMatrix<f64> },
}

struct RealTermCache {
    v: DMatrix<f64>,
    s: DMatrix<f64>,
    z: DMatrix<f64>,
}

struct ComplexCache {
    v_re: DMatrix<f64>,
    v_im: DMatrix<f64>,
    s_re: DMatrix<f64>,
    s_im: DMatrix<f64>,
    z_re: DMatrix<f64>,
    z_im: DMatrix<f64>,
}

enum ForwardCache {
    Real(Vec<RealTermCache>),
    Complex(Box<ComplexCache>),
}

fn relu(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.map(|v| v.max(0.0))
}

fn relu_gate(pre: &DMatrix<f64>, grad: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(pre.nrows(), pre.ncols(), |i, j| {
        if pre[(i, j)] > 0.0 {
            grad[(i, j)]
        } else {
            0.0
        }
    })
}

impl ModelParams {
    pub(crate) fn flat(&self) -> Vec<&[f64]> {
        match self {
            ModelParams::Real { terms } => {
                let mut out = Vec::new();
                for t in terms {
                    out.push(t.w0.as_slice());
                    out.push(t.w1.as_slice());
                    for c in t.cutoffs.iter().flatten() {
                        out.push(c.as_slice());
                    }
                }
                out
            }
            ModelParams::Complex { w0_re, w0_im, w1_re, w1_im } => {
                vec![w0_re.as_slice(), w0_im.as_slice(), w1_re.as_slice(), w1_im.as_slice()]
            }
        }
    }

    pub(crate) fn flat_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            ModelParams::Real { terms } => {
                let mut out = Vec::new();
                for t in terms {
                    out.push(t.w0.as_mut_slice());
                    out.push(t.w1.as_mut_slice());
                    for c in t.cutoffs.iter_mut().flatten() {
                        out.push(c.as_mut_slice());
                    }
                }
                out
            }
            ModelParams::Complex { w0_re, w0_im, w1_re, w1_im } => vec![
                w0_re.as_mut_slice(),
                w0_im.as_mut_slice(),
                w1_re.as_mut_slice(),
                w1_im.as_mut_slice(),
            ],
        }
    }
}

impl Gradients {
    fn flat(&self) -> Vec<&[f64]> {
        match self {
            Gradients::Real { terms } => {
                let mut out = Vec::new();
                for t in terms {
                    out.push(t.w0.as_slice());
                    out.push(t.w1.as_slice());
                    for c in t.cutoffs.iter().flatten() {
                        out.push(c.as_slice());
                    }
                }
                out
            }
            Gradients::Complex { w0_re, w0_im, w1_re, w1_im } => {
                vec![w0_re.as_slice(), w0_im.as_slice(), w1_re.as_slice(), w1_im.as_slice()]
            }
        }
    }
}

impl Model {
    /// Adjacency actually used in message passing.
    pub fn message_adjacency(&self, g: &Graph) -> DMatrix<f64> {
        let a = g.adjacency_matrix();
        if self.spec.normalize_adjacency {
            normalized_adjacency(&a)
        } else {
            a
        }
    }

    /// Score matrix for the given message adjacency and features.
    pub fn score_matrix(&self, a_msg: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let ax = a_msg * x;
        Ok(self.forward(a_msg, &ax)?.1)
    }

    /// Score matrix for a graph, defaulting to identity features.
    pub fn score_for_graph(&self, g: &Graph, features: Option<&DMatrix<f64>>) -> Result<DMatrix<f64>> {
        let a_msg = self.message_adjacency(g);
        match features {
            Some(x) => self.score_matrix(&a_msg, x),
            None => self.score_matrix(&a_msg, &identity_features(g.node_count())),
        }
    }

    fn forward(&self, a_msg: &DMatrix<f64>, ax: &DMatrix<f64>) -> Result<(ForwardCache, DMatrix<f64>)> {
        if ax.ncols() != self.feature_dim || a_msg.nrows() != self.n_nodes {
            return Err(Error::shape("model was initialized for a different problem size"));
        }
        match &self.params {
            ModelParams::Real { terms } => {
                let n = a_msg.nrows();
                let mut atilde = DMatrix::zeros(n, n);
                let mut caches = Vec::with_capacity(terms.len());
                for (t, term) in terms.iter().enumerate() {
                    let v = ax * &term.w0;
                    let s = a_msg * relu(&v);
                    let z = &s * &term.w1;
                    let decoded = gram_term(
                        &z,
                        term.cutoffs[0].as_ref(),
                        term.cutoffs[1].as_ref(),
                        term.cutoffs[2].as_ref(),
                        term.cutoffs[3].as_ref(),
                    );
                    if t % 2 == 0 {
                        atilde += decoded;
                    } else {
                        atilde -= decoded;
                    }
                    caches.push(RealTermCache { v, s, z });
                }
                Ok((ForwardCache::Real(caches), atilde))
            }
            ModelParams::Complex { w0_re, w0_im, w1_re, w1_im } => {
                let v_re = ax * w0_re;
                let v_im = ax * w0_im;
                let s_re = a_msg * relu(&v_re);
                let s_im = a_msg * relu(&v_im);
                let z_re = &s_re * w1_re - &s_im * w1_im;
                let z_im = &s_re * w1_im + &s_im * w1_re;
                let atilde = &z_re * z_re.transpose() - &z_im * z_im.transpose();
                Ok((
                    ForwardCache::Complex(Box::new(ComplexCache { v_re, v_im, s_re, s_im, z_re, z_im })),
                    atilde,
                ))
            }
        }
    }

    fn backward(
        &self,
        a_msg: &DMatrix<f64>,
        ax: &DMatrix<f64>,
        cache: &ForwardCache,
        g_at: &DMatrix<f64>,
    ) -> Gradients {
        match (&self.params, cache) {
            (ModelParams::Real { terms }, ForwardCache::Real(caches)) => {
                let grads = terms
                    .iter()
                    .zip(caches)
                    .enumerate()
                    .map(|(t, (term, cache))| {
                        let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
                        backward_real_term(a_msg, ax, term, cache, g_at, sign)
                    })
                    .collect();
                Gradients::Real { terms: grads }
            }
            (ModelParams::Complex { w1_re, w1_im, .. }, ForwardCache::Complex(c)) => {
                let gg = g_at + g_at.transpose();
                let d_zre = &gg * &c.z_re;
                let d_zim = -(&gg * &c.z_im);
                let d_w1re = c.s_re.transpose() * &d_zre + c.s_im.transpose() * &d_zim;
                let d_w1im = -(c.s_im.transpose() * &d_zre) + c.s_re.transpose() * &d_zim;
                let d_sre = &d_zre * w1_re.transpose() + &d_zim * w1_im.transpose();
                let d_sim = -(&d_zre * w1_im.transpose()) + &d_zim * w1_re.transpose();
                let d_hre = a_msg * d_sre;
                let d_him = a_msg * d_sim;
                let d_vre = relu_gate(&c.v_re, &d_hre);
                let d_vim = relu_gate(&c.v_im, &d_him);
                Gradients::Complex {
                    w0_re: ax.transpose() * d_vre,
                    w0_im: ax.transpose() * d_vim,
                    w1_re: d_w1re,
                    w1_im: d_w1im,
                }
            }
            _ => unreachable!("cache kind always matches params kind"),
        }
    }
}

fn backward_real_term(
    a_msg: &DMatrix<f64>,
    ax: &DMatrix<f64>,
    term: &RealTerm,
    cache: &RealTermCache,
    g_at: &DMatrix<f64>,
    sign: f64,
) -> RealTermGrads {
    let z = &cache.z;
    let (left, inner_l, inner_r, right) = (
        term.cutoffs[0].as_ref(),
        term.cutoffs[1].as_ref(),
        term.cutoffs[2].as_ref(),
        term.cutoffs[3].as_ref(),
    );

    // G scaled by the outer diagonals: D_left G D_right
    let mut g_lr = g_at.clone();
    if let Some(c) = left {
        for (i, mut row) in g_lr.row_iter_mut().enumerate() {
            row *= c[i];
        }
    }
    if let Some(c) = right {
        for (j, mut col) in g_lr.column_iter_mut().enumerate() {
            col *= c[j];
        }
    }

    // effective inner diagonal E = inner_l . inner_r
    let width = z.ncols();
    let effective = |k: usize| -> f64 {
        inner_l.map_or(1.0, |c| c[k]) * inner_r.map_or(1.0, |c| c[k])
    };

    // dZ = sign * (G_lr + G_lrᵀ) Z D_E
    let mut d_z = (&g_lr + g_lr.transpose()) * z;
    for (k, mut col) in d_z.column_iter_mut().enumerate() {
        col *= sign * effective(k);
    }

    // dE_k = sign * (Zᵀ G_lrᵀ Z)_kk
    let needs_inner = inner_l.is_some() || inner_r.is_some();
    let d_effective: Option<DVector<f64>> = needs_inner.then(|| {
        let m = z.transpose() * g_lr.transpose() * z;
        DVector::from_fn(width, |k, _| sign * m[(k, k)])
    });
    let d_inner_l = inner_l.map(|_| {
        let de = d_effective.as_ref().expect("computed when any inner cutoff is active");
        DVector::from_fn(width, |k, _| de[k] * inner_r.map_or(1.0, |c| c[k]))
    });
    let d_inner_r = inner_r.map(|_| {
        let de = d_effective.as_ref().expect("computed when any inner cutoff is active");
        DVector::from_fn(width, |k, _| de[k] * inner_l.map_or(1.0, |c| c[k]))
    });

    // outer cutoff gradients need K = Z D_E Zᵀ
    let (d_left, d_right) = if left.is_some() || right.is_some() {
        let mut scaled = z.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= effective(k);
        }
        let k_mat = &scaled * z.transpose();
        let n = k_mat.nrows();
        let d_left = left.map(|_| {
            // dL_ii = sign * (K D_right Gᵀ)_ii
            let mut kd = k_mat.clone();
            if let Some(c) = right {
                for (j, mut col) in kd.column_iter_mut().enumerate() {
                    col *= c[j];
                }
            }
            let prod = kd * g_at.transpose();
            DVector::from_fn(n, |i, _| sign * prod[(i, i)])
        });
        let d_right = right.map(|_| {
            // dR_jj = sign * (Gᵀ D_left K)_jj
            let mut dk = k_mat.clone();
            if let Some(c) = left {
                for (i, mut row) in dk.row_iter_mut().enumerate() {
                    row *= c[i];
                }
            }
            let prod = g_at.transpose() * dk;
            DVector::from_fn(n, |j, _| sign * prod[(j, j)])
        });
        (d_left, d_right)
    } else {
        (None, None)
    };

    // encoder chain
    let d_w1 = cache.s.transpose() * &d_z;
    let d_s = d_z * term.w1.transpose();
    let d_h = a_msg * d_s;
    let d_v = relu_gate(&cache.v, &d_h);
    let d_w0 = ax.transpose() * d_v;

    RealTermGrads { w0: d_w0, w1: d_w1, cutoffs: [d_left, d_inner_l, d_inner_r, d_right] }
}

enum Optimizer {
    Adam {
        beta1: f64,
        beta2: f64,
        epsilon: f64,
        t: u64,
        m: Vec<Vec<f64>>,
        v: Vec<Vec<f64>>,
    },
    PlainGd,
}

impl Optimizer {
    fn new(kind: OptimizerKind, shapes: &[usize]) -> Self {
        match kind {
            OptimizerKind::Adam { beta1, beta2, epsilon } => Optimizer::Adam {
                beta1,
                beta2,
                epsilon,
                t: 0,
                m: shapes.iter().map(|&len| vec![0.0; len]).collect(),
                v: shapes.iter().map(|&len| vec![0.0; len]).collect(),
            },
            OptimizerKind::PlainGd => Optimizer::PlainGd,
        }
    }

    fn step(&mut self, lr: f64, params: &mut [&mut [f64]], grads: &[&[f64]]) {
        match self {
            Optimizer::PlainGd => {
                for (p, g) in params.iter_mut().zip(grads) {
                    for (pv, gv) in p.iter_mut().zip(g.iter()) {
                        *pv -= lr * gv;
                    }
                }
            }
            Optimizer::Adam { beta1, beta2, epsilon, t, m, v } => {
                *t += 1;
                let bc1 = 1.0 - beta1.powi(*t as i32);
                let bc2 = 1.0 - beta2.powi(*t as i32);
                for ((p, g), (ms, vs)) in params.iter_mut().zip(grads).zip(m.iter_mut().zip(v.iter_mut())) {
                    for i in 0..p.len() {
                        ms[i] = *beta1 * ms[i] + (1.0 - *beta1) * g[i];
                        vs[i] = *beta2 * vs[i] + (1.0 - *beta2) * g[i] * g[i];
                        let mhat = ms[i] / bc1;
                        let vhat = vs[i] / bc2;
                        p[i] -= lr * mhat / (vhat.sqrt() + *epsilon);
                    }
                }
            }
        }
    }
}

fn identity_features(n: usize) -> DMatrix<f64> {
    DMatrix::identity(n, n)
}

/// Full-batch training. Features default to the one-hot identity. The run is
/// deterministic given the seed: fixed initialization stream and fixed
/// reduction order. A non-finite loss aborts with the parameters rolled back
/// to the last recorded checkpoint.
pub fn train(
    g: &Graph,
    spec: &ArchitectureSpec,
    cfg: &TrainConfig,
    features: Option<&DMatrix<f64>>,
) -> Result<(Model, RunRecord)> {
    cfg.validate()?;
    spec.validate()?;
    let n = g.node_count();
    let x = match features {
        Some(f) => {
            if f.nrows() != n {
                return Err(Error::shape(format!(
                    "features have {} rows for a {n}-node graph",
                    f.nrows()
                )));
            }
            f.clone()
        }
        None => identity_features(n),
    };
    let a_raw = g.adjacency_matrix();
    let mut model = Model::init(spec.clone(), n, x.ncols(), cfg.seed)?;
    let a_msg = model.message_adjacency(g);
    let ax = &a_msg * &x;

    let shapes: Vec<usize> = model.params.flat().iter().map(|s| s.len()).collect();
    let mut optimizer = Optimizer::new(cfg.optimizer, &shapes);

    let mut series: Vec<EpochMetric> = Vec::new();
    let mut snapshot = model.params.clone();
    let mut snapshot_epoch = 0usize;
    let mut diverged = false;
    let mut epochs_run = cfg.epochs;

    for epoch in 0..cfg.epochs {
        let (cache, atilde) = model.forward(&a_msg, &ax)?;
        let (loss_val, g_at) = loss_and_grad(&a_raw, &atilde, cfg.lambda, cfg.loss_mask)?;
        if !loss_val.is_finite() {
            model.params = snapshot;
            diverged = true;
            epochs_run = snapshot_epoch;
            break;
        }
        if epoch % cfg.record_every == 0 {
            series.push(EpochMetric {
                epoch,
                loss: loss_val,
                log_norm_distance: log_norm_distance(&a_raw, &atilde)?,
            });
            snapshot = model.params.clone();
            snapshot_epoch = epoch;
        }
        let grads = model.backward(&a_msg, &ax, &cache, &g_at);
        let grad_slices = grads.flat();
        let mut param_slices = model.params.flat_mut();
        optimizer.step(cfg.learning_rate, &mut param_slices, &grad_slices);
    }

    let (_, atilde) = model.forward(&a_msg, &ax)?;
    let final_loss = loss(&a_raw, &atilde, cfg.lambda, cfg.loss_mask)?;
    let final_lnd = log_norm_distance(&a_raw, &atilde)?;
    if series.last().map(|m| m.epoch) != Some(epochs_run) {
        series.push(EpochMetric { epoch: epochs_run, loss: final_loss, log_norm_distance: final_lnd });
    }

    let errors = crate::metrics::sign_errors(g, &atilde)?;
    let reconstructed = sign_decode(&atilde)?;
    let record = RunRecord {
        seed: cfg.seed,
        epochs_run,
        diverged,
        series,
        final_stats: FinalStats {
            sign_errors: errors,
            frob_error: crate::metrics::squared_frob_error(g, &reconstructed)?,
            computed_rank: matrix_rank(&atilde, 1e-8)?,
            faithful: errors == 0,
            log_norm_distance: final_lnd,
            loss: final_loss,
        },
    };
    Ok((model, record))
}

/// Central finite differences of a scalar function at a point.
pub fn finite_difference<F: FnMut(&[f64]) -> f64>(mut f: F, point: &[f64], h: f64) -> Vec<f64> {
    let mut probe = point.to_vec();
    (0..point.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let plus = f(&probe);
            probe[i] = orig - h;
            let minus = f(&probe);
            probe[i] = orig;
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

/// max_i |a_i - b_i| / max(1, |a_i|, |b_i|).
pub fn max_relative_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / 1.0f64.max(x.abs()).max(y.abs()))
        .fold(0.0, f64::max)
}

/// Compares the analytic gradient of the full pipeline loss against central
/// finite differences over every parameter. Returns the max relative error.
pub fn grad_check(
    model: &Model,
    g: &Graph,
    features: Option<&DMatrix<f64>>,
    lambda: f64,
    mask: LossMask,
    h: f64,
) -> Result<f64> {
    let n = g.node_count();
    let x = match features {
        Some(f) => f.clone(),
        None => identity_features(n),
    };
    let a_raw = g.adjacency_matrix();
    let a_msg = model.message_adjacency(g);
    let ax = &a_msg * &x;

    let (cache, atilde) = model.forward(&a_msg, &ax)?;
    let (_, g_at) = loss_and_grad(&a_raw, &atilde, lambda, mask)?;
    let grads = model.backward(&a_msg, &ax, &cache, &g_at);
    let analytic: Vec<Vec<f64>> = grads.flat().iter().map(|s| s.to_vec()).collect();

    let mut work = model.clone();
    let mut worst = 0.0f64;
    for (slot, analytic_slot) in analytic.iter().enumerate() {
        for (idx, &an) in analytic_slot.iter().enumerate() {
            let orig = work.params.flat()[slot][idx];
            let mut eval = |value: f64| -> Result<f64> {
                work.params.flat_mut()[slot][idx] = value;
                let (_, atilde) = work.forward(&a_msg, &ax)?;
                loss(&a_raw, &atilde, lambda, mask)
            };
            let plus = eval(orig + h)?;
            let minus = eval(orig - h)?;
            work.params.flat_mut()[slot][idx] = orig;
            let fd = (plus - minus) / (2.0 * h);
            let rel = (fd - an).abs() / 1.0f64.max(fd.abs()).max(an.abs());
            worst = worst.max(rel);
        }
    }
    Ok(worst)
}
