//! Small feedforward toolkit: dense layers, the inference network, Adam and
//! a central-difference gradient checker.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Uniform};

use crate::error::{Error, Result};
use crate::gaussian::DiagGaussian;

/// Initial bias of the log-stddev head, so that σ starts near 0.37.
pub const LOGSTD_BIAS_INIT: f64 = -1.0;

/// Read and write access to every learnable array, in a fixed order.
pub trait ParamTensors {
    fn tensors(&self) -> Vec<(&'static str, &[f64])>;
    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])>;

    fn num_params(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    fn flatten(&self) -> Vec<f64> {
        self.tensors().into_iter().flat_map(|(_, t)| t.iter().copied()).collect()
    }

    /// Overwrites all arrays from a flat vector laid out as by [`ParamTensors::flatten`].
    fn assign_flat(&mut self, flat: &[f64]) {
        let mut offset = 0;
        for (_, t) in self.tensors_mut() {
            t.copy_from_slice(&flat[offset..offset + t.len()]);
            offset += t.len();
        }
        assert_eq!(offset, flat.len(), "flat parameter length mismatch");
    }

    fn fill_zero(&mut self) {
        for (_, t) in self.tensors_mut() {
            t.fill(0.0);
        }
    }

    fn all_finite(&self) -> std::result::Result<(), &'static str> {
        for (name, t) in self.tensors() {
            if t.iter().any(|v| !v.is_finite()) {
                return Err(name);
            }
        }
        Ok(())
    }
}

/// Uniform Glorot initialization in `±√(6/(fan_in+fan_out))`.
pub fn glorot<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let dist = Uniform::new_inclusive(-limit, limit).expect("finite bounds");
    Array2::from_shape_simple_fn((rows, cols), || dist.sample(rng))
}

/// `y = W x + b` with `W` stored as `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl DenseLayer {
    pub fn zeros(input: usize, output: usize) -> Self {
        Self { weights: Array2::zeros((output, input)), bias: Array1::zeros(output) }
    }

    pub fn glorot<R: Rng + ?Sized>(input: usize, output: usize, rng: &mut R) -> Self {
        Self { weights: glorot(output, input, rng), bias: Array1::zeros(output) }
    }

    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.input_dim());
        self.weights
            .rows()
            .into_iter()
            .zip(self.bias.iter())
            .map(|(row, b)| b + row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>())
            .collect()
    }

    /// Forward pass for a sparse input given as `(index, value)` pairs.
    pub fn forward_sparse(&self, x: &[(usize, f64)]) -> Vec<f64> {
        let mut y = self.bias.to_vec();
        for &(j, xj) in x {
            for (yi, w) in y.iter_mut().zip(self.weights.column(j)) {
                *yi += w * xj;
            }
        }
        y
    }

    /// Accumulates weight and bias gradients into `grads` and returns the
    /// gradient with respect to the input.
    pub fn backward(&self, x: &[f64], g_out: &[f64], grads: &mut DenseLayer) -> Vec<f64> {
        let mut g_in = vec![0.0; self.input_dim()];
        for (i, &g) in g_out.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            grads.bias[i] += g;
            let row = self.weights.row(i);
            let mut grow = grads.weights.row_mut(i);
            for j in 0..x.len() {
                grow[j] += g * x[j];
                g_in[j] += g * row[j];
            }
        }
        g_in
    }

    /// Parameter gradients for a sparse input; the input gradient is not formed.
    pub fn backward_sparse(&self, x: &[(usize, f64)], g_out: &[f64], grads: &mut DenseLayer) {
        for (b, g) in grads.bias.iter_mut().zip(g_out) {
            *b += g;
        }
        for &(j, xj) in x {
            for (gw, g) in grads.weights.column_mut(j).iter_mut().zip(g_out) {
                *gw += g * xj;
            }
        }
    }
}

/// The inference network `q(x | w)`: two rectified-linear layers followed by
/// linear heads for the mean and the log standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub layer1: DenseLayer,
    pub layer2: DenseLayer,
    pub mean_head: DenseLayer,
    pub logstd_head: DenseLayer,
}

/// Activations kept from [`EncoderParams::forward`] for the backward pass.
#[derive(Debug, Clone)]
pub struct EncoderCache {
    input: Vec<(usize, f64)>,
    pre1: Vec<f64>,
    h1: Vec<f64>,
    pre2: Vec<f64>,
    mask: Option<Vec<f64>>,
    /// Second hidden layer after rectification and dropout.
    h2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderOutput {
    pub mean: Vec<f64>,
    pub logstd: Vec<f64>,
}

impl EncoderOutput {
    pub fn stddev(&self) -> Vec<f64> {
        self.logstd.iter().map(|l| l.exp()).collect()
    }

    pub fn posterior(&self) -> Result<DiagGaussian> {
        DiagGaussian::new(self.mean.clone(), self.stddev())
    }
}

fn relu(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| x.max(0.0)).collect()
}

fn finite(v: &[f64], layer: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericOverflow { layer })
    }
}

/// Inverted-dropout mask: each unit is kept with probability `1 − rate` and
/// scaled by `1/(1 − rate)`.
pub fn dropout_mask<R: Rng + ?Sized>(len: usize, rate: f64, rng: &mut R) -> Vec<f64> {
    let keep = 1.0 - rate;
    let dist = Bernoulli::new(keep).expect("dropout rate in [0, 1)");
    (0..len).map(|_| if dist.sample(rng) { 1.0 / keep } else { 0.0 }).collect()
}

impl EncoderParams {
    pub fn zeros(vocab: usize, hidden: usize, latent: usize) -> Self {
        Self {
            layer1: DenseLayer::zeros(vocab, hidden),
            layer2: DenseLayer::zeros(hidden, hidden),
            mean_head: DenseLayer::zeros(hidden, latent),
            logstd_head: DenseLayer::zeros(hidden, latent),
        }
    }

    pub fn init<R: Rng + ?Sized>(vocab: usize, hidden: usize, latent: usize, rng: &mut R) -> Self {
        let mut logstd_head = DenseLayer::glorot(hidden, latent, rng);
        logstd_head.bias.fill(LOGSTD_BIAS_INIT);
        Self {
            layer1: DenseLayer::glorot(vocab, hidden, rng),
            layer2: DenseLayer::glorot(hidden, hidden, rng),
            mean_head: DenseLayer::glorot(hidden, latent, rng),
            logstd_head,
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.layer1.input_dim()
    }

    pub fn hidden(&self) -> usize {
        self.layer1.output_dim()
    }

    pub fn latent_dim(&self) -> usize {
        self.mean_head.output_dim()
    }

    /// Forward pass on a sparse document vector. `mask`, when given, is a
    /// dropout mask applied to the second hidden layer.
    pub fn forward(&self, input: &[(usize, f64)], mask: Option<&[f64]>) -> Result<(EncoderOutput, EncoderCache)> {
        let pre1 = self.layer1.forward_sparse(input);
        finite(&pre1, "layer1")?;
        let h1 = relu(&pre1);
        let pre2 = self.layer2.forward(&h1);
        finite(&pre2, "layer2")?;
        let mut h2 = relu(&pre2);
        if let Some(m) = mask {
            for (h, m) in h2.iter_mut().zip(m) {
                *h *= m;
            }
        }
        let mean = self.mean_head.forward(&h2);
        finite(&mean, "mean_head")?;
        let logstd = self.logstd_head.forward(&h2);
        if logstd.iter().any(|l| !l.exp().is_finite()) {
            return Err(Error::NumericOverflow { layer: "logstd_head" });
        }
        let cache = EncoderCache { input: input.to_vec(), pre1, h1, pre2, mask: mask.map(<[f64]>::to_vec), h2 };
        Ok((EncoderOutput { mean, logstd }, cache))
    }

    /// Accumulates the gradients of a scalar loss into `grads`, given the
    /// upstream gradients with respect to the mean and the log stddev.
    pub fn backward(&self, cache: &EncoderCache, g_mean: &[f64], g_logstd: &[f64], grads: &mut EncoderParams) {
        let mut g_h2 = self.mean_head.backward(&cache.h2, g_mean, &mut grads.mean_head);
        let g_h2b = self.logstd_head.backward(&cache.h2, g_logstd, &mut grads.logstd_head);
        for (a, b) in g_h2.iter_mut().zip(&g_h2b) {
            *a += b;
        }
        if let Some(m) = &cache.mask {
            for (g, m) in g_h2.iter_mut().zip(m) {
                *g *= m;
            }
        }
        let g_pre2: Vec<f64> = g_h2.iter().zip(&cache.pre2).map(|(&g, &p)| if p > 0.0 { g } else { 0.0 }).collect();
        let g_h1 = self.layer2.backward(&cache.h1, &g_pre2, &mut grads.layer2);
        let g_pre1: Vec<f64> = g_h1.iter().zip(&cache.pre1).map(|(&g, &p)| if p > 0.0 { g } else { 0.0 }).collect();
        self.layer1.backward_sparse(&cache.input, &g_pre1, &mut grads.layer1);
    }
}

/// Dense-input convenience wrapper: runs the encoder in evaluation mode and
/// returns `N(μ(w), diag σ(w)²)`.
pub fn encode(params: &EncoderParams, bow: &[f64]) -> Result<DiagGaussian> {
    if bow.len() != params.vocab_size() {
        return Err(Error::DimensionMismatch { what: "encoder input", expected: params.vocab_size(), got: bow.len() });
    }
    let sparse: Vec<(usize, f64)> = bow.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, &v)| (i, v)).collect();
    params.forward(&sparse, None)?.0.posterior()
}

/// Gradients of a loss with upstream `(∂L/∂μ, ∂L/∂log σ)` for a dense input,
/// returned as a fresh gradient structure.
pub fn encode_backward(params: &EncoderParams, bow: &[f64], g_mean: &[f64], g_logstd: &[f64]) -> Result<EncoderParams> {
    let sparse: Vec<(usize, f64)> = bow.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, &v)| (i, v)).collect();
    let (_, cache) = params.forward(&sparse, None)?;
    let mut grads = EncoderParams::zeros(params.vocab_size(), params.hidden(), params.latent_dim());
    params.backward(&cache, g_mean, g_logstd, &mut grads);
    Ok(grads)
}

impl ParamTensors for DenseLayer {
    fn tensors(&self) -> Vec<(&'static str, &[f64])> {
        vec![
            ("weights", self.weights.as_slice().expect("standard layout")),
            ("bias", self.bias.as_slice().expect("standard layout")),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        vec![
            ("weights", self.weights.as_slice_mut().expect("standard layout")),
            ("bias", self.bias.as_slice_mut().expect("standard layout")),
        ]
    }
}

impl ParamTensors for EncoderParams {
    fn tensors(&self) -> Vec<(&'static str, &[f64])> {
        let names = [
            ["enc.layer1.weights", "enc.layer1.bias"],
            ["enc.layer2.weights", "enc.layer2.bias"],
            ["enc.mean_head.weights", "enc.mean_head.bias"],
            ["enc.logstd_head.weights", "enc.logstd_head.bias"],
        ];
        [&self.layer1, &self.layer2, &self.mean_head, &self.logstd_head]
            .into_iter()
            .zip(names)
            .flat_map(|(layer, names)| layer.tensors().into_iter().zip(names).map(|((_, t), n)| (n, t)))
            .collect()
    }

    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        let names = [
            ["enc.layer1.weights", "enc.layer1.bias"],
            ["enc.layer2.weights", "enc.layer2.bias"],
            ["enc.mean_head.weights", "enc.mean_head.bias"],
            ["enc.logstd_head.weights", "enc.logstd_head.bias"],
        ];
        [&mut self.layer1, &mut self.layer2, &mut self.mean_head, &mut self.logstd_head]
            .into_iter()
            .zip(names)
            .flat_map(|(layer, names)| layer.tensors_mut().into_iter().zip(names).map(|((_, t), n)| (n, t)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Adam with bias correction. Moment buffers are laid out like the
/// parameter structure they were created for.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub config: AdamConfig,
    pub step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl OptimizerState {
    pub fn new<P: ParamTensors>(config: AdamConfig, params: &P) -> Self {
        let zeros: Vec<Vec<f64>> = params.tensors().iter().map(|(_, t)| vec![0.0; t.len()]).collect();
        Self { config, step: 0, m: zeros.clone(), v: zeros }
    }

    /// One Adam update. Fails without touching anything if a gradient is not finite.
    pub fn step<P: ParamTensors>(&mut self, params: &mut P, grads: &P) -> Result<()> {
        let grads = grads.tensors();
        for (name, g) in &grads {
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteGradient { tensor: name });
            }
        }
        let AdamConfig { lr, beta1, beta2, eps } = self.config;
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        for (((_, p), (_, g)), (m, v)) in
            params.tensors_mut().into_iter().zip(grads).zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
                v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

/// Denominator floor for the relative error in [`check_gradients`]:
/// coordinates whose gradients are both below it are compared absolutely.
pub const GRAD_CHECK_FLOOR: f64 = 1e-6;

/// Loss-relative part of the same floor, see [`check_gradients`].
pub const GRAD_CHECK_LOSS_SCALE: f64 = 1e-5;

/// Outcome of a central-difference gradient check.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub max_rel_error: f64,
    pub worst_index: Option<usize>,
    /// Analytic and numeric derivative at `worst_index`.
    pub worst_pair: (f64, f64),
    pub checked: usize,
    /// Coordinates where forward and backward one-sided slopes disagree,
    /// i.e. a kink lies within `h`. They are excluded from the maximum.
    pub kinks: Vec<usize>,
}

/// Compares `analytic` against central differences of `f` at `params`.
///
/// Relative error per coordinate is `|a − n| / max(|a|, |n|, floor)` with
/// `floor = max(GRAD_CHECK_FLOOR, GRAD_CHECK_LOSS_SCALE·|f(params)|)`. The
/// second term keeps central-difference roundoff, which grows with `|f|/h`,
/// from dominating components that are tiny next to the loss.
pub fn check_gradients<F>(mut f: F, params: &[f64], analytic: &[f64], h: f64) -> GradCheck
where
    F: FnMut(&[f64]) -> f64,
{
    assert!(h > 0.0, "step must be positive");
    assert_eq!(params.len(), analytic.len());
    let mut p = params.to_vec();
    let f0 = f(&p);
    let floor = GRAD_CHECK_FLOOR.max(GRAD_CHECK_LOSS_SCALE * f0.abs());
    let mut report =
        GradCheck { max_rel_error: 0.0, worst_index: None, worst_pair: (0.0, 0.0), checked: 0, kinks: Vec::new() };
    for i in 0..p.len() {
        let orig = p[i];
        p[i] = orig + h;
        let fp = f(&p);
        p[i] = orig - h;
        let fm = f(&p);
        p[i] = orig;

        let forward = (fp - f0) / h;
        let backward = (f0 - fm) / h;
        let numeric = (fp - fm) / (2.0 * h);
        let scale = forward.abs().max(backward.abs()).max(GRAD_CHECK_FLOOR);
        if (forward - backward).abs() > 0.1 * scale + 1e-3 {
            report.kinks.push(i);
            continue;
        }
        let a = analytic[i];
        let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(floor);
        report.checked += 1;
        if err > report.max_rel_error || report.worst_index.is_none() {
            report.max_rel_error = err;
            report.worst_index = Some(i);
            report.worst_pair = (a, numeric);
        }
    }
    report
}
