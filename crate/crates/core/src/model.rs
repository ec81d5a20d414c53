//! The sparsemax document and topic models.
//!
//! Both models draw a latent `x ~ N(μ₀, σ₀²I)` and map it to sparse topic
//! proportions `θ = sparsemax(Wᵀx)`. They differ in how topics produce words:
//!
//! * NSMDM keeps unnormalized topic rows `φ_k = Sᵀt_k` and emits words from
//!   `softmax(φᵀθ)`;
//! * NSMTM makes every topic row sparse, `φ_k = sparsemax(Sᵀt_k)`, and emits
//!   words from the mixture `φᵀθ`.
//!
//! Training minimizes the negative of the regularized variational bound:
//! the reconstruction negative log-likelihood of a single reparameterized
//! sample plus `γ` times the divergence between the encoder's posterior and
//! the prior. The backward pass runs the exact chain rule through both
//! sparsemax Jacobians, the projection `W` and the reparameterization.

use std::fmt;

use log::warn;
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::corpus::{BowDocument, Corpus, Vocabulary};
use crate::error::{Error, Result};
use crate::gaussian::{kl_divergence, rw_divergence, DiagGaussian};
use crate::net::{self, AdamConfig, EncoderCache, EncoderParams, OptimizerState, ParamTensors};
use crate::simplex::{log_sum_exp_parts, softmax_unchecked, sparsemax, SparsePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Nsmdm,
    Nsmtm,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Nsmdm => "nsmdm",
            Variant::Nsmtm => "nsmtm",
        })
    }
}

/// Divergence used to pull the posterior towards the prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Regularizer {
    Rw,
    Kl,
}

impl fmt::Display for Regularizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regularizer::Rw => "rw",
            Regularizer::Kl => "kl",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub variant: Variant,
    pub topics: usize,
    pub latent_dim: usize,
    pub embed_dim: usize,
    pub hidden: usize,
    pub gamma: f64,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub prior_mean: f64,
    pub prior_std: f64,
    pub dropout: f64,
    pub eps_floor: f64,
    pub regularizer: Regularizer,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Nsmtm,
            topics: 50,
            latent_dim: 64,
            embed_dim: 128,
            hidden: 256,
            gamma: 0.5,
            lr: 1e-3,
            epochs: 20,
            batch_size: 64,
            seed: 0,
            prior_mean: 0.0,
            prior_std: 1.0,
            dropout: 0.2,
            eps_floor: 1e-10,
            regularizer: Regularizer::Rw,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.topics < 2 {
            return fail("at least two topics are required");
        }
        if self.latent_dim == 0 || self.embed_dim == 0 || self.hidden == 0 {
            return fail("latent, embedding and hidden sizes must be positive");
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return fail("gamma must be finite and nonnegative");
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return fail("learning rate must be positive");
        }
        if self.batch_size == 0 {
            return fail("batch size must be positive");
        }
        if !(self.prior_std.is_finite() && self.prior_std > 0.0) || !self.prior_mean.is_finite() {
            return fail("prior must have finite mean and positive stddev");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail("dropout rate must lie in [0, 1)");
        }
        if !(self.eps_floor.is_finite() && self.eps_floor > 0.0) {
            return fail("eps_floor must be positive");
        }
        Ok(())
    }
}

/// Generative parameters: the projection `W` (latent × topics), topic
/// embeddings `t` (topics × embed) and word embeddings `S` (embed × vocab).
#[derive(Debug, Clone, PartialEq)]
pub struct GenerativeParams {
    pub projection: Array2<f64>,
    pub topic_embeddings: Array2<f64>,
    pub word_embeddings: Array2<f64>,
}

impl GenerativeParams {
    pub fn zeros(latent: usize, topics: usize, embed: usize, vocab: usize) -> Self {
        Self {
            projection: Array2::zeros((latent, topics)),
            topic_embeddings: Array2::zeros((topics, embed)),
            word_embeddings: Array2::zeros((embed, vocab)),
        }
    }

    pub fn init<R: rand::Rng + ?Sized>(latent: usize, topics: usize, embed: usize, vocab: usize, rng: &mut R) -> Self {
        Self {
            projection: net::glorot(latent, topics, rng),
            topic_embeddings: net::glorot(topics, embed, rng),
            word_embeddings: net::glorot(embed, vocab, rng),
        }
    }

    /// Initialization for sparsemax topic rows: zero word embeddings, so every
    /// topic starts as the uniform distribution over the whole vocabulary, and
    /// half-scale Glorot draws for `W` and `t`.
    ///
    /// A word outside a topic's support receives no gradient through
    /// sparsemax, so rows that start sparse tend to lock in whatever words
    /// the first few random minibatches favoured.
    pub fn init_dense_topics<R: rand::Rng + ?Sized>(
        latent: usize,
        topics: usize,
        embed: usize,
        vocab: usize,
        rng: &mut R,
    ) -> Self {
        let mut projection = net::glorot(latent, topics, rng);
        let mut topic_embeddings = net::glorot(topics, embed, rng);
        projection.mapv_inplace(|w| 0.5 * w);
        topic_embeddings.mapv_inplace(|w| 0.5 * w);
        Self { projection, topic_embeddings, word_embeddings: Array2::zeros((embed, vocab)) }
    }

    pub fn num_topics(&self) -> usize {
        self.projection.ncols()
    }

    pub fn latent_dim(&self) -> usize {
        self.projection.nrows()
    }

    pub fn vocab_size(&self) -> usize {
        self.word_embeddings.ncols()
    }

    /// Topic logits `Sᵀt_k`, one row per topic.
    pub fn topic_logits(&self) -> Array2<f64> {
        self.topic_embeddings.dot(&self.word_embeddings)
    }

    pub fn topic_matrix(&self, variant: Variant) -> Result<TopicMatrix> {
        let logits = self.topic_logits();
        match variant {
            Variant::Nsmdm => {
                if logits.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFiniteLoss { term: "topic logits" });
                }
                Ok(TopicMatrix::Dense { rows: logits })
            }
            Variant::Nsmtm => {
                let rows = logits
                    .rows()
                    .into_iter()
                    .map(|r| sparsemax(r.as_slice().expect("standard layout")))
                    .collect::<Result<Vec<_>>>()?;
                Ok(TopicMatrix::Sparse { logits, rows })
            }
        }
    }

    /// `θ = sparsemax(Wᵀx)`.
    pub fn theta(&self, latent: &[f64]) -> Result<SparsePoint> {
        let logits: Vec<f64> =
            self.projection.columns().into_iter().map(|col| col.iter().zip(latent).map(|(w, x)| w * x).sum()).collect();
        sparsemax(&logits)
    }
}

/// Per-topic word vectors derived from the generative parameters.
#[derive(Debug, Clone)]
pub enum TopicMatrix {
    /// NSMDM: unnormalized rows `Sᵀt_k`.
    Dense { rows: Array2<f64> },
    /// NSMTM: `φ_k = sparsemax(Sᵀt_k)` with the logits kept for reference.
    Sparse { logits: Array2<f64>, rows: Vec<SparsePoint> },
}

impl TopicMatrix {
    pub fn num_topics(&self) -> usize {
        match self {
            TopicMatrix::Dense { rows } => rows.nrows(),
            TopicMatrix::Sparse { rows, .. } => rows.len(),
        }
    }

    pub fn vocab_size(&self) -> usize {
        match self {
            TopicMatrix::Dense { rows } => rows.ncols(),
            TopicMatrix::Sparse { logits, .. } => logits.ncols(),
        }
    }

    pub fn row(&self, k: usize) -> &[f64] {
        match self {
            TopicMatrix::Dense { rows } => rows.row(k).to_slice().expect("standard layout"),
            TopicMatrix::Sparse { rows, .. } => rows[k].values(),
        }
    }

    /// Mixture logits `Σ_k θ_k φ_k` for NSMDM or the mixture `φᵀθ` for NSMTM.
    fn mix(&self, theta: &SparsePoint) -> Vec<f64> {
        let mut out = vec![0.0; self.vocab_size()];
        for &k in theta.support() {
            let w = theta.values()[k];
            for (o, r) in out.iter_mut().zip(self.row(k)) {
                *o += w * r;
            }
        }
        out
    }

    /// Word distribution `ψ` for topic proportions `θ`.
    pub fn decode(&self, theta: &SparsePoint) -> Vec<f64> {
        match self {
            TopicMatrix::Dense { .. } => softmax_unchecked(&self.mix(theta)),
            TopicMatrix::Sparse { .. } => self.mix(theta),
        }
    }

    /// Per-term log-probabilities under `θ`. NSMTM probabilities below
    /// `eps_floor` are raised to it; the second value counts such terms.
    pub fn log_probs(&self, theta: &SparsePoint, terms: &[usize], eps_floor: f64) -> (Vec<f64>, usize) {
        match self {
            TopicMatrix::Dense { .. } => {
                let logits = self.mix(theta);
                let (max, lse) = log_sum_exp_parts(&logits);
                (terms.iter().map(|&v| logits[v] - max - lse).collect(), 0)
            }
            TopicMatrix::Sparse { rows, .. } => {
                let mut floored = 0;
                let lp = terms
                    .iter()
                    .map(|&v| {
                        let p: f64 = theta.support().iter().map(|&k| theta.values()[k] * rows[k].values()[v]).sum();
                        if p < eps_floor {
                            floored += 1;
                            eps_floor.ln()
                        } else {
                            p.ln()
                        }
                    })
                    .collect();
                (lp, floored)
            }
        }
    }

    /// Topic rows as probability distributions: NSMTM rows as-is, NSMDM rows
    /// through softmax.
    pub fn normalized_rows(&self) -> Vec<Vec<f64>> {
        (0..self.num_topics())
            .map(|k| match self {
                TopicMatrix::Dense { .. } => softmax_unchecked(self.row(k)),
                TopicMatrix::Sparse { .. } => self.row(k).to_vec(),
            })
            .collect()
    }
}

/// NSMDM word distribution `softmax(Σ_k θ_k Sᵀt_k)`.
pub fn decode_nsmdm(gen: &GenerativeParams, theta: &SparsePoint) -> Result<Vec<f64>> {
    check_theta(gen, theta)?;
    Ok(gen.topic_matrix(Variant::Nsmdm)?.decode(theta))
}

/// NSMTM word distribution `Σ_k θ_k sparsemax(Sᵀt_k)`. May contain exact zeros.
pub fn decode_nsmtm(gen: &GenerativeParams, theta: &SparsePoint) -> Result<Vec<f64>> {
    check_theta(gen, theta)?;
    Ok(gen.topic_matrix(Variant::Nsmtm)?.decode(theta))
}

fn check_theta(gen: &GenerativeParams, theta: &SparsePoint) -> Result<()> {
    if theta.dim() != gen.num_topics() {
        return Err(Error::DimensionMismatch {
            what: "topic proportions",
            expected: gen.num_topics(),
            got: theta.dim(),
        });
    }
    Ok(())
}

/// Every learnable array of a model. Also used as the gradient container.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub encoder: EncoderParams,
    pub generative: GenerativeParams,
}

impl ModelParams {
    pub fn zeros_like(other: &ModelParams) -> Self {
        let enc = &other.encoder;
        let gen = &other.generative;
        Self {
            encoder: EncoderParams::zeros(enc.vocab_size(), enc.hidden(), enc.latent_dim()),
            generative: GenerativeParams::zeros(
                gen.latent_dim(),
                gen.num_topics(),
                gen.topic_embeddings.ncols(),
                gen.vocab_size(),
            ),
        }
    }
}

impl ParamTensors for GenerativeParams {
    fn tensors(&self) -> Vec<(&'static str, &[f64])> {
        vec![
            ("gen.projection", self.projection.as_slice().expect("standard layout")),
            ("gen.topic_embeddings", self.topic_embeddings.as_slice().expect("standard layout")),
            ("gen.word_embeddings", self.word_embeddings.as_slice().expect("standard layout")),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        vec![
            ("gen.projection", self.projection.as_slice_mut().expect("standard layout")),
            ("gen.topic_embeddings", self.topic_embeddings.as_slice_mut().expect("standard layout")),
            ("gen.word_embeddings", self.word_embeddings.as_slice_mut().expect("standard layout")),
        ]
    }
}

impl ParamTensors for ModelParams {
    fn tensors(&self) -> Vec<(&'static str, &[f64])> {
        let mut t = self.encoder.tensors();
        t.extend(self.generative.tensors());
        t
    }

    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        let mut t = self.encoder.tensors_mut();
        t.extend(self.generative.tensors_mut());
        t
    }
}

/// Randomness consumed by one document's forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Noise {
    /// Standard-normal draw for the reparameterized latent.
    pub eps: Vec<f64>,
    /// Dropout mask over the encoder's second hidden layer.
    pub dropout: Option<Vec<f64>>,
}

impl Noise {
    /// No sampling and no dropout: the latent is the posterior mean.
    pub fn zero(latent_dim: usize) -> Self {
        Self { eps: vec![0.0; latent_dim], dropout: None }
    }

    pub fn draw<R: rand::Rng + ?Sized>(cfg: &TrainConfig, rng: &mut R) -> Self {
        let eps = (0..cfg.latent_dim).map(|_| StandardNormal.sample(rng)).collect();
        let dropout = (cfg.dropout > 0.0).then(|| net::dropout_mask(cfg.hidden, cfg.dropout, rng));
        Self { eps, dropout }
    }
}

/// Loss decomposition for one document or the mean over a batch.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ElboTerms {
    /// `nll + regularizer`, the quantity minimized.
    pub loss: f64,
    /// Reconstruction negative log-likelihood `−Σ_i log ψ_{w_i}`.
    pub nll: f64,
    /// `γ` times the divergence.
    pub regularizer: f64,
    /// Divergence between posterior and prior, unweighted.
    pub divergence: f64,
}

impl ElboTerms {
    fn add_scaled(&mut self, other: &ElboTerms, w: f64) {
        self.loss += w * other.loss;
        self.nll += w * other.nll;
        self.regularizer += w * other.regularizer;
        self.divergence += w * other.divergence;
    }
}

#[derive(Debug, Clone)]
struct DocCache {
    enc: EncoderCache,
    mean: Vec<f64>,
    stddev: Vec<f64>,
    eps: Vec<f64>,
    latent: Vec<f64>,
    theta: SparsePoint,
    counts: Vec<(usize, u32)>,
    length: u32,
    /// NSMDM: the full word distribution. NSMTM: ψ at the document's terms.
    psi: Vec<f64>,
}

/// Everything needed to backpropagate a batch loss.
#[derive(Debug, Clone)]
pub struct ElboCache {
    topics: TopicMatrix,
    docs: Vec<DocCache>,
}

impl ElboCache {
    pub fn thetas(&self) -> impl Iterator<Item = &SparsePoint> {
        self.docs.iter().map(|d| &d.theta)
    }
}

/// Posterior summary for a single document.
#[derive(Debug, Clone, PartialEq)]
pub struct DocPosterior {
    pub latent: DiagGaussian,
    pub theta: SparsePoint,
}

/// One row of the training trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchRecord {
    pub epoch: usize,
    pub batch: usize,
    pub loss: f64,
    pub nll: f64,
    pub regularizer: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainStatus {
    Completed,
    /// Training stopped because a loss or gradient became non-finite. The
    /// returned model holds the last finite parameters.
    Diverged {
        epoch: usize,
        batch: usize,
        reason: String,
    },
}

#[derive(Debug, Clone)]
pub struct Training {
    pub model: TopicModel,
    pub trace: Vec<BatchRecord>,
    pub status: TrainStatus,
}

impl Training {
    pub fn diverged(&self) -> bool {
        matches!(self.status, TrainStatus::Diverged { .. })
    }

    /// Mean batch loss of each completed epoch.
    pub fn epoch_losses(&self) -> Vec<f64> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for r in &self.trace {
            if out.len() < r.epoch {
                out.resize(r.epoch, (0.0, 0));
            }
            let e = &mut out[r.epoch - 1];
            e.0 += r.loss;
            e.1 += 1;
        }
        out.into_iter().filter(|e| e.1 > 0).map(|(s, n)| s / n as f64).collect()
    }
}

/// A trained (or freshly initialized) model with its vocabulary and config.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    config: TrainConfig,
    vocab: Vocabulary,
    params: ModelParams,
}

fn normalized_input(doc: &BowDocument) -> Vec<(usize, f64)> {
    let n = doc.length() as f64;
    doc.entries().map(|(t, c)| (t, c as f64 / n)).collect()
}

impl TopicModel {
    /// Initializes parameters deterministically from `config.seed`.
    pub fn new(config: TrainConfig, vocab: Vocabulary) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let v = vocab.len();
        let encoder = EncoderParams::init(v, config.hidden, config.latent_dim, &mut rng);
        let (d, k, e) = (config.latent_dim, config.topics, config.embed_dim);
        let generative = match config.variant {
            Variant::Nsmdm => GenerativeParams::init(d, k, e, v, &mut rng),
            Variant::Nsmtm => GenerativeParams::init_dense_topics(d, k, e, v, &mut rng),
        };
        Ok(Self { config, vocab, params: ModelParams { encoder, generative } })
    }

    pub fn from_parts(config: TrainConfig, vocab: Vocabulary, params: ModelParams) -> Result<Self> {
        config.validate()?;
        let enc = &params.encoder;
        let gen = &params.generative;
        let shapes_ok = enc.vocab_size() == vocab.len()
            && enc.hidden() == config.hidden
            && enc.layer2.input_dim() == config.hidden
            && enc.layer2.output_dim() == config.hidden
            && enc.latent_dim() == config.latent_dim
            && enc.logstd_head.output_dim() == config.latent_dim
            && enc.mean_head.input_dim() == config.hidden
            && enc.logstd_head.input_dim() == config.hidden
            && gen.latent_dim() == config.latent_dim
            && gen.num_topics() == config.topics
            && gen.topic_embeddings.dim() == (config.topics, config.embed_dim)
            && gen.word_embeddings.dim() == (config.embed_dim, vocab.len());
        if !shapes_ok {
            return Err(Error::Config("parameter shapes do not match the configuration".into()));
        }
        Ok(Self { config, vocab, params })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ModelParams {
        &mut self.params
    }

    pub fn variant(&self) -> Variant {
        self.config.variant
    }

    pub fn num_topics(&self) -> usize {
        self.config.topics
    }

    pub fn prior(&self) -> DiagGaussian {
        DiagGaussian::isotropic(self.config.latent_dim, self.config.prior_mean, self.config.prior_std)
            .expect("validated prior")
    }

    pub fn topic_matrix(&self) -> Result<TopicMatrix> {
        self.params.generative.topic_matrix(self.config.variant)
    }

    fn check_doc(&self, doc: &BowDocument) -> Result<()> {
        if doc.max_term() >= self.vocab.len() {
            return Err(Error::TermOutOfRange(doc.max_term()));
        }
        Ok(())
    }

    /// Divergence between posterior and prior under the configured regularizer.
    pub fn divergence(&self, posterior: &DiagGaussian) -> Result<f64> {
        let prior = self.prior();
        match self.config.regularizer {
            Regularizer::Rw => rw_divergence(posterior, &prior),
            Regularizer::Kl => kl_divergence(posterior, &prior),
        }
    }

    fn doc_forward(&self, topics: &TopicMatrix, doc: &BowDocument, noise: &Noise) -> Result<(ElboTerms, DocCache)> {
        self.check_doc(doc)?;
        let d = self.config.latent_dim;
        if noise.eps.len() != d {
            return Err(Error::DimensionMismatch { what: "latent noise", expected: d, got: noise.eps.len() });
        }
        let input = normalized_input(doc);
        let (out, enc) = self.params.encoder.forward(&input, noise.dropout.as_deref())?;
        let stddev = out.stddev();
        let latent: Vec<f64> = out.mean.iter().zip(&stddev).zip(&noise.eps).map(|((m, s), e)| m + s * e).collect();
        let theta = self.params.generative.theta(&latent)?;

        let counts: Vec<(usize, u32)> = doc.entries().collect();
        let (nll, psi) = match topics {
            TopicMatrix::Dense { .. } => {
                let logits = topics.mix(&theta);
                let (max, lse) = log_sum_exp_parts(&logits);
                let nll: f64 = counts.iter().map(|&(v, c)| -(c as f64) * (logits[v] - max - lse)).sum();
                let psi = logits.iter().map(|&l| (l - max - lse).exp()).collect();
                (nll, psi)
            }
            TopicMatrix::Sparse { rows, .. } => {
                let floor = self.config.eps_floor;
                let psi: Vec<f64> = counts
                    .iter()
                    .map(|&(v, _)| theta.support().iter().map(|&k| theta.values()[k] * rows[k].values()[v]).sum())
                    .collect();
                let nll = counts.iter().zip(&psi).map(|(&(_, c), &p)| -(c as f64) * p.max(floor).ln()).sum();
                (nll, psi)
            }
        };
        if !nll.is_finite() {
            return Err(Error::NonFiniteLoss { term: "reconstruction" });
        }

        let posterior = DiagGaussian::new(out.mean.clone(), stddev.clone())?;
        let divergence = self.divergence(&posterior)?;
        if !divergence.is_finite() {
            return Err(Error::NonFiniteLoss { term: "regularizer" });
        }
        let regularizer = self.config.gamma * divergence;
        let terms = ElboTerms { loss: nll + regularizer, nll, regularizer, divergence };
        let cache = DocCache {
            enc,
            mean: out.mean,
            stddev,
            eps: noise.eps.clone(),
            latent,
            theta,
            length: doc.length(),
            counts,
            psi,
        };
        Ok((terms, cache))
    }

    /// Accumulates `weight ·` (gradient of one document's loss) into `grads`
    /// and the topic-row gradient into `g_rows`.
    fn doc_backward(
        &self,
        topics: &TopicMatrix,
        c: &DocCache,
        weight: f64,
        grads: &mut ModelParams,
        g_rows: &mut Array2<f64>,
    ) {
        let k_total = self.config.topics;
        let theta = &c.theta;
        let mut g_theta = vec![0.0; k_total];

        match topics {
            TopicMatrix::Dense { rows } => {
                // ∂nll/∂logits = N·ψ − counts
                let n = c.length as f64;
                let mut g_logits: Vec<f64> = c.psi.iter().map(|p| weight * n * p).collect();
                for &(v, cnt) in &c.counts {
                    g_logits[v] -= weight * cnt as f64;
                }
                for &k in theta.support() {
                    let row = rows.row(k);
                    g_theta[k] = row.iter().zip(&g_logits).map(|(r, g)| r * g).sum();
                    let tk = theta.values()[k];
                    for (gr, g) in g_rows.row_mut(k).iter_mut().zip(&g_logits) {
                        *gr += tk * g;
                    }
                }
            }
            TopicMatrix::Sparse { rows, .. } => {
                let floor = self.config.eps_floor;
                for (&(v, cnt), &p) in c.counts.iter().zip(&c.psi) {
                    if p < floor {
                        continue;
                    }
                    let g_psi = -weight * cnt as f64 / p;
                    for &k in theta.support() {
                        g_theta[k] += rows[k].values()[v] * g_psi;
                        g_rows[[k, v]] += theta.values()[k] * g_psi;
                    }
                }
            }
        }

        // Through θ = sparsemax(Wᵀx̂).
        let g_z = theta.jvp(&g_theta);
        let w = &self.params.generative.projection;
        let d = self.config.latent_dim;
        let mut g_latent = vec![0.0; d];
        for &k in theta.support() {
            let gk = g_z[k];
            for i in 0..d {
                grads.generative.projection[[i, k]] += c.latent[i] * gk;
                g_latent[i] += w[[i, k]] * gk;
            }
        }

        // Reparameterization and regularizer.
        let gamma = self.config.gamma;
        let (mu0, s0) = (self.config.prior_mean, self.config.prior_std);
        let mut g_mean = vec![0.0; d];
        let mut g_logstd = vec![0.0; d];
        for i in 0..d {
            let (m, s) = (c.mean[i], c.stddev[i]);
            let (reg_m, reg_s) = match self.config.regularizer {
                Regularizer::Rw => (2.0 * (m - mu0), 2.0 * (s - s0)),
                Regularizer::Kl => ((m - mu0) / (s0 * s0), -1.0 / s + s / (s0 * s0)),
            };
            g_mean[i] = g_latent[i] + weight * gamma * reg_m;
            let g_s = g_latent[i] * c.eps[i] + weight * gamma * reg_s;
            g_logstd[i] = g_s * s;
        }
        self.params.encoder.backward(&c.enc, &g_mean, &g_logstd, &mut grads.encoder);
    }

    /// Mean loss over `docs`, with one noise draw per document, and the
    /// cache for [`TopicModel::elbo_backward`].
    pub fn batch_elbo(&self, docs: &[&BowDocument], noise: &[Noise]) -> Result<(ElboTerms, ElboCache)> {
        if docs.is_empty() || docs.len() != noise.len() {
            return Err(Error::DimensionMismatch {
                what: "batch noise",
                expected: docs.len().max(1),
                got: noise.len(),
            });
        }
        let topics = self.topic_matrix()?;
        let w = 1.0 / docs.len() as f64;
        let mut total = ElboTerms::default();
        let mut caches = Vec::with_capacity(docs.len());
        for (doc, n) in docs.iter().zip(noise) {
            let (terms, cache) = self.doc_forward(&topics, doc, n)?;
            total.add_scaled(&terms, w);
            caches.push(cache);
        }
        Ok((total, ElboCache { topics, docs: caches }))
    }

    /// Negative regularized bound for a single document.
    pub fn elbo(&self, doc: &BowDocument, noise: &Noise) -> Result<(ElboTerms, ElboCache)> {
        self.batch_elbo(&[doc], std::slice::from_ref(noise))
    }

    /// Exact gradient of the loss computed by [`TopicModel::batch_elbo`].
    pub fn elbo_backward(&self, cache: &ElboCache) -> ModelParams {
        let mut grads = ModelParams::zeros_like(&self.params);
        let mut g_rows = Array2::zeros((self.config.topics, self.vocab.len()));
        let w = 1.0 / cache.docs.len() as f64;
        for c in &cache.docs {
            self.doc_backward(&cache.topics, c, w, &mut grads, &mut g_rows);
        }

        let g_logits = match &cache.topics {
            TopicMatrix::Dense { .. } => g_rows,
            TopicMatrix::Sparse { rows, .. } => {
                let mut g = Array2::zeros(g_rows.dim());
                for (k, point) in rows.iter().enumerate() {
                    let src = g_rows.row(k);
                    let mut dst = g.row_mut(k);
                    point.jvp_accumulate(
                        src.as_slice().expect("standard layout"),
                        dst.as_slice_mut().expect("standard layout"),
                    );
                }
                g
            }
        };
        let gen = &self.params.generative;
        grads.generative.topic_embeddings = g_logits.dot(&gen.word_embeddings.t());
        grads.generative.word_embeddings = gen.topic_embeddings.t().dot(&g_logits);
        grads
    }

    /// Loss with the posterior mean as latent and no dropout, averaged over
    /// documents.
    pub fn evaluate_loss(&self, docs: &[BowDocument]) -> Result<ElboTerms> {
        let topics = self.topic_matrix()?;
        let noise = Noise::zero(self.config.latent_dim);
        let w = 1.0 / docs.len().max(1) as f64;
        let mut total = ElboTerms::default();
        for d in docs {
            total.add_scaled(&self.doc_forward(&topics, d, &noise)?.0, w);
        }
        Ok(total)
    }

    /// Posterior and evaluation-mode topic proportions `sparsemax(Wᵀμ(w))`.
    pub fn infer_theta(&self, doc: &BowDocument) -> Result<DocPosterior> {
        self.check_doc(doc)?;
        let (out, _) = self.params.encoder.forward(&normalized_input(doc), None)?;
        let theta = self.params.generative.theta(&out.mean)?;
        Ok(DocPosterior { latent: out.posterior()?, theta })
    }

    /// The `n` highest-weighted terms of topic `k`; ties go to the lower id.
    /// NSMTM ranks `φ_k`, NSMDM ranks the unnormalized row `Sᵀt_k`.
    pub fn top_words(&self, k: usize, n: usize) -> Result<Vec<(String, f64)>> {
        let topics = self.topic_matrix()?;
        self.top_words_in(&topics, k, n)
    }

    pub fn top_words_in(&self, topics: &TopicMatrix, k: usize, n: usize) -> Result<Vec<(String, f64)>> {
        if k >= self.config.topics {
            return Err(Error::Config(format!("topic {k} out of range for {} topics", self.config.topics)));
        }
        let v = self.vocab.len();
        let n = if n > v {
            warn!("requested {n} top words but the vocabulary has {v}; returning {v}");
            v
        } else {
            n
        };
        let row = topics.row(k);
        let mut order: Vec<usize> = (0..v).collect();
        order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        Ok(order.into_iter().take(n).map(|i| (self.vocab.terms()[i].clone(), row[i])).collect())
    }

    /// Trains a fresh model from `config` on `corpus`.
    pub fn train(corpus: &Corpus, config: TrainConfig) -> Result<Training> {
        let model = TopicModel::new(config, corpus.vocab().clone())?;
        model.fit(corpus)
    }

    /// Runs the configured number of epochs of minibatch Adam starting from
    /// the current parameters.
    pub fn fit(self, corpus: &Corpus) -> Result<Training> {
        self.fit_observed(corpus, |_, _| {})
    }

    /// [`TopicModel::fit`] that calls `on_epoch(epoch, model)` after every
    /// completed epoch.
    pub fn fit_observed<F>(mut self, corpus: &Corpus, mut on_epoch: F) -> Result<Training>
    where
        F: FnMut(usize, &TopicModel),
    {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if corpus.vocab() != &self.vocab {
            return Err(Error::Config("corpus vocabulary differs from the model's".into()));
        }
        let cfg = self.config.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(1);
        let mut opt = OptimizerState::new(AdamConfig::with_lr(cfg.lr), &self.params);
        let mut order: Vec<usize> = (0..corpus.len()).collect();
        let mut trace = Vec::new();

        for epoch in 1..=cfg.epochs {
            order.shuffle(&mut rng);
            for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
                let batch = b + 1;
                let docs: Vec<&BowDocument> = chunk.iter().map(|&i| &corpus.docs()[i]).collect();
                let noise: Vec<Noise> = docs.iter().map(|_| Noise::draw(&cfg, &mut rng)).collect();
                let diverged = |reason: String| TrainStatus::Diverged { epoch, batch, reason };

                let (terms, cache) = match self.batch_elbo(&docs, &noise) {
                    Ok(r) => r,
                    Err(
                        e @ (Error::NonFiniteLoss { .. } | Error::NumericOverflow { .. } | Error::NumericInput { .. }),
                    ) => return Ok(Training { model: self, trace, status: diverged(e.to_string()) }),
                    Err(e) => return Err(e),
                };
                if !terms.loss.is_finite() {
                    return Ok(Training { model: self, trace, status: diverged("non-finite loss".into()) });
                }
                let grads = self.elbo_backward(&cache);
                if let Err(e) = opt.step(&mut self.params, &grads) {
                    return Ok(Training { model: self, trace, status: diverged(e.to_string()) });
                }
                if let Err(tensor) = self.params.all_finite() {
                    return Ok(Training {
                        model: self,
                        trace,
                        status: diverged(format!("non-finite parameters in `{tensor}`")),
                    });
                }
                trace.push(BatchRecord {
                    epoch,
                    batch,
                    loss: terms.loss,
                    nll: terms.nll,
                    regularizer: terms.regularizer,
                });
            }
            on_epoch(epoch, &self);
        }
        Ok(Training { model: self, trace, status: TrainStatus::Completed })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::check_gradients;
    use rand::Rng;

    fn tiny_vocab(n: usize) -> Vocabulary {
        Vocabulary::new((0..n).map(|i| format!("w{i}")).collect()).unwrap()
    }

    fn tiny_config(variant: Variant) -> TrainConfig {
        TrainConfig {
            variant,
            topics: 3,
            latent_dim: 4,
            embed_dim: 5,
            hidden: 6,
            dropout: 0.0,
            ..TrainConfig::default()
        }
    }

    fn point(values: &[f64]) -> SparsePoint {
        // sparsemax is the identity on simplex points.
        sparsemax(values).unwrap()
    }

    #[test]
    fn nsmdm_one_hot_theta_is_softmax_of_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let gen = GenerativeParams::init(2, 3, 4, 5, &mut rng);
        let psi = decode_nsmdm(&gen, &point(&[0.0, 1.0, 0.0])).unwrap();
        let row = gen.topic_logits().row(1).to_vec();
        let expected = softmax_unchecked(&row);
        for (a, b) in psi.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn nsmdm_equal_rows_ignore_theta() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut gen = GenerativeParams::init(2, 3, 4, 5, &mut rng);
        let first = gen.topic_embeddings.row(0).to_owned();
        for mut r in gen.topic_embeddings.rows_mut() {
            r.assign(&first);
        }
        let a = decode_nsmdm(&gen, &point(&[0.2, 0.5, 0.3])).unwrap();
        let b = decode_nsmdm(&gen, &point(&[1.0, 0.0, 0.0])).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn nsmdm_matches_direct_product_then_softmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let gen = GenerativeParams::init(2, 3, 4, 5, &mut rng);
        let theta = point(&[0.5, 0.0, 0.5]);
        // Direct oracle: logits_v = Σ_k θ_k Σ_e t[k,e] S[e,v], then softmax.
        let mut logits = vec![0.0; 5];
        for (v, l) in logits.iter_mut().enumerate() {
            for k in 0..3 {
                for e in 0..4 {
                    *l += theta.values()[k] * gen.topic_embeddings[[k, e]] * gen.word_embeddings[[e, v]];
                }
            }
        }
        let z: f64 = logits.iter().map(|l| l.exp()).sum();
        let psi = decode_nsmdm(&gen, &theta).unwrap();
        for (p, l) in psi.iter().zip(&logits) {
            assert!((p - l.exp() / z).abs() < 1e-14);
        }
    }

    fn nsmtm_with_rows(rows: &[&[f64]]) -> GenerativeParams {
        // t = I, S = rows transposed, so Sᵀt_k is the k-th row and sparsemax
        // leaves it unchanged when it already lies on the simplex.
        let k = rows.len();
        let v = rows[0].len();
        let mut gen = GenerativeParams::zeros(2, k, k, v);
        for (i, row) in rows.iter().enumerate() {
            gen.topic_embeddings[[i, i]] = 1.0;
            for (j, &w) in row.iter().enumerate() {
                gen.word_embeddings[[i, j]] = w;
            }
        }
        gen
    }

    #[test]
    fn nsmtm_decode_examples() {
        let gen = nsmtm_with_rows(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(decode_nsmtm(&gen, &point(&[0.5, 0.5])).unwrap(), vec![0.5, 0.5]);
        let gen = nsmtm_with_rows(&[&[0.2, 0.8, 0.0], &[0.0, 0.0, 1.0]]);
        assert_eq!(decode_nsmtm(&gen, &point(&[1.0, 0.0])).unwrap(), vec![0.2, 0.8, 0.0]);
    }

    #[test]
    fn nsmtm_support_is_union_of_active_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut gen = GenerativeParams::init(2, 3, 4, 6, &mut rng);
        gen.word_embeddings.mapv_inplace(|v| v * 12.0);
        let topics = gen.topic_matrix(Variant::Nsmtm).unwrap();
        let theta = point(&[0.6, 0.0, 0.4]);
        let psi = topics.decode(&theta);
        let mut expected = std::collections::BTreeSet::new();
        if let TopicMatrix::Sparse { rows, .. } = &topics {
            for &k in theta.support() {
                expected.extend(rows[k].support().iter().copied());
            }
        }
        let got: std::collections::BTreeSet<usize> = (0..6).filter(|&v| psi[v] > 0.0).collect();
        assert_eq!(got, expected);
        assert!((psi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    fn sample_doc(rng: &mut ChaCha8Rng, v: usize) -> BowDocument {
        let ids: Vec<usize> = (0..8).map(|_| rng.random_range(0..v)).collect();
        BowDocument::from_ids(&ids).unwrap()
    }

    #[test]
    fn gamma_zero_is_pure_reconstruction() {
        let mut cfg = tiny_config(Variant::Nsmdm);
        cfg.gamma = 0.0;
        let model = TopicModel::new(cfg, tiny_vocab(7)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let doc = sample_doc(&mut rng, 7);
        let (terms, _) = model.elbo(&doc, &Noise::zero(4)).unwrap();
        assert_eq!(terms.loss, terms.nll);
        assert_eq!(terms.regularizer, 0.0);
        assert!(terms.divergence > 0.0);
    }

    #[test]
    fn mean_shift_adds_gamma_times_squared_norm() {
        let cfg = tiny_config(Variant::Nsmtm);
        let mut model = TopicModel::new(cfg.clone(), tiny_vocab(7)).unwrap();
        let doc = BowDocument::from_ids(&[0, 1, 1, 4]).unwrap();
        let (base, _) = model.elbo(&doc, &Noise::zero(4)).unwrap();
        let delta = [0.3, -0.1, 0.0, 0.25];
        for (b, dlt) in model.params.encoder.mean_head.bias.iter_mut().zip(&delta) {
            *b += dlt;
        }
        let q_before = {
            let mut m = model.clone();
            for (b, dlt) in m.params.encoder.mean_head.bias.iter_mut().zip(&delta) {
                *b -= dlt;
            }
            m.infer_theta(&doc).unwrap().latent
        };
        let q_after = model.infer_theta(&doc).unwrap().latent;
        let (shifted, _) = model.elbo(&doc, &Noise::zero(4)).unwrap();
        // RW(q + Δ, p) − RW(q, p) = ‖μ + Δ − μ₀‖² − ‖μ − μ₀‖², and it is exactly
        // ‖Δ‖² when μ = μ₀.
        let norm2 = |m: &[f64]| m.iter().map(|x| x * x).sum::<f64>();
        let expected = cfg.gamma * (norm2(q_after.mean()) - norm2(q_before.mean()));
        assert!((shifted.regularizer - base.regularizer - expected).abs() < 1e-12);

        let mut at_prior = model.clone();
        at_prior.params.encoder.mean_head.weights.fill(0.0);
        at_prior.params.encoder.mean_head.bias.fill(0.0);
        let (zero, _) = at_prior.elbo(&doc, &Noise::zero(4)).unwrap();
        for (b, dlt) in at_prior.params.encoder.mean_head.bias.iter_mut().zip(&delta) {
            *b += dlt;
        }
        let (moved, _) = at_prior.elbo(&doc, &Noise::zero(4)).unwrap();
        assert!((moved.regularizer - zero.regularizer - cfg.gamma * norm2(&delta)).abs() < 1e-12);
    }

    #[test]
    fn posterior_equal_to_prior_has_zero_rw() {
        let mut model = TopicModel::new(tiny_config(Variant::Nsmdm), tiny_vocab(5)).unwrap();
        let enc = &mut model.params.encoder;
        enc.mean_head.weights.fill(0.0);
        enc.mean_head.bias.fill(0.0);
        enc.logstd_head.weights.fill(0.0);
        enc.logstd_head.bias.fill(0.0);
        let (terms, _) = model.elbo(&BowDocument::from_ids(&[1, 2]).unwrap(), &Noise::zero(4)).unwrap();
        assert_eq!(terms.divergence, 0.0);
    }

    #[test]
    fn rw_mean_gradient_is_two_gamma_offset() {
        // With the decode path frozen by γ-only loss, ∂/∂μ of γ·RW is 2γ(μ − μ₀).
        // Checked through the mean-head bias, whose gradient equals ∂L/∂μ.
        let mut cfg = tiny_config(Variant::Nsmdm);
        cfg.gamma = 0.75;
        let mut model = TopicModel::new(cfg.clone(), tiny_vocab(6)).unwrap();
        model.params.generative.word_embeddings.fill(0.0);
        let doc = BowDocument::from_ids(&[0, 3, 3]).unwrap();
        let (_, cache) = model.elbo(&doc, &Noise::zero(4)).unwrap();
        let grads = model.elbo_backward(&cache);
        let q = model.infer_theta(&doc).unwrap().latent;
        for (g, m) in grads.encoder.mean_head.bias.iter().zip(q.mean()) {
            assert!((g - 2.0 * cfg.gamma * (m - cfg.prior_mean)).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_zero_gradients_skip_regularizer() {
        let mut cfg = tiny_config(Variant::Nsmtm);
        cfg.gamma = 0.0;
        let model = TopicModel::new(cfg, tiny_vocab(6)).unwrap();
        let doc = BowDocument::from_ids(&[0, 1, 5]).unwrap();
        let (_, cache) = model.elbo(&doc, &Noise::zero(4)).unwrap();
        let grads = model.elbo_backward(&cache);
        // With ε = 0 the log-stddev only feeds the regularizer.
        assert!(grads.encoder.logstd_head.flatten().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn kl_toggle_changes_only_regularizer() {
        let cfg = tiny_config(Variant::Nsmdm);
        let rw = TopicModel::new(cfg.clone(), tiny_vocab(6)).unwrap();
        let mut kl = rw.clone();
        kl.config.regularizer = Regularizer::Kl;
        let doc = BowDocument::from_ids(&[0, 2, 2, 5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let noise = Noise::draw(&cfg, &mut rng);
        let (a, _) = rw.elbo(&doc, &noise).unwrap();
        let (b, _) = kl.elbo(&doc, &noise).unwrap();
        assert_eq!(a.nll, b.nll);
        let q = rw.infer_theta(&doc).unwrap().latent;
        let expected_kl = kl_divergence(&q, &rw.prior()).unwrap();
        assert!((b.divergence - expected_kl).abs() < 1e-12);
        assert!((b.loss - b.nll - cfg.gamma * expected_kl).abs() < 1e-12);
    }

    #[test]
    fn regularized_loss_dominates_unregularized() {
        let cfg = tiny_config(Variant::Nsmtm);
        let model = TopicModel::new(cfg.clone(), tiny_vocab(6)).unwrap();
        let mut plain = model.clone();
        plain.config.gamma = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let doc = sample_doc(&mut rng, 6);
            let noise = Noise::draw(&cfg, &mut rng);
            let (a, _) = model.elbo(&doc, &noise).unwrap();
            let (b, _) = plain.elbo(&doc, &noise).unwrap();
            assert!(a.loss >= b.loss);
        }
    }

    fn gradient_check(variant: Variant, regularizer: Regularizer, seed: u64) {
        let mut cfg = tiny_config(variant);
        cfg.regularizer = regularizer;
        cfg.seed = seed;
        let mut model = TopicModel::new(cfg.clone(), tiny_vocab(9)).unwrap();
        // Larger word embeddings put NSMTM rows in a sparse regime.
        model.params.generative.word_embeddings.mapv_inplace(|v| v * 4.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        let docs: Vec<BowDocument> = (0..3).map(|_| sample_doc(&mut rng, 9)).collect();
        let refs: Vec<&BowDocument> = docs.iter().collect();
        let noise: Vec<Noise> = docs.iter().map(|_| Noise::draw(&cfg, &mut rng)).collect();
        let (_, cache) = model.batch_elbo(&refs, &noise).unwrap();
        let grads = model.elbo_backward(&cache);

        let mut probe = model.clone();
        let r = check_gradients(
            |p| {
                probe.params.assign_flat(p);
                match probe.batch_elbo(&refs, &noise) {
                    Ok((t, _)) => t.loss,
                    Err(_) => f64::NAN,
                }
            },
            &model.params.flatten(),
            &grads.flatten(),
            1e-6,
        );
        assert!(r.max_rel_error < 1e-4, "{variant} {regularizer}: {r:?}");
    }

    #[test]
    fn composite_gradients_match_finite_differences() {
        for seed in 0..3 {
            gradient_check(Variant::Nsmdm, Regularizer::Rw, seed);
            gradient_check(Variant::Nsmtm, Regularizer::Rw, seed);
            gradient_check(Variant::Nsmdm, Regularizer::Kl, seed);
        }
    }

    #[test]
    fn top_words_examples() {
        let mut cfg = tiny_config(Variant::Nsmtm);
        cfg.topics = 2;
        let vocab = tiny_vocab(3);
        let gen = nsmtm_with_rows(&[&[0.0, 1.0, 0.0], &[0.3, 0.3, 0.4]]);
        let mut model = TopicModel::new(cfg, vocab).unwrap();
        // Replace the generative part with a hand-built one of matching shape.
        let mut g = GenerativeParams::zeros(4, 2, 5, 3);
        g.topic_embeddings.slice_mut(ndarray::s![.., ..2]).assign(&gen.topic_embeddings);
        g.word_embeddings.slice_mut(ndarray::s![..2, ..]).assign(&gen.word_embeddings);
        model.params.generative = g;

        let top = model.top_words(0, 1).unwrap();
        assert_eq!(top, vec![("w1".to_string(), 1.0)]);
        let all = model.top_words(1, 3).unwrap();
        let terms: Vec<&str> = all.iter().map(|(t, _)| t.as_str()).collect();
        assert_eq!(terms, vec!["w2", "w0", "w1"]);
        assert_eq!(model.top_words(1, 10).unwrap().len(), 3);
        assert!(model.top_words(2, 1).is_err());
    }

    #[test]
    fn infer_is_pure() {
        let model = TopicModel::new(tiny_config(Variant::Nsmdm), tiny_vocab(5)).unwrap();
        let doc = BowDocument::from_ids(&[1, 1, 3]).unwrap();
        assert_eq!(model.infer_theta(&doc).unwrap(), model.infer_theta(&doc.clone()).unwrap());
        assert!(model.infer_theta(&BowDocument::from_ids(&[9]).unwrap()).is_err());
    }

    #[test]
    fn config_validation() {
        let bad = [
            TrainConfig { topics: 1, ..TrainConfig::default() },
            TrainConfig { gamma: f64::NAN, ..TrainConfig::default() },
            TrainConfig { eps_floor: 0.0, ..TrainConfig::default() },
            TrainConfig { dropout: 1.0, ..TrainConfig::default() },
            TrainConfig { batch_size: 0, ..TrainConfig::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
        assert!(TrainConfig::default().validate().is_ok());
    }
}
