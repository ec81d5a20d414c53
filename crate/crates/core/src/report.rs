//! Metric reports and hyper-parameter sweeps built on the metrics module.

use std::fmt;

use log::{info, warn};

use crate::corpus::{BowDocument, Corpus, SplitDocument};
use crate::error::{Error, Result};
use crate::metrics::{perplexity, pmi, topic_sparsity_phi, topic_sparsity_theta, CoocStats, PerplexityMode};
use crate::model::{TopicModel, TrainConfig, Variant};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    /// Top words per topic entering PMI.
    pub pmi_topn: usize,
    /// Topic-word entries at or below this value count as zero in TS(φ).
    pub ts_threshold: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { pmi_topn: 15, ts_threshold: 0.0 }
    }
}

/// One `metric,variant,value` row.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub metric: String,
    pub variant: Variant,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub rows: Vec<MetricRow>,
}

impl MetricReport {
    pub fn get(&self, metric: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.metric == metric).map(|r| r.value)
    }

    /// CSV with header `metric,variant,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,variant,value\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.metric, r.variant, r.value));
        }
        out
    }

    /// Flat `key = value` lines.
    pub fn to_text(&self) -> String {
        self.rows.iter().map(|r| format!("{} = {}\n", r.metric, r.value)).collect()
    }
}

impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv())
    }
}

/// Mean PMI over the topics whose top words all occur in `reference`, with
/// the number of topics that had to be skipped.
pub fn mean_topic_pmi(model: &TopicModel, reference: &CoocStats, topn: usize) -> Result<(f64, usize)> {
    let topics = model.topic_matrix()?;
    let (mut total, mut used, mut skipped) = (0.0, 0usize, 0usize);
    for k in 0..model.num_topics() {
        let ids: Vec<usize> = model
            .top_words_in(&topics, k, topn)?
            .iter()
            .map(|(term, _)| model.vocab().id(term).expect("term from the model's own vocabulary"))
            .collect();
        match pmi(reference, &ids) {
            Ok(v) => {
                total += v;
                used += 1;
            }
            Err(Error::ZeroMarginal(_)) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if skipped > 0 {
        warn!("{skipped} topics have top words absent from the reference corpus and were left out of PMI");
    }
    let mean = if used == 0 { f64::NAN } else { total / used as f64 };
    Ok((mean, skipped))
}

/// Perplexity in every mode, mean topic PMI, mean TS(θ) over the whole test
/// documents and TS(φ) for every topic.
pub fn evaluate(
    model: &TopicModel,
    test: &[SplitDocument],
    reference: &CoocStats,
    opts: EvalOptions,
) -> Result<MetricReport> {
    let variant = model.variant();
    let mut rows = Vec::new();
    let mut push = |metric: String, value: f64| rows.push(MetricRow { metric, variant, value });

    for mode in PerplexityMode::ALL {
        let r = perplexity(model, test, mode)?;
        push(format!("perplexity_{}", mode.name()), r.value);
        if mode == PerplexityMode::Predictive {
            push("floored_tokens".into(), r.floored_tokens as f64);
            push("heldout_tokens".into(), r.tokens as f64);
        }
    }

    let (pmi_mean, skipped) = mean_topic_pmi(model, reference, opts.pmi_topn)?;
    push("pmi_mean".into(), pmi_mean);
    push("pmi_topics_skipped".into(), skipped as f64);

    let mut ts = 0.0;
    for doc in test {
        ts += topic_sparsity_theta(&model.infer_theta(&doc.merged())?.theta);
    }
    push("ts_theta_mean".into(), ts / test.len() as f64);

    let phi: Vec<f64> =
        model.topic_matrix()?.normalized_rows().iter().map(|row| topic_sparsity_phi(row, opts.ts_threshold)).collect();
    push("ts_phi_mean".into(), phi.iter().sum::<f64>() / phi.len() as f64);
    for (k, v) in phi.into_iter().enumerate() {
        push(format!("ts_phi_topic_{k}"), v);
    }
    Ok(MetricReport { rows })
}

/// The hyper-parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Gamma,
    LearningRate,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::Gamma => "gamma",
            SweepParam::LearningRate => "lr",
        })
    }
}

/// Outcome of one sweep point. Diverged runs carry NaN in every metric.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: f64,
    pub pmi: f64,
    pub perplexity_bound_rw: f64,
    pub perplexity_predictive: f64,
    pub final_loss: f64,
    pub diverged: bool,
}

pub const SWEEP_HEADER: &str = "param,value,pmi,perplexity_bound_rw,perplexity_predictive,final_loss,diverged";

impl SweepRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.param,
            self.value,
            self.pmi,
            self.perplexity_bound_rw,
            self.perplexity_predictive,
            self.final_loss,
            self.diverged
        )
    }
}

/// Trains and evaluates once per value, all with the seed of `base`.
/// A diverged run is recorded and the sweep moves on.
pub fn sweep(
    train: &Corpus,
    test: &[SplitDocument],
    reference: &[BowDocument],
    base: &TrainConfig,
    param: SweepParam,
    values: &[f64],
    opts: EvalOptions,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::Config("sweep list is empty".into()));
    }
    let stats = CoocStats::build(reference, train.vocab().len())?;
    let mut rows = Vec::with_capacity(values.len());
    for &value in values {
        let mut cfg = base.clone();
        match param {
            SweepParam::Gamma => cfg.gamma = value,
            SweepParam::LearningRate => cfg.lr = value,
        }
        info!("sweep {param} = {value}");
        let run = TopicModel::train(train, cfg)?;
        let final_loss = run.epoch_losses().last().copied().unwrap_or(f64::NAN);
        let scored = if run.diverged() {
            warn!("{param} = {value} diverged: {:?}", run.status);
            None
        } else {
            match score(&run.model, test, &stats, opts.pmi_topn) {
                Ok(s) => Some(s),
                Err(e @ (Error::NumericInput { .. } | Error::NumericOverflow { .. } | Error::NonFiniteLoss { .. })) => {
                    warn!("{param} = {value} produced a model that cannot be scored: {e}");
                    None
                }
                Err(e) => return Err(e),
            }
        };
        let row = match scored {
            Some((pmi, rw, predictive)) => SweepRow {
                param,
                value,
                pmi,
                perplexity_bound_rw: rw,
                perplexity_predictive: predictive,
                final_loss,
                diverged: false,
            },
            None => SweepRow {
                param,
                value,
                pmi: f64::NAN,
                perplexity_bound_rw: f64::NAN,
                perplexity_predictive: f64::NAN,
                final_loss: f64::NAN,
                diverged: true,
            },
        };
        rows.push(row);
    }
    Ok(rows)
}

fn score(model: &TopicModel, test: &[SplitDocument], stats: &CoocStats, topn: usize) -> Result<(f64, f64, f64)> {
    let (pmi, _) = mean_topic_pmi(model, stats, topn)?;
    let rw = perplexity(model, test, PerplexityMode::BoundRw)?.value;
    let predictive = perplexity(model, test, PerplexityMode::Predictive)?.value;
    Ok((pmi, rw, predictive))
}
