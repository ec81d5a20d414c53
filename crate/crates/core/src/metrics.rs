//! Held-out perplexity, PMI topic coherence and topic sparsity.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{BowDocument, SplitDocument};
use crate::error::{Error, Result};
use crate::model::TopicModel;
use crate::simplex::SparsePoint;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerplexityMode {
    /// Held-out tokens scored under the word distribution decoded from the
    /// observed half.
    Predictive,
    /// Predictive plus `γ·RW(q, prior)` per document in the numerator.
    BoundRw,
    /// Predictive plus `KL(q ‖ prior)` per document in the numerator.
    BoundKl,
}

impl PerplexityMode {
    pub const ALL: [PerplexityMode; 3] = [PerplexityMode::BoundRw, PerplexityMode::BoundKl, PerplexityMode::Predictive];

    pub fn name(self) -> &'static str {
        match self {
            PerplexityMode::Predictive => "predictive",
            PerplexityMode::BoundRw => "bound_rw",
            PerplexityMode::BoundKl => "bound_kl",
        }
    }
}

impl fmt::Display for PerplexityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerplexityReport {
    pub value: f64,
    /// Number of held-out tokens in the denominator.
    pub tokens: u64,
    /// Held-out tokens whose probability was raised to the floor.
    pub floored_tokens: u64,
}

/// Perplexity from per-document negative log-likelihoods.
///
/// `score` returns the held-out negative log-likelihood of one document and
/// the number of floored tokens.
pub fn perplexity_with<F>(test: &[SplitDocument], mut score: F) -> Result<PerplexityReport>
where
    F: FnMut(&SplitDocument) -> Result<(f64, u64)>,
{
    if test.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut total = CompensatedSum::default();
    let mut tokens = 0u64;
    let mut floored = 0u64;
    for doc in test {
        let (nll, f) = score(doc)?;
        total.add(nll);
        tokens += u64::from(doc.heldout.length());
        floored += f;
    }
    Ok(PerplexityReport { value: (total.value() / tokens as f64).exp(), tokens, floored_tokens: floored })
}

/// Held-out perplexity of `model` with `θ` inferred from each observed half.
pub fn perplexity(model: &TopicModel, test: &[SplitDocument], mode: PerplexityMode) -> Result<PerplexityReport> {
    let topics = model.topic_matrix()?;
    let prior = model.prior();
    let floor = model.config().eps_floor;
    perplexity_with(test, |doc| {
        let post = model.infer_theta(&doc.observed)?;
        let (terms, counts): (Vec<usize>, Vec<u32>) = doc.heldout.entries().unzip();
        let (lp, floored) = topics.log_probs(&post.theta, &terms, floor);
        let floored_tokens: u64 = terms
            .iter()
            .zip(&lp)
            .zip(&counts)
            .filter(|((_, &l), _)| floored > 0 && l == floor.ln())
            .map(|(_, &c)| u64::from(c))
            .sum();
        let mut nll = CompensatedSum::default();
        for (l, &c) in lp.iter().zip(&counts) {
            nll.add(-f64::from(c) * l);
        }
        let extra = match mode {
            PerplexityMode::Predictive => 0.0,
            PerplexityMode::BoundRw => model.config().gamma * crate::gaussian::rw_divergence(&post.latent, &prior)?,
            PerplexityMode::BoundKl => crate::gaussian::kl_divergence(&post.latent, &prior)?,
        };
        Ok((nll.value() + extra, floored_tokens))
    })
}

/// Perplexity of the model that puts probability `1/vocab_size` on every term.
pub fn uniform_perplexity(test: &[SplitDocument], vocab_size: usize) -> Result<PerplexityReport> {
    if vocab_size == 0 {
        return Err(Error::EmptyCorpus);
    }
    let log_p = -(vocab_size as f64).ln();
    perplexity_with(test, |doc| Ok((-f64::from(doc.heldout.length()) * log_p, 0)))
}

/// Unigram word-frequency model with add-one smoothing.
#[derive(Debug, Clone, PartialEq)]
pub struct UnigramModel {
    log_probs: Vec<f64>,
}

impl UnigramModel {
    pub fn fit(docs: &[BowDocument], vocab_size: usize) -> Result<Self> {
        if vocab_size == 0 {
            return Err(Error::EmptyCorpus);
        }
        let mut counts = vec![1.0f64; vocab_size];
        for d in docs {
            for (t, c) in d.entries() {
                if t >= vocab_size {
                    return Err(Error::TermOutOfRange(t));
                }
                counts[t] += f64::from(c);
            }
        }
        let total: f64 = counts.iter().sum();
        Ok(Self { log_probs: counts.iter().map(|c| (c / total).ln()).collect() })
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    /// Scores held-out halves; the observed halves are ignored.
    pub fn perplexity(&self, test: &[SplitDocument]) -> Result<PerplexityReport> {
        perplexity_with(test, |doc| {
            let mut nll = CompensatedSum::default();
            for (t, c) in doc.heldout.entries() {
                let lp = self.log_probs.get(t).ok_or(Error::TermOutOfRange(t))?;
                nll.add(-f64::from(c) * lp);
            }
            Ok((nll.value(), 0))
        })
    }
}

/// Document-level co-occurrence statistics, stored as sorted postings lists.
#[derive(Debug, Clone, PartialEq)]
pub struct CoocStats {
    postings: Vec<Vec<u32>>,
    n_docs: usize,
}

impl CoocStats {
    pub fn build(docs: &[BowDocument], vocab_size: usize) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut postings = vec![Vec::new(); vocab_size];
        for (i, d) in docs.iter().enumerate() {
            for (t, _) in d.entries() {
                postings.get_mut(t).ok_or(Error::TermOutOfRange(t))?.push(i as u32);
            }
        }
        Ok(Self { postings, n_docs: docs.len() })
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn vocab_size(&self) -> usize {
        self.postings.len()
    }

    pub fn doc_freq(&self, term: usize) -> Result<usize> {
        self.postings.get(term).map(Vec::len).ok_or(Error::TermOutOfRange(term))
    }

    /// Number of documents containing both terms.
    pub fn pair_freq(&self, a: usize, b: usize) -> Result<usize> {
        let pa = self.postings.get(a).ok_or(Error::TermOutOfRange(a))?;
        let pb = self.postings.get(b).ok_or(Error::TermOutOfRange(b))?;
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < pa.len() && j < pb.len() {
            match pa[i].cmp(&pb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(n)
    }
}

/// Mean pairwise PMI of `terms` (natural log), with add-one smoothing on the
/// pair counts only.
pub fn pmi(stats: &CoocStats, terms: &[usize]) -> Result<f64> {
    if terms.len() < 2 {
        return Err(Error::Config("PMI needs at least two terms".into()));
    }
    for (i, a) in terms.iter().enumerate() {
        if terms[..i].contains(a) {
            return Err(Error::Config(format!("term {a} repeated in PMI input")));
        }
    }
    let n = stats.n_docs() as f64;
    let mut marg = Vec::with_capacity(terms.len());
    for &t in terms {
        let df = stats.doc_freq(t)?;
        if df == 0 {
            return Err(Error::ZeroMarginal(format!("term id {t}")));
        }
        marg.push(df as f64 / n);
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..terms.len() {
        for j in i + 1..terms.len() {
            let joint = (stats.pair_freq(terms[i], terms[j])? as f64 + 1.0) / (n + 1.0);
            total += (joint / (marg[i] * marg[j])).ln();
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

/// Fraction of exactly-zero coordinates of `θ`.
pub fn topic_sparsity_theta(theta: &SparsePoint) -> f64 {
    theta.num_zeros() as f64 / theta.dim() as f64
}

/// Fraction of coordinates of a topic-word row that are at most `threshold`.
pub fn topic_sparsity_phi(row: &[f64], threshold: f64) -> f64 {
    if row.is_empty() {
        return 0.0;
    }
    row.iter().filter(|&&v| v <= threshold).count() as f64 / row.len() as f64
}
