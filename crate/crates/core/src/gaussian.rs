//! Diagonal Gaussians and the divergences used to regularize the posterior.
//!
//! The relaxed Wasserstein divergence with the quadratic Bregman cost
//! `D(x, y) = ‖x − y‖²` reduces, for Gaussians, to the 2-Wasserstein
//! distance: `‖μ_p − μ_q‖² + Tr(Σ_p + Σ_q − 2(Σ_p Σ_q)^{1/2})`. With diagonal
//! covariances the trace term is `Σ_i (σ_p,i − σ_q,i)²`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Lipschitz constant of `∇φ` for `φ = ‖·‖²`.
pub const QUADRATIC_BREGMAN_LIPSCHITZ: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagGaussian {
    mean: Vec<f64>,
    stddev: Vec<f64>,
}

impl DiagGaussian {
    pub fn new(mean: Vec<f64>, stddev: Vec<f64>) -> Result<Self> {
        if mean.len() != stddev.len() {
            return Err(Error::DimensionMismatch { what: "gaussian stddev", expected: mean.len(), got: stddev.len() });
        }
        if let Some(index) = mean.iter().position(|m| !m.is_finite()) {
            return Err(Error::NumericInput { what: "gaussian mean", index });
        }
        if let Some(index) = stddev.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::NumericInput { what: "gaussian stddev", index });
        }
        Ok(Self { mean, stddev })
    }

    /// Isotropic `N(μ₀·1, σ₀²·I)` in `dim` dimensions.
    pub fn isotropic(dim: usize, mean: f64, stddev: f64) -> Result<Self> {
        Self::new(vec![mean; dim], vec![stddev; dim])
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn stddev(&self) -> &[f64] {
        &self.stddev
    }

    /// Reparameterized draw `μ + σ ⊙ ε` for a caller-supplied standard-normal `ε`.
    pub fn sample(&self, eps: &[f64]) -> Result<Vec<f64>> {
        same_dim(self.dim(), eps.len(), "noise")?;
        Ok(self.mean.iter().zip(&self.stddev).zip(eps).map(|((m, s), e)| m + s * e).collect())
    }
}

fn same_dim(expected: usize, got: usize, what: &'static str) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { what, expected, got })
    }
}

/// Closed-form relaxed Wasserstein divergence between diagonal Gaussians
/// under the quadratic cost. Symmetric and nonnegative.
pub fn rw_divergence(p: &DiagGaussian, q: &DiagGaussian) -> Result<f64> {
    same_dim(p.dim(), q.dim(), "rw_divergence")?;
    let mean_term: f64 = p.mean.iter().zip(&q.mean).map(|(a, b)| (a - b) * (a - b)).sum();
    let cov_term: f64 = p.stddev.iter().zip(&q.stddev).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(mean_term + cov_term)
}

/// `KL(q ‖ p)` for diagonal Gaussians.
pub fn kl_divergence(q: &DiagGaussian, p: &DiagGaussian) -> Result<f64> {
    same_dim(q.dim(), p.dim(), "kl_divergence")?;
    let mut kl = 0.0;
    for i in 0..q.dim() {
        let (mq, sq) = (q.mean[i], q.stddev[i]);
        let (mp, sp) = (p.mean[i], p.stddev[i]);
        kl += (sp / sq).ln() + (sq * sq + (mq - mp) * (mq - mp)) / (2.0 * sp * sp) - 0.5;
    }
    Ok(kl)
}

/// Monte-Carlo estimate of the quadratic-cost transport divergence.
///
/// Draws `x ~ p` and pushes it through the optimal map between diagonal
/// Gaussians, `y = μ_q + (σ_q/σ_p) ⊙ (x − μ_p)`, then averages `‖x − y‖²`.
/// Used as an independent check of [`rw_divergence`].
pub fn rw_monte_carlo_oracle(p: &DiagGaussian, q: &DiagGaussian, n: usize, seed: u64) -> Result<f64> {
    same_dim(p.dim(), q.dim(), "rw_monte_carlo_oracle")?;
    if n == 0 {
        return Err(Error::Config("Monte-Carlo sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ratio: Vec<f64> = q.stddev.iter().zip(&p.stddev).map(|(sq, sp)| sq / sp).collect();
    let mut total = 0.0;
    for _ in 0..n {
        let mut sq_dist = 0.0;
        for ((&mp, &sp), (&mq, &r)) in p.mean.iter().zip(&p.stddev).zip(q.mean.iter().zip(&ratio)) {
            let z: f64 = StandardNormal.sample(&mut rng);
            let x = mp + sp * z;
            let y = mq + r * (x - mp);
            sq_dist += (x - y) * (x - y);
        }
        total += sq_dist;
    }
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(mean: &[f64], stddev: &[f64]) -> DiagGaussian {
        DiagGaussian::new(mean.to_vec(), stddev.to_vec()).unwrap()
    }

    #[test]
    fn sample_examples() {
        let std = g(&[0.0, 0.0], &[1.0, 1.0]);
        assert_eq!(std.sample(&[0.3, -1.7]).unwrap(), vec![0.3, -1.7]);
        let p = g(&[1.0, 2.0], &[0.5, 2.0]);
        assert_eq!(p.sample(&[0.0, 0.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(p.sample(&[2.0, -1.0]).unwrap(), vec![2.0, 0.0]);
        assert!(p.sample(&[1.0]).is_err());
    }

    #[test]
    fn rejects_bad_stddev() {
        assert!(DiagGaussian::new(vec![0.0], vec![0.0]).is_err());
        assert!(DiagGaussian::new(vec![0.0], vec![-1.0]).is_err());
        assert!(DiagGaussian::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(DiagGaussian::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn rw_examples() {
        let p = g(&[0.0, 0.0], &[1.0, 1.0]);
        assert_eq!(rw_divergence(&p, &p).unwrap(), 0.0);
        assert_eq!(rw_divergence(&g(&[0.0], &[1.0]), &g(&[1.0], &[1.0])).unwrap(), 1.0);
        let q = g(&[1.0, 2.0], &[2.0, 3.0]);
        assert_eq!(rw_divergence(&p, &q).unwrap(), 10.0);
        assert_eq!(rw_divergence(&q, &p).unwrap(), 10.0);
    }

    #[test]
    fn rw_monte_carlo_agrees_on_small_cases() {
        let cases = [
            (g(&[0.0], &[1.0]), g(&[1.0], &[1.0]), 1.0),
            (g(&[0.0, 0.0], &[1.0, 1.0]), g(&[1.0, 2.0], &[2.0, 3.0]), 10.0),
        ];
        for (p, q, expected) in cases {
            let mc = rw_monte_carlo_oracle(&p, &q, 200_000, 3).unwrap();
            assert!((mc - expected).abs() / expected < 0.01, "{mc} vs {expected}");
        }
    }

    #[test]
    fn rw_monte_carlo_identity_and_determinism() {
        let p = g(&[0.4, -1.0], &[0.3, 2.0]);
        assert_eq!(rw_monte_carlo_oracle(&p, &p, 17, 1).unwrap(), 0.0);
        let q = g(&[0.0, 0.0], &[1.0, 1.0]);
        let a = rw_monte_carlo_oracle(&p, &q, 1000, 9).unwrap();
        let b = rw_monte_carlo_oracle(&p, &q, 1000, 9).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert!(rw_monte_carlo_oracle(&p, &q, 0, 9).is_err());
    }

    /// Trapezoid-rule integral of `q(x) ln(q(x)/p(x))` over a wide window.
    fn kl_quadrature(mq: f64, sq: f64, mp: f64, sp: f64) -> f64 {
        let log_pdf =
            |x: f64, m: f64, s: f64| -0.5 * ((x - m) / s).powi(2) - s.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln();
        let (lo, hi, n) = (mq - 12.0 * sq, mq + 12.0 * sq, 200_000);
        let h = (hi - lo) / n as f64;
        let mut total = 0.0;
        for i in 0..=n {
            let x = lo + i as f64 * h;
            let lq = log_pdf(x, mq, sq);
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            total += w * lq.exp() * (lq - log_pdf(x, mp, sp));
        }
        total * h
    }

    #[test]
    fn kl_examples() {
        let p = g(&[0.2, 0.1], &[1.5, 0.5]);
        assert!(kl_divergence(&p, &p).unwrap().abs() < 1e-15);

        let kl = kl_divergence(&g(&[0.0], &[1.0]), &g(&[1.0], &[1.0])).unwrap();
        assert!((kl - 0.5).abs() < 1e-15);
        assert!((kl_quadrature(0.0, 1.0, 1.0, 1.0) - 0.5).abs() < 1e-8);

        let kl = kl_divergence(&g(&[0.0], &[2.0]), &g(&[0.0], &[1.0])).unwrap();
        let expected = 0.5 * (4.0 - 1.0 - 4f64.ln());
        assert!((kl - expected).abs() < 1e-14);
        assert!((kl - 0.8069).abs() < 1e-4);
        assert!((kl_quadrature(0.0, 2.0, 0.0, 1.0) - expected).abs() < 1e-8);
    }

    #[test]
    fn degenerate_posterior_rw_stays_finite_kl_blows_up() {
        let prior = g(&[0.0], &[1.0]);
        let mut last_kl = 0.0;
        for s in [1e-2, 1e-4, 1e-6, 1e-9, 1e-12] {
            let q = g(&[0.0], &[s]);
            let rw = rw_divergence(&q, &prior).unwrap();
            let kl = kl_divergence(&q, &prior).unwrap();
            assert!(rw.is_finite() && rw <= 1.0);
            assert!(kl > last_kl);
            last_kl = kl;
        }
        assert!(last_kl > 25.0);
    }

    /// Pinsker sandwich on a bounded support: two discrete distributions on
    /// points of [0, 1], so diam = 1. The 1-D quadratic transport cost comes
    /// from the monotone (quantile) coupling.
    #[test]
    fn bounded_support_pinsker_sandwich() {
        let points: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
        let p: [f64; 5] = [0.1, 0.2, 0.4, 0.2, 0.1];
        let q: [f64; 5] = [0.3, 0.3, 0.2, 0.1, 0.1];

        let tv = 0.5 * p.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum::<f64>();
        let kl: f64 = p.iter().zip(&q).map(|(a, b)| a * (a / b).ln()).sum();

        let (mut i, mut j) = (0, 0);
        let (mut rp, mut rq) = (p[0], q[0]);
        let mut w2 = 0.0;
        while i < points.len() && j < points.len() {
            let mass = rp.min(rq);
            w2 += mass * (points[i] - points[j]).powi(2);
            rp -= mass;
            rq -= mass;
            if rp <= 1e-15 {
                i += 1;
                rp = p.get(i).copied().unwrap_or(0.0);
            }
            if rq <= 1e-15 {
                j += 1;
                rq = q.get(j).copied().unwrap_or(0.0);
            }
        }
        let diam = 1.0;
        assert!(w2 / (QUADRATIC_BREGMAN_LIPSCHITZ * diam * diam) <= tv);
        assert!(tv <= (0.5 * kl).sqrt());
    }
}
