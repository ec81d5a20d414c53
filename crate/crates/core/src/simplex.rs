//! Maps from real vectors onto the probability simplex.
//!
//! `sparsemax` is the Euclidean projection onto the simplex. Unlike softmax it
//! returns exact zeros, which is what makes the topic proportions and topic
//! rows of the models sparse. Coordinates below the threshold are stored as
//! `0.0` exactly; the sparsity metrics count them.

use crate::error::{Error, Result};

/// Largest dimension accepted by [`project_simplex_oracle`].
pub const ORACLE_MAX_DIM: usize = 20;

/// Relative distance from the threshold under which an inactive coordinate
/// is treated as sitting on the support boundary.
const BOUNDARY_TOL: f64 = 1e-12;

/// A point on the simplex together with the support it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePoint {
    values: Vec<f64>,
    support: Vec<usize>,
    tau: f64,
}

impl SparsePoint {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Indices of the strictly positive coordinates, ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn num_zeros(&self) -> usize {
        self.values.len() - self.support.len()
    }

    /// Jacobian-vector product of sparsemax at the input that produced this
    /// point: `s ⊙ (v − mean_{S}(v))`.
    ///
    /// The Jacobian is symmetric, so this is also the vector-Jacobian product
    /// used by backpropagation.
    pub fn jvp(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.values.len());
        let mean = self.support.iter().map(|&i| v[i]).sum::<f64>() / self.support.len() as f64;
        let mut out = vec![0.0; v.len()];
        for &i in &self.support {
            out[i] = v[i] - mean;
        }
        out
    }

    /// Same as [`SparsePoint::jvp`] but adds the result into `out`.
    pub fn jvp_accumulate(&self, v: &[f64], out: &mut [f64]) {
        let mean = self.support.iter().map(|&i| v[i]).sum::<f64>() / self.support.len() as f64;
        for &i in &self.support {
            out[i] += v[i] - mean;
        }
    }
}

fn check_finite(x: &[f64], what: &'static str) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NumericInput { what, index }),
        None => Ok(()),
    }
}

/// Euclidean projection of `x` onto the probability simplex.
///
/// With the coordinates sorted in descending order, the support size is the
/// largest `k` with `1 + k·x_(k) > Σ_{j≤k} x_(j)` and the threshold is
/// `τ = (Σ_{j≤k} x_(j) − 1) / k`. Each output is `max(0, x_i − τ)`.
pub fn sparsemax(x: &[f64]) -> Result<SparsePoint> {
    if x.is_empty() {
        return Err(Error::DimensionMismatch { what: "sparsemax input", expected: 1, got: 0 });
    }
    check_finite(x, "sparsemax input")?;

    let mut sorted = x.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));

    let mut cumsum = 0.0;
    let mut support_size = 1;
    let mut support_sum = sorted[0];
    for (k, &xk) in sorted.iter().enumerate() {
        cumsum += xk;
        let k1 = (k + 1) as f64;
        if 1.0 + k1 * xk > cumsum {
            support_size = k + 1;
            support_sum = cumsum;
        }
    }
    let tau = (support_sum - 1.0) / support_size as f64;
    let cutoff = sorted[support_size - 1];

    let mut values = vec![0.0; x.len()];
    let mut support = Vec::with_capacity(support_size);
    for (i, &xi) in x.iter().enumerate() {
        if xi >= cutoff {
            let p = xi - tau;
            if p > 0.0 {
                values[i] = p;
                support.push(i);
            }
        }
    }
    Ok(SparsePoint { values, support, tau })
}

/// Result of [`sparsemax_jvp`].
#[derive(Debug, Clone, PartialEq)]
pub struct Jvp {
    pub value: Vec<f64>,
    /// Some inactive coordinate sits exactly on the threshold, so sparsemax
    /// is not differentiable at `x`. `value` is then the one-sided derivative
    /// that keeps the computed support fixed.
    pub degenerate: bool,
}

/// Jacobian of sparsemax at `x` applied to `v`.
pub fn sparsemax_jvp(x: &[f64], v: &[f64]) -> Result<Jvp> {
    if v.len() != x.len() {
        return Err(Error::DimensionMismatch { what: "sparsemax_jvp direction", expected: x.len(), got: v.len() });
    }
    check_finite(v, "sparsemax_jvp direction")?;
    let point = sparsemax(x)?;
    let degenerate = is_degenerate(x, &point);
    Ok(Jvp { value: point.jvp(v), degenerate })
}

/// True when an inactive coordinate of `x` lies on the threshold of `point`.
pub fn is_degenerate(x: &[f64], point: &SparsePoint) -> bool {
    let tol = BOUNDARY_TOL * point.tau.abs().max(1.0);
    x.iter().zip(&point.values).any(|(&xi, &pi)| pi == 0.0 && (xi - point.tau).abs() <= tol)
}

/// `exp(x − max x)` normalized to sum to one.
pub fn softmax(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::DimensionMismatch { what: "softmax input", expected: 1, got: 0 });
    }
    check_finite(x, "softmax input")?;
    Ok(softmax_unchecked(x))
}

pub(crate) fn softmax_unchecked(x: &[f64]) -> Vec<f64> {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = x.iter().map(|&v| (v - max).exp()).collect();
    let z: f64 = out.iter().sum();
    for o in &mut out {
        *o /= z;
    }
    out
}

/// Returns `(max, ln Σ exp(x − max))` so that `log softmax(x)_i = x_i − max − lse`.
pub(crate) fn log_sum_exp_parts(x: &[f64]) -> (f64, f64) {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = x.iter().map(|&v| (v - max).exp()).sum();
    (max, z.ln())
}

/// Exhaustive solver for `argmin_{p ∈ Δ} ‖p − x‖²`.
///
/// Every nonempty support `S` gives the equality-constrained minimizer
/// `p_S = x_S − (Σ x_S − 1)/|S|`; the feasible candidate with the smallest
/// objective wins. Runs in `O(2^d)` with subset sums built incrementally.
/// Intended only as a test oracle for [`sparsemax`].
pub fn project_simplex_oracle(x: &[f64]) -> Result<Vec<f64>> {
    let d = x.len();
    if d == 0 {
        return Err(Error::DimensionMismatch { what: "oracle input", expected: 1, got: 0 });
    }
    if d > ORACLE_MAX_DIM {
        return Err(Error::OracleSize { max: ORACLE_MAX_DIM, got: d });
    }
    check_finite(x, "oracle input")?;

    let n = 1usize << d;
    let total_sq: f64 = x.iter().map(|v| v * v).sum();
    let mut sum = vec![0.0f64; n];
    let mut sum_sq = vec![0.0f64; n];
    let mut min = vec![f64::INFINITY; n];

    let mut best: Option<(f64, usize, f64)> = None;
    for mask in 1..n {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let xi = x[low];
        sum[mask] = sum[rest] + xi;
        sum_sq[mask] = sum_sq[rest] + xi * xi;
        min[mask] = min[rest].min(xi);

        let size = mask.count_ones() as f64;
        let tau = (sum[mask] - 1.0) / size;
        if min[mask] - tau < 0.0 {
            continue;
        }
        // ‖p − x‖² = |S|·τ² + Σ_{i∉S} x_i²
        let objective = size * tau * tau + (total_sq - sum_sq[mask]);
        if best.is_none_or(|(b, _, _)| objective < b) {
            best = Some((objective, mask, tau));
        }
    }

    let (_, mask, tau) = best.expect("the full support with the smallest shift is always feasible");
    Ok((0..d).map(|i| if mask >> i & 1 == 1 { (x[i] - tau).max(0.0) } else { 0.0 }).collect())
}
