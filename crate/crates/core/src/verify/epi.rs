//! Entropy-power checks on conditionally Gaussian inputs.
//!
//! Given `U = u`, `X` is zero-mean Gaussian with variance `sigma_u^2`. Then
//! `h(X + sqrt(t) Z | U) = sum_u w_u 1/2 log2(2 pi e (sigma_u^2 + t))` and the
//! conditional entropy power is a weighted geometric mean of affine functions
//! of `t`, which is concave in `t`.

use std::f64::consts::{E, PI};

use rand::RngExt;
use serde::Serialize;

use crate::bounds::AlphaWeights;
use crate::channel::ChannelSpec;

use super::VerifyError;

/// Tolerance on concavity violations, relative to the largest entropy power
/// on the grid.
pub const CONCAVITY_RTOL: f64 = 1e-9;
/// Tolerance on the entropy-power combination margin.
pub const EPI_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalGaussianInput {
    weights: Vec<f64>,
    variances: Vec<f64>,
}

impl ConditionalGaussianInput {
    pub fn new(weights: Vec<f64>, variances: Vec<f64>) -> Result<Self, VerifyError> {
        if weights.len() != variances.len() || weights.is_empty() {
            return Err(VerifyError::DimensionMismatch);
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(VerifyError::InvalidInput("weights must form a pmf".into()));
        }
        if variances.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(VerifyError::InvalidInput(
                "variances must be finite and non-negative".into(),
            ));
        }
        Ok(Self { weights, variances })
    }

    /// A single Gaussian of variance `variance`.
    pub fn gaussian(variance: f64) -> Result<Self, VerifyError> {
        Self::new(vec![1.0], vec![variance])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// Random input with `states` components; variances log-uniform in
    /// `[1e-3, max_variance]`, with an occasional exact zero.
    pub fn random<R: RngExt + ?Sized>(rng: &mut R, states: usize, max_variance: f64) -> Self {
        let raw: Vec<f64> = (0..states).map(|_| 0.05 + rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let weights = raw.iter().map(|w| w / total).collect();
        let (lo, hi) = (1e-3f64.ln(), max_variance.max(2e-3).ln());
        let variances = (0..states)
            .map(|_| {
                if rng.random::<f64>() < 0.1 {
                    0.0
                } else {
                    rng.random_range(lo..hi).exp()
                }
            })
            .collect();
        Self { weights, variances }
    }
}

/// `N(X + sqrt(t) Z | U) = 2 pi e prod_u (sigma_u^2 + t)^{w_u}`.
pub fn conditional_entropy_power(input: &ConditionalGaussianInput, t: f64) -> f64 {
    let mut log_mean = 0.0;
    for (w, s2) in input.weights.iter().zip(&input.variances) {
        if *w == 0.0 {
            continue;
        }
        let v = s2 + t;
        if v <= 0.0 {
            return 0.0;
        }
        log_mean += w * v.ln();
    }
    2.0 * PI * E * log_mean.exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcavityReport {
    /// Largest positive second difference divided by the grid scale
    /// (zero or negative means concave everywhere on the grid).
    pub max_violation: f64,
    pub scale: f64,
    pub interior_points: usize,
}

/// Second difference of `f` at the middle of three points, generalized to
/// non-uniform spacing: twice the gap between the chord and the middle value.
/// Equals `f0 - 2 f1 + f2` on a uniform grid; non-positive for concave `f`.
pub fn second_difference(t: [f64; 3], f: [f64; 3]) -> f64 {
    let chord = (f[0] * (t[2] - t[1]) + f[2] * (t[1] - t[0])) / (t[2] - t[0]);
    2.0 * (chord - f[1])
}

pub fn check_costa_concavity(
    input: &ConditionalGaussianInput,
    t_grid: &[f64],
) -> Result<ConcavityReport, VerifyError> {
    if t_grid.len() < 3
        || t_grid[0] < 0.0
        || t_grid.windows(2).any(|w| !(w[0] < w[1]))
    {
        return Err(VerifyError::InvalidGrid);
    }
    let values: Vec<f64> = t_grid
        .iter()
        .map(|&t| conditional_entropy_power(input, t))
        .collect();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let max_violation = (1..t_grid.len() - 1)
        .map(|k| {
            second_difference(
                [t_grid[k - 1], t_grid[k], t_grid[k + 1]],
                [values[k - 1], values[k], values[k + 1]],
            )
        })
        .fold(f64::NEG_INFINITY, f64::max)
        / scale;
    if max_violation > CONCAVITY_RTOL {
        return Err(VerifyError::ConcavityViolated { max_violation });
    }
    Ok(ConcavityReport {
        max_violation,
        scale,
        interior_points: t_grid.len() - 2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpiReport {
    /// Entropy power of the constant user's output, `N(X + N/g | U)`.
    pub lhs: f64,
    /// `sum_i alpha_i N(X + N/h_i | U)`.
    pub rhs: f64,
    pub margin: f64,
}

/// `N(X + N/g | U) >= sum_i alpha_i N(X + N/h_i | U)` for feasible weights.
pub fn check_epi_combination(
    input: &ConditionalGaussianInput,
    spec: &ChannelSpec,
    alpha: &AlphaWeights,
) -> Result<EpiReport, VerifyError> {
    if alpha.alpha.len() != spec.n() {
        return Err(VerifyError::DimensionMismatch);
    }
    if !alpha.is_feasible(spec) {
        return Err(VerifyError::InfeasibleWeights);
    }
    let gains = spec.inverse_gains();
    let lhs = conditional_entropy_power(input, gains.b());
    let rhs: f64 = alpha
        .alpha
        .iter()
        .zip(gains.a())
        .map(|(w, a)| w * conditional_entropy_power(input, *a))
        .sum();
    let margin = lhs - rhs;
    if margin < -EPI_TOL * lhs.max(1.0) {
        return Err(VerifyError::EpiViolated { margin });
    }
    Ok(EpiReport { lhs, rhs, margin })
}
