//! Differential entropy of a zero-mean Gaussian mixture by numerical
//! integration of `-f log2 f`.

use std::f64::consts::{LN_2, PI};

use super::epi::ConditionalGaussianInput;
use super::VerifyError;

/// Half-width of the integration window in units of the widest component's
/// standard deviation.
pub const WINDOW_SIGMAS: f64 = 12.0;
/// Target absolute error of the entropy, bits.
pub const TARGET_ERROR: f64 = 1e-8;

fn density(weights: &[f64], variances: &[f64], x: f64) -> f64 {
    weights
        .iter()
        .zip(variances)
        .map(|(w, v)| w * (-0.5 * x * x / v).exp() / (2.0 * PI * v).sqrt())
        .sum()
}

/// `h(X + sqrt(t) Z)` in bits for the unconditional mixture `X`.
pub fn mixture_entropy_quadrature(
    input: &ConditionalGaussianInput,
    t: f64,
) -> Result<f64, VerifyError> {
    if !(t >= 0.0) {
        return Err(VerifyError::InvalidInput("t must be non-negative".into()));
    }
    let (weights, variances): (Vec<f64>, Vec<f64>) = input
        .weights()
        .iter()
        .zip(input.variances())
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, v)| (*w, v + t))
        .unzip();
    if variances.iter().any(|v| !(*v > 0.0)) {
        return Err(VerifyError::InvalidInput(
            "mixture has a point mass; density is not positive".into(),
        ));
    }
    let sigma_max = variances.iter().fold(0.0f64, |m, v| m.max(v.sqrt()));
    let edge = WINDOW_SIGMAS * sigma_max;

    // Breakpoints at a few standard deviations of every component so that
    // narrow components are resolved. The integrand is even: integrate [0, edge].
    let mut cuts = vec![0.0, edge];
    for v in &variances {
        for k in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let c = k * v.sqrt();
            if c < edge {
                cuts.push(c);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let integrand = |x: f64| {
        let f = density(&weights, &variances, x);
        if f > 0.0 {
            -f * f.ln()
        } else {
            0.0
        }
    };
    let per_piece = 0.25 * TARGET_ERROR * LN_2 / cuts.len() as f64;
    let mut total = 0.0;
    let mut error = 0.0;
    for w in cuts.windows(2) {
        let out = quadrature::integrate(integrand, w[0], w[1], per_piece);
        total += out.integral;
        error += out.error_estimate;
    }
    let bits = 2.0 * total / LN_2;
    let error_bits = 2.0 * error / LN_2;
    if !(error_bits <= TARGET_ERROR) || !bits.is_finite() {
        return Err(VerifyError::QuadratureNonConvergence { error: error_bits });
    }
    Ok(bits)
}
