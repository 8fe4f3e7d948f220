//! Outer bound on the sum-rate.
//!
//! The distinguished root `x*` of `T` selects one of five regimes. In each the
//! value `D` of the entropy-power program has a closed form (an upper bound
//! only, in Case 3), and the sum-rate upper bound is `D + C`.
//!
//! Entropies `f = 1/2 log2(2 pi e v)` are carried as their variances `v`; the
//! `2 pi e` factors cancel in `D` because the weights sum to one.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::ChannelSpec;
use crate::tfunction::{self, RootAnalysis, RootError};

/// Residual allowed on the two equality constraints of the weights.
pub const ALPHA_TOL: f64 = 1e-9;
/// Most negative weight tolerated before declaring infeasibility.
pub const ALPHA_NEG_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error(transparent)]
    Root(#[from] RootError),
    #[error("x* = {x_star} lies inside the pole interval [{lo}, {hi}]")]
    XStarInsidePoleInterval { x_star: f64, lo: f64, hi: f64 },
    #[error("weights infeasible: min alpha {min_alpha:e}, sum residual {sum_residual:e}, moment residual {moment_residual:e}")]
    AlphaInfeasible {
        min_alpha: f64,
        sum_residual: f64,
        moment_residual: f64,
    },
    #[error("non-positive log argument {value} in the {case} formula")]
    NonPositiveLogArgument { case: CaseLabel, value: f64 },
}

/// Regime selected by the location of `x*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    /// `x* in [0, Q]`: interior optimum.
    Case1,
    /// `x* in (-inf, -Q - 2/h_1^2]`.
    #[serde(rename = "Case2_B1")]
    Case2B1,
    /// `x* in [-1/h_n^2, 0]`.
    #[serde(rename = "Case2_B2")]
    Case2B2,
    /// `x* in [Q, inf)`.
    #[serde(rename = "Case2_B3")]
    Case2B3,
    /// `x* in [-Q - 2/h_1^2, -1/h_1^2]`.
    Case3,
}

impl CaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::Case1 => "Case1",
            CaseLabel::Case2B1 => "Case2_B1",
            CaseLabel::Case2B2 => "Case2_B2",
            CaseLabel::Case2B3 => "Case2_B3",
            CaseLabel::Case3 => "Case3",
        }
    }

    pub fn is_case2(self) -> bool {
        matches!(self, CaseLabel::Case2B1 | CaseLabel::Case2B2 | CaseLabel::Case2B3)
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Convex weights mapping the fading states' inverse gains onto the constant
/// user's: `alpha_i >= 0`, `sum alpha_i = 1`, `sum alpha_i / h_i^2 = 1/g^2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaWeights {
    pub alpha: Vec<f64>,
}

impl AlphaWeights {
    /// Residuals of the three constraints: (most negative weight, sum - 1,
    /// first moment - 1/g^2).
    pub fn residuals(&self, spec: &ChannelSpec) -> (f64, f64, f64) {
        let gains = spec.inverse_gains();
        let min_alpha = self.alpha.iter().copied().fold(f64::INFINITY, f64::min);
        let sum: f64 = self.alpha.iter().sum();
        let moment: f64 = self.alpha.iter().zip(gains.a()).map(|(w, a)| w * a).sum();
        (min_alpha, sum - 1.0, moment - gains.b())
    }

    pub fn is_feasible(&self, spec: &ChannelSpec) -> bool {
        let (min_alpha, s, m) = self.residuals(spec);
        min_alpha >= -ALPHA_NEG_TOL && s.abs() <= ALPHA_TOL && m.abs() <= ALPHA_TOL
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperBoundReport {
    pub x_star: f64,
    pub case: CaseLabel,
    pub alpha: AlphaWeights,
    /// Value of the entropy-power program, bits.
    pub d_value: f64,
    /// False in Case 3, where `d_value` only bounds the program from above.
    pub d_is_exact: bool,
    pub c_value: f64,
    pub sr_upper: f64,
    pub roots: RootAnalysis,
    /// `g` coincides with an interior fade; the state drops out of `T`.
    pub near_degenerate: bool,
}

/// Assign the regime of `x*`. Shared endpoints resolve as
/// Case 1, then Case 2, then Case 3.
pub fn classify_case(x_star: f64, spec: &ChannelSpec) -> Result<CaseLabel, BoundsError> {
    let gains = spec.inverse_gains();
    let q = spec.q();
    let b1_edge = -q - 2.0 * gains.a_max();
    let label = if (0.0..=q).contains(&x_star) {
        CaseLabel::Case1
    } else if x_star <= b1_edge {
        CaseLabel::Case2B1
    } else if (-gains.a_min()..=0.0).contains(&x_star) {
        CaseLabel::Case2B2
    } else if x_star >= q {
        CaseLabel::Case2B3
    } else if (b1_edge..=-gains.a_max()).contains(&x_star) {
        CaseLabel::Case3
    } else {
        return Err(BoundsError::XStarInsidePoleInterval {
            x_star,
            lo: -gains.a_max(),
            hi: -gains.a_min(),
        });
    };
    Ok(label)
}

/// `alpha_i = p_i (x* + 1/g^2) / (x* + 1/h_i^2)`, checked against its
/// constraints.
pub fn compute_alpha(x_star: f64, spec: &ChannelSpec) -> Result<AlphaWeights, BoundsError> {
    let gains = spec.inverse_gains();
    let shift = x_star + gains.b();
    let weights = AlphaWeights {
        alpha: spec
            .p()
            .iter()
            .zip(gains.a())
            .map(|(p, a)| p * shift / (x_star + a))
            .collect(),
    };
    let (min_alpha, sum_residual, moment_residual) = weights.residuals(spec);
    if !weights.is_feasible(spec) {
        return Err(BoundsError::AlphaInfeasible {
            min_alpha,
            sum_residual,
            moment_residual,
        });
    }
    Ok(weights)
}

fn weighted_log2(p: &[f64], args: impl Iterator<Item = f64>, case: CaseLabel) -> Result<f64, BoundsError> {
    let mut acc = 0.0;
    for (pi, v) in p.iter().zip(args) {
        acc += pi * 0.5 * log2_checked(v, case)?;
    }
    Ok(acc)
}

fn log2_checked(v: f64, case: CaseLabel) -> Result<f64, BoundsError> {
    if v > 0.0 {
        Ok(v.log2())
    } else {
        Err(BoundsError::NonPositiveLogArgument { case, value: v })
    }
}

/// The program value `D` in bits, and whether it is exact.
pub fn compute_d(case: CaseLabel, x_star: f64, spec: &ChannelSpec) -> Result<(f64, bool), BoundsError> {
    let gains = spec.inverse_gains();
    let (a, b, q, p) = (gains.a(), gains.b(), spec.q(), spec.p());
    let d = match case {
        CaseLabel::Case1 => {
            weighted_log2(p, a.iter().map(|a| x_star + a), case)?
                - 0.5 * log2_checked(x_star + b, case)?
        }
        CaseLabel::Case2B1 | CaseLabel::Case2B3 => {
            weighted_log2(p, a.iter().map(|a| q + a), case)? - 0.5 * log2_checked(q + b, case)?
        }
        CaseLabel::Case2B2 => {
            weighted_log2(p, a.iter().copied(), case)? - 0.5 * log2_checked(b, case)?
        }
        CaseLabel::Case3 => {
            weighted_log2(p, a.iter().map(|a| -x_star - a), case)?
                - 0.5 * log2_checked(-x_star - b, case)?
        }
    };
    Ok((d, case != CaseLabel::Case3))
}

/// `C = 1/2 log2(Q + 1/g^2) - sum_i p_i/2 log2(1/h_i^2)`, bits.
pub fn compute_c(spec: &ChannelSpec) -> f64 {
    let gains = spec.inverse_gains();
    0.5 * (spec.q() + gains.b()).log2()
        - spec
            .p()
            .iter()
            .zip(gains.a())
            .map(|(p, a)| 0.5 * p * a.log2())
            .sum::<f64>()
}

pub fn upper_bound(spec: &ChannelSpec) -> Result<UpperBoundReport, BoundsError> {
    let gains = spec.inverse_gains();
    let roots = tfunction::find_x_star(&gains, spec.p())?;
    let x_star = roots.x_star;
    let case = classify_case(x_star, spec)?;
    let alpha = compute_alpha(x_star, spec)?;
    let (d_value, d_is_exact) = compute_d(case, x_star, spec)?;
    let c_value = compute_c(spec);
    Ok(UpperBoundReport {
        x_star,
        case,
        alpha,
        d_value,
        d_is_exact,
        c_value,
        sr_upper: d_value + c_value,
        roots,
        near_degenerate: spec.interior_coincidence().is_some(),
    })
}
