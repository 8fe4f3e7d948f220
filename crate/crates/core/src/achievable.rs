//! Superposition-coding inner bound and its gap to the outer bound.

use serde::Serialize;
use thiserror::Error;

use crate::bounds::{CaseLabel, UpperBoundReport};
use crate::channel::ChannelSpec;

/// Endpoint values closer than this are a tie, resolved to `beta = 1`.
pub const TIE_TOL: f64 = 1e-12;
/// Tolerance on the gap sign and on `gap <= gap_bound`.
pub const GAP_TOL: f64 = 1e-9;
/// Tolerance on the sign of the endpoint preference.
pub const WITNESS_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AchievableError {
    #[error("power split beta = {0} outside [0, 1]")]
    BetaOutOfRange(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GapError {
    #[error("upper bound falls below the achievable rate by {0:e} bits")]
    GapNegative(f64),
    #[error("gap {gap} exceeds its closed-form bound {gap_bound}")]
    GapExceedsBound { gap: f64, gap_bound: f64 },
    #[error("endpoint preference {preference:e} has the wrong sign for {setting:?}")]
    PreferenceSignMismatch { setting: GapSetting, preference: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AchievableReport {
    pub beta_star: f64,
    pub sr_ach: f64,
    /// Rates at `beta = 0` and `beta = 1`.
    pub endpoint_values: (f64, f64),
}

/// Branch of the gap argument that applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GapSetting {
    Case1Bound,
    Case3Bound,
    #[serde(rename = "Setting1_B1")]
    Setting1B1,
    #[serde(rename = "Setting2_B2")]
    Setting2B2,
    #[serde(rename = "Setting3_B3")]
    Setting3B3,
}

impl GapSetting {
    pub fn as_str(self) -> &'static str {
        match self {
            GapSetting::Case1Bound => "Case1Bound",
            GapSetting::Case3Bound => "Case3Bound",
            GapSetting::Setting1B1 => "Setting1_B1",
            GapSetting::Setting2B2 => "Setting2_B2",
            GapSetting::Setting3B3 => "Setting3_B3",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub gap: f64,
    pub gap_bound: f64,
    pub setting: GapSetting,
    /// Rate at `beta = 0` minus rate at `beta = 1`.
    pub beta_preference: f64,
}

/// Sum-rate of two-layer superposition with a fraction `beta` of the power
/// on the layer decoded by both users, bits.
pub fn r_ach(beta: f64, spec: &ChannelSpec) -> Result<f64, AchievableError> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(AchievableError::BetaOutOfRange(beta));
    }
    let q = spec.q();
    let g2 = spec.g() * spec.g();
    let fading: f64 = spec
        .h()
        .iter()
        .zip(spec.p())
        .map(|(h, p)| {
            let snr = h * h * q;
            0.5 * p * ((1.0 + snr) / (1.0 + beta * snr)).log2()
        })
        .sum();
    Ok(0.5 * (1.0 + beta * g2 * q).log2() + fading)
}

/// The rate is maximized at an endpoint of `[0, 1]`; compare the two.
pub fn maximize_r_ach(spec: &ChannelSpec) -> AchievableReport {
    let at0 = r_ach(0.0, spec).expect("0 is in range");
    let at1 = r_ach(1.0, spec).expect("1 is in range");
    let (beta_star, sr_ach) = if at0 > at1 + TIE_TOL { (0.0, at0) } else { (1.0, at1) };
    AchievableReport {
        beta_star,
        sr_ach,
        endpoint_values: (at0, at1),
    }
}

/// `sum_i p_i/2 log2(1 + h_i^2 Q) - 1/2 log2(1 + g^2 Q)`; its sign decides
/// which endpoint wins.
pub fn beta_preference(spec: &ChannelSpec) -> f64 {
    let q = spec.q();
    spec.h()
        .iter()
        .zip(spec.p())
        .map(|(h, p)| 0.5 * p * (h * h * q).ln_1p())
        .sum::<f64>()
        / std::f64::consts::LN_2
        - 0.5 * (spec.g() * spec.g() * q).ln_1p() / std::f64::consts::LN_2
}

/// `sum_i p_i/2 log2(s (h_i^2 x + 1)) - 1/2 log2(s (g^2 x + 1))` with
/// `s = sign`; Case 1 uses `s = 1`, Case 3 `s = -1`.
fn constant_gap(spec: &ChannelSpec, x_star: f64, sign: f64) -> f64 {
    spec.h()
        .iter()
        .zip(spec.p())
        .map(|(h, p)| 0.5 * p * (sign * (h * h * x_star + 1.0)).log2())
        .sum::<f64>()
        - 0.5 * (sign * (spec.g() * spec.g() * x_star + 1.0)).log2()
}

pub fn gap_analysis(
    ub: &UpperBoundReport,
    ach: &AchievableReport,
    spec: &ChannelSpec,
) -> Result<GapReport, GapError> {
    let gap = ub.sr_upper - ach.sr_ach;
    let preference = beta_preference(spec);
    let (setting, gap_bound) = match ub.case {
        CaseLabel::Case1 => (GapSetting::Case1Bound, constant_gap(spec, ub.x_star, 1.0)),
        CaseLabel::Case3 => (GapSetting::Case3Bound, constant_gap(spec, ub.x_star, -1.0)),
        CaseLabel::Case2B1 => (GapSetting::Setting1B1, 0.0),
        CaseLabel::Case2B2 => (GapSetting::Setting2B2, 0.0),
        CaseLabel::Case2B3 => (GapSetting::Setting3B3, 0.0),
    };
    let sign_ok = match setting {
        GapSetting::Setting1B1 | GapSetting::Setting3B3 => preference >= -WITNESS_TOL,
        GapSetting::Setting2B2 => preference <= WITNESS_TOL,
        _ => true,
    };
    if !sign_ok {
        return Err(GapError::PreferenceSignMismatch { setting, preference });
    }
    if gap < -GAP_TOL {
        return Err(GapError::GapNegative(gap));
    }
    if gap > gap_bound + GAP_TOL {
        return Err(GapError::GapExceedsBound { gap, gap_bound });
    }
    Ok(GapReport {
        gap,
        gap_bound,
        setting,
        beta_preference: preference,
    })
}
