//! Channel description and canonicalization.
//!
//! The fading user sees `Y1 = H X + N1` with `H` drawn from a finite set of
//! magnitudes `h_i` with probabilities `p_i`; the constant user sees
//! `Y2 = g X + N2`. Noise is unit variance and the input power is at most `Q`.
//! Every other module works on the canonical form produced here: strictly
//! increasing fades, a positive p.m.f. summing to one, and `h_1 < g < h_n`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative distance below which two fade magnitudes are treated as one state.
pub const MERGE_RTOL: f64 = 1e-12;
/// Allowed deviation of the p.m.f. total from one.
pub const PMF_TOL: f64 = 1e-9;
// Totals closer to one than this are left untouched, which keeps
// normalization idempotent.
const RENORMALIZE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("fade list has {h} entries but the pmf has {p}")]
    LengthMismatch { h: usize, p: usize },
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),
    #[error("parameter {name} must be positive and finite, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("strongly degraded channel: g = {g} is not strictly between h_1 = {h_min} and h_n = {h_max}")]
    StronglyDegraded { g: f64, h_min: f64, h_max: f64 },
    #[error("only {states} distinct fade state(s) after merging duplicates")]
    DegenerateFading { states: usize },
}

/// Overridable validation tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub merge_rtol: f64,
    pub pmf_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            merge_rtol: MERGE_RTOL,
            pmf_tol: PMF_TOL,
        }
    }
}

/// Unvalidated channel parameters, as read from a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawChannel {
    pub h: Vec<f64>,
    pub p: Vec<f64>,
    pub g: f64,
    pub q: f64,
}

/// A validated channel in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelSpec {
    h: Vec<f64>,
    p: Vec<f64>,
    g: f64,
    q: f64,
}

impl ChannelSpec {
    pub fn new(h: Vec<f64>, p: Vec<f64>, g: f64, q: f64) -> Result<Self, ChannelError> {
        validate_and_normalize(&RawChannel { h, p, g, q })
    }

    /// Fade magnitudes, strictly increasing.
    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// Transmit power budget in units of the noise variance.
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Number of fade states.
    pub fn n(&self) -> usize {
        self.h.len()
    }

    /// The same channel at a different power budget.
    pub fn with_power(&self, q: f64) -> Result<Self, ChannelError> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(ChannelError::NonPositiveParameter { name: "q", value: q });
        }
        Ok(Self { q, ..self.clone() })
    }

    pub fn to_raw(&self) -> RawChannel {
        RawChannel {
            h: self.h.clone(),
            p: self.p.clone(),
            g: self.g,
            q: self.q,
        }
    }

    /// Index of an interior fade state whose magnitude coincides with `g`.
    ///
    /// Such channels are accepted, but the pole of the constant user lands on
    /// a pole of the fading user and the root structure of `T` degenerates.
    pub fn interior_coincidence(&self) -> Option<usize> {
        self.h
            .iter()
            .position(|&h| (h - self.g).abs() <= MERGE_RTOL * h.max(self.g))
    }

    pub fn inverse_gains(&self) -> InverseGains {
        inverse_gains(self)
    }
}

/// Reciprocal squared gains: `a_i = 1/h_i^2` (strictly decreasing) and
/// `b = 1/g^2`, with `a_n < b < a_1` for every accepted channel.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseGains {
    a: Vec<f64>,
    b: f64,
}

impl InverseGains {
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Largest inverse gain, `1/h_1^2`.
    pub fn a_max(&self) -> f64 {
        self.a[0]
    }

    /// Smallest inverse gain, `1/h_n^2`.
    pub fn a_min(&self) -> f64 {
        self.a[self.a.len() - 1]
    }

    /// Poles of `T(x)`: `-a_1, ..., -a_n, -b`.
    pub fn poles(&self) -> Vec<f64> {
        self.a.iter().map(|a| -a).chain(std::iter::once(-self.b)).collect()
    }

    /// Build directly from inverse gains. Used by tests and oracles that work
    /// in the reciprocal domain.
    pub fn from_parts(a: Vec<f64>, b: f64) -> Self {
        Self { a, b }
    }
}

pub fn inverse_gains(spec: &ChannelSpec) -> InverseGains {
    InverseGains {
        a: spec.h.iter().map(|h| 1.0 / (h * h)).collect(),
        b: 1.0 / (spec.g * spec.g),
    }
}

pub fn validate_and_normalize(raw: &RawChannel) -> Result<ChannelSpec, ChannelError> {
    validate_and_normalize_with(raw, &Tolerances::default())
}

pub fn validate_and_normalize_with(
    raw: &RawChannel,
    tol: &Tolerances,
) -> Result<ChannelSpec, ChannelError> {
    if raw.h.len() != raw.p.len() {
        return Err(ChannelError::LengthMismatch {
            h: raw.h.len(),
            p: raw.p.len(),
        });
    }
    if raw.h.is_empty() {
        return Err(ChannelError::DegenerateFading { states: 0 });
    }
    let positive = |name: &'static str, value: f64| {
        if value > 0.0 && value.is_finite() {
            Ok(())
        } else {
            Err(ChannelError::NonPositiveParameter { name, value })
        }
    };
    for &h in &raw.h {
        positive("h", h)?;
    }
    positive("g", raw.g)?;
    positive("q", raw.q)?;

    if let Some(bad) = raw.p.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
        return Err(ChannelError::InvalidPmf(format!(
            "probability {bad} is not strictly positive"
        )));
    }
    let total: f64 = raw.p.iter().sum();
    if (total - 1.0).abs() > tol.pmf_tol {
        return Err(ChannelError::InvalidPmf(format!(
            "probabilities sum to {total}"
        )));
    }

    let mut states: Vec<(f64, f64)> = raw.h.iter().copied().zip(raw.p.iter().copied()).collect();
    states.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut h: Vec<f64> = Vec::with_capacity(states.len());
    let mut p: Vec<f64> = Vec::with_capacity(states.len());
    for (hi, pi) in states {
        match h.last() {
            // compare against the representative so chains of near-equal
            // values cannot drift
            Some(&rep) if hi - rep <= tol.merge_rtol * hi => {
                *p.last_mut().unwrap() += pi;
            }
            _ => {
                h.push(hi);
                p.push(pi);
            }
        }
    }

    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > RENORMALIZE_TOL {
        p.iter_mut().for_each(|x| *x /= total);
    }

    if h.len() < 2 {
        return Err(ChannelError::DegenerateFading { states: h.len() });
    }
    let (h_min, h_max) = (h[0], h[h.len() - 1]);
    if raw.g <= h_min || raw.g >= h_max {
        return Err(ChannelError::StronglyDegraded {
            g: raw.g,
            h_min,
            h_max,
        });
    }

    Ok(ChannelSpec {
        h,
        p,
        g: raw.g,
        q: raw.q,
    })
}
