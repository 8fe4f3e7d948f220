//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the library's numerical routines.

#![allow(dead_code)]

use fading_bc::channel::ChannelSpec;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;

/// The two-state family used by the worked examples: h = [1, 2], p = [1/2, 1/2].
pub fn family(g2: f64, q: f64) -> ChannelSpec {
    ChannelSpec::new(vec![1.0, 2.0], vec![0.5, 0.5], g2.sqrt(), q).unwrap()
}

/// `(1/h^2, 1/g^2)` computed directly from the spec.
pub fn inverse_gains(spec: &ChannelSpec) -> (Vec<f64>, f64) {
    (
        spec.h().iter().map(|h| 1.0 / (h * h)).collect(),
        1.0 / (spec.g() * spec.g()),
    )
}

/// The unique root outside the pole interval for two fade states, from the
/// linear equation left after clearing denominators.
pub fn two_state_root(spec: &ChannelSpec) -> f64 {
    let (a, b) = inverse_gains(spec);
    let p = spec.p();
    let mixed = p[0] * a[1] + p[1] * a[0];
    (a[0] * a[1] - b * mixed) / (b + mixed - a[0] - a[1])
}

/// Maximum of the entropy-power program for two fade states. The objective
/// depends on `v` only through `r = v_1 / v_2`:
/// `1/2 (p_1 log r - log(alpha_1 r + alpha_2))`, concave in `log r`, with
/// stationary point `r = p_1 alpha_2 / (p_2 alpha_1)` clamped to the box.
pub fn two_state_program_max(spec: &ChannelSpec, alpha: &[f64]) -> (f64, f64) {
    let (a, _) = inverse_gains(spec);
    let (p, q) = (spec.p(), spec.q());
    let r_lo = a[0] / (q + a[1]);
    let r_hi = (q + a[0]) / a[1];
    let r = (p[0] * alpha[1] / (p[1] * alpha[0])).clamp(r_lo, r_hi);
    (0.5 * (p[0] * r.log2() - (alpha[0] * r + alpha[1]).log2()), r)
}

/// `sum_i p_i/2 log2(1 + h_i^2 beta Q)` style expressions, evaluated term by term.
pub fn expected_half_log2(spec: &ChannelSpec, f: impl Fn(f64) -> f64) -> f64 {
    spec.h()
        .iter()
        .zip(spec.p())
        .map(|(h, p)| 0.5 * p * f(*h).log2())
        .sum()
}

/// Superposition rate from its definition.
pub fn rate(spec: &ChannelSpec, beta: f64) -> f64 {
    let (g2, q) = (spec.g() * spec.g(), spec.q());
    0.5 * (1.0 + beta * g2 * q).log2()
        + expected_half_log2(spec, |h| (1.0 + h * h * q) / (1.0 + beta * h * h * q))
}

pub fn rat(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite")
}

/// Exact coefficients (constant first) of
/// `[sum_i p_i prod_{j != i}(x + a_j)](x + b) - prod_i (x + a_i)`
/// for exactly representable inputs.
pub fn exact_numerator(a: &[f64], b: f64, p: &[f64]) -> Vec<BigRational> {
    let a: Vec<BigRational> = a.iter().map(|v| rat(*v)).collect();
    let b = rat(b);
    let mul = |poly: &[BigRational], c: &BigRational| {
        let mut out = vec![BigRational::zero(); poly.len() + 1];
        for (k, coef) in poly.iter().enumerate() {
            out[k] += c * coef;
            out[k + 1] += coef.clone();
        }
        out
    };
    let mut sum = vec![BigRational::zero(); a.len()];
    for (i, pi) in p.iter().enumerate() {
        let mut prod = vec![BigRational::one()];
        for (j, aj) in a.iter().enumerate() {
            if j != i {
                prod = mul(&prod, aj);
            }
        }
        let pi = rat(*pi);
        for (k, c) in prod.iter().enumerate() {
            sum[k] += &pi * c;
        }
    }
    let mut lhs = mul(&sum, &b);
    let mut all = vec![BigRational::one()];
    for aj in &a {
        all = mul(&all, aj);
    }
    for (k, c) in all.iter().enumerate() {
        lhs[k] -= c;
    }
    lhs
}

/// `T(x)` in exact arithmetic.
pub fn exact_t(x: f64, a: &[f64], b: f64, p: &[f64]) -> BigRational {
    let x = rat(x);
    let mut t = BigRational::zero();
    for (ai, pi) in a.iter().zip(p) {
        t += rat(*pi) / (&x + rat(*ai));
    }
    t - BigRational::one() / (&x + rat(b))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("representable")
}

pub fn abs_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        0.0
    } else {
        to_f64(&r.abs())
    }
}

/// Strategy for accepted channels with `n` in `states`: fades separated by
/// at least 2%, `g` at least 0.5% from every fade.
pub fn channel_strategy(states: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = ChannelSpec> {
    states
        .prop_flat_map(|n| {
            (
                proptest::collection::vec(0.25f64..4.0, n),
                proptest::collection::vec(0.05f64..1.0, n),
                0.0f64..1.0,
                -2.0f64..2.0,
            )
        })
        .prop_filter_map("fades too close", |(mut h, w, u, log_q)| {
            h.sort_by(f64::total_cmp);
            if h.windows(2).any(|x| x[1] < 1.02 * x[0]) {
                return None;
            }
            let n = h.len();
            let g = h[0] * (h[n - 1] / h[0]).powf(u);
            if h.iter().any(|x| (x - g).abs() < 5e-3 * x) {
                return None;
            }
            let total: f64 = w.iter().sum();
            let p = w.iter().map(|x| x / total).collect();
            ChannelSpec::new(h, p, g, 10f64.powf(log_q)).ok()
        })
}
