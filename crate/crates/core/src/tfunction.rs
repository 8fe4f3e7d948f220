//! The rational function
//!
//! ```text
//! T(x) = sum_i p_i / (x + a_i) - 1 / (x + b),   a_i = 1/h_i^2, b = 1/g^2
//! ```
//!
//! and its real roots. With poles ordered `-a_1 < ... < -a_n`, `T` has `n - 2`
//! roots inside `[-a_1, -a_n]` and exactly one root `x*` outside it. The
//! outside root drives the whole outer bound.
//!
//! Two independent routes locate `x*`: the real eigenvalues of the companion
//! matrix of the numerator polynomial, and a sign-change scan between poles.
//! The polynomial route is the default; the scan takes over when the leading
//! coefficient cancels.

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::channel::InverseGains;

/// Relative distance to a pole below which `T` is not evaluated.
pub const POLE_RTOL: f64 = 1e-14;
/// Leading-coefficient magnitude (relative to the largest) that counts as a
/// dropped degree.
pub const DEGREE_RTOL: f64 = 1e-12;
/// Residual bound on `|T(x*)|` relative to the local scale.
pub const RESIDUAL_RTOL: f64 = 1e-9;
/// Roots closer than this fraction of `a_1 - a_n` are one root with
/// multiplicity.
pub const CLUSTER_RTOL: f64 = 1e-7;
/// Largest `|x|` searched for a sign change.
pub const SCAN_LIMIT: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("T evaluated at pole x = {x}")]
    PoleEvaluation { x: f64 },
    #[error("numerator degree collapsed: leading coefficient {leading:e} vs largest {largest:e}")]
    DegreeCollapse { leading: f64, largest: f64 },
    #[error("expected {expected_inside} root(s) inside the pole interval and 1 outside, found {inside} and {outside}")]
    RootCountMismatch {
        inside: usize,
        outside: usize,
        expected_inside: usize,
    },
    #[error("root refinement stalled at x = {x} with |T| = {residual:e}")]
    RefinementFailed { x: f64, residual: f64 },
}

/// Which route produced the reported roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RootRoute {
    Polynomial,
    Bracketing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootAnalysis {
    /// Coefficients of the numerator `l(x)`, constant term first.
    pub numerator_coeffs: Vec<f64>,
    /// `-a_1, ..., -a_n, -b`.
    pub poles: Vec<f64>,
    /// Roots in `[-a_1, -a_n]`, ascending, repeated by multiplicity.
    pub inside_roots: Vec<f64>,
    pub x_star: f64,
    pub route: RootRoute,
}

fn near_pole(x: f64, pole: f64) -> bool {
    (x - pole).abs() <= POLE_RTOL * x.abs().max(pole.abs())
}

/// `T(x)`, refusing to evaluate at a pole.
pub fn t_eval(x: f64, gains: &InverseGains, p: &[f64]) -> Result<f64, RootError> {
    if gains.poles().iter().any(|&pole| near_pole(x, pole)) {
        return Err(RootError::PoleEvaluation { x });
    }
    Ok(t_unchecked(x, gains, p))
}

// With sum(p) = 1 the two sums combine into sum_i p_i (b - a_i) / (x + a_i),
// which avoids subtracting two O(1/x) quantities far from the poles.
fn t_unchecked(x: f64, gains: &InverseGains, p: &[f64]) -> f64 {
    let b = gains.b();
    let s: f64 = gains
        .a()
        .iter()
        .zip(p)
        .map(|(a, pi)| pi * (b - a) / (x + a))
        .sum();
    s / (x + b)
}

/// Scale against which `|T(x)|` is judged near `x`.
pub fn local_scale(x: f64, gains: &InverseGains, p: &[f64]) -> f64 {
    gains
        .a()
        .iter()
        .zip(p)
        .map(|(a, pi)| pi / (x + a).abs())
        .sum::<f64>()
        + 1.0 / (x + gains.b()).abs()
}

/// Multiply a polynomial (constant term first) by `(x + c)`.
fn mul_linear(poly: &[f64], c: f64) -> Vec<f64> {
    let mut out = vec![0.0; poly.len() + 1];
    for (k, &coef) in poly.iter().enumerate() {
        out[k] += c * coef;
        out[k + 1] += coef;
    }
    out
}

/// Evaluate a polynomial (constant term first).
pub fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| k as f64 * c)
        .collect()
}

/// Numerator `l(x)` of `T(x) = l(x) / m(x)` with
/// `m(x) = (x + b) prod_i (x + a_i)`.
///
/// Because the probabilities sum to one, the `x^n` terms cancel exactly and
/// `l(x) = sum_i p_i (b - a_i) prod_{j != i} (x + a_j)`, which is how it is
/// expanded here. The result has degree `n - 1` with leading coefficient
/// `b - sum_i p_i a_i`.
pub fn numerator_polynomial(gains: &InverseGains, p: &[f64]) -> Result<Vec<f64>, RootError> {
    let coeffs = numerator_unchecked(gains, p);
    let leading = coeffs[coeffs.len() - 1];
    let largest = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if leading.abs() < DEGREE_RTOL * largest {
        return Err(RootError::DegreeCollapse { leading, largest });
    }
    Ok(coeffs)
}

fn numerator_unchecked(gains: &InverseGains, p: &[f64]) -> Vec<f64> {
    let a = gains.a();
    let b = gains.b();
    let mut coeffs = vec![0.0; a.len()];
    for (i, pi) in p.iter().enumerate() {
        let term = a
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .fold(vec![pi * (b - a[i])], |acc, (_, &aj)| mul_linear(&acc, aj));
        for (c, t) in coeffs.iter_mut().zip(&term) {
            *c += t;
        }
    }
    coeffs
}

/// Denominator `m(x) = (x + b) prod_i (x + a_i)`.
pub fn denominator_eval(gains: &InverseGains, x: f64) -> f64 {
    gains.a().iter().map(|a| x + a).product::<f64>() * (x + gains.b())
}

/// All roots of a polynomial with nonzero leading coefficient, as
/// `(re, im)` pairs, via the eigenvalues of its companion matrix.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<(f64, f64)> {
    let degree = coeffs.len() - 1;
    if degree == 0 {
        return Vec::new();
    }
    let lead = coeffs[degree];
    let mut companion = DMatrix::<f64>::zeros(degree, degree);
    for k in 0..degree {
        companion[(0, k)] = -coeffs[degree - 1 - k] / lead;
    }
    for k in 1..degree {
        companion[(k, k - 1)] = 1.0;
    }
    companion
        .complex_eigenvalues()
        .iter()
        .map(|z| (z.re, z.im))
        .collect()
}

// A few Newton steps on the polynomial, keeping only improvements.
fn polish(coeffs: &[f64], mut x: f64) -> f64 {
    let deriv = poly_derivative(coeffs);
    let mut fx = poly_eval(coeffs, x).abs();
    for _ in 0..8 {
        let d = poly_eval(&deriv, x);
        if d == 0.0 {
            break;
        }
        let next = x - poly_eval(coeffs, x) / d;
        let fnext = poly_eval(coeffs, next).abs();
        if !(fnext < fx) {
            break;
        }
        x = next;
        fx = fnext;
    }
    x
}

/// Bisect a sign change of `T` on `[lo, hi]` down to adjacent floats.
/// `T(lo)` and `T(hi)` must have opposite signs.
fn bisect(gains: &InverseGains, p: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let lo_sign = t_unchecked(lo, gains, p) > 0.0;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = t_unchecked(mid, gains, p);
        if v == 0.0 {
            return mid;
        }
        if (v > 0.0) == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (flo, fhi) = (
        t_unchecked(lo, gains, p).abs(),
        t_unchecked(hi, gains, p).abs(),
    );
    if flo <= fhi {
        lo
    } else {
        hi
    }
}

/// Offset from a pole at which its one-sided limit is probed.
fn pole_offset(pole: f64) -> f64 {
    1e-9 * pole.abs().max(1.0)
}

/// Refine the outside root from a seed by growing a bracket around it.
fn refine_outside(gains: &InverseGains, p: &[f64], seed: f64) -> Option<f64> {
    let right_side = seed > -gains.a_min();
    let (edge, inward) = if right_side {
        (-gains.a_min(), 1.0)
    } else {
        (-gains.a_max(), -1.0)
    };
    // the side of the bracket adjacent to the pole interval
    let near_limit = edge + inward * pole_offset(edge);
    let clamp = |x: f64| {
        if right_side {
            x.max(near_limit)
        } else {
            x.min(near_limit)
        }
    };
    let mut delta = (1e-8 * seed.abs()).max(1e-12);
    let mut lo = clamp(seed - delta);
    let mut hi = clamp(seed + delta);
    for _ in 0..200 {
        let (flo, fhi) = (t_unchecked(lo, gains, p), t_unchecked(hi, gains, p));
        if flo == 0.0 {
            return Some(lo);
        }
        if fhi == 0.0 {
            return Some(hi);
        }
        if (flo > 0.0) != (fhi > 0.0) {
            return Some(bisect(gains, p, lo, hi));
        }
        if lo.abs() > SCAN_LIMIT && hi.abs() > SCAN_LIMIT {
            break;
        }
        delta *= 2.0;
        lo = clamp(seed - delta);
        hi = clamp(seed + delta);
    }
    None
}

fn cluster_tolerance(gains: &InverseGains) -> f64 {
    CLUSTER_RTOL * (gains.a_max() - gains.a_min())
}

fn expected_inside(p: &[f64]) -> usize {
    p.len().saturating_sub(2)
}

fn coincident_fade(gains: &InverseGains) -> Option<usize> {
    gains
        .a()
        .iter()
        .position(|&a| (a - gains.b()).abs() <= 1e-12 * a.max(gains.b()))
}

/// With `b = a_k` the term for state `k` drops out of `T` and the numerator
/// factors as `(x + a_k)` times the numerator of the channel without state
/// `k` (probabilities rescaled by `1 / (1 - p_k)`). The cancelled factor is
/// reported as an inside root so the count stays `n - 2`.
fn analyze_without_state(
    gains: &InverseGains,
    p: &[f64],
    k: usize,
    route: fn(&InverseGains, &[f64]) -> Result<RootAnalysis, RootError>,
) -> Result<RootAnalysis, RootError> {
    let n = p.len();
    if k == 0 || k + 1 == n {
        return Err(RootError::RootCountMismatch {
            inside: 0,
            outside: 0,
            expected_inside: expected_inside(p),
        });
    }
    let rest = 1.0 - p[k];
    let a: Vec<f64> = (0..n).filter(|&i| i != k).map(|i| gains.a()[i]).collect();
    let q: Vec<f64> = (0..n).filter(|&i| i != k).map(|i| p[i] / rest).collect();
    let mut analysis = route(&InverseGains::from_parts(a, gains.b()), &q)?;
    check_residual(gains, p, analysis.x_star)?;
    analysis.inside_roots.push(-gains.a()[k]);
    analysis.inside_roots.sort_by(f64::total_cmp);
    analysis.numerator_coeffs = numerator_unchecked(gains, p);
    analysis.poles = gains.poles();
    Ok(analysis)
}

fn check_residual(gains: &InverseGains, p: &[f64], x: f64) -> Result<(), RootError> {
    let residual = t_unchecked(x, gains, p).abs();
    if !(residual <= RESIDUAL_RTOL * local_scale(x, gains, p)) {
        return Err(RootError::RefinementFailed { x, residual });
    }
    Ok(())
}

/// Locate every real root of `T` and single out `x*`.
pub fn find_x_star(gains: &InverseGains, p: &[f64]) -> Result<RootAnalysis, RootError> {
    if let Some(k) = coincident_fade(gains) {
        return analyze_without_state(gains, p, k, find_x_star);
    }
    let expected = expected_inside(p);
    let coeffs = match numerator_polynomial(gains, p) {
        Ok(c) => c,
        Err(RootError::DegreeCollapse { .. }) => return analyze_by_bracketing(gains, p),
        Err(e) => return Err(e),
    };

    let tol = cluster_tolerance(gains);
    let (lo, hi) = (-gains.a_max(), -gains.a_min());
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for (re, im) in polynomial_roots(&coeffs) {
        if im.abs() > tol.max(1e-9 * re.abs()) {
            continue;
        }
        let r = polish(&coeffs, re);
        if (lo..=hi).contains(&r) {
            inside.push(r);
        } else {
            outside.push(r);
        }
    }
    if inside.len() != expected || outside.len() != 1 {
        return Err(RootError::RootCountMismatch {
            inside: inside.len(),
            outside: outside.len(),
            expected_inside: expected,
        });
    }

    let x_star = refine_outside(gains, p, outside[0]).ok_or(RootError::RootCountMismatch {
        inside: inside.len(),
        outside: 0,
        expected_inside: expected,
    })?;
    check_outside(gains, x_star, inside.len(), expected)?;
    check_residual(gains, p, x_star)?;

    inside.sort_by(f64::total_cmp);
    Ok(RootAnalysis {
        numerator_coeffs: coeffs,
        poles: gains.poles(),
        inside_roots: inside,
        x_star,
        route: RootRoute::Polynomial,
    })
}

fn check_outside(
    gains: &InverseGains,
    x: f64,
    inside: usize,
    expected: usize,
) -> Result<(), RootError> {
    if x >= -gains.a_max() && x <= -gains.a_min() {
        return Err(RootError::RootCountMismatch {
            inside: inside + 1,
            outside: 0,
            expected_inside: expected,
        });
    }
    Ok(())
}

/// Root analysis using only sign changes of `T` between consecutive poles
/// and on the two unbounded sides.
pub fn analyze_by_bracketing(gains: &InverseGains, p: &[f64]) -> Result<RootAnalysis, RootError> {
    if let Some(k) = coincident_fade(gains) {
        return analyze_without_state(gains, p, k, analyze_by_bracketing);
    }
    let expected = expected_inside(p);
    let inside = inside_roots_bracketing(gains, p);
    let x_star = match find_x_star_bracketing(gains, p) {
        Ok(x) => x,
        Err(RootError::RootCountMismatch { outside, .. }) => {
            return Err(RootError::RootCountMismatch {
                inside: inside.len(),
                outside,
                expected_inside: expected,
            })
        }
        Err(e) => return Err(e),
    };
    if inside.len() != expected {
        return Err(RootError::RootCountMismatch {
            inside: inside.len(),
            outside: 1,
            expected_inside: expected,
        });
    }
    check_residual(gains, p, x_star)?;
    Ok(RootAnalysis {
        numerator_coeffs: numerator_unchecked(gains, p),
        poles: gains.poles(),
        inside_roots: inside,
        x_star,
        route: RootRoute::Bracketing,
    })
}

/// One root per odd sign change between consecutive poles inside
/// `[-a_1, -a_n]`.
pub fn inside_roots_bracketing(gains: &InverseGains, p: &[f64]) -> Vec<f64> {
    let mut poles = gains.poles();
    poles.sort_by(f64::total_cmp);
    poles
        .windows(2)
        .filter_map(|w| {
            let lo = w[0] + pole_offset(w[0]);
            let hi = w[1] - pole_offset(w[1]);
            if !(lo < hi) {
                return None;
            }
            let (flo, fhi) = (t_unchecked(lo, gains, p), t_unchecked(hi, gains, p));
            ((flo > 0.0) != (fhi > 0.0)).then(|| bisect(gains, p, lo, hi))
        })
        .collect()
}

/// The outside root by scanning `(-a_n, inf)` and `(-inf, -a_1)` with a
/// bracket that doubles from width 1 up to [`SCAN_LIMIT`].
pub fn find_x_star_bracketing(gains: &InverseGains, p: &[f64]) -> Result<f64, RootError> {
    let scan = |edge: f64, dir: f64| -> Option<f64> {
        let start = edge + dir * pole_offset(edge);
        let f_start = t_unchecked(start, gains, p);
        let mut prev = start;
        let mut step = 1.0;
        while step <= SCAN_LIMIT {
            let x = edge + dir * step;
            let fx = t_unchecked(x, gains, p);
            if fx == 0.0 {
                return Some(x);
            }
            if (fx > 0.0) != (f_start > 0.0) {
                let (lo, hi) = if dir > 0.0 { (prev, x) } else { (x, prev) };
                return Some(bisect(gains, p, lo, hi));
            }
            prev = x;
            step *= 2.0;
        }
        None
    };
    let right = scan(-gains.a_min(), 1.0);
    let left = scan(-gains.a_max(), -1.0);
    match (left, right) {
        (Some(x), None) | (None, Some(x)) => Ok(x),
        (l, r) => Err(RootError::RootCountMismatch {
            inside: 0,
            outside: l.is_some() as usize + r.is_some() as usize,
            expected_inside: expected_inside(p),
        }),
    }
}

/// Group sorted roots that lie within the clustering tolerance of each other;
/// returns `(representative, multiplicity)` pairs.
pub fn cluster_roots(roots: &[f64], gains: &InverseGains) -> Vec<(f64, usize)> {
    let tol = cluster_tolerance(gains);
    let mut sorted = roots.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize)> = Vec::new();
    for r in sorted {
        match out.last_mut() {
            Some((rep, m)) if r - *rep <= tol => *m += 1,
            _ => out.push((r, 1)),
        }
    }
    out
}
