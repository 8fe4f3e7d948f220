//! Box-constrained maximization of the entropy-power objective
//!
//! ```text
//! phi(v) = sum_i p_i/2 log2 v_i - 1/2 log2(sum_i alpha_i v_i),
//!          1/h_i^2 <= v_i <= Q + 1/h_i^2
//! ```
//!
//! `phi` is concave in `s = ln v` (a linear term minus a log-sum-exp), so the
//! solver runs projected gradient ascent in `s`, where the box stays a box.
//! With probabilities and weights both summing to one, `phi(c v) = phi(v)`
//! for every `c > 0`: maximizers come in segments along rays, and
//! [`Maximum::flat_range`] reports the segment through the returned point.

use std::f64::consts::LN_2;

use crate::bounds::AlphaWeights;
use crate::channel::ChannelSpec;

use nalgebra::{DMatrix, DVector};

use super::VerifyError;

/// Projected-gradient norm (in `s`, nats) at which iteration stops.
pub const PG_TOL: f64 = 1e-10;
/// Projected-gradient norm above which hitting the cap is a failure.
pub const PG_FAIL: f64 = 1e-6;
pub const MAX_ITERS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ConcaveProgram {
    alpha: Vec<f64>,
    p: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    candidate: Option<Vec<f64>>,
}

impl ConcaveProgram {
    /// The program for a channel and a feasible weight vector.
    pub fn new(alpha: &AlphaWeights, spec: &ChannelSpec) -> Result<Self, VerifyError> {
        if !alpha.is_feasible(spec) {
            return Err(VerifyError::InfeasibleWeights);
        }
        let gains = spec.inverse_gains();
        Self::from_parts(
            alpha.alpha.clone(),
            spec.p().to_vec(),
            gains.a().to_vec(),
            gains.a().iter().map(|a| spec.q() + a).collect(),
        )
    }

    pub fn from_parts(
        alpha: Vec<f64>,
        p: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self, VerifyError> {
        let n = p.len();
        if alpha.len() != n || lower.len() != n || upper.len() != n || n == 0 {
            return Err(VerifyError::DimensionMismatch);
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(*l > 0.0 && l < u)) {
            return Err(VerifyError::EmptyBox);
        }
        Ok(Self {
            alpha,
            p,
            lower,
            upper,
            candidate: None,
        })
    }

    /// Add an extra starting point (clamped into the box).
    pub fn with_candidate(mut self, v: Vec<f64>) -> Self {
        self.candidate = Some(v);
        self
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn dim(&self) -> usize {
        self.p.len()
    }

    // objective in nats as a function of s = ln v
    fn value_s(&self, s: &[f64]) -> f64 {
        let linear: f64 = self.p.iter().zip(s).map(|(p, s)| 0.5 * p * s).sum();
        linear - 0.5 * self.log_mix(s)
    }

    // ln(sum alpha_i e^{s_i}), shifted for stability
    fn log_mix(&self, s: &[f64]) -> f64 {
        let m = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = self.alpha.iter().zip(s).map(|(w, s)| w * (s - m).exp()).sum();
        m + sum.ln()
    }

    fn gradient_s(&self, s: &[f64]) -> Vec<f64> {
        let lm = self.log_mix(s);
        self.p
            .iter()
            .zip(&self.alpha)
            .zip(s)
            .map(|((p, w), s)| 0.5 * (p - w * (s - lm).exp()))
            .collect()
    }

    fn project(&self, s: &mut [f64]) {
        for ((x, lo), hi) in s.iter_mut().zip(&self.lower).zip(&self.upper) {
            *x = x.clamp(lo.ln(), hi.ln());
        }
    }

    // Frank-Wolfe gap: max over the box of the linearization minus the
    // current value. Bounds the suboptimality of a concave maximization.
    fn linearization_gap(&self, s: &[f64], grad: &[f64]) -> f64 {
        grad.iter()
            .zip(s)
            .zip(self.lower.iter().zip(&self.upper))
            .map(|((g, s), (lo, hi))| (g * (lo.ln() - s)).max(g * (hi.ln() - s)))
            .sum()
    }
}

/// Objective value in bits at variance vector `v`.
pub fn eval_objective(v: &[f64], prog: &ConcaveProgram) -> Result<f64, VerifyError> {
    if v.len() != prog.dim() {
        return Err(VerifyError::DimensionMismatch);
    }
    if let Some(&bad) = v.iter().find(|x| !(**x > 0.0)) {
        return Err(VerifyError::NonPositiveVariance(bad));
    }
    let s: Vec<f64> = v.iter().map(|x| x.ln()).collect();
    Ok(prog.value_s(&s) / LN_2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Maximum {
    /// Maximizing variances.
    pub v: Vec<f64>,
    /// Objective value, bits.
    pub value: f64,
    /// Upper bound on `max - value`, bits.
    pub certificate: f64,
    pub iterations: usize,
    /// Scale factors `c` with `c v` inside the box; every such point
    /// attains the same value.
    pub flat_range: (f64, f64),
}

impl Maximum {
    /// Whether `target` lies on the segment of maximizers through `v`,
    /// coordinate-wise within `tol`.
    pub fn segment_contains(&self, target: &[f64], tol: f64) -> bool {
        if target.len() != self.v.len() {
            return false;
        }
        let c = target[0] / self.v[0];
        let (lo, hi) = self.flat_range;
        let in_range = c >= lo * (1.0 - 1e-12) - tol && c <= hi * (1.0 + 1e-12) + tol;
        in_range
            && self
                .v
                .iter()
                .zip(target)
                .all(|(v, t)| (c * v - t).abs() <= tol)
    }
}

struct Run {
    s: Vec<f64>,
    value: f64,
    pg_norm: f64,
    iterations: usize,
}

fn ascend(prog: &ConcaveProgram, mut s: Vec<f64>) -> Run {
    prog.project(&mut s);
    let mut value = prog.value_s(&s);
    let mut step = 4.0;
    let mut pg_norm = f64::INFINITY;
    let mut iterations = 0;
    while iterations < MAX_ITERS {
        iterations += 1;
        let grad = prog.gradient_s(&s);
        let mut unit = s.iter().zip(&grad).map(|(x, g)| x + g).collect::<Vec<_>>();
        prog.project(&mut unit);
        pg_norm = unit
            .iter()
            .zip(&s)
            .map(|(u, x)| (u - x).powi(2))
            .sum::<f64>()
            .sqrt();
        if pg_norm < PG_TOL {
            break;
        }
        // Armijo backtracking on the projected arc
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial: Vec<f64> = s.iter().zip(&grad).map(|(x, g)| x + step * g).collect();
            prog.project(&mut trial);
            let moved: f64 = trial
                .iter()
                .zip(&s)
                .map(|(t, x)| (t - x).powi(2))
                .sum::<f64>();
            let ascent: f64 = trial.iter().zip(&s).zip(&grad).map(|((t, x), g)| g * (t - x)).sum();
            let trial_value = prog.value_s(&trial);
            if trial_value >= value + ascent - moved / (2.0 * step) - 1e-16 * value.abs() {
                let stalled = trial == s;
                s = trial;
                value = trial_value;
                accepted = !stalled;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        step = (step * 2.0).min(64.0);
    }
    Run {
        s,
        value,
        pg_norm,
        iterations,
    }
}

fn projected_gradient_norm(prog: &ConcaveProgram, s: &[f64]) -> f64 {
    let grad = prog.gradient_s(s);
    let mut unit: Vec<f64> = s.iter().zip(&grad).map(|(x, g)| x + g).collect();
    prog.project(&mut unit);
    unit.iter().zip(s).map(|(u, x)| (u - x).powi(2)).sum::<f64>().sqrt()
}

// Newton steps on the coordinates away from the box faces. Value-based line
// searches cannot resolve the maximizer beyond the square root of machine
// precision; the gradient can. The Hessian is -1/2 (diag(w) - w w^T), which
// is singular along the all-ones direction, so at least one coordinate stays
// fixed.
fn polish(prog: &ConcaveProgram, mut run: Run) -> Run {
    let n = prog.dim();
    let (lo, hi): (Vec<f64>, Vec<f64>) = prog
        .lower
        .iter()
        .zip(&prog.upper)
        .map(|(l, u)| (l.ln(), u.ln()))
        .unzip();
    for _ in 0..8 {
        let face_tol = 1e-12 * run.s.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let mut free: Vec<usize> = (0..n)
            .filter(|&i| run.s[i] - lo[i] > face_tol && hi[i] - run.s[i] > face_tol)
            .collect();
        if free.len() == n {
            free.remove(0);
        }
        if free.is_empty() {
            break;
        }
        let lm = prog.log_mix(&run.s);
        let w: Vec<f64> = prog
            .alpha
            .iter()
            .zip(&run.s)
            .map(|(a, s)| a * (s - lm).exp())
            .collect();
        let m = free.len();
        let curvature = DMatrix::from_fn(m, m, |r, c| {
            let (i, j) = (free[r], free[c]);
            (if i == j { w[i] } else { 0.0 }) - w[i] * w[j]
        });
        let rhs = DVector::from_fn(m, |r, _| prog.p[free[r]] - w[free[r]]);
        let Some(step) = curvature.cholesky().map(|c| c.solve(&rhs)) else {
            break;
        };
        let mut trial = run.s.clone();
        for (r, &i) in free.iter().enumerate() {
            trial[i] += step[r];
        }
        prog.project(&mut trial);
        let norm = projected_gradient_norm(prog, &trial);
        let value = prog.value_s(&trial);
        if !(norm < run.pg_norm) || value < run.value - 1e-15 * run.value.abs().max(1.0) {
            break;
        }
        run.s = trial;
        run.pg_norm = norm;
        run.value = value.max(run.value);
        run.iterations += 1;
    }
    run
}

/// Multi-start projected gradient ascent: both box corners, the center,
/// the per-coordinate mixed corners with one coordinate high, and the
/// candidate if one was given.
pub fn maximize_objective(prog: &ConcaveProgram) -> Result<Maximum, VerifyError> {
    let n = prog.dim();
    let log = |v: &[f64]| v.iter().map(|x| x.ln()).collect::<Vec<_>>();
    let mut starts = vec![
        log(&prog.lower),
        log(&prog.upper),
        prog.lower
            .iter()
            .zip(&prog.upper)
            .map(|(l, u)| (0.5 * (l + u)).ln())
            .collect(),
    ];
    for k in 0..n.min(4) {
        let mut s = log(&prog.lower);
        s[k] = prog.upper[k].ln();
        starts.push(s);
    }
    if let Some(c) = &prog.candidate {
        if c.len() == n && c.iter().all(|x| *x > 0.0) {
            starts.push(log(c));
        }
    }

    let mut best: Option<Run> = None;
    let mut total_iterations = 0;
    for start in starts {
        let run = polish(prog, ascend(prog, start));
        total_iterations += run.iterations;
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start");
    let grad = prog.gradient_s(&best.s);
    let certificate = prog.linearization_gap(&best.s, &grad).max(0.0) / LN_2;
    if best.pg_norm > PG_FAIL && certificate > 1e-9 {
        return Err(VerifyError::NonConvergence {
            pg_norm: best.pg_norm,
        });
    }
    let v: Vec<f64> = best.s.iter().map(|s| s.exp()).collect();
    let lo = prog
        .lower
        .iter()
        .zip(&v)
        .map(|(l, v)| l / v)
        .fold(0.0, f64::max);
    let hi = prog
        .upper
        .iter()
        .zip(&v)
        .map(|(u, v)| u / v)
        .fold(f64::INFINITY, f64::min);
    Ok(Maximum {
        value: best.value / LN_2,
        v,
        certificate,
        iterations: total_iterations,
        flat_range: (lo, hi),
    })
}
