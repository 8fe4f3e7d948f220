//! Invariants of the pipeline over randomized channels.

mod common;

use common::*;
use fading_bc::achievable::{gap_analysis, maximize_r_ach};
use fading_bc::bounds::{upper_bound, CaseLabel};
use fading_bc::channel::{validate_and_normalize, RawChannel};
use fading_bc::tfunction::{numerator_polynomial, t_eval};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn normalization_is_idempotent(spec in channel_strategy(2..=6)) {
        let again = validate_and_normalize(&spec.to_raw()).unwrap();
        prop_assert_eq!(again, spec);
    }

    #[test]
    fn merging_preserves_probability(spec in channel_strategy(2..=5), split in 0.05f64..0.95) {
        // Split the last state into two copies with the same fade.
        let mut h = spec.h().to_vec();
        let mut p = spec.p().to_vec();
        let last = p.len() - 1;
        let mass = p[last];
        p[last] = split * mass;
        h.push(h[last]);
        p.push((1.0 - split) * mass);
        let merged = validate_and_normalize(&RawChannel { h, p, g: spec.g(), q: spec.q() }).unwrap();
        prop_assert_eq!(merged.h(), spec.h());
        let total: f64 = merged.p().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for (x, y) in merged.p().iter().zip(spec.p()) {
            prop_assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn upper_bound_ignores_state_order(spec in channel_strategy(2..=5), rot in 0usize..5) {
        let n = spec.n();
        let mut pairs: Vec<(f64, f64)> = spec.h().iter().copied().zip(spec.p().iter().copied()).collect();
        pairs.reverse();
        pairs.rotate_left(rot % n);
        let (h, p): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let shuffled = validate_and_normalize(&RawChannel { h, p, g: spec.g(), q: spec.q() }).unwrap();
        let a = upper_bound(&spec).unwrap();
        let b = upper_bound(&shuffled).unwrap();
        prop_assert!((a.sr_upper - b.sr_upper).abs() <= 1e-12 * a.sr_upper.abs().max(1.0));
        prop_assert_eq!(a.case, b.case);
    }

    #[test]
    fn numerator_matches_exact_expansion(spec in channel_strategy(2..=6)) {
        let gains = spec.inverse_gains();
        let coeffs = numerator_polynomial(&gains, spec.p()).unwrap();
        let exact = exact_numerator(gains.a(), gains.b(), spec.p());
        prop_assert_eq!(coeffs.len(), spec.n());
        // The degree-n coefficient is 1 - sum(p): zero up to rounding of p.
        prop_assert!(abs_f64(&exact[spec.n()]) < 1e-14);
        let scale = exact.iter().map(abs_f64).fold(0.0, f64::max);
        for (c, e) in coeffs.iter().zip(&exact) {
            prop_assert!((c - to_f64(e)).abs() <= 1e-12 * scale, "{} vs {}", c, to_f64(e));
        }
    }

    #[test]
    fn t_matches_exact_rational(spec in channel_strategy(2..=6), u in -1.0f64..1.0) {
        let gains = spec.inverse_gains();
        let x = 20.0 * u * gains.a_max();
        prop_assume!(gains.poles().iter().all(|pole| (x - pole).abs() > 1e-6));
        let t = t_eval(x, &gains, spec.p()).unwrap();
        let exact = to_f64(&exact_t(x, gains.a(), gains.b(), spec.p()));
        let scale: f64 = gains.a().iter().zip(spec.p()).map(|(a, p)| p / (x + a).abs()).sum::<f64>()
            + 1.0 / (x + gains.b()).abs();
        prop_assert!((t - exact).abs() <= 1e-12 * scale, "{} vs {}", t, exact);
    }

    #[test]
    fn weights_are_feasible(spec in channel_strategy(2..=6)) {
        let ub = upper_bound(&spec).unwrap();
        let (a, b) = inverse_gains(&spec);
        let alpha = &ub.alpha.alpha;
        prop_assert!(alpha.iter().all(|w| *w >= 0.0));
        let total: f64 = alpha.iter().sum();
        let mean: f64 = alpha.iter().zip(&a).map(|(w, a)| w * a).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!((mean - b).abs() < 1e-9 * b.max(1.0));
    }

    #[test]
    fn upper_bound_grows_with_power(spec in channel_strategy(2..=5), factor in 1.0f64..50.0) {
        let low = upper_bound(&spec).unwrap();
        let high = upper_bound(&spec.with_power(spec.q() * factor).unwrap()).unwrap();
        prop_assert!(high.sr_upper >= low.sr_upper - 1e-12);
        // The regime root does not depend on the power.
        prop_assert_eq!(high.x_star, low.x_star);
    }

    #[test]
    fn upper_bound_dominates_achievable(spec in channel_strategy(2..=6)) {
        let ub = upper_bound(&spec).unwrap();
        let ach = maximize_r_ach(&spec);
        prop_assert!(ub.sr_upper >= ach.sr_ach - 1e-9);
        let gap = gap_analysis(&ub, &ach, &spec).unwrap();
        prop_assert!(gap.gap <= gap.gap_bound + 1e-9);
    }

    #[test]
    fn case2_collapses_to_endpoint_rates(spec in channel_strategy(2..=6)) {
        let ub = upper_bound(&spec).unwrap();
        let q = spec.q();
        let g2 = spec.g() * spec.g();
        let expected = match ub.case {
            CaseLabel::Case2B1 | CaseLabel::Case2B3 => expected_half_log2(&spec, |h| 1.0 + h * h * q),
            CaseLabel::Case2B2 => 0.5 * (1.0 + g2 * q).log2(),
            _ => return Ok(()),
        };
        prop_assert!((ub.sr_upper - expected).abs() < 1e-9, "{:?}: {} vs {}", ub.case, ub.sr_upper, expected);
        prop_assert!((maximize_r_ach(&spec).sr_ach - expected).abs() < 1e-9);
    }

    #[test]
    fn sign_changes_at_poles(spec in channel_strategy(2..=6)) {
        let gains = spec.inverse_gains();
        let p = spec.p();
        let delta = 1e-6;
        for a in gains.a() {
            prop_assert!(t_eval(-a - delta, &gains, p).unwrap() < 0.0);
            prop_assert!(t_eval(-a + delta, &gains, p).unwrap() > 0.0);
        }
        let b = gains.b();
        prop_assert!(t_eval(-b - delta, &gains, p).unwrap() > 0.0);
        prop_assert!(t_eval(-b + delta, &gains, p).unwrap() < 0.0);
    }

    #[test]
    fn two_state_root_matches_closed_form(spec in channel_strategy(2..=2)) {
        let ub = upper_bound(&spec).unwrap();
        let x = two_state_root(&spec);
        prop_assert!((ub.x_star - x).abs() <= 1e-9 * x.abs().max(1.0));
        prop_assert!(ub.roots.inside_roots.is_empty());
    }
}
