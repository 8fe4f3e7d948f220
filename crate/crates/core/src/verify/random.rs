//! Random accepted channels for property suites.

use rand::RngExt;

use crate::channel::ChannelSpec;

/// Fade magnitudes are drawn log-uniformly from this range.
pub const FADE_RANGE: (f64, f64) = (0.25, 4.0);
/// Default power range, sampled log-uniformly.
pub const POWER_RANGE: (f64, f64) = (0.01, 100.0);

fn log_uniform<R: RngExt + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

/// A random channel with `n` fade states. Adjacent fades differ by at least
/// 1% and `g` stays 0.1% away from every fade, keeping poles of `T` apart.
pub fn random_channel<R: RngExt + ?Sized>(rng: &mut R, n: usize, q_range: (f64, f64)) -> ChannelSpec {
    assert!(n >= 2, "need at least two fade states");
    loop {
        let mut h: Vec<f64> = (0..n)
            .map(|_| log_uniform(rng, FADE_RANGE.0, FADE_RANGE.1))
            .collect();
        h.sort_by(f64::total_cmp);
        if h.windows(2).any(|w| w[1] < 1.01 * w[0]) {
            continue;
        }
        let g = log_uniform(rng, h[0], h[n - 1]);
        if h.iter().any(|x| (x - g).abs() < 1e-3 * x) {
            continue;
        }
        let raw: Vec<f64> = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let p = raw.iter().map(|x| x / total).collect();
        let q = log_uniform(rng, q_range.0, q_range.1);
        if let Ok(spec) = ChannelSpec::new(h, p, g, q) {
            return spec;
        }
    }
}
