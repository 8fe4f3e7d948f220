//! Independent numerical oracles for the closed forms in [`crate::bounds`]
//! and [`crate::achievable`].

use thiserror::Error;

use crate::achievable::r_ach;
use crate::channel::ChannelSpec;

pub mod epi;
pub mod program;
pub mod quadrature;
pub mod random;
pub mod suite;

pub use epi::{
    check_costa_concavity, check_epi_combination, conditional_entropy_power, ConcavityReport,
    ConditionalGaussianInput, EpiReport,
};
pub use program::{eval_objective, maximize_objective, ConcaveProgram, Maximum};
pub use quadrature::mixture_entropy_quadrature;
pub use random::random_channel;
pub use suite::{verify_channels, SuiteStats, VerificationSummary};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("variance {0} is not positive")]
    NonPositiveVariance(f64),
    #[error("projected gradient stalled at norm {pg_norm:e}")]
    NonConvergence { pg_norm: f64 },
    #[error("entropy power not concave: relative second difference {max_violation:e}")]
    ConcavityViolated { max_violation: f64 },
    #[error("entropy-power combination violated by {margin:e}")]
    EpiViolated { margin: f64 },
    #[error("quadrature error estimate {error:e} bits above target")]
    QuadratureNonConvergence { error: f64 },
    #[error("grid must be sorted, non-negative, with at least three points")]
    InvalidGrid,
    #[error("grid resolution must be at least 2, got {0}")]
    InvalidResolution(usize),
    #[error("weights do not satisfy the convex-combination constraints")]
    InfeasibleWeights,
    #[error("vector lengths disagree")]
    DimensionMismatch,
    #[error("box bounds must satisfy 0 < lower < upper")]
    EmptyBox,
    #[error("{0}")]
    InvalidInput(String),
}

/// Best superposition rate over the uniform grid of `resolution` power
/// splits in `[0, 1]`: `(beta, rate in bits)`.
pub fn beta_grid_oracle(spec: &ChannelSpec, resolution: usize) -> Result<(f64, f64), VerifyError> {
    if resolution < 2 {
        return Err(VerifyError::InvalidResolution(resolution));
    }
    let last = (resolution - 1) as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..resolution {
        let beta = if k == resolution - 1 { 1.0 } else { k as f64 / last };
        let rate = r_ach(beta, spec).expect("grid stays in [0, 1]");
        if rate > best.1 {
            best = (beta, rate);
        }
    }
    Ok(best)
}
