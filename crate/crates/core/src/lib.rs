//! Sum-capacity bounds for a two-user Gaussian broadcast channel in which
//! one user's gain fades over finitely many states and the other's is
//! constant.
//!
//! | Module | Computes |
//! |--------|----------|
//! | [`channel`] | validated, canonically ordered channel parameters |
//! | [`tfunction`] | the rational function `T(x)` and its outside root `x*` |
//! | [`bounds`] | regime of `x*`, weights, program value `D`, constant `C`, upper bound |
//! | [`achievable`] | superposition-coding rate, optimal power split, gap |
//! | [`verify`] | numerical oracles for every closed form |
//! | [`cli`] | config parsing, JSON records, CSV sweeps |
//!
//! All rates are in bits per channel use.
//!
//! ```
//! use fading_bc::{analyze, channel::ChannelSpec};
//!
//! let spec = ChannelSpec::new(vec![1.0, 2.0], vec![0.5, 0.5], 2f64.sqrt(), 1.0).unwrap();
//! let a = analyze(&spec).unwrap();
//! assert!((a.upper.x_star - 0.5).abs() < 1e-12);
//! assert!(a.gap.gap >= 0.0 && a.gap.gap <= a.gap.gap_bound);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use thiserror::Error;

pub mod achievable;
pub mod bounds;
pub mod channel;
pub mod cli;
pub mod tfunction;
pub mod verify;

use achievable::{AchievableReport, GapError, GapReport};
use bounds::{BoundsError, UpperBoundReport};
use channel::{ChannelError, ChannelSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Gap(#[from] GapError),
    #[error(transparent)]
    Verify(#[from] verify::VerifyError),
}

/// Upper bound, achievable rate, and gap for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub upper: UpperBoundReport,
    pub achievable: AchievableReport,
    pub gap: GapReport,
}

pub fn analyze(spec: &ChannelSpec) -> Result<Analysis, Error> {
    let upper = bounds::upper_bound(spec)?;
    let achievable = achievable::maximize_r_ach(spec);
    let gap = achievable::gap_analysis(&upper, &achievable, spec)?;
    Ok(Analysis {
        upper,
        achievable,
        gap,
    })
}
