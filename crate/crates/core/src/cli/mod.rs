//! Batch front-end: config files in, canonical JSON records and CSV sweeps
//! out. The binary in `main.rs` is a thin wrapper over these functions.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error as ThisError;

use crate::achievable::GapError;
use crate::bounds::BoundsError;
use crate::channel::{validate_and_normalize_with, ChannelError, ChannelSpec, RawChannel, Tolerances};
use crate::tfunction::RootError;
use crate::verify::{self, VerificationSummary, VerifyError};
use crate::{analyze, Analysis, Error};

mod format;

pub use format::{format_float, to_canonical_json};

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Config(#[from] serde_json::Error),
    #[error("invalid sweep: {0}")]
    Sweep(String),
    #[error(transparent)]
    Analysis(#[from] Error),
}

impl From<ChannelError> for CliError {
    fn from(e: ChannelError) -> Self {
        CliError::Analysis(e.into())
    }
}

impl CliError {
    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io_error",
            CliError::Config(_) => "invalid_config",
            CliError::Sweep(_) => "invalid_sweep",
            CliError::Analysis(e) => error_code(e),
        }
    }

    /// 2: invalid input, 3: outside the supported regime, 4: numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Analysis(Error::Channel(
                ChannelError::StronglyDegraded { .. } | ChannelError::DegenerateFading { .. },
            )) => 3,
            CliError::Analysis(Error::Channel(_)) => 2,
            CliError::Analysis(_) => 4,
            _ => 2,
        }
    }

    /// One-line JSON error object.
    pub fn to_json_line(&self) -> String {
        let value = serde_json::json!({
            "error": self.code(),
            "message": self.to_string(),
        });
        to_canonical_json(&value)
    }
}

fn error_code(e: &Error) -> &'static str {
    match e {
        Error::Channel(c) => match c {
            ChannelError::LengthMismatch { .. } => "length_mismatch",
            ChannelError::InvalidPmf(_) => "invalid_pmf",
            ChannelError::NonPositiveParameter { .. } => "non_positive_parameter",
            ChannelError::StronglyDegraded { .. } => "strongly_degraded",
            ChannelError::DegenerateFading { .. } => "degenerate_fading",
        },
        Error::Bounds(b) => match b {
            BoundsError::Root(r) => match r {
                RootError::PoleEvaluation { .. } => "pole_evaluation",
                RootError::DegreeCollapse { .. } => "degree_collapse",
                RootError::RootCountMismatch { .. } => "root_count_mismatch",
                RootError::RefinementFailed { .. } => "refinement_failed",
            },
            BoundsError::XStarInsidePoleInterval { .. } => "x_star_inside_pole_interval",
            BoundsError::AlphaInfeasible { .. } => "alpha_infeasible",
            BoundsError::NonPositiveLogArgument { .. } => "non_positive_log_argument",
        },
        Error::Gap(g) => match g {
            GapError::GapNegative(_) => "gap_negative",
            GapError::GapExceedsBound { .. } => "gap_exceeds_bound",
            GapError::PreferenceSignMismatch { .. } => "preference_sign_mismatch",
        },
        Error::Verify(v) => match v {
            VerifyError::NonConvergence { .. } => "non_convergence",
            _ => "verification_error",
        },
    }
}

/// Config file: the channel plus optional tolerance overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    #[serde(flatten)]
    pub channel: RawChannel,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.unwrap_or_default()
    }

    pub fn spec(&self) -> Result<ChannelSpec, CliError> {
        Ok(validate_and_normalize_with(&self.channel, &self.tolerances())?)
    }

    fn spec_at(&self, q: f64) -> Result<ChannelSpec, CliError> {
        let raw = RawChannel {
            q,
            ..self.channel.clone()
        };
        Ok(validate_and_normalize_with(&raw, &self.tolerances())?)
    }
}

/// Unit in which rates and entropies are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateUnit {
    Bits,
    Nats,
}

impl RateUnit {
    fn scale(self) -> f64 {
        match self {
            RateUnit::Bits => 1.0,
            RateUnit::Nats => std::f64::consts::LN_2,
        }
    }
}

/// Flat record of one analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRecord {
    pub h: Vec<f64>,
    pub p: Vec<f64>,
    pub g: f64,
    pub q: f64,
    pub x_star: f64,
    pub case: String,
    pub alpha: Vec<f64>,
    pub d_value: f64,
    pub d_is_exact: bool,
    pub c_value: f64,
    pub sr_upper: f64,
    pub beta_star: f64,
    pub sr_ach: f64,
    pub gap: f64,
    pub gap_bound: f64,
    pub setting: String,
    pub near_degenerate: bool,
    pub units: RateUnit,
}

impl AnalysisRecord {
    pub fn new(spec: &ChannelSpec, a: &Analysis, units: RateUnit) -> Self {
        let k = units.scale();
        Self {
            h: spec.h().to_vec(),
            p: spec.p().to_vec(),
            g: spec.g(),
            q: spec.q(),
            x_star: a.upper.x_star,
            case: a.upper.case.as_str().to_string(),
            alpha: a.upper.alpha.alpha.clone(),
            d_value: a.upper.d_value * k,
            d_is_exact: a.upper.d_is_exact,
            c_value: a.upper.c_value * k,
            sr_upper: a.upper.sr_upper * k,
            beta_star: a.achievable.beta_star,
            sr_ach: a.achievable.sr_ach * k,
            gap: a.gap.gap * k,
            gap_bound: a.gap.gap_bound * k,
            setting: a.gap.setting.as_str().to_string(),
            near_degenerate: a.upper.near_degenerate,
            units,
        }
    }

    pub fn to_json(&self) -> String {
        to_canonical_json(&serde_json::to_value(self).expect("record serializes"))
    }
}

pub fn cmd_analyze(config: &Config, units: RateUnit) -> Result<AnalysisRecord, CliError> {
    let spec = config.spec()?;
    let analysis = analyze(&spec)?;
    Ok(AnalysisRecord::new(&spec, &analysis, units))
}

/// Power values of a sweep, ascending, with both endpoints exact.
pub fn power_grid(q_min: f64, q_max: f64, points: usize, log: bool) -> Result<Vec<f64>, CliError> {
    if !(q_min > 0.0 && q_min < q_max && q_max.is_finite()) {
        return Err(CliError::Sweep(format!(
            "need 0 < q_min < q_max, got {q_min} and {q_max}"
        )));
    }
    if points < 2 {
        return Err(CliError::Sweep(format!("need at least 2 points, got {points}")));
    }
    let last = (points - 1) as f64;
    Ok((0..points)
        .map(|k| {
            if k == 0 {
                q_min
            } else if k == points - 1 {
                q_max
            } else if log {
                (q_min.ln() + (q_max.ln() - q_min.ln()) * k as f64 / last).exp()
            } else {
                q_min + (q_max - q_min) * k as f64 / last
            }
        })
        .collect())
}

pub const SWEEP_COLUMNS: [&str; 12] = [
    "q", "x_star", "case", "d_value", "d_is_exact", "c_value", "sr_upper", "beta_star", "sr_ach",
    "gap", "gap_bound", "error",
];

/// One sweep row: the power and either an analysis or the failure.
pub struct SweepRow {
    pub q: f64,
    pub outcome: Result<Analysis, CliError>,
}

/// Analyze the config's channel at every power in `grid`. Rows may be
/// computed in parallel; the output keeps the grid order.
pub fn sweep(config: &Config, grid: &[f64]) -> Vec<SweepRow> {
    grid.par_iter()
        .map(|&q| SweepRow {
            q,
            outcome: config
                .spec_at(q)
                .and_then(|spec| analyze(&spec).map_err(CliError::from)),
        })
        .collect()
}

pub fn write_sweep_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for row in rows {
        let record: Vec<String> = match &row.outcome {
            Ok(a) => vec![
                format_float(row.q),
                format_float(a.upper.x_star),
                a.upper.case.as_str().to_string(),
                format_float(a.upper.d_value),
                a.upper.d_is_exact.to_string(),
                format_float(a.upper.c_value),
                format_float(a.upper.sr_upper),
                format_float(a.achievable.beta_star),
                format_float(a.achievable.sr_ach),
                format_float(a.gap.gap),
                format_float(a.gap.gap_bound),
                String::new(),
            ],
            Err(e) => {
                let mut r = vec![format_float(row.q)];
                r.extend(std::iter::repeat_n(String::new(), 10));
                r.push(e.code().to_string());
                r
            }
        };
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Source of channels for the verification suites.
pub enum VerifySource {
    Config(Config),
    Random { trials: usize, seed: u64 },
}

pub fn cmd_verify(source: &VerifySource) -> Result<VerificationSummary, CliError> {
    Ok(match source {
        VerifySource::Config(config) => verify::verify_channels(&[config.spec()?], 0),
        VerifySource::Random { trials, seed } => {
            verify::verify_channels(&verify::suite::random_specs(*trials, *seed), *seed)
        }
    })
}
