//! Stochastic-approximation updates of the temperatures and of the
//! random-walk proposals, and their step-size schedules.

mod proposal;
mod schedule;
mod temperature;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use proposal::{CovAdaptState, ProposalSettings, ProposalShape, RamDirection};
pub use schedule::{Gain, RamStep, StepSizeSchedule};
pub use temperature::{temp_update, TempAdaptState};

/// The desired mean acceptance rate for swaps and random-walk moves.
pub const DEFAULT_ALPHA_STAR: f64 = 0.234;

/// How the random-walk proposal covariance is adapted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdaptationMode {
    /// Per-level covariance estimate with a per-level log scale.
    Cov,
    /// One covariance estimate pooled over all levels, per-level log scales.
    #[serde(rename = "covg")]
    CovGlobal,
    /// Robust adaptive Metropolis: per-level Cholesky factor updated by rank one.
    Ram,
}

impl AdaptationMode {
    pub const ALL: [AdaptationMode; 3] = [AdaptationMode::Cov, AdaptationMode::CovGlobal, AdaptationMode::Ram];

    pub fn as_str(self) -> &'static str {
        match self {
            AdaptationMode::Cov => "cov",
            AdaptationMode::CovGlobal => "covg",
            AdaptationMode::Ram => "ram",
        }
    }

    /// Label used in result tables.
    pub fn label(self) -> &'static str {
        match self {
            AdaptationMode::Cov => "Cov",
            AdaptationMode::CovGlobal => "Cov(g)",
            AdaptationMode::Ram => "RAM",
        }
    }
}

impl fmt::Display for AdaptationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AdaptationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cov" => Ok(AdaptationMode::Cov),
            "covg" | "cov(g)" => Ok(AdaptationMode::CovGlobal),
            "ram" => Ok(AdaptationMode::Ram),
            other => Err(format!("unknown adaptation mode `{other}` (expected cov, covg or ram)")),
        }
    }
}
