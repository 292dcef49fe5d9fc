//! Post-detection integration statistics.
//!
//! Each detector maps a [`CorrelatorBlock`] to a scalar that is compared
//! against a threshold. [`classic`] holds the benchmark techniques,
//! [`proposed`] the Bayesian and GLRT ones.

pub mod classic;
pub mod proposed;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PdiError, Result};
use crate::signal_model::{CorrelatorBlock, ScenarioConfig};

/// Known signal amplitude and noise variance for the SNR-dependent statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorContext {
    amplitude: f64,
    sigma_sq: f64,
}

impl DetectorContext {
    pub fn new(amplitude: f64, sigma_sq: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(PdiError::InvalidContext(format!(
                "amplitude must be finite and > 0, got {amplitude}"
            )));
        }
        if !(sigma_sq.is_finite() && sigma_sq > 0.0) {
            return Err(PdiError::InvalidContext(format!(
                "sigma^2 must be finite and > 0, got {sigma_sq}"
            )));
        }
        Ok(Self {
            amplitude,
            sigma_sq,
        })
    }

    /// True-parameter context of a scenario.
    pub fn from_scenario(config: &ScenarioConfig) -> Result<Self> {
        Self::new(config.amplitude, config.sigma * config.sigma)
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma_sq
    }

    /// `2A / σ²`.
    pub fn scale(&self) -> f64 {
        2.0 * self.amplitude / self.sigma_sq
    }
}

/// Settings of the one-dimensional ML phase search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchOptions {
    /// Coarse grid points over the half-circle.
    pub grid_points: usize,
    /// Golden-section iterations inside the best grid cell.
    pub refine_iters: u32,
}

impl SearchOptions {
    pub const MIN_GRID_POINTS: usize = 8;

    pub fn validate(&self) -> Result<()> {
        if self.grid_points < Self::MIN_GRID_POINTS {
            return Err(PdiError::InvalidExperiment(format!(
                "search grid_points must be at least {}, got {}",
                Self::MIN_GRID_POINTS,
                self.grid_points
            )));
        }
        Ok(())
    }
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            grid_points: 64,
            refine_iters: 40,
        }
    }
}

/// Stable detector identifiers used in configs, CSV names and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DetectorId {
    #[serde(rename = "coherent")]
    Coherent,
    #[serde(rename = "npdi")]
    Npdi,
    #[serde(rename = "dpdi")]
    Dpdi,
    #[serde(rename = "nq-npdi")]
    NqNpdi,
    #[serde(rename = "gpdit")]
    Gpdit,
    #[serde(rename = "npdisd")]
    Npdisd,
    #[serde(rename = "bapdi")]
    Bapdi,
    #[serde(rename = "mbapdi")]
    Mbapdi,
    #[serde(rename = "glrt")]
    Glrt,
    #[serde(rename = "glrt-cf")]
    GlrtClosedForm,
    #[serde(rename = "glrt-approx")]
    GlrtHighSnr,
}

impl DetectorId {
    pub const ALL: [DetectorId; 11] = [
        DetectorId::Coherent,
        DetectorId::Npdi,
        DetectorId::Dpdi,
        DetectorId::NqNpdi,
        DetectorId::Gpdit,
        DetectorId::Npdisd,
        DetectorId::Bapdi,
        DetectorId::Mbapdi,
        DetectorId::Glrt,
        DetectorId::GlrtClosedForm,
        DetectorId::GlrtHighSnr,
    ];

    /// BAPDI, MBAPDI and the three GLRT variants.
    pub const PROPOSED: [DetectorId; 5] = [
        DetectorId::Bapdi,
        DetectorId::Mbapdi,
        DetectorId::Glrt,
        DetectorId::GlrtClosedForm,
        DetectorId::GlrtHighSnr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DetectorId::Coherent => "coherent",
            DetectorId::Npdi => "npdi",
            DetectorId::Dpdi => "dpdi",
            DetectorId::NqNpdi => "nq-npdi",
            DetectorId::Gpdit => "gpdit",
            DetectorId::Npdisd => "npdisd",
            DetectorId::Bapdi => "bapdi",
            DetectorId::Mbapdi => "mbapdi",
            DetectorId::Glrt => "glrt",
            DetectorId::GlrtClosedForm => "glrt-cf",
            DetectorId::GlrtHighSnr => "glrt-approx",
        }
    }

    /// Whether the statistic depends on `(A, σ²)`.
    pub fn needs_context(self) -> bool {
        matches!(
            self,
            DetectorId::Bapdi | DetectorId::Glrt | DetectorId::GlrtClosedForm
        )
    }

    /// Minimum block length the statistic is defined for.
    pub fn min_len(self) -> usize {
        match self {
            DetectorId::Dpdi | DetectorId::Gpdit => 2,
            _ => 1,
        }
    }

    /// Whether the statistic enumerates sign combinations.
    pub fn enumerates_signs(self) -> bool {
        matches!(self, DetectorId::Bapdi | DetectorId::Mbapdi)
    }

    pub fn evaluate(
        self,
        block: &CorrelatorBlock,
        ctx: Option<&DetectorContext>,
        opts: &SearchOptions,
    ) -> Result<f64> {
        let need = || ctx.ok_or(PdiError::ContextRequired(self.as_str()));
        Ok(match self {
            DetectorId::Coherent => classic::coherent(block),
            DetectorId::Npdi => classic::npdi(block),
            DetectorId::Dpdi => classic::dpdi(block)?,
            DetectorId::NqNpdi => classic::nq_npdi(block),
            DetectorId::Gpdit => classic::gpdit(block)?,
            DetectorId::Npdisd => classic::npdisd(block),
            DetectorId::Bapdi => proposed::bapdi(block, need()?)?,
            DetectorId::Mbapdi => proposed::mbapdi(block)?,
            DetectorId::Glrt => proposed::glrt_strict(block, need()?, opts),
            DetectorId::GlrtClosedForm => proposed::glrt_closed_form(block, need()?),
            DetectorId::GlrtHighSnr => proposed::glrt_high_snr(block),
        })
    }
}

impl fmt::Display for DetectorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectorId {
    type Err = PdiError;

    fn from_str(s: &str) -> Result<Self> {
        DetectorId::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| PdiError::UnknownDetector(s.to_string()))
    }
}
