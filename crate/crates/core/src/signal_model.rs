//! Correlator-output signal model for reacquisition.
//!
//! With Doppler and code delay already resolved, each coherent correlator
//! output is `y_k = A d_k e^{jφ} + w_k` under H1 and `y_k = w_k` under H0,
//! where `w_k` is circular complex Gaussian with `E|w_k|^2 = σ^2` (each of
//! I and Q carries `σ^2 / 2`). All SNR figures in this crate are the
//! per-correlator ratio `A^2 / σ^2`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{PdiError, Result};
use crate::rng::{Split, TrialKey};

/// One complex correlator output `I + jQ`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexSample {
    pub i: f64,
    pub q: f64,
}

impl ComplexSample {
    pub const ZERO: ComplexSample = ComplexSample { i: 0.0, q: 0.0 };

    pub const fn new(i: f64, q: f64) -> Self {
        Self { i, q }
    }

    pub fn from_polar(magnitude: f64, phase: f64) -> Self {
        Self::new(magnitude * phase.cos(), magnitude * phase.sin())
    }

    pub fn norm_sqr(self) -> f64 {
        self.i * self.i + self.q * self.q
    }

    pub fn abs(self) -> f64 {
        self.i.hypot(self.q)
    }

    pub fn conj(self) -> Self {
        Self::new(self.i, -self.q)
    }

    pub fn mul(self, other: Self) -> Self {
        Self::new(
            self.i * other.i - self.q * other.q,
            self.i * other.q + self.q * other.i,
        )
    }

    pub fn add(self, other: Self) -> Self {
        Self::new(self.i + other.i, self.q + other.q)
    }

    pub fn scale(self, c: f64) -> Self {
        Self::new(self.i * c, self.q * c)
    }

    pub fn is_finite(self) -> bool {
        self.i.is_finite() && self.q.is_finite()
    }
}

/// The `N_nc` correlator outputs a detector operates on. Never empty and
/// always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorBlock {
    samples: Vec<ComplexSample>,
}

impl CorrelatorBlock {
    pub fn new(samples: Vec<ComplexSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(PdiError::EmptyBlock);
        }
        if let Some(k) = samples.iter().position(|s| !s.is_finite()) {
            return Err(PdiError::InvalidScenario(format!(
                "sample {k} of the block is not finite"
            )));
        }
        Ok(Self { samples })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(i, q)| ComplexSample::new(i, q))
                .collect(),
        )
    }

    pub fn samples(&self) -> &[ComplexSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ComplexSample> {
        self.samples.iter()
    }

    /// `e^{jθ} · y`.
    pub fn rotated(&self, theta: f64) -> Self {
        let r = ComplexSample::from_polar(1.0, theta);
        Self {
            samples: self.samples.iter().map(|s| s.mul(r)).collect(),
        }
    }

    /// `c · y`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s.scale(c)).collect(),
        }
    }

    /// Element-wise `d_k · y_k`; `signs[k]` is negated when negative.
    pub fn with_signs(&self, signs: &[i8]) -> Self {
        assert_eq!(signs.len(), self.len(), "sign vector length mismatch");
        Self {
            samples: self
                .samples
                .iter()
                .zip(signs)
                .map(|(s, &d)| if d < 0 { s.scale(-1.0) } else { *s })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseMode {
    /// Constant carrier phase in radians.
    Fixed(f64),
    /// Phase drawn uniformly on `[-π, π)` per trial.
    UniformRandom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BitsMode {
    /// Every `d_k = +1`.
    None,
    /// Independent equiprobable `±1` per sample and trial.
    RandomEquiprobable,
    /// A fixed sign sequence of length `n_nc`.
    Fixed(Vec<i8>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

impl Hypothesis {
    pub(crate) fn stream_tag(self) -> u64 {
        match self {
            Hypothesis::H0 => 0,
            Hypothesis::H1 => 1,
        }
    }
}

/// Generative parameters of a reacquisition scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_nc: usize,
    pub amplitude: f64,
    pub sigma: f64,
    pub phase_mode: PhaseMode,
    pub bits_mode: BitsMode,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(PdiError::InvalidScenario(msg));
        if self.n_nc == 0 {
            return bad("n_nc must be at least 1".into());
        }
        if !self.amplitude.is_finite() || self.amplitude < 0.0 {
            return bad(format!(
                "amplitude must be finite and >= 0, got {}",
                self.amplitude
            ));
        }
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return bad(format!("sigma must be finite and >= 0, got {}", self.sigma));
        }
        if let PhaseMode::Fixed(phi) = self.phase_mode {
            if !phi.is_finite() {
                return bad("fixed phase must be finite".into());
            }
        }
        if let BitsMode::Fixed(bits) = &self.bits_mode {
            if bits.len() != self.n_nc {
                return bad(format!(
                    "fixed bit sequence has length {}, expected n_nc = {}",
                    bits.len(),
                    self.n_nc
                ));
            }
            if let Some(b) = bits.iter().find(|&&b| b != 1 && b != -1) {
                return bad(format!("fixed bits must be +1 or -1, found {b}"));
            }
        }
        Ok(())
    }

    /// Copy of this scenario with a different amplitude.
    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Self {
            amplitude,
            ..self.clone()
        }
    }
}

/// Per-correlator SNR `A^2 / σ^2`.
pub fn snr_of(config: &ScenarioConfig) -> Result<f64> {
    if config.sigma == 0.0 {
        return Err(PdiError::UndefinedSnr);
    }
    Ok(config.amplitude * config.amplitude / (config.sigma * config.sigma))
}

/// Amplitude that gives `snr_db` (per-correlator, dB) at noise scale `sigma`.
pub fn amplitude_for_snr_db(snr_db: f64, sigma: f64) -> f64 {
    sigma * 10f64.powf(snr_db / 20.0)
}

/// Generates the block for trial `trial_index` from the primary split.
pub fn generate_block(
    config: &ScenarioConfig,
    hyp: Hypothesis,
    trial_index: u64,
) -> Result<CorrelatorBlock> {
    generate_block_in(config, hyp, Split::Primary, trial_index)
}

/// Generates a block from an explicit split.
///
/// Under H1 the substream is consumed in a fixed layout (phase draw, then
/// `n_nc` bit draws, then `2 n_nc` normals) whatever the phase and bits
/// modes, so the noise of a given trial is shared by every amplitude and
/// every mode.
pub fn generate_block_in(
    config: &ScenarioConfig,
    hyp: Hypothesis,
    split: Split,
    trial_index: u64,
) -> Result<CorrelatorBlock> {
    match hyp {
        Hypothesis::H0 => {
            config.validate()?;
            let mut rng = TrialKey::new(config.seed, hyp.stream_tag(), split, trial_index).rng();
            let noise_scale = config.sigma * FRAC_1_SQRT_2;
            let samples = (0..config.n_nc)
                .map(|_| {
                    let wi: f64 = rng.sample(StandardNormal);
                    let wq: f64 = rng.sample(StandardNormal);
                    ComplexSample::new(noise_scale * wi, noise_scale * wq)
                })
                .collect();
            CorrelatorBlock::new(samples)
        }
        Hypothesis::H1 => generate_h1_block(config, split, trial_index).map(|(b, _)| b),
    }
}

/// H1 block together with the carrier phase it was drawn with.
pub fn generate_h1_block(
    config: &ScenarioConfig,
    split: Split,
    trial_index: u64,
) -> Result<(CorrelatorBlock, f64)> {
    config.validate()?;
    let n = config.n_nc;
    let mut rng = TrialKey::new(config.seed, Hypothesis::H1.stream_tag(), split, trial_index).rng();
    let noise_scale = config.sigma * FRAC_1_SQRT_2;

    let u: f64 = rng.random();
    let phi = match config.phase_mode {
        PhaseMode::Fixed(phi) => phi,
        PhaseMode::UniformRandom => -PI + 2.0 * PI * u,
    };
    let mut bits = vec![1i8; n];
    for (k, b) in bits.iter_mut().enumerate() {
        let draw: bool = rng.random();
        *b = match &config.bits_mode {
            BitsMode::None => 1,
            BitsMode::RandomEquiprobable => {
                if draw {
                    1
                } else {
                    -1
                }
            }
            BitsMode::Fixed(seq) => seq[k],
        };
    }
    let carrier = ComplexSample::from_polar(config.amplitude, phi);
    let samples = bits
        .iter()
        .map(|&d| {
            let wi: f64 = rng.sample(StandardNormal);
            let wq: f64 = rng.sample(StandardNormal);
            let s = carrier.scale(f64::from(d));
            ComplexSample::new(s.i + noise_scale * wi, s.q + noise_scale * wq)
        })
        .collect();
    Ok((CorrelatorBlock::new(samples)?, phi))
}
