//! Deterministic Monte Carlo engine.
//!
//! Thresholds are calibrated as empirical upper quantiles of detector
//! statistics over shared H0 blocks; detection probabilities are counted
//! over shared H1 blocks. Every block comes from its own counter-based
//! substream and results are gathered in trial order, so the output is
//! bitwise identical for any rayon pool size.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detectors::{DetectorContext, DetectorId, SearchOptions};
use crate::error::{PdiError, Result};
use crate::phase_estimation::{crb_phase, phase_error, phase_ml_closed_form, phase_ml_search};
use crate::rng::Split;
use crate::sign_enumeration::MAX_ENUMERATION_LEN;
use crate::signal_model::{
    amplitude_for_snr_db, generate_block_in, generate_h1_block, BitsMode, CorrelatorBlock,
    Hypothesis, PhaseMode, ScenarioConfig,
};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

/// Smallest H0 trial count for which the `pfa` quantile is estimable.
pub fn required_h0_trials(min_pfa: f64) -> u64 {
    (100.0 / min_pfa - 1e-9).ceil() as u64
}

/// Empirical upper quantile: the order statistic of rank `⌈(1 − pfa) n⌉`
/// (1-based) of `sorted`, which must be ascending. A detection is declared
/// when a statistic is strictly greater than the returned threshold.
pub fn empirical_threshold(sorted: &[f64], pfa: f64) -> f64 {
    assert!(!sorted.is_empty(), "no statistics to calibrate on");
    let n = sorted.len();
    let rank = (((1.0 - pfa) * n as f64) - 1e-9).ceil().max(1.0) as usize;
    sorted[rank.min(n) - 1]
}

fn count_above(stats: &[f64], threshold: f64) -> u64 {
    stats.iter().filter(|&&s| s > threshold).count() as u64
}

fn default_search() -> SearchOptions {
    SearchOptions::default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub scenario: ScenarioConfig,
    pub detectors: Vec<DetectorId>,
    /// Strictly descending target false-alarm probabilities.
    pub pfa_grid: Vec<f64>,
    pub h0_trials: u64,
    pub h1_trials: u64,
    /// Held-out H0 blocks for re-measuring the false-alarm rate; defaults to
    /// `h0_trials`, zero disables the check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation_trials: Option<u64>,
    /// Master seed of every substream; takes precedence over `scenario.seed`.
    pub seed: u64,
    #[serde(default = "default_search")]
    pub search: SearchOptions,
}

fn validate_detectors(detectors: &[DetectorId], n_nc: usize) -> Result<()> {
    if detectors.is_empty() {
        return Err(PdiError::InvalidExperiment("detector list is empty".into()));
    }
    for (k, d) in detectors.iter().enumerate() {
        if detectors[..k].contains(d) {
            return Err(PdiError::InvalidExperiment(format!(
                "detector `{d}` listed twice"
            )));
        }
        if n_nc < d.min_len() {
            return Err(PdiError::BlockTooShort {
                detector: d.as_str(),
                needed: d.min_len(),
                got: n_nc,
            });
        }
        if d.enumerates_signs() && n_nc > MAX_ENUMERATION_LEN {
            return Err(PdiError::Capacity {
                n: n_nc,
                cap: MAX_ENUMERATION_LEN,
            });
        }
    }
    Ok(())
}

fn validate_pfa(pfa: f64) -> Result<()> {
    if pfa > 0.0 && pfa < 1.0 {
        Ok(())
    } else {
        Err(PdiError::InvalidProbability(pfa))
    }
}

fn check_quantile_guard(h0_trials: u64, min_pfa: f64) -> Result<()> {
    let required = required_h0_trials(min_pfa);
    if h0_trials < required {
        return Err(PdiError::InsufficientTrials {
            h0_trials,
            required,
            min_pfa,
        });
    }
    Ok(())
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.search.validate()?;
        if self.scenario.sigma <= 0.0 {
            return Err(PdiError::InvalidExperiment(
                "Monte Carlo experiments need sigma > 0".into(),
            ));
        }
        validate_detectors(&self.detectors, self.scenario.n_nc)?;
        if self.detectors.iter().any(|d| d.needs_context()) {
            DetectorContext::from_scenario(&self.scenario)?;
        }
        if self.pfa_grid.is_empty() {
            return Err(PdiError::InvalidExperiment("pfa_grid is empty".into()));
        }
        for &p in &self.pfa_grid {
            validate_pfa(p)?;
        }
        if self.pfa_grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(PdiError::InvalidExperiment(
                "pfa_grid must be strictly descending".into(),
            ));
        }
        if self.h1_trials == 0 {
            return Err(PdiError::InvalidExperiment(
                "h1_trials must be positive".into(),
            ));
        }
        let min_pfa = *self.pfa_grid.last().expect("non-empty");
        check_quantile_guard(self.h0_trials, min_pfa)
    }

    /// The scenario with the experiment seed applied.
    pub fn run_scenario(&self) -> ScenarioConfig {
        ScenarioConfig {
            seed: self.seed,
            ..self.scenario.clone()
        }
    }

    pub fn validation_trials(&self) -> u64 {
        self.validation_trials.unwrap_or(self.h0_trials)
    }

    fn context(&self) -> Result<Option<DetectorContext>> {
        if self.detectors.iter().any(|d| d.needs_context()) {
            Ok(Some(DetectorContext::from_scenario(&self.scenario)?))
        } else {
            Ok(None)
        }
    }
}

/// Statistics of `detectors` over blocks `0..n`, one vector per detector.
fn collect_statistics<F>(
    n: u64,
    detectors: &[DetectorId],
    ctx: Option<&DetectorContext>,
    opts: &SearchOptions,
    make_block: F,
) -> Result<Vec<Vec<f64>>>
where
    F: Fn(u64) -> Result<CorrelatorBlock> + Sync,
{
    let n = usize::try_from(n)
        .map_err(|_| PdiError::InvalidExperiment(format!("{n} trials exceed the address space")))?;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .with_min_len(32)
        .map(|t| {
            let t = t as u64;
            let block = make_block(t)?;
            detectors
                .iter()
                .map(|d| d.evaluate(&block, ctx, opts))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut columns = vec![Vec::with_capacity(rows.len()); detectors.len()];
    for row in rows {
        for (col, v) in columns.iter_mut().zip(row) {
            col.push(v);
        }
    }
    Ok(columns)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorThresholds {
    pub detector: DetectorId,
    /// Aligned with [`ThresholdTable::pfa_grid`].
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub pfa_grid: Vec<f64>,
    pub h0_trials: u64,
    pub detectors: Vec<DetectorThresholds>,
}

impl ThresholdTable {
    pub fn get(&self, detector: DetectorId, pfa: f64) -> Option<f64> {
        let k = self.pfa_grid.iter().position(|&p| p == pfa)?;
        self.detectors
            .iter()
            .find(|d| d.detector == detector)
            .map(|d| d.thresholds[k])
    }
}

/// Calibrates every detector's threshold on the same `h0_trials` H0 blocks.
pub fn calibrate_thresholds(spec: &ExperimentSpec) -> Result<ThresholdTable> {
    spec.validate()?;
    let scenario = spec.run_scenario();
    let ctx = spec.context()?;
    let stats = collect_statistics(
        spec.h0_trials,
        &spec.detectors,
        ctx.as_ref(),
        &spec.search,
        |t| generate_block_in(&scenario, Hypothesis::H0, Split::Primary, t),
    )?;
    let detectors = spec
        .detectors
        .iter()
        .zip(stats)
        .map(|(&detector, s)| {
            let s = sorted(s);
            DetectorThresholds {
                detector,
                thresholds: spec
                    .pfa_grid
                    .iter()
                    .map(|&p| empirical_threshold(&s, p))
                    .collect(),
            }
        })
        .collect();
    Ok(ThresholdTable {
        pfa_grid: spec.pfa_grid.clone(),
        h0_trials: spec.h0_trials,
        detectors,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocCurvePoint {
    pub pfa_target: f64,
    /// False-alarm rate re-measured on held-out H0 blocks; NaN when the
    /// validation split is disabled.
    pub pfa_achieved: f64,
    pub pfa_ci_low: f64,
    pub pfa_ci_high: f64,
    pub threshold: f64,
    pub pd: f64,
    pub pd_ci_low: f64,
    pub pd_ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub detector: DetectorId,
    pub points: Vec<RocCurvePoint>,
    pub h0_trials: u64,
    pub h1_trials: u64,
    pub validation_trials: u64,
    pub seed: u64,
}

impl RocCurve {
    pub fn point(&self, pfa_target: f64) -> Option<&RocCurvePoint> {
        self.points.iter().find(|p| p.pfa_target == pfa_target)
    }
}

/// Detection probabilities on `h1_trials` fresh H1 blocks shared by every
/// detector, plus the achieved false-alarm rate on the validation split.
pub fn estimate_pd(spec: &ExperimentSpec, thresholds: &ThresholdTable) -> Result<Vec<RocCurve>> {
    spec.validate()?;
    let scenario = spec.run_scenario();
    let ctx = spec.context()?;
    let h1 = collect_statistics(
        spec.h1_trials,
        &spec.detectors,
        ctx.as_ref(),
        &spec.search,
        |t| generate_block_in(&scenario, Hypothesis::H1, Split::Primary, t),
    )?;
    let n_val = spec.validation_trials();
    let validation = if n_val > 0 {
        Some(collect_statistics(
            n_val,
            &spec.detectors,
            ctx.as_ref(),
            &spec.search,
            |t| generate_block_in(&scenario, Hypothesis::H0, Split::Validation, t),
        )?)
    } else {
        None
    };

    spec.detectors
        .iter()
        .enumerate()
        .map(|(k, &detector)| {
            let points = spec
                .pfa_grid
                .iter()
                .map(|&pfa| {
                    let threshold = thresholds.get(detector, pfa).ok_or_else(|| {
                        PdiError::InvalidExperiment(format!(
                            "no threshold for `{detector}` at pfa {pfa}"
                        ))
                    })?;
                    let hits = count_above(&h1[k], threshold);
                    let (pd_ci_low, pd_ci_high) = wilson_interval(hits, spec.h1_trials, Z_95);
                    let (pfa_achieved, pfa_ci_low, pfa_ci_high) = match &validation {
                        Some(v) => {
                            let fa = count_above(&v[k], threshold);
                            let (lo, hi) = wilson_interval(fa, n_val, Z_95);
                            (fa as f64 / n_val as f64, lo, hi)
                        }
                        None => (f64::NAN, f64::NAN, f64::NAN),
                    };
                    Ok(RocCurvePoint {
                        pfa_target: pfa,
                        pfa_achieved,
                        pfa_ci_low,
                        pfa_ci_high,
                        threshold,
                        pd: hits as f64 / spec.h1_trials as f64,
                        pd_ci_low,
                        pd_ci_high,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(RocCurve {
                detector,
                points,
                h0_trials: spec.h0_trials,
                h1_trials: spec.h1_trials,
                validation_trials: n_val,
                seed: spec.seed,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocExperiment {
    pub thresholds: ThresholdTable,
    pub curves: Vec<RocCurve>,
}

/// Calibration followed by detection-probability estimation.
pub fn run_roc(spec: &ExperimentSpec) -> Result<RocExperiment> {
    let thresholds = calibrate_thresholds(spec)?;
    let curves = estimate_pd(spec, &thresholds)?;
    Ok(RocExperiment { thresholds, curves })
}

/// Detection probability versus per-correlator SNR at one false-alarm rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdSweepSpec {
    /// Amplitude is ignored; it is set from each grid point.
    pub scenario: ScenarioConfig,
    pub detectors: Vec<DetectorId>,
    /// `10 log10(A² / σ²)`.
    pub snr_db_grid: Vec<f64>,
    pub pfa: f64,
    pub h0_trials: u64,
    pub h1_trials: u64,
    pub seed: u64,
    #[serde(default = "default_search")]
    pub search: SearchOptions,
}

impl PdSweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.search.validate()?;
        if self.scenario.sigma <= 0.0 {
            return Err(PdiError::InvalidExperiment(
                "Monte Carlo experiments need sigma > 0".into(),
            ));
        }
        validate_detectors(&self.detectors, self.scenario.n_nc)?;
        if self.snr_db_grid.is_empty() {
            return Err(PdiError::InvalidExperiment("snr_db_grid is empty".into()));
        }
        if let Some(s) = self.snr_db_grid.iter().find(|s| !s.is_finite()) {
            return Err(PdiError::InvalidExperiment(format!("non-finite SNR {s}")));
        }
        validate_pfa(self.pfa)?;
        if self.h1_trials == 0 {
            return Err(PdiError::InvalidExperiment(
                "h1_trials must be positive".into(),
            ));
        }
        check_quantile_guard(self.h0_trials, self.pfa)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdSweepPoint {
    pub snr_db: f64,
    pub detector: DetectorId,
    pub threshold: f64,
    pub pd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Sweeps the amplitude over the SNR grid. H0 blocks and H1 noise are
/// shared by every grid point. Context-free statistics are calibrated once;
/// the context-dependent ones change with `A` even under H0 and are
/// recalibrated per grid point on the same H0 blocks.
pub fn pd_vs_snr(spec: &PdSweepSpec) -> Result<Vec<PdSweepPoint>> {
    spec.validate()?;
    let base = ScenarioConfig {
        seed: spec.seed,
        ..spec.scenario.clone()
    };
    let sigma_sq = base.sigma * base.sigma;
    let h0 = |t| generate_block_in(&base, Hypothesis::H0, Split::Primary, t);

    let fixed: Vec<DetectorId> = spec
        .detectors
        .iter()
        .copied()
        .filter(|d| !d.needs_context())
        .collect();
    let varying: Vec<DetectorId> = spec
        .detectors
        .iter()
        .copied()
        .filter(|d| d.needs_context())
        .collect();
    let fixed_thresholds: Vec<f64> =
        collect_statistics(spec.h0_trials, &fixed, None, &spec.search, h0)?
            .into_iter()
            .map(|s| empirical_threshold(&sorted(s), spec.pfa))
            .collect();

    let mut out = Vec::with_capacity(spec.snr_db_grid.len() * spec.detectors.len());
    for &snr_db in &spec.snr_db_grid {
        let amplitude = amplitude_for_snr_db(snr_db, base.sigma);
        let ctx = DetectorContext::new(amplitude, sigma_sq)?;
        let varying_thresholds: Vec<f64> = if varying.is_empty() {
            Vec::new()
        } else {
            collect_statistics(spec.h0_trials, &varying, Some(&ctx), &spec.search, h0)?
                .into_iter()
                .map(|s| empirical_threshold(&sorted(s), spec.pfa))
                .collect()
        };
        let scenario = base.with_amplitude(amplitude);
        let h1 = collect_statistics(
            spec.h1_trials,
            &spec.detectors,
            Some(&ctx),
            &spec.search,
            |t| generate_block_in(&scenario, Hypothesis::H1, Split::Primary, t),
        )?;
        for (k, &detector) in spec.detectors.iter().enumerate() {
            let threshold = if detector.needs_context() {
                varying_thresholds[varying.iter().position(|&d| d == detector).expect("listed")]
            } else {
                fixed_thresholds[fixed.iter().position(|&d| d == detector).expect("listed")]
            };
            let hits = count_above(&h1[k], threshold);
            let (ci_low, ci_high) = wilson_interval(hits, spec.h1_trials, Z_95);
            out.push(PdSweepPoint {
                snr_db,
                detector,
                threshold,
                pd: hits as f64 / spec.h1_trials as f64,
                ci_low,
                ci_high,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseEstimator {
    #[serde(rename = "closed-form")]
    ClosedForm,
    #[serde(rename = "iterative")]
    Iterative,
}

impl PhaseEstimator {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseEstimator::ClosedForm => "closed-form",
            PhaseEstimator::Iterative => "iterative",
        }
    }
}

fn default_sigma() -> f64 {
    1.0
}

fn default_bits() -> BitsMode {
    BitsMode::RandomEquiprobable
}

fn default_phase() -> PhaseMode {
    PhaseMode::UniformRandom
}

/// Minimum trials per SNR point for an MSE sweep.
pub const MIN_PHASE_TRIALS: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseMseSpec {
    pub estimators: Vec<PhaseEstimator>,
    pub snr_db_grid: Vec<f64>,
    pub n_nc: usize,
    pub trials: u64,
    pub seed: u64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_bits")]
    pub bits_mode: BitsMode,
    #[serde(default = "default_phase")]
    pub phase_mode: PhaseMode,
    #[serde(default = "default_search")]
    pub search: SearchOptions,
}

impl PhaseMseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.estimators.is_empty() {
            return Err(PdiError::InvalidExperiment(
                "estimator list is empty".into(),
            ));
        }
        if self.snr_db_grid.is_empty() {
            return Err(PdiError::InvalidExperiment("snr_db_grid is empty".into()));
        }
        if let Some(s) = self.snr_db_grid.iter().find(|s| !s.is_finite()) {
            return Err(PdiError::InvalidExperiment(format!("non-finite SNR {s}")));
        }
        if self.trials < MIN_PHASE_TRIALS {
            return Err(PdiError::InvalidExperiment(format!(
                "phase MSE needs at least {MIN_PHASE_TRIALS} trials per point, got {}",
                self.trials
            )));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(PdiError::InvalidExperiment(
                "sigma must be finite and > 0".into(),
            ));
        }
        self.search.validate()?;
        self.scenario(1.0).validate()
    }

    fn scenario(&self, amplitude: f64) -> ScenarioConfig {
        ScenarioConfig {
            n_nc: self.n_nc,
            amplitude,
            sigma: self.sigma,
            phase_mode: self.phase_mode,
            bits_mode: self.bits_mode.clone(),
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMsePoint {
    pub snr_db: f64,
    pub estimator: PhaseEstimator,
    pub mse_rad2: f64,
    pub crb_rad2: f64,
}

/// Mean squared phase error (modulo π) of each estimator over the SNR grid,
/// with the Cramér-Rao bound alongside. Every estimator and every grid point
/// sees the same noise and bits.
pub fn phase_mse_sweep(spec: &PhaseMseSpec) -> Result<Vec<PhaseMsePoint>> {
    spec.validate()?;
    let sigma_sq = spec.sigma * spec.sigma;
    let mut out = Vec::new();
    for &snr_db in &spec.snr_db_grid {
        let amplitude = amplitude_for_snr_db(snr_db, spec.sigma);
        let scenario = spec.scenario(amplitude);
        let ctx = DetectorContext::new(amplitude, sigma_sq)?;
        let errors: Vec<Vec<f64>> = (0..spec.trials as usize)
            .into_par_iter()
            .with_min_len(64)
            .map(|t| {
                let t = t as u64;
                let (block, truth) = generate_h1_block(&scenario, Split::Primary, t)?;
                Ok(spec
                    .estimators
                    .iter()
                    .map(|e| {
                        let est = match e {
                            PhaseEstimator::ClosedForm => phase_ml_closed_form(&block),
                            PhaseEstimator::Iterative => {
                                phase_ml_search(&block, &ctx, &spec.search)
                            }
                        };
                        let err = phase_error(est.phi_hat, truth);
                        err * err
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        let snr = amplitude * amplitude / sigma_sq;
        for (k, &estimator) in spec.estimators.iter().enumerate() {
            let total: f64 = errors.iter().map(|row| row[k]).sum();
            out.push(PhaseMsePoint {
                snr_db,
                estimator,
                mse_rad2: total / spec.trials as f64,
                crb_rad2: crb_phase(snr, spec.n_nc),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::npdi_pfa_at_threshold;
    use rand::{Rng, SeedableRng};

    fn spec(detectors: Vec<DetectorId>, bits: BitsMode) -> ExperimentSpec {
        ExperimentSpec {
            scenario: ScenarioConfig {
                n_nc: 6,
                amplitude: 1.6,
                sigma: 1.0,
                phase_mode: PhaseMode::UniformRandom,
                bits_mode: bits,
                seed: 0,
            },
            detectors,
            pfa_grid: vec![0.1, 0.01],
            h0_trials: 20_000,
            h1_trials: 5_000,
            validation_trials: None,
            seed: 99,
            search: SearchOptions::default(),
        }
    }

    #[test]
    fn wilson_brackets_estimate() {
        for (k, n) in [(0, 100), (5, 100), (50, 100), (100, 100), (3, 10_000)] {
            let (lo, hi) = wilson_interval(k, n, Z_95);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi && lo >= 0.0 && hi <= 1.0);
        }
        let (lo, hi) = wilson_interval(50, 100, Z_95);
        assert!((lo - 0.4038).abs() < 1e-4 && (hi - 0.5962).abs() < 1e-4);
    }

    #[test]
    fn uniform_quantile() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let s = sorted((0..100_000).map(|_| rng.random::<f64>()).collect());
        let g = empirical_threshold(&s, 0.1);
        assert!((g - 0.9).abs() < 0.005, "{g}");
        let median = empirical_threshold(&s, 0.5);
        assert!((median - 0.5).abs() < 0.005);
    }

    #[test]
    fn quantile_rank_convention() {
        let s: Vec<f64> = (1..=100).map(f64::from).collect();
        // rank ceil(0.9 * 100) = 90 -> value 90, ten statistics exceed it
        assert_eq!(empirical_threshold(&s, 0.1), 90.0);
        assert_eq!(count_above(&s, 90.0), 10);
        assert_eq!(empirical_threshold(&s, 0.999), 1.0);
    }

    #[test]
    fn guard_on_trials() {
        let mut s = spec(vec![DetectorId::Npdi], BitsMode::None);
        s.pfa_grid = vec![0.1, 1e-3];
        s.h0_trials = 50_000;
        assert_eq!(
            s.validate(),
            Err(PdiError::InsufficientTrials {
                h0_trials: 50_000,
                required: 100_000,
                min_pfa: 1e-3
            })
        );
    }

    #[test]
    fn spec_validation() {
        let mut s = spec(vec![], BitsMode::None);
        assert!(s.validate().is_err());
        s.detectors = vec![DetectorId::Npdi, DetectorId::Npdi];
        assert!(s.validate().is_err());
        s.detectors = vec![DetectorId::Npdi];
        s.pfa_grid = vec![0.01, 0.1];
        assert!(s.validate().is_err());
        s.pfa_grid = vec![1.0];
        assert!(s.validate().is_err());
        let mut big = spec(vec![DetectorId::Bapdi], BitsMode::None);
        big.scenario.n_nc = 30;
        assert!(big.validate().unwrap_err().is_capacity());
        let mut silent = spec(vec![DetectorId::Glrt], BitsMode::None);
        silent.scenario.amplitude = 0.0;
        assert!(matches!(
            silent.validate(),
            Err(PdiError::InvalidContext(_))
        ));
    }

    #[test]
    fn npdi_thresholds_follow_gamma_tail() {
        let s = spec(vec![DetectorId::Npdi], BitsMode::None);
        let table = calibrate_thresholds(&s).unwrap();
        for &pfa in &s.pfa_grid {
            let g = table.get(DetectorId::Npdi, pfa).unwrap();
            let true_pfa = npdi_pfa_at_threshold(6, 1.0, g);
            let sd = (pfa * (1.0 - pfa) / s.h0_trials as f64).sqrt();
            assert!((true_pfa - pfa).abs() < 4.0 * sd, "pfa {pfa}: {true_pfa}");
        }
    }

    #[test]
    fn thresholds_monotone_in_pfa() {
        let mut s = spec(DetectorId::ALL.to_vec(), BitsMode::RandomEquiprobable);
        s.pfa_grid = vec![0.5, 0.2, 0.1, 0.05, 0.01];
        s.h0_trials = 10_000;
        s.h1_trials = 2_000;
        s.validation_trials = Some(10_000);
        let exp = run_roc(&s).unwrap();
        for d in &exp.thresholds.detectors {
            assert!(
                d.thresholds.windows(2).all(|w| w[0] <= w[1]),
                "{}",
                d.detector
            );
        }
        for c in &exp.curves {
            assert!(
                c.points.windows(2).all(|w| w[0].pd >= w[1].pd),
                "{}",
                c.detector
            );
            for p in &c.points {
                assert!(p.pd_ci_low <= p.pd && p.pd <= p.pd_ci_high);
                // Calibration and validation noise add: compare at the
                // combined 3-sigma level.
                let sd = (2.0 * p.pfa_target * (1.0 - p.pfa_target) / 10_000.0).sqrt();
                assert!(
                    (p.pfa_achieved - p.pfa_target).abs() < 3.0 * sd,
                    "{} at {}: {}",
                    c.detector,
                    p.pfa_target,
                    p.pfa_achieved
                );
            }
        }
    }

    #[test]
    fn extreme_thresholds() {
        let s = spec(vec![DetectorId::Npdi, DetectorId::Mbapdi], BitsMode::None);
        let lo = ThresholdTable {
            pfa_grid: s.pfa_grid.clone(),
            h0_trials: 0,
            detectors: s
                .detectors
                .iter()
                .map(|&detector| DetectorThresholds {
                    detector,
                    thresholds: vec![f64::NEG_INFINITY; 2],
                })
                .collect(),
        };
        let mut hi = lo.clone();
        for d in &mut hi.detectors {
            d.thresholds = vec![f64::INFINITY; 2];
        }
        let mut s0 = s.clone();
        s0.validation_trials = Some(0);
        for c in estimate_pd(&s0, &lo).unwrap() {
            assert!(c
                .points
                .iter()
                .all(|p| p.pd == 1.0 && p.pfa_achieved.is_nan()));
        }
        for c in estimate_pd(&s0, &hi).unwrap() {
            assert!(c.points.iter().all(|p| p.pd == 0.0));
        }
    }

    #[test]
    fn identical_under_any_pool_size() {
        let mut s = spec(
            vec![DetectorId::Npdisd, DetectorId::Bapdi, DetectorId::Glrt],
            BitsMode::RandomEquiprobable,
        );
        s.h0_trials = 2_000;
        s.h1_trials = 1_000;
        s.pfa_grid = vec![0.1];
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_roc(&s).unwrap())
        };
        let one = run(1);
        let three = run(3);
        assert_eq!(one, three);
    }

    #[test]
    fn pd_sweep_limits() {
        let s = PdSweepSpec {
            scenario: ScenarioConfig {
                n_nc: 5,
                amplitude: 0.0,
                sigma: 1.0,
                phase_mode: PhaseMode::UniformRandom,
                bits_mode: BitsMode::None,
                seed: 0,
            },
            detectors: DetectorId::ALL.to_vec(),
            snr_db_grid: vec![-40.0, 20.0 * 5f64.log10()],
            pfa: 0.01,
            h0_trials: 10_000,
            h1_trials: 2_000,
            seed: 4,
            search: SearchOptions::default(),
        };
        let pts = pd_vs_snr(&s).unwrap();
        for p in &pts {
            if p.snr_db < -30.0 {
                let (lo, hi) = (p.ci_low - 0.01, p.ci_high + 0.01);
                assert!(lo <= s.pfa && s.pfa <= hi, "{} pd {}", p.detector, p.pd);
            } else {
                assert!(p.pd > 0.99, "{} pd {}", p.detector, p.pd);
            }
        }
    }

    #[test]
    fn phase_sweep_noiseless_limit_and_guard() {
        let mut s = PhaseMseSpec {
            estimators: vec![PhaseEstimator::ClosedForm, PhaseEstimator::Iterative],
            snr_db_grid: vec![80.0],
            n_nc: 10,
            trials: MIN_PHASE_TRIALS,
            seed: 1,
            sigma: 1.0,
            bits_mode: BitsMode::RandomEquiprobable,
            phase_mode: PhaseMode::UniformRandom,
            search: SearchOptions::default(),
        };
        for p in phase_mse_sweep(&s).unwrap() {
            assert!(p.mse_rad2 < 1e-8, "{:?}", p);
        }
        s.trials = 100;
        assert!(phase_mse_sweep(&s).is_err());
    }
}
