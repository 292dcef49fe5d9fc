//! Detection-theory toolkit for weak-signal reacquisition.
//!
//! A reacquisition receiver already knows code delay and Doppler, so the
//! only impairments left on the correlator outputs `y_k = A d_k e^{jφ} + w_k`
//! are the unknown carrier phase and the unknown data bits. This crate
//! provides:
//!
//! - [`signal_model`]: deterministic generation of correlator blocks under
//!   both hypotheses.
//! - [`detectors`]: the eleven post-detection integration statistics, from
//!   plain coherent integration up to the Bayesian (BAPDI) and GLRT families.
//! - [`sign_enumeration`]: Gray-code enumeration of the bit-sign
//!   combinations the Bayesian statistics marginalize over.
//! - [`phase_estimation`]: ML phase estimation under unknown bits and the
//!   Cramér-Rao bound.
//! - [`analytic`]: special functions and closed-form ROC curves.
//! - [`montecarlo`]: the threshold-calibration and detection-probability
//!   engine, bitwise reproducible for any thread count.

pub mod analytic;
pub mod detectors;
pub mod error;
pub mod montecarlo;
pub mod phase_estimation;
pub mod rng;
pub mod sign_enumeration;
pub mod signal_model;

pub use detectors::{DetectorContext, DetectorId, SearchOptions};
pub use error::{PdiError, Result};
pub use signal_model::{
    BitsMode, ComplexSample, CorrelatorBlock, Hypothesis, PhaseMode, ScenarioConfig,
};
