use thiserror::Error;

pub type Result<T> = std::result::Result<T, PdiError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdiError {
    #[error("correlator block is empty")]
    EmptyBlock,

    #[error("{detector} needs at least {needed} samples, got {got}")]
    BlockTooShort {
        detector: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid detector context: {0}")]
    InvalidContext(String),

    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),

    #[error("probability must lie in (0, 1), got {0}")]
    InvalidProbability(f64),

    #[error("SNR is undefined when sigma = 0")]
    UndefinedSnr,

    #[error("exact sign enumeration supports at most {cap} samples, got {n}")]
    Capacity { n: usize, cap: usize },

    #[error(
        "h0_trials = {h0_trials} is below the quantile guard 100/min(pfa) = {required} \
         (smallest pfa {min_pfa})"
    )]
    InsufficientTrials {
        h0_trials: u64,
        required: u64,
        min_pfa: f64,
    },

    #[error("unknown detector identifier `{0}`")]
    UnknownDetector(String),

    #[error("detector `{0}` requires a context (amplitude and sigma^2)")]
    ContextRequired(&'static str),
}

impl PdiError {
    /// True for errors raised by the enumeration memory guard.
    pub fn is_capacity(&self) -> bool {
        matches!(self, PdiError::Capacity { .. })
    }
}
