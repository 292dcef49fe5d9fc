//! Counter-based substreams for Monte Carlo trials.
//!
//! Every trial draws from its own ChaCha8 generator keyed by
//! `(seed, hypothesis tag, split, trial index)`. No state is shared between
//! trials, so any partition of trial indices over worker threads yields the
//! same samples.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Disjoint sets of trials drawn from the same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    /// Threshold calibration under H0 and detection trials under H1.
    Primary,
    /// Held-out H0 blocks used to re-measure the achieved false-alarm rate.
    Validation,
}

impl Split {
    fn tag(self) -> u64 {
        match self {
            Split::Primary => 0,
            Split::Validation => 1,
        }
    }
}

/// Identifies one trial's random substream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrialKey {
    pub seed: u64,
    pub stream: u64,
    pub split: Split,
    pub trial: u64,
}

impl TrialKey {
    pub fn new(seed: u64, stream: u64, split: Split, trial: u64) -> Self {
        Self {
            seed,
            stream,
            split,
            trial,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.stream.to_le_bytes());
        key[16..24].copy_from_slice(&self.split.tag().to_le_bytes());
        key[24..32].copy_from_slice(&self.trial.to_le_bytes());
        ChaCha8Rng::from_seed(key)
    }
}
