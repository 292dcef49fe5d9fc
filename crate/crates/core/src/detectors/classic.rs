//! Benchmark non-coherent statistics.
//!
//! Summation is in index order throughout.

use crate::error::{PdiError, Result};
use crate::signal_model::{ComplexSample, CorrelatorBlock};

fn require_len(block: &CorrelatorBlock, detector: &'static str, needed: usize) -> Result<()> {
    if block.len() < needed {
        return Err(PdiError::BlockTooShort {
            detector,
            needed,
            got: block.len(),
        });
    }
    Ok(())
}

/// `|Σ y_k|`.
pub fn coherent(block: &CorrelatorBlock) -> f64 {
    block
        .iter()
        .fold(ComplexSample::ZERO, |acc, &y| acc.add(y))
        .abs()
}

/// `Σ |y_k|²`.
pub fn npdi(block: &CorrelatorBlock) -> f64 {
    block.iter().map(|y| y.norm_sqr()).sum()
}

/// `|Σ_{k≥2} y_k y*_{k-1}|`.
pub fn dpdi(block: &CorrelatorBlock) -> Result<f64> {
    require_len(block, "dpdi", 2)?;
    let s = block.samples();
    Ok(s.windows(2)
        .fold(ComplexSample::ZERO, |acc, w| acc.add(w[1].mul(w[0].conj())))
        .abs())
}

/// `Σ |y_k|`.
pub fn nq_npdi(block: &CorrelatorBlock) -> f64 {
    block.iter().map(|y| y.abs()).sum()
}

/// NPDI plus twice DPDI.
pub fn gpdit(block: &CorrelatorBlock) -> Result<f64> {
    require_len(block, "gpdit", 2)?;
    Ok(npdi(block) + 2.0 * dpdi(block)?)
}

/// `Σ |y_k|² + |Σ y_k²|`: NPDI plus the squaring detector.
pub fn npdisd(block: &CorrelatorBlock) -> f64 {
    let squares = block
        .iter()
        .fold(ComplexSample::ZERO, |acc, &y| acc.add(y.mul(y)));
    npdi(block) + squares.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(pairs: &[(f64, f64)]) -> CorrelatorBlock {
        CorrelatorBlock::from_pairs(pairs).unwrap()
    }

    #[test]
    fn coherent_values() {
        assert_eq!(coherent(&b(&[(1.0, 0.0), (1.0, 0.0)])), 2.0);
        assert_eq!(coherent(&b(&[(1.0, 0.0), (-1.0, 0.0)])), 0.0);
        assert_eq!(coherent(&b(&[(3.0, 4.0)])), 5.0);
    }

    #[test]
    fn npdi_values() {
        assert_eq!(npdi(&b(&[(3.0, 4.0)])), 25.0);
        assert_eq!(npdi(&b(&[(1.0, 0.0), (0.0, 1.0)])), 2.0);
        assert_eq!(npdi(&b(&[(0.0, 0.0); 3])), 0.0);
    }

    #[test]
    fn dpdi_values() {
        assert!((dpdi(&b(&[(1.0, 1.0), (1.0, 1.0)])).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(dpdi(&b(&[(1.0, 0.0), (-1.0, 0.0)])).unwrap(), 1.0);
        assert_eq!(
            dpdi(&b(&[(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)])).unwrap(),
            2.0
        );
        assert_eq!(
            dpdi(&b(&[(1.0, 0.0)])),
            Err(PdiError::BlockTooShort {
                detector: "dpdi",
                needed: 2,
                got: 1
            })
        );
    }

    #[test]
    fn nq_npdi_values() {
        assert_eq!(nq_npdi(&b(&[(3.0, 4.0), (0.0, 0.0)])), 5.0);
        assert_eq!(nq_npdi(&b(&[(1.0, 0.0), (-1.0, 0.0)])), 2.0);
        assert!((nq_npdi(&b(&[(0.6, 0.8)])) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gpdit_values() {
        assert_eq!(gpdit(&b(&[(1.0, 0.0), (1.0, 0.0)])).unwrap(), 4.0);
        assert_eq!(gpdit(&b(&[(1.0, 0.0), (-1.0, 0.0)])).unwrap(), 4.0);
        assert_eq!(gpdit(&b(&[(0.0, 0.0), (0.0, 0.0)])).unwrap(), 0.0);
        assert!(gpdit(&b(&[(1.0, 0.0)])).is_err());
    }

    #[test]
    fn npdisd_values() {
        assert_eq!(npdisd(&b(&[(1.0, 0.0), (0.0, 1.0)])), 2.0);
        assert_eq!(npdisd(&b(&[(1.0, 0.0), (-1.0, 0.0)])), 4.0);
        assert_eq!(npdisd(&b(&[(1.0, 0.0)])), 2.0);
        assert_eq!(npdisd(&b(&[(-1.0, 0.0)])), 2.0);
    }
}
