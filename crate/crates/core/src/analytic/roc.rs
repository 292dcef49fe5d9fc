use serde::{Deserialize, Serialize};

use super::special::{inverse_upper_regularized_gamma, marcum_q, upper_regularized_gamma};
use crate::error::{PdiError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub pfa: f64,
    pub pd: f64,
}

fn check_pfa(pfa: f64) -> Result<()> {
    if pfa > 0.0 && pfa < 1.0 {
        Ok(())
    } else {
        Err(PdiError::InvalidProbability(pfa))
    }
}

fn block_len(n: usize) -> u32 {
    assert!(n >= 1, "block length must be positive");
    u32::try_from(n).expect("block length fits in u32")
}

/// Threshold on `|Σ y_k|`: under H0 the sum is `CN(0, Nσ²)`, so its
/// modulus is Rayleigh and `Pfa = exp(-γ² / (Nσ²))`.
pub fn coherent_threshold(n: usize, sigma_sq: f64, pfa: f64) -> Result<f64> {
    check_pfa(pfa)?;
    Ok((-(n as f64) * sigma_sq * pfa.ln()).sqrt())
}

pub fn coherent_pfa_at_threshold(n: usize, sigma_sq: f64, threshold: f64) -> f64 {
    (-threshold * threshold / (n as f64 * sigma_sq))
        .exp()
        .min(1.0)
}

/// Detection probability of `|Σ y_k| > γ` without bits.
pub fn coherent_pd_at_threshold(n: usize, snr: f64, sigma_sq: f64, threshold: f64) -> f64 {
    let nf = n as f64;
    marcum_q(
        1,
        (2.0 * nf * snr).sqrt(),
        threshold / (nf * sigma_sq / 2.0).sqrt(),
    )
}

/// Closed-form ROC point of coherent integration (constant phase, no bits).
pub fn coherent_roc(n: usize, snr: f64, pfa: f64) -> Result<RocPoint> {
    check_pfa(pfa)?;
    let nf = block_len(n) as f64;
    let pd = marcum_q(1, (2.0 * nf * snr).sqrt(), (-2.0 * pfa.ln()).sqrt());
    Ok(RocPoint { pfa, pd })
}

/// Threshold on `Σ |y_k|²`: under H0 `(2/σ²) Σ|y_k|²` is central χ² with
/// `2N` degrees of freedom, so `Pfa = Q(N, γ/σ²)`.
pub fn npdi_threshold(n: usize, sigma_sq: f64, pfa: f64) -> Result<f64> {
    check_pfa(pfa)?;
    Ok(sigma_sq * inverse_upper_regularized_gamma(block_len(n), pfa))
}

pub fn npdi_pfa_at_threshold(n: usize, sigma_sq: f64, threshold: f64) -> f64 {
    upper_regularized_gamma(block_len(n), threshold / sigma_sq)
}

/// Detection probability of `Σ |y_k|² > γ`; the statistic is noncentral χ²
/// with `2N` degrees of freedom and noncentrality `2 N SNR`.
pub fn npdi_pd_at_threshold(n: usize, snr: f64, sigma_sq: f64, threshold: f64) -> f64 {
    let m = block_len(n);
    marcum_q(
        m,
        (2.0 * f64::from(m) * snr).sqrt(),
        (2.0 * threshold / sigma_sq).sqrt(),
    )
}

/// Closed-form ROC point of NPDI. The magnitude squared removes bit signs,
/// so this holds with or without bits.
pub fn npdi_roc(n: usize, snr: f64, pfa: f64) -> Result<RocPoint> {
    check_pfa(pfa)?;
    let m = block_len(n);
    let t = inverse_upper_regularized_gamma(m, pfa);
    let pd = marcum_q(m, (2.0 * f64::from(m) * snr).sqrt(), (2.0 * t).sqrt());
    Ok(RocPoint { pfa, pd })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PFAS: [f64; 7] = [1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.3, 0.7];

    #[test]
    fn chance_line_at_zero_snr() {
        for n in [1, 3, 6, 15] {
            for pfa in PFAS {
                assert!((coherent_roc(n, 0.0, pfa).unwrap().pd - pfa).abs() < 1e-12);
                assert!((npdi_roc(n, 0.0, pfa).unwrap().pd - pfa).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn saturates_as_pfa_approaches_one() {
        assert!(coherent_roc(6, 0.5, 1.0 - 1e-12).unwrap().pd > 1.0 - 1e-9);
        assert!(npdi_roc(6, 0.5, 1.0 - 1e-12).unwrap().pd > 1.0 - 1e-6);
    }

    #[test]
    fn single_sample_curves_coincide() {
        for snr in [0.3, 1.0, 2.56, 8.0] {
            for pfa in PFAS {
                let c = coherent_roc(1, snr, pfa).unwrap().pd;
                let p = npdi_roc(1, snr, pfa).unwrap().pd;
                assert!((c - p).abs() < 1e-10, "snr {snr} pfa {pfa}");
            }
        }
    }

    #[test]
    fn strictly_increasing_in_pfa_and_snr() {
        for n in [2, 6, 15] {
            for snr in [0.2, 1.0, 2.56] {
                let mut prev = (0.0, 0.0);
                for pfa in PFAS {
                    let c = coherent_roc(n, snr, pfa).unwrap().pd;
                    let p = npdi_roc(n, snr, pfa).unwrap().pd;
                    assert!(c > prev.0 && p > prev.1);
                    prev = (c, p);
                    let c_hi = coherent_roc(n, snr * 1.1, pfa).unwrap().pd;
                    let p_hi = npdi_roc(n, snr * 1.1, pfa).unwrap().pd;
                    // pd may round to exactly 1 once saturated
                    assert!((c_hi > c || c_hi == 1.0) && (p_hi > p || p_hi == 1.0));
                }
            }
        }
    }

    #[test]
    fn coherent_dominates_npdi() {
        for n in [1, 2, 6, 10, 15] {
            for snr in [0.1, 0.5, 1.0, 2.56] {
                for pfa in PFAS {
                    let c = coherent_roc(n, snr, pfa).unwrap();
                    let p = npdi_roc(n, snr, pfa).unwrap();
                    assert!(c.pd >= p.pd - 1e-12);
                    assert!(c.pd >= pfa && p.pd >= pfa);
                }
            }
        }
    }

    #[test]
    fn thresholds_invert_false_alarm() {
        for pfa in PFAS {
            let g = coherent_threshold(6, 1.0, pfa).unwrap();
            assert!((coherent_pfa_at_threshold(6, 1.0, g) - pfa).abs() < 1e-14);
            let g = npdi_threshold(6, 1.0, pfa).unwrap();
            assert!((npdi_pfa_at_threshold(6, 1.0, g) - pfa).abs() < 1e-12);
            let roc = coherent_roc(6, 2.56, pfa).unwrap().pd;
            let g = coherent_threshold(6, 1.0, pfa).unwrap();
            assert!((coherent_pd_at_threshold(6, 2.56, 1.0, g) - roc).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_out_of_range_pfa() {
        assert_eq!(
            coherent_roc(6, 1.0, 0.0),
            Err(PdiError::InvalidProbability(0.0))
        );
        assert!(npdi_roc(6, 1.0, 1.0).is_err());
        assert!(npdi_threshold(6, 1.0, -0.1).is_err());
    }
}
