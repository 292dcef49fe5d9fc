//! Bayesian and GLRT statistics for unknown phase and unknown bits.

use crate::analytic::{ln_cosh, special::bessel_i0_shifted};
use crate::detectors::{DetectorContext, SearchOptions};
use crate::error::Result;
use crate::phase_estimation::{phase_ml_closed_form, phase_ml_search};
use crate::sign_enumeration::SignCombinations;
use crate::signal_model::CorrelatorBlock;

/// Largest `a_m² + b_m²` over all sign combinations.
fn max_combination_power(block: &CorrelatorBlock) -> Result<f64> {
    Ok(SignCombinations::new(block)?.fold(0.0, |m, (a, b)| m.max(a * a + b * b)))
}

/// Bayesian-optimal statistic `ln Σ_m I₀((2A/σ²) √(a_m² + b_m²))`.
///
/// The Bessel sum itself overflows once any argument passes ~713, so it is
/// returned in the log domain. A first pass finds the largest argument
/// `x_max`; the second accumulates `I₀(x_m) e^{-x_max}`, which is at most
/// `1` per term.
pub fn bapdi(block: &CorrelatorBlock, ctx: &DetectorContext) -> Result<f64> {
    let scale = ctx.scale();
    let x_max = scale * max_combination_power(block)?.sqrt();
    let exp_neg = (-x_max).exp();
    let sum: f64 = SignCombinations::new(block)?
        .map(|(a, b)| bessel_i0_shifted(scale * (a * a + b * b).sqrt(), x_max, exp_neg))
        .sum();
    Ok(x_max + sum.ln())
}

/// `max_m √(a_m² + b_m²)`: the dominant term of the Bessel sum, free of
/// `A` and `σ`.
pub fn mbapdi(block: &CorrelatorBlock) -> Result<f64> {
    Ok(max_combination_power(block)?.sqrt())
}

/// Log-likelihood at the maximum found by the one-dimensional search.
pub fn glrt_strict(block: &CorrelatorBlock, ctx: &DetectorContext, opts: &SearchOptions) -> f64 {
    phase_ml_search(block, ctx, opts).objective_value
}

/// Log-likelihood at the closed-form phase estimate.
pub fn glrt_closed_form(block: &CorrelatorBlock, ctx: &DetectorContext) -> f64 {
    let phi = phase_ml_closed_form(block).phi_hat;
    let (s, c) = phi.sin_cos();
    let scale = ctx.scale();
    block
        .iter()
        .map(|y| ln_cosh(scale * (y.i * c + y.q * s)))
        .sum()
}

/// `Σ_k |I_k cos φ̂ + Q_k sin φ̂|` with the closed-form `φ̂`; the large-argument
/// limit `ln cosh x ≈ |x| − ln 2` with the scale factors dropped.
pub fn glrt_high_snr(block: &CorrelatorBlock) -> f64 {
    let phi = phase_ml_closed_form(block).phi_hat;
    let (s, c) = phi.sin_cos();
    block.iter().map(|y| (y.i * c + y.q * s).abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_model::ComplexSample;
    use std::f64::consts::LN_2;

    fn b(pairs: &[(f64, f64)]) -> CorrelatorBlock {
        CorrelatorBlock::from_pairs(pairs).unwrap()
    }

    fn ctx11() -> DetectorContext {
        DetectorContext::new(1.0, 1.0).unwrap()
    }

    /// Direct series: Σ (x/2)^{2k} / (k!)², 60 terms.
    fn i0_oracle(x: f64) -> f64 {
        let (mut t, mut s) = (1.0, 1.0);
        for k in 1..60 {
            t *= (x * x / 4.0) / (k * k) as f64;
            s += t;
        }
        s
    }

    #[test]
    fn bapdi_values() {
        let want = (i0_oracle(0.0) + i0_oracle(4.0)).ln();
        assert!((want - 2.50975).abs() < 1e-5);
        let got = bapdi(&b(&[(1.0, 0.0), (1.0, 0.0)]), &ctx11()).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        let flipped = bapdi(&b(&[(1.0, 0.0), (-1.0, 0.0)]), &ctx11()).unwrap();
        assert!((flipped - want).abs() < 1e-12);
        let zero = bapdi(
            &b(&[(0.0, 0.0), (0.0, 0.0)]),
            &DetectorContext::new(3.0, 0.5).unwrap(),
        )
        .unwrap();
        assert!((zero - LN_2).abs() < 1e-15);
    }

    #[test]
    fn bapdi_is_finite_far_past_bessel_overflow() {
        let big = b(&[(400.0, 0.0), (400.0, 0.0), (-3.0, 1.0)]);
        let v = bapdi(&big, &ctx11()).unwrap();
        assert!(v.is_finite() && v > 1000.0);
    }

    #[test]
    fn bapdi_rejects_oversized_blocks() {
        let big = CorrelatorBlock::new(vec![ComplexSample::new(0.1, 0.0); 26]).unwrap();
        assert!(bapdi(&big, &ctx11()).unwrap_err().is_capacity());
        assert!(mbapdi(&big).unwrap_err().is_capacity());
    }

    #[test]
    fn mbapdi_values() {
        assert_eq!(mbapdi(&b(&[(1.0, 0.0), (1.0, 0.0)])).unwrap(), 2.0);
        assert_eq!(mbapdi(&b(&[(1.0, 0.0), (-1.0, 0.0)])).unwrap(), 2.0);
        assert_eq!(mbapdi(&b(&[(3.0, 4.0), (0.0, 0.0)])).unwrap(), 5.0);
    }

    #[test]
    fn glrt_values() {
        let lc2 = 2f64.cosh().ln();
        assert!((lc2 - 1.32501).abs() < 1e-5);
        let opts = SearchOptions::default();
        assert!((glrt_strict(&b(&[(1.0, 0.0)]), &ctx11(), &opts) - lc2).abs() < 1e-9);
        assert!((glrt_closed_form(&b(&[(1.0, 0.0)]), &ctx11()) - lc2).abs() < 1e-12);
        assert!((glrt_closed_form(&b(&[(0.0, 1.0)]), &ctx11()) - lc2).abs() < 1e-12);
        let zero = b(&[(0.0, 0.0); 3]);
        assert_eq!(glrt_strict(&zero, &ctx11(), &opts), 0.0);
        assert_eq!(glrt_closed_form(&zero, &ctx11()), 0.0);
        assert_eq!(glrt_high_snr(&zero), 0.0);
    }

    #[test]
    fn glrt_high_snr_values() {
        assert_eq!(glrt_high_snr(&b(&[(1.0, 0.0), (-1.0, 0.0)])), 2.0);
        assert!((glrt_high_snr(&b(&[(0.0, 2.0), (0.0, -2.0)])) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn strict_and_closed_form_agree_without_noise() {
        let opts = SearchOptions::default();
        for phi in [0.2, -0.9, 1.4, 2.8] {
            let signs = [1.0, -1.0, -1.0, 1.0, 1.0, -1.0, 1.0];
            let block = CorrelatorBlock::new(
                signs
                    .iter()
                    .map(|&d| ComplexSample::from_polar(d, phi))
                    .collect(),
            )
            .unwrap();
            let s = glrt_strict(&block, &ctx11(), &opts);
            let c = glrt_closed_form(&block, &ctx11());
            assert!((s - c).abs() < 1e-6);
        }
    }
}
