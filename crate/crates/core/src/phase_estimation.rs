//! Carrier-phase estimation under unknown data bits.
//!
//! Averaging the likelihood over equiprobable bits gives the objective
//! `L(φ) = Σ_k ln cosh((2A/σ²)(I_k cos φ + Q_k sin φ))`, which is even in
//! each term and therefore π-periodic: only the phase modulo π is
//! identifiable. Estimates live on the half-circle `[-π/2, π/2)`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::analytic::ln_cosh;
use crate::detectors::{DetectorContext, SearchOptions};
use crate::signal_model::CorrelatorBlock;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseEstimate {
    /// Radians in `[-π/2, π/2)`.
    pub phi_hat: f64,
    /// Log-likelihood at `phi_hat`. Zero for the closed-form estimator,
    /// which has no context to evaluate it with.
    pub objective_value: f64,
}

/// Maps an angle onto `[-π/2, π/2)`.
pub fn wrap_half_circle(phi: f64) -> f64 {
    let w = phi - PI * ((phi + FRAC_PI_2) / PI).floor();
    // floor rounding can land exactly on the excluded endpoint
    if w >= FRAC_PI_2 {
        w - PI
    } else if w < -FRAC_PI_2 {
        w + PI
    } else {
        w
    }
}

/// Distance between two phases modulo π.
pub fn phase_error(phi_hat: f64, phi_true: f64) -> f64 {
    wrap_half_circle(phi_hat - phi_true).abs()
}

/// Cramér-Rao bound `1 / (2 SNR N)` on the phase variance, rad².
pub fn crb_phase(snr: f64, n: usize) -> f64 {
    1.0 / (2.0 * snr * n as f64)
}

/// `Σ_k ln cosh(scale · (I_k cos φ + Q_k sin φ))`.
#[inline]
fn objective(block: &CorrelatorBlock, scale: f64, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    block
        .iter()
        .map(|y| ln_cosh(scale * (y.i * c + y.q * s)))
        .sum()
}

pub fn log_likelihood_phase(block: &CorrelatorBlock, ctx: &DetectorContext, phi: f64) -> f64 {
    objective(block, ctx.scale(), phi)
}

fn is_all_zero(block: &CorrelatorBlock) -> bool {
    block.iter().all(|y| y.i == 0.0 && y.q == 0.0)
}

/// `½ atan2(2 Σ I_k Q_k, Σ (I_k² − Q_k²))`: the exact maximizer of the
/// small-argument surrogate `ln cosh x ≈ x²/2`. Bit signs cancel in both
/// sums, so no context is needed.
pub fn phase_ml_closed_form(block: &CorrelatorBlock) -> PhaseEstimate {
    let (cross, diff) = block.iter().fold((0.0, 0.0), |(c, d), y| {
        (c + y.i * y.q, d + (y.i * y.i - y.q * y.q))
    });
    let phi_hat = if cross == 0.0 && diff == 0.0 {
        0.0
    } else {
        wrap_half_circle(0.5 * (2.0 * cross).atan2(diff))
    };
    PhaseEstimate {
        phi_hat,
        objective_value: 0.0,
    }
}

/// Golden-section maximization over `[lo, hi]`; returns the best point seen.
fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: u32) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Maximizes the log-likelihood by a coarse grid over the half-circle
/// followed by golden-section refinement in the winning cell.
///
/// The closed-form estimate is refined as a second starting point, so the
/// result never scores below it.
pub fn phase_ml_search(
    block: &CorrelatorBlock,
    ctx: &DetectorContext,
    opts: &SearchOptions,
) -> PhaseEstimate {
    if is_all_zero(block) {
        return PhaseEstimate {
            phi_hat: 0.0,
            objective_value: 0.0,
        };
    }
    let scale = ctx.scale();
    let f = |phi: f64| objective(block, scale, phi);
    let g = opts.grid_points.max(SearchOptions::MIN_GRID_POINTS);
    let step = PI / g as f64;

    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for j in 0..g {
        let phi = -FRAC_PI_2 + j as f64 * step;
        let v = f(phi);
        if v > best.1 {
            best = (phi, v);
        }
    }

    let cf = phase_ml_closed_form(block).phi_hat;
    let mut candidates = vec![best, (cf, f(cf))];
    for centre in [best.0, cf] {
        candidates.push(golden_section_max(
            f,
            centre - step,
            centre + step,
            opts.refine_iters,
        ));
    }
    let (phi, _) =
        candidates.into_iter().fold(
            (0.0, f64::NEG_INFINITY),
            |acc, c| if c.1 > acc.1 { c } else { acc },
        );

    let phi_hat = wrap_half_circle(phi);
    PhaseEstimate {
        phi_hat,
        objective_value: f(phi_hat),
    }
}
