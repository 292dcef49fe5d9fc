use std::f64::consts::{LN_2, PI};

/// Switch point between the power series and the large-argument expansion.
const SERIES_LIMIT: f64 = 20.0;

const SERIES_TERMS: usize = 64;

/// `1 / k^2` for the power-series recurrence.
const INV_K_SQ: [f64; SERIES_TERMS] = {
    let mut t = [0.0; SERIES_TERMS];
    let mut k = 1;
    while k < SERIES_TERMS {
        t[k] = 1.0 / ((k * k) as f64);
        k += 1;
    }
    t
};

/// `Σ_k (x²/4)^k / (k!)²`, valid for `|x| < SERIES_LIMIT`.
#[inline]
fn i0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for inv in &INV_K_SQ[1..] {
        term *= q * inv;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// `Σ_k c_k x^{-k}` with `c_k = ((2k-1)!!)² / (k! 8^k)`, so that
/// `I₀(x) ≈ e^x / √(2πx) · Σ`. Truncated at the smallest term.
#[inline]
fn i0_asymptotic_sum(x: f64) -> f64 {
    let inv8x = 1.0 / (8.0 * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..64u32 {
        let odd = f64::from(2 * k - 1);
        let next = term * odd * odd * inv8x / f64::from(k);
        if next >= term {
            break;
        }
        term = next;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// `I₀(x) · e^{-shift}` for `x ≥ 0`, given `exp_neg_shift = e^{-shift}`.
/// With `shift` set to the largest argument of a sum this is the summand
/// of a log-domain Bessel sum that cannot overflow.
#[inline]
pub(crate) fn bessel_i0_shifted(x: f64, shift: f64, exp_neg_shift: f64) -> f64 {
    if x < SERIES_LIMIT {
        i0_series(x) * exp_neg_shift
    } else {
        i0_asymptotic_sum(x) / (2.0 * PI * x).sqrt() * (x - shift).exp()
    }
}

/// Zero-order modified Bessel function of the first kind. Overflows to
/// `+∞` beyond `x ≈ 713`; use [`ln_bessel_i0`] there.
pub fn bessel_i0(x: f64) -> f64 {
    let x = x.abs();
    if x < SERIES_LIMIT {
        i0_series(x)
    } else {
        x.exp() / (2.0 * PI * x).sqrt() * i0_asymptotic_sum(x)
    }
}

/// `e^{-|x|} I₀(x)`.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    let x = x.abs();
    if x < SERIES_LIMIT {
        i0_series(x) * (-x).exp()
    } else {
        i0_asymptotic_sum(x) / (2.0 * PI * x).sqrt()
    }
}

/// `ln I₀(x)`, finite for every finite `x`.
pub fn ln_bessel_i0(x: f64) -> f64 {
    let x = x.abs();
    if x < SERIES_LIMIT {
        i0_series(x).ln()
    } else {
        x - 0.5 * (2.0 * PI * x).ln() + i0_asymptotic_sum(x).ln()
    }
}

/// `ln cosh(x)` without overflow.
#[inline]
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// Upper regularized incomplete gamma `Q(n, x) = e^{-x} Σ_{k<n} x^k / k!`
/// for integer `n ≥ 1`, evaluated term by term in the log domain.
pub fn upper_regularized_gamma(n: u32, x: f64) -> f64 {
    assert!(n >= 1, "order must be positive");
    if x <= 0.0 {
        return 1.0;
    }
    let ln_x = x.ln();
    let mut ln_fact = 0.0;
    let mut sum = 0.0;
    for k in 0..n {
        if k > 0 {
            ln_fact += f64::from(k).ln();
        }
        sum += (-x + f64::from(k) * ln_x - ln_fact).exp();
    }
    sum.min(1.0)
}

/// `x` such that `Q(n, x) = p`, for `0 < p < 1`.
pub fn inverse_upper_regularized_gamma(n: u32, p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "probability must lie in (0, 1)");
    let mut lo = 0.0;
    let mut hi = f64::from(n).max(1.0);
    while upper_regularized_gamma(n, hi) > p {
        lo = hi;
        hi *= 2.0;
    }
    // Q is strictly decreasing; bisection to full double resolution.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if upper_regularized_gamma(n, mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Generalized Marcum Q function `Q_m(a, b)`.
///
/// Uses the Poisson mixture
/// `Q_m(a, b) = Σ_j e^{-a²/2} (a²/2)^j / j! · Q(m + j, b²/2)`,
/// which is the Bessel series `e^{-(a²+b²)/2} Σ_{k ≥ 1-m} (a/b)^k I_k(ab)`
/// regrouped into nonnegative terms. The Poisson weights are generated by
/// recurrence outward from the mode and normalised by their own sum, which
/// keeps values near 1 accurate to a few ulps; weights below `1e-18` of
/// the mode weight are dropped.
pub fn marcum_q(m: u32, a: f64, b: f64) -> f64 {
    assert!(m >= 1, "order must be positive");
    assert!(a.is_finite() && b.is_finite(), "arguments must be finite");
    let (a, b) = (a.abs(), b.abs());
    if b == 0.0 {
        return 1.0;
    }
    let x = 0.5 * b * b;
    if a == 0.0 {
        return upper_regularized_gamma(m, x);
    }
    let lambda = 0.5 * a * a;
    let mode = lambda.floor() as u64;

    let mut below = Vec::new();
    let mut w = 1.0;
    let mut j = mode;
    while j > 0 {
        w *= j as f64 / lambda;
        if w < 1e-18 {
            break;
        }
        below.push(w);
        j -= 1;
    }
    let j_lo = mode - below.len() as u64;
    let mut weights: Vec<f64> = below.into_iter().rev().collect();
    weights.push(1.0);
    let (mut w, mut j) = (1.0, mode);
    loop {
        w *= lambda / (j + 1) as f64;
        j += 1;
        if w < 1e-18 {
            break;
        }
        weights.push(w);
    }
    let norm: f64 = weights.iter().sum();

    // Q(n + 1, x) = Q(n, x) + e^{-x} x^n / n!
    let n0 = u64::from(m) + j_lo;
    let n0_u32 = u32::try_from(n0).expect("Marcum order out of range");
    let mut q = upper_regularized_gamma(n0_u32, x);
    let ln_n0_fact: f64 = (2..=n0).map(|k| (k as f64).ln()).sum();
    let mut t = (-x + n0 as f64 * x.ln() - ln_n0_fact).exp();
    let mut n = n0 as f64;
    let mut total = 0.0;
    for &w in &weights {
        total += w * q;
        q = (q + t).min(1.0);
        t *= x / (n + 1.0);
        n += 1.0;
    }
    (total / norm).clamp(0.0, 1.0)
}
