//! Enumeration of the bit-sign hypotheses behind the Bayesian statistics.
//!
//! Unknown bits make the likelihood a sum over every sign pattern `d`, up
//! to a global sign flip (which the uniform phase absorbs). That leaves
//! `2^(N-1)` patterns with `d_1 = +1`; for each one the detector needs
//! `a + jb = Σ_k d_k y_k`. The stream below visits the patterns in Gray-code
//! order, so consecutive patterns differ in one sign and each step costs two
//! additions whatever `N` is.

use crate::error::{PdiError, Result};
use crate::signal_model::CorrelatorBlock;

/// Largest block length accepted for exact enumeration.
pub const MAX_ENUMERATION_LEN: usize = 25;

/// Number of incremental steps between direct recomputations of `(a, b)`.
pub const REANCHOR_INTERVAL: u64 = 1 << 16;

fn check_capacity(n: usize) -> Result<()> {
    if n == 0 {
        return Err(PdiError::EmptyBlock);
    }
    if n > MAX_ENUMERATION_LEN {
        return Err(PdiError::Capacity {
            n,
            cap: MAX_ENUMERATION_LEN,
        });
    }
    Ok(())
}

/// Number of sign combinations for a block of length `n`.
pub fn combination_count(n: usize) -> u64 {
    1u64 << (n - 1)
}

/// Materialized sign matrix, one `±1` row per combination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignMatrix {
    n: usize,
    rows: Vec<Vec<i8>>,
}

impl SignMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Vec<i8>] {
        &self.rows
    }

    /// `(M I, M Q)` by direct matrix-vector products.
    pub fn apply(&self, block: &CorrelatorBlock) -> Vec<(f64, f64)> {
        assert_eq!(
            block.len(),
            self.n,
            "block length does not match the sign matrix"
        );
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(block.iter())
                    .fold((0.0, 0.0), |(a, b), (&d, s)| {
                        let d = f64::from(d);
                        (a + d * s.i, b + d * s.q)
                    })
            })
            .collect()
    }
}

/// Pattern for mask bits `mask` (bit `j` set means element `j + 1` is `+1`).
fn signs_for_mask(n: usize, mask: u64) -> Vec<i8> {
    let mut row = Vec::with_capacity(n);
    row.push(1);
    for j in 0..n - 1 {
        row.push(if mask >> j & 1 == 1 { 1 } else { -1 });
    }
    row
}

/// Canonical sign matrix: row `r` holds `+1` first, then element `k ≥ 2`
/// is `+1` when bit `k - 2` of `r` is set and `-1` otherwise.
pub fn sign_matrix(n: usize) -> Result<SignMatrix> {
    check_capacity(n)?;
    let rows = (0..combination_count(n))
        .map(|r| signs_for_mask(n, r))
        .collect();
    Ok(SignMatrix { n, rows })
}

/// Incremental `(a_m, b_m)` stream over a contiguous range of Gray-code steps.
#[derive(Debug, Clone)]
pub struct SignCombinations<'a> {
    block: &'a CorrelatorBlock,
    step: u64,
    end: u64,
    a: f64,
    b: f64,
    primed: bool,
}

impl<'a> SignCombinations<'a> {
    /// All `2^(N-1)` combinations.
    pub fn new(block: &'a CorrelatorBlock) -> Result<Self> {
        let n = block.len();
        check_capacity(n)?;
        Self::range(block, 0, combination_count(n))
    }

    /// Gray-code steps `start..end`, seeded by one direct evaluation at `start`.
    /// Disjoint ranges covering `0..2^(N-1)` visit every combination once.
    pub fn range(block: &'a CorrelatorBlock, start: u64, end: u64) -> Result<Self> {
        let n = block.len();
        check_capacity(n)?;
        let total = combination_count(n);
        let end = end.min(total);
        let start = start.min(end);
        let (a, b) = direct(block, gray(start));
        Ok(Self {
            block,
            step: start,
            end,
            a,
            b,
            primed: false,
        })
    }

    /// Sign pattern of the combination the stream will yield next.
    pub fn current_mask(&self) -> u64 {
        gray(self.step + u64::from(self.primed))
    }
}

#[inline]
fn gray(m: u64) -> u64 {
    m ^ (m >> 1)
}

/// `Σ d_k y_k` for the pattern encoded by `mask`.
fn direct(block: &CorrelatorBlock, mask: u64) -> (f64, f64) {
    let s = block.samples();
    let (mut a, mut b) = (s[0].i, s[0].q);
    for (j, y) in s[1..].iter().enumerate() {
        if mask >> j & 1 == 1 {
            a += y.i;
            b += y.q;
        } else {
            a -= y.i;
            b -= y.q;
        }
    }
    (a, b)
}

impl Iterator for SignCombinations<'_> {
    type Item = (f64, f64);

    #[inline]
    fn next(&mut self) -> Option<(f64, f64)> {
        if !self.primed {
            if self.step >= self.end {
                return None;
            }
            self.primed = true;
            return Some((self.a, self.b));
        }
        let next = self.step + 1;
        if next >= self.end {
            self.step = self.end;
            return None;
        }
        self.step = next;
        if next.is_multiple_of(REANCHOR_INTERVAL) {
            (self.a, self.b) = direct(self.block, gray(next));
        } else {
            let j = next.trailing_zeros() as usize;
            let y = self.block.samples()[j + 1];
            if gray(next) >> j & 1 == 1 {
                self.a += 2.0 * y.i;
                self.b += 2.0 * y.q;
            } else {
                self.a -= 2.0 * y.i;
                self.b -= 2.0 * y.q;
            }
        }
        Some((self.a, self.b))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.step).saturating_sub(u64::from(self.primed)) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for SignCombinations<'_> {}

/// `√(a_m² + b_m²)` for every combination, in Gray-code order.
pub fn combination_magnitudes(block: &CorrelatorBlock) -> Result<impl Iterator<Item = f64> + '_> {
    Ok(SignCombinations::new(block)?.map(|(a, b)| (a * a + b * b).sqrt()))
}
