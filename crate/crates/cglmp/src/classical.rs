//! Brute-force enumeration of local deterministic strategies.
//!
//! Deterministic strategies are the extreme points of local realistic
//! models, so scanning all d^4 outcome assignments recovers the
//! classical bounds independently of the closed-form expression for
//! them. Each strategy's I_d is a sum of four correlation eigenvalues,
//! accumulated as the integer 2S * I_d so the comparison at the bound
//! is exact.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::types::Dimension;

/// Enumeration cap: d^4 strategies is 160k at the cap.
pub const CLASSICAL_CAP: usize = 20;

/// Fixed outcomes a deterministic local model assigns to the four
/// measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeterministicStrategy {
    pub a1: usize,
    pub a2: usize,
    pub b1: usize,
    pub b2: usize,
}

/// Extremes over all deterministic strategies, with first-found
/// witnesses in lexicographic (a1, a2, b1, b2) order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalExtremes {
    pub min: f64,
    pub max: f64,
    pub argmin: DeterministicStrategy,
    pub argmax: DeterministicStrategy,
}

/// 2 * f^{ij}(m,n) = (d-1) - 2 * ((eps * (m+n)) mod d), always an
/// integer.
#[inline]
fn two_f(eps: i64, m: usize, n: usize, d: i64) -> i64 {
    (d - 1) - 2 * (eps * (m + n) as i64).rem_euclid(d)
}

/// Integer score 2S * I_d of one strategy.
#[inline]
fn strategy_score(s: DeterministicStrategy, d: i64) -> i64 {
    two_f(1, s.a1, s.b1, d) + two_f(-1, s.a1, s.b2, d) - two_f(1, s.a2, s.b1, d)
        + two_f(1, s.a2, s.b2, d)
}

#[inline]
fn strategy_at(idx: usize, d: usize) -> DeterministicStrategy {
    DeterministicStrategy {
        a1: idx / (d * d * d),
        a2: (idx / (d * d)) % d,
        b1: (idx / d) % d,
        b2: idx % d,
    }
}

/// Running extremes in integer score space, tie-broken toward the
/// smallest strategy index so parallel and sequential scans agree.
#[derive(Clone, Copy)]
struct Fold {
    min_score: i64,
    min_idx: usize,
    max_score: i64,
    max_idx: usize,
}

impl Fold {
    const EMPTY: Fold = Fold {
        min_score: i64::MAX,
        min_idx: usize::MAX,
        max_score: i64::MIN,
        max_idx: usize::MAX,
    };

    fn absorb(mut self, score: i64, idx: usize) -> Fold {
        if score < self.min_score || (score == self.min_score && idx < self.min_idx) {
            self.min_score = score;
            self.min_idx = idx;
        }
        if score > self.max_score || (score == self.max_score && idx < self.max_idx) {
            self.max_score = score;
            self.max_idx = idx;
        }
        self
    }

    fn merge(self, other: Fold) -> Fold {
        self.absorb(other.min_score, other.min_idx)
            .absorb(other.max_score, other.max_idx)
    }
}

fn extremes_from_fold(fold: Fold, du: usize) -> ClassicalExtremes {
    // score = 2S * I_d = (d-1) * I_d; one exact integer-to-float
    // division recovers I_d.
    let denom = (du - 1) as f64;
    ClassicalExtremes {
        min: fold.min_score as f64 / denom,
        max: fold.max_score as f64 / denom,
        argmin: strategy_at(fold.min_idx, du),
        argmax: strategy_at(fold.max_idx, du),
    }
}

fn check_cap(d: Dimension) -> Result<usize> {
    let du = d.get();
    if du > CLASSICAL_CAP {
        return Err(Error::InvalidArgument(format!(
            "classical enumeration is capped at d = {CLASSICAL_CAP}, got {du}"
        )));
    }
    Ok(du)
}

/// Scan all d^4 strategies; dispatches to the parallel scan when the
/// `parallel` feature is on. Both produce identical results.
pub fn classical_extremes(d: Dimension) -> Result<ClassicalExtremes> {
    #[cfg(feature = "parallel")]
    return classical_extremes_par(d);
    #[cfg(not(feature = "parallel"))]
    classical_extremes_seq(d)
}

/// Sequential scan in lexicographic order.
pub fn classical_extremes_seq(d: Dimension) -> Result<ClassicalExtremes> {
    let du = check_cap(d)?;
    let di = du as i64;
    let mut fold = Fold::EMPTY;
    for idx in 0..du.pow(4) {
        fold = fold.absorb(strategy_score(strategy_at(idx, du), di), idx);
    }
    Ok(extremes_from_fold(fold, du))
}

/// Parallel scan; partitions fold locally and merge with the same
/// index tie-break, so the witnesses match the sequential scan exactly.
#[cfg(feature = "parallel")]
pub fn classical_extremes_par(d: Dimension) -> Result<ClassicalExtremes> {
    let du = check_cap(d)?;
    let di = du as i64;
    let fold = (0..du.pow(4))
        .into_par_iter()
        .fold(
            || Fold::EMPTY,
            |acc, idx| acc.absorb(strategy_score(strategy_at(idx, du), di), idx),
        )
        .reduce(|| Fold::EMPTY, Fold::merge);
    Ok(extremes_from_fold(fold, du))
}
