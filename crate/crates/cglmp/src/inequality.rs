//! The CGLMP functional and its diagnostics.
//!
//! Two independent evaluation paths are kept deliberately. The
//! probability path assembles `I_d = Q11 + Q12 - Q21 + Q22` from joint
//! outcome probabilities at O(d^4) per evaluation; the closed form
//! collapses the same quantity to a double sum over Schmidt index pairs
//! at O(d^2). They must agree to 1e-10 on any input, which is the main
//! correctness check for everything downstream.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::types::{Dimension, NoiseModel, PhaseSettings, SchmidtState, Setting};
use crate::util::KahanSum;

/// Local-realistic bounds on I_d: `lower <= I_d <= upper` for any LHV
/// model. The upper bound is 2 for every d; the lower bound is -2 at
/// d = 2 and -2(d+1)/(d-1) otherwise.
pub fn classical_bounds(d: Dimension) -> (f64, f64) {
    let du = d.get();
    let lower = if du == 2 {
        -2.0
    } else {
        // Integer numerator and denominator stay exact in f64 here, so
        // this matches the brute-force oracle's N/(d-1) bit for bit.
        (-(2 * (du as i64 + 1)) as f64) / ((du - 1) as f64)
    };
    (lower, 2.0)
}

fn check_outcome(label: &str, value: usize, d: Dimension) -> Result<()> {
    if value >= d.get() {
        return Err(Error::InvalidArgument(format!(
            "outcome {label} = {value} out of range for d = {d}"
        )));
    }
    Ok(())
}

/// Eigenvalue f^{ij}(m,n) = S - ((eps(i-j) * (m+n)) mod d) of the
/// correlation function, with eps(x) = 1 for x >= 0 and -1 otherwise,
/// and the nonnegative remainder convention for the modulus.
pub fn correlation_eigenvalue(
    alice: Setting,
    bob: Setting,
    m: usize,
    n: usize,
    d: Dimension,
) -> Result<f64> {
    check_outcome("m", m, d)?;
    check_outcome("n", n, d)?;
    let eps: i64 = if alice.index() >= bob.index() { 1 } else { -1 };
    let rem = (eps * (m + n) as i64).rem_euclid(d.get() as i64);
    Ok(d.spin() - rem as f64)
}

fn check_same_dimension(state: &SchmidtState, phases: &PhaseSettings) -> Result<Dimension> {
    let d = state.dimension();
    if phases.dimension() != d {
        return Err(Error::LengthMismatch {
            expected: d.get(),
            actual: phases.dimension().get(),
        });
    }
    Ok(d)
}

/// Joint probability P(A_a = k, B_b = l) for the Schmidt state measured
/// through phase-shifted unbiased multiport beam splitters:
///
/// ```text
/// P = (1/d^2) sum_{j,m} alpha_j alpha_m
///     cos[(2pi/d)(j-m)(k-l) + phi_a(j) - phi_a(m) + vphi_b(j) - vphi_b(m)]
/// ```
pub fn joint_probability(
    state: &SchmidtState,
    phases: &PhaseSettings,
    alice: Setting,
    bob: Setting,
    k: usize,
    l: usize,
) -> Result<f64> {
    let d = check_same_dimension(state, phases)?;
    check_outcome("k", k, d)?;
    check_outcome("l", l, d)?;
    let du = d.get();
    let alphas = state.alphas();
    let pa = phases.alice(alice);
    let pb = phases.bob(bob);
    // (2pi/d)(k-l), applied per (j-m) below.
    let step = TAU / du as f64 * (k as f64 - l as f64);
    let mut acc = KahanSum::new();
    for j in 0..du {
        for m in 0..du {
            let angle = step * (j as f64 - m as f64) + pa[j] - pa[m] + pb[j] - pb[m];
            acc.add(alphas[j] * alphas[m] * angle.cos());
        }
    }
    Ok(acc.value() / (du * du) as f64)
}

/// [`joint_probability`] for the state mixed with a fraction F of
/// uncolored noise: `F/d^2 + (1-F) * P`.
pub fn joint_probability_with_noise(
    state: &SchmidtState,
    phases: &PhaseSettings,
    noise: NoiseModel,
    alice: Setting,
    bob: Setting,
    k: usize,
    l: usize,
) -> Result<f64> {
    let p = joint_probability(state, phases, alice, bob, k, l)?;
    let d2 = state.dimension().get().pow(2) as f64;
    let f = noise.fraction();
    Ok(f / d2 + (1.0 - f) * p)
}

/// Correlation function Q_ij = (1/S) sum_{m,n} f^{ij}(m,n) P_ij(m,n).
/// Always in [-1, 1] up to rounding.
///
/// Label convention: the eigenvalues f^{ij} are written in outcome
/// labels where the correlated event is m + n = 0 (mod d), while
/// [`joint_probability`] is written in beam-splitter port labels where
/// the correlated event is k = l. Bob's port label is the negated
/// outcome label, so the pairing below reads P at (m, (d-n) mod d).
/// This is the unique bridge under which the probability path
/// reproduces the closed form; pairing the labels directly instead
/// makes the four correlation terms cancel for d > 2.
pub fn correlation_function(
    state: &SchmidtState,
    phases: &PhaseSettings,
    alice: Setting,
    bob: Setting,
) -> Result<f64> {
    correlation_function_with_noise(state, phases, NoiseModel::noiseless(), alice, bob)
}

/// [`correlation_function`] on the noisy mixture.
pub fn correlation_function_with_noise(
    state: &SchmidtState,
    phases: &PhaseSettings,
    noise: NoiseModel,
    alice: Setting,
    bob: Setting,
) -> Result<f64> {
    let d = check_same_dimension(state, phases)?;
    let du = d.get();
    let mut acc = KahanSum::new();
    for m in 0..du {
        for n in 0..du {
            let f = correlation_eigenvalue(alice, bob, m, n, d)?;
            let port = (du - n) % du;
            let p = joint_probability_with_noise(state, phases, noise, alice, bob, m, port)?;
            acc.add(f * p);
        }
    }
    Ok(acc.value() / d.spin())
}

/// I_d assembled from joint probabilities with the sign pattern
/// `Q11 + Q12 - Q21 + Q22`. O(d^4); this is the slow oracle path.
pub fn bell_value_from_probabilities(state: &SchmidtState, phases: &PhaseSettings) -> Result<f64> {
    bell_value_from_probabilities_with_noise(state, phases, NoiseModel::noiseless())
}

/// [`bell_value_from_probabilities`] on the noisy mixture. White noise
/// contributes zero to every Q_ij, so this equals (1-F) times the
/// noiseless value; the mixture is still evaluated explicitly so that
/// the identity can be tested rather than assumed.
pub fn bell_value_from_probabilities_with_noise(
    state: &SchmidtState,
    phases: &PhaseSettings,
    noise: NoiseModel,
) -> Result<f64> {
    use Setting::{One, Two};
    let q11 = correlation_function_with_noise(state, phases, noise, One, One)?;
    let q12 = correlation_function_with_noise(state, phases, noise, One, Two)?;
    let q21 = correlation_function_with_noise(state, phases, noise, Two, One)?;
    let q22 = correlation_function_with_noise(state, phases, noise, Two, Two)?;
    Ok(q11 + q12 - q21 + q22)
}

/// I_d via the real-valued closed form:
///
/// ```text
/// I_d = 1/(d-1) sum_{j != m} alpha_j alpha_m / sin[(pi/d)(j-m)] *
///       { -sin[p1 + v1 - x] + sin[p1 + v2 + x]
///         +sin[p2 + v1 - x] - sin[p2 + v2 - x] }
/// ```
///
/// with x = (pi/d)(j-m) and p_a = phi_a(j) - phi_a(m), v_b = vphi_b(j)
/// - vphi_b(m). O(d^2) per evaluation.
pub fn bell_value_closed_form(state: &SchmidtState, phases: &PhaseSettings) -> Result<f64> {
    let d = check_same_dimension(state, phases)?;
    let du = d.get();
    let alphas = state.alphas();
    let pi_d = PI / du as f64;
    let mut acc = KahanSum::new();
    for j in 0..du {
        for m in 0..du {
            if j == m {
                continue;
            }
            let x = pi_d * (j as f64 - m as f64);
            let p1 = phases.phi1[j] - phases.phi1[m];
            let p2 = phases.phi2[j] - phases.phi2[m];
            let v1 = phases.vphi1[j] - phases.vphi1[m];
            let v2 = phases.vphi2[j] - phases.vphi2[m];
            let bracket = -(p1 + v1 - x).sin() + (p1 + v2 + x).sin() + (p2 + v1 - x).sin()
                - (p2 + v2 - x).sin();
            acc.add(alphas[j] * alphas[m] * bracket / x.sin());
        }
    }
    Ok(acc.value() / (du as f64 - 1.0))
}

/// A critical noise fraction together with whether the underlying value
/// violates the classical bound at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseThreshold {
    /// Minimal noise fraction that destroys the violation; 0 when there
    /// is no violation to destroy.
    pub f_min: f64,
    /// True when the input value actually exceeds the classical bound.
    pub violation: bool,
}

impl NoiseThreshold {
    fn from_raw(raw: f64) -> Self {
        if raw > 0.0 {
            Self {
                f_min: raw,
                violation: true,
            }
        } else {
            Self {
                f_min: 0.0,
                violation: false,
            }
        }
    }
}

/// Threshold against the upper bound: F_min = 1 - 2/I_max. Values of
/// i_max at or below 2 mean no violation (reported as f_min = 0).
pub fn noise_threshold_positive(i_max: f64) -> Result<NoiseThreshold> {
    if i_max <= 0.0 || i_max.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "positive-side threshold is defined for i_max > 0, got {i_max}"
        )));
    }
    Ok(NoiseThreshold::from_raw(1.0 - 2.0 / i_max))
}

/// Threshold against the lower bound: F_min = 1 + |lower(d)|/I_min with
/// I_min < 0. Values of i_min at or above the classical lower bound
/// mean no violation.
pub fn noise_threshold_negative(i_min: f64, d: Dimension) -> Result<NoiseThreshold> {
    if i_min >= 0.0 || i_min.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "negative-side threshold is defined for i_min < 0, got {i_min}"
        )));
    }
    let (lower, _) = classical_bounds(d);
    Ok(NoiseThreshold::from_raw(1.0 + (-lower) / i_min))
}

/// Von Neumann entropy of either reduced state, S = -sum alpha_i^2
/// log2(alpha_i^2), and its ratio to the maximum log2(d). Terms with
/// alpha_i = 0 contribute nothing.
pub fn entropy_ratio(state: &SchmidtState) -> (f64, f64) {
    let mut acc = KahanSum::new();
    for &a in state.alphas() {
        let p = a * a;
        if p > 0.0 {
            acc.add(-(p * p.log2()));
        }
    }
    // Normalisation slack can leave a -1e-16 residue on pure states.
    let entropy = acc.value().max(0.0);
    let ratio = entropy / (state.dimension().get() as f64).log2();
    (entropy, ratio)
}
