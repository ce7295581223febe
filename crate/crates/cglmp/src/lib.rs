//! Extremal quantum values of the d-outcome CGLMP Bell inequality.
//!
//! The CGLMP inequality in its correlation-function form,
//! `I_d = Q11 + Q12 - Q21 + Q22`, is bounded classically by
//! `-2(d+1)/(d-1) <= I_d <= 2` (lower bound `-2` at `d = 2`). Quantum
//! states violate both bounds. For measurements realised by unbiased
//! multiport beam splitters with tunable phase shifters, the quantum
//! value of `I_d` on a Schmidt-decomposed state is a quadratic form
//! `I_d = <a|B|a>` in the Schmidt coefficients, where `B` is a real
//! symmetric d x d matrix with zero diagonal determined entirely by the
//! phase settings. Maximising (or minimising) the violation over states
//! is therefore an extremal eigenvalue problem for `B`.
//!
//! The crate is organised around that reduction:
//!
//! - [`inequality`]: the functional itself — joint probabilities, the
//!   slow probability-path evaluation of `I_d`, the O(d^2) closed form,
//!   classical bounds, white-noise thresholds, entanglement entropy.
//! - [`rules`]: the phase assignments that extremise each side, in the
//!   uniform `n_j` bookkeeping format.
//! - [`operator`]: the Bell matrix, dense or in Toeplitz-structured form
//!   with an FFT matvec for large `d`.
//! - [`solver`]: shifted power iteration for the extremal eigenpairs,
//!   plus a full-spectrum oracle used for validation.
//! - [`classical`]: brute-force enumeration of local deterministic
//!   strategies, an independent check of the classical bounds.
//! - [`search`]: derivative-free search over arbitrary phase settings at
//!   small `d`, to confirm the rules empirically.
//!
//! With the `parallel` feature (default) the heavy inner loops run on
//! rayon; without it every kernel falls back to an equivalent sequential
//! implementation producing bit-identical results.

pub mod classical;
pub mod error;
pub mod inequality;
pub mod operator;
pub mod rules;
pub mod search;
pub mod solver;
mod toeplitz;
pub mod types;
mod util;

pub use classical::{classical_extremes, ClassicalExtremes, DeterministicStrategy};
pub use error::{Error, Result};
pub use inequality::{
    bell_value_closed_form, bell_value_from_probabilities,
    bell_value_from_probabilities_with_noise, classical_bounds, correlation_eigenvalue,
    correlation_function, correlation_function_with_noise, entropy_ratio, joint_probability,
    joint_probability_with_noise, noise_threshold_negative, noise_threshold_positive,
    NoiseThreshold,
};
pub use operator::{element_general, element_rule, BellMatrix, Representation, DEFAULT_DENSE_CAP};
pub use rules::{negative_rule, phases_from_rule, positive_rule, PhaseRule, Side};
pub use search::{objective, search, RestartRecord, SearchOutcome, SearchProblem};
pub use solver::{
    extreme_eigen, extreme_eigen_observed, full_spectrum_oracle, max_eigen, min_eigen, EigenResult,
    Extreme, SolverConfig,
};
pub use types::{Dimension, NoiseModel, PhaseSettings, SchmidtState, Setting};
