//! Extremal eigenpairs of the Bell matrix by shifted power iteration.
//!
//! The extremes of <a|B|a> over unit vectors are the extreme
//! eigenvalues of B, so the whole optimisation reduces to two power
//! solves. Power iteration finds the eigenvalue largest in magnitude,
//! which for a sign-indefinite B is not necessarily the one wanted;
//! shifting by the Gershgorin radius R fixes that. B + RI is positive
//! semidefinite with the same eigenvectors and its dominant eigenvalue
//! is lambda_max + R; RI - B targets lambda_min the same way.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operator::BellMatrix;
use crate::types::SchmidtState;
use crate::util::{dot, norm2, KahanSum};

/// Largest d accepted by [`full_spectrum_oracle`].
pub const ORACLE_CAP: usize = 2_048;

/// Knobs for one power solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Convergence threshold on the residual norm of B v - lambda v.
    /// Residual, not eigenvalue stagnation: stagnation false-converges
    /// when the spectral gap is small, and the gap shrinks with d.
    pub tolerance: f64,
    /// Iteration budget before giving up.
    pub max_iterations: usize,
    /// Seed for the random start vector. A deterministic uniform start
    /// would be useless here: extremal eigenvectors can have
    /// sign-alternating entries exactly orthogonal to it.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 1_000_000,
            seed: 42,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if self.tolerance <= 0.0 || self.tolerance.is_nan() {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Which end of the spectrum a solve targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    Max,
    Min,
}

/// A converged (or best-so-far) eigenpair.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub eigenvalue: f64,
    /// Unit vector, canonicalized so its first nonzero entry is
    /// positive. These are the Schmidt coefficients of the extremal
    /// state.
    pub eigenvector: Vec<f64>,
    pub iterations: usize,
    /// Final ||B v - lambda v||_2.
    pub residual: f64,
}

impl EigenResult {
    /// The eigenvector as a Schmidt state.
    pub fn state(&self) -> Result<SchmidtState> {
        SchmidtState::new(self.eigenvector.clone())
    }
}

fn canonicalize(v: &mut [f64]) {
    if let Some(lead) = v.iter().find(|a| a.abs() > 1e-12) {
        if *lead < 0.0 {
            for a in v.iter_mut() {
                *a = -*a;
            }
        }
    }
}

fn random_unit(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm2(&v);
        if n > 1e-3 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Power solve with a per-iteration observer receiving
/// `(iteration, eigenvalue_estimate, residual)`. The estimate is the
/// Rayleigh quotient of the unshifted B, which converges monotonically
/// (up to rounding) because the shifted operator is positive
/// semidefinite.
pub fn extreme_eigen_observed(
    b: &BellMatrix,
    extreme: Extreme,
    cfg: SolverConfig,
    mut observe: impl FnMut(usize, f64, f64),
) -> Result<EigenResult> {
    cfg.validate()?;
    let d = b.dimension().get();
    let sigma = b.gershgorin_radius();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut v = random_unit(d, &mut rng);
    let mut w = vec![0.0; d];
    let mut best: Option<EigenResult> = None;

    for it in 1..=cfg.max_iterations {
        b.matvec_into(&v, &mut w);
        let lambda = dot(&v, &w);
        let residual = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| {
                let r = wi - lambda * vi;
                r * r
            })
            .collect::<KahanSum>()
            .value()
            .sqrt();
        observe(it, lambda, residual);

        if residual <= cfg.tolerance {
            canonicalize(&mut v);
            return Ok(EigenResult {
                eigenvalue: lambda,
                eigenvector: v,
                iterations: it,
                residual,
            });
        }
        if best.as_ref().is_none_or(|b| residual < b.residual) {
            best = Some(EigenResult {
                eigenvalue: lambda,
                eigenvector: v.clone(),
                iterations: it,
                residual,
            });
        }

        // Next iterate of the shifted operator. Both shifts keep the
        // iteration matrix positive semidefinite.
        match extreme {
            Extreme::Max => {
                for (wi, vi) in w.iter_mut().zip(&v) {
                    *wi += sigma * vi;
                }
            }
            Extreme::Min => {
                for (wi, vi) in w.iter_mut().zip(&v) {
                    *wi = sigma * vi - *wi;
                }
            }
        }
        let n = norm2(&w);
        if n < 1e-300 {
            // v sat exactly on the opposite extreme (possible only when
            // sigma equals an eigenvalue); restart from fresh noise.
            v = random_unit(d, &mut rng);
        } else {
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / n;
            }
        }
    }

    let mut best = best.expect("at least one iteration ran");
    canonicalize(&mut best.eigenvector);
    Err(Error::NotConverged {
        best: Box::new(best),
    })
}

/// Power solve without instrumentation.
pub fn extreme_eigen(b: &BellMatrix, extreme: Extreme, cfg: SolverConfig) -> Result<EigenResult> {
    extreme_eigen_observed(b, extreme, cfg, |_, _, _| {})
}

/// Largest eigenvalue of B (the maximal quantum value of I_d over
/// states for these phases).
pub fn max_eigen(b: &BellMatrix, cfg: SolverConfig) -> Result<EigenResult> {
    extreme_eigen(b, Extreme::Max, cfg)
}

/// Smallest eigenvalue of B.
pub fn min_eigen(b: &BellMatrix, cfg: SolverConfig) -> Result<EigenResult> {
    extreme_eigen(b, Extreme::Min, cfg)
}

/// Every eigenvalue of B in ascending order, via a complete symmetric
/// eigendecomposition. Validation-only path: O(d^3) and capped at
/// d = 2048.
pub fn full_spectrum_oracle(b: &BellMatrix) -> Result<Vec<f64>> {
    let d = b.dimension().get();
    if d > ORACLE_CAP {
        return Err(Error::DenseCapExceeded { d, cap: ORACLE_CAP });
    }
    let mat = nalgebra::DMatrix::from_fn(d, d, |j, m| b.element(j, m));
    let eig = nalgebra::SymmetricEigen::new(mat);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::Representation;
    use crate::rules::{negative_rule, positive_rule};
    use crate::types::Dimension;

    fn dim(d: usize) -> Dimension {
        Dimension::new(d).unwrap()
    }

    fn swap_matrix() -> BellMatrix {
        BellMatrix::from_dense(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn swap_matrix_eigenpairs() {
        let b = swap_matrix();
        let cfg = SolverConfig::default();
        let max = max_eigen(&b, cfg).unwrap();
        assert!((max.eigenvalue - 1.0).abs() < 1e-10);
        let s = 1.0 / 2.0f64.sqrt();
        assert!((max.eigenvector[0] - s).abs() < 1e-8);
        assert!((max.eigenvector[1] - s).abs() < 1e-8);

        let min = min_eigen(&b, cfg).unwrap();
        assert!((min.eigenvalue + 1.0).abs() < 1e-10);
        // Canonical form: leading entry positive.
        assert!((min.eigenvector[0] - s).abs() < 1e-8);
        assert!((min.eigenvector[1] + s).abs() < 1e-8);
    }

    #[test]
    fn d2_positive_rule_gives_two_root_two() {
        let b = BellMatrix::from_rule(&positive_rule(dim(2)), Representation::Auto, 64).unwrap();
        let r = max_eigen(&b, SolverConfig::default()).unwrap();
        assert!((r.eigenvalue - 2.0 * 2.0f64.sqrt()).abs() < 1e-10);
        let norm: f64 = r.eigenvector.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(r.residual <= 1e-10);
    }

    #[test]
    fn d3_positive_rule_matches_analytic_root() {
        let b = BellMatrix::from_rule(&positive_rule(dim(3)), Representation::Auto, 64).unwrap();
        let r = max_eigen(&b, SolverConfig::default()).unwrap();
        let expect = 1.0 + (11.0f64 / 3.0).sqrt();
        assert!((r.eigenvalue - expect).abs() < 1e-9, "got {}", r.eigenvalue);
    }

    #[test]
    fn d3_negative_rule_reaches_minus_four() {
        let b = BellMatrix::from_rule(&negative_rule(dim(3)), Representation::Auto, 64).unwrap();
        let r = min_eigen(&b, SolverConfig::default()).unwrap();
        assert!((r.eigenvalue + 4.0).abs() < 1e-9, "got {}", r.eigenvalue);
    }

    #[test]
    fn d2_negative_rule_reaches_minus_two_root_two() {
        let b = BellMatrix::from_rule(&negative_rule(dim(2)), Representation::Auto, 64).unwrap();
        let r = min_eigen(&b, SolverConfig::default()).unwrap();
        assert!(
            (r.eigenvalue + 2.0 * 2.0f64.sqrt()).abs() < 1e-10,
            "got {}",
            r.eigenvalue
        );
    }

    #[test]
    fn rayleigh_quotient_is_consistent() {
        for du in [2usize, 5, 16, 33] {
            let d = dim(du);
            for rule in [positive_rule(d), negative_rule(d)] {
                let b = BellMatrix::from_rule(&rule, Representation::Auto, 64).unwrap();
                let cfg = SolverConfig::default();
                for extreme in [Extreme::Max, Extreme::Min] {
                    let r = extreme_eigen(&b, extreme, cfg).unwrap();
                    let q = b
                        .quadratic_form(&SchmidtState::new(r.eigenvector.clone()).unwrap())
                        .unwrap();
                    assert!(
                        (q - r.eigenvalue).abs() <= 10.0 * cfg.tolerance,
                        "d={du} {extreme:?} rayleigh={q} lambda={}",
                        r.eigenvalue
                    );
                }
            }
        }
    }

    #[test]
    fn agrees_with_full_spectrum_oracle() {
        let cfg = SolverConfig::default();
        for du in [2usize, 3, 4, 5, 8, 13, 21, 40, 64] {
            let d = dim(du);
            for rule in [positive_rule(d), negative_rule(d)] {
                let b = BellMatrix::from_rule(&rule, Representation::Auto, 4096).unwrap();
                let spectrum = full_spectrum_oracle(&b).unwrap();
                let max = max_eigen(&b, cfg).unwrap().eigenvalue;
                let min = min_eigen(&b, cfg).unwrap().eigenvalue;
                assert!(
                    (max - spectrum.last().unwrap()).abs() < 1e-8,
                    "d={du} {:?} max {max} vs {}",
                    rule.side(),
                    spectrum.last().unwrap()
                );
                assert!(
                    (min - spectrum.first().unwrap()).abs() < 1e-8,
                    "d={du} {:?} min {min} vs {}",
                    rule.side(),
                    spectrum.first().unwrap()
                );
            }
        }
    }

    #[test]
    fn oracle_examples() {
        let p2 = BellMatrix::from_rule(&positive_rule(dim(2)), Representation::Auto, 64).unwrap();
        let s = full_spectrum_oracle(&p2).unwrap();
        let r = 2.0 * 2.0f64.sqrt();
        assert!((s[0] + r).abs() < 1e-12 && (s[1] - r).abs() < 1e-12);

        let n3 = BellMatrix::from_rule(&negative_rule(dim(3)), Representation::Auto, 64).unwrap();
        let s = full_spectrum_oracle(&n3).unwrap();
        assert!((s[0] + 4.0).abs() < 1e-12);
        assert!((s[1] - 2.0).abs() < 1e-12 && (s[2] - 2.0).abs() < 1e-12);

        let p3 = BellMatrix::from_rule(&positive_rule(dim(3)), Representation::Auto, 64).unwrap();
        let s = full_spectrum_oracle(&p3).unwrap();
        let root = (11.0f64 / 3.0).sqrt();
        assert!((s[0] + 2.0).abs() < 1e-12);
        assert!((s[1] - (1.0 - root)).abs() < 1e-12);
        assert!((s[2] - (1.0 + root)).abs() < 1e-12);
    }

    #[test]
    fn oracle_rejects_large_d() {
        let rule = positive_rule(dim(ORACLE_CAP + 1));
        let b = BellMatrix::from_rule(&rule, Representation::Structured, 64).unwrap();
        assert!(matches!(
            full_spectrum_oracle(&b),
            Err(Error::DenseCapExceeded {
                cap: ORACLE_CAP,
                ..
            })
        ));
    }

    #[test]
    fn eigenvalues_lie_within_gershgorin_bound() {
        for du in [2usize, 7, 33, 64] {
            let d = dim(du);
            for rule in [positive_rule(d), negative_rule(d)] {
                let b = BellMatrix::from_rule(&rule, Representation::Auto, 4096).unwrap();
                let radius = b.gershgorin_radius();
                for lambda in full_spectrum_oracle(&b).unwrap() {
                    assert!(lambda.abs() <= radius + 1e-9, "d={du} {lambda} vs {radius}");
                }
            }
        }
    }

    #[test]
    fn seed_does_not_move_the_answer() {
        let b = BellMatrix::from_rule(&positive_rule(dim(8)), Representation::Auto, 64).unwrap();
        let reference = max_eigen(&b, SolverConfig::default()).unwrap().eigenvalue;
        for seed in 1..=5 {
            let cfg = SolverConfig {
                seed,
                ..SolverConfig::default()
            };
            let r = max_eigen(&b, cfg).unwrap();
            assert!((r.eigenvalue - reference).abs() < 1e-9, "seed={seed}");
        }
    }

    #[test]
    fn rayleigh_sequence_is_monotone() {
        let b = BellMatrix::from_rule(&positive_rule(dim(16)), Representation::Auto, 64).unwrap();
        let mut maxima = Vec::new();
        extreme_eigen_observed(&b, Extreme::Max, SolverConfig::default(), |_, l, _| {
            maxima.push(l)
        })
        .unwrap();
        for pair in maxima.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-11, "max sequence dipped: {pair:?}");
        }
        let mut minima = Vec::new();
        extreme_eigen_observed(&b, Extreme::Min, SolverConfig::default(), |_, l, _| {
            minima.push(l)
        })
        .unwrap();
        for pair in minima.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-11, "min sequence rose: {pair:?}");
        }
    }

    #[test]
    fn non_convergence_reports_best_iterate() {
        let b = BellMatrix::from_rule(&positive_rule(dim(32)), Representation::Auto, 64).unwrap();
        let cfg = SolverConfig {
            tolerance: 1e-15,
            max_iterations: 3,
            ..Default::default()
        };
        match max_eigen(&b, cfg) {
            Err(Error::NotConverged { best }) => {
                assert!(best.iterations <= 3);
                assert!(best.residual > 1e-15);
                assert!(best.eigenvalue.is_finite());
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let b = swap_matrix();
        let bad_tol = SolverConfig {
            tolerance: 0.0,
            ..Default::default()
        };
        assert!(max_eigen(&b, bad_tol).is_err());
        let bad_iters = SolverConfig {
            max_iterations: 0,
            ..Default::default()
        };
        assert!(max_eigen(&b, bad_iters).is_err());
    }

    #[test]
    fn zero_matrix_converges_immediately() {
        let b = BellMatrix::from_dense(vec![vec![0.0; 3]; 3]).unwrap();
        let r = max_eigen(&b, SolverConfig::default()).unwrap();
        assert_eq!(r.eigenvalue, 0.0);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn eigen_result_converts_to_state() {
        let b = swap_matrix();
        let r = max_eigen(&b, SolverConfig::default()).unwrap();
        let state = r.state().unwrap();
        assert_eq!(state.dimension().get(), 2);
    }
}
