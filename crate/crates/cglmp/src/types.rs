//! Shared value types: dimension, measurement settings, states, phases.

use crate::error::{Error, Result};
use crate::util::KahanSum;

/// Number of outcomes per local measurement. Always at least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        Ok(Self(d))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// The spin value S = (d - 1) / 2 associated with d outcomes.
    #[inline]
    pub fn spin(self) -> f64 {
        (self.0 as f64 - 1.0) / 2.0
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<usize> for Dimension {
    type Error = Error;

    fn try_from(d: usize) -> Result<Self> {
        Self::new(d)
    }
}

/// Which of the two measurement settings a party uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Setting {
    One,
    Two,
}

impl Setting {
    /// The 1-based index used in the correlation labels Q_ij.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Setting::One => 1,
            Setting::Two => 2,
        }
    }
}

/// A bipartite pure state in Schmidt form: real coefficients
/// alpha_0..alpha_{d-1} with sum(alpha_i^2) = 1.
///
/// Signed entries are allowed: a sign on alpha_i is a local phase
/// redefinition, and extremal eigenvectors of the Bell matrix arrive
/// with whatever signs the solver produced. [`SchmidtState::canonicalized`]
/// fixes the overall sign for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtState {
    alphas: Vec<f64>,
}

/// Normalisation slack accepted by [`SchmidtState::new`].
const NORM_TOL: f64 = 1e-12;

impl SchmidtState {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.len() < 2 {
            return Err(Error::InvalidDimension(alphas.len()));
        }
        if let Some(bad) = alphas.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Schmidt coefficient is not finite: {bad}"
            )));
        }
        let norm_sq: f64 = alphas.iter().map(|a| a * a).collect::<KahanSum>().value();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm_sq));
        }
        Ok(Self { alphas })
    }

    /// Normalise an arbitrary real coefficient vector.
    pub fn from_unnormalized(raw: &[f64]) -> Result<Self> {
        let norm: f64 = raw.iter().map(|a| a * a).collect::<KahanSum>().value();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "cannot normalise vector with squared norm {norm}"
            )));
        }
        let s = norm.sqrt();
        Self::new(raw.iter().map(|a| a / s).collect())
    }

    /// The maximally entangled state: all coefficients 1/sqrt(d).
    pub fn maximally_entangled(d: Dimension) -> Self {
        let a = 1.0 / (d.get() as f64).sqrt();
        Self {
            alphas: vec![a; d.get()],
        }
    }

    /// Flip the global sign so the first entry with |alpha_i| > 1e-12
    /// is positive. Used when reporting extremal states.
    pub fn canonicalized(mut self) -> Self {
        if let Some(lead) = self.alphas.iter().find(|a| a.abs() > 1e-12) {
            if *lead < 0.0 {
                for a in self.alphas.iter_mut() {
                    *a = -*a;
                }
            }
        }
        self
    }

    #[inline]
    pub fn dimension(&self) -> Dimension {
        Dimension(self.alphas.len())
    }

    #[inline]
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }
}

/// Phase settings for one run: Alice's phi_1, phi_2 and Bob's
/// varphi_1, varphi_2, each a vector indexed by outcome j = 0..d-1.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSettings {
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
    pub vphi1: Vec<f64>,
    pub vphi2: Vec<f64>,
}

impl PhaseSettings {
    pub fn new(phi1: Vec<f64>, phi2: Vec<f64>, vphi1: Vec<f64>, vphi2: Vec<f64>) -> Result<Self> {
        let d = phi1.len();
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        for v in [&phi2, &vphi1, &vphi2] {
            if v.len() != d {
                return Err(Error::LengthMismatch {
                    expected: d,
                    actual: v.len(),
                });
            }
        }
        Ok(Self {
            phi1,
            phi2,
            vphi1,
            vphi2,
        })
    }

    /// All four phase functions identically zero.
    pub fn zero(d: Dimension) -> Self {
        let z = vec![0.0; d.get()];
        Self {
            phi1: z.clone(),
            phi2: z.clone(),
            vphi1: z.clone(),
            vphi2: z,
        }
    }

    #[inline]
    pub fn dimension(&self) -> Dimension {
        Dimension(self.phi1.len())
    }

    /// Alice's phase function for a given setting.
    #[inline]
    pub fn alice(&self, setting: Setting) -> &[f64] {
        match setting {
            Setting::One => &self.phi1,
            Setting::Two => &self.phi2,
        }
    }

    /// Bob's phase function for a given setting.
    #[inline]
    pub fn bob(&self, setting: Setting) -> &[f64] {
        match setting {
            Setting::One => &self.vphi1,
            Setting::Two => &self.vphi2,
        }
    }
}

/// Admixture of uncolored (white) noise: the state used is
/// `F * I/d^2 + (1 - F) * |psi><psi|` with `F` in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    fraction: f64,
}

impl NoiseModel {
    pub fn new(fraction: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction) || fraction.is_nan() {
            return Err(Error::InvalidArgument(format!(
                "noise fraction must lie in [0, 1], got {fraction}"
            )));
        }
        Ok(Self { fraction })
    }

    pub fn noiseless() -> Self {
        Self { fraction: 0.0 }
    }

    #[inline]
    pub fn fraction(self) -> f64 {
        self.fraction
    }
}
