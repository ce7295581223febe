//! The Bell operator B in the Schmidt basis {|jj>}.
//!
//! B is real symmetric with zero diagonal, and I_d(state) = <a|B|a> in
//! the Schmidt coefficients. Off-diagonal entries depend on the phase
//! settings; under the n_j rules they reduce to
//!
//! ```text
//! B_{jm} = 4/(d-1) * sin[(2(j-m) - (n_j - n_m)) pi/2d] / sin[(j-m) pi/d]
//! ```
//!
//! For the maximising rule n_j = j this is Toeplitz (a function of
//! j - m only); for the minimising rule n_j = j + d * s_j with segment
//! lifts s_j in {0,1,2}, so entries depend on (j - m, s_j - s_m) and
//! every segment-pair block is Toeplitz. Both structures admit an
//! O(d log d) matvec by circulant FFT embedding, which is what lets
//! the eigensolver reach d in the hundreds of thousands.

use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rules::{PhaseRule, Side};
use crate::toeplitz::Convolver;
use crate::types::{Dimension, PhaseSettings, SchmidtState};
use crate::util::dot;

/// Default cap on dense construction. A dense matrix at the cap costs
/// roughly 3.2 GB; anything larger must use the structured form.
pub const DEFAULT_DENSE_CAP: usize = 20_000;

/// Bell-matrix element for arbitrary phase settings:
/// the four-sine bracket over (d-1) sin[(pi/d)(j-m)]. Zero on the
/// diagonal by contract.
pub fn element_general(phases: &PhaseSettings, j: usize, m: usize) -> f64 {
    let d = phases.dimension().get();
    assert!(j < d && m < d, "indices ({j},{m}) out of range for d = {d}");
    if j == m {
        return 0.0;
    }
    let x = PI / d as f64 * (j as f64 - m as f64);
    let p1 = phases.phi1[j] - phases.phi1[m];
    let p2 = phases.phi2[j] - phases.phi2[m];
    let v1 = phases.vphi1[j] - phases.vphi1[m];
    let v2 = phases.vphi2[j] - phases.vphi2[m];
    let bracket =
        -(p1 + v1 - x).sin() + (p1 + v2 + x).sin() + (p2 + v1 - x).sin() - (p2 + v2 - x).sin();
    bracket / ((d as f64 - 1.0) * x.sin())
}

/// Element from the lag k = j - m and the integer difference
/// ndiff = n_j - n_m. Shared by rule elements and the Toeplitz
/// generators, which fix ndiff = k + d * lift.
#[inline]
fn rule_element_from_lags(d: usize, k: i64, ndiff: i64) -> f64 {
    debug_assert!(k != 0);
    let df = d as f64;
    let num = ((2 * k - ndiff) as f64 * PI / (2.0 * df)).sin();
    let den = (k as f64 * PI / df).sin();
    debug_assert!(den != 0.0);
    4.0 / (df - 1.0) * num / den
}

/// Bell-matrix element under a phase rule. For the positive rule this
/// equals 2 / ((d-1) cos[(j-m) pi/2d]).
pub fn element_rule(rule: &PhaseRule, j: usize, m: usize) -> f64 {
    let d = rule.dimension().get();
    assert!(j < d && m < d, "indices ({j},{m}) out of range for d = {d}");
    if j == m {
        return 0.0;
    }
    let n = rule.indices();
    rule_element_from_lags(d, j as i64 - m as i64, n[j] - n[m])
}

/// Representation requested from the builders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// Dense up to the cap, structured beyond it.
    Auto,
    /// Explicit d x d storage; refused above the cap.
    Dense,
    /// Toeplitz generators applied via FFT; works for any d.
    Structured,
}

pub struct BellMatrix {
    d: Dimension,
    repr: Repr,
}

enum Repr {
    Dense(DenseForm),
    Toeplitz(ToeplitzForm),
    Segmented(SegmentedForm),
}

struct DenseForm {
    rows: Vec<f64>,
    gersh: f64,
}

struct ToeplitzForm {
    rule: PhaseRule,
    conv: Convolver,
    spectrum: Vec<Complex64>,
    gersh: f64,
}

struct SegmentedForm {
    rule: PhaseRule,
    segments: [Range<usize>; 3],
    conv: Convolver,
    /// spectra[i] embeds the generator for lift difference i - 2.
    spectra: [Vec<Complex64>; 5],
    gersh: f64,
}

impl DenseForm {
    fn new(d: usize, rows: Vec<f64>) -> Self {
        let gersh = rows
            .chunks(d)
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        Self { rows, gersh }
    }
}

impl ToeplitzForm {
    fn new(rule: PhaseRule) -> Self {
        let d = rule.dimension().get();
        let conv = Convolver::new(2 * d);
        // g(0) must be written as an explicit zero: the raw formula is
        // 0/0 there and one NaN in the generator poisons the whole
        // spectrum.
        let g = |k: i64| {
            if k == 0 {
                0.0
            } else {
                rule_element_from_lags(d, k, k)
            }
        };
        let spectrum = conv.spectrum(d, g);
        // Row sums via prefix sums over |g|: row j covers lags
        // 1..=j (negative side) and 1..=d-1-j (positive side).
        let mut prefix = vec![0.0; d];
        for k in 1..d {
            prefix[k] = prefix[k - 1] + g(k as i64).abs();
        }
        let mut neg_prefix = vec![0.0; d];
        for k in 1..d {
            neg_prefix[k] = neg_prefix[k - 1] + g(-(k as i64)).abs();
        }
        let gersh = (0..d)
            .map(|j| neg_prefix[j] + prefix[d - 1 - j])
            .fold(0.0, f64::max);
        Self {
            rule,
            conv,
            spectrum,
            gersh,
        }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let d = x.len();
        let mut freq = self.conv.forward_masked(x, 0..d);
        pointwise_accumulate_first(&mut freq, &self.spectrum);
        let y = self.conv.inverse_prefix(freq, d);
        out.copy_from_slice(&y);
    }
}

/// freq[i] = spec[i] * freq[i], the first product of an accumulation.
fn pointwise_accumulate_first(freq: &mut [Complex64], spec: &[Complex64]) {
    for (f, s) in freq.iter_mut().zip(spec) {
        *f *= s;
    }
}

impl SegmentedForm {
    fn new(rule: PhaseRule) -> Self {
        let d = rule.dimension().get();
        let t = (d - 2) / 3;
        let segments = [0..t + 1, t + 1..d - 1 - t, d - 1 - t..d];
        let conv = Convolver::new(2 * d);
        let gen = |lift: i64| {
            move |k: i64| {
                if k == 0 {
                    // Never a real matrix entry (k = 0 means j = m) but
                    // the circulant column still holds this slot; a NaN
                    // here would corrupt every output.
                    0.0
                } else {
                    rule_element_from_lags(d, k, k + d as i64 * lift)
                }
            }
        };
        let spectra = [
            conv.spectrum(d, gen(-2)),
            conv.spectrum(d, gen(-1)),
            conv.spectrum(d, gen(0)),
            conv.spectrum(d, gen(1)),
            conv.spectrum(d, gen(2)),
        ];

        // Gershgorin radius: per lift difference, prefix sums of |g|
        // over the lag axis answer each (row, source-segment) block in
        // O(1). Only one prefix table is alive at a time.
        let mut row_sums = vec![0.0; d];
        for lift in -2i64..=2 {
            let g = gen(lift);
            // prefix[i] = sum of |g(k)| for k in -(d-1)..=(i as lag)
            let mut prefix = vec![0.0; 2 * d - 1];
            prefix[0] = g(-(d as i64 - 1)).abs();
            for i in 1..2 * d - 1 {
                prefix[i] = prefix[i - 1] + g(i as i64 - (d as i64 - 1)).abs();
            }
            let range_sum = |lo: i64, hi: i64| -> f64 {
                let lo_idx = (lo + d as i64 - 1) as usize;
                let hi_idx = (hi + d as i64 - 1) as usize;
                let below = if lo_idx == 0 { 0.0 } else { prefix[lo_idx - 1] };
                prefix[hi_idx] - below
            };
            for (s, seg) in segments.iter().enumerate() {
                for j in seg.clone() {
                    let s_j = s as i64;
                    for (sp, src) in segments.iter().enumerate() {
                        if src.is_empty() || s_j - sp as i64 != lift {
                            continue;
                        }
                        let lo = j as i64 - (src.end as i64 - 1);
                        let hi = j as i64 - src.start as i64;
                        row_sums[j] += range_sum(lo, hi);
                    }
                }
            }
        }
        let gersh = row_sums.iter().fold(0.0, |a: f64, &b| a.max(b));
        Self {
            rule,
            segments,
            conv,
            spectra,
            gersh,
        }
    }

    /// Target-segment slice of B x: sum over source segments of the
    /// lift-difference generator convolved with the masked input.
    fn target_block(&self, s: usize, xs: &[Option<Vec<Complex64>>; 3]) -> Vec<f64> {
        let n = self.conv.len();
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        for (sp, src_freq) in xs.iter().enumerate() {
            let Some(freq) = src_freq else { continue };
            let spec = &self.spectra[(s as i64 - sp as i64 + 2) as usize];
            for i in 0..n {
                acc[i] += spec[i] * freq[i];
            }
        }
        self.conv.inverse_prefix(acc, self.segments[s].end)
    }

    fn apply_seq(&self, x: &[f64], out: &mut [f64]) {
        let xs = std::array::from_fn(|s| {
            let seg = self.segments[s].clone();
            if seg.is_empty() {
                None
            } else {
                Some(self.conv.forward_masked(x, seg))
            }
        });
        for s in 0..3 {
            let seg = self.segments[s].clone();
            if seg.is_empty() {
                continue;
            }
            let y = self.target_block(s, &xs);
            out[seg.clone()].copy_from_slice(&y[seg]);
        }
    }

    #[cfg(feature = "parallel")]
    fn apply_par(&self, x: &[f64], out: &mut [f64]) {
        let xs_vec: Vec<Option<Vec<Complex64>>> = (0..3)
            .into_par_iter()
            .map(|s| {
                let seg = self.segments[s].clone();
                if seg.is_empty() {
                    None
                } else {
                    Some(self.conv.forward_masked(x, seg))
                }
            })
            .collect();
        let xs: [Option<Vec<Complex64>>; 3] = std::array::from_fn(|s| xs_vec[s].clone());
        let blocks: Vec<(Range<usize>, Vec<f64>)> = (0..3)
            .into_par_iter()
            .filter(|s| !self.segments[*s].is_empty())
            .map(|s| (self.segments[s].clone(), self.target_block(s, &xs)))
            .collect();
        for (seg, y) in blocks {
            out[seg.clone()].copy_from_slice(&y[seg]);
        }
    }
}

fn build_dense(d: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Vec<f64> {
    let mut rows = vec![0.0; d * d];
    #[cfg(feature = "parallel")]
    rows.par_chunks_mut(d).enumerate().for_each(|(j, row)| {
        for (m, slot) in row.iter_mut().enumerate() {
            *slot = f(j, m);
        }
    });
    #[cfg(not(feature = "parallel"))]
    for (j, row) in rows.chunks_mut(d).enumerate() {
        for (m, slot) in row.iter_mut().enumerate() {
            *slot = f(j, m);
        }
    }
    rows
}

impl BellMatrix {
    /// Build from a phase rule. `Auto` goes dense up to `dense_cap`
    /// and structured beyond; `Dense` above the cap is an error.
    pub fn from_rule(rule: &PhaseRule, hint: Representation, dense_cap: usize) -> Result<Self> {
        let d = rule.dimension();
        let dense = match hint {
            Representation::Dense => {
                if d.get() > dense_cap {
                    return Err(Error::DenseCapExceeded {
                        d: d.get(),
                        cap: dense_cap,
                    });
                }
                true
            }
            Representation::Auto => d.get() <= dense_cap,
            Representation::Structured => false,
        };
        let repr = if dense {
            Repr::Dense(DenseForm::new(
                d.get(),
                build_dense(d.get(), |j, m| element_rule(rule, j, m)),
            ))
        } else {
            match rule.side() {
                Side::Positive => Repr::Toeplitz(ToeplitzForm::new(rule.clone())),
                Side::Negative => Repr::Segmented(SegmentedForm::new(rule.clone())),
            }
        };
        Ok(Self { d, repr })
    }

    /// Build from arbitrary phase settings. No structure can be assumed
    /// here, so the representation is always dense and the cap binds.
    pub fn from_phases(phases: &PhaseSettings, dense_cap: usize) -> Result<Self> {
        let d = phases.dimension();
        if d.get() > dense_cap {
            return Err(Error::DenseCapExceeded {
                d: d.get(),
                cap: dense_cap,
            });
        }
        let rows = build_dense(d.get(), |j, m| element_general(phases, j, m));
        Ok(Self {
            d,
            repr: Repr::Dense(DenseForm::new(d.get(), rows)),
        })
    }

    /// Wrap an explicit symmetric matrix (mainly for tests and the
    /// full-spectrum oracle). Rows must agree in length and the matrix
    /// must be symmetric to 1e-12.
    pub fn from_dense(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.len();
        let dim = Dimension::new(d)?;
        for row in &rows {
            if row.len() != d {
                return Err(Error::LengthMismatch {
                    expected: d,
                    actual: row.len(),
                });
            }
        }
        let mut flat = Vec::with_capacity(d * d);
        for row in &rows {
            flat.extend_from_slice(row);
        }
        for j in 0..d {
            for m in j + 1..d {
                if (flat[j * d + m] - flat[m * d + j]).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "matrix is not symmetric at ({j},{m})"
                    )));
                }
            }
        }
        if let Some(bad) = flat.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite entry {bad}")));
        }
        Ok(Self {
            d: dim,
            repr: Repr::Dense(DenseForm::new(d, flat)),
        })
    }

    #[inline]
    pub fn dimension(&self) -> Dimension {
        self.d
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.repr, Repr::Dense(_))
    }

    /// Human-readable representation tag, for reports.
    pub fn representation_name(&self) -> &'static str {
        match &self.repr {
            Repr::Dense(_) => "dense",
            Repr::Toeplitz(_) => "toeplitz",
            Repr::Segmented(_) => "segmented-toeplitz",
        }
    }

    /// Entry B_{jm}, recomputed on demand for structured forms.
    pub fn element(&self, j: usize, m: usize) -> f64 {
        let d = self.d.get();
        assert!(j < d && m < d, "indices ({j},{m}) out of range for d = {d}");
        match &self.repr {
            Repr::Dense(f) => f.rows[j * d + m],
            Repr::Toeplitz(f) => element_rule(&f.rule, j, m),
            Repr::Segmented(f) => element_rule(&f.rule, j, m),
        }
    }

    /// Maximum absolute row sum R; every eigenvalue of B lies in
    /// [-R, R].
    pub fn gershgorin_radius(&self) -> f64 {
        match &self.repr {
            Repr::Dense(f) => f.gersh,
            Repr::Toeplitz(f) => f.gersh,
            Repr::Segmented(f) => f.gersh,
        }
    }

    /// B x with input validation. Dispatches to the parallel kernel
    /// when the `parallel` feature is enabled.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let mut out = vec![0.0; self.d.get()];
        self.matvec_into(x, &mut out);
        Ok(out)
    }

    /// Sequential kernel, available regardless of features.
    pub fn matvec_seq(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let mut out = vec![0.0; self.d.get()];
        self.matvec_into_seq(x, &mut out);
        Ok(out)
    }

    /// Parallel kernel. Produces bit-identical results to
    /// [`BellMatrix::matvec_seq`]: every output element is computed by
    /// the same scalar expression in both.
    #[cfg(feature = "parallel")]
    pub fn matvec_par(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let mut out = vec![0.0; self.d.get()];
        self.matvec_into_par(x, &mut out);
        Ok(out)
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d.get() {
            return Err(Error::LengthMismatch {
                expected: self.d.get(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// Unchecked dispatch used by the solver's hot loop.
    pub(crate) fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        #[cfg(feature = "parallel")]
        self.matvec_into_par(x, out);
        #[cfg(not(feature = "parallel"))]
        self.matvec_into_seq(x, out);
    }

    fn matvec_into_seq(&self, x: &[f64], out: &mut [f64]) {
        match &self.repr {
            Repr::Dense(f) => {
                let d = self.d.get();
                for (j, slot) in out.iter_mut().enumerate() {
                    let row = &f.rows[j * d..(j + 1) * d];
                    *slot = row.iter().zip(x).map(|(a, b)| a * b).sum();
                }
            }
            Repr::Toeplitz(f) => f.apply(x, out),
            Repr::Segmented(f) => f.apply_seq(x, out),
        }
    }

    #[cfg(feature = "parallel")]
    fn matvec_into_par(&self, x: &[f64], out: &mut [f64]) {
        match &self.repr {
            Repr::Dense(f) => {
                let d = self.d.get();
                out.par_iter_mut().enumerate().for_each(|(j, slot)| {
                    let row = &f.rows[j * d..(j + 1) * d];
                    *slot = row.iter().zip(x).map(|(a, b)| a * b).sum();
                });
            }
            Repr::Toeplitz(f) => f.apply(x, out),
            Repr::Segmented(f) => f.apply_par(x, out),
        }
    }

    /// <a|B|a>, the Bell value carried by a Schmidt state.
    pub fn quadratic_form(&self, state: &SchmidtState) -> Result<f64> {
        let x = state.alphas();
        let bx = self.matvec(x)?;
        Ok(dot(x, &bx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{negative_rule, phases_from_rule, positive_rule};
    use crate::types::Setting;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dim(d: usize) -> Dimension {
        Dimension::new(d).unwrap()
    }

    fn random_vec(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn element_general_d2_matches_analytic() {
        let phases = phases_from_rule(&positive_rule(dim(2)));
        let expect = 2.0 * 2.0f64.sqrt();
        assert!((element_general(&phases, 0, 1) - expect).abs() < 1e-14);
        assert!((element_general(&phases, 1, 0) - expect).abs() < 1e-14);
        assert_eq!(element_general(&phases, 0, 0), 0.0);
    }

    #[test]
    fn element_general_zero_phases_is_constant() {
        for du in 2..=12 {
            let phases = PhaseSettings::zero(dim(du));
            let expect = 2.0 / (du as f64 - 1.0);
            for j in 0..du {
                for m in 0..du {
                    if j != m {
                        assert!((element_general(&phases, j, m) - expect).abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn element_general_is_symmetric_for_random_phases() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for du in 2..=10 {
            let v = |rng: &mut ChaCha8Rng| {
                (0..du)
                    .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                    .collect::<Vec<_>>()
            };
            let phases =
                PhaseSettings::new(v(&mut rng), v(&mut rng), v(&mut rng), v(&mut rng)).unwrap();
            for j in 0..du {
                for m in 0..du {
                    let a = element_general(&phases, j, m);
                    let b = element_general(&phases, m, j);
                    assert!((a - b).abs() < 1e-12, "d={du} ({j},{m}): {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn element_rule_examples() {
        let two_root_two = 2.0 * 2.0f64.sqrt();
        assert!((element_rule(&positive_rule(dim(2)), 0, 1) - two_root_two).abs() < 1e-14);

        let p3 = positive_rule(dim(3));
        let near = 2.0 / 3.0f64.sqrt();
        assert!((element_rule(&p3, 0, 1) - near).abs() < 1e-14);
        assert!((element_rule(&p3, 1, 2) - near).abs() < 1e-14);
        assert!((element_rule(&p3, 0, 2) - 2.0).abs() < 1e-14);

        let n3 = negative_rule(dim(3));
        for j in 0..3 {
            for m in 0..3 {
                if j != m {
                    assert!((element_rule(&n3, j, m) + 2.0).abs() < 1e-14, "({j},{m})");
                }
            }
        }
    }

    #[test]
    fn positive_rule_matches_cosine_form() {
        for du in 2..=64 {
            let rule = positive_rule(dim(du));
            for j in 0..du {
                for m in 0..du {
                    if j == m {
                        continue;
                    }
                    let k = j as f64 - m as f64;
                    let cosine = 2.0 / ((du as f64 - 1.0) * (k * PI / (2.0 * du as f64)).cos());
                    assert!(
                        (element_rule(&rule, j, m) - cosine).abs() < 1e-12,
                        "d={du} ({j},{m})"
                    );
                }
            }
        }
    }

    #[test]
    fn rule_elements_match_general_elements() {
        for du in 2..=64 {
            let d = dim(du);
            for rule in [positive_rule(d), negative_rule(d)] {
                let phases = phases_from_rule(&rule);
                for j in 0..du {
                    for m in 0..du {
                        let a = element_rule(&rule, j, m);
                        let b = element_general(&phases, j, m);
                        assert!(
                            (a - b).abs() < 1e-12,
                            "d={du} {:?} ({j},{m}): rule={a} general={b}",
                            rule.side()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn dense_d3_matrices_match_hand_values() {
        let pos = BellMatrix::from_rule(&positive_rule(dim(3)), Representation::Dense, 64).unwrap();
        let c = 2.0 / 3.0f64.sqrt();
        let want = [[0.0, c, 2.0], [c, 0.0, c], [2.0, c, 0.0]];
        for (j, row) in want.iter().enumerate() {
            for (m, &w) in row.iter().enumerate() {
                assert!((pos.element(j, m) - w).abs() < 1e-14);
            }
        }
        let neg = BellMatrix::from_rule(&negative_rule(dim(3)), Representation::Dense, 64).unwrap();
        for j in 0..3 {
            for m in 0..3 {
                let want = if j == m { 0.0 } else { -2.0 };
                assert!((neg.element(j, m) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dense_is_symmetric_toeplitz_for_positive_rule() {
        for du in [2usize, 5, 9, 16] {
            let b =
                BellMatrix::from_rule(&positive_rule(dim(du)), Representation::Dense, 64).unwrap();
            for j in 0..du {
                assert_eq!(b.element(j, j), 0.0);
                for m in 0..du {
                    assert!((b.element(j, m) - b.element(m, j)).abs() < 1e-15);
                    if j + 1 < du && m + 1 < du {
                        assert!(
                            (b.element(j + 1, m + 1) - b.element(j, m)).abs() < 1e-15,
                            "toeplitz shift failed at d={du} ({j},{m})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn dense_cap_is_enforced() {
        let rule = positive_rule(dim(100));
        let err = BellMatrix::from_rule(&rule, Representation::Dense, 50);
        assert!(matches!(
            err,
            Err(Error::DenseCapExceeded { d: 100, cap: 50 })
        ));
        // Auto falls back to structured instead of failing.
        let auto = BellMatrix::from_rule(&rule, Representation::Auto, 50).unwrap();
        assert!(!auto.is_dense());
        assert_eq!(auto.representation_name(), "toeplitz");
    }

    #[test]
    fn from_phases_is_always_dense() {
        let phases = phases_from_rule(&negative_rule(dim(6)));
        let b = BellMatrix::from_phases(&phases, 64).unwrap();
        assert!(b.is_dense());
        assert!(BellMatrix::from_phases(&phases, 5).is_err());
    }

    #[test]
    fn from_dense_validates_shape_and_symmetry() {
        assert!(BellMatrix::from_dense(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).is_ok());
        assert!(BellMatrix::from_dense(vec![vec![0.0, 1.0]]).is_err());
        assert!(BellMatrix::from_dense(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(BellMatrix::from_dense(vec![vec![0.0, f64::NAN], vec![f64::NAN, 0.0]]).is_err());
    }

    #[test]
    fn matvec_row_sums_and_zero_vector() {
        let neg = BellMatrix::from_rule(&negative_rule(dim(3)), Representation::Dense, 64).unwrap();
        let y = neg.matvec(&[1.0, 1.0, 1.0]).unwrap();
        for v in y {
            assert!((v + 4.0).abs() < 1e-13);
        }
        let z = neg.matvec(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(z, vec![0.0; 3]);
        assert!(neg.matvec(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn structured_matvec_matches_dense_both_rules() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for du in [2usize, 3, 4, 5, 7, 16, 33, 100, 257, 512] {
            let d = dim(du);
            let x = random_vec(du, &mut rng);
            for rule in [positive_rule(d), negative_rule(d)] {
                let dense = BellMatrix::from_rule(&rule, Representation::Dense, 4096).unwrap();
                let structured =
                    BellMatrix::from_rule(&rule, Representation::Structured, 4096).unwrap();
                let yd = dense.matvec(&x).unwrap();
                let ys = structured.matvec(&x).unwrap();
                let max_diff = yd
                    .iter()
                    .zip(&ys)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(max_diff < 1e-9, "d={du} {:?} diff={max_diff}", rule.side());
            }
        }
    }

    #[test]
    fn structured_elements_match_dense_elements() {
        for du in [2usize, 3, 8, 33] {
            let d = dim(du);
            for rule in [positive_rule(d), negative_rule(d)] {
                let dense = BellMatrix::from_rule(&rule, Representation::Dense, 4096).unwrap();
                let structured =
                    BellMatrix::from_rule(&rule, Representation::Structured, 4096).unwrap();
                for j in 0..du {
                    for m in 0..du {
                        assert!((dense.element(j, m) - structured.element(j, m)).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn sequential_and_parallel_matvecs_are_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for du in [3usize, 64, 257] {
            let d = dim(du);
            let x = random_vec(du, &mut rng);
            for rule in [positive_rule(d), negative_rule(d)] {
                for hint in [Representation::Dense, Representation::Structured] {
                    let b = BellMatrix::from_rule(&rule, hint, 4096).unwrap();
                    let seq = b.matvec_seq(&x).unwrap();
                    let auto = b.matvec(&x).unwrap();
                    assert_eq!(seq, auto, "d={du} {:?} {hint:?}", rule.side());
                    #[cfg(feature = "parallel")]
                    {
                        let par = b.matvec_par(&x).unwrap();
                        assert_eq!(seq, par, "d={du} {:?} {hint:?}", rule.side());
                    }
                }
            }
        }
    }

    #[test]
    fn gershgorin_matches_between_representations() {
        for du in [2usize, 3, 5, 16, 100, 257] {
            let d = dim(du);
            for rule in [positive_rule(d), negative_rule(d)] {
                let dense = BellMatrix::from_rule(&rule, Representation::Dense, 4096).unwrap();
                let structured =
                    BellMatrix::from_rule(&rule, Representation::Structured, 4096).unwrap();
                let a = dense.gershgorin_radius();
                let b = structured.gershgorin_radius();
                assert!(
                    (a - b).abs() < 1e-9 * a.max(1.0),
                    "d={du} {:?} dense={a} structured={b}",
                    rule.side()
                );
            }
        }
    }

    #[test]
    fn quadratic_form_matches_bell_value_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for du in 2..=10 {
            let d = dim(du);
            for rule in [positive_rule(d), negative_rule(d)] {
                let phases = phases_from_rule(&rule);
                let b = BellMatrix::from_rule(&rule, Representation::Auto, 64).unwrap();
                for _ in 0..5 {
                    let raw = random_vec(du, &mut rng);
                    let state = SchmidtState::from_unnormalized(&raw).unwrap();
                    let q = b.quadratic_form(&state).unwrap();
                    let slow =
                        crate::inequality::bell_value_from_probabilities(&state, &phases).unwrap();
                    let fast = crate::inequality::bell_value_closed_form(&state, &phases).unwrap();
                    assert!((q - slow).abs() < 1e-9, "d={du} q={q} slow={slow}");
                    assert!((q - fast).abs() < 1e-10, "d={du} q={q} fast={fast}");
                }
            }
        }
    }

    #[test]
    fn quadratic_form_examples() {
        let d2 = BellMatrix::from_rule(&positive_rule(dim(2)), Representation::Auto, 64).unwrap();
        let me2 = SchmidtState::maximally_entangled(dim(2));
        assert!((d2.quadratic_form(&me2).unwrap() - 2.0 * 2.0f64.sqrt()).abs() < 1e-12);

        let n3 = BellMatrix::from_rule(&negative_rule(dim(3)), Representation::Auto, 64).unwrap();
        let me3 = SchmidtState::maximally_entangled(dim(3));
        assert!((n3.quadratic_form(&me3).unwrap() + 4.0).abs() < 1e-12);

        let mut raw = vec![0.0; 3];
        raw[0] = 1.0;
        let product = SchmidtState::new(raw).unwrap();
        assert!(n3.quadratic_form(&product).unwrap().abs() < 1e-15);
    }

    #[test]
    fn quadratic_form_tracks_correlation_sign_pattern() {
        // One spot check that the operator carries the same functional
        // as the probability path on a non-rule phase assignment.
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for du in 2..=6 {
            let v = |rng: &mut ChaCha8Rng| {
                (0..du)
                    .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                    .collect::<Vec<_>>()
            };
            let phases =
                PhaseSettings::new(v(&mut rng), v(&mut rng), v(&mut rng), v(&mut rng)).unwrap();
            let b = BellMatrix::from_phases(&phases, 64).unwrap();
            let state = SchmidtState::from_unnormalized(&random_vec(du, &mut rng)).unwrap();
            let q = b.quadratic_form(&state).unwrap();
            use crate::inequality::correlation_function;
            let q11 = correlation_function(&state, &phases, Setting::One, Setting::One).unwrap();
            let q12 = correlation_function(&state, &phases, Setting::One, Setting::Two).unwrap();
            let q21 = correlation_function(&state, &phases, Setting::Two, Setting::One).unwrap();
            let q22 = correlation_function(&state, &phases, Setting::Two, Setting::Two).unwrap();
            assert!((q - (q11 + q12 - q21 + q22)).abs() < 1e-9, "d={du}");
        }
    }
}
