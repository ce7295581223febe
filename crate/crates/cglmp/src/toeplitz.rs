//! Circulant embedding of Toeplitz matvecs.
//!
//! A d x d Toeplitz matrix T with entries t(j-m) embeds in a circulant
//! of size N >= 2d-1 whose first column holds t(0..d-1) followed by the
//! negative lags wrapped to the tail. The product T x is then the first
//! d entries of a cyclic convolution, computed in O(N log N) via FFT.

use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Convolver {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Convolver {
    /// Plans FFTs of the next power of two at or above `min_len`.
    /// Callers pass 2d so the circulant fits every lag -(d-1)..d-1.
    pub fn new(min_len: usize) -> Self {
        let n = min_len.next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Self { n, fwd, inv }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// FFT of the circulant first column for lag generator `g`, where
    /// `g(k)` is the matrix entry at j - m = k, |k| <= d-1.
    pub fn spectrum(&self, d: usize, g: impl Fn(i64) -> f64) -> Vec<Complex64> {
        debug_assert!(self.n >= 2 * d - 1);
        let mut c = vec![Complex64::new(0.0, 0.0); self.n];
        for (k, slot) in c.iter_mut().enumerate().take(d) {
            *slot = Complex64::new(g(k as i64), 0.0);
        }
        for k in 1..d {
            c[self.n - k] = Complex64::new(g(-(k as i64)), 0.0);
        }
        self.fwd.process(&mut c);
        c
    }

    /// FFT of `x` restricted to `keep` (zero outside), zero-padded to N.
    pub fn forward_masked(&self, x: &[f64], keep: Range<usize>) -> Vec<Complex64> {
        debug_assert!(x.len() <= self.n && keep.end <= x.len());
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n];
        for i in keep {
            buf[i] = Complex64::new(x[i], 0.0);
        }
        self.fwd.process(&mut buf);
        buf
    }

    /// Inverse FFT of `freq` (consumed in place), returning the first
    /// `out_len` entries scaled by 1/N.
    pub fn inverse_prefix(&self, mut freq: Vec<Complex64>, out_len: usize) -> Vec<f64> {
        debug_assert_eq!(freq.len(), self.n);
        self.inv.process(&mut freq);
        let scale = 1.0 / self.n as f64;
        freq[..out_len].iter().map(|z| z.re * scale).collect()
    }
}
