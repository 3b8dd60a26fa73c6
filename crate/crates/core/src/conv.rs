//! FFT convolution.

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Convolves one fixed signal with many filters of bounded length.
pub struct Convolver {
    len: usize,
    fft_len: usize,
    spectrum: Vec<Complex<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Convolver {
    pub fn new(signal: &[f64], max_filter_len: usize) -> Self {
        let fft_len = (signal.len() + max_filter_len.max(1) - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(fft_len);
        let inv = planner.plan_fft_inverse(fft_len);
        let mut spectrum = padded(signal, fft_len);
        fwd.process(&mut spectrum);
        Self {
            len: signal.len(),
            fft_len,
            spectrum,
            fwd,
            inv,
        }
    }

    /// First `signal.len()` samples of `signal * filter`.
    ///
    /// Panics if `filter` is longer than the length given to [`Convolver::new`].
    pub fn apply(&self, filter: &[f64]) -> Vec<f64> {
        assert!(self.len + filter.len() <= self.fft_len + 1, "filter too long");
        let mut buf = padded(filter, self.fft_len);
        self.fwd.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.inv.process(&mut buf);
        let scale = 1.0 / self.fft_len as f64;
        buf[..self.len].iter().map(|c| c.re * scale).collect()
    }
}

fn padded(x: &[f64], n: usize) -> Vec<Complex<f64>> {
    let mut v = vec![Complex::new(0.0, 0.0); n];
    for (o, &s) in v.iter_mut().zip(x) {
        o.re = s;
    }
    v
}

/// Full linear convolution, length `a.len() + b.len() - 1`.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let n = a.len() + b.len() - 1;
    let mut out = Convolver::new(&pad_to(a, n), b.len()).apply(b);
    out.truncate(n);
    out
}

/// `a * b` truncated to `a.len()` samples.
pub fn convolve_same(a: &[f64], b: &[f64]) -> Vec<f64> {
    Convolver::new(a, b.len()).apply(b)
}

fn pad_to(x: &[f64], n: usize) -> Vec<f64> {
    let mut v = x.to_vec();
    v.resize(n, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    #[test]
    fn matches_direct_sum() {
        let a: Vec<f64> = (0..37).map(|i| ((i * 31) % 11) as f64 - 5.0).collect();
        let b: Vec<f64> = (0..13).map(|i| ((i * 7) % 5) as f64 * 0.3 - 0.6).collect();
        let fast = convolve(&a, &b);
        let slow = direct(&a, &b);
        assert_eq!(fast.len(), slow.len());
        for (f, s) in fast.iter().zip(&slow) {
            assert!((f - s).abs() < 1e-10);
        }
        let same = convolve_same(&a, &b);
        assert_eq!(same.len(), a.len());
        for (f, s) in same.iter().zip(&slow) {
            assert!((f - s).abs() < 1e-10);
        }
    }

    #[test]
    fn reused_convolver_is_linear() {
        let x: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let c = Convolver::new(&x, 20);
        let h1: Vec<f64> = (0..20).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let h2: Vec<f64> = (0..15).map(|i| (i as f64).cos()).collect();
        let sum: Vec<f64> = (0..20)
            .map(|i| h1[i] + h2.get(i).copied().unwrap_or(0.0))
            .collect();
        let (y1, y2, ys) = (c.apply(&h1), c.apply(&h2), c.apply(&sum));
        for i in 0..100 {
            assert!((y1[i] + y2[i] - ys[i]).abs() < 1e-12);
        }
    }
}
