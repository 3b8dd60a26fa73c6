//! Short-time Fourier transform with perfect reconstruction.
//!
//! Conventions:
//! - analysis and synthesis both use the periodic square-root Hann window;
//! - the forward DFT is unnormalized, `X[k] = sum_n w[n] x[n] exp(-j 2 pi k n / N)`,
//!   so the one-sided Parseval identity reads
//!   `sum_k c_k |X[k]|^2 = N sum_n (w[n] x[n])^2` with `c_0 = c_{N/2} = 1`, `c_k = 2` otherwise;
//! - the inverse DFT carries the `1/N`, and overlap-add is divided by the constant
//!   `C = sum_m w^2[n + m hop]`;
//! - the signal is padded with `fft_size - hop` zeros in front and at least as many
//!   at the end, so every input sample is covered by the full set of overlapping frames.
//!   The inverse trims back to the original length.
//!
//! Imaginary parts of the DC and Nyquist bins are ignored by the inverse.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Frame and hop sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StftConfig {
    pub fft_size: usize,
    pub hop: usize,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            fft_size: 512,
            hop: 256,
        }
    }
}

impl StftConfig {
    pub fn new(fft_size: usize, hop: usize) -> Result<Self> {
        let cfg = Self { fft_size, hop };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Configuration producing `bins` frequency bins at half overlap.
    pub fn for_bins(bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 bins, got {bins}")));
        }
        Self::new(2 * (bins - 1), bins - 1)
    }

    pub fn num_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    fn validate(&self) -> Result<()> {
        if self.fft_size < 2 || self.fft_size % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "fft_size must be even and >= 2, got {}",
                self.fft_size
            )));
        }
        if self.hop == 0 || self.fft_size % self.hop != 0 || self.fft_size / self.hop < 2 {
            return Err(Error::InvalidConfig(format!(
                "hop {} must divide fft_size {} with at least two frames of overlap",
                self.hop, self.fft_size
            )));
        }
        Ok(())
    }

    /// Zeros added before and after a signal of `len` samples.
    pub fn padding(&self, len: usize) -> (usize, usize) {
        let pre = self.fft_size - self.hop;
        let tail = (self.hop - len % self.hop) % self.hop;
        (pre, pre + tail)
    }

    /// Frame count for a signal of `len` samples.
    pub fn num_frames(&self, len: usize) -> usize {
        let (pre, post) = self.padding(len);
        (pre + len + post - self.fft_size) / self.hop + 1
    }
}

/// Periodic square-root Hann window.
pub fn sqrt_hann<T: Real>(n: usize) -> Vec<T> {
    (0..n)
        .map(|i| {
            let phase = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            T::lit((0.5 - 0.5 * phase.cos()).sqrt())
        })
        .collect()
}

/// Complex time-frequency representation of one channel, `frames x bins`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram<T> {
    frames: usize,
    bins: usize,
    config: StftConfig,
    signal_len: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> Spectrogram<T> {
    pub fn zeros(config: StftConfig, signal_len: usize) -> Self {
        let frames = config.num_frames(signal_len);
        let bins = config.num_bins();
        Self {
            frames,
            bins,
            config,
            signal_len,
            data: vec![Complex::new(T::zero(), T::zero()); frames * bins],
        }
    }

    /// Wraps raw row-major data; its size must match the frame count for `signal_len`.
    pub fn from_data(
        config: StftConfig,
        signal_len: usize,
        data: Vec<Complex<T>>,
    ) -> Result<Self> {
        let mut s = Self::zeros(config, signal_len);
        if data.len() != s.data.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {}x{} spectrogram",
                data.len(),
                s.frames,
                s.bins
            )));
        }
        s.data = data;
        Ok(s)
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn config(&self) -> StftConfig {
        self.config
    }

    pub fn signal_len(&self) -> usize {
        self.signal_len
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    #[inline]
    pub fn at(&self, frame: usize, bin: usize) -> Complex<T> {
        self.data[frame * self.bins + bin]
    }

    #[inline]
    pub fn at_mut(&mut self, frame: usize, bin: usize) -> &mut Complex<T> {
        &mut self.data[frame * self.bins + bin]
    }

    pub fn frame(&self, frame: usize) -> &[Complex<T>] {
        &self.data[frame * self.bins..(frame + 1) * self.bins]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.frames == other.frames
            && self.bins == other.bins
            && self.config == other.config
            && self.signal_len == other.signal_len
    }

    pub fn check_shape(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "{}x{} (len {}) vs {}x{} (len {})",
                self.frames,
                self.bins,
                self.signal_len,
                other.frames,
                other.bins,
                other.signal_len
            )))
        }
    }

    /// Total energy `sum |X|^2` over all bins.
    pub fn energy(&self) -> T {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Real inner product `Re sum X conj(Y)`.
    pub fn inner(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// Elementwise product with another spectrogram of the same shape.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (o, b) in out.data.iter_mut().zip(&other.data) {
            *o = *o * *b;
        }
        Ok(out)
    }

    pub fn scaled(&self, a: T) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = v.scale(a);
        }
        out
    }

    /// `self + a * other`.
    pub fn add_scaled(&self, other: &Self, a: T) -> Result<Self> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (o, b) in out.data.iter_mut().zip(&other.data) {
            *o += b.scale(a);
        }
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Planned transform pair for one configuration.
pub struct Stft<T: Real> {
    config: StftConfig,
    window: Vec<T>,
    ola_gain: T,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for Stft<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stft")
            .field("config", &self.config)
            .field("ola_gain", &self.ola_gain)
            .finish()
    }
}

impl<T: Real> Clone for Stft<T> {
    fn clone(&self) -> Self {
        Self {
            config: self.config,
            window: self.window.clone(),
            ola_gain: self.ola_gain,
            forward: Arc::clone(&self.forward),
            inverse: Arc::clone(&self.inverse),
        }
    }
}

impl<T: Real> Stft<T> {
    pub fn new(config: StftConfig) -> Result<Self> {
        config.validate()?;
        let window = sqrt_hann::<T>(config.fft_size);
        // the reconstruction condition is checked on the exact window, not its rounded copy
        let exact = sqrt_hann::<f64>(config.fft_size);
        let overlaps = config.fft_size / config.hop;
        let sums: Vec<f64> = (0..config.hop)
            .map(|r| (0..overlaps).map(|j| exact[r + j * config.hop].powi(2)).sum())
            .collect();
        let gain = sums[0];
        if sums.iter().any(|s| (s - gain).abs() > 1e-10 * gain.max(1.0)) {
            return Err(Error::InvalidConfig(
                "window pair violates constant overlap-add".into(),
            ));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            config,
            window,
            ola_gain: T::lit(gain),
            forward: planner.plan_fft_forward(config.fft_size),
            inverse: planner.plan_fft_inverse(config.fft_size),
        })
    }

    pub fn config(&self) -> StftConfig {
        self.config
    }

    pub fn window(&self) -> &[T] {
        &self.window
    }

    /// Overlap-add normalization constant `sum_m w^2[n + m hop]`.
    pub fn ola_gain(&self) -> T {
        self.ola_gain
    }

    fn check(&self, spec: &Spectrogram<T>) -> Result<()> {
        if spec.config != self.config {
            return Err(Error::ConfigMismatch(format!(
                "spectrogram made with {:?}, transform is {:?}",
                spec.config, self.config
            )));
        }
        Ok(())
    }

    fn padded(&self, x: &[T]) -> Vec<T> {
        let (pre, post) = self.config.padding(x.len());
        let mut buf = vec![T::zero(); pre + x.len() + post];
        buf[pre..pre + x.len()].copy_from_slice(x);
        buf
    }

    /// Analysis transform.
    pub fn forward(&self, x: &[T]) -> Result<Spectrogram<T>> {
        let n = self.config.fft_size;
        if x.len() < n {
            return Err(Error::SignalTooShort {
                len: x.len(),
                min: n,
            });
        }
        let padded = self.padded(x);
        let mut spec = Spectrogram::zeros(self.config, x.len());
        let bins = spec.bins;
        let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
        for t in 0..spec.frames {
            let start = t * self.config.hop;
            for (i, b) in buf.iter_mut().enumerate() {
                *b = Complex::new(padded[start + i] * self.window[i], T::zero());
            }
            self.forward.process(&mut buf);
            spec.data[t * bins..(t + 1) * bins].copy_from_slice(&buf[..bins]);
        }
        Ok(spec)
    }

    /// Overlap-add of windowed frames followed by normalization and trimming.
    fn overlap_add(&self, frames: usize, len: usize, mut frame: impl FnMut(usize, &mut [T])) -> Vec<T> {
        let n = self.config.fft_size;
        let (pre, post) = self.config.padding(len);
        let mut out = vec![T::zero(); pre + len + post];
        let mut buf = vec![T::zero(); n];
        for t in 0..frames {
            frame(t, &mut buf);
            let start = t * self.config.hop;
            for i in 0..n {
                out[start + i] += buf[i] * self.window[i];
            }
        }
        out.drain(..pre);
        out.truncate(len);
        out
    }

    /// Synthesis transform (inverse of [`Stft::forward`] on consistent spectrograms).
    pub fn inverse(&self, spec: &Spectrogram<T>) -> Result<Vec<T>> {
        self.check(spec)?;
        let n = self.config.fft_size;
        let scale = T::one() / (T::from_usize_lossy(n) * self.ola_gain);
        let mut full = vec![Complex::new(T::zero(), T::zero()); n];
        let inverse = &self.inverse;
        Ok(self.overlap_add(spec.frames, spec.signal_len, |t, buf| {
            hermitian_fill(spec.frame(t), &mut full);
            inverse.process(&mut full);
            for (b, c) in buf.iter_mut().zip(&full) {
                *b = c.re * scale;
            }
        }))
    }

    /// Adjoint of [`Stft::forward`] under `<X, S> = Re sum X conj(S)`.
    pub fn forward_adjoint(&self, spec: &Spectrogram<T>) -> Result<Vec<T>> {
        self.check(spec)?;
        let n = self.config.fft_size;
        let bins = spec.bins;
        let mut full = vec![Complex::new(T::zero(), T::zero()); n];
        let inverse = &self.inverse;
        Ok(self.overlap_add(spec.frames, spec.signal_len, |t, buf| {
            for v in full.iter_mut() {
                *v = Complex::new(T::zero(), T::zero());
            }
            full[..bins].copy_from_slice(spec.frame(t));
            inverse.process(&mut full);
            for (b, c) in buf.iter_mut().zip(&full) {
                *b = c.re;
            }
        }))
    }

    /// Adjoint of [`Stft::inverse`]: maps a time-domain gradient to a spectral one.
    ///
    /// Equals `D stft(g) / (N C)` with `D = diag(1, 2, ..., 2, 1)` and DC/Nyquist
    /// imaginary parts zero.
    pub fn inverse_adjoint(&self, g: &[T], signal_len: usize) -> Result<Spectrogram<T>> {
        if g.len() != signal_len {
            return Err(Error::ShapeMismatch(format!(
                "gradient of {} samples for a signal of {signal_len}",
                g.len()
            )));
        }
        let mut spec = self.forward(g)?;
        let n = self.config.fft_size;
        let base = T::one() / (T::from_usize_lossy(n) * self.ola_gain);
        let two = T::lit(2.0);
        let bins = spec.bins;
        for t in 0..spec.frames {
            for k in 0..bins {
                let v = spec.at_mut(t, k);
                if k == 0 || k == bins - 1 {
                    *v = Complex::new(v.re * base, T::zero());
                } else {
                    *v = v.scale(base * two);
                }
            }
        }
        Ok(spec)
    }
}

/// Builds a full Hermitian spectrum from the one-sided half.
fn hermitian_fill<T: Real>(half: &[Complex<T>], full: &mut [Complex<T>]) {
    let n = full.len();
    let bins = half.len();
    full[0] = Complex::new(half[0].re, T::zero());
    full[n / 2] = Complex::new(half[bins - 1].re, T::zero());
    for k in 1..bins - 1 {
        full[k] = half[k];
        full[n - k] = half[k].conj();
    }
}

/// One-shot analysis transform.
pub fn stft<T: Real>(x: &[T], config: StftConfig) -> Result<Spectrogram<T>> {
    Stft::new(config)?.forward(x)
}

/// One-shot synthesis transform.
pub fn istft<T: Real>(spec: &Spectrogram<T>, config: StftConfig) -> Result<Vec<T>> {
    Stft::new(config)?.inverse(spec)
}
