//! Network input: interleaved real and imaginary parts of every channel.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::Spectrogram;

/// `[T][F][2Q]` features laid out as `re_1, im_1, re_2, im_2, ...` per bin.
#[derive(Debug, Clone, PartialEq)]
pub struct Features<T> {
    pub frames: usize,
    pub bins: usize,
    pub channels: usize,
    pub data: Vec<T>,
    /// Divisor applied to every value: mean magnitude of the reference channel.
    pub scale: T,
}

impl<T: Real> Features<T> {
    /// Builds features from per-channel spectrograms; channel 0 is the reference.
    pub fn from_spectrograms(mics: &[Spectrogram<T>]) -> Result<Self> {
        let first = mics
            .first()
            .ok_or_else(|| Error::ShapeMismatch("no input channels".into()))?;
        for m in &mics[1..] {
            first.check_shape(m)?;
        }
        if mics.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite("input spectrogram".into()));
        }
        let (frames, bins, q) = (first.frames(), first.bins(), mics.len());
        let mean = first.data().iter().map(|c| c.norm()).sum::<T>() / T::from_usize_lossy(first.data().len().max(1));
        let scale = if mean > T::zero() { mean } else { T::one() };
        let inv = T::one() / scale;
        let mut data = vec![T::zero(); frames * bins * 2 * q];
        for (c, m) in mics.iter().enumerate() {
            for (i, v) in m.data().iter().enumerate() {
                data[i * 2 * q + 2 * c] = v.re * inv;
                data[i * 2 * q + 2 * c + 1] = v.im * inv;
            }
        }
        Ok(Self {
            frames,
            bins,
            channels: q,
            data,
            scale,
        })
    }
}
