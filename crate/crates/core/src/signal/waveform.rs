use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default sample rate of every simulated signal.
pub const SAMPLE_RATE: u32 = 16_000;

/// Multichannel time-domain buffer, channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform<T> {
    channels: Vec<Vec<T>>,
    sample_rate: u32,
}

impl<T: Real> Waveform<T> {
    pub fn new(channels: Vec<Vec<T>>, sample_rate: u32) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::InvalidWaveform("no channels".into()));
        }
        if sample_rate == 0 {
            return Err(Error::InvalidWaveform("sample rate must be positive".into()));
        }
        let len = channels[0].len();
        if let Some(bad) = channels.iter().position(|c| c.len() != len) {
            return Err(Error::InvalidWaveform(format!(
                "channel {bad} has {} samples, channel 0 has {len}",
                channels[bad].len()
            )));
        }
        if channels.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidWaveform("non-finite sample".into()));
        }
        Ok(Self {
            channels,
            sample_rate,
        })
    }

    pub fn mono(samples: Vec<T>, sample_rate: u32) -> Result<Self> {
        Self::new(vec![samples], sample_rate)
    }

    pub fn zeros(num_channels: usize, len: usize, sample_rate: u32) -> Self {
        Self {
            channels: vec![vec![T::zero(); len]; num_channels.max(1)],
            sample_rate,
        }
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_secs(&self) -> f64 {
        self.len() as f64 / self.sample_rate as f64
    }

    pub fn channel(&self, index: usize) -> &[T] {
        &self.channels[index]
    }

    pub fn channels(&self) -> &[Vec<T>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<T>> {
        self.channels
    }

    /// Converts every sample to another scalar type.
    pub fn cast<U: Real>(&self) -> Waveform<U> {
        Waveform {
            channels: self
                .channels
                .iter()
                .map(|c| c.iter().map(|&x| U::lit(x.to_f64_lossy())).collect())
                .collect(),
            sample_rate: self.sample_rate,
        }
    }

    /// New waveform made of the selected channels, in the given order.
    pub fn select(&self, order: &[usize]) -> Result<Self> {
        let mut out = Vec::with_capacity(order.len());
        for &i in order {
            let ch = self.channels.get(i).ok_or_else(|| {
                Error::ShapeMismatch(format!("channel {i} of {}", self.channels.len()))
            })?;
            out.push(ch.clone());
        }
        Self::new(out, self.sample_rate)
    }

    /// Appends the channels of `other`.
    pub fn stack(mut self, other: &Waveform<T>) -> Result<Self> {
        if other.len() != self.len() || other.sample_rate != self.sample_rate {
            return Err(Error::ShapeMismatch(format!(
                "cannot stack {}@{} with {}@{}",
                self.len(),
                self.sample_rate,
                other.len(),
                other.sample_rate
            )));
        }
        self.channels.extend(other.channels.iter().cloned());
        Ok(self)
    }
}

/// Sum of squares.
pub fn energy<T: Real>(x: &[T]) -> T {
    x.iter().map(|&v| v * v).sum()
}

/// Root-mean-square level in dBFS (full scale = amplitude 1.0), `-inf` for silence.
pub fn rms_dbfs<T: Real>(x: &[T]) -> f64 {
    if x.is_empty() {
        return f64::NEG_INFINITY;
    }
    let ms = energy(x).to_f64_lossy() / x.len() as f64;
    10.0 * ms.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_channels() {
        let err = Waveform::new(vec![vec![0.0f64; 3], vec![0.0; 4]], 16_000).unwrap_err();
        assert!(matches!(err, Error::InvalidWaveform(_)));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Waveform::mono(vec![0.0f64, f64::NAN], 16_000).is_err());
        assert!(Waveform::mono(vec![0.0f64], 0).is_err());
    }

    #[test]
    fn full_scale_sine_is_minus_three_dbfs() {
        let x: Vec<f64> = (0..16_000)
            .map(|n| (2.0 * std::f64::consts::PI * 1000.0 * n as f64 / 16_000.0).sin())
            .collect();
        assert!((rms_dbfs(&x) + 3.0103).abs() < 1e-3);
    }
}
