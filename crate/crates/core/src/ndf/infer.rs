//! Running a trained network on microphone signals.

use num_complex::Complex;

use super::features::Features;
use super::model::infer_masks;
use super::params::NetworkParams;
use crate::acoustics::ArrayProcessor;
use crate::error::{Error, Result};
use crate::signal::{Spectrogram, Stft, StftConfig, Waveform};

/// Time-domain outputs for one input.
#[derive(Debug, Clone, PartialEq)]
pub struct NdfOutput {
    pub coh: Vec<f64>,
    pub diff: Vec<f64>,
    /// `coh + beta diff`.
    pub vdm: Vec<f64>,
}

/// Dual-mask directional filter with fixed weights.
#[derive(Debug, Clone)]
pub struct NdfProcessor {
    params: NetworkParams<f32>,
    stft: Stft<f32>,
    pub beta: f64,
    /// Optional channel permutation applied before the network, e.g. `[0, 2, 1, 3]`.
    pub channel_order: Option<Vec<usize>>,
}

impl NdfProcessor {
    pub fn new(params: NetworkParams<f32>, stft: StftConfig, beta: f64) -> Result<Self> {
        Ok(Self {
            params,
            stft: Stft::new(stft)?,
            beta,
            channel_order: None,
        })
    }

    pub fn params(&self) -> &NetworkParams<f32> {
        &self.params
    }

    /// Masks applied to the first channel, then synthesized.
    pub fn run(&self, mics: &Waveform<f64>) -> Result<NdfOutput> {
        let mics = match &self.channel_order {
            Some(order) => mics.select(order)?,
            None => mics.clone(),
        };
        if mics.num_channels() != self.params.config.channels {
            return Err(Error::ShapeMismatch(format!(
                "{} input channels, network expects {}",
                mics.num_channels(),
                self.params.config.channels
            )));
        }
        let mics = mics.cast::<f32>();
        let specs = mics
            .channels()
            .iter()
            .map(|c| self.stft.forward(c))
            .collect::<Result<Vec<_>>>()?;
        let feats = Features::from_spectrograms(&specs)?;
        let masks = infer_masks(&self.params, &feats)?;
        let y1 = &specs[0];
        let synth = |m: &[Complex<f32>]| -> Result<Vec<f64>> {
            let s = Spectrogram::from_data(y1.config(), y1.signal_len(), m.iter().zip(y1.data()).map(|(a, b)| a * b).collect())?;
            Ok(self.stft.inverse(&s)?.into_iter().map(f64::from).collect())
        };
        let coh = synth(&masks.coh)?;
        let diff = synth(&masks.diff)?;
        let vdm = coh.iter().zip(&diff).map(|(c, d)| c + self.beta * d).collect();
        Ok(NdfOutput { coh, diff, vdm })
    }
}

impl ArrayProcessor for NdfProcessor {
    fn process(&mut self, mics: &Waveform<f64>, _incidence: f64) -> Result<Vec<f64>> {
        Ok(self.run(mics)?.vdm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndf::NetConfig;

    fn processor() -> NdfProcessor {
        let p = NetworkParams::init(NetConfig {
            channels: 4,
            bins: 257,
            hidden_freq: 8,
            hidden_time: 8,
            seed: 2,
        })
        .unwrap();
        NdfProcessor::new(p, StftConfig::default(), 0.5).unwrap()
    }

    fn input(n: usize) -> Waveform<f64> {
        let ch = (0..4)
            .map(|c| (0..n).map(|i| ((i * (c + 3)) as f64 * 0.01).sin() * 0.1).collect())
            .collect();
        Waveform::new(ch, 16_000).unwrap()
    }

    #[test]
    fn output_lengths_and_combination() {
        let out = processor().run(&input(4000)).unwrap();
        assert_eq!(out.vdm.len(), 4000);
        for i in 0..4000 {
            assert!((out.vdm[i] - out.coh[i] - 0.5 * out.diff[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn channel_order_changes_input() {
        let mut p = processor();
        let a = p.run(&input(2000)).unwrap();
        p.channel_order = Some(vec![0, 2, 1, 3]);
        let b = p.run(&input(2000)).unwrap();
        assert_ne!(a.vdm, b.vdm);
        let swapped = input(2000).select(&[0, 2, 1, 3]).unwrap();
        p.channel_order = None;
        assert_eq!(p.run(&swapped).unwrap().vdm, b.vdm);
    }

    #[test]
    fn wrong_channel_count_is_rejected() {
        let w = Waveform::new(vec![vec![0.1; 1000]; 3], 16_000).unwrap();
        assert!(processor().run(&w).is_err());
    }
}
