//! Coherent, diffuse and directional training targets.
//!
//! The directional response at the reference position is split at the direct-path tap `delta`:
//! its head (direct sound plus early reflections, faded out over `fade` taps) drives the
//! coherent target, while the complementary tail of the omnidirectional reference response
//! drives the diffuse target.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::acoustics::{ImpulseResponse, SourceRirs};
use crate::conv::Convolver;
use crate::error::{Error, Result};
use crate::ndf::mask::MaskPair;
use crate::scalar::Real;
use crate::signal::{energy, Spectrogram, Waveform};

/// Fade-out length in taps (60 ms at 16 kHz).
pub const FADE_LEN: usize = 960;
/// Sensor-noise level relative to the clean reference mixture.
pub const SENSOR_SNR_DB: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    /// Direct-path tap.
    pub delta: usize,
    /// Fade-out length.
    pub fade: usize,
    /// Response length.
    pub len: usize,
}

impl WindowSpec {
    pub fn new(delta: usize, fade: usize, len: usize) -> Result<Self> {
        if delta + fade > len {
            return Err(Error::InvalidWindow(format!(
                "direct path {delta} plus fade {fade} exceeds response length {len}"
            )));
        }
        Ok(Self { delta, fade, len })
    }
}

/// 1 before `delta`, the falling half of a Hann window over `fade` taps, then 0.
pub fn coh_window<T: Real>(spec: &WindowSpec) -> Result<Vec<T>> {
    let spec = WindowSpec::new(spec.delta, spec.fade, spec.len)?;
    let half = T::lit(0.5);
    let l = T::from_usize_lossy(spec.fade);
    Ok((0..spec.len)
        .map(|k| {
            if k < spec.delta {
                T::one()
            } else if k < spec.delta + spec.fade {
                let n = T::from_usize_lossy(k - spec.delta);
                half * (T::one() + (T::PI() * n / l).cos())
            } else {
                T::zero()
            }
        })
        .collect())
}

/// Complementary window `1 - w`.
pub fn inv_window<T: Real>(w: &[T]) -> Vec<T> {
    w.iter().map(|&v| T::one() - v).collect()
}

/// Splits a directional response into its windowed head and the omnidirectional tail.
///
/// The split point is the geometric direct-path tap of `rir_vdm`.
pub fn split_rirs(
    rir_vdm: &ImpulseResponse,
    rir_omni_ref: &ImpulseResponse,
    fade: usize,
) -> Result<(ImpulseResponse, ImpulseResponse)> {
    if rir_vdm.len() != rir_omni_ref.len() || rir_vdm.sample_rate != rir_omni_ref.sample_rate {
        return Err(Error::ShapeMismatch(format!(
            "directional response has {} taps at {} Hz, reference has {} at {} Hz",
            rir_vdm.len(),
            rir_vdm.sample_rate,
            rir_omni_ref.len(),
            rir_omni_ref.sample_rate
        )));
    }
    let spec = WindowSpec::new(rir_vdm.direct_path_index, fade, rir_vdm.len())?;
    let w = coh_window::<f64>(&spec)?;
    let coh = rir_vdm.taps.iter().zip(&w).map(|(h, w)| h * w).collect();
    let diff = rir_omni_ref
        .taps
        .iter()
        .zip(&w)
        .map(|(h, w)| h * (1.0 - w))
        .collect();
    let wrap = |taps| ImpulseResponse {
        taps,
        sample_rate: rir_vdm.sample_rate,
        direct_path_index: rir_vdm.direct_path_index,
    };
    Ok((wrap(coh), wrap(diff)))
}

/// Diffuse-part gain matched to a directivity index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Beta {
    pub di_db: f64,
    pub value: f64,
}

/// `beta = 10^(-DI/20)`.
pub fn beta_from_di(di_db: f64) -> Beta {
    Beta {
        di_db,
        value: 10f64.powf(-di_db / 20.0),
    }
}

/// Responses of one source needed for every target.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetRirs {
    pub mics: Vec<ImpulseResponse>,
    pub vdm: ImpulseResponse,
    pub coh: ImpulseResponse,
    pub diff: ImpulseResponse,
}

impl TargetRirs {
    /// Uses virtual microphone `vdm_index` and array microphone `reference` of `rirs`.
    pub fn from_source(
        rirs: SourceRirs,
        vdm_index: usize,
        reference: usize,
        fade: usize,
    ) -> Result<Self> {
        let vdm = rirs
            .virtual_mics
            .get(vdm_index)
            .cloned()
            .ok_or_else(|| Error::InvalidConfig(format!("no virtual microphone {vdm_index}")))?;
        let omni = rirs
            .mics
            .get(reference)
            .ok_or_else(|| Error::InvalidConfig(format!("no microphone {reference}")))?;
        let (coh, diff) = split_rirs(&vdm, omni, fade)?;
        Ok(Self {
            mics: rirs.mics,
            vdm,
            coh,
            diff,
        })
    }

    fn max_len(&self) -> usize {
        self.mics
            .iter()
            .chain([&self.vdm, &self.coh, &self.diff])
            .map(|r| r.len())
            .max()
            .unwrap_or(0)
    }
}

/// Sensor noise drawn from a seeded generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
}

/// Array mixtures and the three targets of one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetBundle {
    /// Noisy array signals.
    pub mics: Waveform<f64>,
    pub z_coh: Vec<f64>,
    pub z_diff: Vec<f64>,
    pub z_vdm: Vec<f64>,
    pub beta: f64,
    /// Clean reference-microphone mixture.
    pub clean_ref: Vec<f64>,
    /// Sensor noise added to each channel.
    pub noise: Waveform<f64>,
}

impl TargetBundle {
    pub fn len(&self) -> usize {
        self.z_vdm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z_vdm.is_empty()
    }

    /// `z_coh + beta z_diff`.
    pub fn recombined(&self) -> Vec<f64> {
        self.z_coh
            .iter()
            .zip(&self.z_diff)
            .map(|(c, d)| c + self.beta * d)
            .collect()
    }

    /// Seven channels: microphones, then `z_coh`, `z_diff`, `z_vdm`.
    pub fn to_waveform(&self) -> Result<Waveform<f64>> {
        let mut ch = self.mics.channels().to_vec();
        ch.extend([self.z_coh.clone(), self.z_diff.clone(), self.z_vdm.clone()]);
        Waveform::new(ch, self.mics.sample_rate())
    }
}

/// Convolves each source with its responses and sums over sources.
///
/// Outputs keep the source length. Sensor noise is white, independent across channels, and
/// scaled so its energy in every channel sits `snr_db` below the clean reference mixture.
pub fn render_targets(
    sources: &[Vec<f64>],
    rirs: &[TargetRirs],
    reference: usize,
    beta: f64,
    noise: Option<NoiseSpec>,
    sample_rate: u32,
) -> Result<TargetBundle> {
    if sources.is_empty() || sources.len() != rirs.len() {
        return Err(Error::InvalidConfig(format!(
            "{} sources with {} response sets",
            sources.len(),
            rirs.len()
        )));
    }
    let len = sources[0].len();
    let q = rirs[0].mics.len();
    if sources.iter().any(|s| s.len() != len) || rirs.iter().any(|r| r.mics.len() != q) {
        return Err(Error::ShapeMismatch("sources or response sets disagree".into()));
    }
    if reference >= q {
        return Err(Error::InvalidConfig(format!("reference {reference} of {q} channels")));
    }
    let mut mics = vec![vec![0.0; len]; q];
    let mut z_coh = vec![0.0; len];
    let mut z_diff = vec![0.0; len];
    let mut z_vdm = vec![0.0; len];
    for (n, (x, r)) in sources.iter().zip(rirs).enumerate() {
        if energy(x) == 0.0 {
            return Err(Error::ZeroEnergy(format!("source {n}")));
        }
        let conv = Convolver::new(x, r.max_len());
        for (acc, h) in mics.iter_mut().zip(&r.mics) {
            add_into(acc, &conv.apply(&h.taps));
        }
        add_into(&mut z_coh, &conv.apply(&r.coh.taps));
        add_into(&mut z_diff, &conv.apply(&r.diff.taps));
        add_into(&mut z_vdm, &conv.apply(&r.vdm.taps));
    }
    let clean_ref = mics[reference].clone();
    let noise_ch = match noise {
        Some(spec) => sensor_noise(&clean_ref, q, spec)?,
        None => vec![vec![0.0; len]; q],
    };
    for (m, v) in mics.iter_mut().zip(&noise_ch) {
        add_into(m, v);
    }
    Ok(TargetBundle {
        mics: Waveform::new(mics, sample_rate)?,
        z_coh,
        z_diff,
        z_vdm,
        beta,
        clean_ref,
        noise: Waveform::new(noise_ch, sample_rate)?,
    })
}

fn add_into(acc: &mut [f64], x: &[f64]) {
    for (a, v) in acc.iter_mut().zip(x) {
        *a += v;
    }
}

pub(crate) fn sensor_noise(clean_ref: &[f64], channels: usize, spec: NoiseSpec) -> Result<Vec<Vec<f64>>> {
    let target = energy(clean_ref) * 10f64.powf(-spec.snr_db / 10.0);
    if target == 0.0 {
        return Err(Error::ZeroEnergy("clean reference mixture".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok((0..channels)
        .map(|_| {
            let v: Vec<f64> = (0..clean_ref.len())
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let scale = (target / energy(&v)).sqrt();
            v.into_iter().map(|s| s * scale).collect()
        })
        .collect())
}

/// Oracle mask `Z / (Y1 + eps phase(Y1))` with each component clipped to `[-1, 1]`.
pub fn oracle_mask<T: Real>(y1: &Spectrogram<T>, z: &Spectrogram<T>, eps: T) -> Result<Spectrogram<T>> {
    y1.check_shape(z)?;
    let mut out = z.clone();
    let clip = |v: T| v.max(-T::one()).min(T::one());
    for (o, y) in out.data_mut().iter_mut().zip(y1.data()) {
        let mag = y.norm();
        let phase = if mag > T::zero() {
            y / mag
        } else {
            Complex::new(T::one(), T::zero())
        };
        let m = *o / (y + phase * eps);
        *o = Complex::new(clip(m.re), clip(m.im));
    }
    Ok(out)
}

/// Regularizer `1e-8` times the median reference magnitude.
pub fn oracle_epsilon<T: Real>(y1: &Spectrogram<T>) -> T {
    let mut mags: Vec<T> = y1.data().iter().map(|c| c.norm()).collect();
    if mags.is_empty() {
        return T::zero();
    }
    let mid = mags.len() / 2;
    let (_, m, _) = mags.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
    *m * T::lit(1e-8)
}

/// Oracle coherent and diffuse masks for one reference spectrum.
pub fn oracle_masks<T: Real>(
    y1: &Spectrogram<T>,
    z_coh: &Spectrogram<T>,
    z_diff: &Spectrogram<T>,
) -> Result<MaskPair<T>> {
    let eps = oracle_epsilon(y1);
    MaskPair::new(oracle_mask(y1, z_coh, eps)?, oracle_mask(y1, z_diff, eps)?)
}
