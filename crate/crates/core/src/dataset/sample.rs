//! Rendering one scene into array mixtures and targets, and reading it back.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grids::Split;
use super::scene::{derive_seed, SceneSpec};
use super::speech::{normalize_rms, SpeechSource, SOURCE_LEVEL_DBFS};
use crate::acoustics::{render_source_rirs, ArrayGeometry, CardioidPattern, Directivity, RoomSpec, SimSettings, Vec3};
use crate::error::{Error, Result};
use crate::kv::KvConfig;
use crate::ndf::TrainItem;
use crate::scalar::Real;
use crate::signal::{read_wav, write_wav, BitDepth, Stft, StftConfig, Waveform};
use crate::targets::{beta_from_di, render_targets, NoiseSpec, TargetBundle, TargetRirs, FADE_LEN, SENSOR_SNR_DB};

/// Direction of the virtual microphone: the UCA element on channel 2.
pub const TARGET_AZIMUTH_DEG: f64 = 30.0;

/// Directional target settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetConfig {
    /// Cardioid order J.
    pub order: u32,
    pub target_azimuth_deg: f64,
    /// Diffuse gain; by default matched to the directivity index of the order.
    pub beta: f64,
    pub snr_db: f64,
    pub fade: usize,
}

impl TargetConfig {
    pub fn for_order(order: u32) -> Self {
        let pattern = CardioidPattern::new(order, TARGET_AZIMUTH_DEG.to_radians());
        Self {
            order,
            target_azimuth_deg: TARGET_AZIMUTH_DEG,
            beta: beta_from_di(pattern.nominal_di_db()).value,
            snr_db: SENSOR_SNR_DB,
            fade: FADE_LEN,
        }
    }

    /// Keys `order`, `beta`, `snr_db`, `fade`. A new order resets `beta` to its matched value
    /// unless `beta` is given too.
    pub fn apply(&mut self, cfg: &mut KvConfig) -> Result<()> {
        if let Some(order) = cfg.take::<u32>("order")? {
            if order == 0 {
                return Err(Error::InvalidConfig("order must be at least 1".into()));
            }
            let mut fresh = Self::for_order(order);
            fresh.snr_db = self.snr_db;
            fresh.fade = self.fade;
            *self = fresh;
        }
        cfg.take_into("beta", &mut self.beta)?;
        cfg.take_into("snr_db", &mut self.snr_db)?;
        cfg.take_into("fade", &mut self.fade)?;
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidConfig(format!("beta {} outside [0, 1]", self.beta)));
        }
        Ok(())
    }

    pub fn pattern(&self) -> CardioidPattern {
        CardioidPattern::new(self.order, self.target_azimuth_deg.to_radians())
    }
}

impl Default for TargetConfig {
    fn default() -> Self {
        Self::for_order(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRecord {
    pub azimuth_deg: f64,
    pub distance: f64,
    pub position: Vec3,
    pub speech: String,
    pub offset: usize,
    pub gain: f64,
}

/// One manifest line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneManifestRecord {
    pub id: String,
    pub split: Split,
    pub index: usize,
    pub seed: u64,
    pub room: RoomSpec,
    pub rt60: f64,
    pub center: Vec3,
    pub sources: Vec<SourceRecord>,
    pub order: u32,
    pub target_azimuth_deg: f64,
    pub beta: f64,
    pub snr_db: f64,
    pub noise_seed: u64,
    pub sample_rate: u32,
    pub num_samples: usize,
    pub geometry: String,
    /// WAV file name relative to the manifest.
    pub file: String,
}

/// Rendered audio and its record.
#[derive(Debug, Clone)]
pub struct Sample {
    pub bundle: TargetBundle,
    pub record: SceneManifestRecord,
}

/// Draws one clip per source, renders all responses and mixes the targets.
pub fn build_sample(
    scene: &SceneSpec,
    index: usize,
    speech: &SpeechSource,
    target: &TargetConfig,
    sim: &SimSettings,
    duration_s: f64,
) -> Result<Sample> {
    let len = (duration_s * sim.sample_rate as f64).round() as usize;
    if len == 0 {
        return Err(Error::InvalidConfig("sample duration rounds to zero samples".into()));
    }
    let geometry = ArrayGeometry::compact_uca();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(scene.seed, "speech", 0));
    let vdm = [Directivity::Cardioid(target.pattern())];
    let mut signals = Vec::with_capacity(scene.sources.len());
    let mut rirs = Vec::with_capacity(scene.sources.len());
    let mut sources = Vec::with_capacity(scene.sources.len());
    for s in &scene.sources {
        let mut clip = speech.draw(&mut rng, len)?;
        let gain = normalize_rms(&mut clip.samples, SOURCE_LEVEL_DBFS);
        let r = render_source_rirs(&scene.room, &geometry, scene.center, s.position, &vdm, sim)?;
        rirs.push(TargetRirs::from_source(r, 0, geometry.reference(), target.fade)?);
        signals.push(clip.samples);
        sources.push(SourceRecord {
            azimuth_deg: s.azimuth_deg,
            distance: s.distance,
            position: s.position,
            speech: clip.label,
            offset: clip.offset,
            gain,
        });
    }
    let noise_seed: u64 = rng.gen();
    let bundle = render_targets(
        &signals,
        &rirs,
        geometry.reference(),
        target.beta,
        Some(NoiseSpec {
            snr_db: target.snr_db,
            seed: noise_seed,
        }),
        sim.sample_rate,
    )?;
    let id = format!("{}_{index:06}", scene.split);
    let record = SceneManifestRecord {
        file: format!("{id}.wav"),
        id,
        split: scene.split,
        index,
        seed: scene.seed,
        room: scene.room,
        rt60: scene.room.rt60,
        center: scene.center,
        sources,
        order: target.order,
        target_azimuth_deg: target.target_azimuth_deg,
        beta: target.beta,
        snr_db: target.snr_db,
        noise_seed,
        sample_rate: sim.sample_rate,
        num_samples: len,
        geometry: geometry.digest(),
    };
    Ok(Sample { bundle, record })
}

/// Writes `<id>.wav` (seven float channels) and `<id>.json` into `dir`.
pub fn write_sample(dir: &Path, sample: &Sample) -> Result<()> {
    write_wav(dir.join(&sample.record.file), &sample.bundle.to_waveform()?, BitDepth::Float32)?;
    let sidecar = serde_json::json!({
        "record": sample.record,
        "mics": ArrayGeometry::compact_uca().mics(),
        "reference": 0,
    });
    std::fs::write(
        dir.join(format!("{}.json", sample.record.id)),
        serde_json::to_string_pretty(&sidecar)? + "\n",
    )?;
    Ok(())
}

/// Microphone channels and targets read back from a seven-channel file.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredSample {
    pub mics: Waveform<f64>,
    pub z_coh: Vec<f64>,
    pub z_diff: Vec<f64>,
    pub z_vdm: Vec<f64>,
}

pub fn load_sample(path: impl AsRef<Path>) -> Result<StoredSample> {
    let w = read_wav(path.as_ref())?;
    if w.num_channels() != 7 {
        return Err(Error::Dataset(format!(
            "{}: expected 7 channels, found {}",
            path.as_ref().display(),
            w.num_channels()
        )));
    }
    let fs = w.sample_rate();
    let mut ch = w.into_channels();
    let z_vdm = ch.pop().expect("7 channels");
    let z_diff = ch.pop().expect("7 channels");
    let z_coh = ch.pop().expect("7 channels");
    Ok(StoredSample {
        mics: Waveform::new(ch, fs)?,
        z_coh,
        z_diff,
        z_vdm,
    })
}

impl StoredSample {
    pub fn to_train_item<T: Real>(&self, stft: StftConfig, beta: f64) -> Result<TrainItem<T>> {
        let t = Stft::<T>::new(stft)?;
        let cast = |x: &[f64]| -> Vec<T> { x.iter().map(|&v| T::lit(v)).collect() };
        let mics = self
            .mics
            .channels()
            .iter()
            .map(|c| t.forward(&cast(c)))
            .collect::<Result<Vec<_>>>()?;
        Ok(TrainItem {
            mics,
            z_coh: cast(&self.z_coh),
            z_diff: cast(&self.z_diff),
            z_vdm: cast(&self.z_vdm),
            beta: T::lit(beta),
        })
    }
}
