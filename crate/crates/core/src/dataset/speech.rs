//! Speech material: a filtered file catalog and a synthetic speech-like generator.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{read_wav, rms_dbfs, SAMPLE_RATE};

pub const MIN_LOUDNESS_DBFS: f64 = -42.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeechEntry {
    pub path: PathBuf,
    pub len: usize,
    pub rms_dbfs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub path: PathBuf,
    pub reason: String,
}

/// Accepted files in path order, plus the ones left out and why.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpeechCatalog {
    pub entries: Vec<SpeechEntry>,
    pub rejected: Vec<Rejection>,
}

fn check_file(path: &Path, min_dbfs: f64) -> std::result::Result<SpeechEntry, String> {
    let w = read_wav(path).map_err(|e| format!("unreadable: {e}"))?;
    if w.sample_rate() != SAMPLE_RATE {
        return Err(format!("unsupported rate {} Hz", w.sample_rate()));
    }
    if w.num_channels() != 1 {
        return Err(format!("not mono ({} channels)", w.num_channels()));
    }
    let level = rms_dbfs(w.channel(0));
    if !(level >= min_dbfs) {
        return Err(format!("below loudness threshold ({level:.2} dBFS < {min_dbfs} dBFS)"));
    }
    Ok(SpeechEntry {
        path: path.to_path_buf(),
        len: w.len(),
        rms_dbfs: level,
    })
}

/// Scans `dir` (not recursively) for `.wav` files at 16 kHz whose whole-clip RMS level is at
/// least `min_dbfs`.
pub fn ingest_speech(dir: impl AsRef<Path>, min_dbfs: f64) -> Result<SpeechCatalog> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("wav"))
        })
        .collect();
    paths.sort();
    let mut cat = SpeechCatalog::default();
    for p in paths {
        match check_file(&p, min_dbfs) {
            Ok(e) => cat.entries.push(e),
            Err(reason) => cat.rejected.push(Rejection { path: p, reason }),
        }
    }
    if cat.entries.is_empty() {
        return Err(Error::Dataset(format!(
            "no qualifying speech files in {} ({} rejected)",
            dir.display(),
            cat.rejected.len()
        )));
    }
    Ok(cat)
}

/// Two-pole resonator, unit gain at its center frequency.
struct Resonator {
    y1: f64,
    y2: f64,
}

impl Resonator {
    fn step(&mut self, x: f64, freq: f64, bw: f64, fs: f64) -> f64 {
        let r = (-std::f64::consts::PI * bw / fs).exp();
        let a1 = -2.0 * r * (2.0 * std::f64::consts::PI * freq / fs).cos();
        let a2 = r * r;
        let y = (1.0 - r) * x - a1 * self.y1 - a2 * self.y2;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

/// Speech-like test signal: syllable-rate bursts of a glottal pulse train and breath noise
/// shaped by two drifting formants, with pauses. Normalized to -25 dBFS RMS.
pub fn synthetic_speech(seed: u64, len: usize, sample_rate: u32) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs = sample_rate as f64;
    let mut env = vec![0.0; len];
    let mut pos = (rng.gen_range(0.0..0.1) * fs) as usize;
    while pos < len {
        let syl = (rng.gen_range(0.12..0.32) * fs) as usize;
        let peak = rng.gen_range(0.4..1.0);
        for k in 0..syl.min(len - pos) {
            env[pos + k] = peak * (std::f64::consts::PI * k as f64 / syl as f64).sin().powi(2);
        }
        let gap = if rng.gen_bool(0.15) { rng.gen_range(0.25..0.5) } else { rng.gen_range(0.02..0.12) };
        pos += syl + (gap * fs) as usize;
    }
    let f0_base = rng.gen_range(95.0..210.0);
    let (mut f1, mut f2) = (rng.gen_range(350.0..800.0), rng.gen_range(1000.0..2400.0));
    let (mut t1, mut t2) = (f1, f2);
    let mut phase = 0.0;
    let mut r1 = Resonator { y1: 0.0, y2: 0.0 };
    let mut r2 = Resonator { y1: 0.0, y2: 0.0 };
    let mut out = Vec::with_capacity(len);
    for (n, &e) in env.iter().enumerate() {
        if n % (fs as usize / 20) == 0 {
            t1 = rng.gen_range(300.0..850.0);
            t2 = rng.gen_range(900.0..2600.0);
        }
        f1 += (t1 - f1) * 0.002;
        f2 += (t2 - f2) * 0.002;
        let f0 = f0_base * (1.0 + 0.08 * (2.0 * std::f64::consts::PI * 3.0 * n as f64 / fs).sin());
        phase += f0 / fs;
        let pulse = if phase >= 1.0 {
            phase -= 1.0;
            1.0
        } else {
            0.0
        };
        let noise: f64 = StandardNormal.sample(&mut rng);
        let x = pulse * 4.0 + 0.05 * noise;
        let y = r1.step(x, f1, 90.0, fs) + 0.6 * r2.step(x, f2, 140.0, fs);
        out.push(e * y);
    }
    normalize_rms(&mut out, SOURCE_LEVEL_DBFS);
    out
}

/// Level every dry source is scaled to before rendering.
pub const SOURCE_LEVEL_DBFS: f64 = -25.0;

/// Scales `x` to `dbfs` RMS; silent input is left alone. Returns the applied gain.
pub fn normalize_rms(x: &mut [f64], dbfs: f64) -> f64 {
    let level = rms_dbfs(x);
    if !level.is_finite() {
        return 1.0;
    }
    let g = 10f64.powf((dbfs - level) / 20.0);
    x.iter_mut().for_each(|v| *v *= g);
    g
}

/// Where dry source signals come from.
#[derive(Debug, Clone, PartialEq)]
pub enum SpeechSource {
    Synthetic,
    Catalog(SpeechCatalog),
}

/// A drawn clip and its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Clip {
    pub samples: Vec<f64>,
    pub label: String,
    pub offset: usize,
}

impl SpeechSource {
    /// Draws `len` samples: a random excerpt of a random file, zero-padded when shorter.
    pub fn draw<R: Rng>(&self, rng: &mut R, len: usize) -> Result<Clip> {
        match self {
            SpeechSource::Synthetic => {
                let seed: u64 = rng.gen();
                Ok(Clip {
                    samples: synthetic_speech(seed, len, SAMPLE_RATE),
                    label: format!("synthetic:{seed:016x}"),
                    offset: 0,
                })
            }
            SpeechSource::Catalog(cat) => {
                if cat.entries.is_empty() {
                    return Err(Error::Dataset("empty speech catalog".into()));
                }
                let e = &cat.entries[rng.gen_range(0..cat.entries.len())];
                let w = read_wav(&e.path)?;
                let x = w.channel(0);
                let offset = if x.len() > len { rng.gen_range(0..=x.len() - len) } else { 0 };
                let mut samples = vec![0.0; len];
                let n = (x.len() - offset).min(len);
                samples[..n].copy_from_slice(&x[offset..offset + n]);
                Ok(Clip {
                    samples,
                    label: e.path.display().to_string(),
                    offset,
                })
            }
        }
    }
}
