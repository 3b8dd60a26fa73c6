//! Moving-source scene, channel-swap steering and X-Y style stereo output.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acoustics::{render_source_rirs, ArrayGeometry, CardioidPattern, Directivity, RoomSpec, SimSettings, Vec3};
use crate::conv::Convolver;
use crate::error::{Error, Result};
use crate::kv::KvConfig;
use crate::metrics::segmental_level_diff;
use crate::ndf::NdfProcessor;
use crate::signal::{Stft, StftConfig, Waveform};
use crate::targets::{oracle_masks, sensor_noise, split_rirs, NoiseSpec, FADE_LEN};

/// Look directions of the two output channels, in degrees: (left, right).
pub const LOOKS_DEG: [f64; 2] = [150.0, 30.0];

/// Constant-distance source sweep; azimuth moves linearly in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub start_deg: f64,
    pub end_deg: f64,
    pub duration_s: f64,
    pub distance: f64,
}

impl Default for Trajectory {
    /// Clockwise from 180° to 0° in 12 s at 1.5 m.
    fn default() -> Self {
        Self {
            start_deg: 180.0,
            end_deg: 0.0,
            duration_s: 12.0,
            distance: 1.5,
        }
    }
}

impl Trajectory {
    pub fn azimuth_deg_at(&self, t: f64) -> f64 {
        let u = (t / self.duration_s).clamp(0.0, 1.0);
        self.start_deg + (self.end_deg - self.start_deg) * u
    }

    pub fn position_at(&self, center: Vec3, t: f64) -> Vec3 {
        center + Vec3::planar(self.azimuth_deg_at(t).to_radians()) * self.distance
    }

    /// Reflection about the 90° axis.
    pub fn mirrored(&self) -> Self {
        Self {
            start_deg: 180.0 - self.start_deg,
            end_deg: 180.0 - self.end_deg,
            ..*self
        }
    }

    /// Time at which the source passes `azimuth_deg`, if it does.
    pub fn passage_time(&self, azimuth_deg: f64) -> Option<f64> {
        let span = self.end_deg - self.start_deg;
        if span == 0.0 {
            return None;
        }
        let u = (azimuth_deg - self.start_deg) / span;
        (0.0..=1.0).contains(&u).then(|| u * self.duration_s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovingSceneConfig {
    pub room: RoomSpec,
    pub center: Vec3,
    pub trajectory: Trajectory,
    pub hop_s: f64,
    pub crossfade_s: f64,
    /// Cardioid order of the virtual microphones.
    pub order: u32,
    pub fade: usize,
    /// Sensor noise level relative to the clean reference; `None` renders without noise.
    pub snr_db: Option<f64>,
    pub noise_seed: u64,
    pub sim: SimSettings,
}

impl Default for MovingSceneConfig {
    /// 6 x 4 x 3.5 m room at 0.5 s with the array in the middle of the floor plan, 1.5 m up.
    fn default() -> Self {
        Self {
            room: RoomSpec {
                length: 6.0,
                width: 4.0,
                height: 3.5,
                rt60: 0.5,
            },
            center: Vec3::new(3.0, 2.0, 1.5),
            trajectory: Trajectory::default(),
            hop_s: 0.05,
            crossfade_s: 0.01,
            order: 1,
            fade: FADE_LEN,
            snr_db: Some(30.0),
            noise_seed: 0,
            sim: SimSettings::default(),
        }
    }
}

impl MovingSceneConfig {
    /// Applies overrides, consuming the keys it knows.
    pub fn apply(&mut self, cfg: &mut KvConfig) -> Result<()> {
        cfg.take_into("room_length", &mut self.room.length)?;
        cfg.take_into("room_width", &mut self.room.width)?;
        cfg.take_into("room_height", &mut self.room.height)?;
        cfg.take_into("rt60", &mut self.room.rt60)?;
        cfg.take_into("center_x", &mut self.center.x)?;
        cfg.take_into("center_y", &mut self.center.y)?;
        cfg.take_into("center_z", &mut self.center.z)?;
        cfg.take_into("start_deg", &mut self.trajectory.start_deg)?;
        cfg.take_into("end_deg", &mut self.trajectory.end_deg)?;
        cfg.take_into("duration_s", &mut self.trajectory.duration_s)?;
        cfg.take_into("distance", &mut self.trajectory.distance)?;
        if let Some(v) = cfg.take::<f64>("hop_ms")? {
            self.hop_s = v / 1000.0;
        }
        if let Some(v) = cfg.take::<f64>("crossfade_ms")? {
            self.crossfade_s = v / 1000.0;
        }
        cfg.take_into("order", &mut self.order)?;
        cfg.take_into("fade", &mut self.fade)?;
        if let Some(v) = cfg.take::<String>("snr_db")? {
            self.snr_db = match v.as_str() {
                "none" | "off" => None,
                s => Some(s.parse().map_err(|_| Error::InvalidConfig(format!("bad snr_db {s:?}")))?),
            };
        }
        cfg.take_into("noise_seed", &mut self.noise_seed)?;
        self.room = RoomSpec::new(self.room.length, self.room.width, self.room.height, self.room.rt60)?;
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let fs = self.sim.sample_rate as f64;
        let hop = (self.hop_s * fs).round() as usize;
        let xf = (self.crossfade_s * fs).round() as usize;
        if hop == 0 || self.trajectory.duration_s <= 0.0 {
            return Err(Error::InvalidConfig("hop and duration must be positive".into()));
        }
        if xf % 2 != 0 || xf > hop {
            return Err(Error::InvalidConfig(format!(
                "crossfade must be an even number of samples no longer than the hop ({xf} vs {hop})"
            )));
        }
        Ok(())
    }

    fn samples(&self) -> (usize, usize, usize) {
        let fs = self.sim.sample_rate as f64;
        (
            (self.trajectory.duration_s * fs).round() as usize,
            (self.hop_s * fs).round() as usize,
            (self.crossfade_s * fs).round() as usize,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopInfo {
    pub start: usize,
    pub azimuth_deg: f64,
    pub position: Vec3,
    pub direct_path_index: usize,
}

/// Array signals and per-look reference signals of a rendered sweep.
#[derive(Debug, Clone)]
pub struct MovingScene {
    pub mics: Waveform<f64>,
    pub clean_ref: Vec<f64>,
    /// Full cardioid signals at the array center, (left, right).
    pub vdm: [Vec<f64>; 2],
    /// Coherent targets per look.
    pub coh: [Vec<f64>; 2],
    /// Diffuse target, shared by both looks.
    pub diff: Vec<f64>,
    pub hops: Vec<HopInfo>,
    /// Per hop boundary: energy of the crossfade modulation term relative to the output
    /// energy in the crossfade, in dB, on the reference microphone.
    pub boundary_discontinuity_db: Vec<f64>,
}

const SIGNALS: usize = 9;

struct HopOutput {
    info: HopInfo,
    lo: usize,
    /// Signals over `[lo, hi)`: four microphones, vdm left/right, coh left/right, diff.
    out: Vec<Vec<f64>>,
}

/// Raised-cosine fade-in over `xf` samples, `c(k)` for `k` in `0..xf`.
fn fade_in(xf: usize) -> Vec<f64> {
    (0..xf)
        .map(|k| 0.5 - 0.5 * (std::f64::consts::PI * (k as f64 + 0.5) / xf as f64).cos())
        .collect()
}

/// Renders the sweep with the source frozen per hop; each hop's output is convolved exactly
/// and joined to its neighbours with a raised-cosine crossfade centred on the hop boundary.
pub fn render_moving_scene(cfg: &MovingSceneConfig, speech: &[f64]) -> Result<MovingScene> {
    cfg.validate()?;
    let (n, hop, xf) = cfg.samples();
    let half = xf / 2;
    let fs = cfg.sim.sample_rate as f64;
    let hops = n.div_ceil(hop);
    let n_out = n;
    let n = hops * hop;
    let mut x = speech.to_vec();
    x.resize(n, 0.0);
    let geometry = ArrayGeometry::compact_uca();
    let looks = LOOKS_DEG.map(|d| Directivity::Cardioid(CardioidPattern::new(cfg.order, d.to_radians())));
    let rir_len = cfg.sim.rir_settings(&cfg.room).len;

    for t in [0.0, cfg.trajectory.duration_s] {
        let p = cfg.trajectory.position_at(cfg.center, t);
        if !cfg.room.contains(p, 0.0) {
            return Err(Error::OutsideRoom(format!("trajectory point {p:?} at {t} s")));
        }
    }

    let outputs: Vec<HopOutput> = (0..hops)
        .into_par_iter()
        .map(|h| -> Result<HopOutput> {
            let start = h * hop;
            let end = (h + 1) * hop;
            let t = (start + end) as f64 / (2.0 * fs);
            let position = cfg.trajectory.position_at(cfg.center, t);
            let rirs = render_source_rirs(&cfg.room, &geometry, cfg.center, position, &looks, &cfg.sim)?;
            let (coh_l, diff) = split_rirs(&rirs.virtual_mics[0], &rirs.mics[0], cfg.fade)?;
            let (coh_r, _) = split_rirs(&rirs.virtual_mics[1], &rirs.mics[0], cfg.fade)?;
            let lo = if h == 0 { 0 } else { start - half };
            let hi = if end == n { n } else { end + half };
            let in_lo = lo.saturating_sub(rir_len - 1);
            let conv = Convolver::new(&x[in_lo..hi], rir_len);
            let filters = rirs
                .mics
                .iter()
                .chain(&rirs.virtual_mics)
                .chain([&coh_l, &coh_r, &diff]);
            let out = filters
                .map(|r| conv.apply(&r.taps)[lo - in_lo..].to_vec())
                .collect();
            Ok(HopOutput {
                info: HopInfo {
                    start,
                    azimuth_deg: cfg.trajectory.azimuth_deg_at(t),
                    position,
                    direct_path_index: rirs.virtual_mics[0].direct_path_index,
                },
                lo,
                out,
            })
        })
        .collect::<Result<_>>()?;

    let c = fade_in(xf);
    let mut sig = vec![vec![0.0; n]; SIGNALS];
    let mut disc = Vec::with_capacity(hops.saturating_sub(1));
    for (h, o) in outputs.iter().enumerate() {
        let hi = o.lo + o.out[0].len();
        for i in o.lo..hi {
            let k = i - o.lo;
            let mut w = 1.0;
            if h > 0 && k < xf {
                w = c[k];
            }
            let tail = hi - i;
            if h + 1 < hops && tail <= xf {
                w *= 1.0 - c[xf - tail];
            }
            for (s, y) in sig.iter_mut().zip(&o.out) {
                s[i] += w * y[k];
            }
        }
        if h > 0 {
            let prev = &outputs[h - 1];
            let (mut d, mut e) = (0.0, 0.0);
            for k in 0..xf {
                let i = o.lo + k;
                let step = if k == 0 { c[0] } else { c[k] - c[k - 1] };
                let diff = o.out[0][k] - prev.out[0][i - prev.lo];
                d += (step * diff).powi(2);
                let y = (1.0 - c[k]) * prev.out[0][i - prev.lo] + c[k] * o.out[0][k];
                e += y * y;
            }
            disc.push(10.0 * ((d + 1e-30) / (e + 1e-30)).log10());
        }
    }

    sig.iter_mut().for_each(|s| s.truncate(n_out));
    let mut it = sig.into_iter();
    let mut mics: Vec<Vec<f64>> = it.by_ref().take(4).collect();
    let vdm = [it.next().expect("vdm left"), it.next().expect("vdm right")];
    let coh = [it.next().expect("coh left"), it.next().expect("coh right")];
    let diff = it.next().expect("diff");
    let clean_ref = mics[0].clone();
    if let Some(snr_db) = cfg.snr_db {
        let noise = sensor_noise(
            &clean_ref,
            mics.len(),
            NoiseSpec {
                snr_db,
                seed: cfg.noise_seed,
            },
        )?;
        for (m, v) in mics.iter_mut().zip(noise) {
            m.iter_mut().zip(v).for_each(|(a, b)| *a += b);
        }
    }
    Ok(MovingScene {
        mics: Waveform::new(mics, cfg.sim.sample_rate)?,
        clean_ref,
        vdm,
        coh,
        diff,
        hops: outputs.into_iter().map(|o| o.info).collect(),
        boundary_discontinuity_db: disc,
    })
}

/// Channel order that presents look direction `look_deg` to a network trained on the 30°
/// element: 30° keeps the order, 150° exchanges channels 2 and 3.
pub fn swap_order(look_deg: f64) -> Result<[usize; 4]> {
    if (look_deg - 30.0).abs() < 1e-9 {
        Ok([0, 1, 2, 3])
    } else if (look_deg - 150.0).abs() < 1e-9 {
        Ok([0, 2, 1, 3])
    } else {
        Err(Error::InvalidConfig(format!("look direction {look_deg} deg is not 30 or 150")))
    }
}

pub fn steer_by_swap(mics: &Waveform<f64>, look_deg: f64) -> Result<Waveform<f64>> {
    if mics.num_channels() != 4 {
        return Err(Error::ShapeMismatch(format!("{} channels, expected 4", mics.num_channels())));
    }
    mics.select(&swap_order(look_deg)?)
}

/// How the per-look signals are produced.
pub enum StereoMode<'a> {
    /// Oracle masks from the rendered targets.
    Oracle { stft: StftConfig },
    /// The full cardioid signals; `beta` has no effect.
    IdealVdm,
    Model(&'a NdfProcessor),
}

/// Coherent and diffuse parts of each channel, (left, right).
#[derive(Debug, Clone, PartialEq)]
pub struct StereoParts {
    pub coh: [Vec<f64>; 2],
    pub diff: [Vec<f64>; 2],
}

impl StereoParts {
    /// `coh + beta diff` per channel.
    pub fn combine(&self, beta: f64) -> [Vec<f64>; 2] {
        [0, 1].map(|k| {
            self.coh[k]
                .iter()
                .zip(&self.diff[k])
                .map(|(c, d)| c + beta * d)
                .collect()
        })
    }
}

pub fn stereo_parts(mode: &StereoMode<'_>, scene: &MovingScene) -> Result<StereoParts> {
    let n = scene.mics.len();
    match mode {
        StereoMode::IdealVdm => Ok(StereoParts {
            coh: scene.vdm.clone(),
            diff: [vec![0.0; n], vec![0.0; n]],
        }),
        StereoMode::Oracle { stft } => {
            let t = Stft::<f64>::new(*stft)?;
            let y1 = t.forward(scene.mics.channel(0))?;
            let z_diff = t.forward(&scene.diff)?;
            let mut coh = Vec::with_capacity(2);
            let mut diff = Vec::with_capacity(2);
            for k in 0..2 {
                let masks = oracle_masks(&y1, &t.forward(&scene.coh[k])?, &z_diff)?;
                coh.push(t.inverse(&masks.coh.hadamard(&y1)?)?);
                diff.push(t.inverse(&masks.diff.hadamard(&y1)?)?);
            }
            Ok(StereoParts {
                coh: [coh.remove(0), coh.remove(0)],
                diff: [diff.remove(0), diff.remove(0)],
            })
        }
        StereoMode::Model(p) => {
            let mut coh = Vec::with_capacity(2);
            let mut diff = Vec::with_capacity(2);
            for look in LOOKS_DEG {
                let out = p.run(&steer_by_swap(&scene.mics, look)?)?;
                coh.push(out.coh);
                diff.push(out.diff);
            }
            Ok(StereoParts {
                coh: [coh.remove(0), coh.remove(0)],
                diff: [diff.remove(0), diff.remove(0)],
            })
        }
    }
}

/// Left/right stereo waveform.
pub fn stereo_render(mode: &StereoMode<'_>, scene: &MovingScene, beta: f64) -> Result<Waveform<f64>> {
    let [l, r] = stereo_parts(mode, scene)?.combine(beta);
    Waveform::new(vec![l, r], scene.mics.sample_rate())
}

/// Segment length and hop of the level-difference curve, in seconds.
pub const ILD_SEGMENT_S: f64 = 0.25;
pub const ILD_HOP_S: f64 = 0.125;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IldPoint {
    /// Segment center.
    pub time_s: f64,
    /// Positive when the left channel is louder.
    pub ild_db: f64,
    /// Combined energy of both channels in the segment.
    pub energy: f64,
}

pub fn ild_curve(left: &[f64], right: &[f64], sample_rate: u32) -> Result<Vec<IldPoint>> {
    let fs = sample_rate as f64;
    let seg = (ILD_SEGMENT_S * fs).round() as usize;
    let hop = (ILD_HOP_S * fs).round() as usize;
    let db = segmental_level_diff(left, right, seg, hop)?;
    Ok(db
        .into_iter()
        .enumerate()
        .map(|(i, ild_db)| {
            let s = i * hop;
            let e = |x: &[f64]| x[s..s + seg].iter().map(|v| v * v).sum::<f64>();
            IldPoint {
                time_s: (s as f64 + seg as f64 / 2.0) / fs,
                ild_db,
                energy: e(left) + e(right),
            }
        })
        .collect())
}

/// Header of the level-difference CSV; the column name carries the sign convention.
pub const ILD_CSV_HEADER: &str = "time_s,ild_db_left_over_right";

pub fn write_ild_csv<W: Write>(curve: &[IldPoint], mut out: W) -> Result<()> {
    writeln!(out, "{ILD_CSV_HEADER}")?;
    for p in curve {
        writeln!(out, "{},{}", p.time_s, p.ild_db)?;
    }
    Ok(())
}

/// Zero of the energy-weighted least-squares line through the curve.
pub fn ild_trend_zero(curve: &[IldPoint]) -> Option<f64> {
    let w: f64 = curve.iter().map(|p| p.energy).sum();
    if curve.len() < 2 || w <= 0.0 {
        return None;
    }
    let mt = curve.iter().map(|p| p.energy * p.time_s).sum::<f64>() / w;
    let my = curve.iter().map(|p| p.energy * p.ild_db).sum::<f64>() / w;
    let sxy: f64 = curve.iter().map(|p| p.energy * (p.time_s - mt) * (p.ild_db - my)).sum();
    let sxx: f64 = curve.iter().map(|p| p.energy * (p.time_s - mt).powi(2)).sum();
    if sxx <= 0.0 || sxy == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(mt - my / slope)
}

/// Energy-weighted mean of `|a - b|` over aligned curves.
pub fn mean_abs_ild_difference(a: &[IldPoint], b: &[IldPoint]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::ShapeMismatch("ILD curves differ in length".into()));
    }
    let w: f64 = a.iter().map(|p| p.energy).sum();
    Ok(a.iter().zip(b).map(|(p, q)| p.energy * (p.ild_db - q.ild_db).abs()).sum::<f64>() / w)
}

/// Energy-weighted mean of `|ild|`.
pub fn mean_abs_ild(curve: &[IldPoint]) -> f64 {
    let w: f64 = curve.iter().map(|p| p.energy).sum();
    curve.iter().map(|p| p.energy * p.ild_db.abs()).sum::<f64>() / w
}
