//! Rendering image lists into sampled impulse responses.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::directivity::Directivity;
use super::geometry::Vec3;
use super::images::{ImageSource, SPEED_OF_SOUND};

/// Length of the windowed-sinc fractional-delay kernel.
pub const KERNEL_TAPS: usize = 81;
/// Default DC-blocking cutoff.
///
/// All image amplitudes share one sign, so without it the low-frequency sum grows with image
/// density and the late tail decays far slower than the requested reverberation time.
pub const DEFAULT_HIGHPASS_HZ: f64 = 100.0;
/// Amplitude distance law is floored at this distance.
pub const MIN_DISTANCE: f64 = 0.1;

/// Sampled room impulse response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpulseResponse {
    pub taps: Vec<f64>,
    pub sample_rate: u32,
    /// Tap index of the direct path, `round(fs d / c)`.
    pub direct_path_index: usize,
}

impl ImpulseResponse {
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|v| v * v).sum()
    }
}

/// Rendering parameters shared by every path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RirSettings {
    pub sample_rate: u32,
    pub speed_of_sound: f64,
    /// Output length in taps.
    pub len: usize,
    /// Cutoff of the DC-blocking filter applied to every response; `None` disables it.
    pub highpass_hz: Option<f64>,
}

impl RirSettings {
    pub fn new(sample_rate: u32, len: usize) -> Self {
        Self {
            sample_rate,
            speed_of_sound: SPEED_OF_SOUND,
            len,
            highpass_hz: Some(DEFAULT_HIGHPASS_HZ),
        }
    }

    /// Length covering `1.5 rt60` of propagation.
    pub fn for_rt60(sample_rate: u32, rt60: f64) -> Self {
        Self::new(sample_rate, (1.5 * rt60 * sample_rate as f64).ceil() as usize)
    }

    /// Farthest path that still lands inside the response, including the kernel half width.
    pub fn max_distance(&self) -> f64 {
        (self.len + KERNEL_TAPS / 2) as f64 * self.speed_of_sound / self.sample_rate as f64
    }

    pub fn delay_samples(&self, distance: f64) -> f64 {
        distance * self.sample_rate as f64 / self.speed_of_sound
    }
}

struct KernelTables {
    /// Sign of `sin(pi (m - frac))` relative to `sin(pi frac)`.
    sign: [f64; KERNEL_TAPS],
    offset: [f64; KERNEL_TAPS],
    cos: [f64; KERNEL_TAPS],
    sin: [f64; KERNEL_TAPS],
}

fn tables() -> &'static KernelTables {
    static TABLES: OnceLock<KernelTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let half = (KERNEL_TAPS / 2) as i64;
        let mut t = KernelTables {
            sign: [0.0; KERNEL_TAPS],
            offset: [0.0; KERNEL_TAPS],
            cos: [0.0; KERNEL_TAPS],
            sin: [0.0; KERNEL_TAPS],
        };
        for (i, m) in (-half..=half).enumerate() {
            t.sign[i] = if m % 2 == 0 { -1.0 } else { 1.0 };
            t.offset[i] = m as f64;
            let a = 2.0 * PI * m as f64 / KERNEL_TAPS as f64;
            t.cos[i] = a.cos();
            t.sin[i] = a.sin();
        }
        t
    })
}

/// Kernel taps for one delay.
struct Kernel {
    /// Output index of `weights[0]`, possibly negative.
    start: i64,
    weights: [f64; KERNEL_TAPS],
}

impl Kernel {
    fn new(delay: f64) -> Self {
        let half = (KERNEL_TAPS / 2) as i64;
        let center = delay.round() as i64;
        let frac = delay - center as f64; // in [-0.5, 0.5]
        let mut weights = [0.0; KERNEL_TAPS];
        if frac == 0.0 {
            weights[half as usize] = 1.0;
        } else {
            let t = tables();
            // sin(pi (m - frac)) = -(-1)^m sin(pi frac); window angle by the addition formula
            let scale = (PI * frac).sin() / PI;
            let a = 2.0 * PI * frac / KERNEL_TAPS as f64;
            let (cf, sf) = (a.cos(), a.sin());
            for k in 0..KERNEL_TAPS {
                let window = 0.5 * (1.0 + t.cos[k] * cf + t.sin[k] * sf);
                weights[k] = scale * t.sign[k] / (t.offset[k] - frac) * window;
            }
        }
        Self {
            start: center - half,
            weights,
        }
    }

/// Overlap of the kernel with `[0, len)`: (first weight, first tap, count).
    fn span(&self, len: usize) -> Option<(usize, usize, usize)> {
        let lo = self.start.max(0);
        let hi = (self.start + KERNEL_TAPS as i64).min(len as i64);
        (lo < hi).then(|| ((lo - self.start) as usize, lo as usize, (hi - lo) as usize))
    }

    fn add_to(&self, taps: &mut [f64], amplitude: f64) {
        if let Some((w0, t0, n)) = self.span(taps.len()) {
            if n == KERNEL_TAPS {
                let out: &mut [f64; KERNEL_TAPS] =
                    (&mut taps[t0..t0 + KERNEL_TAPS]).try_into().expect("full span");
                for (o, w) in out.iter_mut().zip(&self.weights) {
                    *o += amplitude * w;
                }
            } else {
                for (o, w) in taps[t0..t0 + n].iter_mut().zip(&self.weights[w0..w0 + n]) {
                    *o += amplitude * w;
                }
            }
        }
    }
}

/// Adds `amplitude * kernel(t - delay)` to `taps`, where the kernel is a Hann-windowed sinc.
pub fn add_fractional_impulse(taps: &mut [f64], delay: f64, amplitude: f64) {
    Kernel::new(delay).add_to(taps, amplitude);
}

/// Second-order DC-blocking high-pass (zeros at 1 and `exp(-w)`, poles at `exp(-w +- jw)`).
pub fn highpass_in_place(taps: &mut [f64], cutoff_hz: f64, sample_rate: u32) {
    let w = 2.0 * PI * cutoff_hz / sample_rate as f64;
    let r1 = (-w).exp();
    let b1 = 2.0 * r1 * w.cos();
    let b2 = -r1 * r1;
    let a1 = -(1.0 + r1);
    let (mut y1, mut y2) = (0.0, 0.0);
    for v in taps.iter_mut() {
        let y0 = b1 * y1 + b2 * y2 + *v;
        *v = y0 + a1 * y1 + r1 * y2;
        y2 = y1;
        y1 = y0;
    }
}

/// Sums every image path into an impulse response.
///
/// Each path contributes `attenuation / max(distance, 0.1) * gain(azimuth, polar)` at delay
/// `distance / c`. The first image must be the direct path.
pub fn synth_rir(
    images: &[ImageSource],
    directivity: &Directivity,
    settings: &RirSettings,
) -> ImpulseResponse {
    synth_rirs(images, std::slice::from_ref(directivity), settings)
        .pop()
        .expect("one directivity")
}

/// Several responses sharing one image list and one kernel evaluation per path.
pub fn synth_rirs(
    images: &[ImageSource],
    directivities: &[Directivity],
    settings: &RirSettings,
) -> Vec<ImpulseResponse> {
    let paths = images.iter().map(|i| (i.attenuation, i.distance, i.azimuth, i.polar));
    let direct = images.first().map(|i| i.distance).unwrap_or(0.0);
    render_paths(paths, direct, directivities, settings)
}

/// Responses at `receiver` from image positions, recomputing distances and incidence angles.
pub fn synth_rirs_at(
    images: &[ImageSource],
    receiver: Vec3,
    directivities: &[Directivity],
    settings: &RirSettings,
) -> Vec<ImpulseResponse> {
    let need_angles = directivities.iter().any(|d| !matches!(d, Directivity::Omni));
    let paths = images.iter().map(|i| {
        let offset = i.position - receiver;
        let (az, polar) = if need_angles {
            offset.angles()
        } else {
            (0.0, 0.0)
        };
        (i.attenuation, offset.norm(), az, polar)
    });
    let direct = images
        .first()
        .map(|i| i.position.distance(receiver))
        .unwrap_or(0.0);
    render_paths(paths, direct, directivities, settings)
}

fn render_paths(
    paths: impl Iterator<Item = (f64, f64, f64, f64)>,
    direct: f64,
    directivities: &[Directivity],
    settings: &RirSettings,
) -> Vec<ImpulseResponse> {
    let mut out = vec![vec![0.0; settings.len]; directivities.len()];
    let mut gains = vec![0.0; directivities.len()];
    for (attenuation, distance, azimuth, polar) in paths {
        let kernel = Kernel::new(settings.delay_samples(distance));
        if kernel.span(settings.len).is_none() {
            continue;
        }
        let base = attenuation / distance.max(MIN_DISTANCE);
        for (g, d) in gains.iter_mut().zip(directivities) {
            *g = d.gain(azimuth, polar);
        }
        for (taps, g) in out.iter_mut().zip(&gains) {
            kernel.add_to(taps, base * g);
        }
    }
    out.into_iter()
        .map(|mut taps| {
            if let Some(fc) = settings.highpass_hz {
                highpass_in_place(&mut taps, fc, settings.sample_rate);
            }
            ImpulseResponse {
                taps,
                sample_rate: settings.sample_rate,
                direct_path_index: direct_path_index(direct, settings),
            }
        })
        .collect()
}

pub fn direct_path_index(distance: f64, settings: &RirSettings) -> usize {
    settings.delay_samples(distance).round() as usize
}
