//! Directivity-pattern probing with far-field white-noise plane waves.
//!
//! For every probe azimuth the array is driven by one plane wave carrying the same white
//! noise. The gain at frequency `f` is `10 log10(PSD_out(f) / PSD_ref(f))`, where the
//! reference is the reference microphone and PSDs are frame averages of the STFT power.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use super::directivity::CardioidPattern;
use super::geometry::{ArrayGeometry, Vec3};
use super::images::SPEED_OF_SOUND;
use crate::error::{Error, Result};
use crate::signal::{Stft, StftConfig, Waveform, SAMPLE_RATE};

/// Something that turns array signals into one output channel.
///
/// `incidence` is the true azimuth of the probing plane wave. Real processors ignore it;
/// analytic references use it to apply an ideal gain.
pub trait ArrayProcessor {
    fn process(&mut self, mics: &Waveform<f64>, incidence: f64) -> Result<Vec<f64>>;
}

impl<F> ArrayProcessor for F
where
    F: FnMut(&Waveform<f64>, f64) -> Result<Vec<f64>>,
{
    fn process(&mut self, mics: &Waveform<f64>, incidence: f64) -> Result<Vec<f64>> {
        self(mics, incidence)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ProbeSettings {
    pub duration_secs: f64,
    pub sample_rate: u32,
    pub stft: StftConfig,
    pub speed_of_sound: f64,
    pub seed: u64,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        Self {
            duration_secs: 10.0,
            sample_rate: SAMPLE_RATE,
            stft: StftConfig::default(),
            speed_of_sound: SPEED_OF_SOUND,
            seed: 0x5eed,
        }
    }
}

/// Gains in dB indexed `[azimuth][frequency]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternTable {
    pub azimuths: Vec<f64>,
    pub freqs_hz: Vec<f64>,
    pub gains_db: Vec<Vec<f64>>,
}

impl PatternTable {
    /// Index of the azimuth closest to `azimuth` (radians, wrapped).
    pub fn nearest_azimuth(&self, azimuth: f64) -> usize {
        let d = |a: f64| super::geometry::wrap_angle(a - azimuth).abs();
        (0..self.azimuths.len())
            .min_by(|&i, &j| d(self.azimuths[i]).total_cmp(&d(self.azimuths[j])))
            .unwrap_or(0)
    }
}

/// Array signals for a far-field plane wave arriving from `azimuth` in the x-y plane.
///
/// Microphone `q` receives `s(t - tau_q)` with `tau_q = -(p_q . u) / c`, applied exactly as a
/// circular delay in the frequency domain.
pub fn plane_wave(
    signal: &[f64],
    geometry: &ArrayGeometry,
    azimuth: f64,
    sample_rate: u32,
    speed_of_sound: f64,
) -> Result<Waveform<f64>> {
    let n = signal.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut spec: Vec<Complex<f64>> = signal.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fwd.process(&mut spec);
    let u = Vec3::planar(azimuth);
    let channels = geometry
        .mics()
        .iter()
        .map(|&p| {
            let tau = -p.dot(u) / speed_of_sound;
            if tau == 0.0 {
                return signal.to_vec();
            }
            let mut buf: Vec<Complex<f64>> = spec
                .iter()
                .enumerate()
                .map(|(k, &v)| {
                    let signed = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                    let f = signed * sample_rate as f64 / n as f64;
                    v * Complex::from_polar(1.0, -2.0 * std::f64::consts::PI * f * tau)
                })
                .collect();
            inv.process(&mut buf);
            buf.iter().map(|c| c.re / n as f64).collect()
        })
        .collect();
    Waveform::new(channels, sample_rate)
}

/// Frame-averaged power per STFT bin.
pub fn power_spectrum(stft: &Stft<f64>, x: &[f64]) -> Result<Vec<f64>> {
    let spec = stft.forward(x)?;
    let mut psd = vec![0.0; spec.bins()];
    for t in 0..spec.frames() {
        for (p, c) in psd.iter_mut().zip(spec.frame(t)) {
            *p += c.norm_sqr();
        }
    }
    for p in &mut psd {
        *p /= spec.frames() as f64;
    }
    Ok(psd)
}

/// Measures the gain of `processor` on a grid of azimuths (radians) and frequencies (Hz).
pub fn measure_pattern<P: ArrayProcessor + ?Sized>(
    processor: &mut P,
    geometry: &ArrayGeometry,
    azimuths: &[f64],
    freqs_hz: &[f64],
    settings: &ProbeSettings,
) -> Result<PatternTable> {
    let len = (settings.duration_secs * settings.sample_rate as f64).round() as usize;
    if len < settings.stft.fft_size {
        return Err(Error::InvalidConfig("probe shorter than one frame".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let noise: Vec<f64> = (0..len).map(|_| StandardNormal.sample(&mut rng)).collect();
    let stft = Stft::<f64>::new(settings.stft)?;
    let bin_width = settings.sample_rate as f64 / settings.stft.fft_size as f64;
    let nbins = settings.stft.num_bins();
    let bins: Vec<usize> = freqs_hz
        .iter()
        .map(|f| ((f / bin_width).round() as usize).min(nbins - 1))
        .collect();

    let mut gains_db = Vec::with_capacity(azimuths.len());
    for &az in azimuths {
        let mics = plane_wave(
            &noise,
            geometry,
            az,
            settings.sample_rate,
            settings.speed_of_sound,
        )?;
        let out = processor.process(&mics, az)?;
        if out.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "processor returned {} samples for {len}",
                out.len()
            )));
        }
        let ref_psd = power_spectrum(&stft, mics.channel(geometry.reference()))?;
        let out_psd = power_spectrum(&stft, &out)?;
        gains_db.push(
            bins.iter()
                .map(|&k| 10.0 * (out_psd[k] / ref_psd[k]).log10())
                .collect(),
        );
    }
    Ok(PatternTable {
        azimuths: azimuths.to_vec(),
        freqs_hz: bins.iter().map(|&k| k as f64 * bin_width).collect(),
        gains_db,
    })
}

/// Ideal processor: the reference microphone scaled by the pattern gain at the true incidence.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticCardioid(pub CardioidPattern);

impl ArrayProcessor for AnalyticCardioid {
    fn process(&mut self, mics: &Waveform<f64>, incidence: f64) -> Result<Vec<f64>> {
        let g = self.0.gain(incidence, std::f64::consts::FRAC_PI_2);
        Ok(mics.channel(0).iter().map(|v| v * g).collect())
    }
}

/// One azimuth of a measured pattern, summarized over frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternRow {
    pub theta_deg: f64,
    pub analytic_db: f64,
    pub measured_db_mean: f64,
    pub measured_db_min: f64,
    pub measured_db_max: f64,
}

pub const PATTERN_CSV_HEADER: &str = "theta_deg,analytic_db,measured_db_mean,measured_db_min,measured_db_max";

/// Summarizes `table` per azimuth next to the formula value of `reference`.
pub fn pattern_rows(table: &PatternTable, reference: &CardioidPattern) -> Vec<PatternRow> {
    table
        .azimuths
        .iter()
        .zip(&table.gains_db)
        .map(|(&az, g)| {
            let n = g.len().max(1) as f64;
            PatternRow {
                theta_deg: az.to_degrees(),
                analytic_db: 20.0 * reference.gain(az, std::f64::consts::FRAC_PI_2).log10(),
                measured_db_mean: g.iter().sum::<f64>() / n,
                measured_db_min: g.iter().cloned().fold(f64::INFINITY, f64::min),
                measured_db_max: g.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect()
}

pub fn write_pattern_csv<W: std::io::Write>(rows: &[PatternRow], mut out: W) -> Result<()> {
    writeln!(out, "{PATTERN_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.theta_deg, r.analytic_db, r.measured_db_mean, r.measured_db_min, r.measured_db_max
        )?;
    }
    Ok(())
}

/// Azimuth grid `0, step, 2 step, ...` below 360 degrees, in radians.
pub fn azimuth_grid(step_deg: f64) -> Vec<f64> {
    let n = (360.0 / step_deg).round() as usize;
    (0..n).map(|i| (i as f64 * step_deg).to_radians()).collect()
}
