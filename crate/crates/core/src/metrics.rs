//! Energy-ratio SDR, coherent-to-diffuse ratio and segmental level differences.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::Spectrogram;

/// Upper limit reported by [`sdr`].
pub const SDR_CAP_DB: f64 = 100.0;
/// Energy floor for segmental level differences.
pub const SEGMENT_FLOOR: f64 = 1e-12;

/// `10 log10(sum ref^2 / sum (ref - est)^2)`, capped at +100 dB.
///
/// Scaling `est` and `reference` together leaves the value unchanged; scaling `est` alone
/// does not.
pub fn sdr<T: Real>(est: &[T], reference: &[T]) -> Result<f64> {
    if est.len() != reference.len() {
        return Err(Error::ShapeMismatch(format!(
            "estimate has {} samples, reference {}",
            est.len(),
            reference.len()
        )));
    }
    let signal: f64 = reference.iter().map(|r| r.to_f64_lossy().powi(2)).sum();
    if signal == 0.0 {
        return Err(Error::ZeroEnergy("reference signal".into()));
    }
    let error: f64 = est
        .iter()
        .zip(reference)
        .map(|(e, r)| (r.to_f64_lossy() - e.to_f64_lossy()).powi(2))
        .sum();
    Ok((10.0 * (signal / error).log10()).min(SDR_CAP_DB))
}

/// Coherent-to-diffuse energy ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cvdr {
    pub ratio: f64,
    pub db: f64,
    /// Set when the diffuse energy is zero and the ratio is reported as +infinity.
    pub infinite: bool,
}

pub fn cvdr<T: Real>(z_coh: &Spectrogram<T>, z_diff: &Spectrogram<T>) -> Result<Cvdr> {
    z_coh.check_shape(z_diff)?;
    let coh = z_coh.energy().to_f64_lossy();
    let diff = z_diff.energy().to_f64_lossy();
    if diff == 0.0 {
        return Ok(Cvdr {
            ratio: f64::INFINITY,
            db: f64::INFINITY,
            infinite: true,
        });
    }
    let ratio = coh / diff;
    Ok(Cvdr {
        ratio,
        db: 10.0 * ratio.log10(),
        infinite: false,
    })
}

/// `10 log10(E_left / E_right)` per segment of `seg_len` samples every `hop` samples.
/// Positive values mean the left channel is louder.
pub fn segmental_level_diff<T: Real>(left: &[T], right: &[T], seg_len: usize, hop: usize) -> Result<Vec<f64>> {
    if left.len() != right.len() {
        return Err(Error::ShapeMismatch(format!(
            "left has {} samples, right {}",
            left.len(),
            right.len()
        )));
    }
    if seg_len == 0 || hop == 0 {
        return Err(Error::InvalidConfig("segment length and hop must be positive".into()));
    }
    if left.len() < seg_len {
        return Ok(Vec::new());
    }
    let e = |x: &[T]| x.iter().map(|v| v.to_f64_lossy().powi(2)).sum::<f64>() + SEGMENT_FLOOR;
    Ok((0..=(left.len() - seg_len) / hop)
        .map(|i| {
            let s = i * hop;
            10.0 * (e(&left[s..s + seg_len]).log10() - e(&right[s..s + seg_len]).log10())
        })
        .collect())
}

/// One evaluated sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub scene_id: String,
    pub rt60: f64,
    pub metric: String,
    pub value_db: f64,
    pub cvdr_db: f64,
}

/// Per-sample rows with mean and median per metric.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub rows: Vec<MetricRow>,
}

impl MetricReport {
    pub fn push(&mut self, row: MetricRow) {
        self.rows.push(row);
    }

    /// (mean, median) of `metric` over finite rows.
    pub fn summary(&self, metric: &str) -> Option<(f64, f64)> {
        let mut v: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.metric == metric && r.value_db.is_finite())
            .map(|r| r.value_db)
            .collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        };
        Some((mean, median))
    }

    /// Columns `scene_id,rt60,metric,value_db,cvdr_db`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "scene_id,rt60,metric,value_db,cvdr_db")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.scene_id, r.rt60, r.metric, r.value_db, r.cvdr_db
            )?;
        }
        Ok(())
    }
}

/// One point of the SDR-versus-CVDR scatter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub cvdr_db: f64,
    pub sdr_db: f64,
    pub rt60: f64,
}

/// Inputs of one scatter point: target coherent and diffuse spectra plus an estimate and its
/// reference in the time domain.
pub struct ScatterSample<'a> {
    pub z_coh: &'a Spectrogram<f64>,
    pub z_diff: &'a Spectrogram<f64>,
    pub estimate: &'a [f64],
    pub reference: &'a [f64],
    pub rt60: f64,
}

pub fn scatter_points(samples: &[ScatterSample<'_>]) -> Result<Vec<ScatterPoint>> {
    if samples.is_empty() {
        return Err(Error::InvalidConfig("no samples for scatter report".into()));
    }
    samples
        .iter()
        .map(|s| {
            Ok(ScatterPoint {
                cvdr_db: cvdr(s.z_coh, s.z_diff)?.db,
                sdr_db: sdr(s.estimate, s.reference)?,
                rt60: s.rt60,
            })
        })
        .collect()
}

/// Columns `cvdr_dB,sdr_dB,rt60`, one row per sample.
pub fn scatter_report<W: Write>(samples: &[ScatterSample<'_>], mut out: W) -> Result<Vec<ScatterPoint>> {
    let points = scatter_points(samples)?;
    writeln!(out, "cvdr_dB,sdr_dB,rt60")?;
    for p in &points {
        writeln!(out, "{},{},{}", p.cvdr_db, p.sdr_db, p.rt60)?;
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{stft, StftConfig};

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        use rand::{Rng, SeedableRng};
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn sdr_values() {
        let x = noise(1000, 1);
        assert_eq!(sdr(&x, &x).unwrap(), SDR_CAP_DB);
        let half: Vec<f64> = x.iter().map(|v| 0.5 * v).collect();
        assert!((sdr(&half, &x).unwrap() - 6.0206).abs() < 1e-4);
        assert!(sdr(&vec![0.0; 1000], &x).unwrap().abs() < 1e-12);
        assert!(matches!(sdr(&x, &vec![0.0; 1000]), Err(Error::ZeroEnergy(_))));
    }

    #[test]
    fn cvdr_values() {
        let cfg = StftConfig::new(64, 32).unwrap();
        let x = noise(2000, 2);
        let s = stft(&x, cfg).unwrap();
        assert!(cvdr(&s, &s).unwrap().db.abs() < 1e-12);
        assert!((cvdr(&s.scaled(2.0), &s).unwrap().db - 6.0206).abs() < 1e-4);
        let inf = cvdr(&s, &s.scaled(0.0)).unwrap();
        assert!(inf.infinite && inf.ratio.is_infinite());
    }

    #[test]
    fn level_difference_values() {
        let x = noise(16_000, 3);
        let d = segmental_level_diff(&x, &x, 4000, 2000).unwrap();
        assert_eq!(d.len(), (16_000 - 4000) / 2000 + 1);
        assert!(d.iter().all(|v| v.abs() < 1e-12));
        let double: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let d = segmental_level_diff(&double, &x, 4000, 2000).unwrap();
        assert!(d.iter().all(|v| (v - 6.0206).abs() < 1e-4));
    }

    #[test]
    fn report_summary_and_csv() {
        let mut r = MetricReport::default();
        for (i, v) in [1.0, 5.0, 3.0].iter().enumerate() {
            r.push(MetricRow {
                scene_id: format!("s{i}"),
                rt60: 0.4,
                metric: "sdr".into(),
                value_db: *v,
                cvdr_db: 0.0,
            });
        }
        assert_eq!(r.summary("sdr"), Some((3.0, 3.0)));
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
    }
}
