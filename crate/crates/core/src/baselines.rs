//! Far-field steering, a two-element null-steering differential beamformer, and the ideal
//! directional microphone used as the stereo reference.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::acoustics::pattern::ArrayProcessor;
use crate::acoustics::{
    render_source_rirs, ArrayGeometry, Directivity, RoomSpec, SimSettings, Vec3,
};
use crate::conv::convolve_same;
use crate::error::{Error, Result};
use crate::signal::{Spectrogram, Stft, StftConfig, Waveform};

type C64 = Complex<f64>;

/// Unit-modulus plane-wave response of every microphone at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub entries: Vec<C64>,
    pub azimuth: f64,
    pub freq_hz: f64,
    pub geometry: String,
}

/// `exp(-j 2 pi f tau_q)` with `tau_q = -(p_q . u) / c`; a wave from `azimuth` reaches
/// microphones on that side first.
pub fn steering(geometry: &ArrayGeometry, azimuth: f64, freq_hz: f64, speed_of_sound: f64) -> SteeringVector {
    SteeringVector {
        entries: steering_entries(geometry, azimuth, freq_hz, speed_of_sound),
        azimuth,
        freq_hz,
        geometry: geometry.digest(),
    }
}

fn steering_entries(geometry: &ArrayGeometry, azimuth: f64, freq_hz: f64, c: f64) -> Vec<C64> {
    let u = Vec3::planar(azimuth);
    geometry
        .mics()
        .iter()
        .map(|p| {
            let tau = -p.dot(u) / c;
            C64::from_polar(1.0, -2.0 * PI * freq_hz * tau)
        })
        .collect()
}

/// Per-frequency weights; the output is `w(f)^H y(f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamWeights {
    pub freqs_hz: Vec<f64>,
    /// `weights[k][q]`, zero on unused microphones.
    pub weights: Vec<Vec<C64>>,
    pub target: f64,
    pub null: f64,
}

impl BeamWeights {
    /// Complex response `w^H d(azimuth)` at design frequency `k`.
    pub fn response(&self, geometry: &ArrayGeometry, k: usize, azimuth: f64, c: f64) -> C64 {
        let d = steering_entries(geometry, azimuth, self.freqs_hz[k], c);
        self.weights[k].iter().zip(&d).map(|(w, d)| w.conj() * d).sum()
    }

    /// White-noise gain `1 / ||w||^2` in dB per design frequency.
    pub fn white_noise_gain_db(&self) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| -10.0 * w.iter().map(|v| v.norm_sqr()).sum::<f64>().log10())
            .collect()
    }

    /// CSV with columns `f_hz, re_1, im_1, ..., re_Q, im_Q`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let q = self.weights.first().map_or(0, |w| w.len());
        let mut header = vec!["f_hz".to_string()];
        for i in 1..=q {
            header.push(format!("re_{i}"));
            header.push(format!("im_{i}"));
        }
        writeln!(out, "{}", header.join(","))?;
        for (f, w) in self.freqs_hz.iter().zip(&self.weights) {
            let mut row = vec![format!("{f}")];
            for v in w {
                row.push(format!("{:e}", v.re));
                row.push(format!("{:e}", v.im));
            }
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Relative ridge used only when the 2x2 system is numerically singular.
pub const RIDGE: f64 = 1e-6;

/// Two-microphone design with unit response at `target` and a null at `null`.
///
/// At each frequency the system `[d_t^H; d_n^H] w = [1; 0]` over the pair is solved exactly.
/// Where it is singular (at DC, for example) a Tikhonov ridge of `1e-6 trace(A A^H)` gives the
/// minimum-norm compromise. If the pair cannot tell the two directions apart at any nonzero
/// design frequency the design fails.
pub fn dma_design(
    geometry: &ArrayGeometry,
    pair: (usize, usize),
    target: f64,
    null: f64,
    freqs_hz: &[f64],
    speed_of_sound: f64,
) -> Result<BeamWeights> {
    let q = geometry.num_mics();
    let (a, b) = pair;
    if a == b || a >= q || b >= q {
        return Err(Error::InvalidConfig(format!("invalid microphone pair {pair:?}")));
    }
    let mut weights = Vec::with_capacity(freqs_hz.len());
    let mut any_regular = false;
    for &f in freqs_hz {
        let dt = steering_entries(geometry, target, f, speed_of_sound);
        let dn = steering_entries(geometry, null, f, speed_of_sound);
        // rows of A are d^H restricted to the pair
        let m = [
            [dt[a].conj(), dt[b].conj()],
            [dn[a].conj(), dn[b].conj()],
        ];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let w2 = if det.norm() > 1e-9 {
            if f > 0.0 {
                any_regular = true;
            }
            // A^-1 [1, 0]^T
            [m[1][1] / det, -m[1][0] / det]
        } else {
            ridge_solve(&m)
        };
        let mut w = vec![C64::new(0.0, 0.0); q];
        w[a] = w2[0];
        w[b] = w2[1];
        weights.push(w);
    }
    if !any_regular && freqs_hz.iter().any(|&f| f > 0.0) {
        return Err(Error::SingularDesign(format!(
            "microphones {a} and {b} cannot separate {target:.4} and {null:.4} rad"
        )));
    }
    Ok(BeamWeights {
        freqs_hz: freqs_hz.to_vec(),
        weights,
        target,
        null,
    })
}

/// `w = A^H (A A^H + lambda I)^-1 [1, 0]^T`.
fn ridge_solve(m: &[[C64; 2]; 2]) -> [C64; 2] {
    let g = |i: usize, j: usize| m[i][0] * m[j][0].conj() + m[i][1] * m[j][1].conj();
    let trace = (g(0, 0) + g(1, 1)).re;
    let lambda = RIDGE * trace.max(f64::MIN_POSITIVE);
    let (g00, g01, g10, g11) = (g(0, 0) + lambda, g(0, 1), g(1, 0), g(1, 1) + lambda);
    let det = g00 * g11 - g01 * g10;
    let y = [g11 / det, -g10 / det];
    [
        m[0][0].conj() * y[0] + m[1][0].conj() * y[1],
        m[0][1].conj() * y[0] + m[1][1].conj() * y[1],
    ]
}

/// `out(t, f) = w(f)^H y(t, f)` for one spectrogram per microphone.
pub fn apply_beamformer(weights: &BeamWeights, mics: &[Spectrogram<f64>]) -> Result<Spectrogram<f64>> {
    let first = mics
        .first()
        .ok_or_else(|| Error::ShapeMismatch("no input channels".into()))?;
    if weights.weights.iter().any(|w| w.len() != mics.len()) {
        return Err(Error::ShapeMismatch(format!(
            "weights for {} channels, input has {}",
            weights.weights.first().map_or(0, |w| w.len()),
            mics.len()
        )));
    }
    if weights.freqs_hz.len() != first.bins() {
        return Err(Error::ShapeMismatch(format!(
            "{} design frequencies for {} bins",
            weights.freqs_hz.len(),
            first.bins()
        )));
    }
    for m in mics {
        first.check_shape(m)?;
    }
    let mut out = Spectrogram::zeros(first.config(), first.signal_len());
    for t in 0..first.frames() {
        for k in 0..first.bins() {
            let w = &weights.weights[k];
            *out.at_mut(t, k) = mics.iter().zip(w).map(|(m, w)| w.conj() * m.at(t, k)).sum();
        }
    }
    Ok(out)
}

/// STFT bin frequencies for `config`.
pub fn bin_frequencies(config: StftConfig, sample_rate: u32) -> Vec<f64> {
    (0..config.num_bins())
        .map(|k| k as f64 * sample_rate as f64 / config.fft_size as f64)
        .collect()
}

/// Differential beamformer as an array processor.
#[derive(Debug, Clone)]
pub struct DmaProcessor {
    pub geometry: ArrayGeometry,
    pub pair: (usize, usize),
    pub target: f64,
    pub null: f64,
    pub speed_of_sound: f64,
    /// Filter in the STFT domain; otherwise filter the whole signal with one long FFT.
    pub stft: Option<StftConfig>,
}

impl DmaProcessor {
    /// Center microphone plus the circular element at 30°, target 30°, null 210°.
    pub fn look_30(geometry: ArrayGeometry) -> Self {
        Self {
            geometry,
            pair: (0, 1),
            target: 30f64.to_radians(),
            null: 210f64.to_radians(),
            speed_of_sound: crate::acoustics::SPEED_OF_SOUND,
            stft: None,
        }
    }

    fn whole_signal(&self, mics: &Waveform<f64>) -> Result<Vec<f64>> {
        let n = mics.len();
        let fs = mics.sample_rate() as f64;
        let half = n / 2;
        let freqs: Vec<f64> = (0..=half).map(|k| k as f64 * fs / n as f64).collect();
        let w = dma_design(
            &self.geometry,
            self.pair,
            self.target,
            self.null,
            &freqs,
            self.speed_of_sound,
        )?;
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let mut acc = vec![C64::new(0.0, 0.0); n];
        for (q, ch) in mics.channels().iter().enumerate() {
            if w.weights.iter().all(|wk| wk[q] == C64::new(0.0, 0.0)) {
                continue;
            }
            let mut buf: Vec<C64> = ch.iter().map(|&v| C64::new(v, 0.0)).collect();
            fwd.process(&mut buf);
            for (k, v) in buf.iter().enumerate() {
                // real output: bins above n/2 use the conjugate-symmetric weight
                let wk = if k <= half {
                    w.weights[k][q].conj()
                } else {
                    w.weights[n - k][q]
                };
                acc[k] += wk * v;
            }
        }
        inv.process(&mut acc);
        Ok(acc.iter().map(|c| c.re / n as f64).collect())
    }
}

impl ArrayProcessor for DmaProcessor {
    fn process(&mut self, mics: &Waveform<f64>, _incidence: f64) -> Result<Vec<f64>> {
        let Some(cfg) = self.stft else {
            return self.whole_signal(mics);
        };
        let stft = Stft::<f64>::new(cfg)?;
        let specs = mics
            .channels()
            .iter()
            .map(|c| stft.forward(c))
            .collect::<Result<Vec<_>>>()?;
        let w = dma_design(
            &self.geometry,
            self.pair,
            self.target,
            self.null,
            &bin_frequencies(cfg, mics.sample_rate()),
            self.speed_of_sound,
        )?;
        stft.inverse(&apply_beamformer(&w, &specs)?)
    }
}

/// Ideal directional microphone at the array center: every source convolved with its
/// directional room response.
pub fn analytic_vdm(
    room: &RoomSpec,
    center: Vec3,
    sources: &[(Vec3, Vec<f64>)],
    pattern: &Directivity,
    settings: &SimSettings,
) -> Result<Vec<f64>> {
    let len = sources.first().map_or(0, |s| s.1.len());
    let single = ArrayGeometry::new(vec![Vec3::default()], 0);
    let mut out = vec![0.0; len];
    for (pos, x) in sources {
        if x.len() != len {
            return Err(Error::ShapeMismatch("sources differ in length".into()));
        }
        let rirs = render_source_rirs(room, &single, center, *pos, std::slice::from_ref(pattern), settings)?;
        for (o, v) in out.iter_mut().zip(convolve_same(x, &rirs.virtual_mics[0].taps)) {
            *o += v;
        }
    }
    Ok(out)
}
