use serde::{Deserialize, Serialize};

use super::geometry::Vec3;
use crate::error::{Error, Result};

/// Sabine constant `24 ln 10 / c` in s/m at c = 343 m/s.
pub const SABINE_CONSTANT: f64 = 0.161;

/// Shoebox room with a uniform reverberation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoomSpec {
    pub length: f64,
    pub width: f64,
    pub height: f64,
    pub rt60: f64,
}

impl RoomSpec {
    pub fn new(length: f64, width: f64, height: f64, rt60: f64) -> Result<Self> {
        let room = Self {
            length,
            width,
            height,
            rt60,
        };
        if !(length > 0.0 && width > 0.0 && height > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "room dimensions must be positive: {length} x {width} x {height}"
            )));
        }
        if !(rt60 > 0.0 && rt60.is_finite()) {
            return Err(Error::InvalidConfig(format!("rt60 must be positive, got {rt60}")));
        }
        Ok(room)
    }

    pub fn dims(&self) -> [f64; 3] {
        [self.length, self.width, self.height]
    }

    pub fn volume(&self) -> f64 {
        self.length * self.width * self.height
    }

    pub fn surface(&self) -> f64 {
        2.0 * (self.length * self.width + self.length * self.height + self.width * self.height)
    }

    /// True when `p` lies at least `margin` meters inside every wall.
    pub fn contains(&self, p: Vec3, margin: f64) -> bool {
        let d = self.dims();
        [p.x, p.y, p.z]
            .iter()
            .zip(d)
            .all(|(&v, l)| v > margin && v < l - margin)
    }

    /// Smallest distance from `p` to any wall.
    pub fn wall_clearance(&self, p: Vec3) -> f64 {
        let d = self.dims();
        [p.x, p.y, p.z]
            .iter()
            .zip(d)
            .map(|(&v, l)| v.min(l - v))
            .fold(f64::INFINITY, f64::min)
    }

    /// Sabine absorption coefficient `0.161 V / (S rt60)`.
    pub fn sabine_absorption(&self) -> f64 {
        SABINE_CONSTANT * self.volume() / (self.surface() * self.rt60)
    }
}

/// How a reverberation time is mapped to wall reflection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AbsorptionModel {
    /// `alpha = 0.161 V / (S T)`.
    Sabine,
    /// `alpha = 1 - exp(-0.161 V / (S T))`.
    Eyring,
    /// Reflection coefficient solved so the image lattice decays by 60 dB in `T`.
    #[default]
    Lattice,
}

impl std::str::FromStr for AbsorptionModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sabine" => Ok(Self::Sabine),
            "eyring" => Ok(Self::Eyring),
            "lattice" => Ok(Self::Lattice),
            other => Err(Error::InvalidConfig(format!("unknown absorption model {other:?}"))),
        }
    }
}

/// Uniform wall reflection coefficient `sqrt(1 - alpha)` from the Sabine formula.
pub fn rt60_to_reflection(room: &RoomSpec) -> Result<f64> {
    reflection_coefficient(room, AbsorptionModel::Sabine)
}

/// Uniform wall reflection coefficient for the chosen absorption model.
pub fn reflection_coefficient(room: &RoomSpec, model: AbsorptionModel) -> Result<f64> {
    let sabine = room.sabine_absorption();
    let alpha = match model {
        AbsorptionModel::Sabine => sabine,
        AbsorptionModel::Eyring => 1.0 - (-sabine).exp(),
        AbsorptionModel::Lattice => {
            if sabine >= 1.0 {
                sabine
            } else {
                1.0 - lattice_reflection(room).powi(2)
            }
        }
    };
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::UnachievableRt60 {
            rt60: room.rt60,
            alpha,
        });
    }
    Ok((1.0 - alpha).sqrt())
}

/// Energy envelope of a shoebox image lattice, averaged over arrival directions.
///
/// An image at distance `d` in direction `u` has undergone about `d sum_i |u_i| / L_i`
/// reflections, and the image count per unit delay cancels the spreading loss, so the late
/// energy at time `t` is `mean_u r^(2 c t g(u))`. Shoeboxes decay more slowly than the
/// Sabine or Eyring estimate because grazing directions see few walls.
struct LatticeDecay {
    /// Histogram of `g(u)` over the sphere: (bin center, weight).
    rates: Vec<(f64, f64)>,
}

impl LatticeDecay {
    fn new(room: &RoomSpec) -> Self {
        let inv = room.dims().map(|l| 1.0 / l);
        let (np, na) = (128usize, 256usize);
        let g_of = |u: [f64; 3]| u.iter().zip(inv).map(|(c, i)| c.abs() * i).sum::<f64>();
        let mut samples = Vec::with_capacity(np * na);
        for i in 0..np {
            let cz = -1.0 + (i as f64 + 0.5) * 2.0 / np as f64;
            let sz = (1.0 - cz * cz).sqrt();
            for j in 0..na {
                let a = (j as f64 + 0.5) * std::f64::consts::TAU / na as f64;
                samples.push(g_of([sz * a.cos(), sz * a.sin(), cz]));
            }
        }
        let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().copied().fold(0.0, f64::max);
        let bins = 256;
        let width = (hi - lo) / bins as f64 + 1e-12;
        let mut counts = vec![0.0; bins];
        for g in &samples {
            counts[(((g - lo) / width) as usize).min(bins - 1)] += 1.0;
        }
        let total = samples.len() as f64;
        let rates = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0.0)
            .map(|(b, &c)| (lo + (b as f64 + 0.5) * width, c / total))
            .collect();
        Self { rates }
    }

    /// T20-style decay time (fit between -5 and -25 dB of the backward integral, truncated
    /// at `horizon` seconds) for reflection coefficient `r`.
    fn decay_time(&self, r: f64, horizon: f64) -> f64 {
        let dt = 1e-3;
        let steps = (horizon / dt).ceil() as usize;
        let k = 2.0 * r.ln() * super::images::SPEED_OF_SOUND;
        // each direction bin decays geometrically per step
        let mut terms: Vec<f64> = self.rates.iter().map(|(g, w)| w * (0.5 * k * dt * g).exp()).collect();
        let ratios: Vec<f64> = self.rates.iter().map(|(g, _)| (k * dt * g).exp()).collect();
        let env: Vec<f64> = (0..steps)
            .map(|_| {
                let e = terms.iter().sum();
                terms.iter_mut().zip(&ratios).for_each(|(t, q)| *t *= q);
                e
            })
            .collect();
        let mut acc = 0.0;
        let mut tail: Vec<f64> = env
            .iter()
            .rev()
            .map(|e| {
                acc += e;
                acc
            })
            .collect();
        tail.reverse();
        let pts: Vec<(f64, f64)> = tail
            .iter()
            .enumerate()
            .map(|(n, e)| (n as f64 * dt, 10.0 * (e / tail[0]).log10()))
            .filter(|(_, db)| (-25.0..=-5.0).contains(db))
            .collect();
        if pts.len() < 2 {
            return 0.0;
        }
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        -60.0 * sxx / sxy
    }
}

/// Reflection coefficient for which the direction-averaged image lattice of `room` has a
/// backward-integrated decay time of `room.rt60` over a response of `1.5 rt60`.
pub fn lattice_reflection(room: &RoomSpec) -> f64 {
    let decay = LatticeDecay::new(room);
    let horizon = 1.5 * room.rt60;
    // decay time grows with r; bisect on ln r
    let (mut lo, mut hi) = (-20.0f64, -1e-9f64);
    for _ in 0..48 {
        let mid = 0.5 * (lo + hi);
        if decay.decay_time(mid.exp(), horizon) < room.rt60 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}
