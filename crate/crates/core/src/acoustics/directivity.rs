//! Higher-order cardioid directivity with a gain floor.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Null attenuation limit in dB.
pub const NULL_FLOOR_DB: f64 = -30.0;

/// Linear gain of the null floor, `10^(-30/20)`.
pub fn null_floor() -> f64 {
    10f64.powf(NULL_FLOOR_DB / 20.0)
}

/// J-th order cardioid aimed at `(azimuth, polar)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CardioidPattern {
    pub order: u32,
    pub azimuth: f64,
    pub polar: f64,
    pub floor: f64,
}

impl CardioidPattern {
    /// Pattern in the horizontal plane with the standard -30 dB floor.
    pub fn new(order: u32, azimuth: f64) -> Self {
        Self {
            order,
            azimuth,
            polar: std::f64::consts::FRAC_PI_2,
            floor: null_floor(),
        }
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn gain(&self, azimuth: f64, polar: f64) -> f64 {
        cardioid_gain(self, azimuth, polar)
    }

    /// Directivity index of the unfloored pattern, `10 log10(2J + 1)`.
    pub fn nominal_di_db(&self) -> f64 {
        10.0 * (2.0 * self.order as f64 + 1.0).log10()
    }

    /// Directivity index in dB by quadrature over the sphere.
    pub fn directivity_index_db(&self) -> f64 {
        // midpoint rule in (cos polar, azimuth); the pattern is smooth except at the floor kink
        let (nu, na) = (2000usize, 720usize);
        let mut acc = 0.0;
        for i in 0..nu {
            let u = -1.0 + (i as f64 + 0.5) * 2.0 / nu as f64;
            let polar = u.acos();
            for j in 0..na {
                let az = (j as f64 + 0.5) * 2.0 * std::f64::consts::PI / na as f64;
                acc += self.gain(az, polar).powi(2);
            }
        }
        let mean = acc / (nu * na) as f64;
        let on_axis = self.gain(self.azimuth, self.polar).powi(2);
        10.0 * (on_axis / mean).log10()
    }
}

/// Gain of `pattern` for a wave arriving from `(azimuth, polar)`.
///
/// `max((0.5 + 0.5 (sin p sin p_s cos(a - a_s) + cos p cos p_s))^J, floor)`
pub fn cardioid_gain<T: Real>(pattern: &CardioidPattern, azimuth: T, polar: T) -> T {
    let half = T::lit(0.5);
    let (az_s, pol_s) = (T::lit(pattern.azimuth), T::lit(pattern.polar));
    let cos_angle = polar.sin() * pol_s.sin() * (azimuth - az_s).cos() + polar.cos() * pol_s.cos();
    let raw = (half + half * cos_angle).max(T::zero()).powi(pattern.order as i32);
    raw.max(T::lit(pattern.floor))
}

/// Omnidirectional or cardioid receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Directivity {
    Omni,
    Cardioid(CardioidPattern),
}

impl Directivity {
    pub fn gain(&self, azimuth: f64, polar: f64) -> f64 {
        match self {
            Directivity::Omni => 1.0,
            Directivity::Cardioid(p) => p.gain(azimuth, polar),
        }
    }
}

impl From<CardioidPattern> for Directivity {
    fn from(p: CardioidPattern) -> Self {
        Directivity::Cardioid(p)
    }
}
