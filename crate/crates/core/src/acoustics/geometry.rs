use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Point or direction in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn distance(self, o: Self) -> f64 {
        (self - o).norm()
    }

    /// Unit vector in the x-y plane at `azimuth` radians.
    pub fn planar(azimuth: f64) -> Self {
        Self::new(azimuth.cos(), azimuth.sin(), 0.0)
    }

    /// `(azimuth, polar)` of this vector; polar is measured from +z.
    pub fn angles(self) -> (f64, f64) {
        let r = self.norm();
        let polar = if r > 0.0 {
            (self.z / r).clamp(-1.0, 1.0).acos()
        } else {
            std::f64::consts::FRAC_PI_2
        };
        (self.y.atan2(self.x), polar)
    }
}

impl Add for Vec3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Self;
    fn mul(self, a: f64) -> Self {
        Self::new(self.x * a, self.y * a, self.z * a)
    }
}

/// Radius of the circular part of the compact array.
pub const UCA_RADIUS: f64 = 0.015;
/// Azimuths of the three circular elements; element 0 is the look direction.
pub const UCA_AZIMUTHS_DEG: [f64; 3] = [30.0, 150.0, 270.0];

/// Microphone positions relative to the array center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    mics: Vec<Vec3>,
    reference: usize,
}

impl ArrayGeometry {
    pub fn new(mics: Vec<Vec3>, reference: usize) -> Self {
        assert!(reference < mics.len(), "reference index out of range");
        Self { mics, reference }
    }

    /// Center reference microphone plus a three-element circle of 1.5 cm radius.
    ///
    /// Channel order: reference, element at 30°, element at 150°, element at 270°.
    pub fn compact_uca() -> Self {
        let mut mics = vec![Vec3::default()];
        mics.extend(
            UCA_AZIMUTHS_DEG
                .iter()
                .map(|a| Vec3::planar(a.to_radians()) * UCA_RADIUS),
        );
        Self { mics, reference: 0 }
    }

    pub fn mics(&self) -> &[Vec3] {
        &self.mics
    }

    pub fn num_mics(&self) -> usize {
        self.mics.len()
    }

    pub fn reference(&self) -> usize {
        self.reference
    }

    /// Absolute microphone positions for an array centered at `center`.
    pub fn placed_at(&self, center: Vec3) -> Vec<Vec3> {
        self.mics.iter().map(|&m| center + m).collect()
    }

    /// Azimuth of microphone `q` as seen from the array center (`None` for the center mic).
    pub fn azimuth_of(&self, q: usize) -> Option<f64> {
        let m = self.mics[q];
        if m.x.hypot(m.y) < 1e-12 {
            None
        } else {
            Some(m.y.atan2(m.x))
        }
    }

    /// Short stable digest of the positions.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for m in &self.mics {
            for v in [m.x, m.y, m.z] {
                h.update(v.to_le_bytes());
            }
        }
        h.update((self.reference as u64).to_le_bytes());
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut w = a % two_pi;
    if w <= -std::f64::consts::PI {
        w += two_pi;
    } else if w > std::f64::consts::PI {
        w -= two_pi;
    }
    w
}
