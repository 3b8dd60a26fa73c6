//! Image-source enumeration for a shoebox room.

use serde::{Deserialize, Serialize};

use super::geometry::Vec3;
use super::room::{reflection_coefficient, AbsorptionModel, RoomSpec};
use crate::error::{Error, Result};

/// Speed of sound in m/s.
pub const SPEED_OF_SOUND: f64 = 343.0;

/// One propagation path seen from the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageSource {
    pub position: Vec3,
    /// Number of wall reflections.
    pub order: u32,
    /// Product of reflection coefficients along the path.
    pub attenuation: f64,
    /// Image-to-receiver distance in meters.
    pub distance: f64,
    /// Incidence azimuth at the receiver.
    pub azimuth: f64,
    /// Incidence polar angle at the receiver, from +z.
    pub polar: f64,
}

impl ImageSource {
    /// The same image observed from another receiver position.
    pub fn seen_from(&self, receiver: Vec3) -> Self {
        let offset = self.position - receiver;
        let (azimuth, polar) = offset.angles();
        Self {
            distance: offset.norm(),
            azimuth,
            polar,
            ..*self
        }
    }
}

/// Shoebox room with a resolved wall reflection coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shoebox {
    pub room: RoomSpec,
    pub reflection: f64,
}

impl Shoebox {
    pub fn new(room: RoomSpec, model: AbsorptionModel) -> Result<Self> {
        Ok(Self {
            room,
            reflection: reflection_coefficient(&room, model)?,
        })
    }

    pub fn with_reflection(room: RoomSpec, reflection: f64) -> Self {
        Self { room, reflection }
    }

    /// Reflection order whose lattice reaches `distance` meters in every direction.
    pub fn order_for_distance(&self, distance: f64) -> u32 {
        let d = self.room.dims();
        // an axis offset within `distance` needs at most distance/L + 2 reflections
        let order: f64 = d.iter().map(|l| (distance / l).ceil() + 2.0).sum();
        order as u32
    }

    /// Images with reflection order `<= max_order`, optionally limited to `max_distance`.
    ///
    /// The first entry is always the direct path.
    pub fn images(
        &self,
        source: Vec3,
        receiver: Vec3,
        max_order: u32,
        max_distance: Option<f64>,
    ) -> Result<Vec<ImageSource>> {
        if !self.room.contains(source, 0.0) {
            return Err(Error::OutsideRoom(format!("source {source:?}")));
        }
        if !self.room.contains(receiver, 0.0) {
            return Err(Error::OutsideRoom(format!("receiver {receiver:?}")));
        }
        let dims = self.room.dims();
        let src = [source.x, source.y, source.z];
        let rcv = [receiver.x, receiver.y, receiver.z];
        let max_d2 = max_distance.map(|d| d * d).unwrap_or(f64::INFINITY);
        let n = (max_order as i64 + 1) / 2;

        // per-axis candidates: (offset from receiver, reflections)
        let axis: Vec<Vec<(f64, u32)>> = (0..3)
            .map(|a| {
                let mut v = Vec::new();
                for m in -n..=n {
                    for q in 0..=1i64 {
                        let refl = ((m - q).abs() + m.abs()) as u32;
                        if refl > max_order {
                            continue;
                        }
                        let pos = (1 - 2 * q) as f64 * src[a] + 2.0 * m as f64 * dims[a];
                        let off = pos - rcv[a];
                        if off * off <= max_d2 {
                            v.push((off, refl));
                        }
                    }
                }
                v
            })
            .collect();

        let mut out = Vec::new();
        let direct_offset = source - receiver;
        out.push(self.image(direct_offset, receiver, 0));
        for &(dx, ox) in &axis[0] {
            for &(dy, oy) in &axis[1] {
                let oxy = ox + oy;
                let dxy2 = dx * dx + dy * dy;
                if oxy > max_order || dxy2 > max_d2 {
                    continue;
                }
                for &(dz, oz) in &axis[2] {
                    let order = oxy + oz;
                    if order == 0 || order > max_order || dxy2 + dz * dz > max_d2 {
                        continue;
                    }
                    out.push(self.image(Vec3::new(dx, dy, dz), receiver, order));
                }
            }
        }
        Ok(out)
    }

    fn image(&self, offset: Vec3, receiver: Vec3, order: u32) -> ImageSource {
        let (azimuth, polar) = offset.angles();
        ImageSource {
            position: receiver + offset,
            order,
            attenuation: self.reflection.powi(order as i32),
            distance: offset.norm(),
            azimuth,
            polar,
        }
    }
}

/// All images up to `max_order` reflections, using the default absorption model.
pub fn enumerate_images(
    room: &RoomSpec,
    source: Vec3,
    receiver: Vec3,
    max_order: u32,
) -> Result<Vec<ImageSource>> {
    Shoebox::new(*room, AbsorptionModel::default())?.images(source, receiver, max_order, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn room() -> RoomSpec {
        RoomSpec::new(8.0, 6.0, 4.0, 0.4).unwrap()
    }

    #[test]
    fn order_zero_is_direct_path() {
        let src = Vec3::new(3.0, 2.0, 1.5);
        let rcv = Vec3::new(5.0, 2.0, 1.5);
        let imgs = enumerate_images(&room(), src, rcv, 0).unwrap();
        assert_eq!(imgs.len(), 1);
        assert_eq!(imgs[0].position, src);
        assert!((imgs[0].distance - 2.0).abs() < 1e-15);
        assert!((imgs[0].azimuth.abs() - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(imgs[0].attenuation, 1.0);
    }

    #[test]
    fn first_order_has_seven_images() {
        let src = Vec3::new(3.0, 2.0, 1.5);
        let rcv = Vec3::new(5.0, 2.0, 1.5);
        let imgs = enumerate_images(&room(), src, rcv, 1).unwrap();
        assert_eq!(imgs.len(), 7);
        // floor image mirrored across z = 0
        let floor = imgs
            .iter()
            .find(|i| (i.position.z + 1.5).abs() < 1e-12)
            .unwrap();
        assert!((floor.distance - 13f64.sqrt()).abs() < 1e-12);
        assert!((floor.distance - 3.606).abs() < 1e-3);
        assert!(floor.polar > std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn counts_match_brute_force_lattice() {
        // brute force over the full (2N+1)^3 x 8 lattice
        let src = Vec3::new(1.3, 4.1, 2.2);
        let rcv = Vec3::new(6.0, 3.0, 1.0);
        for order in 0..6u32 {
            let n = order as i64;
            let mut expected = 0;
            for mx in -n..=n {
                for my in -n..=n {
                    for mz in -n..=n {
                        for qx in 0..2i64 {
                            for qy in 0..2i64 {
                                for qz in 0..2i64 {
                                    let o = (2 * mx - qx).abs() + (2 * my - qy).abs() + (2 * mz - qz).abs();
                                    if o <= n {
                                        expected += 1;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            let got = enumerate_images(&room(), src, rcv, order).unwrap().len();
            assert_eq!(got, expected, "order {order}");
        }
    }

    #[test]
    fn attenuation_in_unit_interval() {
        let shoebox = Shoebox::new(room(), AbsorptionModel::Sabine).unwrap();
        let imgs = shoebox
            .images(Vec3::new(2.0, 2.0, 2.0), Vec3::new(4.0, 3.0, 1.0), 8, None)
            .unwrap();
        assert!(imgs.iter().all(|i| i.attenuation > 0.0 && i.attenuation <= 1.0));
        assert!(imgs
            .iter()
            .all(|i| (i.attenuation - shoebox.reflection.powi(i.order as i32)).abs() < 1e-15));
    }

    #[test]
    fn distance_limit_prunes() {
        let shoebox = Shoebox::new(room(), AbsorptionModel::Sabine).unwrap();
        let all = shoebox
            .images(Vec3::new(2.0, 2.0, 2.0), Vec3::new(4.0, 3.0, 1.0), 10, None)
            .unwrap();
        let near = shoebox
            .images(Vec3::new(2.0, 2.0, 2.0), Vec3::new(4.0, 3.0, 1.0), 10, Some(20.0))
            .unwrap();
        let expected = all.iter().filter(|i| i.distance <= 20.0).count();
        assert_eq!(near.len(), expected);
    }

    #[test]
    fn outside_room_is_error() {
        let err = enumerate_images(&room(), Vec3::new(9.0, 1.0, 1.0), Vec3::new(1.0, 1.0, 1.0), 1);
        assert!(matches!(err, Err(Error::OutsideRoom(_))));
    }
}
