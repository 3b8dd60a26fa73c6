//! Per-source impulse responses for every array microphone plus virtual microphones at the
//! array center.

use serde::{Deserialize, Serialize};

use super::directivity::Directivity;
use super::geometry::{ArrayGeometry, Vec3};
use super::images::{ImageSource, Shoebox};
use rayon::prelude::*;

use super::rir::{synth_rirs_at, ImpulseResponse, RirSettings};
use super::room::{AbsorptionModel, RoomSpec};
use crate::error::{Error, Result};
use crate::signal::SAMPLE_RATE;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    pub sample_rate: u32,
    pub absorption: AbsorptionModel,
    /// Reflection-order cap; by default the lattice covers the whole response.
    pub max_order: Option<u32>,
    /// Response length in taps; defaults to `1.5 rt60` seconds.
    pub rir_len: Option<usize>,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            sample_rate: SAMPLE_RATE,
            absorption: AbsorptionModel::default(),
            max_order: None,
            rir_len: None,
        }
    }
}

impl SimSettings {
    pub fn rir_settings(&self, room: &RoomSpec) -> RirSettings {
        match self.rir_len {
            Some(len) => RirSettings::new(self.sample_rate, len),
            None => RirSettings::for_rt60(self.sample_rate, room.rt60),
        }
    }
}

/// Responses from one source position.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceRirs {
    /// One omnidirectional response per array microphone.
    pub mics: Vec<ImpulseResponse>,
    /// Directional responses at the array center, in the order requested.
    pub virtual_mics: Vec<ImpulseResponse>,
}

/// Image list around the array center, wide enough for every microphone.
pub fn array_images(
    shoebox: &Shoebox,
    geometry: &ArrayGeometry,
    center: Vec3,
    source: Vec3,
    rir: &RirSettings,
    max_order: Option<u32>,
) -> Result<Vec<ImageSource>> {
    let reach = geometry.mics().iter().map(|m| m.norm()).fold(0.0, f64::max);
    for p in geometry.placed_at(center) {
        if !shoebox.room.contains(p, 0.0) {
            return Err(Error::OutsideRoom(format!("microphone {p:?}")));
        }
    }
    let max_distance = rir.max_distance() + reach;
    let order = max_order.unwrap_or_else(|| shoebox.order_for_distance(max_distance));
    shoebox.images(source, center, order, Some(max_distance))
}

/// Renders every microphone and every virtual microphone for one source.
pub fn render_source_rirs(
    room: &RoomSpec,
    geometry: &ArrayGeometry,
    center: Vec3,
    source: Vec3,
    virtual_mics: &[Directivity],
    settings: &SimSettings,
) -> Result<SourceRirs> {
    let shoebox = Shoebox::new(*room, settings.absorption)?;
    let rir = settings.rir_settings(room);
    let images = array_images(&shoebox, geometry, center, source, &rir, settings.max_order)?;
    Ok(render_from_images(&images, geometry, center, virtual_mics, &rir))
}

/// Renders all receivers from a shared image list.
pub fn render_from_images(
    images: &[ImageSource],
    geometry: &ArrayGeometry,
    center: Vec3,
    virtual_mics: &[Directivity],
    rir: &RirSettings,
) -> SourceRirs {
    let omni = [Directivity::Omni];
    let mut mics: Vec<ImpulseResponse> = geometry
        .placed_at(center)
        .par_iter()
        .map(|&p| synth_rirs_at(images, p, &omni, rir).remove(0))
        .collect();
    let virtual_mics = synth_rirs_at(images, center, virtual_mics, rir);
    mics.shrink_to_fit();
    SourceRirs { mics, virtual_mics }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustics::directivity::CardioidPattern;

    #[test]
    fn center_reference_matches_omni_virtual_mic() {
        let room = RoomSpec::new(6.0, 5.0, 3.0, 0.2).unwrap();
        let g = ArrayGeometry::compact_uca();
        let center = Vec3::new(3.0, 2.5, 1.5);
        let src = Vec3::new(4.5, 3.0, 1.5);
        let rirs = render_source_rirs(
            &room,
            &g,
            center,
            src,
            &[Directivity::Omni, CardioidPattern::new(1, 0.5).into()],
            &SimSettings::default(),
        )
        .unwrap();
        assert_eq!(rirs.mics.len(), 4);
        assert_eq!(rirs.mics[0].taps, rirs.virtual_mics[0].taps);
        assert_eq!(rirs.mics[0].direct_path_index, rirs.virtual_mics[1].direct_path_index);
        assert_eq!(rirs.mics[0].len(), (1.5 * 0.2 * 16_000.0f64).ceil() as usize);
    }
}
