//! Random source-array setups.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::grids::Split;
use super::ranges::SceneRanges;
use crate::acoustics::{RoomSpec, Vec3};
use crate::error::{Error, Result};

const MAX_TRIES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub azimuth_deg: f64,
    pub distance: f64,
    pub position: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub split: Split,
    pub room: RoomSpec,
    pub center: Vec3,
    pub sources: Vec<SourceSpec>,
    pub seed: u64,
}

/// Seed for item `index` of `split`, independent across items.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(label.as_bytes());
    h.update(index.to_le_bytes());
    u64::from_le_bytes(h.finalize()[..8].try_into().expect("8 bytes"))
}

fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

/// Draws a room, an array position, and sources on the split's azimuth grid.
///
/// Sources share the array height. A source that lands within `source_margin` of a wall has
/// its distance redrawn; azimuths are never redrawn, so the grid stays uniformly covered.
pub fn sample_scene<R: Rng>(rng: &mut R, split: Split, ranges: &SceneRanges, seed: u64) -> Result<SceneSpec> {
    ranges.validate()?;
    let length = uniform(rng, ranges.length.min, ranges.length.max);
    let width = uniform(rng, ranges.width.min, ranges.width.max);
    let height = uniform(rng, ranges.height.min, ranges.height.max);
    let rt60 = match split {
        Split::Test => ranges.test_rt60[rng.gen_range(0..ranges.test_rt60.len())],
        _ => uniform(rng, ranges.rt60.min, ranges.rt60.max),
    };
    let room = RoomSpec::new(length, width, height, rt60)?;
    let m = ranges.wall_margin;
    if room.dims().iter().any(|&d| d <= 2.0 * m) {
        return Err(Error::InvalidConfig(format!(
            "no array position is {m} m from every wall of a {length:.2} x {width:.2} x {height:.2} m room"
        )));
    }
    let center = Vec3::new(
        uniform(rng, m, length - m),
        uniform(rng, m, width - m),
        uniform(rng, m, height - m),
    );
    let count = match split {
        Split::Test => ranges.test_sources,
        _ => rng.gen_range(1..=ranges.max_sources),
    };
    let grid = split.angle_grid();
    if count > grid.len() {
        return Err(Error::InvalidConfig(format!("{count} sources but {} grid angles", grid.len())));
    }
    let mut sources = Vec::with_capacity(count);
    for gi in sample_indices(rng, grid.len(), count) {
        let azimuth_deg = grid[gi];
        let dir = Vec3::planar(azimuth_deg.to_radians());
        let mut placed = None;
        for _ in 0..MAX_TRIES {
            let distance = uniform(rng, ranges.distance.min, ranges.distance.max);
            let position = center + dir * distance;
            if room.contains(position, ranges.source_margin) {
                placed = Some(SourceSpec {
                    azimuth_deg,
                    distance,
                    position,
                });
                break;
            }
        }
        sources.push(placed.ok_or_else(|| {
            Error::InvalidConfig(format!("no admissible distance at azimuth {azimuth_deg} deg"))
        })?);
    }
    Ok(SceneSpec {
        split,
        room,
        center,
        sources,
        seed,
    })
}
