//! Shoebox image-source simulation, directivity and pattern measurement.

pub mod decay;
pub mod directivity;
pub mod geometry;
pub mod images;
pub mod pattern;
pub mod rir;
pub mod room;
pub mod scene;

pub use decay::{estimate_rt60, schroeder_curve_db};
pub use directivity::{cardioid_gain, null_floor, CardioidPattern, Directivity};
pub use geometry::{ArrayGeometry, Vec3};
pub use images::{enumerate_images, ImageSource, Shoebox, SPEED_OF_SOUND};
pub use pattern::{
    azimuth_grid, measure_pattern, pattern_rows, plane_wave, write_pattern_csv, AnalyticCardioid, ArrayProcessor,
    PatternRow, PatternTable, ProbeSettings, PATTERN_CSV_HEADER,
};
pub use rir::{synth_rir, ImpulseResponse, RirSettings};
pub use room::{reflection_coefficient, rt60_to_reflection, AbsorptionModel, RoomSpec};
pub use scene::{render_source_rirs, SimSettings, SourceRirs};
