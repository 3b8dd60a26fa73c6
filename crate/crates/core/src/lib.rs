//! Virtual directional microphones from a compact array: room simulation, target synthesis,
//! a dual-mask recurrent filter, classical references, metrics and a stereo application.
//!
//! Numeric kernels are generic over [`Real`]; the aliases below fix the working type.

pub mod acoustics;
pub mod baselines;
pub mod conv;
pub mod dataset;
pub mod error;
pub mod kv;
pub mod metrics;
pub mod ndf;
pub mod scalar;
pub mod signal;
pub mod stereo;
pub mod targets;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Waveform32 = signal::Waveform<f32>;
pub type Waveform64 = signal::Waveform<f64>;
pub type Spectrogram32 = signal::Spectrogram<f32>;
pub type Spectrogram64 = signal::Spectrogram<f64>;
pub type Stft32 = signal::Stft<f32>;
pub type Stft64 = signal::Stft<f64>;
pub type MaskPair32 = ndf::MaskPair<f32>;
pub type MaskPair64 = ndf::MaskPair<f64>;
/// Parameters as trained and stored.
pub type Params32 = ndf::NetworkParams<f32>;
/// Parameters for gradient checks.
pub type Params64 = ndf::NetworkParams<f64>;
