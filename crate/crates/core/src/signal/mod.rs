//! Audio buffers, time-frequency transforms and WAV I/O.

pub mod stft;
pub mod wav;
pub mod waveform;

pub use stft::{istft, sqrt_hann, stft, Spectrogram, Stft, StftConfig};
pub use wav::{read_wav, write_wav, BitDepth};
pub use waveform::{energy, rms_dbfs, Waveform, SAMPLE_RATE};
