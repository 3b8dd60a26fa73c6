//! RIFF/WAVE input and output for 16-bit PCM and 32-bit float.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::waveform::Waveform;
use crate::error::{Error, Result};

/// Sample encoding on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Pcm16,
    Float32,
}

fn wav_err(path: &Path, e: hound::Error) -> Error {
    Error::Wav(format!("{}: {e}", path.display()))
}

/// Reads a WAV file into 64-bit samples. 16-bit PCM is scaled by 1/32768.
pub fn read_wav(path: impl AsRef<Path>) -> Result<Waveform<f64>> {
    let path = path.as_ref();
    let reader = WavReader::open(path).map_err(|e| wav_err(path, e))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::Wav(format!("{}: zero channels", path.display())));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| wav_err(path, e))?,
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| f64::from(v) / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| wav_err(path, e))?,
        (fmt, bits) => {
            return Err(Error::Wav(format!(
                "{}: unsupported codec {fmt:?} {bits}-bit (need 16-bit PCM or 32-bit float)",
                path.display()
            )))
        }
    };
    if interleaved.is_empty() {
        return Err(Error::Wav(format!("{}: empty data chunk", path.display())));
    }
    if interleaved.len() % channels != 0 {
        return Err(Error::Wav(format!(
            "{}: {} samples do not divide into {channels} channels",
            path.display(),
            interleaved.len()
        )));
    }
    let frames = interleaved.len() / channels;
    let mut out = vec![Vec::with_capacity(frames); channels];
    for frame in interleaved.chunks_exact(channels) {
        for (c, &v) in frame.iter().enumerate() {
            out[c].push(v);
        }
    }
    Waveform::new(out, spec.sample_rate)
}

/// Writes all channels interleaved.
pub fn write_wav(path: impl AsRef<Path>, wave: &Waveform<f64>, depth: BitDepth) -> Result<()> {
    let path = path.as_ref();
    let spec = WavSpec {
        channels: u16::try_from(wave.num_channels())
            .map_err(|_| Error::Wav("too many channels".into()))?,
        sample_rate: wave.sample_rate(),
        bits_per_sample: match depth {
            BitDepth::Pcm16 => 16,
            BitDepth::Float32 => 32,
        },
        sample_format: match depth {
            BitDepth::Pcm16 => SampleFormat::Int,
            BitDepth::Float32 => SampleFormat::Float,
        },
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| wav_err(path, e))?;
    for n in 0..wave.len() {
        for ch in wave.channels() {
            match depth {
                BitDepth::Float32 => writer.write_sample(ch[n] as f32),
                BitDepth::Pcm16 => {
                    let v = (ch[n] * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                    writer.write_sample(v)
                }
            }
            .map_err(|e| wav_err(path, e))?;
        }
    }
    writer.finalize().map_err(|e| wav_err(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.wav");
        let ch0: Vec<f64> = (0..500).map(|n| ((n as f32) * 0.37).sin() as f64).collect();
        let ch1: Vec<f64> = (0..500).map(|n| ((n as f32) * -0.11).cos() as f64 * 0.25).collect();
        let w = Waveform::new(vec![ch0, ch1], 16_000).unwrap();
        write_wav(&path, &w, BitDepth::Float32).unwrap();
        let r = read_wav(&path).unwrap();
        assert_eq!(r, w);
    }

    #[test]
    fn pcm16_full_scale() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.wav");
        let w = Waveform::mono(vec![32767.0 / 32768.0, -1.0, 0.0], 16_000).unwrap();
        write_wav(&path, &w, BitDepth::Pcm16).unwrap();
        let r = read_wav(&path).unwrap();
        assert!((r.channel(0)[0] - 0.99997).abs() < 1e-6);
        assert_eq!(r.channel(0)[1], -1.0);
    }

    #[test]
    fn empty_data_chunk_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.wav");
        let w = Waveform::<f64>::mono(vec![], 16_000).unwrap();
        write_wav(&path, &w, BitDepth::Float32).unwrap();
        assert!(read_wav(&path).unwrap_err().to_string().contains("empty"));
    }

    #[test]
    fn garbage_header_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.wav");
        std::fs::write(&path, b"RIFX....nonsense").unwrap();
        assert!(matches!(read_wav(&path), Err(Error::Wav(_))));
    }

    #[test]
    fn unsupported_codec_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("i24.wav");
        let spec = WavSpec {
            channels: 1,
            sample_rate: 16_000,
            bits_per_sample: 24,
            sample_format: SampleFormat::Int,
        };
        let mut w = WavWriter::create(&path, spec).unwrap();
        w.write_sample(5i32).unwrap();
        w.finalize().unwrap();
        assert!(read_wav(&path).unwrap_err().to_string().contains("unsupported"));
    }
}
