//! Binary weight files.
//!
//! Layout: `NDFP`, version `u32`, tensor count `u32`, then per tensor a `u16` name length,
//! the UTF-8 name, `u8` rank, `u32` dims and little-endian `f32` values.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::config::NetConfig;
use super::params::{NetworkParams, Tensor};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAGIC: &[u8; 4] = b"NDFP";
pub const VERSION: u32 = 1;

pub fn write_checkpoint<T: Real, W: Write>(params: &NetworkParams<T>, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(params.tensors().len() as u32).to_le_bytes())?;
    for t in params.tensors() {
        let name = t.name.as_bytes();
        out.write_all(&(name.len() as u16).to_le_bytes())?;
        out.write_all(name)?;
        out.write_all(&[t.shape.len() as u8])?;
        for &d in &t.shape {
            out.write_all(&(d as u32).to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(4 * t.data.len());
        for v in &t.data {
            buf.extend_from_slice(&(v.to_f64_lossy() as f32).to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Checkpoint(format!(
                "truncated at byte {} (need {n} more)",
                self.pos
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

/// Parses a weight file. The bin count is not stored; it is taken from `bins`.
pub fn read_checkpoint<R: Read>(mut input: R, bins: usize) -> Result<NetworkParams<f32>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let mut c = Cursor { bytes: &bytes, pos: 0 };
    if c.take(4)? != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let count = c.u32()? as usize;
    let mut tensors = Vec::with_capacity(count.min(64));
    for _ in 0..count {
        let len = u16::from_le_bytes(c.take(2)?.try_into().expect("2 bytes")) as usize;
        let name = std::str::from_utf8(c.take(len)?)
            .map_err(|_| Error::Checkpoint("tensor name is not UTF-8".into()))?
            .to_string();
        let rank = c.take(1)?[0] as usize;
        let shape = (0..rank).map(|_| c.u32().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        let n: usize = shape.iter().product();
        let data = c
            .take(4 * n)?
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")))
            .collect();
        tensors.push(Tensor { name, shape, data });
    }
    if c.pos != bytes.len() {
        return Err(Error::Checkpoint(format!("{} trailing bytes", bytes.len() - c.pos)));
    }
    let dim = |name: &str, axis: usize| -> Result<usize> {
        tensors
            .iter()
            .find(|t| t.name == name)
            .and_then(|t| t.shape.get(axis).copied())
            .ok_or_else(|| Error::Checkpoint(format!("missing tensor {name}")))
    };
    let input = dim("freq_fwd.w_ih", 1)?;
    if input % 2 != 0 {
        return Err(Error::Checkpoint(format!("odd input size {input}")));
    }
    let config = NetConfig {
        channels: input / 2,
        bins,
        hidden_freq: dim("freq_fwd.w_hh", 1)?,
        hidden_time: dim("coh_time.w_hh", 1)?,
        seed: 0,
    };
    NetworkParams::from_tensors(config, tensors)
}

pub fn save_checkpoint<T: Real>(params: &NetworkParams<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_checkpoint(params, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>, bins: usize) -> Result<NetworkParams<f32>> {
    read_checkpoint(fs::File::open(path)?, bins)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> NetworkParams<f32> {
        NetworkParams::init(NetConfig {
            channels: 4,
            bins: 9,
            hidden_freq: 8,
            hidden_time: 6,
            seed: 1,
        })
        .unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let p = params();
        let mut a = Vec::new();
        write_checkpoint(&p, &mut a).unwrap();
        let q = read_checkpoint(&a[..], 9).unwrap();
        assert_eq!(q.tensors(), p.tensors());
        let mut b = Vec::new();
        write_checkpoint(&q, &mut b).unwrap();
        assert_eq!(a, b);
        assert_eq!(&a[..4], b"NDFP");
    }

    #[test]
    fn rejects_damage() {
        let mut a = Vec::new();
        write_checkpoint(&params(), &mut a).unwrap();
        for cut in [0, 3, 10, a.len() / 2, a.len() - 1] {
            assert!(read_checkpoint(&a[..cut], 9).is_err());
        }
        let mut bad = a.clone();
        bad[0] = b'X';
        assert!(matches!(read_checkpoint(&bad[..], 9), Err(Error::Checkpoint(_))));
        let mut bad = a.clone();
        bad[4] = 9;
        assert!(read_checkpoint(&bad[..], 9).is_err());
        let mut long = a.clone();
        long.push(0);
        assert!(read_checkpoint(&long[..], 9).is_err());
    }
}
