//! Binary parameter checkpoints.
//!
//! Byte layout (all multi-byte integers and floats little-endian):
//!
//! | offset     | size | field                                         |
//! |------------|------|-----------------------------------------------|
//! | 0          | 8    | magic `b"M2DQNNET"`                           |
//! | 8          | 1    | endianness tag `b'L'`                         |
//! | 9          | 1    | hidden activation: 0 = relu, 1 = tanh         |
//! | 10         | 2    | reserved, zero                                |
//! | 12         | 4    | `u32` number of layer sizes `L` (>= 2)        |
//! | 16         | 4L   | `u32` layer sizes, input first                |
//! | 16 + 4L    | 8    | `u64` parameter count `P`                     |
//! | 24 + 4L    | 8P   | `f64` parameters in canonical layout          |
//!
//! Nothing may follow the parameter array.

use std::path::Path;

use super::{Activation, QNetwork};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"M2DQNNET";
pub const LITTLE_ENDIAN_TAG: u8 = b'L';

pub fn to_bytes(net: &QNetwork) -> Vec<u8> {
    let sizes = net.layer_sizes();
    let mut out = Vec::with_capacity(24 + 4 * sizes.len() + 8 * net.n_params());
    out.extend_from_slice(MAGIC);
    out.push(LITTLE_ENDIAN_TAG);
    out.push(match net.activation() {
        Activation::Relu => 0,
        Activation::Tanh => 1,
    });
    out.extend_from_slice(&[0, 0]);
    out.extend_from_slice(&(sizes.len() as u32).to_le_bytes());
    for &s in sizes {
        out.extend_from_slice(&(s as u32).to_le_bytes());
    }
    out.extend_from_slice(&(net.n_params() as u64).to_le_bytes());
    for p in net.params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<QNetwork> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let tag = r.take(1)?[0];
    if tag != LITTLE_ENDIAN_TAG {
        return Err(Error::Checkpoint(format!("unsupported endianness tag {tag:#04x}")));
    }
    let activation = match r.take(1)?[0] {
        0 => Activation::Relu,
        1 => Activation::Tanh,
        other => return Err(Error::Checkpoint(format!("unknown activation code {other}"))),
    };
    r.take(2)?;
    let n_sizes = r.u32()? as usize;
    if n_sizes > 1024 {
        return Err(Error::Checkpoint(format!("implausible layer count {n_sizes}")));
    }
    let sizes = (0..n_sizes)
        .map(|_| r.u32().map(|v| v as usize))
        .collect::<Result<Vec<_>>>()?;
    let n_params = r.u64()? as usize;
    let body = r.take(n_params.checked_mul(8).ok_or_else(|| Error::Checkpoint("overflow".into()))?)?;
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    let params = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    QNetwork::from_params(&sizes, activation, params).map_err(|e| Error::Checkpoint(e.to_string()))
}

pub fn save(net: &QNetwork, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_bytes(net)).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<QNetwork> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes)
}
