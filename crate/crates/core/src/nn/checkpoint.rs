//! Flat binary parameter checkpoints.
//!
//! Layout: the magic bytes `KAFW1`, then for each state tensor in layer order
//! a little-endian `u32` rank, `rank` little-endian `u32` dimensions, and the
//! elements as little-endian `f64`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::network::Network;
use crate::tensor::Tensor;

pub const MAGIC: &[u8; 5] = b"KAFW1";

pub fn encode(tensors: &[&Tensor]) -> Vec<u8> {
    let mut out = MAGIC.to_vec();
    for t in tensors {
        out.extend_from_slice(&(t.rank() as u32).to_le_bytes());
        for &d in t.shape() {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize, what: &str) -> Result<&[u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Format {
                offset: self.pos,
                msg: format!("truncated {what}"),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Vec<Tensor>> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::Format {
            offset: 0,
            msg: "missing KAFW1 magic".into(),
        });
    }
    let mut r = Reader {
        bytes,
        pos: MAGIC.len(),
    };
    let mut out = Vec::new();
    while r.pos < bytes.len() {
        let start = r.pos;
        let rank = r.u32("tensor rank")? as usize;
        if rank == 0 || rank > 8 {
            return Err(Error::Format {
                offset: start,
                msg: format!("implausible tensor rank {rank}"),
            });
        }
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(r.u32("tensor dimension")? as usize);
        }
        let n: usize = shape.iter().product();
        let raw = r.take(n * 8, "tensor data")?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        out.push(Tensor::new(shape, data)?);
    }
    Ok(out)
}

pub fn save_checkpoint(network: &Network, path: &Path) -> Result<()> {
    fs::write(path, encode(&network.state()))?;
    Ok(())
}

/// Loads state tensors into a network built from the matching spec.
pub fn load_checkpoint(network: &mut Network, path: &Path) -> Result<()> {
    let tensors = decode(&fs::read(path)?)?;
    network.load_state(tensors)
}
