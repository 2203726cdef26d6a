//! Flat binary checkpoints.
//!
//! Layout (all integers little-endian `u32`, values little-endian `f64`):
//!
//! ```text
//! "NLLB" | version | layer count
//! per layer:  block count
//!   per block: rank | dim_0 .. dim_{rank-1} | values
//! ```
//!
//! A layer's blocks are its trainable parameters followed by its
//! non-trainable buffers (batchnorm running statistics).

use std::io::{Read, Write};
use std::path::Path;

use super::network::Network;
use super::tensor::Tensor;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"NLLB";
pub const VERSION: u32 = 1;

pub fn write_checkpoint(net: &Network, w: &mut impl Write) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(net.num_layers() as u32).to_le_bytes())?;
    for i in 0..net.num_layers() {
        let blocks: Vec<&Tensor> = net.params(i).iter().chain(net.buffers(i)).collect();
        w.write_all(&(blocks.len() as u32).to_le_bytes())?;
        for t in blocks {
            w.write_all(&(t.shape().len() as u32).to_le_bytes())?;
            for &d in t.shape() {
                w.write_all(&(d as u32).to_le_bytes())?;
            }
            for v in t.data() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|_| Error::BadCheckpoint("unexpected end of file".into()))?;
    Ok(u32::from_le_bytes(b))
}

/// Loads parameters into a network of matching architecture.
pub fn read_checkpoint(net: &mut Network, r: &mut impl Read) -> Result<()> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::BadCheckpoint("missing header".into()))?;
    if &magic != MAGIC {
        return Err(Error::BadCheckpoint(format!("bad magic {magic:?}")));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::BadCheckpoint(format!("unsupported version {version}")));
    }
    let layers = read_u32(r)? as usize;
    if layers != net.num_layers() {
        return Err(Error::BadCheckpoint(format!(
            "checkpoint has {layers} layers, network has {}",
            net.num_layers()
        )));
    }
    for i in 0..layers {
        let blocks = read_u32(r)? as usize;
        let n_params = net.params(i).len();
        if blocks != n_params + net.buffers(i).len() {
            return Err(Error::BadCheckpoint(format!(
                "layer {i}: unexpected block count {blocks}"
            )));
        }
        for b in 0..blocks {
            let rank = read_u32(r)? as usize;
            let shape = (0..rank)
                .map(|_| read_u32(r).map(|d| d as usize))
                .collect::<Result<Vec<_>>>()?;
            let target = if b < n_params {
                &mut net.params_mut(i)[b]
            } else {
                &mut net.buffers_mut(i)[b - n_params]
            };
            if target.shape() != shape.as_slice() {
                return Err(Error::BadCheckpoint(format!(
                    "layer {i} block {b}: shape {shape:?}, expected {:?}",
                    target.shape()
                )));
            }
            let mut buf = vec![0u8; 8 * target.len()];
            r.read_exact(&mut buf)
                .map_err(|_| Error::BadCheckpoint("unexpected end of file".into()))?;
            for (v, chunk) in target.data_mut().iter_mut().zip(buf.chunks_exact(8)) {
                *v = f64::from_le_bytes(chunk.try_into().unwrap());
            }
        }
    }
    Ok(())
}

pub fn save(net: &Network, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_checkpoint(net, &mut buf).expect("writing to memory");
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn load(net: &mut Network, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(net, &mut bytes.as_slice())
}
