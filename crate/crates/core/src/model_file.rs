//! Binary model files.
//!
//! Layout, all integers and floats little-endian:
//!
//! | bytes            | content                                      |
//! |------------------|----------------------------------------------|
//! | 4                | magic `HBOX`                                 |
//! | 1                | format version (`1`)                         |
//! | 4                | embedding dimension `m` (u32)                |
//! | 4                | box dimension `d` (u32)                      |
//! | 8·d·m            | `phi_base`, row-major f64                    |
//! | 8·d·m            | `phi_bump`, row-major f64                    |
//! | 4 × 8·d          | head `corner_p`, head `corner_q`, tail `corner_p`, tail `corner_q` |
//! | 4                | CRC-32 (IEEE) of every preceding byte (u32)  |

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{BoxParams, Matrix, ModelParams};

pub const MAGIC: &[u8; 4] = b"HBOX";
pub const FORMAT_VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 4 + 4;
const CHECKSUM_LEN: usize = 4;

pub fn encode_model(params: &ModelParams) -> Vec<u8> {
    let d = params.box_dim();
    let m = params.embedding_dim();
    let mut buf = Vec::with_capacity(encoded_len(d, m));
    buf.extend_from_slice(MAGIC);
    buf.push(FORMAT_VERSION);
    buf.extend_from_slice(&(m as u32).to_le_bytes());
    buf.extend_from_slice(&(d as u32).to_le_bytes());
    for block in params.blocks() {
        for v in block {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

pub fn encoded_len(d: usize, m: usize) -> usize {
    HEADER_LEN + 8 * (2 * d * m + 4 * d) + CHECKSUM_LEN
}

pub fn decode_model(bytes: &[u8]) -> Result<ModelParams> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Length {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    if bytes[4] != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(bytes[4]));
    }
    let m = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
    let expected = encoded_len(d, m);
    if bytes.len() != expected {
        return Err(Error::Length {
            expected,
            found: bytes.len(),
        });
    }
    let (payload, tail) = bytes.split_at(expected - CHECKSUM_LEN);
    let stored = u32::from_le_bytes(tail.try_into().unwrap());
    let computed = crc32fast::hash(payload);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }

    let mut floats = payload[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let mut take = |n: usize| floats.by_ref().take(n).collect::<Vec<f64>>();
    let phi_base = Matrix::from_vec(d, m, take(d * m))?;
    let phi_bump = Matrix::from_vec(d, m, take(d * m))?;
    let head_box = BoxParams::new(take(d), take(d))?;
    let tail_box = BoxParams::new(take(d), take(d))?;
    ModelParams::new(phi_base, phi_bump, head_box, tail_box)
}

/// Writes the model atomically: a temporary file next to `path` is renamed
/// into place, so a failed save never leaves a partial file behind.
pub fn save_model(params: &ModelParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(&encode_model(params))
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelParams> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}
