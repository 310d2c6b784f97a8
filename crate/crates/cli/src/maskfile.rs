//! The `.emsk` mask file format.
//!
//! Layout, byte for byte:
//!   - magic: the 5 bytes `EMSK1` then a newline
//!   - header: ASCII `width height` then a newline
//!   - payload: width*height bytes, row-major, each 0x00 or 0x01
//!
//! Nothing may follow the payload. Readers reject any deviation with a
//! distinct error; the round trip is lossless.

use eigenrank_core::BinaryMask;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

const MAGIC: &[u8; 6] = b"EMSK1\n";
const MAX_HEADER: usize = 64;

#[derive(Debug, Error)]
pub enum MaskFileError {
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{} is not a mask file (missing EMSK1 magic)", path.display())]
    BadMagic { path: PathBuf },
    #[error("{} has an invalid header: {detail}", path.display())]
    BadHeader { path: PathBuf, detail: String },
    #[error("{} payload is short: expected {expected} pixel bytes, found {actual}", path.display())]
    Truncated {
        path: PathBuf,
        expected: usize,
        actual: usize,
    },
    #[error("{} carries {extra} trailing bytes after the pixel payload", path.display())]
    TrailingBytes { path: PathBuf, extra: usize },
    #[error("{} payload byte {offset} is 0x{value:02x}, pixels must be 0x00 or 0x01", path.display())]
    BadPixelByte {
        path: PathBuf,
        offset: usize,
        value: u8,
    },
}

pub fn read_mask(path: &Path) -> Result<BinaryMask, MaskFileError> {
    let io_err = |source| MaskFileError::Io {
        path: path.to_path_buf(),
        source,
    };
    let bytes = fs::read(path).map_err(io_err)?;
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(MaskFileError::BadMagic {
            path: path.to_path_buf(),
        });
    }
    let header_err = |detail: &str| MaskFileError::BadHeader {
        path: path.to_path_buf(),
        detail: detail.to_string(),
    };

    let rest = &bytes[MAGIC.len()..];
    let newline = rest
        .iter()
        .take(MAX_HEADER)
        .position(|&b| b == b'\n')
        .ok_or_else(|| header_err("no newline-terminated dimension line"))?;
    let header = std::str::from_utf8(&rest[..newline])
        .map_err(|_| header_err("dimension line is not ASCII"))?;
    let mut parts = header.split_ascii_whitespace();
    let width: usize = parts
        .next()
        .and_then(|w| w.parse().ok())
        .ok_or_else(|| header_err("cannot parse width"))?;
    let height: usize = parts
        .next()
        .and_then(|h| h.parse().ok())
        .ok_or_else(|| header_err("cannot parse height"))?;
    if parts.next().is_some() {
        return Err(header_err("dimension line has extra fields"));
    }
    if width == 0 || height == 0 {
        return Err(header_err("dimensions must be positive"));
    }

    let payload = &rest[newline + 1..];
    let expected = width * height;
    if payload.len() < expected {
        return Err(MaskFileError::Truncated {
            path: path.to_path_buf(),
            expected,
            actual: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(MaskFileError::TrailingBytes {
            path: path.to_path_buf(),
            extra: payload.len() - expected,
        });
    }
    if let Some(offset) = payload.iter().position(|&b| b > 1) {
        return Err(MaskFileError::BadPixelByte {
            path: path.to_path_buf(),
            offset,
            value: payload[offset],
        });
    }
    Ok(BinaryMask::new(width, height, payload.to_vec()).expect("payload was validated"))
}

pub fn write_mask(mask: &BinaryMask, path: &Path) -> Result<(), MaskFileError> {
    let mut bytes = Vec::with_capacity(MAGIC.len() + 16 + mask.pixels().len());
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(format!("{} {}\n", mask.width(), mask.height()).as_bytes());
    bytes.extend_from_slice(mask.pixels());
    atomic_write(path, &bytes).map_err(|source| MaskFileError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Whole-file atomic write: temp file in the destination directory, then
/// rename over the target.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), std::io::Error> {
    let dir = match path.parent() {
        Some(parent) if parent.as_os_str().is_empty() => Path::new("."),
        Some(parent) => parent,
        None => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
