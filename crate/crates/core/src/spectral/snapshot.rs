//! Binary field snapshots.
//!
//! Layout (all little-endian): magic `FSTF`, `u32` version (1), `u32` d,
//! `d × u32` points per axis, then `n^d` `f64` samples in row-major order.

use std::fs;
use std::path::Path;

use super::field::RealField;
use super::grid::Grid;
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"FSTF";
const VERSION: u32 = 1;

pub fn encode(f: &RealField) -> Vec<u8> {
    let grid = f.grid();
    let mut out = Vec::with_capacity(12 + 4 * grid.dim() + 8 * grid.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    for _ in 0..grid.dim() {
        out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    }
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> std::result::Result<RealField, String> {
    let mut pos = 0usize;
    let mut take = |len: usize| -> std::result::Result<&[u8], String> {
        let chunk = bytes
            .get(pos..pos + len)
            .ok_or_else(|| format!("truncated at byte {pos}"))?;
        pos += len;
        Ok(chunk)
    };
    if take(4)? != MAGIC {
        return Err("bad magic".into());
    }
    let read_u32 = |b: &[u8]| u32::from_le_bytes(b.try_into().expect("4 bytes"));
    let version = read_u32(take(4)?);
    if version != VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let dim = read_u32(take(4)?) as usize;
    if dim == 0 || dim > super::grid::MAX_DIM {
        return Err(format!("unsupported dimension {dim}"));
    }
    let mut sizes = Vec::with_capacity(dim);
    for _ in 0..dim {
        sizes.push(read_u32(take(4)?) as usize);
    }
    if sizes.iter().any(|&s| s != sizes[0]) {
        return Err(format!("anisotropic grid {sizes:?} not supported"));
    }
    let grid = Grid::new(dim, sizes[0]).map_err(|e| e.to_string())?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        values.push(f64::from_le_bytes(take(8)?.try_into().expect("8 bytes")));
    }
    if pos != bytes.len() {
        return Err(format!("{} trailing bytes", bytes.len() - pos));
    }
    RealField::from_values(grid, values).map_err(|e| e.to_string())
}

pub fn write_snapshot(path: &Path, f: &RealField) -> Result<()> {
    fs::write(path, encode(f))?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<RealField> {
    let bytes = fs::read(path)?;
    decode(&bytes).map_err(|reason| Error::Snapshot {
        path: path.to_path_buf(),
        reason,
    })
}

/// Reads a snapshot and checks it lives on `grid`.
pub fn read_snapshot_checked(path: &Path, grid: Grid) -> Result<RealField> {
    let f = read_snapshot(path)?;
    if f.grid() != grid {
        return Err(Error::Snapshot {
            path: path.to_path_buf(),
            reason: format!("grid {:?} does not match configured {:?}", f.grid(), grid),
        });
    }
    Ok(f)
}

/// File name used for a snapshot taken at time `t`.
pub fn snapshot_name(t: f64) -> String {
    format!("rho_t{t:.6}.fstf")
}
