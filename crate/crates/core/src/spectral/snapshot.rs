//! Binary snapshot of a spectral field.
//!
//! Layout (little-endian): `n: u64`, `N: u64`, `L: f64`, `α: f64`, `ν: f64`,
//! then for every mode in row-major wavenumber order the three components
//! as interleaved `(re, im)` f64 pairs.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{Grid, PhysicsParams, SpectralVectorField};
use crate::error::{NsvError, Result};

pub const HEADER_BYTES: usize = 40;

pub fn write_snapshot<W: Write>(mut w: W, field: &SpectralVectorField, params: &PhysicsParams) -> Result<()> {
    let grid = field.grid();
    w.write_all(&(params.n as u64).to_le_bytes())?;
    w.write_all(&(grid.points_per_dim as u64).to_le_bytes())?;
    w.write_all(&grid.box_length.to_le_bytes())?;
    w.write_all(&params.alpha.to_le_bytes())?;
    w.write_all(&params.nu.to_le_bytes())?;
    let mut buf = Vec::with_capacity(grid.len() * 48);
    for idx in 0..grid.len() {
        for c in field.coeff(idx) {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<(SpectralVectorField, PhysicsParams)> {
    let mut header = [0u8; HEADER_BYTES];
    r.read_exact(&mut header)?;
    let word = |i: usize| -> [u8; 8] { header[i * 8..(i + 1) * 8].try_into().unwrap() };
    let n = u64::from_le_bytes(word(0)) as usize;
    let points = u64::from_le_bytes(word(1)) as usize;
    let box_length = f64::from_le_bytes(word(2));
    let alpha = f64::from_le_bytes(word(3));
    let nu = f64::from_le_bytes(word(4));
    if n != Grid::DIM {
        return Err(NsvError::structural(format!("snapshot dimension {n} is not 3")));
    }
    let grid = Grid::new(points, box_length)?;
    let params = PhysicsParams::new(alpha, nu, n)?;

    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != grid.len() * 48 {
        return Err(NsvError::structural(format!(
            "snapshot body has {} bytes, expected {}",
            body.len(),
            grid.len() * 48
        )));
    }
    let mut comps = [vec![], vec![], vec![]];
    for c in comps.iter_mut() {
        c.reserve(grid.len());
    }
    for mode in body.chunks_exact(48) {
        for (c, pair) in mode.chunks_exact(16).enumerate() {
            let re = f64::from_le_bytes(pair[..8].try_into().unwrap());
            let im = f64::from_le_bytes(pair[8..].try_into().unwrap());
            comps[c].push(Complex64::new(re, im));
        }
    }
    Ok((SpectralVectorField::new(grid, comps)?, params))
}
