//! Binary array files for ground states and initial data.
//!
//! Layout, all little-endian: the 8-byte magic `NLSQGS01`; `dim: u32`;
//! `components: u32` (1 real, 2 complex interleaved); `p: f64`;
//! `frequency: f64` (NaN for plain fields); `iterations: u64`; per axis
//! `half_len: f64, points: u64`; then the samples as `f64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::groundstate::GroundState;
use crate::params::ProblemParams;
use crate::scalar::Real;

const MAGIC: &[u8; 8] = b"NLSQGS01";

fn io_err(e: std::io::Error) -> Error {
    Error::Format(e.to_string())
}

fn write_header<W: Write>(
    w: &mut W,
    grid_dim: usize,
    components: u32,
    p: f64,
    frequency: f64,
    iterations: u64,
    half_len: f64,
    points: usize,
) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(grid_dim as u32).to_le_bytes())?;
    w.write_all(&components.to_le_bytes())?;
    w.write_all(&p.to_le_bytes())?;
    w.write_all(&frequency.to_le_bytes())?;
    w.write_all(&iterations.to_le_bytes())?;
    for _ in 0..grid_dim {
        w.write_all(&half_len.to_le_bytes())?;
        w.write_all(&(points as u64).to_le_bytes())?;
    }
    Ok(())
}

fn encode<T: Real, W: Write>(
    w: &mut W,
    u: &Field<T>,
    frequency: f64,
    iterations: u64,
) -> std::io::Result<()> {
    let real = u.values().iter().all(|v| v.im == T::zero());
    let g = u.grid();
    write_header(
        w,
        g.dim(),
        if real { 1 } else { 2 },
        u.params().p.as_f64(),
        frequency,
        iterations,
        g.half_len().as_f64(),
        g.points(),
    )?;
    for v in u.values() {
        w.write_all(&v.re.as_f64().to_le_bytes())?;
        if !real {
            w.write_all(&v.im.as_f64().to_le_bytes())?;
        }
    }
    Ok(())
}

struct Decoded<T: Real> {
    field: Field<T>,
    frequency: f64,
    iterations: u64,
}

fn take<const K: usize, R: Read>(r: &mut R) -> Result<[u8; K]> {
    let mut buf = [0u8; K];
    r.read_exact(&mut buf).map_err(|_| Error::Format("truncated header".into()))?;
    Ok(buf)
}

fn decode<T: Real, R: Read>(r: &mut R) -> Result<Decoded<T>> {
    if &take::<8, _>(r)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let dim = u32::from_le_bytes(take(r)?) as usize;
    let components = u32::from_le_bytes(take(r)?);
    let p = f64::from_le_bytes(take(r)?);
    let frequency = f64::from_le_bytes(take(r)?);
    let iterations = u64::from_le_bytes(take(r)?);
    if !(1..=3).contains(&dim) {
        return Err(Error::Format(format!("dimension {dim} out of range")));
    }
    if components != 1 && components != 2 {
        return Err(Error::Format(format!("component count {components}")));
    }
    let mut axes = Vec::with_capacity(dim);
    for _ in 0..dim {
        let l = f64::from_le_bytes(take(r)?);
        let n = u64::from_le_bytes(take(r)?);
        axes.push((l, n));
    }
    if axes.iter().any(|a| *a != axes[0]) {
        return Err(Error::Format("anisotropic grids are not supported".into()));
    }
    let (half_len, points) = axes[0];
    let points = usize::try_from(points).map_err(|_| Error::Format("point count".into()))?;
    let params = ProblemParams::new(dim, T::lit(p))?;
    let grid = Grid::new(dim, T::lit(half_len), points)?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = f64::from_le_bytes(take(r).map_err(|_| Error::Format("truncated data".into()))?);
        let im = if components == 2 {
            f64::from_le_bytes(take(r).map_err(|_| Error::Format("truncated data".into()))?)
        } else {
            0.0
        };
        values.push(Complex::new(T::lit(re), T::lit(im)));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(io_err)? != 0 {
        return Err(Error::Format("trailing bytes after data".into()));
    }
    Ok(Decoded { field: Field::new(values, grid, params)?, frequency, iterations })
}

pub fn write_field<T: Real>(u: &Field<T>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    encode(&mut w, u, f64::NAN, 0).and_then(|_| w.flush()).map_err(io_err)
}

/// Reads a field file; ground-state files are accepted too.
pub fn read_field<T: Real>(path: &Path) -> Result<Field<T>> {
    let mut r = BufReader::new(File::open(path).map_err(io_err)?);
    Ok(decode(&mut r)?.field)
}

pub fn write_ground_state<T: Real>(q: &GroundState<T>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    encode(&mut w, &q.profile, q.frequency.as_f64(), q.iterations as u64)
        .and_then(|_| w.flush())
        .map_err(io_err)
}

/// Reads a ground state and recomputes its norms, constant and residual.
pub fn read_ground_state<T: Real>(path: &Path) -> Result<GroundState<T>> {
    let mut r = BufReader::new(File::open(path).map_err(io_err)?);
    let d = decode::<T, _>(&mut r)?;
    if !d.frequency.is_finite() {
        return Err(Error::Format("file holds a field, not a ground state".into()));
    }
    GroundState::from_profile(d.field, T::lit(d.frequency), d.iterations as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_round_trip() {
        let g = Grid::<f64>::new(2, 4.0, 16).unwrap();
        let pp = ProblemParams::new(2, 5.0).unwrap();
        let u = Field::from_fn(g, pp, |x| Complex::new(x[0], -x[1] * 0.5)).unwrap();
        let dir = std::env::temp_dir().join(format!("nlsq-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("f.bin");
        write_field(&u, &path).unwrap();
        let back: Field<f64> = read_field(&path).unwrap();
        assert_eq!(back, u);
        assert!(read_ground_state::<f64>(&path).is_err());
        std::fs::write(&path, b"NLSQGS01\x01").unwrap();
        assert!(matches!(read_field::<f64>(&path), Err(Error::Format(_))));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
