//! Field serialization: a little-endian binary layout and the CSV dump format.
//!
//! Binary layout: `n1: u64, n2: u64, x1_min, x1_max, x2_min, x2_max, time_label: f64`,
//! followed by `n1·n2` row-major `f64` values.

use std::io::{Read, Write};

use super::{Grid2D, ScalarField};
use crate::error::{Error, Result};

pub fn write_binary(field: &ScalarField, mut w: impl Write) -> Result<()> {
    let g = &field.grid;
    w.write_all(&(g.n1 as u64).to_le_bytes())?;
    w.write_all(&(g.n2 as u64).to_le_bytes())?;
    for v in [g.x1_min, g.x1_max, g.x2_min, g.x2_max, field.time_label] {
        w.write_all(&v.to_le_bytes())?;
    }
    for v in &field.values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary(mut r: impl Read) -> Result<ScalarField> {
    let mut b8 = [0u8; 8];
    let mut next_u64 = |r: &mut dyn Read| -> Result<u64> {
        r.read_exact(&mut b8)?;
        Ok(u64::from_le_bytes(b8))
    };
    let n1 = next_u64(&mut r)? as usize;
    let n2 = next_u64(&mut r)? as usize;
    let mut header = [0.0f64; 5];
    for h in header.iter_mut() {
        *h = f64::from_bits(next_u64(&mut r)?);
    }
    let grid = Grid2D::new((header[0], header[1]), (header[2], header[3]), n1, n2)?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        values.push(f64::from_bits(next_u64(&mut r)?));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidGrid("non-finite value in field file".into()));
    }
    Ok(ScalarField {
        grid,
        values,
        time_label: header[4],
    })
}

/// One `x1,x2,value` line per node, preceded by a header line.
pub fn write_csv(field: &ScalarField, mut w: impl Write) -> Result<()> {
    let g = &field.grid;
    writeln!(w, "x1,x2,value")?;
    for i in 0..g.n1 {
        let x1 = g.x1(i);
        for j in 0..g.n2 {
            writeln!(w, "{},{},{:e}", x1, g.x2(j), field.at(i, j))?;
        }
    }
    Ok(())
}
