//! Field serialization.
//!
//! Binary layout, all little-endian: a 32-byte header made of the magic
//! `TLAB`, format version (u32), dims (u32), points per axis (u32), period (f64)
//! and 8 zero bytes of padding, followed by `N^n` row-major f64 samples.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Field, TorusGrid};

pub const MAGIC: &[u8; 4] = b"TLAB";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;

pub fn write_field<W: Write>(field: &Field, mut w: W) -> Result<()> {
    let g = field.grid();
    let mut header = [0u8; HEADER_LEN];
    header[0..4].copy_from_slice(MAGIC);
    header[4..8].copy_from_slice(&VERSION.to_le_bytes());
    header[8..12].copy_from_slice(&(g.dims() as u32).to_le_bytes());
    header[12..16].copy_from_slice(&(g.n() as u32).to_le_bytes());
    header[16..24].copy_from_slice(&g.period().to_le_bytes());
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(8 * field.samples().len());
    for v in field.samples() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_field<R: Read>(mut r: R) -> Result<Field> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|e| Error::Format(format!("truncated header: {e}")))?;
    if &header[0..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dims = u32_at(8) as usize;
    let n = u32_at(12) as usize;
    let period = f64::from_le_bytes(header[16..24].try_into().unwrap());
    let grid = TorusGrid::new(dims, n, period)?;
    let mut bytes = vec![0u8; 8 * grid.len()];
    r.read_exact(&mut bytes)
        .map_err(|e| Error::Format(format!("truncated samples: {e}")))?;
    let samples = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Field::new(grid, samples)
}

pub fn save_field(field: &Field, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field(field, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_field(path: impl AsRef<Path>) -> Result<Field> {
    read_field(BufReader::new(File::open(path)?))
}

/// CSV with one index column per axis and a value column.
pub fn write_field_csv<W: Write>(field: &Field, mut w: W) -> Result<()> {
    let g = field.grid();
    let cols: Vec<String> = (0..g.dims()).map(|a| format!("i{a}")).collect();
    writeln!(w, "{},value", cols.join(","))?;
    for (flat, v) in field.samples().iter().enumerate() {
        let c = g.coords(flat);
        let idx: Vec<String> = c[..g.dims()].iter().map(|x| x.to_string()).collect();
        writeln!(w, "{},{v:e}", idx.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip_is_exact() {
        let g = TorusGrid::new(2, 4, 2.5).unwrap();
        let f = Field::from_fn(g, |x| x[0].sin() + 3.0 * x[1]).unwrap();
        let mut buf = Vec::new();
        write_field(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 8 * 16);
        assert_eq!(&buf[24..32], &[0u8; 8]);
        let back = read_field(buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let g = TorusGrid::unit(1, 4).unwrap();
        let mut buf = Vec::new();
        write_field(&Field::zeros(g), &mut buf).unwrap();
        assert!(read_field(&buf[..40]).is_err());
        buf[0] = b'X';
        assert!(read_field(buf.as_slice()).is_err());
    }

    #[test]
    fn csv_has_index_columns() {
        let g = TorusGrid::unit(2, 2).unwrap();
        let f = Field::new(g, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&f, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "i0,i1,value");
        assert_eq!(lines[2], "0,1,2e0");
        assert_eq!(lines.len(), 5);
    }
}
