//! Binary grid and operator dumps, and CSV export.
//!
//! A grid dump is the ASCII header `GRID <rows> <cols> <kind>\n`, `kind`
//! being `real` or `complex`, followed by row-major little-endian `f64`
//! values (re/im pairs for complex). An operator dump is the header
//! `OPMAT <n> <z_re> <z_im>\n` followed by the `n² × n²` entries row-major
//! as re/im pairs.

use std::io::{BufRead, BufReader, Read, Write};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::operator::{OperatorMatrix, OperatorMeta};

type C64 = Complex<f64>;

#[derive(Debug, Clone, PartialEq)]
pub enum GridData {
    Real(Vec<f64>),
    Complex(Vec<C64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridDump {
    pub rows: usize,
    pub cols: usize,
    pub data: GridData,
}

fn put_f64s<'a>(w: &mut impl Write, values: impl Iterator<Item = &'a f64>) -> Result<()> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_grid_real(w: &mut impl Write, rows: usize, cols: usize, values: &[f64]) -> Result<()> {
    if values.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            expected: rows * cols,
            actual: values.len(),
        });
    }
    write!(w, "GRID {rows} {cols} real\n")?;
    put_f64s(w, values.iter())
}

pub fn write_grid_complex(w: &mut impl Write, rows: usize, cols: usize, values: &[C64]) -> Result<()> {
    if values.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            expected: rows * cols,
            actual: values.len(),
        });
    }
    write!(w, "GRID {rows} {cols} complex\n")?;
    put_f64s(w, values.iter().flat_map(|c| [&c.re, &c.im]))
}

fn read_header(r: &mut impl BufRead) -> Result<Vec<String>> {
    let mut line = Vec::new();
    r.read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(Error::Format("missing header line".into()));
    }
    let text = std::str::from_utf8(&line[..line.len() - 1]).map_err(|_| Error::Format("header is not UTF-8".into()))?;
    Ok(text.split(' ').map(str::to_string).collect())
}

fn read_f64s(r: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes)
        .map_err(|e| Error::Format(format!("payload shorter than {count} values: {e}")))?;
    let mut tail = [0u8; 1];
    if r.read(&mut tail)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Format(format!("bad {what}: {s:?}")))
}

pub fn read_grid(r: impl Read) -> Result<GridDump> {
    let mut r = BufReader::new(r);
    let head = read_header(&mut r)?;
    if head.len() != 4 || head[0] != "GRID" {
        return Err(Error::Format(format!("expected GRID header, got {:?}", head.join(" "))));
    }
    let rows: usize = parse(&head[1], "row count")?;
    let cols: usize = parse(&head[2], "column count")?;
    let data = match head[3].as_str() {
        "real" => GridData::Real(read_f64s(&mut r, rows * cols)?),
        "complex" => GridData::Complex(
            read_f64s(&mut r, 2 * rows * cols)?
                .chunks_exact(2)
                .map(|c| C64::new(c[0], c[1]))
                .collect(),
        ),
        other => return Err(Error::Format(format!("unknown grid kind {other:?}"))),
    };
    Ok(GridDump { rows, cols, data })
}

pub fn write_opmat(w: &mut impl Write, m: &OperatorMatrix) -> Result<()> {
    let z = m.z();
    write!(w, "OPMAT {} {:e} {:e}\n", m.order(), z.re, z.im)?;
    put_f64s(w, m.entries().iter().flat_map(|c| [&c.re, &c.im]))
}

/// Reads an operator dump. Only the order and twist survive the round trip;
/// the remaining metadata is filled with placeholders.
pub fn read_opmat(r: impl Read) -> Result<OperatorMatrix> {
    let mut r = BufReader::new(r);
    let head = read_header(&mut r)?;
    if head.len() != 4 || head[0] != "OPMAT" {
        return Err(Error::Format(format!("expected OPMAT header, got {:?}", head.join(" "))));
    }
    let n: usize = parse(&head[1], "order")?;
    let z = [parse(&head[2], "z_re")?, parse(&head[3], "z_im")?];
    let dim = n * n;
    let entries = read_f64s(&mut r, 2 * dim * dim)?
        .chunks_exact(2)
        .map(|c| C64::new(c[0], c[1]))
        .collect();
    OperatorMatrix::from_entries(
        n,
        entries,
        OperatorMeta {
            map: String::new(),
            kernel: String::new(),
            z,
            grid: GridSpec { coarse: n, fine: n },
        },
    )
}

/// One CSV line per grid row.
pub fn write_grid_csv(w: &mut impl Write, rows: usize, cols: usize, values: &[f64]) -> Result<()> {
    if values.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            expected: rows * cols,
            actual: values.len(),
        });
    }
    for row in values.chunks_exact(cols.max(1)) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_grid_round_trip() {
        let values: Vec<f64> = (0..12).map(|i| i as f64 * 0.25 - 1.0).collect();
        let mut buf = Vec::new();
        write_grid_real(&mut buf, 3, 4, &values).unwrap();
        assert!(buf.starts_with(b"GRID 3 4 real\n"));
        assert_eq!(buf.len(), 14 + 12 * 8);
        let back = read_grid(buf.as_slice()).unwrap();
        assert_eq!(back, GridDump { rows: 3, cols: 4, data: GridData::Real(values) });
    }

    #[test]
    fn complex_grid_round_trip() {
        let values: Vec<C64> = (0..4).map(|i| C64::new(i as f64, -(i as f64))).collect();
        let mut buf = Vec::new();
        write_grid_complex(&mut buf, 2, 2, &values).unwrap();
        assert_eq!(&buf[..17], b"GRID 2 2 complex\n");
        assert_eq!(&buf[17 + 8..17 + 16], &(-0.0f64).to_le_bytes());
        assert_eq!(read_grid(buf.as_slice()).unwrap().data, GridData::Complex(values));
    }

    #[test]
    fn malformed_dumps() {
        assert!(read_grid(&b"GRID 2 2 real\n\0\0"[..]).is_err());
        assert!(read_grid(&b"GRAD 1 1 real\n"[..]).is_err());
        assert!(read_grid(&b"GRID 1 1 quaternion\n"[..]).is_err());
        let mut buf = Vec::new();
        write_grid_real(&mut buf, 1, 1, &[1.0]).unwrap();
        buf.push(0);
        assert!(read_grid(buf.as_slice()).is_err());
    }

    #[test]
    fn opmat_round_trip() {
        let entries: Vec<C64> = (0..16).map(|i| C64::new(i as f64, 0.5)).collect();
        let meta = OperatorMeta {
            map: "m".into(),
            kernel: "k".into(),
            z: [0.25, -1.0],
            grid: GridSpec { coarse: 2, fine: 4 },
        };
        let m = OperatorMatrix::from_entries(2, entries.clone(), meta).unwrap();
        let mut buf = Vec::new();
        write_opmat(&mut buf, &m).unwrap();
        let back = read_opmat(buf.as_slice()).unwrap();
        assert_eq!(back.entries(), &entries[..]);
        assert_eq!(back.z(), C64::new(0.25, -1.0));
    }

    #[test]
    fn csv_rows() {
        let mut buf = Vec::new();
        write_grid_csv(&mut buf, 2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1e0,2e0\n3e0,4e0\n");
    }
}
