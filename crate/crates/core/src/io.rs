//! Snapshot files.
//!
//! Two formats hold an `N x M` table of complex samples, one snapshot per row:
//!
//! * CSV: `N` rows of `2M` numbers, `re_1, im_1, re_2, im_2, ...`. A first
//!   row that does not parse as numbers is taken as a header and skipped.
//! * Binary (little endian): the 8 magic bytes `DOASNAP1`, `M` and `N` as
//!   `u32`, then `N * M` complex64 values (`f32` real, `f32` imaginary) in
//!   row-major order, i.e. snapshot by snapshot.
//!
//! [`read_snapshots`] tells the two apart by the magic bytes.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::array::SnapshotMatrix;
use crate::error::{DoaError, Result};
use crate::linalg::{CMat, C64};

pub const MAGIC: &[u8; 8] = b"DOASNAP1";

fn format_err(path: &Path, message: impl Into<String>) -> DoaError {
    DoaError::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Reads either format.
pub fn read_snapshots(path: impl AsRef<Path>) -> Result<SnapshotMatrix> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| DoaError::io(path, e))?;
    let data = if bytes.starts_with(MAGIC) {
        parse_binary(path, &bytes)?
    } else {
        parse_csv(path, &bytes)?
    };
    SnapshotMatrix::new(data).map_err(|e| format_err(path, e.to_string()))
}

fn parse_binary(path: &Path, bytes: &[u8]) -> Result<CMat> {
    let mut r = &bytes[MAGIC.len()..];
    let short = |_| format_err(path, "truncated header");
    let m = r.read_u32::<LittleEndian>().map_err(short)? as usize;
    let n = r.read_u32::<LittleEndian>().map_err(short)? as usize;
    let expected = m
        .checked_mul(n)
        .and_then(|k| k.checked_mul(8))
        .ok_or_else(|| format_err(path, "dimensions overflow"))?;
    if r.len() != expected {
        return Err(format_err(
            path,
            format!("expected {expected} payload bytes for {m} sensors x {n} snapshots, found {}", r.len()),
        ));
    }
    let mut x = CMat::zeros(m, n);
    for t in 0..n {
        for s in 0..m {
            let re = r.read_f32::<LittleEndian>().map_err(|e| DoaError::io(path, e))?;
            let im = r.read_f32::<LittleEndian>().map_err(|e| DoaError::io(path, e))?;
            x[(s, t)] = C64::new(re as f64, im as f64);
        }
    }
    Ok(x)
}

fn parse_csv(path: &Path, bytes: &[u8]) -> Result<CMat> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| format_err(path, e.to_string()))?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => rows.push(v),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(format_err(path, format!("row {}: {e}", i + 1))),
        }
    }
    let n = rows.len();
    if n == 0 {
        return Err(format_err(path, "no snapshot rows"));
    }
    let width = rows[0].len();
    if width == 0 || !width.is_multiple_of(2) {
        return Err(format_err(path, format!("expected an even number of columns, found {width}")));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != width) {
        return Err(format_err(path, format!("row {} has {} columns, expected {width}", i + 1, rows[i].len())));
    }
    let m = width / 2;
    Ok(CMat::from_fn(m, n, |s, t| C64::new(rows[t][2 * s], rows[t][2 * s + 1])))
}

pub fn write_snapshots_csv(path: impl AsRef<Path>, x: &CMat) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| DoaError::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for t in 0..x.ncols() {
        let row: Vec<String> = (0..x.nrows())
            .flat_map(|s| [x[(s, t)].re.to_string(), x[(s, t)].im.to_string()])
            .collect();
        w.write_record(&row).map_err(|e| format_err(path, e.to_string()))?;
    }
    w.flush().map_err(|e| DoaError::io(path, e))
}

pub fn write_snapshots_binary(path: impl AsRef<Path>, x: &CMat) -> Result<()> {
    let path = path.as_ref();
    let io = |e| DoaError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_all(MAGIC).map_err(io)?;
    w.write_u32::<LittleEndian>(x.nrows() as u32).map_err(io)?;
    w.write_u32::<LittleEndian>(x.ncols() as u32).map_err(io)?;
    for t in 0..x.ncols() {
        for s in 0..x.nrows() {
            w.write_f32::<LittleEndian>(x[(s, t)].re as f32).map_err(io)?;
            w.write_f32::<LittleEndian>(x[(s, t)].im as f32).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Reads a whole file as UTF-8, mapping failures to I/O errors with the path.
pub(crate) fn read_text(path: &Path) -> Result<String> {
    let mut s = String::new();
    BufReader::new(File::open(path).map_err(|e| DoaError::io(path, e))?)
        .read_to_string(&mut s)
        .map_err(|e| DoaError::io(path, e))?;
    Ok(s)
}
