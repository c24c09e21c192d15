//! Text and binary matrix files, and atomic writes.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::bytes::Reader;
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

const EMBEDDING_MAGIC: &[u8; 4] = b"PCAE";

/// Writes through a sibling temp file and renames it into place.
pub fn write_atomic(path: impl AsRef<Path>, contents: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let mut tmp_name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp: PathBuf = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

pub fn read_file(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    let path = path.as_ref();
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn open_lines(
    path: &Path,
) -> Result<impl Iterator<Item = (usize, std::io::Result<String>)>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(BufReader::new(file)
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l)))
}

/// Nine significant digits, enough to round-trip `f32`.
pub fn format_float(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn matrix_to_csv(m: &FeatureMatrix) -> String {
    let mut s = String::with_capacity(m.rows() * m.cols() * 16);
    for row in m.iter_rows() {
        let fields: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
        s.push_str(&fields.join(","));
        s.push('\n');
    }
    s
}

/// Headerless comma-separated floats, one row per line.
pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let mut data = Vec::new();
    let mut cols: Option<usize> = None;
    let mut rows = 0;
    for (lineno, line) in open_lines(path)? {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let start = data.len();
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                message: format!("bad float {field:?}"),
            })?;
            data.push(v);
        }
        let width = data.len() - start;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno,
                    message: format!("expected {c} columns, found {width}"),
                })
            }
            _ => {}
        }
        rows += 1;
    }
    FeatureMatrix::from_vec(rows, cols.unwrap_or(0), data)
}

/// `PCAE` blob: magic, u64 rows, u64 cols, little-endian f32 row-major.
pub fn embedding_to_bytes(m: &FeatureMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + 4 * m.as_slice().len());
    out.extend_from_slice(EMBEDDING_MAGIC);
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for &v in m.as_slice() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn embedding_from_bytes(bytes: &[u8]) -> Result<FeatureMatrix> {
    let mut r = Reader::new(bytes);
    if r.take(4)? != EMBEDDING_MAGIC {
        return Err(Error::Format("bad embedding magic".into()));
    }
    let rows = r.u64()? as usize;
    let cols = r.u64()? as usize;
    let len = rows
        .checked_mul(cols)
        .filter(|l| l.saturating_mul(4) <= bytes.len())
        .ok_or_else(|| Error::Format("embedding header size is implausible".into()))?;
    let data = (0..len)
        .map(|_| r.f32().map(f64::from))
        .collect::<Result<Vec<_>>>()?;
    r.finish()?;
    FeatureMatrix::from_vec(rows, cols, data)
}
