//! Matrix Market reader and writer for dense real matrices.
//!
//! Reads `coordinate` and `array` formats with `real` or `integer` fields and
//! `general`, `symmetric` or `skew-symmetric` storage. Writes `coordinate`
//! format with nonzeros only, using the shortest round-trip float text so
//! output is byte-deterministic.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Mat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Storage {
    General,
    Symmetric,
    SkewSymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Coordinate,
    Array,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Io(format!("matrix market: {}", msg.into()))
}

fn parse_header(line: &str) -> Result<(Format, Storage)> {
    let words: Vec<String> = line
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(bad(format!("unrecognized header {line:?}")));
    }
    let format = match words[2].as_str() {
        "coordinate" => Format::Coordinate,
        "array" => Format::Array,
        f => return Err(bad(format!("unsupported format {f}"))),
    };
    if !matches!(words[3].as_str(), "real" | "integer" | "double") {
        return Err(bad(format!("unsupported field {}", words[3])));
    }
    let storage = match words[4].as_str() {
        "general" => Storage::General,
        "symmetric" => Storage::Symmetric,
        "skew-symmetric" => Storage::SkewSymmetric,
        s => return Err(bad(format!("unsupported symmetry {s}"))),
    };
    Ok((format, storage))
}

fn number(tok: Option<&str>) -> Result<f64> {
    let t = tok.ok_or_else(|| bad("truncated entry"))?;
    t.parse::<f64>()
        .map_err(|_| bad(format!("bad number {t:?}")))
}

fn index(tok: Option<&str>, bound: usize) -> Result<usize> {
    let t = tok.ok_or_else(|| bad("truncated entry"))?;
    let i: usize = t.parse().map_err(|_| bad(format!("bad index {t:?}")))?;
    if i == 0 || i > bound {
        return Err(bad(format!("index {i} outside 1..={bound}")));
    }
    Ok(i - 1)
}

pub fn parse_mtx(text: &str) -> Result<Mat> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file"))?;
    let (format, storage) = parse_header(header)?;
    let mut data = lines
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('%'));
    let size = data.next().ok_or_else(|| bad("missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| bad(format!("bad size line {size:?}")))
        })
        .collect::<Result<_>>()?;
    let (rows, cols) = match (format, dims.as_slice()) {
        (Format::Coordinate, &[r, c, _]) | (Format::Array, &[r, c]) => (r, c),
        _ => return Err(bad(format!("bad size line {size:?}"))),
    };
    if storage != Storage::General && rows != cols {
        return Err(bad("symmetric storage needs a square matrix"));
    }
    let mut a = Mat::zeros(rows, cols);
    let mirror = |a: &mut Mat, i: usize, j: usize, v: f64| {
        a[(i, j)] = v;
        if i != j {
            match storage {
                Storage::General => {}
                Storage::Symmetric => a[(j, i)] = v,
                Storage::SkewSymmetric => a[(j, i)] = -v,
            }
        }
    };
    match format {
        Format::Coordinate => {
            let nnz = dims[2];
            for _ in 0..nnz {
                let line = data
                    .next()
                    .ok_or_else(|| bad(format!("expected {nnz} entries")))?;
                let mut toks = line.split_whitespace();
                let i = index(toks.next(), rows)?;
                let j = index(toks.next(), cols)?;
                let v = number(toks.next())?;
                mirror(&mut a, i, j, v);
            }
        }
        Format::Array => {
            // column-major; symmetric storage lists the lower triangle only
            for j in 0..cols {
                let start = match storage {
                    Storage::General => 0,
                    Storage::Symmetric => j,
                    Storage::SkewSymmetric => j + 1,
                };
                for i in start..rows {
                    let v = number(data.next())?;
                    mirror(&mut a, i, j, v);
                }
            }
        }
    }
    if data.next().is_some() {
        return Err(bad("trailing data after the last entry"));
    }
    Ok(a)
}

pub fn read_mtx(path: &Path) -> Result<Mat> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_mtx(&text).map_err(|e| e.in_stage(&path.display().to_string()))
}

/// Coordinate text. With `Storage::Symmetric` only the lower triangle of the
/// symmetric part `(A + A^T) / 2` is written.
pub fn format_mtx(a: &Mat, storage: Storage) -> String {
    let (rows, cols) = a.shape();
    let qualifier = match storage {
        Storage::General => "general",
        Storage::Symmetric => "symmetric",
        Storage::SkewSymmetric => "skew-symmetric",
    };
    let mut entries = Vec::new();
    for j in 0..cols {
        for i in 0..rows {
            let v = match storage {
                Storage::General => a[(i, j)],
                Storage::Symmetric if i >= j => 0.5 * (a[(i, j)] + a[(j, i)]),
                Storage::SkewSymmetric if i > j => 0.5 * (a[(i, j)] - a[(j, i)]),
                _ => continue,
            };
            if v != 0.0 {
                entries.push((i + 1, j + 1, v));
            }
        }
    }
    let mut out = format!(
        "%%MatrixMarket matrix coordinate real {qualifier}\n{rows} {cols} {}\n",
        entries.len()
    );
    for (i, j, v) in entries {
        let _ = writeln!(out, "{i} {j} {v:e}");
    }
    out
}

pub fn write_mtx(path: &Path, a: &Mat, storage: Storage) -> Result<()> {
    std::fs::write(path, format_mtx(a, storage))
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
