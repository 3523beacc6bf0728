//! Matrix and problem files.
//!
//! RSKM is the native binary format: the ASCII magic `RSKM`, then `rows` and
//! `cols` as little-endian `u64`, then `rows·cols` little-endian `f64` values
//! in column-major order. Matrix Market (`.mtx`) files are accepted on input
//! and can be written in dense `array` form.
//!
//! A problem written to `prob.rskm` consists of three files: the matrix
//! itself, `prob.b` (the right-hand side as an RSKM `m × 1` matrix) and
//! `prob.meta.json`.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ridge_sketch_core::{DenseMatrix, GeneratedProblem, ProblemInstance, ProblemMeta};
use serde::{Deserialize, Serialize};

pub const RSKM_MAGIC: &[u8; 4] = b"RSKM";

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Core(#[from] ridge_sketch_core::Error),
}

impl IoError {
    fn io(path: &Path, source: io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn format(path: &Path, message: impl Into<String>) -> Self {
        Self::Format {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

pub fn write_rskm_to<W: Write>(mut w: W, m: &DenseMatrix) -> io::Result<()> {
    w.write_all(RSKM_MAGIC)?;
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.cols() as u64).to_le_bytes())?;
    for v in m.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()
}

/// Reads an RSKM stream. Non-finite entries and size mismatches are errors.
pub fn read_rskm_from<R: Read>(mut r: R) -> Result<DenseMatrix, String> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|e| format!("missing header: {e}"))?;
    if &magic != RSKM_MAGIC {
        return Err("not an RSKM file (bad magic)".into());
    }
    let mut word = [0u8; 8];
    let mut read_u64 = |r: &mut R| -> Result<u64, String> {
        r.read_exact(&mut word)
            .map_err(|e| format!("truncated header: {e}"))?;
        Ok(u64::from_le_bytes(word))
    };
    let rows = read_u64(&mut r)?;
    let cols = read_u64(&mut r)?;
    let len = rows
        .checked_mul(cols)
        .and_then(|n| usize::try_from(n).ok())
        .ok_or("matrix dimensions overflow")?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| e.to_string())?;
    if bytes.len() != len * 8 {
        return Err(format!(
            "payload has {} bytes, expected {} for {rows}x{cols}",
            bytes.len(),
            len * 8
        ));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    DenseMatrix::from_col_major(rows as usize, cols as usize, data).map_err(|e| e.to_string())
}

pub fn write_rskm(path: &Path, m: &DenseMatrix) -> Result<(), IoError> {
    let f = File::create(path).map_err(|e| IoError::io(path, e))?;
    write_rskm_to(BufWriter::new(f), m).map_err(|e| IoError::io(path, e))
}

pub fn read_rskm(path: &Path) -> Result<DenseMatrix, IoError> {
    let f = File::open(path).map_err(|e| IoError::io(path, e))?;
    read_rskm_from(BufReader::new(f)).map_err(|msg| IoError::format(path, msg))
}

/// Parses Matrix Market `coordinate` or `array` real matrices, `general` or
/// `symmetric`.
pub fn read_matrix_market_from<R: BufRead>(r: R) -> Result<DenseMatrix, String> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or("empty file")?
        .map_err(|e| e.to_string())?;
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err("missing %%MatrixMarket matrix header".into());
    }
    let coordinate = match tokens[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(format!("unsupported layout {other}")),
    };
    match tokens[3].as_str() {
        "real" | "integer" | "double" => {}
        other => return Err(format!("unsupported field {other}")),
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(format!("unsupported symmetry {other}")),
    };

    let mut body = Vec::new();
    for line in lines {
        let line = line.map_err(|e| e.to_string())?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        body.push(t.to_owned());
    }
    let mut it = body.iter();
    let size: Vec<usize> = it
        .next()
        .ok_or("missing size line")?
        .split_whitespace()
        .map(|s| s.parse::<usize>().map_err(|e| format!("bad size line: {e}")))
        .collect::<Result<_, _>>()?;
    let parse_f = |s: &str| s.parse::<f64>().map_err(|e| format!("bad value {s:?}: {e}"));

    let (rows, cols) = match size.as_slice() {
        [r, c, ..] => (*r, *c),
        _ => return Err("size line needs rows and cols".into()),
    };
    let mut m = DenseMatrix::zeros(rows, cols);
    if coordinate {
        let nnz = *size.get(2).ok_or("coordinate size line needs nnz")?;
        let mut count = 0;
        for line in it {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() < 3 {
                return Err(format!("bad entry line {line:?}"));
            }
            let i: usize = f[0].parse().map_err(|_| format!("bad row in {line:?}"))?;
            let j: usize = f[1].parse().map_err(|_| format!("bad col in {line:?}"))?;
            if i == 0 || j == 0 || i > rows || j > cols {
                return Err(format!("entry ({i}, {j}) out of range"));
            }
            let v = parse_f(f[2])?;
            m.set(i - 1, j - 1, m.get(i - 1, j - 1) + v);
            if symmetric && i != j {
                m.set(j - 1, i - 1, m.get(j - 1, i - 1) + v);
            }
            count += 1;
        }
        if count != nnz {
            return Err(format!("expected {nnz} entries, found {count}"));
        }
    } else {
        let values: Vec<f64> = it
            .flat_map(|l| l.split_whitespace())
            .map(parse_f)
            .collect::<Result<_, _>>()?;
        if symmetric {
            if rows != cols {
                return Err("symmetric array must be square".into());
            }
            let mut k = 0;
            for j in 0..cols {
                for i in j..rows {
                    let v = *values.get(k).ok_or("too few array values")?;
                    m.set(i, j, v);
                    m.set(j, i, v);
                    k += 1;
                }
            }
            if k != values.len() {
                return Err("too many array values".into());
            }
        } else {
            if values.len() != rows * cols {
                return Err(format!(
                    "expected {} array values, found {}",
                    rows * cols,
                    values.len()
                ));
            }
            m = DenseMatrix::from_col_major(rows, cols, values).map_err(|e| e.to_string())?;
        }
    }
    if let Some(k) = m.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(format!("non-finite entry at ({}, {})", k % rows, k / rows));
    }
    Ok(m)
}

pub fn write_matrix_market_to<W: Write>(mut w: W, m: &DenseMatrix) -> io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} {}", m.rows(), m.cols())?;
    for v in m.as_slice() {
        // `{:e}` on f64 prints the shortest representation that round-trips.
        writeln!(w, "{v:e}")?;
    }
    w.flush()
}

pub fn read_matrix_market(path: &Path) -> Result<DenseMatrix, IoError> {
    let f = File::open(path).map_err(|e| IoError::io(path, e))?;
    read_matrix_market_from(BufReader::new(f)).map_err(|msg| IoError::format(path, msg))
}

pub fn write_matrix_market(path: &Path, m: &DenseMatrix) -> Result<(), IoError> {
    let f = File::create(path).map_err(|e| IoError::io(path, e))?;
    write_matrix_market_to(BufWriter::new(f), m).map_err(|e| IoError::io(path, e))
}

/// Reads `.mtx` files as Matrix Market and everything else as RSKM.
pub fn read_matrix(path: &Path) -> Result<DenseMatrix, IoError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("mtx") => read_matrix_market(path),
        _ => read_rskm(path),
    }
}

/// Contents of `<stem>.meta.json`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetaFile {
    pub rows: usize,
    pub cols: usize,
    #[serde(flatten)]
    pub meta: ProblemMeta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_min: Option<f64>,
}

pub fn rhs_path(matrix_path: &Path) -> PathBuf {
    matrix_path.with_extension("b")
}

pub fn meta_path(matrix_path: &Path) -> PathBuf {
    matrix_path.with_extension("meta.json")
}

/// Writes the matrix, right-hand side and metadata next to each other and
/// returns the three paths.
pub fn write_problem(
    matrix_path: &Path,
    generated: &GeneratedProblem,
) -> Result<[PathBuf; 3], IoError> {
    let p = &generated.problem;
    write_rskm(matrix_path, p.a())?;
    let b_path = rhs_path(matrix_path);
    let b = DenseMatrix::from_col_major(p.rows(), 1, p.b().to_vec())?;
    write_rskm(&b_path, &b)?;
    let meta = MetaFile {
        rows: p.rows(),
        cols: p.cols(),
        meta: p.meta.clone(),
        sigma_max: generated.sigma.first().copied(),
        sigma_min: generated.sigma.last().copied(),
    };
    let m_path = meta_path(matrix_path);
    let f = File::create(&m_path).map_err(|e| IoError::io(&m_path, e))?;
    serde_json::to_writer_pretty(BufWriter::new(f), &meta).map_err(|source| IoError::Json {
        path: m_path.clone(),
        source,
    })?;
    Ok([matrix_path.to_path_buf(), b_path, m_path])
}

/// Reads a problem written by [`write_problem`]. The right-hand side may also
/// be given explicitly (RSKM or Matrix Market, one column); metadata is
/// optional.
pub fn read_problem(matrix_path: &Path, rhs: Option<&Path>) -> Result<ProblemInstance, IoError> {
    let a = read_matrix(matrix_path)?;
    let b_path = rhs.map_or_else(|| rhs_path(matrix_path), Path::to_path_buf);
    let b = read_matrix(&b_path)?;
    if b.cols() != 1 {
        return Err(IoError::format(&b_path, "right-hand side must have one column"));
    }
    let mut problem = ProblemInstance::new(a, b.into_vec())?;
    let m_path = meta_path(matrix_path);
    if m_path.exists() {
        let f = File::open(&m_path).map_err(|e| IoError::io(&m_path, e))?;
        let meta: MetaFile =
            serde_json::from_reader(BufReader::new(f)).map_err(|source| IoError::Json {
                path: m_path.clone(),
                source,
            })?;
        problem = problem.with_meta(meta.meta);
    }
    Ok(problem)
}
