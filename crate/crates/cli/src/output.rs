//! Energy ledger CSV, convergence tables and raw snapshots.
//!
//! A snapshot is two files: `<stem>.bin` holds the nodal field as
//! little-endian f64, row-major (`[i, j]` at byte `8 (i cols + j)`), and
//! `<stem>.toml` describes it and carries the SHA-256 of the payload.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use tdsr_core::{ConvergenceReport, EnergyLedgerRow};

pub const LEDGER_HEADER: [&str; 9] = [
    "t",
    "dt",
    "E",
    "E_modified",
    "R",
    "picard_iters",
    "newton_iters",
    "clamp_active",
    "mass",
];

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: bad header: {message}")]
    Header { path: PathBuf, message: String },
    #[error("{path}: payload has {got} bytes, header implies {expected}")]
    Length { path: PathBuf, expected: usize, got: usize },
    #[error("{path}: checksum mismatch (header {expected}, payload {got})")]
    Checksum {
        path: PathBuf,
        expected: String,
        got: String,
    },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> FormatError + '_ {
    move |source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> FormatError + '_ {
    move |source| FormatError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_ledger(path: &Path, rows: &[EnergyLedgerRow]) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(LEDGER_HEADER).map_err(csv_err(path))?;
    for r in rows {
        w.write_record([
            float(r.t),
            float(r.dt),
            float(r.energy),
            float(r.modified_energy),
            float(r.r),
            r.picard_iters.to_string(),
            r.newton_iters.to_string(),
            r.clamp_active.to_string(),
            float(r.mass),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io(path))
}

pub fn read_ledger(path: &Path) -> Result<Vec<EnergyLedgerRow>, FormatError> {
    let mut rd = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = rd.headers().map_err(csv_err(path))?.clone();
    if header.iter().ne(LEDGER_HEADER) {
        return Err(FormatError::Header {
            path: path.to_path_buf(),
            message: format!("unexpected columns {header:?}"),
        });
    }
    let bad = |message: String| FormatError::Header {
        path: path.to_path_buf(),
        message,
    };
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err(path))?;
        let f = |k: usize| {
            rec[k]
                .parse::<f64>()
                .map_err(|e| bad(format!("column {}: {e}", LEDGER_HEADER[k])))
        };
        let u = |k: usize| {
            rec[k]
                .parse::<usize>()
                .map_err(|e| bad(format!("column {}: {e}", LEDGER_HEADER[k])))
        };
        rows.push(EnergyLedgerRow {
            t: f(0)?,
            dt: f(1)?,
            energy: f(2)?,
            modified_energy: f(3)?,
            r: f(4)?,
            picard_iters: u(5)?,
            newton_iters: u(6)?,
            clamp_active: rec[7].parse().map_err(|e| bad(format!("column clamp_active: {e}")))?,
            mass: f(8)?,
        });
    }
    Ok(rows)
}

pub fn write_convergence(path: &Path, report: &ConvergenceReport) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["dt", "phi_error", "r_error", "phi_rate", "r_rate"])
        .map_err(csv_err(path))?;
    let opt = |v: Option<f64>| v.map(float).unwrap_or_default();
    for r in &report.rows {
        w.write_record([
            float(r.dt),
            float(r.phi_error),
            float(r.r_error),
            opt(r.phi_rate),
            opt(r.r_rate),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io(path))
}

/// Sidecar of a snapshot payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotHeader {
    pub model: String,
    pub t: f64,
    pub rows: usize,
    pub cols: usize,
    /// `"uniform"` (periodic) or `"gauss-lobatto"`.
    pub nodes: String,
    /// Node coordinates along each axis.
    pub coordinates: Vec<f64>,
    pub dtype: String,
    pub endianness: String,
    pub layout: String,
    pub payload: String,
    pub sha256: String,
}

impl SnapshotHeader {
    pub fn new(model: &str, t: f64, nodes: &str, coordinates: Vec<f64>) -> Self {
        Self {
            model: model.to_string(),
            t,
            rows: coordinates.len(),
            cols: coordinates.len(),
            nodes: nodes.to_string(),
            coordinates,
            dtype: "f64".into(),
            endianness: "little".into(),
            layout: "row-major".into(),
            payload: String::new(),
            sha256: String::new(),
        }
    }
}

fn sidecar(stem: &Path) -> PathBuf {
    stem.with_extension("toml")
}

/// Writes `<stem>.bin` and `<stem>.toml`; fills in the payload name, shape
/// and checksum of `header`.
pub fn write_snapshot(stem: &Path, mut header: SnapshotHeader, field: &Array2<f64>) -> Result<(), FormatError> {
    let bin = stem.with_extension("bin");
    let mut bytes = Vec::with_capacity(8 * field.len());
    for v in field.iter() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    (header.rows, header.cols) = field.dim();
    header.payload = bin
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    header.sha256 = hex::encode(Sha256::digest(&bytes));
    fs::write(&bin, &bytes).map_err(io(&bin))?;
    let text = toml::to_string(&header).expect("header is always representable");
    let side = sidecar(stem);
    let mut f = fs::File::create(&side).map_err(io(&side))?;
    f.write_all(text.as_bytes()).map_err(io(&side))
}

/// Reads a snapshot given its stem or either of its two paths.
pub fn read_snapshot(path: &Path) -> Result<(SnapshotHeader, Array2<f64>), FormatError> {
    let side = sidecar(path);
    let text = fs::read_to_string(&side).map_err(io(&side))?;
    let header: SnapshotHeader = toml::from_str(&text).map_err(|e| FormatError::Header {
        path: side.clone(),
        message: e.to_string(),
    })?;
    if header.dtype != "f64" || header.endianness != "little" || header.layout != "row-major" {
        return Err(FormatError::Header {
            path: side,
            message: format!(
                "unsupported encoding {} {} {}",
                header.dtype, header.endianness, header.layout
            ),
        });
    }
    let bin = side.with_file_name(&header.payload);
    let bytes = fs::read(&bin).map_err(io(&bin))?;
    let expected = 8 * header.rows * header.cols;
    if bytes.len() != expected {
        return Err(FormatError::Length {
            path: bin,
            expected,
            got: bytes.len(),
        });
    }
    let got = hex::encode(Sha256::digest(&bytes));
    if got != header.sha256 {
        return Err(FormatError::Checksum {
            path: bin,
            expected: header.sha256,
            got,
        });
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")));
    let field = Array2::from_shape_vec((header.rows, header.cols), values.collect()).expect("length checked above");
    Ok((header, field))
}
