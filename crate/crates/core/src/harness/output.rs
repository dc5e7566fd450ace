//! CSV time series, CSV/PGM snapshots.
//!
//! CSV files use a header row, `.` decimals, LF line endings and 17
//! significant digits so every value parses back bit-exactly. PGM
//! snapshots are binary P5 with maxval 65535 and big-endian samples; the
//! linear scaling is recorded in a comment line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{KelsimError, Result};
use crate::integrator::RunOutcome;
use crate::model::{Field, Grid};

/// Formats with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| KelsimError::io(path, e))
}

fn lp_column(p: f64) -> String {
    format!("l{p}_u")
}

pub fn timeseries_header(outcome: &RunOutcome) -> Vec<String> {
    let mut h: Vec<String> = ["t", "dt", "mass", "linf_u", "min_u", "l2_u"].iter().map(|s| s.to_string()).collect();
    if let Some(first) = outcome.records.first() {
        h.extend(first.lp_norms.iter().map(|(p, _)| lp_column(*p)));
    }
    h.push("l2_v".into());
    h
}

/// Writes one row per diagnostics record.
pub fn emit_timeseries(outcome: &RunOutcome, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    let io = |e: csv::Error| KelsimError::io(path, e);
    w.write_record(timeseries_header(outcome)).map_err(io)?;
    for r in &outcome.records {
        let mut row = vec![
            fmt_f64(r.t),
            fmt_f64(r.dt),
            fmt_f64(r.mass),
            fmt_f64(r.linf_u),
            fmt_f64(r.min_u),
            fmt_f64(r.l2_u),
        ];
        row.extend(r.lp_norms.iter().map(|(_, n)| fmt_f64(*n)));
        row.push(fmt_f64(r.l2_v));
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| KelsimError::io(path, e))
}

/// Reads any numeric CSV written by this module: `(header, rows)`.
pub fn read_numeric_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| KelsimError::io(path, e))?;
    let header = r
        .headers()
        .map_err(|e| KelsimError::io(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| KelsimError::io(path, e))?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| KelsimError::io(path, format!("'{s}': {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotFiles {
    pub csv: PathBuf,
    /// `None` for 1D grids.
    pub pgm: Option<PathBuf>,
}

/// Writes `<stem>.csv` with raw cell values and, on 2D grids, `<stem>.pgm`.
///
/// Image rows run from the top of the domain (largest `y`) downward.
pub fn emit_snapshot(field: &Field, grid: &Grid, stem: &Path) -> Result<SnapshotFiles> {
    let csv_path = stem.with_extension("csv");
    let mut w = csv_writer(&csv_path)?;
    let io = |e: csv::Error| KelsimError::io(&csv_path, e);
    let two_d = grid.dim() == 2;
    if two_d {
        w.write_record(["i", "j", "x", "y", "value"]).map_err(io)?;
    } else {
        w.write_record(["i", "x", "value"]).map_err(io)?;
    }
    for (k, &val) in field.values().iter().enumerate() {
        let c = grid.center(k);
        let i = (k % grid.nx()).to_string();
        if two_d {
            let j = (k / grid.nx()).to_string();
            w.write_record([i, j, fmt_f64(c[0]), fmt_f64(c[1]), fmt_f64(val)]).map_err(io)?;
        } else {
            w.write_record([i, fmt_f64(c[0]), fmt_f64(val)]).map_err(io)?;
        }
    }
    w.flush().map_err(|e| KelsimError::io(&csv_path, e))?;

    if !two_d {
        eprintln!("note: 1D grid, skipping PGM for {}", stem.display());
        return Ok(SnapshotFiles { csv: csv_path, pgm: None });
    }

    let pgm_path = stem.with_extension("pgm");
    let lo = field.min();
    let hi = field.max();
    let degenerate = !(hi > lo);
    let mut buf = Vec::with_capacity(grid.cell_count() * 2 + 128);
    if degenerate {
        writeln!(buf, "P5\n# kelsim scale degenerate min={} max={}", fmt_f64(lo), fmt_f64(hi)).unwrap();
    } else {
        writeln!(buf, "P5\n# kelsim scale linear min={} max={}", fmt_f64(lo), fmt_f64(hi)).unwrap();
    }
    writeln!(buf, "{} {}\n65535", grid.nx(), grid.ny()).unwrap();
    let vals = field.values();
    for j in (0..grid.ny()).rev() {
        for i in 0..grid.nx() {
            let x = vals[grid.index(i, j)];
            let s = if degenerate {
                0u16
            } else {
                ((x - lo) / (hi - lo) * 65535.0).round().clamp(0.0, 65535.0) as u16
            };
            buf.extend_from_slice(&s.to_be_bytes());
        }
    }
    let mut f = BufWriter::new(File::create(&pgm_path).map_err(|e| KelsimError::io(&pgm_path, e))?);
    f.write_all(&buf).map_err(|e| KelsimError::io(&pgm_path, e))?;
    f.flush().map_err(|e| KelsimError::io(&pgm_path, e))?;
    Ok(SnapshotFiles {
        csv: csv_path,
        pgm: Some(pgm_path),
    })
}

/// Reloads the value column of a snapshot CSV into a field on `grid`.
pub fn read_snapshot_csv(path: &Path, grid: &Grid) -> Result<Field> {
    let (header, rows) = read_numeric_csv(path)?;
    let col = header
        .iter()
        .position(|h| h == "value")
        .ok_or_else(|| KelsimError::io(path, "missing 'value' column"))?;
    Field::from_values(grid, rows.iter().map(|r| r[col]).collect())
}

/// Decoded 16-bit PGM: `(width, height, comment lines, samples)`.
pub fn read_pgm16(path: &Path) -> Result<(usize, usize, Vec<String>, Vec<u16>)> {
    let bytes = std::fs::read(path).map_err(|e| KelsimError::io(path, e))?;
    let bad = |m: &str| KelsimError::io(path, m);
    let mut pos = 0;
    let mut comments = Vec::new();
    let mut tokens = Vec::new();
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos >= bytes.len() {
            return Err(bad("truncated header"));
        }
        if bytes[pos] == b'#' {
            let end = bytes[pos..].iter().position(|&b| b == b'\n').map_or(bytes.len(), |e| pos + e);
            comments.push(String::from_utf8_lossy(&bytes[pos + 1..end]).trim().to_string());
            pos = end;
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..pos]).to_string());
    }
    pos += 1;
    if tokens[0] != "P5" || tokens[3] != "65535" {
        return Err(bad("not a 16-bit P5 image"));
    }
    let w: usize = tokens[1].parse().map_err(|_| bad("bad width"))?;
    let h: usize = tokens[2].parse().map_err(|_| bad("bad height"))?;
    let data = &bytes[pos..];
    if data.len() != 2 * w * h {
        return Err(bad("sample count mismatch"));
    }
    let samples = data.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect();
    Ok((w, h, comments, samples))
}
