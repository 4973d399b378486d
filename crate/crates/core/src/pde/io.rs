//! CSV export of grid functions with a JSON sidecar.
//!
//! The CSV has header `x1,...,xn,value` and one row per grid point in
//! lexicographic index order (first axis slowest). Numbers are written with
//! `{:.16e}` so a run is reproducible byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::grid::{GridShape, ScalarGrid};
use crate::error::{Error, Result};
use crate::seeds::SeedQuadratic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSidecar {
    pub n: usize,
    pub m: usize,
    pub h: f64,
    /// Written coordinates are `coordinate_scale * x` with `x` in `[-1, 1]^n`.
    pub coordinate_scale: f64,
    pub domain: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<SeedQuadratic>,
}

impl GridSidecar {
    pub fn new(shape: GridShape, coordinate_scale: f64, seed: Option<SeedQuadratic>) -> Self {
        GridSidecar {
            n: shape.n,
            m: shape.m,
            h: shape.h(),
            coordinate_scale,
            domain: "cube".into(),
            seed,
        }
    }
}

fn num(v: f64) -> String {
    // Adding zero maps -0.0 to 0.0.
    format!("{:.16e}", v + 0.0)
}

pub fn to_csv_string(grid: &ScalarGrid, coordinate_scale: f64) -> String {
    let shape = grid.shape;
    let mut out = String::new();
    let header: Vec<String> = (1..=shape.n).map(|i| format!("x{i}")).collect();
    out.push_str(&header.join(","));
    out.push_str(",value\n");
    for (p, v) in grid.values.iter().enumerate() {
        for x in shape.point(p) {
            out.push_str(&num(coordinate_scale * x));
            out.push(',');
        }
        let _ = writeln!(out, "{}", num(*v));
    }
    out
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`; returns the CSV path.
pub fn write_grid(
    dir: &Path,
    stem: &str,
    grid: &ScalarGrid,
    coordinate_scale: f64,
    seed: Option<&SeedQuadratic>,
) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    fs::write(&csv, to_csv_string(grid, coordinate_scale))?;
    let sidecar = GridSidecar::new(grid.shape, coordinate_scale, seed.cloned());
    let json = serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(dir.join(format!("{stem}.json")), json + "\n")?;
    Ok(csv)
}

/// Parses CSV written by [`to_csv_string`], returning the grid and the
/// coordinate scale.
pub fn read_csv(text: &str) -> Result<(ScalarGrid, f64)> {
    let parse_err = |msg: String| Error::Parse(msg);
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| parse_err("empty CSV".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let n = cols.len().saturating_sub(1);
    let expected: Vec<String> = (1..=n).map(|i| format!("x{i}")).chain(["value".to_string()]).collect();
    if cols != expected {
        return Err(parse_err(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Result<Vec<f64>> = line
            .split(',')
            .map(|s| s.parse::<f64>().map_err(|e| parse_err(format!("line {}: {e}", lineno + 2))))
            .collect();
        let fields = fields?;
        if fields.len() != n + 1 {
            return Err(parse_err(format!("line {}: expected {} fields", lineno + 2, n + 1)));
        }
        rows.push(fields);
    }
    let m = (rows.len() as f64).powf(1.0 / n as f64).round() as usize;
    let shape = GridShape::new(n, m)?;
    if rows.len() != shape.len() {
        return Err(parse_err(format!("{} rows is not a full {n}-dimensional grid", rows.len())));
    }
    let scale = -rows[0][0];
    for (p, row) in rows.iter().enumerate() {
        for (x, want) in row[..n].iter().zip(shape.point(p)) {
            if (x - scale * want).abs() > 1e-12 * scale.abs().max(1e-300) {
                return Err(parse_err(format!("row {p}: coordinates out of lexicographic order")));
            }
        }
    }
    let values = rows.iter().map(|r| r[n]).collect();
    Ok((ScalarGrid { shape, values }, scale))
}
