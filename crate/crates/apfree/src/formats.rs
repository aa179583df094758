//! File and text formats.
//!
//! * Grids: JSON `{depth, extent, count, coverage, longest_run, runs}` where
//!   `runs` lists half-open member index ranges `[start, end)`.
//! * Integer sequences: one integer per line, or b-file rows `index value`
//!   (value column used). Blank lines and lines starting with `#` are skipped.
//! * Rationals: `p/q`, a decimal such as `0.9`, or an integer.

use std::io::Write;

use apfree_core::density::IntSeq;
use apfree_core::grid::longest_full_run;
use apfree_core::DyadicGrid;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Sequence { line: usize, message: String },
    #[error("invalid sequence: {0}")]
    Density(#[from] apfree_core::DensityError),
    #[error("invalid grid file: {0}")]
    Grid(String),
    #[error("invalid rational {0:?}")]
    Rational(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFile {
    pub depth: u32,
    pub extent: u32,
    pub count: usize,
    #[serde(default)]
    pub coverage: f64,
    #[serde(default)]
    pub longest_run: usize,
    pub runs: Vec<[usize; 2]>,
}

impl GridFile {
    pub fn from_grid(g: &DyadicGrid) -> Self {
        GridFile {
            depth: g.depth(),
            extent: g.extent(),
            count: g.count(),
            coverage: g.coverage(),
            longest_run: longest_full_run(g).0,
            runs: g.runs().into_iter().map(|r| [r.start, r.end]).collect(),
        }
    }

    /// Rebuilds the grid, checking runs against the header.
    pub fn to_grid(&self, max_depth: u32) -> Result<DyadicGrid, FormatError> {
        if self.depth == 0 || self.depth > max_depth {
            return Err(FormatError::Grid(format!("depth {} outside [1, {max_depth}]", self.depth)));
        }
        if !(1..=2).contains(&self.extent) {
            return Err(FormatError::Grid(format!("extent {} must be 1 or 2", self.extent)));
        }
        let cells = (self.extent as usize) << self.depth;
        let mut prev_end = 0;
        for &[s, e] in &self.runs {
            if s >= e || e > cells || s < prev_end {
                return Err(FormatError::Grid(format!("run [{s}, {e}) is empty, unordered or out of range")));
            }
            prev_end = e;
        }
        let g = DyadicGrid::from_runs(self.depth, self.extent, self.runs.iter().map(|&[s, e]| s..e));
        if g.count() != self.count {
            return Err(FormatError::Grid(format!("runs hold {} cells but count says {}", g.count(), self.count)));
        }
        Ok(g)
    }
}

pub fn read_grid(text: &str, max_depth: u32) -> Result<DyadicGrid, FormatError> {
    let file: GridFile = serde_json::from_str(text)?;
    file.to_grid(max_depth)
}

/// Parses an integer sequence; `horizon` defaults to the largest element.
pub fn parse_int_seq(text: &str, horizon: Option<u64>) -> Result<IntSeq, FormatError> {
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let field = match fields.as_slice() {
            [v] => v,
            [_, v] => v,
            _ => {
                return Err(FormatError::Sequence {
                    line: i + 1,
                    message: format!("expected `value` or `index value`, got {} fields", fields.len()),
                })
            }
        };
        let v: u64 = field.parse().map_err(|_| FormatError::Sequence {
            line: i + 1,
            message: format!("{field:?} is not a nonnegative integer"),
        })?;
        values.push(v);
    }
    Ok(match horizon {
        Some(h) => IntSeq::new(values, h)?,
        None => IntSeq::from_elements(values)?,
    })
}

/// Parses `p/q`, a finite decimal, or an integer.
pub fn parse_ratio(text: &str) -> Result<Ratio<u64>, FormatError> {
    let bad = || FormatError::Rational(text.to_string());
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        let q: u64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(p, q));
    }
    let (whole, frac) = t.split_once('.').unwrap_or((t, ""));
    if (whole.is_empty() && frac.is_empty()) || frac.len() > 18 {
        return Err(bad());
    }
    let digits = |s: &str| s.is_empty() || s.bytes().all(|b| b.is_ascii_digit());
    if !digits(whole) || !digits(frac) {
        return Err(bad());
    }
    let scale = 10u64.pow(frac.len() as u32);
    let w: u64 = if whole.is_empty() { 0 } else { whole.parse().map_err(|_| bad())? };
    let f: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let num = w.checked_mul(scale).and_then(|x| x.checked_add(f)).ok_or_else(bad)?;
    Ok(Ratio::new(num, scale))
}

pub fn ratio_string(r: &Ratio<u64>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Writes serializable rows as CSV with a header line.
pub fn write_csv<T: Serialize>(out: &mut dyn Write, rows: &[T]) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
