use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{two_point_values, RandomSource};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A dense `N x d` returns matrix with column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnsData {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ReturnsData {
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[k]).collect()
    }
}

/// Header row of names, then one row of decimal returns per period.
pub fn ingest_returns_csv(path: &Path) -> Result<ReturnsData> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_returns(&text).map_err(|e| match e {
        Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_returns(text: &str) -> Result<ReturnsData> {
    let (names, rows) = parse_table(text)?;
    if rows.is_empty() {
        return Err(Error::Data("file has a header but no data rows".into()));
    }
    Ok(ReturnsData { names, rows })
}

/// Square correlation matrix with a header row of names.
pub fn ingest_correlation_csv(path: &Path) -> Result<(Vec<String>, Matrix)> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let (names, rows) = parse_table(&text).map_err(|e| match e {
        Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    if rows.len() != names.len() {
        return Err(Error::Data(format!("{}: correlation matrix has {} rows for {} columns", path.display(), rows.len(), names.len())));
    }
    let m = Matrix::from_rows(&rows)?;
    if m.max_asymmetry() > 1e-10 {
        return Err(Error::Data(format!("{}: correlation matrix is not symmetric", path.display())));
    }
    Ok((names, m))
}

fn parse_table(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    if text.trim().is_empty() {
        return Err(Error::Data("file is empty".into()));
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Data(format!("malformed header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if names.is_empty() || names.iter().any(String::is_empty) {
        return Err(Error::Data("header must name every column".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        // Line 1 is the header.
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Data(format!("row {line}: {e}")))?;
        if rec.len() != names.len() {
            return Err(Error::Data(format!("row {line}: expected {} cells, found {}", names.len(), rec.len())));
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                let col = j + 1;
                if cell.is_empty() {
                    return Err(Error::Data(format!("row {line}, column {col}: missing value")));
                }
                let v: f64 = cell
                    .parse()
                    .map_err(|_| Error::Data(format!("row {line}, column {col}: not a number: {cell:?}")))?;
                if !v.is_finite() {
                    return Err(Error::Data(format!("row {line}, column {col}: non-finite value {cell:?}")));
                }
                Ok(v)
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((names, rows))
}

/// `θ_i = (1 + i/(d+1))/2` for `i = 1..d`.
pub fn asset_thetas(d: usize) -> Vec<f64> {
    (1..=d).map(|i| 0.5 * (1.0 + i as f64 / (d + 1) as f64)).collect()
}

/// One return vector of independent two-point assets.
pub fn draw_assets<R: Rng + ?Sized>(thetas: &[f64], rng: &mut R) -> Vec<f64> {
    thetas
        .iter()
        .map(|&t| {
            let (up, down) = two_point_values(t);
            if rng.random::<f64>() < t {
                up
            } else {
                down
            }
        })
        .collect()
}

/// `N` draws stored column-wise (one vector per asset).
pub fn sample_asset_columns(thetas: &[f64], n: usize, src: &RandomSource) -> Vec<Vec<f64>> {
    let mut rng = src.rng();
    let mut cols = vec![Vec::with_capacity(n); thetas.len()];
    for _ in 0..n {
        for (c, x) in cols.iter_mut().zip(draw_assets(thetas, &mut rng)) {
            c.push(x);
        }
    }
    cols
}
