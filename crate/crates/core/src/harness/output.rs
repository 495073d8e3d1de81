use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

/// Rows of text cells under a header.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let wrap = |e: csv::Error| Error::Data(format!("csv encoding: {e}"));
        w.write_record(&self.header).map_err(wrap)?;
        for r in &self.rows {
            w.write_record(r).map_err(wrap)?;
        }
        w.into_inner().map_err(|e| Error::Data(format!("csv encoding: {e}")))
    }

    /// Column index by name.
    pub fn col(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Shortest round-trip decimal form; identical values print identically.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// SHA-256 over `"blob <len>\0" + bytes`, hex encoded.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub rows: usize,
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    /// Hash of the canonical config JSON followed by any input files.
    pub input_hash: String,
    pub outputs: Vec<OutputEntry>,
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    }
    fs::write(path, bytes).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Writes each table as `<name>.csv` and each extra file under the output
/// directory, then a `manifest.json`; returns the written paths.
pub fn write_outputs(
    cfg: &ExperimentConfig,
    tables: &[(String, Table)],
    files: &[(String, Vec<u8>)],
    inputs: &[PathBuf],
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut outputs = Vec::new();
    for (name, t) in tables {
        let bytes = t.to_csv()?;
        let path = cfg.out_dir.join(format!("{name}.csv"));
        write_bytes(&path, &bytes)?;
        outputs.push(OutputEntry { file: format!("{name}.csv"), rows: t.rows.len(), hash: content_hash(&bytes) });
        written.push(path);
    }
    for (name, bytes) in files {
        let path = cfg.out_dir.join(name);
        write_bytes(&path, bytes)?;
        outputs.push(OutputEntry { file: name.clone(), rows: 0, hash: content_hash(bytes) });
        written.push(path);
    }
    let mut input_bytes = serde_json::to_vec(cfg).map_err(|e| Error::Config(e.to_string()))?;
    for p in inputs {
        input_bytes.extend(fs::read(p).map_err(|source| Error::Io { path: p.clone(), source })?);
    }
    let manifest = Manifest {
        experiment: cfg.experiment.name().to_string(),
        seed: cfg.seed,
        config: cfg.clone(),
        input_hash: content_hash(&input_bytes),
        outputs,
    };
    let path = cfg.out_dir.join("manifest.json");
    let text = serde_json::to_vec_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    write_bytes(&path, &text)?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blob_hash_matches_git_layout() {
        // sha256 of "blob 0\0"
        assert_eq!(content_hash(b""), "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813");
    }

    #[test]
    fn csv_encoding() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![num(0.1), num(-2.0)]);
        assert_eq!(String::from_utf8(t.to_csv().unwrap()).unwrap(), "a,b\n0.1,-2\n");
    }
}
