use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Writes `rows` as CSV with a header row. Floats use the shortest
/// representation that round-trips.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.flush()?)
}

/// Run manifest written next to every experiment CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: String,
    pub command: String,
    pub master_seed: u64,
    pub threads: usize,
    pub output_dir: String,
    pub wall_time_seconds: f64,
    /// Command parameters after defaults were filled in.
    pub params: serde_json::Value,
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, manifest).map_err(|e| Error::Io(e.to_string()))?;
    w.write_all(b"\n")?;
    Ok(w.flush()?)
}
