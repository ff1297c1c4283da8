//! JSON-lines trajectory files: a schema-versioned header line followed by
//! one record per control cycle.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use pursuit_core::episode::CycleRecord;

use crate::rollouts::HarnessError;

/// First line of every trajectory file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryHeader {
    pub schema_version: u32,
    /// Always `"trajectory"`.
    pub kind: String,
    pub seed: u64,
    pub policy: String,
    pub n_pursuers: usize,
    pub evader_speed: f64,
    pub obstacle_count: usize,
}

/// A full episode log.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub header: TrajectoryHeader,
    pub records: Vec<CycleRecord>,
}

/// Write one record per line after the header line.
pub fn export_trajectory(log: &TrajectoryLog, path: impl AsRef<Path>) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer(&mut out, &log.header).map_err(std::io::Error::other)?;
    out.write_all(b"\n")?;
    for record in &log.records {
        serde_json::to_writer(&mut out, record).map_err(std::io::Error::other)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Inverse of [`export_trajectory`].
pub fn read_trajectory(path: impl AsRef<Path>) -> Result<TrajectoryLog, HarnessError> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| std::io::Error::other("empty trajectory file"))??;
    let header: TrajectoryHeader =
        serde_json::from_str(&header_line).map_err(std::io::Error::other)?;
    if header.kind != "trajectory" || header.schema_version != 1 {
        return Err(HarnessError::InvalidSpec(format!(
            "not a v1 trajectory file: kind={} version={}",
            header.kind, header.schema_version
        )));
    }
    let mut records = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line).map_err(std::io::Error::other)?);
    }
    Ok(TrajectoryLog { header, records })
}
