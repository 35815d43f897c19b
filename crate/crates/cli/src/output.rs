//! Snapshot stream (NDJSON) and diagnostics table (CSV) writers.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use peakflow::diagnostics::DiagnosticsRecord;
use peakflow::snapshot::{Manifest, SnapshotRecord};
use serde::Serialize;

use crate::error::CliError;

pub const SNAPSHOTS_FILE: &str = "snapshots.ndjson";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn create_file(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

pub fn csv_io(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::io(path, e.into())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut out = create_file(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::io(path, e.into()))?;
    writeln!(out).and_then(|_| out.flush()).map_err(|e| CliError::io(path, e))
}

/// Writes the manifest line, then one line per snapshot as they arrive.
pub struct SnapshotWriter {
    path: PathBuf,
    out: BufWriter<File>,
    failure: Option<std::io::Error>,
}

impl SnapshotWriter {
    pub fn create(dir: &Path, manifest: &Manifest) -> Result<Self, CliError> {
        let path = dir.join(SNAPSHOTS_FILE);
        let out = create_file(&path)?;
        let mut w = Self { path, out, failure: None };
        w.line(manifest);
        w.check()?;
        Ok(w)
    }

    fn line(&mut self, value: &impl Serialize) {
        if self.failure.is_some() {
            return;
        }
        let res = serde_json::to_writer(&mut self.out, value).map_err(std::io::Error::from).and_then(|_| self.out.write_all(b"\n"));
        if let Err(e) = res {
            self.failure = Some(e);
        }
    }

    pub fn push(&mut self, record: &SnapshotRecord) {
        self.line(record);
    }

    fn check(&mut self) -> Result<(), CliError> {
        match self.failure.take() {
            Some(e) => Err(CliError::io(&self.path, e)),
            None => Ok(()),
        }
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.check()?;
        self.out.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per snapshot. Decay and probe columns follow the scenario's
/// order; cells are empty where a value was not available.
pub fn write_diagnostics(dir: &Path, records: &[DiagnosticsRecord], decay: &[(f64, u32)], probes: &[String]) -> Result<(), CliError> {
    let path = dir.join(DIAGNOSTICS_FILE);
    let mut w = csv::Writer::from_writer(create_file(&path)?);
    let mut header: Vec<String> = ["time", "energy", "min_jacobian", "max_slope", "constraint_residual", "decay_norm", "peakon_l2_error"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(decay.iter().map(|(theta, m)| format!("decay_theta{theta}_m{m}")));
    header.extend(probes.iter().map(|id| format!("probe_{id}")));
    let io = csv_io(&path);
    w.write_record(&header).map_err(&io)?;
    for r in records {
        let mut row = vec![
            r.time.to_string(),
            r.energy.to_string(),
            r.min_jacobian.to_string(),
            r.max_slope.to_string(),
            r.constraint_residual.to_string(),
            cell(r.decay_norm),
            cell(r.peakon_l2_error),
        ];
        row.extend(decay.iter().map(|&(theta, m)| cell(r.decay_norms.iter().find(|d| d.theta == theta && d.m == m).map(|d| d.value))));
        row.extend(
            probes.iter().map(|id| cell(r.regularity_probes.as_ref().and_then(|ps| ps.iter().find(|p| &p.id == id)).map(|p| p.value))),
        );
        w.write_record(&row).map_err(&io)?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))
}
