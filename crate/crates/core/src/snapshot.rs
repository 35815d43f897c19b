//! Records of the snapshot stream.
//!
//! A stream is NDJSON: one [`Manifest`] line followed by one
//! [`SnapshotRecord`] line per emitted time. Both carry `record` and
//! `schema_version` tags so readers can validate the stream line by line.

use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagnosticsRecord;
use crate::eulerian::{EulerianFields, UniformGrid};
use crate::state::GridSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub half_width: f64,
    pub nodes: usize,
    pub origin: f64,
    pub spacing: f64,
}

impl From<GridSpec> for GridMetadata {
    fn from(g: GridSpec) -> Self {
        Self { half_width: g.half_width, nodes: g.nodes, origin: g.origin(), spacing: g.spacing() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub record: String,
    pub schema_version: u32,
    pub name: String,
    pub grid: GridMetadata,
    /// Echo of the full run configuration.
    pub config: serde_json::Value,
}

impl Manifest {
    pub fn new(name: impl Into<String>, grid: GridSpec, config: serde_json::Value) -> Self {
        Self { record: "manifest".into(), schema_version: SCHEMA_VERSION, name: name.into(), grid: grid.into(), config }
    }
}

/// Eulerian fields and diagnostics at one time. `grid` is `None` (and the
/// field arrays empty) when the state could not be reconstructed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub record: String,
    pub schema_version: u32,
    pub time: f64,
    pub grid: Option<UniformGrid>,
    pub u: Vec<f64>,
    pub ux: Vec<f64>,
    pub diagnostics: DiagnosticsRecord,
}

impl SnapshotRecord {
    pub fn new(time: f64, fields: Option<EulerianFields>, diagnostics: DiagnosticsRecord) -> Self {
        let (grid, u, ux) = match fields {
            Some(f) => (Some(f.x_grid), f.u, f.ux),
            None => (None, Vec::new(), Vec::new()),
        };
        Self { record: "snapshot".into(), schema_version: SCHEMA_VERSION, time, grid, u, ux, diagnostics }
    }

    pub fn fields(&self) -> Option<EulerianFields> {
        self.grid.map(|g| EulerianFields { x_grid: g, u: self.u.clone(), ux: self.ux.clone(), time: self.time })
    }
}
