//! Lagrangian solver for the Camassa-Holm and Degasperis-Procesi equations.
//!
//! The PDE is rewritten along characteristics as an ODE system for the
//! displacement, velocity, velocity gradient and Jacobian, whose nonlocal
//! terms are convolutions with `e^{-|x|}/2` evaluated by linear-time scans.
//!
//! ```no_run
//! use peakflow::prelude::*;
//!
//! let grid = GridSpec::new(40.0, 8192).unwrap();
//! let state = LagrangianState::from_initial(&InitialData::Peakon { c: 1.0 }, grid).unwrap();
//! let config = IntegratorConfig { dt: 1e-3, horizon: 1.0, ..Default::default() };
//! let plan = SnapshotPlan { cadence: Some(0.1), peakon_speed: Some(1.0), ..Default::default() };
//! let outcome = run(&state, &ModelParams::camassa_holm(0.0), &config, &plan, &mut |_| {}).unwrap();
//! assert_eq!(outcome.status, RunStatus::Completed);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod eulerian;
pub mod integrator;
pub mod kernel;
pub mod profile;
pub mod snapshot;
pub mod state;
pub mod studies;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::diagnostics::{DiagnosticsRecord, ProbeSpec, SnapshotPlan};
    pub use crate::error::{Error, Result};
    pub use crate::eulerian::{reconstruct, reconstruct_default, EulerianFields, UniformGrid};
    pub use crate::integrator::{run, IntegratorConfig, IntegratorMode, RunOutcome, RunStatus};
    pub use crate::profile::{InitialData, InitialProfile};
    pub use crate::snapshot::{Manifest, SnapshotRecord, SCHEMA_VERSION};
    pub use crate::state::{GridFunction, GridSpec, LagrangianState, ModelParams};
}
