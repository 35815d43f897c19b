//! Time advancement of the Lagrangian system.
//!
//! [`step_rk4`] is the production stepper. [`step_picard`] iterates the
//! integral form `v(t + dt) = v(t) + ∫ F(v)` with the trapezoidal rule in time
//! and is used to cross-check RK4.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{diagnose, SnapshotPlan};
use crate::dynamics::{vector_field, StateRate};
use crate::error::{Error, Result};
use crate::eulerian::reconstruct_default;
use crate::snapshot::SnapshotRecord;
use crate::state::{check_admissible, GridFunction, LagrangianState, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegratorMode {
    Rk4,
    Picard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub mode: IntegratorMode,
    /// Step size; negative values integrate backwards in time.
    pub dt: f64,
    /// Length of the time interval covered, `> 0`.
    pub horizon: f64,
    pub picard_sweeps: usize,
    /// Halt with `Breakdown` once `min y <= breakdown_rho`.
    pub breakdown_rho: f64,
    /// Halt with `Diverged` once `max |w|` exceeds this.
    pub max_slope_guard: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { mode: IntegratorMode::Rk4, dt: 1e-3, horizon: 1.0, picard_sweeps: 4, breakdown_rho: 1e-2, max_slope_guard: 1e6 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.dt != 0.0 && self.dt.is_finite()) {
            problems.push(format!("dt must be finite and nonzero, got {}", self.dt));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            problems.push(format!("horizon must be positive, got {}", self.horizon));
        } else if self.dt.abs() > self.horizon {
            problems.push(format!("|dt| = {} exceeds the horizon {}", self.dt.abs(), self.horizon));
        }
        if self.picard_sweeps < 1 {
            problems.push("picard_sweeps must be at least 1".to_string());
        }
        if !(self.breakdown_rho > 0.0 && self.breakdown_rho < 1.0) {
            problems.push(format!("breakdown_rho must lie in (0, 1), got {}", self.breakdown_rho));
        }
        if !(self.max_slope_guard > 0.0) {
            problems.push(format!("max_slope_guard must be positive, got {}", self.max_slope_guard));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems.join("; ")))
        }
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt.abs()).round() as usize
    }
}

fn axpy_state(base: &LagrangianState, rates: &[(&StateRate, f64)], time: f64) -> LagrangianState {
    let parts = base.parts();
    let mut out: Vec<GridFunction> = parts.iter().map(|p| (*p).clone()).collect();
    for (rate, coeff) in rates {
        for (dst, src) in out.iter_mut().zip(rate.parts()) {
            for (d, s) in dst.values_mut().iter_mut().zip(src.values()) {
                *d += coeff * s;
            }
        }
    }
    let [xi, z, w, y]: [GridFunction; 4] = out.try_into().expect("four components");
    LagrangianState::from_parts_unchecked(xi, z, w, y, time)
}

fn finite_or_err(state: LagrangianState) -> Result<LagrangianState> {
    if !state.is_finite() {
        return Err(Error::InvalidGrid("non-finite values after step".into()));
    }
    Ok(state)
}

/// Classical four-stage Runge-Kutta step. Each stage must stay admissible.
pub fn step_rk4(state: &LagrangianState, params: &ModelParams, dt: f64) -> Result<LagrangianState> {
    let t = state.time();
    let k1 = vector_field(state, params)?;
    let s2 = axpy_state(state, &[(&k1, 0.5 * dt)], t + 0.5 * dt);
    let k2 = vector_field(&s2, params)?;
    let s3 = axpy_state(state, &[(&k2, 0.5 * dt)], t + 0.5 * dt);
    let k3 = vector_field(&s3, params)?;
    let s4 = axpy_state(state, &[(&k3, dt)], t + dt);
    let k4 = vector_field(&s4, params)?;
    let next = axpy_state(state, &[(&k1, dt / 6.0), (&k2, dt / 3.0), (&k3, dt / 3.0), (&k4, dt / 6.0)], t + dt);
    finite_or_err(next)
}

/// Result of a Picard step: the last iterate and the surrogate-norm
/// distances between successive iterates.
#[derive(Debug, Clone)]
pub struct PicardStep {
    pub state: LagrangianState,
    pub iterate_gaps: Vec<f64>,
}

/// Below this the iterates agree to roundoff and contraction is not judged.
const PICARD_GAP_FLOOR: f64 = 1e-13;

/// `sweeps` iterations of `v <- v_n + dt/2 (F(v_n) + F(v))` starting from `v_n`.
///
/// Requires `|dt| max|w| < 1/2`; fails with `NoContraction` otherwise or when
/// the gap between iterates stops shrinking.
pub fn step_picard(state: &LagrangianState, params: &ModelParams, dt: f64, sweeps: usize) -> Result<PicardStep> {
    let slope = state.w().sup_norm();
    if dt.abs() * slope >= 0.5 {
        return Err(Error::NoContraction { sweep: 0, ratio: dt.abs() * slope });
    }
    let t1 = state.time() + dt;
    let f0 = vector_field(state, params)?;
    let mut current = state.clone();
    let mut gaps = Vec::with_capacity(sweeps);
    for sweep in 0..sweeps.max(1) {
        let fk = vector_field(&current, params)?;
        let next = finite_or_err(axpy_state(state, &[(&f0, 0.5 * dt), (&fk, 0.5 * dt)], t1))?;
        let gap = next.distance(&current)?;
        if let Some(&prev) = gaps.last() {
            if prev > PICARD_GAP_FLOOR && gap >= prev {
                return Err(Error::NoContraction { sweep, ratio: gap / prev });
            }
        }
        gaps.push(gap);
        current = next;
    }
    Ok(PicardStep { state: current, iterate_gaps: gaps })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "time", rename_all = "lowercase")]
pub enum RunStatus {
    Completed,
    /// The Jacobian fell to the breakdown threshold (wave breaking) at this time.
    Breakdown(f64),
    /// Slopes exceeded the guard, the step-size guard failed, or values went non-finite.
    Diverged(f64),
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub final_state: LagrangianState,
    pub status: RunStatus,
    pub diagnostics_trace: Vec<SnapshotRecord>,
    /// Gaps between successive Picard iterates, one entry per step (Picard mode only).
    pub picard_gaps: Vec<Vec<f64>>,
}

fn snapshot(state: &LagrangianState, plan: &SnapshotPlan) -> SnapshotRecord {
    let fields = reconstruct_default(state).ok();
    let diagnostics = diagnose(state, fields.as_ref(), plan);
    SnapshotRecord::new(state.time(), fields, diagnostics)
}

/// Advances `state0` over `config.horizon`, emitting snapshots into `sink`
/// and collecting them in the returned trace.
///
/// Breakdown and divergence are reported through [`RunStatus`]; only an
/// invalid configuration or inadmissible initial state is an error.
pub fn run(
    state0: &LagrangianState,
    params: &ModelParams,
    config: &IntegratorConfig,
    plan: &SnapshotPlan,
    sink: &mut dyn FnMut(&SnapshotRecord),
) -> Result<RunOutcome> {
    config.validate()?;
    if let Some(c) = plan.cadence {
        if !(c > 0.0) {
            return Err(Error::InvalidConfig(format!("snapshot cadence must be positive, got {c}")));
        }
    }
    if check_admissible(state0, config.breakdown_rho) <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "initial state is not admissible: min y = {} <= {}",
            state0.y().min(),
            config.breakdown_rho
        )));
    }
    crate::kernel::DeformedGrid::from_state(state0)?;

    let mut trace = Vec::new();
    let mut emit = |state: &LagrangianState, trace: &mut Vec<SnapshotRecord>| {
        let rec = snapshot(state, plan);
        sink(&rec);
        trace.push(rec);
    };

    let dt = config.dt;
    let t0 = state0.time();
    let steps = config.steps();
    let mut state = state0.clone();
    let mut picard_gaps = Vec::new();
    let mut next_snapshot = 1usize;
    emit(&state, &mut trace);

    let mut status = RunStatus::Completed;
    for n in 1..=steps {
        if dt.abs() * state.w().sup_norm().max(1.0) > 0.5 {
            status = RunStatus::Diverged(state.time());
            break;
        }
        let stepped = match config.mode {
            IntegratorMode::Rk4 => step_rk4(&state, params, dt),
            IntegratorMode::Picard => step_picard(&state, params, dt, config.picard_sweeps).map(|p| {
                picard_gaps.push(p.iterate_gaps);
                p.state
            }),
        };
        let mut next = match stepped {
            Ok(s) => s,
            Err(Error::NonMonotoneDeformation { .. }) | Err(Error::NonAdmissible { .. }) => {
                status = RunStatus::Breakdown(state.time());
                break;
            }
            Err(_) => {
                status = RunStatus::Diverged(state.time());
                break;
            }
        };
        // keep the clock on the exact grid of step times
        next = next.with_time(t0 + n as f64 * dt);
        if check_admissible(&next, config.breakdown_rho) <= 0.0 {
            if crate::kernel::DeformedGrid::from_state(&next).is_ok() {
                state = next;
            }
            status = RunStatus::Breakdown(state.time());
            break;
        }
        if next.w().sup_norm() > config.max_slope_guard {
            state = next;
            status = RunStatus::Diverged(state.time());
            break;
        }
        state = next;
        if let Some(c) = plan.cadence {
            let elapsed = (state.time() - t0).abs();
            if elapsed + 1e-9 * c >= next_snapshot as f64 * c {
                if n < steps {
                    emit(&state, &mut trace);
                }
                while next_snapshot as f64 * c <= elapsed + 1e-9 * c {
                    next_snapshot += 1;
                }
            }
        }
    }
    emit(&state, &mut trace);
    Ok(RunOutcome { final_state: state, status, diagnostics_trace: trace, picard_gaps })
}
