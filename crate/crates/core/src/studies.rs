//! Multi-run studies: self-convergence ladders and continuous dependence on data.
//!
//! Runs inside one study are independent and execute on the rayon pool.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::SnapshotPlan;
use crate::error::{Error, Result};
use crate::eulerian::{deformation, reconstruct, EulerianFields, UniformGrid};
use crate::integrator::{run, IntegratorConfig, RunOutcome, RunStatus};
use crate::profile::InitialData;
use crate::snapshot::SnapshotRecord;
use crate::state::{trapezoid, GridSpec, LagrangianState, ModelParams};

/// Everything needed to start one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub initial: InitialData,
    pub params: ModelParams,
    pub grid: GridSpec,
    pub integrator: IntegratorConfig,
    pub plan: SnapshotPlan,
}

impl Case {
    pub fn initial_state(&self) -> Result<LagrangianState> {
        LagrangianState::from_initial(&self.initial, self.grid)
    }

    pub fn run(&self) -> Result<RunOutcome> {
        run(&self.initial_state()?, &self.params, &self.integrator, &self.plan, &mut |_| {})
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub nodes: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RungResult {
    pub nodes: usize,
    pub dt: f64,
    pub status: Option<RunStatus>,
    pub error: Option<String>,
    /// Distances to the finest rung's final fields on the common grid.
    pub l2_vs_finest: Option<f64>,
    pub h1_vs_finest: Option<f64>,
    /// Distance to the next finer rung.
    pub l2_vs_next: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rungs: Vec<RungResult>,
    /// `log(e_k / e_{k+1}) / log r_k` from errors against the finest rung,
    /// one entry per rung pair `(k, k + 1)` short of the finest; `None` where
    /// a rung failed.
    pub orders_vs_finest: Vec<Option<f64>>,
    /// Three-grid orders `log(d_k / d_{k+1}) / log r_k` from successive differences.
    pub self_convergence_orders: Vec<Option<f64>>,
}

fn refinement_ratio(a: &Rung, b: &Rung) -> f64 {
    (b.nodes as f64 / a.nodes as f64).max(a.dt.abs() / b.dt.abs())
}

/// Discrete `L^2` and `H^1` distances between two reconstructions on the same grid.
pub fn field_distance(a: &EulerianFields, b: &EulerianFields) -> (f64, f64) {
    let h = a.x_grid.spacing;
    let du: Vec<f64> = a.u.iter().zip(&b.u).map(|(p, q)| (p - q).powi(2)).collect();
    let dux: Vec<f64> = a.ux.iter().zip(&b.ux).map(|(p, q)| (p - q).powi(2)).collect();
    let l2sq = trapezoid(&du, h);
    (l2sq.sqrt(), (l2sq + trapezoid(&dux, h)).sqrt())
}

/// Label grid of `state` restricted to `range`.
fn common_grid(state: &LagrangianState, range: (f64, f64)) -> UniformGrid {
    UniformGrid::label_grid_within(state, range)
}

/// Runs every rung of `ladder` (coarse to fine) and compares final Eulerian
/// fields on the coarsest rung's grid. Failed rungs are reported, not fatal.
pub fn convergence_study(case: &Case, ladder: &[Rung]) -> Result<ConvergenceReport> {
    if ladder.is_empty() {
        return Err(Error::InvalidConfig("convergence ladder is empty".into()));
    }
    if ladder.windows(2).any(|p| refinement_ratio(&p[0], &p[1]) <= 1.0) {
        return Err(Error::InvalidConfig("ladder must be sorted from coarse to fine".into()));
    }
    let outcomes: Vec<Result<RunOutcome>> = ladder
        .par_iter()
        .map(|r| {
            let mut c = case.clone();
            c.grid = GridSpec::new(case.grid.half_width, r.nodes)?;
            c.integrator.dt = r.dt;
            c.plan = SnapshotPlan { cadence: None, ..case.plan.clone() };
            c.run()
        })
        .collect();

    let finals: Vec<Option<&LagrangianState>> = outcomes.iter().map(|o| o.as_ref().ok().map(|o| &o.final_state)).collect();
    let mut range = (f64::NEG_INFINITY, f64::INFINITY);
    for st in finals.iter().flatten() {
        let g = deformation(st)?;
        let x = g.x_nodes();
        range = (range.0.max(x[0]), range.1.min(x[x.len() - 1]));
    }
    let coarse = ladder.iter().zip(&finals).find_map(|(_, f)| *f).ok_or_else(|| Error::InvalidConfig("every rung failed".into()))?;
    let grid = common_grid(coarse, range);
    let fields: Vec<Option<EulerianFields>> = finals.iter().map(|f| f.and_then(|s| reconstruct(s, &grid).ok())).collect();

    let finest = fields.last().and_then(|f| f.as_ref());
    let mut rungs = Vec::with_capacity(ladder.len());
    for (k, r) in ladder.iter().enumerate() {
        let (status, error) = match &outcomes[k] {
            Ok(o) => (Some(o.status), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let vs_finest = match (&fields[k], finest) {
            (Some(a), Some(b)) if k + 1 < ladder.len() => Some(field_distance(a, b)),
            _ => None,
        };
        let vs_next = match (&fields[k], fields.get(k + 1).and_then(|f| f.as_ref())) {
            (Some(a), Some(b)) => Some(field_distance(a, b).0),
            _ => None,
        };
        rungs.push(RungResult {
            nodes: r.nodes,
            dt: r.dt,
            status,
            error,
            l2_vs_finest: vs_finest.map(|d| d.0),
            h1_vs_finest: vs_finest.map(|d| d.1),
            l2_vs_next: vs_next,
        });
    }

    let order = |a: Option<f64>, b: Option<f64>, r: f64| match (a, b) {
        (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some((a / b).ln() / r.ln()),
        _ => None,
    };
    let mut orders_vs_finest = Vec::new();
    let mut self_convergence_orders = Vec::new();
    for k in 0..ladder.len().saturating_sub(2) {
        let r = refinement_ratio(&ladder[k], &ladder[k + 1]);
        orders_vs_finest.push(order(rungs[k].l2_vs_finest, rungs[k + 1].l2_vs_finest, r));
        self_convergence_orders.push(order(rungs[k].l2_vs_next, rungs[k + 1].l2_vs_next, r));
    }
    Ok(ConvergenceReport { rungs, orders_vs_finest, self_convergence_orders })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceReport {
    pub delta: f64,
    pub base_status: RunStatus,
    pub perturbed_status: RunStatus,
    pub times: Vec<f64>,
    /// `H^1` distance between the two solutions at each snapshot time.
    pub h1_distances: Vec<f64>,
    pub sup_h1_distance: f64,
    pub initial_h1_distance: f64,
    /// Initial distance in the `H^1 ∩ W^{1,∞}` surrogate.
    pub initial_x_distance: f64,
    /// `sup_t |u1 - u2|_{H^1} / |u1(0) - u2(0)|_{H^1}`; `None` when both vanish.
    pub ratio: Option<f64>,
    pub exact_match: bool,
}

/// Overlap of two snapshots that live on sub-ranges of one label grid.
fn aligned_distance(a: &SnapshotRecord, b: &SnapshotRecord) -> Option<f64> {
    let (ga, gb) = (a.grid?, b.grid?);
    let h = ga.spacing;
    let offset = ((gb.origin - ga.origin) / h).round() as isize;
    let mut du = Vec::new();
    let mut dux = Vec::new();
    for j in 0..ga.count as isize {
        let k = j - offset;
        if k >= 0 && (k as usize) < gb.count {
            let (j, k) = (j as usize, k as usize);
            du.push((a.u[j] - b.u[k]).powi(2));
            dux.push((a.ux[j] - b.ux[k]).powi(2));
        }
    }
    Some((trapezoid(&du, h) + trapezoid(&dux, h)).sqrt())
}

/// Runs the case and a copy with amplitude shifted by `delta` and tracks the
/// `H^1` distance between the two at every snapshot.
pub fn dependence_study(case: &Case, delta: f64) -> Result<DependenceReport> {
    if !delta.is_finite() {
        return Err(Error::InvalidConfig(format!("delta must be finite, got {delta}")));
    }
    let perturbed = Case { initial: case.initial.perturbed(delta), ..case.clone() };
    let (base, pert) = rayon::join(|| case.run(), || perturbed.run());
    let (base, pert) = (base?, pert?);

    let mut times = Vec::new();
    let mut h1_distances = Vec::new();
    for (a, b) in base.diagnostics_trace.iter().zip(&pert.diagnostics_trace) {
        if (a.time - b.time).abs() > 1e-9 {
            break;
        }
        if let Some(d) = aligned_distance(a, b) {
            times.push(a.time);
            h1_distances.push(d);
        }
    }

    let s0 = case.initial_state()?;
    let s1 = perturbed.initial_state()?;
    let dz = s0.z().zip_map(s1.z(), |a, b| a - b)?;
    let dw = s0.w().zip_map(s1.w(), |a, b| a - b)?;
    let initial_h1_distance = (dz.l2_norm().powi(2) + dw.l2_norm().powi(2)).sqrt();
    let initial_x_distance = dz.l2_norm() + dw.l2_norm() + dz.sup_norm() + dw.sup_norm();

    let sup_h1_distance = h1_distances.iter().copied().fold(0.0, f64::max);
    let exact_match = sup_h1_distance == 0.0 && initial_h1_distance == 0.0;
    let ratio = if initial_h1_distance > 0.0 { Some(sup_h1_distance / initial_h1_distance) } else { None };
    Ok(DependenceReport {
        delta,
        base_status: base.status,
        perturbed_status: pert.status,
        times,
        h1_distances,
        sup_h1_distance,
        initial_h1_distance,
        initial_x_distance,
        ratio,
        exact_match,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_case(nodes: usize) -> Case {
        Case {
            initial: InitialData::Gaussian { amplitude: 1.0, width: 1.0 },
            params: ModelParams::camassa_holm(0.0),
            grid: GridSpec::new(20.0, nodes).unwrap(),
            integrator: IntegratorConfig { dt: 1e-2, horizon: 0.2, ..Default::default() },
            plan: SnapshotPlan { cadence: Some(0.1), ..Default::default() },
        }
    }

    #[test]
    fn single_rung_has_no_orders() {
        let rep = convergence_study(&gaussian_case(256), &[Rung { nodes: 256, dt: 1e-2 }]).unwrap();
        assert_eq!(rep.rungs.len(), 1);
        assert!(rep.orders_vs_finest.is_empty() && rep.self_convergence_orders.is_empty());
        assert_eq!(rep.rungs[0].status, Some(RunStatus::Completed));
    }

    #[test]
    fn unsorted_ladder_is_rejected() {
        let ladder = [Rung { nodes: 512, dt: 1e-2 }, Rung { nodes: 256, dt: 1e-2 }];
        assert!(convergence_study(&gaussian_case(256), &ladder).is_err());
    }

    #[test]
    fn temporal_self_convergence_is_fourth_order() {
        let case = Case { integrator: IntegratorConfig { dt: 0.1, horizon: 1.0, ..Default::default() }, ..gaussian_case(1024) };
        let ladder = [Rung { nodes: 1024, dt: 0.1 }, Rung { nodes: 1024, dt: 0.05 }, Rung { nodes: 1024, dt: 0.025 }];
        let rep = convergence_study(&case, &ladder).unwrap();
        let p = rep.self_convergence_orders[0].unwrap();
        assert!((p - 4.0).abs() < 0.3, "{rep:?}");
    }

    #[test]
    fn zero_delta_is_exact_match() {
        let rep = dependence_study(&gaussian_case(256), 0.0).unwrap();
        assert!(rep.exact_match);
        assert!(rep.ratio.is_none());
        assert_eq!(rep.times.len(), 3);
    }
}
