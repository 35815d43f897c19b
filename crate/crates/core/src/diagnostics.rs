//! Scalar and profile diagnostics computed from snapshots.
//!
//! Nothing here feeds back into the dynamics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eulerian::{advect_window, EulerianFields};
use crate::state::{constraint_residual, trapezoid, LagrangianState};

/// `∫ (u^2 + u_x^2) dx`, evaluated in label coordinates as `∫ (z^2 + w^2) y ds`.
pub fn energy(state: &LagrangianState) -> f64 {
    let density: Vec<f64> =
        state.z().values().iter().zip(state.w().values()).zip(state.y().values()).map(|((z, w), y)| (z * z + w * w) * y).collect();
    trapezoid(&density, state.spacing())
}

/// Capped exponential weight: 1 for `x <= 0`, `e^{θx}` on `(0, m]`, `e^{θm}` beyond.
pub fn decay_weight(theta: f64, m: u32, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        (theta * x.min(m as f64)).exp()
    }
}

/// `sup_{x >= 0} φ_m(x) (|u| + |u_x|)` over the output grid.
pub fn decay_norm(fields: &EulerianFields, theta: f64, m: u32) -> f64 {
    fields
        .x_grid
        .nodes()
        .zip(fields.u.iter().zip(&fields.ux))
        .filter(|(x, _)| *x >= 0.0)
        .fold(0.0, |acc, (x, (u, ux))| acc.max(decay_weight(theta, m, x) * (u.abs() + ux.abs())))
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, target_step: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut n = ((b - a) / target_step).ceil() as usize;
    n += n % 2;
    let n = n.max(2);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let c = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += c * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// `φ_m(x) ∫ e^{-|x-y|} / φ_m(y) dy` by composite Simpson on the pieces where
/// the integrand is smooth; the tails beyond 60 units are below 1e-26.
pub fn weight_kernel_integral(theta: f64, m: u32, x: f64) -> f64 {
    let f = |y: f64| (-(x - y).abs()).exp() / decay_weight(theta, m, y);
    let mut breaks = [x, 0.0, m as f64];
    breaks.sort_by(f64::total_cmp);
    let mut pts = vec![breaks[0] - 60.0];
    pts.extend(breaks.iter().copied());
    pts.push(breaks[2] + 60.0);
    let integral: f64 = pts.windows(2).map(|p| simpson(f, p[0], p[1], 1e-2)).sum();
    decay_weight(theta, m, x) * integral
}

/// Largest weighted kernel integral over `sample_xs`; bounded by `4 / (1 - θ)`.
pub fn weight_kernel_bound_check(theta: f64, m: u32, sample_xs: &[f64]) -> f64 {
    sample_xs.iter().map(|&x| weight_kernel_integral(theta, m, x)).fold(0.0, f64::max)
}

fn window_indices(fields: &EulerianFields, window: (f64, f64)) -> Result<(usize, usize)> {
    let g = &fields.x_grid;
    if g.count == 0 {
        return Err(Error::OutOfRange { query: window.0, lo: f64::NAN, hi: f64::NAN });
    }
    let (lo, hi) = (g.node(0), g.node(g.count - 1));
    for q in [window.0, window.1] {
        if !(q >= lo && q <= hi) {
            return Err(Error::OutOfRange { query: q, lo, hi });
        }
    }
    let first = ((window.0 - g.origin) / g.spacing).ceil().max(0.0) as usize;
    let last = (((window.1 - g.origin) / g.spacing).floor() as usize).min(g.count - 1);
    Ok((first, last))
}

/// Discrete `H^2` (order 2) or `H^3` (order 3) seminorm
/// `sqrt(h Σ (Δ^k u / h^k)^2)` over the nodes inside `window`, using only
/// stencils that fit in the window.
pub fn regularity_probe(fields: &EulerianFields, window: (f64, f64), order: u8) -> Result<f64> {
    let (first, last) = window_indices(fields, window)?;
    let h = fields.x_grid.spacing;
    let u = &fields.u;
    let stencil: &[f64] = match order {
        2 => &[1.0, -2.0, 1.0],
        3 => &[-1.0, 3.0, -3.0, 1.0],
        _ => return Err(Error::InvalidConfig(format!("probe order must be 2 or 3, got {order}"))),
    };
    let width = stencil.len();
    if last < first || last - first + 1 < width {
        return Ok(0.0);
    }
    let scale = h.powi(order as i32);
    let sum: f64 = (first..=last + 1 - width)
        .map(|j| {
            let d: f64 = stencil.iter().enumerate().map(|(k, c)| c * u[j + k]).sum();
            (d / scale).powi(2)
        })
        .sum();
    Ok((h * sum).sqrt())
}

/// Hölder quotient `max |Δu_x| / |Δx|^θ` over node pairs in `window`.
pub fn holder_probe(fields: &EulerianFields, window: (f64, f64), theta: f64) -> Result<f64> {
    let (first, last) = window_indices(fields, window)?;
    let g = &fields.x_grid;
    let mut best = 0.0f64;
    for j in first..=last {
        for k in j + 1..=last {
            let dx = (k - j) as f64 * g.spacing;
            best = best.max((fields.ux[k] - fields.ux[j]).abs() / dx.powf(theta));
        }
    }
    Ok(best)
}

/// Absolute discrete `L^2` and `H^1` distances to `c e^{-|x - ct|}`.
pub fn peakon_error(fields: &EulerianFields, c: f64, t: f64) -> (f64, f64) {
    let crest = c * t;
    let mut eu = Vec::with_capacity(fields.u.len());
    let mut eux = Vec::with_capacity(fields.u.len());
    for (x, (u, ux)) in fields.x_grid.nodes().zip(fields.u.iter().zip(&fields.ux)) {
        let r = x - crest;
        let exact = c * (-r.abs()).exp();
        let exact_x = if r == 0.0 { 0.0 } else { -r.signum() * exact };
        eu.push((u - exact).powi(2));
        eux.push((ux - exact_x).powi(2));
    }
    let h = fields.x_grid.spacing;
    let l2sq = trapezoid(&eu, h);
    (l2sq.sqrt(), (l2sq + trapezoid(&eux, h)).sqrt())
}

/// A label interval `[start, end]` tracked along characteristics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub id: String,
    pub start: f64,
    pub end: f64,
    pub order: u8,
}

/// What to compute at each snapshot.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SnapshotPlan {
    /// Simulation-time spacing of snapshots; `None` keeps only the first and last.
    pub cadence: Option<f64>,
    /// `(θ, m)` pairs for weighted decay norms; the first one fills `decay_norm`.
    pub decay: Vec<(f64, u32)>,
    /// Speed of the exact peakon to compare against.
    pub peakon_speed: Option<f64>,
    pub probes: Vec<ProbeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayValue {
    pub theta: f64,
    pub m: u32,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeValue {
    pub id: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub energy: f64,
    pub min_jacobian: f64,
    pub max_slope: f64,
    pub constraint_residual: f64,
    pub decay_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub decay_norms: Vec<DecayValue>,
    pub peakon_l2_error: Option<f64>,
    pub regularity_probes: Option<Vec<ProbeValue>>,
}

/// All scalar diagnostics for one state and its Eulerian reconstruction.
/// Probes whose advected window leaves the reconstructed range are omitted.
pub fn diagnose(state: &LagrangianState, fields: Option<&EulerianFields>, plan: &SnapshotPlan) -> DiagnosticsRecord {
    let decay_norms: Vec<DecayValue> = match fields {
        Some(f) => plan.decay.iter().map(|&(theta, m)| DecayValue { theta, m, value: decay_norm(f, theta, m) }).collect(),
        None => Vec::new(),
    };
    let peakon_l2_error = match (fields, plan.peakon_speed) {
        (Some(f), Some(c)) => Some(peakon_error(f, c, state.time()).0),
        _ => None,
    };
    let regularity_probes = match fields {
        Some(f) if !plan.probes.is_empty() => Some(
            plan.probes
                .iter()
                .filter_map(|p| {
                    let window = advect_window(state, (p.start, p.end)).ok()?;
                    let value = regularity_probe(f, window, p.order).ok()?;
                    Some(ProbeValue { id: p.id.clone(), value })
                })
                .collect(),
        ),
        _ => None,
    };
    DiagnosticsRecord {
        time: state.time(),
        energy: energy(state),
        min_jacobian: state.y().min(),
        max_slope: state.w().sup_norm(),
        constraint_residual: constraint_residual(state),
        decay_norm: decay_norms.first().map(|d| d.value),
        decay_norms,
        peakon_l2_error,
        regularity_probes,
    }
}
