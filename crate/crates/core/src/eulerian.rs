//! The deformation `x(s) = s + xi(s)`, its monotone inverse and Eulerian
//! reconstruction `u(x) = z(s(x))`, `u_x(x) = w(s(x))`.
//!
//! Both the forward map and its inverse are piecewise linear between nodes,
//! so they are exact inverses of each other and stay monotone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::DeformedGrid;
use crate::state::LagrangianState;

/// Uniform output grid `origin + j * spacing`, `j < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub origin: f64,
    pub spacing: f64,
    pub count: usize,
}

impl UniformGrid {
    pub fn node(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.spacing
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |j| self.node(j))
    }

    /// The label grid of `state`, restricted to the nodes inside its deformed range.
    pub fn label_grid_within(state: &LagrangianState, range: (f64, f64)) -> UniformGrid {
        let (h, s0, n) = (state.spacing(), state.origin(), state.len());
        let first = (0..n).find(|&i| s0 + i as f64 * h >= range.0).unwrap_or(n);
        let last = (0..n).rev().find(|&i| s0 + i as f64 * h <= range.1);
        let count = match last {
            Some(l) if l >= first => l - first + 1,
            _ => 0,
        };
        UniformGrid { origin: s0 + first as f64 * h, spacing: h, count }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerianFields {
    pub x_grid: UniformGrid,
    pub u: Vec<f64>,
    pub ux: Vec<f64>,
    pub time: f64,
}

pub fn deformation(state: &LagrangianState) -> Result<DeformedGrid> {
    DeformedGrid::from_state(state)
}

/// Cell index `i` and fraction `t` with `x = (1 - t) x_i + t x_{i+1}`.
fn locate(grid: &DeformedGrid, x_query: f64) -> Result<(usize, f64)> {
    let x = grid.x_nodes();
    let n = x.len();
    let (lo, hi) = (x[0], x[n - 1]);
    if !(x_query >= lo && x_query <= hi) {
        return Err(Error::OutOfRange { query: x_query, lo, hi });
    }
    if n == 1 {
        return Ok((0, 0.0));
    }
    let i = x.partition_point(|&v| v <= x_query).clamp(1, n - 1) - 1;
    let t = (x_query - x[i]) / (x[i + 1] - x[i]);
    Ok((i, t.clamp(0.0, 1.0)))
}

/// Piecewise-linear forward map `s -> x(s)`.
pub fn forward_map(grid: &DeformedGrid, s: f64) -> Result<f64> {
    let n = grid.len();
    let (lo, hi) = (grid.s_node(0), grid.s_node(n - 1));
    if !(s >= lo && s <= hi) {
        return Err(Error::OutOfRange { query: s, lo, hi });
    }
    let i = (((s - lo) / grid.spacing()).floor() as usize).min(n.saturating_sub(2));
    let t = (s - grid.s_node(i)) / grid.spacing();
    let x = grid.x_nodes();
    if n == 1 {
        return Ok(x[0]);
    }
    Ok((x[i] + t * (x[i + 1] - x[i])).clamp(x[i], x[i + 1]))
}

/// Monotone inverse `x -> s(x)` of the piecewise-linear deformation.
pub fn inverse_map(grid: &DeformedGrid, x_query: f64) -> Result<f64> {
    let (i, t) = locate(grid, x_query)?;
    if t == 1.0 {
        return Ok(grid.s_node(i + 1));
    }
    Ok(grid.s_node(i) + t * grid.spacing())
}

pub fn reconstruct(state: &LagrangianState, x_grid: &UniformGrid) -> Result<EulerianFields> {
    let grid = deformation(state)?;
    let z = state.z().values();
    let w = state.w().values();
    let n = z.len();
    let mut u = Vec::with_capacity(x_grid.count);
    let mut ux = Vec::with_capacity(x_grid.count);
    for xq in x_grid.nodes() {
        let (i, t) = locate(&grid, xq)?;
        let j = (i + 1).min(n - 1);
        u.push(z[i] + t * (z[j] - z[i]));
        ux.push(w[i] + t * (w[j] - w[i]));
    }
    Ok(EulerianFields { x_grid: *x_grid, u, ux, time: state.time() })
}

/// Reconstruction on the label grid nodes that fall inside the deformed range.
pub fn reconstruct_default(state: &LagrangianState) -> Result<EulerianFields> {
    let grid = deformation(state)?;
    let x = grid.x_nodes();
    let out = UniformGrid::label_grid_within(state, (x[0], x[x.len() - 1]));
    reconstruct(state, &out)
}

/// Advects the label interval `[a, b]` to `[x(a, t), x(b, t)]`.
pub fn advect_window(state: &LagrangianState, window: (f64, f64)) -> Result<(f64, f64)> {
    let grid = deformation(state)?;
    Ok((forward_map(&grid, window.0)?, forward_map(&grid, window.1)?))
}
