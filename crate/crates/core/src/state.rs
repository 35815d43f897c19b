//! Grid discretizations of the Lagrangian unknowns.
//!
//! A [`LagrangianState`] holds the displacement `xi`, the velocity `z`, the
//! velocity gradient `w` and the Jacobian `y = 1 + d(xi)/ds` sampled on one
//! uniform grid in the label variable `s`. The Jacobian is evolved as an
//! unknown of its own (`dy/dt = w y`) so admissibility can be read off
//! directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::InitialProfile;

/// Uniform-grid samples `values[i] = f(origin + i * spacing)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
    origin: f64,
    spacing: f64,
}

impl GridFunction {
    pub fn new(origin: f64, spacing: f64, values: Vec<f64>) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {spacing}")));
        }
        if !origin.is_finite() {
            return Err(Error::InvalidGrid(format!("origin must be finite, got {origin}")));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite sample at node {i}")));
        }
        Ok(Self { values, origin, spacing })
    }

    pub fn zeros(origin: f64, spacing: f64, len: usize) -> Self {
        Self { values: vec![0.0; len], origin, spacing }
    }

    pub fn constant(origin: f64, spacing: f64, len: usize, value: f64) -> Self {
        Self { values: vec![value; len], origin, spacing }
    }

    /// Samples `f` at every node. Non-finite samples are rejected.
    pub fn from_fn(origin: f64, spacing: f64, len: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..len).map(|i| f(origin + i as f64 * spacing)).collect();
        Self::new(origin, spacing, values)
    }

    /// Same grid, new samples. Used internally where finiteness is checked by the caller.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self { values, origin: self.origin, spacing: self.spacing }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn node(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.len() == other.len() && self.origin == other.origin && self.spacing == other.spacing
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        Ok(self.with_values(self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect()))
    }

    pub fn scale(&self, alpha: f64) -> GridFunction {
        self.map(|v| alpha * v)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Trapezoidal integral over the grid.
    pub fn integrate(&self) -> f64 {
        trapezoid(&self.values, self.spacing)
    }

    /// Trapezoidal L2 norm.
    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        trapezoid(&sq, self.spacing).sqrt()
    }

    /// Second-order centered differences, second-order one-sided at the ends.
    pub fn derivative(&self) -> GridFunction {
        self.with_values(centered_difference(&self.values, self.spacing))
    }
}

pub(crate) fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            h * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

pub(crate) fn centered_difference(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    if n == 2 {
        let s = (f[1] - f[0]) / h;
        return vec![s, s];
    }
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    d
}

/// Truncation window `[-half_width, half_width]` split into `nodes` cells,
/// sampled at the cell centres `-half_width + (i + 1/2) h`, `h = 2 half_width / nodes`.
///
/// With an even node count the origin is a cell edge, so data with a kink at
/// the origin (the peakon crest) never has it on a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_width: f64,
    pub nodes: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, nodes: usize) -> Result<Self> {
        let spec = Self { half_width, nodes };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 4 {
            return Err(Error::InvalidGrid(format!("need at least 4 nodes, got {}", self.nodes)));
        }
        if !(self.half_width > 0.0) || !self.half_width.is_finite() {
            return Err(Error::InvalidGrid(format!("half width must be positive, got {}", self.half_width)));
        }
        Ok(())
    }

    pub fn origin(&self) -> f64 {
        -self.half_width + 0.5 * self.spacing()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.nodes as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.origin() + i as f64 * self.spacing()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "CH")]
    CamassaHolm,
    #[serde(rename = "DP")]
    DegasperisProcesi,
}

/// Coefficients of the nonlocal source `M(z, w) = a z + b z^2 + c w^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kappa: f64,
    pub family: Family,
    pub coeff_a: f64,
    pub coeff_b: f64,
    pub coeff_c: f64,
}

impl ModelParams {
    /// Camassa-Holm with dispersion `kappa`: `M = 2 kappa z + z^2 + w^2 / 2`.
    pub fn camassa_holm(kappa: f64) -> Self {
        Self { kappa, family: Family::CamassaHolm, coeff_a: 2.0 * kappa, coeff_b: 1.0, coeff_c: 0.5 }
    }

    /// Degasperis-Procesi: `M = 3 z^2 / 2`.
    pub fn degasperis_procesi() -> Self {
        Self { kappa: 0.0, family: Family::DegasperisProcesi, coeff_a: 0.0, coeff_b: 1.5, coeff_c: 0.0 }
    }

    pub fn for_family(family: Family, kappa: f64) -> Self {
        match family {
            Family::CamassaHolm => Self::camassa_holm(kappa),
            Family::DegasperisProcesi => Self::degasperis_procesi(),
        }
    }

    /// Overrides the coefficients, keeping the family tag.
    pub fn with_coefficients(mut self, a: f64, b: f64, c: f64) -> Self {
        self.coeff_a = a;
        self.coeff_b = b;
        self.coeff_c = c;
        self
    }
}

/// The tuple `(xi, z, w, y)` at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianState {
    xi: GridFunction,
    z: GridFunction,
    w: GridFunction,
    y: GridFunction,
    time: f64,
}

impl LagrangianState {
    pub fn new(xi: GridFunction, z: GridFunction, w: GridFunction, y: GridFunction, time: f64) -> Result<Self> {
        if !(xi.same_grid(&z) && xi.same_grid(&w) && xi.same_grid(&y)) {
            return Err(Error::GridMismatch);
        }
        if let Some((index, &value)) = y.values().iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::NonAdmissible { index, value });
        }
        Ok(Self { xi, z, w, y, time })
    }

    /// Builds the initial state `(0, u0, u0', 1)`.
    ///
    /// Derivatives come from the profile when it supplies them and from
    /// centered differences of the profile otherwise.
    pub fn from_initial(profile: &dyn InitialProfile, grid: GridSpec) -> Result<Self> {
        grid.validate()?;
        let (origin, h, n) = (grid.origin(), grid.spacing(), grid.nodes);
        let z = GridFunction::from_fn(origin, h, n, |s| profile.value(s))?;
        let w = GridFunction::from_fn(origin, h, n, |s| {
            profile.derivative(s).unwrap_or_else(|| (profile.value(s + h) - profile.value(s - h)) / (2.0 * h))
        })?;
        Self::new(GridFunction::zeros(origin, h, n), z, w, GridFunction::constant(origin, h, n, 1.0), 0.0)
    }

    pub fn xi(&self) -> &GridFunction {
        &self.xi
    }

    pub fn z(&self) -> &GridFunction {
        &self.z
    }

    pub fn w(&self) -> &GridFunction {
        &self.w
    }

    pub fn y(&self) -> &GridFunction {
        &self.y
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn origin(&self) -> f64 {
        self.z.origin()
    }

    pub fn spacing(&self) -> f64 {
        self.z.spacing()
    }

    pub fn is_finite(&self) -> bool {
        self.xi.is_finite() && self.z.is_finite() && self.w.is_finite() && self.y.is_finite() && self.time.is_finite()
    }

    /// Assembles a state without the positivity check; used for RK stages
    /// whose admissibility is checked when the deformation is built.
    pub(crate) fn from_parts_unchecked(xi: GridFunction, z: GridFunction, w: GridFunction, y: GridFunction, time: f64) -> Self {
        Self { xi, z, w, y, time }
    }

    pub(crate) fn parts(&self) -> [&GridFunction; 4] {
        [&self.xi, &self.z, &self.w, &self.y]
    }

    /// Distance in the product surrogate norm `X x X x Y x Y`.
    pub fn distance(&self, other: &LagrangianState) -> Result<f64> {
        let d = |a: &GridFunction, b: &GridFunction| a.zip_map(b, |p, q| p - q);
        Ok(norm_x(&d(&self.xi, &other.xi)?)
            + norm_x(&d(&self.z, &other.z)?)
            + norm_y(&d(&self.w, &other.w)?)
            + norm_y(&d(&self.y, &other.y)?))
    }
}

/// Discrete surrogate of the `H^1 ∩ W^{1,∞}` norm:
/// `|f|_2 + |f'|_2 + |f|_∞ + |f'|_∞`, with `f'` taken as cell slopes so a
/// kink at a node costs nothing.
pub fn norm_x(f: &GridFunction) -> f64 {
    let h = f.spacing();
    let (sq, sup) = f.values().windows(2).fold((0.0, 0.0f64), |(sq, sup), p| {
        let slope = (p[1] - p[0]) / h;
        (sq + h * slope * slope, sup.max(slope.abs()))
    });
    f.l2_norm() + sq.sqrt() + f.sup_norm() + sup
}

/// Discrete `L^2 ∩ L^∞` norm.
pub fn norm_y(f: &GridFunction) -> f64 {
    f.l2_norm() + f.sup_norm()
}

/// `min y - rho`; positive means the state lies in the admissible set.
pub fn check_admissible(state: &LagrangianState, rho: f64) -> f64 {
    state.y.min() - rho
}

/// Sup norm of `D_s z - w y`, which vanishes identically for exact solutions.
pub fn constraint_residual(state: &LagrangianState) -> f64 {
    let dz = state.z.derivative();
    dz.values().iter().zip(state.w.values()).zip(state.y.values()).fold(0.0, |acc, ((&d, &w), &y)| acc.max((d - w * y).abs()))
}
