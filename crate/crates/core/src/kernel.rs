//! The Green's function `G(x) = e^{-|x|} / 2` of `1 - d^2/dx^2` and linear-time
//! convolutions against `G` and `G'` along a monotone deformation.
//!
//! For nodes `x_0 < x_1 < ... < x_{n-1}` and weights `g_j = m_j y_j` the
//! convolution splits at the evaluation node into a left and a right part,
//!
//! ```text
//! L_i = sum_{j <= i} w_ij e^{x_j - x_i} g_j,   R_i = sum_{j >= i} w_ij e^{x_i - x_j} g_j,
//! ```
//!
//! with trapezoidal weights on `[s_0, s_i]` and `[s_i, s_{n-1}]`. Both obey a
//! one-term recursion with the exact decay factor `e^{x_{i-1} - x_i}`, so the
//! whole convolution costs `O(n)`.

use crate::error::{Error, Result};
use crate::state::{GridFunction, LagrangianState};

pub fn green(x: f64) -> f64 {
    0.5 * (-x.abs()).exp()
}

/// `G'(x) = -sgn(x) G(x)` with `sgn(0) = 0`.
pub fn green_prime(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        -0.5 * x.signum() * (-x.abs()).exp()
    }
}

/// Deformed node positions `x_i = s_i + xi_i` with their Jacobian samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformedGrid {
    origin: f64,
    spacing: f64,
    x_nodes: Vec<f64>,
    jacobian: Vec<f64>,
}

impl DeformedGrid {
    /// Fails with `NonMonotoneDeformation` at the first `i` with `x_i <= x_{i-1}`
    /// and with `NonAdmissible` at the first non-positive Jacobian sample.
    pub fn new(origin: f64, spacing: f64, x_nodes: Vec<f64>, jacobian: Vec<f64>) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {spacing}")));
        }
        if x_nodes.len() != jacobian.len() || x_nodes.is_empty() {
            return Err(Error::GridMismatch);
        }
        if let Some(i) = x_nodes.windows(2).position(|p| !(p[1] > p[0])) {
            return Err(Error::NonMonotoneDeformation { index: i + 1 });
        }
        if let Some((index, &value)) = jacobian.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::NonAdmissible { index, value });
        }
        Ok(Self { origin, spacing, x_nodes, jacobian })
    }

    /// Identity deformation on `n` nodes.
    pub fn identity(origin: f64, spacing: f64, n: usize) -> Result<Self> {
        let x = (0..n).map(|i| origin + i as f64 * spacing).collect();
        Self::new(origin, spacing, x, vec![1.0; n])
    }

    pub fn from_state(state: &LagrangianState) -> Result<Self> {
        let x = state.xi().nodes().zip(state.xi().values()).map(|(s, xi)| s + xi).collect();
        Self::new(state.origin(), state.spacing(), x, state.y().values().to_vec())
    }

    pub fn len(&self) -> usize {
        self.x_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_nodes.is_empty()
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn s_node(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    pub fn x_nodes(&self) -> &[f64] {
        &self.x_nodes
    }

    pub fn jacobian(&self) -> &[f64] {
        &self.jacobian
    }

    /// Smallest Jacobian sample (the admissibility constant of the grid).
    pub fn rho(&self) -> f64 {
        self.jacobian.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Extremes of `(x_{i+1} - x_i) / h` over all cells.
    pub fn stretch_bounds(&self) -> (f64, f64) {
        self.x_nodes.windows(2).fold((f64::INFINITY, 0.0f64), |(lo, hi), p| {
            let r = (p[1] - p[0]) / self.spacing;
            (lo.min(r), hi.max(r))
        })
    }

    fn check(&self, m: &GridFunction) -> Result<()> {
        if m.len() != self.len() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

/// One-sided exponential sums `L` and `R` (see module docs).
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPair {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// Half-cell self contributions `h/2 m x'` at the first and last node. Only
    /// one of the two scans carries them there, so `G'` must remove them.
    pub edge_self: (f64, f64),
}

/// Left and right exponential scans of `m x'` along the deformation.
pub fn exp_scan(grid: &DeformedGrid, m: &GridFunction) -> Result<ScanPair> {
    grid.check(m)?;
    let n = grid.len();
    let x = &grid.x_nodes;
    let half_h = 0.5 * grid.spacing;
    let g: Vec<f64> = m.values().iter().zip(&grid.jacobian).map(|(a, b)| a * b).collect();

    let mut left = vec![0.0; n];
    for i in 1..n {
        let decay = (x[i - 1] - x[i]).exp();
        let q = half_h * (decay * g[i - 1] + g[i]);
        left[i] = decay * left[i - 1] + q;
    }
    let mut right = vec![0.0; n];
    for i in (0..n.saturating_sub(1)).rev() {
        let decay = (x[i] - x[i + 1]).exp();
        let q = half_h * (decay * g[i + 1] + g[i]);
        right[i] = decay * right[i + 1] + q;
    }
    let edge_self = if n == 0 { (0.0, 0.0) } else { (half_h * g[0], half_h * g[n - 1]) };
    Ok(ScanPair { left, right, edge_self })
}

impl ScanPair {
    /// `½ (L + R)`: the convolution with `G`.
    pub fn conv_g(&self) -> Vec<f64> {
        self.left.iter().zip(&self.right).map(|(l, r)| 0.5 * (l + r)).collect()
    }

    /// `½ (R - L)`: the convolution with `G'`.
    pub fn conv_gprime(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.left.iter().zip(&self.right).map(|(l, r)| 0.5 * (r - l)).collect();
        if let Some(first) = out.first_mut() {
            *first -= 0.5 * self.edge_self.0;
        }
        if let Some(last) = out.last_mut() {
            *last += 0.5 * self.edge_self.1;
        }
        out
    }
}

/// Trapezoidal quadrature of `∫ G(x(s_i) - x(σ)) m(σ) x'(σ) dσ`.
pub fn conv_g(grid: &DeformedGrid, m: &GridFunction) -> Result<GridFunction> {
    Ok(m.with_values(exp_scan(grid, m)?.conv_g()))
}

/// Trapezoidal quadrature of `∫ G'(x(s_i) - x(σ)) m(σ) x'(σ) dσ` (no leading minus).
pub fn conv_gprime(grid: &DeformedGrid, m: &GridFunction) -> Result<GridFunction> {
    Ok(m.with_values(exp_scan(grid, m)?.conv_gprime()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMode {
    G,
    GPrime,
}

/// Direct `O(n^2)` trapezoidal quadrature; the reference for the scans.
pub fn conv_naive(grid: &DeformedGrid, m: &GridFunction, mode: KernelMode) -> Result<GridFunction> {
    grid.check(m)?;
    let n = grid.len();
    let h = grid.spacing;
    let kernel = match mode {
        KernelMode::G => green,
        KernelMode::GPrime => green_prime,
    };
    let weighted: Vec<f64> = (0..n)
        .map(|j| {
            let w = if j == 0 || j + 1 == n { 0.5 * h } else { h };
            w * m.values()[j] * grid.jacobian[j]
        })
        .collect();
    let out = (0..n)
        .map(|i| {
            let xi = grid.x_nodes[i];
            grid.x_nodes.iter().zip(&weighted).map(|(&xj, &g)| kernel(xi - xj) * g).sum()
        })
        .collect();
    Ok(m.with_values(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_grid(rng: &mut ChaCha8Rng, n: usize) -> (DeformedGrid, GridFunction) {
        let h = 20.0 / n as f64;
        let mut x = Vec::with_capacity(n);
        let mut jac = Vec::with_capacity(n);
        let mut pos = -10.0;
        for _ in 0..n {
            let j: f64 = rng.gen_range(0.2..3.0);
            x.push(pos);
            jac.push(j);
            pos += j * h;
        }
        let m = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        (DeformedGrid::new(-10.0, h, x, jac).unwrap(), GridFunction::new(-10.0, h, m).unwrap())
    }

    #[test]
    fn green_values() {
        assert_eq!(green(0.0), 0.5);
        assert_abs_diff_eq!(green(2f64.ln()), 0.25, epsilon = 1e-16);
        assert_eq!(green(-1.0), green(1.0));
        assert_eq!(green_prime(0.0), 0.0);
        assert_abs_diff_eq!(green_prime(1.0), -0.5 * (-1f64).exp(), epsilon = 1e-16);
        assert_eq!(green_prime(-1.0), -green_prime(1.0));
    }

    #[test]
    fn zero_integrand_gives_zero() {
        let grid = DeformedGrid::identity(-5.0, 0.1, 101).unwrap();
        let m = GridFunction::zeros(-5.0, 0.1, 101);
        let scan = exp_scan(&grid, &m).unwrap();
        assert!(scan.left.iter().chain(&scan.right).all(|&v| v == 0.0));
        assert!(conv_naive(&grid, &m, KernelMode::G).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn point_mass_gives_exponential_tail() {
        let n = 201;
        let h = 0.05;
        let grid = DeformedGrid::identity(-5.0, h, n).unwrap();
        let j = 80;
        let mut m = GridFunction::zeros(-5.0, h, n);
        m.values_mut()[j] = 1.0 / h;
        let scan = exp_scan(&grid, &m).unwrap();
        for i in 0..n {
            if i < j {
                assert_eq!(scan.left[i], 0.0);
            } else if i > j {
                let expected = (grid.s_node(j) - grid.s_node(i)).exp();
                assert_abs_diff_eq!(scan.left[i], expected, epsilon = 1e-12);
            }
        }
        let naive = conv_naive(&grid, &m, KernelMode::G).unwrap();
        let fast = conv_g(&grid, &m).unwrap();
        for i in 0..n {
            assert_abs_diff_eq!(fast.values()[i], naive.values()[i], epsilon = 1e-14);
            assert_abs_diff_eq!(naive.values()[i], green(grid.s_node(i) - grid.s_node(j)), epsilon = 1e-14);
        }
    }

    #[test]
    fn indicator_convolution_at_origin() {
        // ∫_{-a}^{a} e^{-|y|}/2 dy = 1 - e^{-a}; the indicator's jumps cost O(h).
        let a = 2.0;
        let n = 4001;
        let h = 20.0 / (n - 1) as f64;
        let grid = DeformedGrid::identity(-10.0, h, n).unwrap();
        let m = GridFunction::from_fn(-10.0, h, n, |s| if s.abs() <= a + 1e-12 { 1.0 } else { 0.0 }).unwrap();
        let c = conv_g(&grid, &m).unwrap();
        let mid = (n - 1) / 2;
        assert_abs_diff_eq!(grid.s_node(mid), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.values()[mid], 1.0 - (-a).exp(), epsilon = 2.0 * h);
        let scan = exp_scan(&grid, &m).unwrap();
        assert_abs_diff_eq!(0.5 * (scan.left[mid] + scan.right[mid]), 1.0 - (-a).exp(), epsilon = 2.0 * h);
    }

    #[test]
    fn even_integrand_gives_odd_gprime() {
        let n = 401;
        let h = 0.05;
        let grid = DeformedGrid::identity(-10.0, h, n).unwrap();
        let m = GridFunction::from_fn(-10.0, h, n, |s| (-s * s).exp() + 0.3 * (-(s * s) / 4.0).exp()).unwrap();
        let d = conv_gprime(&grid, &m).unwrap();
        let mid = n / 2;
        assert_abs_diff_eq!(d.values()[mid], 0.0, epsilon = 1e-14);
        for k in 1..mid {
            assert_abs_diff_eq!(d.values()[mid + k], -d.values()[mid - k], epsilon = 1e-13);
        }
    }

    #[test]
    fn scans_match_naive_on_random_grids() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let (grid, m) = random_grid(&mut rng, 512);
            for (fast, mode) in [(conv_g(&grid, &m).unwrap(), KernelMode::G), (conv_gprime(&grid, &m).unwrap(), KernelMode::GPrime)] {
                let naive = conv_naive(&grid, &m, mode).unwrap();
                let err = fast.values().iter().zip(naive.values()).fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
                assert!(err <= 1e-10, "{mode:?}: {err}");
            }
        }
    }

    #[test]
    fn non_monotone_grid_is_rejected() {
        let err = DeformedGrid::new(0.0, 1.0, vec![0.0, 1.0, 1.0, 2.0], vec![1.0; 4]).unwrap_err();
        assert_eq!(err, Error::NonMonotoneDeformation { index: 2 });
        let err = DeformedGrid::new(0.0, 1.0, vec![0.0, 1.0, 2.0], vec![1.0, -0.1, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NonAdmissible { index: 1, .. }));
        let grid = DeformedGrid::identity(0.0, 1.0, 4).unwrap();
        assert_eq!(exp_scan(&grid, &GridFunction::zeros(0.0, 1.0, 5)), Err(Error::GridMismatch));
    }

    #[test]
    fn young_bound_for_undeformed_grid() {
        let n = 801;
        let h = 0.05;
        let grid = DeformedGrid::identity(-20.0, h, n).unwrap();
        let m = GridFunction::from_fn(-20.0, h, n, |s| if s.abs() < 3.0 { (3.0 - s.abs()).powi(2) } else { 0.0 }).unwrap();
        let c = conv_g(&grid, &m).unwrap();
        assert!(c.sup_norm() <= 0.5 * m.integrate() + 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn kernel_domination(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (grid, _) = random_grid(&mut rng, 64);
            let rho = grid.rho();
            for i in 0..grid.len() {
                for j in 0..grid.len() {
                    let lhs = green(grid.x_nodes()[i] - grid.x_nodes()[j]);
                    let rhs = green(rho * (grid.s_node(i) - grid.s_node(j)));
                    prop_assert!(lhs <= rhs * (1.0 + 1e-12));
                }
            }
        }

        #[test]
        fn linearity_and_positivity(seed in any::<u64>(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (grid, m1) = random_grid(&mut rng, 128);
            let m2 = GridFunction::new(m1.origin(), m1.spacing(), (0..128).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap();
            let combo = m1.zip_map(&m2, |a, b| alpha * a + beta * b).unwrap();
            let lhs = conv_g(&grid, &combo).unwrap();
            let c1 = conv_g(&grid, &m1).unwrap();
            let c2 = conv_g(&grid, &m2).unwrap();
            for i in 0..128 {
                let rhs = alpha * c1.values()[i] + beta * c2.values()[i];
                prop_assert!((lhs.values()[i] - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
                prop_assert!(c2.values()[i] >= 0.0);
            }
        }
    }
}
