//! The Lagrangian vector field.
//!
//! With `M(z, w) = a z + b z^2 + c w^2` and `N = M - w^2`,
//!
//! ```text
//! d(xi)/dt = z
//! dz/dt    = F1 = -∫ G'(x(s) - x(σ)) M x'(σ) dσ
//! dw/dt    = F2 = -∫ G (x(s) - x(σ)) M x'(σ) dσ + N
//! dy/dt    = w y
//! ```
//!
//! `F1` and `F2` share a single exponential scan per evaluation.

use crate::error::{Error, Result};
use crate::kernel::{exp_scan, DeformedGrid};
use crate::state::{GridFunction, LagrangianState, ModelParams};

pub fn m_fn(z: &GridFunction, w: &GridFunction, params: &ModelParams) -> Result<GridFunction> {
    let (a, b, c) = (params.coeff_a, params.coeff_b, params.coeff_c);
    z.zip_map(w, |z, w| a * z + b * z * z + c * w * w)
}

pub fn n_fn(z: &GridFunction, w: &GridFunction, params: &ModelParams) -> Result<GridFunction> {
    let (a, b, c) = (params.coeff_a, params.coeff_b, params.coeff_c);
    z.zip_map(w, |z, w| a * z + b * z * z + c * w * w - w * w)
}

/// Time derivative of `(xi, z, w, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateRate {
    pub d_xi: GridFunction,
    pub d_z: GridFunction,
    pub d_w: GridFunction,
    pub d_y: GridFunction,
}

impl StateRate {
    pub fn is_finite(&self) -> bool {
        self.d_xi.is_finite() && self.d_z.is_finite() && self.d_w.is_finite() && self.d_y.is_finite()
    }

    pub(crate) fn parts(&self) -> [&GridFunction; 4] {
        [&self.d_xi, &self.d_z, &self.d_w, &self.d_y]
    }
}

/// `(F1, F2)` from one shared scan.
pub fn nonlocal_terms(state: &LagrangianState, params: &ModelParams) -> Result<(GridFunction, GridFunction)> {
    let grid = DeformedGrid::from_state(state)?;
    let (z, w) = (state.z(), state.w());
    let m = m_fn(z, w, params)?;
    let scan = exp_scan(&grid, &m)?;
    let (a, b, c) = (params.coeff_a, params.coeff_b, params.coeff_c);

    let f1: Vec<f64> = scan.conv_gprime().into_iter().map(|v| -v).collect();
    let f2: Vec<f64> = scan
        .conv_g()
        .into_iter()
        .zip(z.values().iter().zip(w.values()))
        .map(|(g, (&z, &w))| -g + (a * z + b * z * z + c * w * w - w * w))
        .collect();
    Ok((GridFunction::new(z.origin(), z.spacing(), f1)?, GridFunction::new(z.origin(), z.spacing(), f2)?))
}

pub fn f1(state: &LagrangianState, params: &ModelParams) -> Result<GridFunction> {
    Ok(nonlocal_terms(state, params)?.0)
}

pub fn f2(state: &LagrangianState, params: &ModelParams) -> Result<GridFunction> {
    Ok(nonlocal_terms(state, params)?.1)
}

pub fn vector_field(state: &LagrangianState, params: &ModelParams) -> Result<StateRate> {
    let (d_z, d_w) = nonlocal_terms(state, params)?;
    let d_y = state.w().zip_map(state.y(), |w, y| w * y)?;
    if !d_y.is_finite() {
        return Err(Error::InvalidGrid("non-finite jacobian rate".into()));
    }
    Ok(StateRate { d_xi: state.z().clone(), d_z, d_w, d_y })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{conv_naive, KernelMode};
    use crate::profile::InitialData;
    use crate::state::GridSpec;
    use approx::assert_abs_diff_eq;

    fn single(v: f64) -> GridFunction {
        GridFunction::new(0.0, 1.0, vec![v]).unwrap()
    }

    #[test]
    fn nonlinearity_values() {
        let ch = ModelParams::camassa_holm(0.0);
        let dp = ModelParams::degasperis_procesi();
        assert_eq!(m_fn(&single(0.0), &single(0.0), &ch).unwrap().values()[0], 0.0);
        assert_eq!(m_fn(&single(2.0), &single(2.0), &ch).unwrap().values()[0], 6.0);
        assert_eq!(m_fn(&single(2.0), &single(-7.0), &dp).unwrap().values()[0], 6.0);
        assert_eq!(n_fn(&single(0.0), &single(1.0), &ch).unwrap().values()[0], -0.5);
        assert_eq!(n_fn(&single(0.0), &single(1.0), &dp).unwrap().values()[0], -1.0);
        assert_eq!(n_fn(&single(1.3), &single(0.0), &ch).unwrap(), m_fn(&single(1.3), &single(0.0), &ch).unwrap());
        let k = ModelParams::camassa_holm(0.5);
        assert_eq!(m_fn(&single(1.0), &single(0.0), &k).unwrap().values()[0], 2.0);
    }

    #[test]
    fn zero_state_is_equilibrium() {
        let st = LagrangianState::from_initial(&InitialData::Zero, GridSpec::new(10.0, 128).unwrap()).unwrap();
        let rate = vector_field(&st, &ModelParams::camassa_holm(0.0)).unwrap();
        for part in rate.parts() {
            assert!(part.values().iter().all(|&v| v == 0.0));
        }
    }

    fn peakon_check(params: ModelParams) {
        let c = 1.0;
        let st = LagrangianState::from_initial(&InitialData::Peakon { c }, GridSpec::new(30.0, 4096).unwrap()).unwrap();
        let (f1, _) = nonlocal_terms(&st, &params).unwrap();
        let grid = DeformedGrid::from_state(&st).unwrap();
        let m = m_fn(st.z(), st.w(), &params).unwrap();
        let naive = conv_naive(&grid, &m, KernelMode::GPrime).unwrap();
        let mut worst = 0.0f64;
        for i in 0..st.len() {
            assert_abs_diff_eq!(f1.values()[i], -naive.values()[i], epsilon = 1e-10);
            let expected = (st.z().values()[i] - c) * st.w().values()[i];
            worst = worst.max((f1.values()[i] - expected).abs());
        }
        assert!(worst < 1e-2, "peakon f1 residual {worst}");
    }

    #[test]
    fn peakon_f1_is_transport_rate_ch() {
        peakon_check(ModelParams::camassa_holm(0.0));
    }

    #[test]
    fn peakon_f1_is_transport_rate_dp() {
        peakon_check(ModelParams::degasperis_procesi());
    }

    #[test]
    fn parity_for_even_data() {
        let st = LagrangianState::from_initial(&InitialData::Gaussian { amplitude: 0.8, width: 1.3 }, GridSpec::new(12.0, 512).unwrap())
            .unwrap();
        let (f1, f2) = nonlocal_terms(&st, &ModelParams::camassa_holm(0.0)).unwrap();
        let n = st.len();
        for i in 0..n {
            assert_abs_diff_eq!(f1.values()[i], -f1.values()[n - 1 - i], epsilon = 1e-13);
            assert_abs_diff_eq!(f2.values()[i], f2.values()[n - 1 - i], epsilon = 1e-13);
        }
    }

    #[test]
    fn f2_nonpositive_off_bump() {
        let grid = GridSpec::new(10.0, 400);
        let st = LagrangianState::from_initial(
            &crate::profile::FnProfile(|s: f64| if s.abs() < 1.0 { (1.0 - s * s).powi(3) } else { 0.0 }),
            grid.unwrap(),
        )
        .unwrap();
        // zero the gradient so M = z^2 is a nonnegative bump and N vanishes off it
        let w = GridFunction::zeros(st.origin(), st.spacing(), st.len());
        let st = LagrangianState::new(st.xi().clone(), st.z().clone(), w, st.y().clone(), 0.0).unwrap();
        let f2 = f2(&st, &ModelParams::camassa_holm(0.0)).unwrap();
        for (s, v) in f2.nodes().zip(f2.values()) {
            if s.abs() >= 1.0 {
                assert!(*v <= 0.0);
            }
        }
    }

    #[test]
    fn ch_and_dp_agree_up_to_coefficient_when_gradient_vanishes() {
        let z = GridFunction::from_fn(-5.0, 0.1, 101, |s| (-s * s).exp()).unwrap();
        let w = GridFunction::zeros(-5.0, 0.1, 101);
        let ch = m_fn(&z, &w, &ModelParams::camassa_holm(0.0)).unwrap();
        let dp = m_fn(&z, &w, &ModelParams::degasperis_procesi()).unwrap();
        for (a, b) in ch.values().iter().zip(dp.values()) {
            assert_abs_diff_eq!(1.5 * a, *b, epsilon = 1e-15);
        }
    }

    #[test]
    fn rate_has_displacement_equal_velocity() {
        let st = LagrangianState::from_initial(&InitialData::Breaking { amplitude: 1.0 }, GridSpec::new(10.0, 200).unwrap()).unwrap();
        let rate = vector_field(&st, &ModelParams::camassa_holm(0.3)).unwrap();
        assert_eq!(&rate.d_xi, st.z());
        for i in 0..st.len() {
            assert_eq!(rate.d_y.values()[i], st.w().values()[i] * st.y().values()[i]);
        }
    }
}
