//! Initial velocity profiles `u0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sampler for `u0` and, where known, `u0'`.
pub trait InitialProfile: Send + Sync {
    fn value(&self, s: f64) -> f64;

    /// Exact derivative, or `None` to fall back to centered differences.
    fn derivative(&self, _s: f64) -> Option<f64> {
        None
    }
}

/// Wraps a closure as a profile with no analytic derivative.
pub struct FnProfile<F>(pub F);

impl<F: Fn(f64) -> f64 + Send + Sync> InitialProfile for FnProfile<F> {
    fn value(&self, s: f64) -> f64 {
        (self.0)(s)
    }
}

/// Built-in initial data families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InitialData {
    Zero,
    /// `c e^{-|x|}`. A node on the crest gets the average of the one-sided
    /// derivatives, 0.
    Peakon {
        c: f64,
    },
    /// `amplitude e^{-(x/width)^2}`.
    Gaussian {
        amplitude: f64,
        width: f64,
    },
    /// `-amplitude x e^{-x^2}`, which breaks in finite time for large enough amplitude.
    Breaking {
        amplitude: f64,
    },
    Custom(Tabulated),
}

impl InitialData {
    /// Same family with its amplitude shifted by `delta`. Tabulated data is
    /// scaled by `1 + delta`.
    pub fn perturbed(&self, delta: f64) -> InitialData {
        match self {
            InitialData::Zero => InitialData::Gaussian { amplitude: delta, width: 1.0 },
            InitialData::Peakon { c } => InitialData::Peakon { c: c + delta },
            InitialData::Gaussian { amplitude, width } => InitialData::Gaussian { amplitude: amplitude + delta, width: *width },
            InitialData::Breaking { amplitude } => InitialData::Breaking { amplitude: amplitude + delta },
            InitialData::Custom(t) => InitialData::Custom(t.scaled(1.0 + delta)),
        }
    }
}

impl InitialProfile for InitialData {
    fn value(&self, s: f64) -> f64 {
        match self {
            InitialData::Zero => 0.0,
            InitialData::Peakon { c } => c * (-s.abs()).exp(),
            InitialData::Gaussian { amplitude, width } => amplitude * (-(s / width).powi(2)).exp(),
            InitialData::Breaking { amplitude } => -amplitude * s * (-s * s).exp(),
            InitialData::Custom(t) => t.value(s),
        }
    }

    fn derivative(&self, s: f64) -> Option<f64> {
        match self {
            InitialData::Zero => Some(0.0),
            InitialData::Peakon { c } => {
                if s == 0.0 {
                    Some(0.0)
                } else {
                    Some(-c * s.signum() * (-s.abs()).exp())
                }
            }
            InitialData::Gaussian { amplitude, width } => Some(-2.0 * s / (width * width) * amplitude * (-(s / width).powi(2)).exp()),
            InitialData::Breaking { amplitude } => Some(-amplitude * (1.0 - 2.0 * s * s) * (-s * s).exp()),
            InitialData::Custom(t) => t.derivative(s),
        }
    }
}

/// Tabulated `(x, u, u')` samples, linearly interpolated and zero outside the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tabulated {
    xs: Vec<f64>,
    us: Vec<f64>,
    dus: Option<Vec<f64>>,
}

impl Tabulated {
    pub fn new(xs: Vec<f64>, us: Vec<f64>, dus: Option<Vec<f64>>) -> Result<Self> {
        if xs.len() < 2 {
            return Err(Error::InvalidConfig("tabulated data needs at least two rows".into()));
        }
        if us.len() != xs.len() || dus.as_ref().is_some_and(|d| d.len() != xs.len()) {
            return Err(Error::InvalidConfig("tabulated columns differ in length".into()));
        }
        if let Some(i) = xs.windows(2).position(|p| !(p[1] > p[0])) {
            return Err(Error::InvalidConfig(format!("x column not strictly increasing at row {}", i + 1)));
        }
        let all_finite = xs.iter().chain(&us).chain(dus.iter().flatten()).all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidConfig("tabulated data contains non-finite values".into()));
        }
        Ok(Self { xs, us, dus })
    }

    fn scaled(&self, factor: f64) -> Self {
        Self {
            xs: self.xs.clone(),
            us: self.us.iter().map(|u| u * factor).collect(),
            dus: self.dus.as_ref().map(|d| d.iter().map(|v| v * factor).collect()),
        }
    }

    fn interp(&self, column: &[f64], s: f64) -> f64 {
        let n = self.xs.len();
        if s < self.xs[0] || s > self.xs[n - 1] {
            return 0.0;
        }
        let j = self.xs.partition_point(|&x| x <= s).clamp(1, n - 1);
        let (x0, x1) = (self.xs[j - 1], self.xs[j]);
        let t = (s - x0) / (x1 - x0);
        column[j - 1] + t * (column[j] - column[j - 1])
    }

    pub fn value(&self, s: f64) -> f64 {
        self.interp(&self.us, s)
    }

    pub fn derivative(&self, s: f64) -> Option<f64> {
        self.dus.as_ref().map(|d| self.interp(d, s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peakon_is_even_with_odd_derivative() {
        let p = InitialData::Peakon { c: 2.0 };
        assert_eq!(p.value(0.0), 2.0);
        assert_eq!(p.value(1.3), p.value(-1.3));
        assert_eq!(p.derivative(0.7).unwrap(), -p.derivative(-0.7).unwrap());
        assert_eq!(p.derivative(0.0), Some(0.0));
    }

    #[test]
    fn breaking_derivative_matches_difference() {
        let p = InitialData::Breaking { amplitude: 3.0 };
        let h = 1e-6;
        for &s in &[-1.2, -0.3, 0.0, 0.4, 2.0] {
            let fd = (p.value(s + h) - p.value(s - h)) / (2.0 * h);
            assert!((fd - p.derivative(s).unwrap()).abs() < 1e-8);
        }
        assert_eq!(p.derivative(0.0), Some(-3.0));
    }

    #[test]
    fn tabulated_interpolates_and_validates() {
        let t = Tabulated::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 0.0], None).unwrap();
        assert_eq!(t.value(0.5), 1.0);
        assert_eq!(t.value(2.0), 1.0);
        assert_eq!(t.value(-1.0), 0.0);
        assert_eq!(t.value(3.5), 0.0);
        assert!(t.derivative(0.5).is_none());
        assert!(Tabulated::new(vec![0.0, 0.0], vec![1.0, 1.0], None).is_err());
        assert!(Tabulated::new(vec![0.0, 1.0], vec![1.0], None).is_err());
    }

    #[test]
    fn perturbation_shifts_amplitude() {
        assert_eq!(InitialData::Peakon { c: 1.0 }.perturbed(0.01), InitialData::Peakon { c: 1.01 });
        let g = InitialData::Gaussian { amplitude: 1.0, width: 2.0 }.perturbed(-0.5);
        assert_eq!(g, InitialData::Gaussian { amplitude: 0.5, width: 2.0 });
    }
}
