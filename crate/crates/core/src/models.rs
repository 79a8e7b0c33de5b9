//! Dose-response regression families with classical covariate error.
//!
//! | model              | m(x, θ)                     | parameters        |
//! |--------------------|-----------------------------|-------------------|
//! | Michaelis-Menten   | θ1 x / (θ2 + x)             | (θ1, θ2)          |
//! | Emax               | θ0 + θ1 x / (θ2 + x)        | (θ0, θ1, θ2)      |
//! | Exponential        | θ0 + θ1 exp(−θ2 x)          | (θ0, θ1, θ2)      |
//!
//! Derivatives are analytic. The σ-functions are the univariate,
//! uncorrelated-error specialisation
//! `σ0 = 1 + (∂m/∂x)²` and `σ1 = σ²_η + (∂m/∂x)² σ²_ε`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Vector, MAX_DIM};

/// Distance from zero of `θ2 + x` below which the hyperbolic models refuse
/// to evaluate.
const POLE_EPS: f64 = 1e-12;

/// Model parameters `θ`, ordered as in the model formula.
///
/// Michaelis-Menten carries `(θ1, θ2)`; Emax and exponential carry
/// `(θ0, θ1, θ2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamVector(Vector);

impl ParamVector {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() || values.len() > MAX_DIM {
            return Err(Error::Domain(format!(
                "parameter vector of length {} (expected 1..={MAX_DIM})",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite parameter in {values:?}")));
        }
        Ok(Self(Vector::from_slice(values)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    /// The `(θ1, θ2)` pair shared by all three models (the last two entries).
    pub fn shape(&self) -> (f64, f64) {
        let v = self.as_slice();
        (v[v.len() - 2], v[v.len() - 1])
    }
}

impl std::ops::Index<usize> for ParamVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    MichaelisMenten,
    Emax,
    Exponential,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [Self::MichaelisMenten, Self::Emax, Self::Exponential];

    /// Number of parameters `p + 1`.
    pub fn n_params(self) -> usize {
        match self {
            Self::MichaelisMenten => 2,
            Self::Emax | Self::Exponential => 3,
        }
    }

    /// Config-file name of the model.
    pub fn name(self) -> &'static str {
        match self {
            Self::MichaelisMenten => "michaelis-menten",
            Self::Emax => "emax",
            Self::Exponential => "exponential",
        }
    }

    /// Checks `θ` against the model's parameter constraints.
    pub fn check_params(self, theta: &ParamVector) -> Result<()> {
        if theta.len() != self.n_params() {
            return Err(Error::Domain(format!(
                "{} expects {} parameters, got {}",
                self.name(),
                self.n_params(),
                theta.len()
            )));
        }
        let (t1, t2) = theta.shape();
        match self {
            Self::MichaelisMenten | Self::Emax => {
                if !(t1 > 0.0 && t2 > 0.0) {
                    return Err(Error::Domain(format!(
                        "{} requires θ1 > 0 and θ2 > 0, got ({t1}, {t2})",
                        self.name()
                    )));
                }
            }
            Self::Exponential => {
                if t2 == 0.0 {
                    return Err(Error::Domain("exponential model requires θ2 ≠ 0".into()));
                }
            }
        }
        Ok(())
    }

    fn check(self, x: f64, theta: &ParamVector) -> Result<()> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("covariate x = {x} outside [0, ∞)")));
        }
        self.check_params(theta)?;
        if matches!(self, Self::MichaelisMenten | Self::Emax) {
            let (_, t2) = theta.shape();
            if (t2 + x).abs() < POLE_EPS {
                return Err(Error::Domain(format!(
                    "θ2 + x = {} at the model pole",
                    t2 + x
                )));
            }
        }
        Ok(())
    }

    /// `m(x, θ)`.
    pub fn eval(self, x: f64, theta: &ParamVector) -> Result<f64> {
        self.check(x, theta)?;
        let (t1, t2) = theta.shape();
        Ok(match self {
            Self::MichaelisMenten => t1 * x / (t2 + x),
            Self::Emax => theta[0] + t1 * x / (t2 + x),
            Self::Exponential => theta[0] + t1 * (-t2 * x).exp(),
        })
    }

    /// `∂m/∂θ`.
    pub fn grad_theta(self, x: f64, theta: &ParamVector) -> Result<Vector> {
        self.check(x, theta)?;
        Ok(self.grad_unchecked(x, theta))
    }

    /// `∂m/∂x`.
    pub fn dm_dx(self, x: f64, theta: &ParamVector) -> Result<f64> {
        self.check(x, theta)?;
        Ok(self.dm_dx_unchecked(x, theta))
    }

    /// `σ_k(x, θ)` for `k ∈ {0, 1}`.
    pub fn sigma(self, k: usize, x: f64, theta: &ParamVector, err: &ErrorSpec) -> Result<f64> {
        let d = self.dm_dx(x, theta)?;
        match k {
            0 => Ok(1.0 + d * d),
            1 => Ok(err.sigma_eta_sq + d * d * err.sigma_eps_sq),
            _ => Err(Error::Domain(format!(
                "σ-function index {k} (expected 0 or 1)"
            ))),
        }
    }

    /// Gradient together with `σ0` and `σ1` at one covariate value.
    ///
    /// This is the per-point quantity every information matrix is built from.
    pub fn local_terms(self, x: f64, theta: &ParamVector, err: &ErrorSpec) -> Result<PointTerms> {
        self.check(x, theta)?;
        let d = self.dm_dx_unchecked(x, theta);
        let d2 = d * d;
        Ok(PointTerms {
            grad: self.grad_unchecked(x, theta),
            sigma0: 1.0 + d2,
            sigma1: err.sigma_eta_sq + d2 * err.sigma_eps_sq,
        })
    }

    fn grad_unchecked(self, x: f64, theta: &ParamVector) -> Vector {
        let (t1, t2) = theta.shape();
        match self {
            Self::MichaelisMenten => {
                let a = t2 + x;
                Vector::from_slice(&[x / a, -t1 * x / (a * a)])
            }
            Self::Emax => {
                let a = t2 + x;
                Vector::from_slice(&[1.0, x / a, -t1 * x / (a * a)])
            }
            Self::Exponential => {
                let e = (-t2 * x).exp();
                Vector::from_slice(&[1.0, e, -t1 * x * e])
            }
        }
    }

    fn dm_dx_unchecked(self, x: f64, theta: &ParamVector) -> f64 {
        let (t1, t2) = theta.shape();
        match self {
            Self::MichaelisMenten | Self::Emax => {
                let a = t2 + x;
                t1 * t2 / (a * a)
            }
            Self::Exponential => -t1 * t2 * (-t2 * x).exp(),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown model {s:?}")))
    }
}

/// Per-point gradient and σ-function values.
#[derive(Clone, Copy, Debug)]
pub struct PointTerms {
    pub grad: Vector,
    pub sigma0: f64,
    pub sigma1: f64,
}

/// Response and covariate error variances (uncorrelated).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorSpec {
    pub sigma_eta_sq: f64,
    pub sigma_eps_sq: f64,
}

impl ErrorSpec {
    pub fn new(sigma_eta_sq: f64, sigma_eps_sq: f64) -> Result<Self> {
        if !(sigma_eta_sq > 0.0) || !sigma_eta_sq.is_finite() {
            return Err(Error::InvalidErrorSpec(format!(
                "σ²_η = {sigma_eta_sq} must be > 0"
            )));
        }
        if !(sigma_eps_sq >= 0.0) || !sigma_eps_sq.is_finite() {
            return Err(Error::InvalidErrorSpec(format!(
                "σ²_ε = {sigma_eps_sq} must be ≥ 0"
            )));
        }
        Ok(Self {
            sigma_eta_sq,
            sigma_eps_sq,
        })
    }

    /// Normalised spec `(σ²_η, σ²_ε) = (1, ρ²)`.
    pub fn from_ratio(rho_sq: f64) -> Result<Self> {
        Self::new(1.0, rho_sq)
    }

    /// `ρ² = σ²_ε / σ²_η`.
    pub fn rho_sq(&self) -> f64 {
        self.sigma_eps_sq / self.sigma_eta_sq
    }
}
