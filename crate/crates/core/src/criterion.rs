//! Bayesian D-criterion `Φ_π(ξ) = Σ_j π_j log det M(ξ, θ_j)`.
//!
//! The matrix path ([`phi`]) is authoritative. [`phi_closed_form`] evaluates
//! the analytic expressions available for equally weighted saturated designs
//! and is used to cross-check it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::design::{Design, DiscretePrior, RatioPrior};
use crate::error::{Error, Result};
use crate::information::SquareRoots;
use crate::models::{ErrorSpec, ModelKind, ParamVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimationMethod {
    /// Maximum likelihood, `M_ML`.
    Mle,
    /// Least squares, `M_LS = D_0 D_1⁻¹ D_0`.
    Lse,
}

impl EstimationMethod {
    pub const ALL: [EstimationMethod; 2] = [Self::Mle, Self::Lse];

    pub fn name(self) -> &'static str {
        match self {
            Self::Mle => "mle",
            Self::Lse => "lse",
        }
    }
}

impl fmt::Display for EstimationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Mle => "MLE",
            Self::Lse => "LSE",
        })
    }
}

impl FromStr for EstimationMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mle" | "ml" => Ok(Self::Mle),
            "lse" | "ls" => Ok(Self::Lse),
            _ => Err(Error::Domain(format!("unknown estimation method {s:?}"))),
        }
    }
}

/// Criterion value on the log scale; `-inf` marks a degenerate design.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct CriterionValue {
    pub value: f64,
}

impl CriterionValue {
    pub const DEGENERATE: CriterionValue = CriterionValue {
        value: f64::NEG_INFINITY,
    };

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// `log det M(ξ, θ)` for a single parameter vector.
pub fn local_log_det(
    design: &Design,
    model: ModelKind,
    theta: &ParamVector,
    method: EstimationMethod,
    err: &ErrorSpec,
) -> Result<f64> {
    atom_log_det(design.support(), model, theta, method, err)
}

pub(crate) fn atom_log_det(
    support: impl Iterator<Item = (f64, f64)>,
    model: ModelKind,
    theta: &ParamVector,
    method: EstimationMethod,
    err: &ErrorSpec,
) -> Result<f64> {
    SquareRoots::from_support(support, model, theta, err)?.log_det(method == EstimationMethod::Lse)
}

/// Prior-weighted sum of per-atom log-determinants over arbitrary support.
///
/// Any degenerate atom makes the whole criterion `-inf`.
pub(crate) fn phi_support(
    points: &[f64],
    weights: &[f64],
    model: ModelKind,
    prior: &DiscretePrior,
    method: EstimationMethod,
    err: &ErrorSpec,
) -> CriterionValue {
    let mut total = 0.0;
    for (theta, w) in prior.atoms() {
        let support = points.iter().copied().zip(weights.iter().copied());
        match atom_log_det(support, model, theta, method, err) {
            Ok(v) if v.is_finite() => total += w * v,
            _ => return CriterionValue::DEGENERATE,
        }
    }
    CriterionValue { value: total }
}

/// `Φ_π(ξ)` for a fixed error specification.
pub fn phi(
    design: &Design,
    model: ModelKind,
    prior: &DiscretePrior,
    method: EstimationMethod,
    err: &ErrorSpec,
) -> Result<CriterionValue> {
    prior.check_model(model)?;
    Ok(phi_support(
        design.points(),
        design.weights(),
        model,
        prior,
        method,
        err,
    ))
}

/// Criterion averaged over a discrete prior on `ρ²`, with `σ²_ε = ρ² σ²_η`.
pub fn phi_over_ratios(
    design: &Design,
    model: ModelKind,
    prior: &DiscretePrior,
    ratios: &RatioPrior,
    method: EstimationMethod,
    sigma_eta_sq: f64,
) -> Result<CriterionValue> {
    prior.check_model(model)?;
    let mut total = 0.0;
    for &(rho_sq, w) in ratios.atoms() {
        let err = ErrorSpec::new(sigma_eta_sq, rho_sq * sigma_eta_sq)?;
        let v = phi_support(
            design.points(),
            design.weights(),
            model,
            prior,
            method,
            &err,
        );
        if !v.is_finite() {
            return Ok(CriterionValue::DEGENERATE);
        }
        total += w * v.value;
    }
    Ok(CriterionValue { value: total })
}

/// Joint criterion over `θ` atoms and the prior's `ρ²` atoms.
pub fn phi_joint(
    design: &Design,
    model: ModelKind,
    prior: &DiscretePrior,
    method: EstimationMethod,
    sigma_eta_sq: f64,
) -> Result<CriterionValue> {
    let ratios = prior
        .rho_atoms()
        .ok_or_else(|| Error::InvalidPrior("joint criterion needs ρ² atoms".into()))?;
    phi_over_ratios(design, model, prior, ratios, method, sigma_eta_sq)
}

/// Closed-form criterion for equally weighted saturated designs.
///
/// With `a_i = θ2 + x_i`, `c = θ1²θ2²σ²_ε`, `k = θ1²θ2²` and
/// `B = e^{θ2x2}(x0−x1) + e^{θ2x0}(x1−x2) + e^{θ2x1}(x2−x0)` the per-atom
/// log-determinants are
///
/// * MM-ML:  `2 ln θ1 + 2 ln x1 + 2 ln x2 + 2 ln(x2−x1) − ln 4 − Σ ln(σ²_η a_i⁴ + c)`
/// * Emax-ML: `2 ln θ1 + 4 ln θ2 + Σ_{i<j} 2 ln|x_i−x_j| − ln 27 − Σ ln(σ²_η a_i⁴ + c)`
/// * Exp-ML: `2 ln|θ1| + 2 ln|B| − ln 27 − Σ ln(σ²_η e^{2θ2x_i} + c)`
///
/// and the LS variants subtract `Σ ln σ0(x_i)`, i.e. add
/// `Σ [4 ln a_i − ln(a_i⁴ + k)]` (MM, Emax) or `−Σ ln(1 + k e^{−2θ2x_i})` (Exp).
pub fn phi_closed_form(
    design: &Design,
    model: ModelKind,
    prior: &DiscretePrior,
    method: EstimationMethod,
    err: &ErrorSpec,
) -> Result<CriterionValue> {
    let n = model.n_params();
    if !design.is_saturated_equal(n) {
        return Err(Error::Unsupported(format!(
            "closed form needs an equally weighted {n}-point design"
        )));
    }
    prior.check_model(model)?;
    let x = design.points();
    let mut total = 0.0;
    for (theta, w) in prior.atoms() {
        let v = closed_form_atom(x, model, theta, method, err);
        if !v.is_finite() {
            return Ok(CriterionValue::DEGENERATE);
        }
        total += w * v;
    }
    Ok(CriterionValue { value: total })
}

fn closed_form_atom(
    x: &[f64],
    model: ModelKind,
    theta: &ParamVector,
    method: EstimationMethod,
    err: &ErrorSpec,
) -> f64 {
    let (t1, t2) = theta.shape();
    let k = t1 * t1 * t2 * t2;
    let c = k * err.sigma_eps_sq;
    let s_eta = err.sigma_eta_sq;
    let ls = method == EstimationMethod::Lse;
    let hyperbolic_tail = |v: f64| -> f64 {
        let a4 = (t2 + v).powi(4);
        let mut s = -(s_eta * a4 + c).ln();
        if ls {
            s += 4.0 * (t2 + v).ln() - (a4 + k).ln();
        }
        s
    };
    match model {
        ModelKind::MichaelisMenten => {
            let (x1, x2) = (x[0], x[1]);
            2.0 * t1.ln() + 2.0 * x1.ln() + 2.0 * x2.ln() + 2.0 * (x2 - x1).ln() - 4f64.ln()
                + hyperbolic_tail(x1)
                + hyperbolic_tail(x2)
        }
        ModelKind::Emax => {
            let (x0, x1, x2) = (x[0], x[1], x[2]);
            2.0 * t1.ln()
                + 4.0 * t2.ln()
                + 2.0 * (x1 - x0).abs().ln()
                + 2.0 * (x2 - x0).abs().ln()
                + 2.0 * (x2 - x1).abs().ln()
                - 27f64.ln()
                + x.iter().map(|&v| hyperbolic_tail(v)).sum::<f64>()
        }
        ModelKind::Exponential => {
            let (x0, x1, x2) = (x[0], x[1], x[2]);
            let e = |v: f64| (t2 * v).exp();
            let b = e(x2) * (x0 - x1) + e(x0) * (x1 - x2) + e(x1) * (x2 - x0);
            let mut s = 2.0 * t1.abs().ln() + 2.0 * b.abs().ln() - 27f64.ln();
            for &v in x {
                s -= (s_eta * (2.0 * t2 * v).exp() + c).ln();
                if ls {
                    s -= (1.0 + k * (-2.0 * t2 * v).exp()).ln();
                }
            }
            s
        }
    }
}
