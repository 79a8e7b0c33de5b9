//! Bayesian and local D-efficiencies, computed from log-scale differences.

use serde::Serialize;

use crate::criterion::{local_log_det, phi, phi_over_ratios, CriterionValue, EstimationMethod};
use crate::design::{Design, DiscretePrior, RatioPrior};
use crate::error::{Error, Result};
use crate::models::{ErrorSpec, ModelKind, ParamVector};

#[derive(Clone, Debug, Serialize)]
pub struct EfficiencyResult {
    /// Fraction; above 1 when the reference is not optimal.
    pub value: f64,
    pub reference_design: Design,
}

impl EfficiencyResult {
    pub fn percent(&self) -> f64 {
        100.0 * self.value
    }
}

/// `exp((a − b) / n)` with both criteria required finite.
pub fn from_log_gap(a: f64, b: f64, n_params: usize) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::NonFiniteCriterion(format!("criteria {a} and {b}")));
    }
    Ok(((a - b) / n_params as f64).exp())
}

fn finite(v: CriterionValue, which: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v.value)
    } else {
        Err(Error::NonFiniteCriterion(format!(
            "{which} design is degenerate"
        )))
    }
}

/// `exp((Φ_π(ξ) − Φ_π(ξ_ref)) / (p + 1))`.
pub fn eff_bayes(
    design: &Design,
    reference: &Design,
    model: ModelKind,
    prior: &DiscretePrior,
    method: EstimationMethod,
    err: &ErrorSpec,
) -> Result<EfficiencyResult> {
    let a = finite(phi(design, model, prior, method, err)?, "candidate")?;
    let b = finite(phi(reference, model, prior, method, err)?, "reference")?;
    Ok(EfficiencyResult {
        value: from_log_gap(a, b, model.n_params())?,
        reference_design: reference.clone(),
    })
}

/// [`eff_bayes`] with the criterion averaged over a `ρ²` prior.
pub fn eff_bayes_over_ratios(
    design: &Design,
    reference: &Design,
    model: ModelKind,
    prior: &DiscretePrior,
    ratios: &RatioPrior,
    method: EstimationMethod,
) -> Result<EfficiencyResult> {
    let a = finite(
        phi_over_ratios(design, model, prior, ratios, method, 1.0)?,
        "candidate",
    )?;
    let b = finite(
        phi_over_ratios(reference, model, prior, ratios, method, 1.0)?,
        "reference",
    )?;
    Ok(EfficiencyResult {
        value: from_log_gap(a, b, model.n_params())?,
        reference_design: reference.clone(),
    })
}

/// `(det M(ξ, θ) / det M(ξ*, θ))^{1/(p+1)}`.
pub fn eff_d_local(
    design: &Design,
    theta: &ParamVector,
    optimum: &Design,
    model: ModelKind,
    method: EstimationMethod,
    err: &ErrorSpec,
) -> Result<EfficiencyResult> {
    model.check_params(theta)?;
    let a = local_log_det(design, model, theta, method, err)?;
    let b = local_log_det(optimum, model, theta, method, err)?;
    Ok(EfficiencyResult {
        value: from_log_gap(a, b, model.n_params())?,
        reference_design: optimum.clone(),
    })
}
