//! Sensitivity functions and equivalence-theorem checks.
//!
//! ML: `d(x) = Σ_j π_j g(x)ᵀ M_ML⁻¹ g(x) / σ1(x)`; a design is Bayesian
//! D-optimal iff `d(x) ≤ p + 1` on the whole design space.
//!
//! LS: `d(x) = Σ_j π_j [2 d_0(x) − σ1(x) d_1(x)]` with
//! `d_k = g(x)ᵀ D_k⁻¹ g(x) / σ0(x)`. The bound is necessary only, because the
//! LS criterion is not concave in the design.

use serde::Serialize;

use crate::criterion::EstimationMethod;
use crate::design::{Design, DesignSpace, DiscretePrior, RatioPrior};
use crate::error::{Error, Result};
use crate::information::SquareRoots;
use crate::linalg::GramFactor;
use crate::models::{ErrorSpec, ModelKind, ParamVector};

pub const DEFAULT_GRID_SIZE: usize = 2001;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
struct AtomInverse {
    theta: ParamVector,
    weight: f64,
    err: ErrorSpec,
    /// Factor of `M_ML` (ML) or `D_0` (LS).
    first: GramFactor,
    /// Factor of `D_1` (LS only).
    second: Option<GramFactor>,
}

/// Sensitivity function of a fixed design, with per-atom inverses cached.
#[derive(Clone, Debug)]
pub struct Sensitivity {
    model: ModelKind,
    method: EstimationMethod,
    atoms: Vec<AtomInverse>,
}

impl Sensitivity {
    pub fn new(
        design: &Design,
        model: ModelKind,
        prior: &DiscretePrior,
        method: EstimationMethod,
        err: &ErrorSpec,
    ) -> Result<Self> {
        Self::build(design, model, prior, &[(*err, 1.0)], method)
    }

    /// Sensitivity integrated over a ratio prior as well.
    pub fn with_ratios(
        design: &Design,
        model: ModelKind,
        prior: &DiscretePrior,
        ratios: &RatioPrior,
        method: EstimationMethod,
        sigma_eta_sq: f64,
    ) -> Result<Self> {
        let errs = ratios
            .atoms()
            .iter()
            .map(|&(r, w)| Ok((ErrorSpec::new(sigma_eta_sq, r * sigma_eta_sq)?, w)))
            .collect::<Result<Vec<_>>>()?;
        Self::build(design, model, prior, &errs, method)
    }

    fn build(
        design: &Design,
        model: ModelKind,
        prior: &DiscretePrior,
        errs: &[(ErrorSpec, f64)],
        method: EstimationMethod,
    ) -> Result<Self> {
        prior.check_model(model)?;
        let mut atoms = Vec::with_capacity(prior.atoms().len() * errs.len());
        for &(err, wr) in errs {
            for (i, (theta, w)) in prior.atoms().iter().enumerate() {
                let roots = SquareRoots::compute(design, model, theta, &err)?;
                let singular = |what: &str| {
                    Error::SingularMatrix(format!(
                        "{what} of prior atom {i} θ = {:?} (ρ² = {})",
                        theta.as_slice(),
                        err.rho_sq()
                    ))
                };
                let (first, second) = match method {
                    EstimationMethod::Mle => (
                        GramFactor::from_rows(&roots.ml).map_err(|_| singular("M_ML"))?,
                        None,
                    ),
                    EstimationMethod::Lse => (
                        GramFactor::from_rows(&roots.d0).map_err(|_| singular("D0"))?,
                        Some(GramFactor::from_rows(&roots.d1).map_err(|_| singular("D1"))?),
                    ),
                };
                atoms.push(AtomInverse {
                    theta: *theta,
                    weight: w * wr,
                    err,
                    first,
                    second,
                });
            }
        }
        Ok(Self {
            model,
            method,
            atoms,
        })
    }

    pub fn bound(&self) -> f64 {
        self.model.n_params() as f64
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let mut total = 0.0;
        for a in &self.atoms {
            let t = self.model.local_terms(x, &a.theta, &a.err)?;
            let q0 = a.first.inverse_quad_form(&t.grad);
            let v = match &a.second {
                None => q0 / t.sigma1,
                Some(d1) => {
                    let q1 = d1.inverse_quad_form(&t.grad);
                    (2.0 * q0 - t.sigma1 * q1) / t.sigma0
                }
            };
            total += a.weight * v;
        }
        Ok(total)
    }

    /// `(x, d(x))` pairs on the given grid.
    pub fn trace(&self, xs: &[f64]) -> Result<Vec<(f64, f64)>> {
        xs.iter().map(|&x| Ok((x, self.eval(x)?))).collect()
    }

    pub fn method(&self) -> EstimationMethod {
        self.method
    }
}

/// ML sensitivity `Σ_j π_j gᵀ M_ML⁻¹ g / σ1` at `x`.
pub fn sensitivity_ml(
    x: f64,
    design: &Design,
    model: ModelKind,
    prior: &DiscretePrior,
    err: &ErrorSpec,
) -> Result<f64> {
    Sensitivity::new(design, model, prior, EstimationMethod::Mle, err)?.eval(x)
}

/// LS sensitivity `Σ_j π_j (2 d_0 − σ1 d_1)` at `x`.
pub fn sensitivity_ls(
    x: f64,
    design: &Design,
    model: ModelKind,
    prior: &DiscretePrior,
    err: &ErrorSpec,
) -> Result<f64> {
    Sensitivity::new(design, model, prior, EstimationMethod::Lse, err)?.eval(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    OptimalityConsistent,
    Violated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ConditionKind {
    /// ML: the bound characterises optimality.
    NecessaryAndSufficient,
    /// LS: a violation rules optimality out, a pass proves nothing.
    NecessaryOnly,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub sup_sensitivity: f64,
    pub bound: f64,
    pub grid_size: usize,
    pub argmax_x: f64,
    /// `|d(x_i) − (p + 1)|` at each support point.
    pub support_gaps: Vec<f64>,
    pub verdict: Verdict,
    pub method: EstimationMethod,
    pub condition: ConditionKind,
    pub tolerance: f64,
}

impl VerificationReport {
    pub fn max_support_gap(&self) -> f64 {
        self.support_gaps.iter().copied().fold(0.0, f64::max)
    }
}

/// Evaluates the sensitivity on `grid_size` equally spaced points of `space`
/// plus the support points and compares its supremum with `p + 1`.
#[allow(clippy::too_many_arguments)]
pub fn verify(
    design: &Design,
    model: ModelKind,
    prior: &DiscretePrior,
    method: EstimationMethod,
    err: &ErrorSpec,
    space: &DesignSpace,
    grid_size: usize,
    tol: f64,
) -> Result<VerificationReport> {
    let s = Sensitivity::new(design, model, prior, method, err)?;
    report(&s, design, space, grid_size, tol)
}

/// [`verify`] for a sensitivity built elsewhere (e.g. with a ratio prior).
pub fn report(
    s: &Sensitivity,
    design: &Design,
    space: &DesignSpace,
    grid_size: usize,
    tol: f64,
) -> Result<VerificationReport> {
    let bound = s.bound();
    let mut xs = space.grid(grid_size.max(2));
    xs.extend_from_slice(design.points());
    let mut sup = f64::NEG_INFINITY;
    let mut argmax = xs[0];
    for &x in &xs {
        let v = s.eval(x)?;
        if v > sup {
            sup = v;
            argmax = x;
        }
    }
    let support_gaps = design
        .points()
        .iter()
        .map(|&x| Ok((s.eval(x)? - bound).abs()))
        .collect::<Result<Vec<_>>>()?;
    let verdict = if sup > bound + tol {
        Verdict::Violated
    } else {
        Verdict::OptimalityConsistent
    };
    Ok(VerificationReport {
        sup_sensitivity: sup,
        bound,
        grid_size,
        argmax_x: argmax,
        support_gaps,
        verdict,
        method: s.method(),
        condition: match s.method() {
            EstimationMethod::Mle => ConditionKind::NecessaryAndSufficient,
            EstimationMethod::Lse => ConditionKind::NecessaryOnly,
        },
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_identity_point_prior() {
        let model = ModelKind::MichaelisMenten;
        let prior = DiscretePrior::point(ParamVector::new(&[16.0, 3.5]).unwrap());
        let d = Design::equal_weights(vec![4.0, 80.0]).unwrap();
        let err = ErrorSpec::from_ratio(1.0).unwrap();
        let s = Sensitivity::new(&d, model, &prior, EstimationMethod::Mle, &err).unwrap();
        let total: f64 = d.support().map(|(x, w)| w * s.eval(x).unwrap()).sum();
        assert!((total - 2.0).abs() < 1e-12);
    }

    #[test]
    fn singular_design_names_atom() {
        let model = ModelKind::Emax;
        let prior = DiscretePrior::point(ParamVector::new(&[1.0, 16.0, 3.5]).unwrap());
        let d = Design::equal_weights(vec![0.0, 80.0]).unwrap();
        let err = ErrorSpec::from_ratio(1.0).unwrap();
        match Sensitivity::new(&d, model, &prior, EstimationMethod::Lse, &err) {
            Err(Error::SingularMatrix(msg)) => assert!(msg.contains("atom 0")),
            other => panic!("expected singular matrix, got {other:?}"),
        }
    }

    #[test]
    fn ls_report_is_marked_necessary_only() {
        let model = ModelKind::MichaelisMenten;
        let prior = DiscretePrior::point(ParamVector::new(&[16.0, 3.5]).unwrap());
        let d = Design::equal_weights(vec![4.0, 80.0]).unwrap();
        let err = ErrorSpec::from_ratio(1.0).unwrap();
        let space = DesignSpace::up_to(80.0).unwrap();
        let r = verify(
            &d,
            model,
            &prior,
            EstimationMethod::Lse,
            &err,
            &space,
            101,
            1e-6,
        )
        .unwrap();
        assert_eq!(r.condition, ConditionKind::NecessaryOnly);
        assert_eq!(r.support_gaps.len(), 2);
    }
}
