//! Information matrices for maximum likelihood and least squares estimation.
//!
//! For a design ξ with support `x_i` and weights `ω_i`, and `g_i = ∂m/∂θ`:
//!
//! * `M_ML = Σ ω_i g_i g_iᵀ / σ1(x_i)`
//! * `D_k  = Σ ω_i σ1(x_i)^k g_i g_iᵀ / σ0(x_i)`, `k ∈ {0, 1}`
//! * `M_LS = D_0 D_1⁻¹ D_0`
//!
//! Determinants and inverses are taken from QR factors of the weighted
//! gradient rows ([`SquareRoots`]), never from the assembled matrices.
//!
//! Only the univariate covariate with uncorrelated response/covariate errors
//! is supported.

use crate::design::Design;
use crate::error::{Error, Result};
use crate::linalg::{GramFactor, Matrix, Vector};
use crate::models::{ErrorSpec, ModelKind, ParamVector};

/// Symmetric `(p+1) × (p+1)` information matrix.
pub type InfoMatrix = Matrix;

/// Accumulates `M_ML`, `D_0` and `D_1` in one pass over the support.
#[derive(Clone, Copy, Debug)]
pub struct Moments {
    pub ml: InfoMatrix,
    pub d0: InfoMatrix,
    pub d1: InfoMatrix,
}

impl Moments {
    pub fn compute(
        design: &Design,
        model: ModelKind,
        theta: &ParamVector,
        err: &ErrorSpec,
    ) -> Result<Self> {
        let n = model.n_params();
        let mut ml = Matrix::zeros(n);
        let mut d0 = Matrix::zeros(n);
        let mut d1 = Matrix::zeros(n);
        for (x, w) in design.support() {
            let t = model.local_terms(x, theta, err)?;
            ml.add_outer(w / t.sigma1, &t.grad);
            d0.add_outer(w / t.sigma0, &t.grad);
            d1.add_outer(w * t.sigma1 / t.sigma0, &t.grad);
        }
        Ok(Self { ml, d0, d1 })
    }
}

/// Weighted gradient rows `a_i` with `Σ a_i a_iᵀ` equal to `M_ML`, `D_0`
/// and `D_1`; determinants and inverses go through their QR factors.
#[derive(Clone, Debug)]
pub struct SquareRoots {
    pub ml: Vec<Vector>,
    pub d0: Vec<Vector>,
    pub d1: Vec<Vector>,
}

impl SquareRoots {
    pub fn compute(
        design: &Design,
        model: ModelKind,
        theta: &ParamVector,
        err: &ErrorSpec,
    ) -> Result<Self> {
        Self::from_support(design.support(), model, theta, err)
    }

    pub(crate) fn from_support(
        support: impl Iterator<Item = (f64, f64)>,
        model: ModelKind,
        theta: &ParamVector,
        err: &ErrorSpec,
    ) -> Result<Self> {
        let (lo, _) = support.size_hint();
        let mut out = Self {
            ml: Vec::with_capacity(lo),
            d0: Vec::with_capacity(lo),
            d1: Vec::with_capacity(lo),
        };
        for (x, w) in support {
            let t = model.local_terms(x, theta, err)?;
            out.ml.push(t.grad.scaled((w / t.sigma1).sqrt()));
            out.d0.push(t.grad.scaled((w / t.sigma0).sqrt()));
            out.d1.push(t.grad.scaled((w * t.sigma1 / t.sigma0).sqrt()));
        }
        Ok(out)
    }

    pub fn d1_factor(&self) -> Result<GramFactor> {
        GramFactor::from_rows(&self.d1).map_err(|_| {
            Error::SingularMatrix("D1 is rank-deficient (under-supported design)".into())
        })
    }

    /// `D_0 D_1⁻¹ D_0 = (R_1⁻ᵀ D_0)ᵀ (R_1⁻ᵀ D_0)` with `D_1 = R_1ᵀ R_1`.
    pub fn least_squares(&self) -> Result<InfoMatrix> {
        let f1 = self.d1_factor()?;
        let mut d0 = Matrix::zeros(f1.dim());
        for a in &self.d0 {
            d0.add_outer(1.0, a);
        }
        Ok(f1.sandwich(&d0))
    }

    /// `log det M` for the given method.
    pub fn log_det(&self, ls: bool) -> Result<f64> {
        if ls {
            let d1 = self.d1_factor()?.log_det();
            Ok(2.0 * GramFactor::from_rows(&self.d0)?.log_det() - d1)
        } else {
            Ok(GramFactor::from_rows(&self.ml)?.log_det())
        }
    }
}

/// `M_ML(ξ, θ)`.
pub fn info_ml(
    design: &Design,
    model: ModelKind,
    theta: &ParamVector,
    err: &ErrorSpec,
) -> Result<InfoMatrix> {
    let n = model.n_params();
    let mut m = Matrix::zeros(n);
    for (x, w) in design.support() {
        let t = model.local_terms(x, theta, err)?;
        m.add_outer(w / t.sigma1, &t.grad);
    }
    Ok(m)
}

/// `D_k(ξ, θ)` for `k ∈ {0, 1}`.
pub fn d_matrix(
    design: &Design,
    model: ModelKind,
    theta: &ParamVector,
    err: &ErrorSpec,
    k: usize,
) -> Result<InfoMatrix> {
    if k > 1 {
        return Err(Error::Domain(format!(
            "D-matrix index {k} (expected 0 or 1)"
        )));
    }
    let n = model.n_params();
    let mut m = Matrix::zeros(n);
    for (x, w) in design.support() {
        let t = model.local_terms(x, theta, err)?;
        let factor = if k == 0 { 1.0 } else { t.sigma1 };
        m.add_outer(w * factor / t.sigma0, &t.grad);
    }
    Ok(m)
}

/// `M_LS(ξ, θ) = D_0 D_1⁻¹ D_0`.
pub fn info_ls(
    design: &Design,
    model: ModelKind,
    theta: &ParamVector,
    err: &ErrorSpec,
) -> Result<InfoMatrix> {
    SquareRoots::compute(design, model, theta, err)?.least_squares()
}

/// `log det M`; singular or indefinite input is an error.
pub fn log_det(m: &InfoMatrix) -> Result<f64> {
    m.log_det()
}
