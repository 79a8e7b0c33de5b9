//! Saturated Bayesian D-optimal designs.
//!
//! For the Michaelis-Menten, Emax and exponential (ML) cases the design is
//! pinned up to one interior point `x1*`, which solves a prior-averaged
//! first-order condition on `(0, x_u)`. For exponential LS only `x_u` is
//! known and the two remaining points come from the particle swarm.
//!
//! Every root function depends on the errors only through
//! `ρ² = σ²_ε / σ²_η`; a [`RatioPrior`] with several atoms gives the joint
//! criterion over `(θ, ρ²)`.

use serde::Serialize;

use crate::criterion::{phi_support, EstimationMethod};
use crate::design::{Design, DiscretePrior, RatioPrior};
use crate::error::{Error, Result};
use crate::models::{ErrorSpec, ModelKind};
use crate::swarm::{self, SwarmConfig, SwarmOutcome};

/// Default number of scan points for sign changes.
pub const DEFAULT_SCAN_POINTS: usize = 2001;
/// Endpoint offset, relative to `x_u`, of the scan interval.
pub const ENDPOINT_OFFSET: f64 = 1e-8;
/// Residual tolerance for refined roots.
pub const ROOT_TOL: f64 = 1e-12;

/// An interval on which a continuous function changes sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl RootBracket {
    pub fn new(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<Self> {
        if !(lo < hi) || !(f_lo * f_hi < 0.0) {
            return Err(Error::NoRootFound { lo, hi });
        }
        Ok(Self { lo, hi, f_lo, f_hi })
    }

    /// Secant/bisection hybrid: every pass tries a secant step inside the
    /// bracket and then bisects, so the width at least halves per pass.
    pub fn refine<F: Fn(f64) -> f64>(mut self, f: F, tol: f64, width_tol: f64) -> f64 {
        for _ in 0..400 {
            let best = if self.f_lo.abs() <= self.f_hi.abs() {
                (self.lo, self.f_lo)
            } else {
                (self.hi, self.f_hi)
            };
            if best.1 == 0.0 || (self.hi - self.lo <= width_tol && best.1.abs() < tol) {
                return best.0;
            }
            let mid = 0.5 * (self.lo + self.hi);
            if mid <= self.lo || mid >= self.hi {
                return best.0;
            }
            let secant = self.hi - self.f_hi * (self.hi - self.lo) / (self.f_hi - self.f_lo);
            if secant > self.lo && secant < self.hi {
                self.shrink(secant, f(secant));
                if self.f_lo == 0.0 || self.f_hi == 0.0 {
                    continue;
                }
            }
            let mid = 0.5 * (self.lo + self.hi);
            if mid > self.lo && mid < self.hi {
                self.shrink(mid, f(mid));
            }
        }
        if self.f_lo.abs() <= self.f_hi.abs() {
            self.lo
        } else {
            self.hi
        }
    }

    fn shrink(&mut self, x: f64, fx: f64) {
        if fx == 0.0 {
            self.lo = x;
            self.hi = x;
            self.f_lo = 0.0;
            self.f_hi = 0.0;
        } else if fx.signum() == self.f_lo.signum() {
            self.lo = x;
            self.f_lo = fx;
        } else {
            self.hi = x;
            self.f_hi = fx;
        }
    }
}

/// All roots of `f` on `[a, b]` detectable by a uniform sign-change scan,
/// refined to `|f| < tol` and width below `1e-10 (b − a)`, ascending.
pub fn find_roots<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    scan_points: usize,
    tol: f64,
) -> Vec<f64> {
    let n = scan_points.max(2);
    let width_tol = 1e-10 * (b - a);
    let xs = crate::design::linspace(a, b, n);
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 0..n {
        if fs[i] == 0.0 {
            roots.push(xs[i]);
            continue;
        }
        if i + 1 < n && fs[i].is_finite() && fs[i + 1].is_finite() && fs[i] * fs[i + 1] < 0.0 {
            let bracket = RootBracket {
                lo: xs[i],
                hi: xs[i + 1],
                f_lo: fs[i],
                f_hi: fs[i + 1],
            };
            roots.push(bracket.refine(&f, tol, width_tol));
        }
    }
    roots
}

fn check_interior(x1: f64, x_u: f64) -> Result<()> {
    if !(x1 > 0.0 && x1 < x_u) {
        return Err(Error::Domain(format!("x1 = {x1} outside (0, {x_u})")));
    }
    Ok(())
}

fn mm_emax_integrand(x1: f64, x_u: f64, t1: f64, t2: f64, rho_sq: f64, ls: bool) -> f64 {
    let a = t2 + x1;
    let a3 = a * a * a;
    let a4 = a3 * a;
    let k = t1 * t1 * t2 * t2;
    let mut v = 1.0 / x1 - 1.0 / (x_u - x1) - 2.0 * a3 / (a4 + k * rho_sq);
    if ls {
        v += 2.0 * k / (a * (a4 + k));
    }
    v
}

fn exp_ml_integrand(x1: f64, x_u: f64, t1: f64, t2: f64, rho_sq: f64) -> f64 {
    let num = 1.0 - (t2 * x_u).exp() + t2 * x_u * (t2 * x1).exp();
    let den = x1 - x_u + x_u * (t2 * x1).exp() - x1 * (t2 * x_u).exp();
    let k = t1 * t1 * t2 * t2;
    // θ2 e^{2θ2x1} / (e^{2θ2x1} + kρ²), rewritten to avoid overflow
    num / den - t2 / (1.0 + k * rho_sq * (-2.0 * t2 * x1).exp())
}

fn averaged<G: Fn(f64, f64, f64) -> f64>(prior: &DiscretePrior, ratios: &RatioPrior, g: G) -> f64 {
    let mut total = 0.0;
    for &(rho_sq, wr) in ratios.atoms() {
        for (theta, w) in prior.atoms() {
            let (t1, t2) = theta.shape();
            total += wr * w * g(t1, t2, rho_sq);
        }
    }
    total
}

/// Prior-averaged first-order condition for MM/Emax under ML.
pub fn root_fn_mm_ml(x1: f64, prior: &DiscretePrior, x_u: f64, ratios: &RatioPrior) -> Result<f64> {
    check_interior(x1, x_u)?;
    Ok(averaged(prior, ratios, |t1, t2, r| {
        mm_emax_integrand(x1, x_u, t1, t2, r, false)
    }))
}

/// Prior-averaged first-order condition for MM/Emax under LS.
pub fn root_fn_mm_ls(x1: f64, prior: &DiscretePrior, x_u: f64, ratios: &RatioPrior) -> Result<f64> {
    check_interior(x1, x_u)?;
    Ok(averaged(prior, ratios, |t1, t2, r| {
        mm_emax_integrand(x1, x_u, t1, t2, r, true)
    }))
}

/// Prior-averaged first-order condition for the exponential model under ML.
pub fn root_fn_exp_ml(
    x1: f64,
    prior: &DiscretePrior,
    x_u: f64,
    ratios: &RatioPrior,
) -> Result<f64> {
    check_interior(x1, x_u)?;
    Ok(averaged(prior, ratios, |t1, t2, r| {
        exp_ml_integrand(x1, x_u, t1, t2, r)
    }))
}

/// A solved saturated design with the numbers that produced it.
#[derive(Clone, Debug, Serialize)]
pub struct Solution {
    pub design: Design,
    /// Criterion value of `design` (prior- and ratio-averaged).
    pub criterion: f64,
    /// Every root of the first-order condition that was tried.
    pub roots: Vec<f64>,
    /// Swarm diagnostics for designs found numerically.
    pub swarm: Option<SwarmOutcome>,
}

fn ratio_criterion(
    points: &[f64],
    model: ModelKind,
    prior: &DiscretePrior,
    ratios: &RatioPrior,
    method: EstimationMethod,
) -> f64 {
    let n = points.len();
    let weights = vec![1.0 / n as f64; n];
    let mut total = 0.0;
    for &(rho_sq, wr) in ratios.atoms() {
        let err = ErrorSpec {
            sigma_eta_sq: 1.0,
            sigma_eps_sq: rho_sq,
        };
        let v = phi_support(points, &weights, model, prior, method, &err).value;
        if !v.is_finite() {
            return f64::NEG_INFINITY;
        }
        total += wr * v;
    }
    total
}

fn check_x_upper(x_u: f64) -> Result<()> {
    if !(x_u > 0.0) || !x_u.is_finite() {
        return Err(Error::InvalidDesign(format!(
            "x_u = {x_u} must be positive"
        )));
    }
    Ok(())
}

fn solve_by_roots<F: Fn(f64) -> f64>(
    root_fn: F,
    layout: impl Fn(f64) -> Vec<f64>,
    model: ModelKind,
    prior: &DiscretePrior,
    x_u: f64,
    ratios: &RatioPrior,
    method: EstimationMethod,
) -> Result<Solution> {
    let delta = ENDPOINT_OFFSET * x_u;
    let (lo, hi) = (delta, x_u - delta);
    let roots = find_roots(root_fn, lo, hi, DEFAULT_SCAN_POINTS, ROOT_TOL);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for &r in &roots {
        let points = layout(r);
        let value = ratio_criterion(&points, model, prior, ratios, method);
        if value.is_finite() && best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, points));
        }
    }
    let (criterion, points) = best.ok_or(Error::NoRootFound { lo, hi })?;
    Ok(Solution {
        design: Design::equal_weights(points)?,
        criterion,
        roots,
        swarm: None,
    })
}

fn two_or_three_points(model: ModelKind, x_u: f64) -> impl Fn(f64) -> Vec<f64> {
    move |x1| match model {
        ModelKind::MichaelisMenten => vec![x1, x_u],
        _ => vec![0.0, x1, x_u],
    }
}

fn require_hyperbolic(model: ModelKind) -> Result<()> {
    match model {
        ModelKind::MichaelisMenten | ModelKind::Emax => Ok(()),
        ModelKind::Exponential => Err(Error::Unsupported(
            "this solver covers Michaelis-Menten and Emax only".into(),
        )),
    }
}

/// ML design: `{x1*, x_u}` for MM, `{0, x1*, x_u}` for Emax.
pub fn solve_mm_emax_ml(
    prior: &DiscretePrior,
    x_u: f64,
    ratios: &RatioPrior,
    model: ModelKind,
) -> Result<Solution> {
    require_hyperbolic(model)?;
    check_x_upper(x_u)?;
    prior.check_model(model)?;
    let f = |x: f64| {
        averaged(prior, ratios, |t1, t2, r| {
            mm_emax_integrand(x, x_u, t1, t2, r, false)
        })
    };
    solve_by_roots(
        f,
        two_or_three_points(model, x_u),
        model,
        prior,
        x_u,
        ratios,
        EstimationMethod::Mle,
    )
}

/// LS design, same support layout as [`solve_mm_emax_ml`].
///
/// For Emax the LS criterion is not monotone in the lower point, so
/// `{0, x1*, x_u}` is the best design of that layout but can lose to designs
/// with an interior lower point; check with [`crate::verify`].
pub fn solve_mm_emax_ls(
    prior: &DiscretePrior,
    x_u: f64,
    ratios: &RatioPrior,
    model: ModelKind,
) -> Result<Solution> {
    require_hyperbolic(model)?;
    check_x_upper(x_u)?;
    prior.check_model(model)?;
    let f = |x: f64| {
        averaged(prior, ratios, |t1, t2, r| {
            mm_emax_integrand(x, x_u, t1, t2, r, true)
        })
    };
    solve_by_roots(
        f,
        two_or_three_points(model, x_u),
        model,
        prior,
        x_u,
        ratios,
        EstimationMethod::Lse,
    )
}

/// Exponential ML design `{0, x1*, x_u}`.
pub fn solve_exp_ml(prior: &DiscretePrior, x_u: f64, ratios: &RatioPrior) -> Result<Solution> {
    check_x_upper(x_u)?;
    let model = ModelKind::Exponential;
    prior.check_model(model)?;
    let f = |x: f64| {
        averaged(prior, ratios, |t1, t2, r| {
            exp_ml_integrand(x, x_u, t1, t2, r)
        })
    };
    solve_by_roots(
        f,
        two_or_three_points(model, x_u),
        model,
        prior,
        x_u,
        ratios,
        EstimationMethod::Mle,
    )
}

/// Exponential LS design `{x0*, x1*, x_u}`; `(x0*, x1*)` maximise the
/// criterion over `0 ≤ x0 < x1 < x_u` via the particle swarm.
///
/// Only the seed and swarm constants of `config` are used; the box and the
/// ordering constraint are set here.
pub fn solve_exp_ls(
    prior: &DiscretePrior,
    x_u: f64,
    ratios: &RatioPrior,
    config: &SwarmConfig,
) -> Result<Solution> {
    check_x_upper(x_u)?;
    let model = ModelKind::Exponential;
    prior.check_model(model)?;
    let mut cfg = config.clone();
    cfg.bounds = vec![(0.0, x_u), (0.0, x_u)];
    cfg.ordering_constraint = true;
    let objective = |z: &[f64]| {
        if x_u - z[1] <= crate::design::DUPLICATE_TOL {
            return f64::NEG_INFINITY;
        }
        ratio_criterion(
            &[z[0], z[1], x_u],
            model,
            prior,
            ratios,
            EstimationMethod::Lse,
        )
    };
    let outcome = swarm::maximize(objective, &cfg)?;
    if !outcome.value.is_finite() {
        return Err(Error::NonFiniteCriterion(
            "particle swarm found no non-degenerate design".into(),
        ));
    }
    let design = Design::equal_weights(vec![outcome.best[0], outcome.best[1], x_u])?;
    Ok(Solution {
        design,
        criterion: outcome.value,
        roots: Vec::new(),
        swarm: Some(outcome),
    })
}

/// Dispatches to the solver matching `(model, method)`.
pub fn solve(
    model: ModelKind,
    method: EstimationMethod,
    prior: &DiscretePrior,
    x_u: f64,
    ratios: &RatioPrior,
    config: &SwarmConfig,
) -> Result<Solution> {
    match (model, method) {
        (ModelKind::Exponential, EstimationMethod::Mle) => solve_exp_ml(prior, x_u, ratios),
        (ModelKind::Exponential, EstimationMethod::Lse) => solve_exp_ls(prior, x_u, ratios, config),
        (_, EstimationMethod::Mle) => solve_mm_emax_ml(prior, x_u, ratios, model),
        (_, EstimationMethod::Lse) => solve_mm_emax_ls(prior, x_u, ratios, model),
    }
}
