//! Bayesian D-optimal saturated designs for nonlinear regression models whose
//! covariate is observed with classical measurement error.
//!
//! Supported models are Michaelis-Menten, Emax and the exponential decay
//! model; estimation is by maximum likelihood or least squares.

pub mod criterion;
pub mod design;
pub mod efficiency;
pub mod equivalence;
pub mod error;
pub mod information;
pub mod linalg;
pub mod models;
pub mod solvers;
pub mod swarm;
pub mod tables;

pub use criterion::{
    local_log_det, phi, phi_closed_form, phi_joint, phi_over_ratios, CriterionValue,
    EstimationMethod,
};
pub use design::{
    saturated_design, uniform_grid_prior, Design, DesignSpace, DiscretePrior, RatioPrior,
};
pub use efficiency::{eff_bayes, eff_bayes_over_ratios, eff_d_local, EfficiencyResult};
pub use equivalence::{
    sensitivity_ls, sensitivity_ml, verify, ConditionKind, Sensitivity, Verdict, VerificationReport,
};
pub use error::{Error, Result};
pub use information::{d_matrix, info_ls, info_ml, InfoMatrix, Moments, SquareRoots};
pub use linalg::{GramFactor, Matrix, Vector};
pub use models::{ErrorSpec, ModelKind, ParamVector, PointTerms};
pub use solvers::{find_roots, solve, RootBracket, Solution};
pub use swarm::{SwarmConfig, SwarmOutcome, DEFAULT_SEED};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
