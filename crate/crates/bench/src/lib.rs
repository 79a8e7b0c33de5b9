//! Fixtures shared by the benchmarks.

use eivdesign::tables::{exp_prior, mm_prior, MM_X_UPPER};
use eivdesign::{Design, DiscretePrior, ErrorSpec, ModelKind, RatioPrior};

pub struct Fixture {
    pub model: ModelKind,
    pub prior: DiscretePrior,
    pub design: Design,
    pub err: ErrorSpec,
    pub x_upper: f64,
}

/// Michaelis-Menten, ν = 11 grid prior, `ρ² = 1`.
pub fn michaelis_menten() -> Fixture {
    Fixture {
        model: ModelKind::MichaelisMenten,
        prior: mm_prior(11).expect("preset prior"),
        design: Design::equal_weights(vec![5.82, MM_X_UPPER]).expect("preset design"),
        err: ErrorSpec::from_ratio(1.0).expect("ratio"),
        x_upper: MM_X_UPPER,
    }
}

/// Exponential, 121-atom prior, `ρ² = 1`.
pub fn exponential() -> Fixture {
    Fixture {
        model: ModelKind::Exponential,
        prior: exp_prior().expect("preset prior"),
        design: Design::equal_weights(vec![6.79, 16.33, 35.0]).expect("preset design"),
        err: ErrorSpec::from_ratio(1.0).expect("ratio"),
        x_upper: 35.0,
    }
}

pub fn unit_ratio() -> RatioPrior {
    RatioPrior::point(1.0).expect("ratio")
}
