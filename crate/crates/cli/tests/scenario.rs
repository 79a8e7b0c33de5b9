use eivdesign::{EstimationMethod, ModelKind};
use eivdesign_cli::scenario::{
    AtomSpec, DesignSpec, ErrorSpecInput, OptimizerSpec, PriorSpec, RatioAtomSpec, Scenario,
    SpaceSpec, TableSpec, Task, VerifySpec,
};
use proptest::option;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6f64..1e6, Just(0.0), Just(1.0 / 3.0), 1e-12f64..1e-6]
}

fn design() -> impl Strategy<Value = DesignSpec> {
    (
        proptest::collection::vec(finite(), 1..5),
        option::of(proptest::collection::vec(finite(), 1..5)),
    )
        .prop_map(|(points, weights)| DesignSpec { points, weights })
}

fn prior() -> impl Strategy<Value = PriorSpec> {
    (
        option::of(proptest::collection::vec((finite(), finite()), 1..4)),
        option::of(1usize..20),
        option::of(proptest::collection::vec(
            (proptest::collection::vec(finite(), 2..4), finite())
                .prop_map(|(theta, weight)| AtomSpec { theta, weight }),
            1..4,
        )),
        option::of(proptest::collection::vec(
            (finite(), finite()).prop_map(|(rho_sq, weight)| RatioAtomSpec { rho_sq, weight }),
            1..4,
        )),
    )
        .prop_map(|(intervals, nu, atoms, rho_atoms)| PriorSpec {
            intervals,
            nu,
            atoms,
            rho_atoms,
        })
}

fn scenario() -> impl Strategy<Value = Scenario> {
    let head = (
        option::of(prop_oneof![
            Just(Task::Solve),
            Just(Task::Verify),
            Just(Task::Efficiency),
            Just(Task::Table),
            Just(Task::Sensitivity)
        ]),
        option::of(prop_oneof![
            Just(ModelKind::MichaelisMenten),
            Just(ModelKind::Emax),
            Just(ModelKind::Exponential)
        ]),
        option::of(prop_oneof![
            Just(EstimationMethod::Mle),
            Just(EstimationMethod::Lse)
        ]),
        option::of("[a-z]{1,8}\\.json".prop_map(std::path::PathBuf::from)),
        option::of((finite(), finite()).prop_map(|(lower, upper)| SpaceSpec { lower, upper })),
        option::of(prior()),
        option::of(
            (
                option::of(finite()),
                option::of(finite()),
                option::of(finite()),
            )
                .prop_map(|(rho_sq, sigma_eta_sq, sigma_eps_sq)| ErrorSpecInput {
                    rho_sq,
                    sigma_eta_sq,
                    sigma_eps_sq,
                }),
        ),
    );
    let tail = (
        option::of(design()),
        proptest::collection::vec(design(), 0..3),
        option::of(design()),
        option::of((option::of(2usize..5000), option::of(finite())).prop_map(
            |(grid_size, tolerance)| VerifySpec {
                grid_size,
                tolerance,
            },
        )),
        option::of((1u8..5).prop_map(|id| TableSpec { id })),
        option::of(
            (option::of(2usize..100), option::of(any::<u64>())).prop_map(|(particles, seed)| {
                OptimizerSpec {
                    particles,
                    iterations: Some(10),
                    inertia: None,
                    cognitive: Some(1.5),
                    social: None,
                    seed,
                }
            }),
        ),
    );
    (head, tail).prop_map(
        |(
            (task, model, method, output, design_space, prior, error),
            (design, candidates, reference, verify, table, optimizer),
        )| Scenario {
            task,
            model,
            method,
            output,
            design_space,
            prior,
            error,
            design,
            candidates,
            reference,
            verify,
            table,
            optimizer,
        },
    )
}

proptest! {
    #[test]
    fn serialised_scenario_parses_back_identically(s in scenario()) {
        let text = s.to_toml();
        prop_assert_eq!(Scenario::parse(&text).unwrap(), s, "{}", text);
    }
}

#[test]
fn shipped_scenarios_round_trip() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    for entry in std::fs::read_dir(dir).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        let s = Scenario::parse(&text).unwrap();
        assert_eq!(Scenario::parse(&s.to_toml()).unwrap(), s);
    }
}
