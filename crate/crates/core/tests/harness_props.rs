use proptest::prelude::*;
use stablelim::harness::{canned_experiments, compute_reports, ExperimentConfig, ExperimentKind, HarnessError};
use stablelim::{Innovation, SequenceModel};

fn model() -> impl Strategy<Value = SequenceModel> {
    prop_oneof![
        (0.1f64..1.99, 0.0f64..=1.0).prop_map(|(a, p)| SequenceModel::iid_pareto(a, p).unwrap()),
        (prop::collection::vec(-3.0f64..3.0, 2..5), 0.1f64..1.99)
            .prop_map(|(c, a)| { SequenceModel::moving_average(c, Innovation::Pareto { alpha: a, p: 0.5 }).unwrap() }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn configs_round_trip_through_json(
        which in 0usize..9,
        model in model(),
        seed in any::<u64>(),
        extra in 0usize..1000,
        n in prop::collection::vec(10usize..100_000, 0..4),
        epsilon in prop::collection::vec(1e-3f64..1.0, 0..4),
        t in prop::collection::vec(1e-3f64..10.0, 0..4),
    ) {
        let mut config = canned_experiments()[which].config.clone();
        config.model = model;
        config.seed = seed;
        config.replications += extra;
        config.grid.n = n;
        config.grid.epsilon = epsilon;
        config.grid.t = t;
        let back = ExperimentConfig::from_json(&config.to_json());
        match config.validate() {
            Ok(()) => prop_assert_eq!(back.unwrap(), config),
            Err(_) => {
                let rejected = matches!(back, Err(HarnessError::Config { .. }));
                prop_assert!(rejected);
            }
        }
    }
}

#[test]
fn every_kind_has_a_canned_config() {
    let canned = canned_experiments();
    for kind in ExperimentKind::ALL {
        assert!(canned.iter().any(|c| c.config.kind == kind), "{kind}");
    }
}

#[test]
fn seeds_change_results_and_repeat_exactly() {
    let mut config = canned_experiments()
        .into_iter()
        .find(|c| c.config.kind == ExperimentKind::PoissonCounts)
        .unwrap()
        .config;
    config.grid.n = vec![200];
    config.replications = 600;
    let first = serde_json::to_string(&compute_reports(&config).unwrap()).unwrap();
    assert_eq!(
        first,
        serde_json::to_string(&compute_reports(&config).unwrap()).unwrap()
    );
    config.seed += 1;
    assert_ne!(
        first,
        serde_json::to_string(&compute_reports(&config).unwrap()).unwrap()
    );
}
