use proptest::prelude::*;
use stablelim::stats::ks_two_sample;
use stablelim::{
    generate, mixing_profile, normalizer_bn, tail_constants, Innovation, SeedStream, SequenceModel, StableLaw,
};

fn ma(coefficients: Vec<f64>, alpha: f64) -> SequenceModel {
    SequenceModel::moving_average(coefficients, Innovation::Pareto { alpha, p: 0.7 }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn scaled_coefficients_scale_the_sequence(
        coefficients in prop::collection::vec(-2.0f64..2.0, 2..5),
        power in -4i32..=4,
        seed in any::<u64>(),
    ) {
        let s = 2f64.powi(power);
        let base = generate(&ma(coefficients.clone(), 1.2), 200, seed).unwrap();
        let scaled = generate(&ma(coefficients.iter().map(|c| s * c).collect(), 1.2), 200, seed).unwrap();
        for (x, y) in base.iter().zip(&scaled) {
            prop_assert_eq!(s * x, *y);
        }
    }

    #[test]
    fn moving_average_tail_scale_adds_up(
        coefficients in prop::collection::vec(0.1f64..3.0, 2..5),
        alpha in 0.3f64..1.9,
    ) {
        let tc = tail_constants(&ma(coefficients.clone(), alpha)).unwrap();
        let expected: f64 = coefficients.iter().map(|c| c.powf(alpha)).sum();
        prop_assert!((tc.tail_scale / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixing_profile_vanishes_past_the_order(order in 1usize..5) {
        let profile = mixing_profile(&ma(vec![1.0; order + 1], 1.5));
        let mut previous = f64::INFINITY;
        for lag in 1..10 {
            let phi = profile.phi0(lag);
            prop_assert!(phi <= previous);
            if lag > order {
                prop_assert_eq!(phi, 0.0);
            }
            previous = phi;
        }
    }
}

fn lagged_coordinates(model: &SequenceModel, k: usize, lag: usize, reps: usize, seed: u64) -> Vec<Vec<f64>> {
    let stream = SeedStream::new(seed);
    let mut out = vec![Vec::with_capacity(reps); k];
    for r in 0..reps {
        let z = generate(model, k + lag, stream.child(r as u64).seed()).unwrap();
        for (i, col) in out.iter_mut().enumerate() {
            col.push(z[lag + i]);
        }
    }
    out
}

#[test]
fn shifted_blocks_have_the_same_marginals() {
    let models = [
        SequenceModel::iid_pareto(1.5, 0.5).unwrap(),
        ma(vec![1.0, 0.5, -0.8], 1.5),
        SequenceModel::moving_average(
            vec![1.0, 1.0],
            Innovation::Stable {
                law: StableLaw::symmetric(1.2).unwrap(),
            },
        )
        .unwrap(),
    ];
    for (m, model) in models.iter().enumerate() {
        let k = 3;
        let first = lagged_coordinates(model, k, 0, 10_000, 10 + m as u64);
        let shifted = lagged_coordinates(model, k, 5, 10_000, 20 + m as u64);
        for i in 0..k {
            let ks = ks_two_sample(&first[i], &shifted[i]);
            assert!(ks < 0.02, "model {m}, coordinate {i}: KS {ks}");
        }
    }
}

fn mean_exceedance_count(model: &SequenceModel, n: usize, reps: usize, seed: u64) -> f64 {
    let b = normalizer_bn(model, n).unwrap().value;
    let stream = SeedStream::new(seed);
    let total: usize = (0..reps)
        .map(|r| {
            generate(model, n, stream.child(r as u64).seed())
                .unwrap()
                .iter()
                .filter(|x| x.abs() > b)
                .count()
        })
        .sum();
    total as f64 / reps as f64
}

#[test]
fn normalizer_gives_one_exceedance_per_path() {
    let iid = SequenceModel::iid_pareto(1.5, 0.5).unwrap();
    let c = mean_exceedance_count(&iid, 1_000, 1_000, 31);
    assert!((0.9..=1.1).contains(&c), "iid: {c}");
    let half = SequenceModel::iid_pareto(0.5, 1.0).unwrap();
    let c = mean_exceedance_count(&half, 1_000, 1_000, 32);
    assert!((0.9..=1.1).contains(&c), "alpha 0.5: {c}");
    let clustered = SequenceModel::moving_average(vec![1.0, 1.0], Innovation::Pareto { alpha: 1.5, p: 1.0 }).unwrap();
    let c = mean_exceedance_count(&clustered, 10_000, 1_000, 33);
    assert!((0.9..=1.1).contains(&c), "moving average: {c}");
}
