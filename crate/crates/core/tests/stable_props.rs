use proptest::prelude::*;
use stablelim::stats::{ks_two_sample, mean_stderr};
use stablelim::{
    levy_tail_mass, sample_stable, simulate_levy_path, stable_cf, Compensation, LevySmallJumpPolicy, SeedStream,
    StableLaw,
};

fn law() -> impl Strategy<Value = StableLaw> {
    (0.2f64..1.95, 0.0f64..=1.0).prop_map(|(a, p)| StableLaw::one_dim(a, p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cf_bounded_and_one_at_origin(law in law(), u in -50.0f64..50.0) {
        prop_assert_eq!(stable_cf(&law, &[0.0]).unwrap().re, 1.0);
        prop_assert_eq!(stable_cf(&law, &[0.0]).unwrap().im, 0.0);
        prop_assert!(stable_cf(&law, &[u]).unwrap().norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn cf_conjugate_symmetric_for_symmetric_laws(alpha in 0.2f64..1.95, u in -50.0f64..50.0) {
        let law = StableLaw::symmetric(alpha).unwrap();
        let plus = stable_cf(&law, &[u]).unwrap();
        let minus = stable_cf(&law, &[-u]).unwrap();
        prop_assert!((minus - plus.conj()).norm() <= 1e-12);
    }

    #[test]
    fn tail_mass_scales_and_decreases(law in law(), r in 0.01f64..100.0, s in 1.001f64..100.0) {
        let alpha = law.alpha();
        let base = levy_tail_mass(&law, r, None).unwrap();
        let scaled = levy_tail_mass(&law, r * s, None).unwrap();
        prop_assert!((scaled / (s.powf(-alpha) * base) - 1.0).abs() <= 1e-12);
        prop_assert!(scaled < base);
    }
}

#[test]
fn normalized_sums_keep_the_law() {
    let draws = 100_000;
    let terms = 100;
    for alpha in [0.8, 1.5] {
        let law = StableLaw::symmetric(alpha).unwrap();
        let raw = sample_stable(&law, draws * terms, 1).unwrap();
        let scale = (terms as f64).powf(-1.0 / alpha);
        let sums: Vec<f64> = raw.chunks(terms).map(|c| scale * c.iter().sum::<f64>()).collect();
        let fresh = sample_stable(&law, draws, 2).unwrap();
        let ks = ks_two_sample(&sums, &fresh);
        assert!(ks < 0.01, "alpha {alpha}: KS {ks}");
    }
}

#[test]
fn levy_jump_counts_are_independent_poisson() {
    let law = StableLaw::symmetric(1.5).unwrap();
    let policy = LevySmallJumpPolicy::new(1.0, Compensation::DriftCompensated, 1).unwrap();
    let stream = SeedStream::new(3);
    let reps = 10_000;
    let mut early = Vec::with_capacity(reps);
    let mut late = Vec::with_capacity(reps);
    for r in 0..reps {
        let path = simulate_levy_path(&law, 1.0, &policy, stream.child(r as u64).seed()).unwrap();
        let big: Vec<f64> = path
            .jumps()
            .into_iter()
            .filter(|(_, x)| x[0].abs() > 1.0)
            .map(|(t, _)| t)
            .collect();
        early.push(big.iter().filter(|&&t| t <= 0.5).count() as f64);
        late.push(big.iter().filter(|&&t| t > 0.5).count() as f64);
    }
    let expected = 0.5 * levy_tail_mass(&law, 1.0, None).unwrap();
    assert!((expected - 0.5).abs() < 1e-12);
    for counts in [&early, &late] {
        let (mean, se) = mean_stderr(counts);
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        assert!((mean - expected).abs() <= 3.0 * se, "mean {mean} ± {se}");
        assert!((0.9..=1.1).contains(&(var / mean)), "dispersion {}", var / mean);
    }
    let (me, _) = mean_stderr(&early);
    let (ml, _) = mean_stderr(&late);
    let cov = early.iter().zip(&late).map(|(a, b)| (a - me) * (b - ml)).sum::<f64>() / (reps - 1) as f64;
    let corr = cov / (me * ml).sqrt();
    assert!(corr.abs() < 4.0 / (reps as f64).sqrt(), "correlation {corr}");
}
