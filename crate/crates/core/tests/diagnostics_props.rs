use proptest::prelude::*;
use stablelim::diagnostics::{estimate_asneg, estimate_dprime, estimate_watson, exin_identity_check, maxima_cdf};
use stablelim::{BlockSchedule, Innovation, SequenceModel};

fn iid() -> SequenceModel {
    SequenceModel::iid_pareto(1.5, 0.5).unwrap()
}

fn ma() -> SequenceModel {
    SequenceModel::moving_average(vec![1.0, 1.0], Innovation::Pareto { alpha: 1.5, p: 1.0 }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn maxima_cdf_monotone_under_common_numbers(
        t in 0.1f64..2.0,
        dt in 0.01f64..1.0,
        eps in 0.3f64..2.0,
        de in 0.01f64..1.0,
        seed in any::<u64>(),
    ) {
        let at = |t: f64, e: f64| maxima_cdf(&iid(), 500, t, e, 200, seed).unwrap().estimate;
        prop_assert!(at(t + dt, eps) <= at(t, eps));
        prop_assert!(at(t, eps + de) >= at(t, eps));
    }

    #[test]
    fn exin_identity_exact(pi in 0.001f64..0.999, n in 1usize..=12) {
        let table = exin_identity_check(pi, n).unwrap();
        prop_assert!(table.max_error() <= 1e-12, "{}", table.max_error());
    }
}

#[test]
fn reports_reproduce_across_thread_counts() {
    let compute = || {
        vec![
            estimate_watson(&ma(), 2_000, 2, 1.0, 50, 5).unwrap(),
            estimate_asneg(&iid(), 2_000, 1.0, &BlockSchedule::default(), 50, 6).unwrap(),
            estimate_dprime(&iid(), 2_000, 10, 1.0, 50, 7).unwrap(),
            maxima_cdf(&ma(), 2_000, 1.0, 1.0, 200, 8).unwrap(),
        ]
    };
    let mut runs = Vec::new();
    for threads in [1, 3] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        runs.push(serde_json::to_string(&pool.install(compute)).unwrap());
    }
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], serde_json::to_string(&compute()).unwrap());
}

#[test]
fn dprime_matches_independence_and_decreases_in_k() {
    let mut previous = f64::INFINITY;
    for k in [4, 8, 16] {
        let r = estimate_dprime(&iid(), 1_000, k, 1.0, 1_000, 9).unwrap();
        let target = 1.0 / k as f64;
        assert!(
            (r.estimate - target).abs() <= 3.0 * r.stderr,
            "k={k}: {} ± {}",
            r.estimate,
            r.stderr
        );
        assert!(r.estimate < previous);
        previous = r.estimate;
    }
}
