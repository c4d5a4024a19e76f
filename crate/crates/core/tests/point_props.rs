use proptest::prelude::*;
use stablelim::diagnostics::gof_poisson;
use stablelim::stats::mean_stderr;
use stablelim::{
    count_in, extract_point_process, jumps_above, levy_tail_mass, partial_sum_path, sample_poisson_pattern,
    AnnularSector, RectRegion, SeedStream, StableLaw,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn extracted_points_are_the_big_jumps(
        z in prop::collection::vec(-50.0f64..50.0, 1..200),
        b in 1.0f64..20.0,
        c in -1.0f64..1.0,
        floor in 0.05f64..2.0,
    ) {
        let n = z.len();
        let path = partial_sum_path(&z, b, &[c], n, 1.0).unwrap();
        let pattern = extract_point_process(&z, 1, b, n, 1.0, floor).unwrap();
        let from_path = jumps_above(&path, floor, 1.0).unwrap();
        let from_pattern: Vec<(f64, Vec<f64>)> = pattern.iter().map(|(t, x)| (t, x.to_vec())).collect();
        prop_assert_eq!(from_path, from_pattern);
    }
}

#[test]
fn superposed_patterns_count_like_one() {
    let law = StableLaw::symmetric(1.5).unwrap();
    let floor = 0.5;
    let reps = 10_000;
    let stream = SeedStream::new(7);
    let whole = RectRegion::beyond(0.0, 1.0, floor).unwrap();
    let seam = RectRegion::beyond(0.2, 0.7, floor).unwrap();
    let mut total = Vec::with_capacity(reps);
    let mut across = Vec::with_capacity(reps);
    for r in 0..reps {
        let s = stream.child(r as u64);
        let first = sample_poisson_pattern(&law, 0.4, floor, s.child(0).seed()).unwrap();
        let second = sample_poisson_pattern(&law, 0.6, floor, s.child(1).seed()).unwrap();
        let merged = first.append_shifted(&second).unwrap();
        assert_eq!(merged.horizon(), 1.0);
        total.push(count_in(&merged, &whole).unwrap() as u64);
        across.push(count_in(&merged, &seam).unwrap() as u64);
    }
    let mass = levy_tail_mass(&law, floor, None).unwrap();
    for (counts, length) in [(&total, 1.0), (&across, 0.5)] {
        let fit = gof_poisson(counts, length * mass).unwrap();
        assert!(fit.p_value > 0.01, "length {length}: {fit:?}");
    }
}

#[test]
fn region_counts_match_the_mean_measure() {
    let law = StableLaw::one_dim(1.2, 0.8).unwrap();
    let reps = 10_000;
    let stream = SeedStream::new(8);
    let patterns: Vec<_> = (0..reps)
        .map(|r| sample_poisson_pattern(&law, 1.0, 0.5, stream.child(r as u64).seed()).unwrap())
        .collect();
    let mut regions = Vec::new();
    for eps in [0.5, 1.0, 2.0] {
        for (s, t) in [(0.0, 0.5), (0.5, 1.0), (0.1, 0.9)] {
            regions.push(RectRegion::beyond(s, t, eps).unwrap());
        }
    }
    regions.push(RectRegion::new(0.0, 1.0, vec![AnnularSector::annulus(0.5, 2.0)]).unwrap());
    regions.push(
        RectRegion::new(
            0.0,
            1.0,
            vec![AnnularSector::beyond(1.0).with_directions(vec![vec![-1.0]])],
        )
        .unwrap(),
    );
    for region in &regions {
        let counts: Vec<f64> = patterns.iter().map(|p| count_in(p, region).unwrap() as f64).collect();
        let (mean, se) = mean_stderr(&counts);
        let expected = region.mean_measure(&law);
        assert!(
            (mean - expected).abs() <= 3.0 * se,
            "{region:?}: {mean} ± {se} vs {expected}"
        );
    }
}
