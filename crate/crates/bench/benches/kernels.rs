use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use stablelim::diagnostics::exin_identity_check;
use stablelim::{
    generate, sample_stable, simulate_levy_path, skorohod_j1_distance, Compensation, Innovation, LevySmallJumpPolicy,
    SequenceModel, StableLaw, TimeChange,
};

fn sampler(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_stable");
    let count = 100_000;
    group.throughput(Throughput::Elements(count as u64));
    for alpha in [0.5, 1.0, 1.5] {
        let law = StableLaw::one_dim(alpha, 0.7).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(alpha), &law, |b, law| {
            b.iter(|| sample_stable(law, count, black_box(1)).unwrap())
        });
    }
    group.finish();
}

fn sequences(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate");
    let length = 1_000_000;
    group.throughput(Throughput::Elements(length as u64));
    let models = [
        ("iid-pareto", SequenceModel::iid_pareto(1.5, 0.5).unwrap()),
        (
            "ma-3",
            SequenceModel::moving_average(vec![1.0, 0.5, 0.25], Innovation::Pareto { alpha: 1.5, p: 0.5 }).unwrap(),
        ),
    ];
    for (name, model) in &models {
        group.bench_function(*name, |b| b.iter(|| generate(model, length, black_box(2)).unwrap()));
    }
    group.finish();
}

fn levy_paths(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate_levy_path");
    let law = StableLaw::symmetric(1.5).unwrap();
    for cut in [0.1, 0.01] {
        let policy = LevySmallJumpPolicy::new(cut, Compensation::DriftCompensated, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(cut), &policy, |b, policy| {
            b.iter(|| simulate_levy_path(&law, 1.0, policy, black_box(3)).unwrap())
        });
    }
    group.finish();
}

fn j1_distance(c: &mut Criterion) {
    let mut group = c.benchmark_group("skorohod_j1_distance");
    let law = StableLaw::symmetric(1.5).unwrap();
    let warp = TimeChange::new(1.0, &[(0.3, 0.32), (0.6, 0.59)]).unwrap();
    for cut in [0.1, 0.03] {
        let policy = LevySmallJumpPolicy::new(cut, Compensation::DriftCompensated, 1).unwrap();
        let a = simulate_levy_path(&law, 1.0, &policy, 4).unwrap();
        let pairs = [
            ("warped", warp.compose(&a).unwrap()),
            ("independent", simulate_levy_path(&law, 1.0, &policy, 5).unwrap()),
        ];
        for (name, b) in &pairs {
            group.bench_with_input(BenchmarkId::new(*name, cut), b, |bench, b| {
                bench.iter(|| skorohod_j1_distance(&a, b, 1e-4).unwrap())
            });
        }
    }
    group.finish();
}

fn exin(c: &mut Criterion) {
    let mut group = c.benchmark_group("exin_identity_check");
    for n in [8, 12, 16] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| exin_identity_check(black_box(0.25), n).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sampler, sequences, levy_paths, j1_distance, exin);
criterion_main!(benches);
