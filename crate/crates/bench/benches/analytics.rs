use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use tetraqkd::eve::optimize_mu;
use tetraqkd::security::{i_ae_n, threshold, THRESHOLD_TOL};
use tetraqkd::keygen::i_ab_total;
use tetraqkd_bench::noise;

fn eve_information(c: &mut Criterion) {
    let mut group = c.benchmark_group("i_ae_n");
    for n in [1u32, 3, 5] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| i_ae_n(black_box(noise(0.3)), n).unwrap())
        });
    }
    group.finish();
}

fn totals(c: &mut Criterion) {
    c.bench_function("i_ab_total/12", |b| {
        b.iter(|| i_ab_total(black_box(noise(0.2)), 12).unwrap())
    });
}

fn thresholds(c: &mut Criterion) {
    let mut group = c.benchmark_group("threshold");
    group.sample_size(10);
    group.bench_function("n_max=3", |b| b.iter(|| threshold(3, THRESHOLD_TOL).unwrap()));
    group.finish();
}

fn five_member(c: &mut Criterion) {
    let mut group = c.benchmark_group("optimize_mu");
    group.sample_size(10);
    group.bench_function("eps=0.05", |b| b.iter(|| optimize_mu(black_box(noise(0.05)), 0.0).unwrap()));
    group.finish();
}

criterion_group!(benches, eve_information, totals, thresholds, five_member);
criterion_main!(benches);
