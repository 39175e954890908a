use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use std::hint::black_box;
use tetraqkd::harness::{sample_run, triple_distribution, EveMeasurement};
use tetraqkd::keygen::sift_round;
use tetraqkd_bench::{letter_pairs, noise, rng};

fn sifting(c: &mut Criterion) {
    let n = 100_000;
    let (alice, bob) = letter_pairs(0.2, n, 1);
    let mut group = c.benchmark_group("sift_round");
    group.throughput(Throughput::Elements(n as u64));
    group.bench_function("100k", |b| {
        b.iter_batched(
            || rng(2),
            |mut r| sift_round(black_box(&alice), black_box(&bob), &mut r).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

fn born_rule(c: &mut Criterion) {
    c.bench_function("triple_distribution", |b| {
        b.iter(|| triple_distribution(black_box(noise(0.3)), 0.0, EveMeasurement::Four).unwrap())
    });
}

fn sampling(c: &mut Criterion) {
    let table = triple_distribution(noise(0.3), 0.0, EveMeasurement::Four).unwrap();
    let mut group = c.benchmark_group("sample_run");
    group.throughput(Throughput::Elements(100_000));
    group.bench_function("100k", |b| {
        b.iter_batched(
            || rng(3),
            |mut r| sample_run(&table, 100_000, &mut r).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(benches, sifting, born_rule, sampling);
criterion_main!(benches);
