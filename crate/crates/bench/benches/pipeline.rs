use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ct_euclid_core::apps::{ehrhart_series, knapsack_count};
use ct_euclid_core::pipeline::DEFAULT_PRIMES;
use ct_euclid_core::{magic_square_system, Arithmetic, PipelineOptions};
use num_bigint::BigInt;

fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn modular() -> PipelineOptions {
    PipelineOptions {
        arithmetic: Arithmetic::Modular { primes: DEFAULT_PRIMES.to_vec(), crt: true },
        ..Default::default()
    }
}

fn knapsack(c: &mut Criterion) {
    let mut g = c.benchmark_group("knapsack");
    let cases = [
        ("small", 41i64, vec![1, 5, 14]),
        ("infeasible", 149389505, vec![12223, 12224, 36671]),
        ("aardal-lenstra", 89643481, vec![12223, 12224, 36674, 61119, 85569]),
    ];
    for (name, a0, w) in cases {
        let (a0, w) = (BigInt::from(a0), big(&w));
        g.bench_with_input(BenchmarkId::new("exact", name), &(), |b, _| {
            b.iter(|| knapsack_count(&a0, &w, &PipelineOptions::default()).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("crt", name), &(), |b, _| {
            b.iter(|| knapsack_count(&a0, &w, &modular()).unwrap())
        });
    }
    g.finish();
}

fn magic_squares(c: &mut Criterion) {
    let mut g = c.benchmark_group("magic");
    g.sample_size(10);
    for n in [3, 4] {
        let sys = magic_square_system(n);
        g.bench_with_input(BenchmarkId::new("exact", n), &sys, |b, sys| {
            b.iter(|| ehrhart_series(sys, &PipelineOptions::default()).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("crt", n), &sys, |b, sys| {
            b.iter(|| ehrhart_series(sys, &modular()).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, knapsack, magic_squares);
criterion_main!(benches);
