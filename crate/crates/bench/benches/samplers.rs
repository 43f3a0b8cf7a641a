use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use wirs::approx::{ApproxConfig, ApproxSampler};
use wirs::interval::CanonicalTree;
use wirs::workload::{gen_dataset, k_range_halfspace, PointDist, WeightDist};
use wirs::{Dataset, ExpectedSampler, SeededRng};

const SIZES: [usize; 3] = [1 << 10, 1 << 12, 1 << 14];
const K: usize = 100;

fn dataset(n: usize) -> Dataset {
    gen_dataset(n, PointDist::UnitCube, WeightDist::LogUniform, 1e6, n as u64).unwrap()
}

fn build(c: &mut Criterion) {
    let mut g = c.benchmark_group("build");
    g.sample_size(10);
    for n in SIZES {
        let d = dataset(n);
        g.bench_with_input(BenchmarkId::new("expected", n), &d, |b, d| b.iter(|| ExpectedSampler::build(d).unwrap()));
        g.bench_with_input(BenchmarkId::new("approx", n), &d, |b, d| {
            b.iter(|| ApproxSampler::build(d, ApproxConfig::default()).unwrap())
        });
    }
    g.finish();
}

fn sample_k(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample_k");
    for n in SIZES {
        let d = dataset(n);
        let es = ExpectedSampler::build(&d).unwrap();
        let ap = ApproxSampler::build(&d, ApproxConfig::default()).unwrap();
        let mut rng = SeededRng::new(1);
        let queries: Vec<_> = (0..32).map(|_| k_range_halfspace(&d, n / 16, &mut rng).unwrap()).collect();
        let mut i = 0;
        g.bench_function(BenchmarkId::new("expected", n), |b| {
            b.iter(|| {
                i = (i + 1) % queries.len();
                black_box(es.sample(&queries[i], K, &mut rng).unwrap())
            })
        });
        g.bench_function(BenchmarkId::new("approx", n), |b| {
            b.iter(|| {
                i = (i + 1) % queries.len();
                black_box(ap.sample_k(&queries[i], K, &mut rng).unwrap())
            })
        });
    }
    g.finish();
}

fn interval(c: &mut Criterion) {
    let mut g = c.benchmark_group("interval");
    for n in SIZES {
        let w: Vec<f64> = (1..=n).map(|i| i as f64).collect();
        let t = CanonicalTree::new(&w).unwrap();
        let mut rng = SeededRng::new(2);
        g.bench_function(BenchmarkId::new("sample_interval", n), |b| {
            b.iter_batched(
                || {
                    let a = rng.below(n);
                    (a, a + rng.below(n - a))
                },
                |(a, e)| black_box(t.sample_interval(a, e, K, &mut SeededRng::new(3)).unwrap()),
                BatchSize::SmallInput,
            )
        });
    }
    g.finish();
}

criterion_group!(benches, build, sample_k, interval);
criterion_main!(benches);
