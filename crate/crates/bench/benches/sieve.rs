use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use momo_core::arith::{bfree_set, build_arith_table, MultipleBase};

fn sieve(c: &mut Criterion) {
    let mut g = c.benchmark_group("sieve");
    g.sample_size(10);
    for n in [100_000u64, 1_000_000, 10_000_000] {
        g.bench_with_input(BenchmarkId::new("mu_lambda", n), &n, |b, &n| {
            b.iter(|| build_arith_table(n, 1 << 16).unwrap())
        });
    }
    for block in [1u64 << 12, 1 << 16, 1 << 20] {
        g.bench_with_input(BenchmarkId::new("block_size", block), &block, |b, &bs| {
            b.iter(|| build_arith_table(1_000_000, bs).unwrap())
        });
    }
    let base = MultipleBase::prime_squares(1_000_000);
    g.bench_function("squarefree_1e6", |b| b.iter(|| bfree_set(&base, 1_000_000)));
    g.finish();
}

criterion_group!(benches, sieve);
criterion_main!(benches);
