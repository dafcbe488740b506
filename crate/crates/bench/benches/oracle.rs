use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dfep::oracle::{count_trees, error_cost_frontier, opt_max_cost};
use dfep::{ImpurityFn, OracleLimits};
use dfep_bench::random_binary;

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("opt_max_cost");
    for (n, t) in [(8, 5), (10, 6), (12, 8)] {
        let inst = random_binary(n, t, 3, 7);
        group.bench_with_input(BenchmarkId::new("memo", format!("{n}x{t}")), &inst, |b, inst| {
            b.iter(|| opt_max_cost(inst, &ImpurityFn::Pairs, 0, OracleLimits::default()).unwrap())
        });
    }
    let inst = random_binary(8, 5, 3, 7);
    let plain = OracleLimits { memoize: false, ..OracleLimits::default() };
    group.bench_function("plain/8x5", |b| b.iter(|| opt_max_cost(&inst, &ImpurityFn::Pairs, 0, plain).unwrap()));
    group.finish();

    let inst = random_binary(12, 8, 3, 11);
    c.bench_function("error_cost_frontier/12x8", |b| {
        b.iter(|| error_cost_frontier(&inst, OracleLimits::default()).unwrap())
    });

    let small = random_binary(6, 4, 2, 5);
    c.bench_function("count_trees/6x4", |b| b.iter(|| count_trees(&small, OracleLimits::enumeration()).unwrap()));
}

criterion_group!(benches, oracle);
criterion_main!(benches);
