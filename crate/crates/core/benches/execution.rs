use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cfx_core::analysis::{compare_first_returns, random_starts, DEFAULT_MAX_ITERS};
use cfx_core::discovery::verify_invariance;
use cfx_core::domains::{build_domain, DomainKind};
use cfx_core::exec::Execution;
use cfx_core::maps::MapKind;
use cfx_core::moebius::GroupContext;

fn modes() -> Vec<(&'static str, Execution)> {
    let mut v = vec![("sequential", Execution::Sequential)];
    if cfg!(feature = "parallel") {
        v.push(("parallel", Execution::Parallel));
    }
    v
}

fn invariance(c: &mut Criterion) {
    let ctx = GroupContext::new(8).unwrap();
    let d = build_domain(&ctx, DomainKind::OmegaVeech).unwrap();
    let mut g = c.benchmark_group("verify_invariance_omega_v");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| verify_invariance(&ctx, &d, MapKind::VeechMultiplicative, 50_000, 1e-9, 1, exec).unwrap())
        });
    }
    g.finish();
}

fn returns(c: &mut Criterion) {
    let ctx = GroupContext::new(12).unwrap();
    let starts = random_starts(&ctx, 20_000, 1).unwrap();
    let mut g = c.benchmark_group("compare_first_returns_q12");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| compare_first_returns(&ctx, &starts, DEFAULT_MAX_ITERS, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, invariance, returns);
criterion_main!(benches);
