use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use netguard_bench::scenario;
use netguard_core::harness::run_once;
use netguard_core::MechanismVariant;

// whole 150 s runs: LLDE cycles, routing, contract checks and every packet hop
fn full_runs(c: &mut Criterion) {
    let mut group = c.benchmark_group("run");
    group.sample_size(10);
    let ladder = scenario("test3_mixed");
    for flows in [2, 10] {
        let s = ladder.with_flow_count(flows).unwrap();
        group.bench_with_input(BenchmarkId::new("ladder_flows", flows), &s, |b, s| {
            b.iter(|| run_once(s, MechanismVariant::RM, 1, Default::default()).unwrap())
        });
    }
    let mesh = scenario("mesh_mixed");
    group.bench_function("mesh", |b| {
        b.iter(|| run_once(&mesh, MechanismVariant::RM, 1, Default::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, full_runs);
criterion_main!(benches);
