use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ratio_sparse::solvers::solve;
use ratio_sparse::{gen_instance, Scheme, SolverConfig, ValueMode};

fn bench_schemes(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve 64x1024 s=6");
    group.sample_size(10);
    for &f in &[1.0, 20.0] {
        let inst = gen_instance(64, 1024, 6, f, ValueMode::Gaussian, 0).unwrap();
        let p = inst.projector().unwrap();
        for scheme in [Scheme::L1Bp, Scheme::Bs, Scheme::A1, Scheme::A2] {
            let cfg = SolverConfig::for_regime(scheme, ValueMode::Gaussian);
            group.bench_function(BenchmarkId::new(scheme.name(), format!("F={f}")), |b| {
                b.iter(|| solve(&p, &cfg))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_schemes);
criterion_main!(benches);
