use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pend3d::equilibria::{enumerate_lp, EnumerationOptions};
use pend3d::integrate::{build_initial, initial_for_energy, poincare_sweep, IntegratorConfig, Method, PoincareSection, SweepJob};
use pend3d::{BodyParams, Execution, Rotation, Vec3};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn equilibria(c: &mut Criterion) {
    let p = BodyParams::diagonal([0.4486, 0.3943, 0.0772], 1.0, 9.81, Vec3::new(-0.0140, 0.1044, 0.4989)).unwrap();
    let mut group = c.benchmark_group("enumerate_lp");
    for per_interval in [100, 2000] {
        let base = EnumerationOptions::with_default_grid(&p, per_interval).unwrap();
        for (name, execution) in MODES {
            let opts = EnumerationOptions { execution, ..base.clone() };
            group.bench_with_input(BenchmarkId::new(name, per_interval), &opts, |b, opts| {
                b.iter(|| enumerate_lp(&p, opts).unwrap())
            });
        }
    }
    group.finish();
}

fn poincare(c: &mut Criterion) {
    let p = BodyParams::diagonal([0.13, 0.28, 0.17], 1.0, 9.81, Vec3::new(0.0, 0.0, 0.3)).unwrap();
    let ones = Vec3::new(1.0, 1.0, 1.0);
    let jobs: Vec<SweepJob> = [-2.65, 0.0, 2.03, 8.83, 11.95]
        .iter()
        .map(|&e| {
            let full = initial_for_energy(&p, &Rotation::identity(), &ones, e).unwrap();
            let (_, _, lr) = build_initial(&p, &full.r, &full.omega);
            SweepJob { initial: lr, section: PoincareSection::new(e) }
        })
        .collect();
    let cfg = IntegratorConfig::new(Method::LieGroupRk4, 1e-3, 10.0);
    let mut group = c.benchmark_group("poincare_sweep");
    group.sample_size(10);
    for (name, execution) in MODES {
        group.bench_function(name, |b| b.iter(|| poincare_sweep(&p, &jobs, &cfg, execution)));
    }
    group.finish();
}

criterion_group!(benches, equilibria, poincare);
criterion_main!(benches);
