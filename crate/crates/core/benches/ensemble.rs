use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use kremoval::ensemble::{run_trials, Exec};
use kremoval::process::RunConfig;

fn trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("trials");
    group.sample_size(10);
    for (n, k) in [(40, 3), (40, 4), (80, 4)] {
        let grid = [RunConfig::new(n, k, 0)];
        for exec in [Exec::Sequential, Exec::Parallel] {
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), format!("n{n}_k{k}")), &grid, |b, grid| {
                b.iter(|| run_trials(grid, 16, 1, exec))
            });
        }
    }
    group.finish();
}

fn single_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("single_run");
    group.sample_size(10);
    for n in [100, 200] {
        group.bench_function(BenchmarkId::from_parameter(format!("n{n}_k4_to_p0.5")), |b| {
            b.iter(|| kremoval::process::run(RunConfig::new(n, 4, 3).with_p_floor(0.5)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, trials, single_run);
criterion_main!(benches);
