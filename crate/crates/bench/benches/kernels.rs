use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use smwave_core::sm::generate_wiener;
use smwave_core::wave::{Diffusion, Forcing, StochasticOperator};
use smwave_core::*;

fn problem() -> WaveProblem {
    let mut p = WaveProblem::new(1.0);
    p.sigma = Diffusion::half_one_plus_sine();
    p.lipschitz_sigma = 0.5;
    p
}

fn bench_expand(c: &mut Criterion) {
    let mut g = c.benchmark_group("expand");
    for level in [8u32, 10, 12] {
        let path = generate_wiener(Partition::dyadic(level).unwrap(), 1);
        g.bench_with_input(
            BenchmarkId::from_parameter(1usize << level),
            &path,
            |b, p| b.iter(|| expand(black_box(p), 64)),
        );
    }
    g.finish();
}

fn bench_fbm(c: &mut Criterion) {
    let mut g = c.benchmark_group("fbm_sample");
    for n in [64usize, 256] {
        let prepared = GeneratorSpec::Fbm { hurst: 0.75 }
            .prepare(Partition::new(n).unwrap())
            .unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &prepared, |b, p| {
            b.iter(|| p.sample(black_box(7)))
        });
    }
    g.finish();
}

fn bench_stochastic_term(c: &mut Criterion) {
    let part = Partition::new(1024).unwrap();
    let grid = SolverGrid::new(1.0 / 16.0, 60, -1.0, 1.0, 33);
    let p = problem();
    let solver = WaveSolver::new(&p, &grid, part).unwrap();
    let path = generate_wiener(part, 3);
    let exp = expand(&path, 64);
    let operator = StochasticOperator::new(&solver, 64);

    let mut g = c.benchmark_group("stochastic_field");
    g.sample_size(10);
    for mode in [ForcingMode::SmPath, ForcingMode::FourierPartial(64)] {
        let forcing = Forcing::new(mode, Some(&path), Some(&exp)).unwrap();
        g.bench_function(format!("direct/{}", mode.name()), |b| {
            b.iter(|| solver.stochastic_field(forcing).unwrap())
        });
        g.bench_function(format!("operator/{}", mode.name()), |b| {
            b.iter(|| operator.field(forcing).unwrap())
        });
    }
    g.finish();
}

fn bench_solve(c: &mut Criterion) {
    let part = Partition::new(256).unwrap();
    let grid = SolverGrid::new(0.125, 14, -1.0, 1.0, 17);
    let mut p = problem();
    p.drift = wave::Drift::Sine {
        amplitude: 0.5,
        frequency: 1.0,
    };
    p.lipschitz_f = 0.5;
    let path = generate_wiener(part, 5);
    let options = SolverOptions::default();
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    g.bench_function("path_with_drift", |b| {
        b.iter(|| solve(&p, &grid, &path, None, ForcingMode::SmPath, &options).unwrap())
    });
    g.finish();
}

criterion_group!(
    benches,
    bench_expand,
    bench_fbm,
    bench_stochastic_term,
    bench_solve
);
criterion_main!(benches);
