use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use diffusivity_bench::synthesized;
use diffusivity_core::{accumulate_a, fd_solve, fixed_point_solve, solve_modes, Method, SolverOptions};
use std::hint::black_box;

fn bench_forward(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_modes");
    for n in [200usize, 400, 800] {
        let (spec, grid, syn) = synthesized(n, 16);
        let a = accumulate_a(spec.a_true.as_ref().unwrap(), &grid).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| solve_modes(black_box(&a), &syn.lifted.mode_data).unwrap())
        });
    }
    group.finish();
}

fn bench_inverse(c: &mut Criterion) {
    let mut group = c.benchmark_group("fixed_point_solve");
    group.sample_size(20);
    for n in [200usize, 400] {
        let (_, _, syn) = synthesized(n, 16);
        for method in [Method::PicardGlobal, Method::VolterraMarching] {
            let opts = SolverOptions {
                modes: 16,
                method,
                ..SolverOptions::default()
            };
            group.bench_with_input(BenchmarkId::new(format!("{method:?}"), n), &n, |b, _| {
                b.iter(|| fixed_point_solve(black_box(&syn.flux), &syn.lifted, &opts).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("fd_solve");
    group.sample_size(10);
    let (spec, grid, _) = synthesized(400, 16);
    let a = spec.a_true.clone().unwrap();
    for x_count in [100usize, 200] {
        group.bench_with_input(BenchmarkId::from_parameter(x_count), &x_count, |b, &x| {
            b.iter(|| fd_solve(&spec, &a, x, &grid).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_forward, bench_inverse, bench_oracle);
criterion_main!(benches);
