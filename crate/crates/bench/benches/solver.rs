use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use jobcost_bench::instances::small_instance;
use jobcost_bench::random_lp::feasible_lp;
use jobcost_core::bench::{brute_force_optimum, generate_problem, GeneratorConfig};
use jobcost_core::simplex::{solve_lp, FeasibilityTolerance};
use jobcost_core::solver::{build_milp, solve, SolverConfig};

fn lp(c: &mut Criterion) {
    let problems: Vec<_> = (0..32).map(feasible_lp).collect();
    c.bench_function("simplex/small_random", |b| {
        b.iter(|| {
            for p in &problems {
                black_box(solve_lp(p, FeasibilityTolerance::default()).unwrap());
            }
        })
    });
}

fn branch_and_bound(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    for workflows in [4, 8, 12] {
        let vp = generate_problem(&GeneratorConfig {
            workflow_count: workflows,
            seed: 1,
            ..GeneratorConfig::default()
        })
        .unwrap()
        .validate()
        .unwrap();
        let model = build_milp(&vp);
        group.bench_with_input(BenchmarkId::from_parameter(workflows), &model, |b, m| {
            b.iter(|| solve(m, &SolverConfig::default()).unwrap())
        });
    }
    group.finish();
}

fn oracle_vs_solver(c: &mut Criterion) {
    let vp = small_instance(3);
    let model = build_milp(&vp);
    let mut group = c.benchmark_group("small_instance");
    group.bench_function("brute_force", |b| b.iter(|| brute_force_optimum(black_box(&vp)).unwrap()));
    group.bench_function("branch_and_bound", |b| b.iter(|| solve(&model, &SolverConfig::default()).unwrap()));
    group.finish();
}

criterion_group!(benches, lp, branch_and_bound, oracle_vs_solver);
criterion_main!(benches);
