use std::hint::black_box;
use std::time::Duration;

use bmrf::decomp::{
    build_cover, chain_problems, dual_ascent, CouplingSolver, DualConfig, DualState, StepRule,
};
use bmrf::oracle::{brute_force_with, generate, InstanceKind, DEFAULT_CAP};
use bmrf::Execution;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn ascent(c: &mut Criterion) {
    let inst = generate(
        InstanceKind::RandomGrid {
            rows: 12,
            cols: 12,
            k: 4,
        },
        1,
    )
    .unwrap();
    let cover = build_cover(inst.graph()).unwrap();
    let mut group = c.benchmark_group("dual_ascent_12x12");
    group.sample_size(10);
    for (name, exec) in MODES {
        let config = DualConfig {
            max_iters: 20,
            tol: 0.0,
            step: StepRule::Diminishing { initial: 0.1 },
            exec,
            ..DualConfig::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| dual_ascent(black_box(&inst), &cover, &config).unwrap())
        });
    }
    group.finish();
}

fn coupling(c: &mut Criterion) {
    let inst = generate(
        InstanceKind::RandomGrid {
            rows: 20,
            cols: 20,
            k: 5,
        },
        2,
    )
    .unwrap();
    let cover = build_cover(inst.graph()).unwrap();
    let problems = chain_problems(&inst, &cover, &DualState::initial(&inst, &cover));
    let zeta = inst.zeta_envelope();
    let mut group = c.benchmark_group("coupling_20x20");
    for (name, exec) in MODES {
        let mut solver = CouplingSolver::new(&problems).unwrap();
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| solver.solve(black_box(&zeta), exec).unwrap())
        });
    }
    group.finish();
}

fn brute(c: &mut Criterion) {
    let inst = generate(
        InstanceKind::RandomGrid {
            rows: 3,
            cols: 3,
            k: 4,
        },
        3,
    )
    .unwrap();
    let mut group = c.benchmark_group("brute_force_3x3x4");
    group
        .sample_size(10)
        .measurement_time(Duration::from_secs(5));
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| brute_force_with(black_box(&inst), DEFAULT_CAP, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, ascent, coupling, brute);
criterion_main!(benches);
