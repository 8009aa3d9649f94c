use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use steerlab::entangle::{chsh_grid_max, epr_singlet, teleport_batch};
use steerlab::par::Execution;
use steerlab::protocols::no_signaling_sweep;
use steerlab::random::{self, seeded};
use steerlab::worlds::World;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn teleport(c: &mut Criterion) {
    let mut rng = seeded(1);
    let inputs: Vec<_> = (0..1000).map(|_| random::unit_vector(2, &mut rng)).collect();
    let shared = epr_singlet();
    let mut group = c.benchmark_group("teleport_batch_1000");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| teleport_batch(black_box(&inputs), &shared, 7, exec).unwrap())
        });
    }
    group.finish();
}

fn no_signaling(c: &mut Criterion) {
    let mut group = c.benchmark_group("no_signaling_sweep_500");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| no_signaling_sweep(black_box(500), World::Quantum, 3, exec).unwrap())
        });
    }
    group.finish();
}

fn chsh_grid(c: &mut Criterion) {
    let state = epr_singlet();
    let mut group = c.benchmark_group("chsh_grid_2deg");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| chsh_grid_max(black_box(&state), 2.0, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, teleport, no_signaling, chsh_grid);
criterion_main!(benches);
