//! Compares the data-parallel core against a single-threaded run of the same
//! code (a one-thread rayon pool is the sequential fallback path in all but
//! name). Workloads: elementary-loop enumeration on a random digraph and the
//! power-graph construction behind the scaled power rotation sets.

use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotkit::markov_graph::{Arrow, MarkovGraph, RotationSet};

fn random_graph(nodes: usize, density: f64, seed: u64) -> MarkovGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = (0..nodes).map(|i| format!("n{i}")).collect();
    let mut arrows = Vec::new();
    for from in 0..nodes {
        for to in 0..nodes {
            if rng.gen_bool(density) {
                arrows.push(Arrow {
                    from,
                    to,
                    weight: rng.gen_range(-3..=3),
                });
            }
        }
    }
    MarkovGraph::new(names, arrows)
}

fn bench_loops(c: &mut Criterion) {
    let graph = random_graph(13, 0.28, 7);
    let mut group = c.benchmark_group("elementary_loops");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| std::hint::black_box(graph.elementary_loops().len()))
    });
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    group.bench_function("sequential", |b| {
        b.iter(|| single.install(|| std::hint::black_box(graph.elementary_loops().len())))
    });
    group.finish();
}

fn bench_power(c: &mut Criterion) {
    let graph = random_graph(24, 0.2, 11);
    let nodes: Vec<usize> = (0..12).collect();
    let run = |g: &MarkovGraph| match g.power_rotation_set(&nodes, 6) {
        RotationSet::NoLoop => 0usize,
        RotationSet::Interval { min_witness, .. } => min_witness.len(),
    };
    let mut group = c.benchmark_group("power_rotation_set");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| std::hint::black_box(run(&graph)))
    });
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    group.bench_function("sequential", |b| {
        b.iter(|| single.install(|| std::hint::black_box(run(&graph))))
    });
    group.finish();
}

criterion_group!(benches, bench_loops, bench_power);
criterion_main!(benches);
