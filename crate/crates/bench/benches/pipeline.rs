use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use std::hint::black_box;

use synckron::dynamics::random_initial_state;
use synckron::{
    assemble_descriptor, reduce, simulate, sync_verdict, OscillatorModel, SimOptions, Tolerances,
};
use synckron_bench::{interior_fixture, ladder, random_case};

fn reduction(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("reduce");
    group.bench_function("interior_fixture", |b| {
        let net = interior_fixture();
        b.iter(|| reduce(black_box(&net), &tol).unwrap())
    });
    for p in [10, 40, 80] {
        let net = ladder(p, p / 2);
        group.bench_with_input(BenchmarkId::new("ladder", p), &net, |b, net| {
            b.iter(|| reduce(black_box(net), &tol).unwrap())
        });
    }
    group.finish();
}

fn verdict(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("verdict");
    for p in [10, 40, 80] {
        let gamma = reduce(&ladder(p, p / 2), &tol).unwrap().gamma;
        group.bench_with_input(BenchmarkId::new("ladder", p), &gamma, |b, g| {
            b.iter(|| sync_verdict(black_box(g), None).unwrap())
        });
    }
    group.finish();
}

fn integration(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("simulate_1000_steps");
    group.sample_size(20);
    let scalar = OscillatorModel::scalar(1.0, 1.0, 1.0).unwrap();
    let cases = [
        ("interior_fixture", interior_fixture(), scalar),
        (
            "random_p6_n3",
            random_case(11, 6, 3).0,
            random_case(11, 6, 3).1,
        ),
    ];
    for (name, net, osc) in cases {
        let sys = assemble_descriptor(&net, &osc, &tol).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let init = random_initial_state(&sys, &mut rng, tol.dae).unwrap();
        let opts = SimOptions {
            horizon: 1.0,
            dt: 1e-3,
            record_every: 100,
            dae_tol: tol.dae,
        };
        group.bench_function(name, |b| {
            b.iter(|| simulate(&sys, black_box(&init.state), &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, reduction, verdict, integration);
criterion_main!(benches);
