use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use starnoma_core::noise::{bessel_i_ratio, VonMisesSampler};
use starnoma_core::{
    derive_geometry, draw_channels, equivalent_channels, optimal_phases, run_sweep, Axis, Metric, RngStream,
    SceneConfig, SweepSpec,
};

fn channels(c: &mut Criterion) {
    let scene = SceneConfig::default();
    let geom = derive_geometry(&scene).unwrap();
    let design = optimal_phases(&geom, &scene);
    let mut rng = RngStream::new(1, 0).rng();
    c.bench_function("draw_channels 2x400", |b| b.iter(|| draw_channels(&scene, &geom, &mut rng)));
    let real = draw_channels(&scene, &geom, &mut rng);
    c.bench_function("equivalent_channels 2x400", |b| {
        b.iter(|| equivalent_channels(black_box(&real), &design, &geom).unwrap())
    });
    c.bench_function("derive_geometry", |b| b.iter(|| derive_geometry(black_box(&scene)).unwrap()));
}

fn sweep(c: &mut Criterion) {
    let mut spec = SweepSpec::new("bench", Axis::SnrDb, vec![10.0]);
    spec.trials = 64;
    spec.metrics = vec![Metric::NmseLmmse, Metric::SumRateNoma, Metric::SumRateOma];
    let mut group = c.benchmark_group("sweep");
    group.sample_size(20);
    group.bench_function("64 trials, N = 400, K = 2", |b| b.iter(|| run_sweep(black_box(&spec)).unwrap()));
    group.finish();
}

fn noise(c: &mut Criterion) {
    c.bench_function("bessel_i_ratio(1.25)", |b| b.iter(|| bessel_i_ratio(black_box(1.25)).unwrap()));
    c.bench_function("bessel_i_ratio(800)", |b| b.iter(|| bessel_i_ratio(black_box(800.0)).unwrap()));
    let sampler = VonMisesSampler::new(1.25);
    c.bench_function("von Mises draw", |b| {
        b.iter_batched_ref(
            || RngStream::new(2, 0).rng(),
            |rng| sampler.sample(rng),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, channels, sweep, noise);
criterion_main!(benches);
