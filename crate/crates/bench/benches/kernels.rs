use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use onsager_core::quadrature::ContourRotation;
use onsager_core::quantum::group_property_residual;
use onsager_core::suite::{Suite, VerificationConfig};
use onsager_core::{ComplexTime, DictionaryMap, InitialCondition, OUParams, ThermoLagrangian};

fn densities(c: &mut Criterion) {
    let p = OUParams::new(2.0, 2.0, 1.0).unwrap();
    c.bench_function("transition_density", |b| {
        b.iter(|| p.transition_density(black_box(0.3), black_box(-0.2), black_box(0.7)))
    });
    c.bench_function("transition_density_wick", |b| {
        b.iter(|| p.transition_density_continued(black_box(0.3), black_box(-0.2), ComplexTime::wick(0.7)))
    });
}

fn slicing(c: &mut Criterion) {
    let lag = ThermoLagrangian::new(1.0, 1.0, 1.0).unwrap();
    let mut group = c.benchmark_group("kernel_by_slicing");
    for n in [16usize, 256, 4096] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| lag.kernel_by_slicing(0.5, -0.3, 1.0, n))
        });
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let p = OUParams::new(1.0, 1.0, 1.0).unwrap();
    let times: Vec<f64> = (0..1000).map(|k| k as f64 * 0.01).collect();
    c.bench_function("sample_ensemble_100x1000", |b| {
        b.iter(|| p.sample_ensemble(InitialCondition::Stationary, &times, 100, 7))
    });
}

fn correspondence(c: &mut Criterion) {
    let map = DictionaryMap::new(OUParams::new(2.0, 2.0, 1.0).unwrap(), 1.0).unwrap();
    let contour = ContourRotation::default();
    c.bench_function("group_property", |b| {
        b.iter(|| group_property_residual(map.quantum(), 0.3, -0.4, 0.4, 0.5, &contour))
    });
    let config = VerificationConfig::default();
    let suite = Suite::new(&config);
    c.bench_function("harmonic_grid", |b| b.iter(|| suite.harmonic()));
}

criterion_group!(benches, densities, slicing, sampling, correspondence);
criterion_main!(benches);
