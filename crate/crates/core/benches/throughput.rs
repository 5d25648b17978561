//! Parallel-vs-sequential throughput on the data-parallel hot paths: the
//! constraint-ladder sample grid, drift scans over long trajectories, and
//! batches of independent integrations.
//!
//! The `*_library` benches go through the crate API, which fans out over
//! rayon under the default `parallel` feature; the `*_sequential` benches
//! drive the identical per-item entry points in a plain loop. Re-run with
//! `--no-default-features` to measure the sequential fallback of the
//! library path itself.

use criterion::{criterion_group, criterion_main, Criterion};
use isolab::conservation::{
    evaluate_quantity, evaluate_standard_set, sample_shell, van_holten_check,
    van_holten_residuals_at, CoefficientAnsatz, PhasePotential, StandardQuantity,
};
use isolab::dynamics::{integrate, IntegratorConfig, ParticleState};
use isolab::fields::{GaugeFieldConfig, ScalarPotentialConfig};
use isolab::su2::AlgebraElement;
use isolab::vec3::Vec3;
use std::hint::black_box;

fn bound_orbit(t_end: f64) -> isolab::dynamics::Trajectory {
    let pot = ScalarPotentialConfig::new(0.6, -1.0, 0.1);
    integrate(
        ParticleState::new(
            0.0,
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 0.5, 0.3),
            AlgebraElement::new(0.6, 0.8, 0.0),
        ),
        &GaugeFieldConfig::WuYang,
        Some(&pot),
        &IntegratorConfig::rk4(1e-3, t_end),
    )
    .unwrap()
}

fn bench_ladder(c: &mut Criterion) {
    let samples = sample_shell(512);
    let field = GaugeFieldConfig::WuYang;
    let pot = PhasePotential::fine_tuned(-1.0, 0.1);
    let ansatz = CoefficientAnsatz::runge_lenz(Vec3::new(0.3, -0.5, 0.8), -1.0);

    let mut group = c.benchmark_group("van_holten_512_samples");
    group.bench_function("library", |b| {
        b.iter(|| {
            van_holten_check(&ansatz, &field, &pot, black_box(&samples), 1e-6).unwrap()
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let mut worst = [0.0f64; 4];
            for (x, q) in black_box(&samples) {
                let r = van_holten_residuals_at(&ansatz, &field, &pot, *x, *q).unwrap();
                for (w, v) in worst.iter_mut().zip(r.0) {
                    *w = w.max(v);
                }
            }
            worst
        })
    });
    group.finish();
}

fn bench_drift(c: &mut Criterion) {
    let traj = bound_orbit(20.0);
    let mut group = c.benchmark_group("drift_scan_20k_samples");
    group.bench_function("library", |b| {
        b.iter(|| evaluate_standard_set(black_box(&traj), 1e-7).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let mut worst = 0.0f64;
            for quantity in StandardQuantity::all() {
                let origin =
                    evaluate_quantity(quantity, &traj.samples[0], &traj.field, traj.potential.as_ref())
                        .unwrap();
                for s in black_box(&traj.samples) {
                    let v = evaluate_quantity(quantity, s, &traj.field, traj.potential.as_ref())
                        .unwrap();
                    worst = worst.max(v.distance(&origin));
                }
            }
            worst
        })
    });
    group.finish();
}

fn bench_batch(c: &mut Criterion) {
    let seeds: Vec<f64> = (0..8).map(|i| 0.3 + 0.05 * i as f64).collect();
    let run_one = |v0: &f64| {
        let pot = ScalarPotentialConfig::new(0.6, -1.0, 0.1);
        integrate(
            ParticleState::new(
                0.0,
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, *v0, 0.3),
                AlgebraElement::new(0.6, 0.8, 0.0),
            ),
            &GaugeFieldConfig::WuYang,
            Some(&pot),
            &IntegratorConfig::rk4(1e-3, 5.0),
        )
        .unwrap()
        .samples
        .len()
    };

    let mut group = c.benchmark_group("batch_8_integrations");
    group.bench_function("library", |b| {
        b.iter(|| isolab::par::par_map(black_box(&seeds), run_one))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(&seeds).iter().map(run_one).collect::<Vec<_>>())
    });
    group.finish();
}

criterion_group!(benches, bench_ladder, bench_drift, bench_batch);
criterion_main!(benches);
