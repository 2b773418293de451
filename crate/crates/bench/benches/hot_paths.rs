//! Microbenchmarks of the kernels everything else loops over: single
//! gradient steps, full short trajectories, boundary extraction, the error
//! function, certificate search, and flow integration.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use margindyn::{
    decision_boundary, erfc, find_certificate, gd_step, gf_integrate, run_trajectory, FlowConfig,
    FlowMethod, Parameters, StopCriteria, THETA_STAR,
};

fn bench_gd_step(c: &mut Criterion) {
    let theta = Parameters::new(2.8, 0.1, -0.3, -0.05);
    c.bench_function("gd_step", |b| {
        b.iter(|| gd_step(black_box(&theta), 0.3).unwrap())
    });
}

fn bench_short_trajectory(c: &mut Criterion) {
    let theta = Parameters::new(2.8, 0.0, -0.3, 0.0);
    let stop = StopCriteria {
        classify_cap: 1000,
        equilibrium_tol: None,
    };
    c.bench_function("trajectory_1000_steps", |b| {
        b.iter(|| run_trajectory(black_box(&theta), 0.3, 1000, stop).unwrap())
    });
}

fn bench_decision_boundary(c: &mut Criterion) {
    let theta = Parameters::new(1.3, 0.4, -0.8, 0.2);
    c.bench_function("decision_boundary", |b| {
        b.iter(|| decision_boundary(black_box(&theta)).unwrap())
    });
}

fn bench_erfc(c: &mut Criterion) {
    c.bench_function("erfc", |b| b.iter(|| erfc(black_box(0.7))));
}

fn bench_find_certificate(c: &mut Criterion) {
    c.bench_function("find_certificate_at_optimum", |b| {
        b.iter(|| find_certificate(black_box(&THETA_STAR), 1e-9).unwrap())
    });
}

fn bench_flow_rk4(c: &mut Criterion) {
    let theta = Parameters::new(1.0, 0.5, -1.0, 0.5);
    let cfg = FlowConfig {
        dt: 0.01,
        duration: 1.0,
        method: FlowMethod::Rk4,
    };
    c.bench_function("gf_rk4_100_steps", |b| {
        b.iter(|| gf_integrate(black_box(&theta), cfg).unwrap())
    });
}

criterion_group!(
    benches,
    bench_gd_step,
    bench_short_trajectory,
    bench_decision_boundary,
    bench_erfc,
    bench_find_certificate,
    bench_flow_rk4
);
criterion_main!(benches);
