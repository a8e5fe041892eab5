use bilinlab_bench::core::oscint::{eval_direct, eval_oscillatory, kernel_k, KernelSetup, Support, Amplitude, MIN_NODES};
use bilinlab_bench::core::phasekit::{Metric, PhaseFunction};
use bilinlab_bench::core::toruslab::{product_norm_sq, resonance_oracle, Backend, CircleSolver};
use bilinlab_bench::core::{fit_power_law, Complex64};
use bilinlab_bench::{gaussian_modes, paraboloid_fixture, torus_modes};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn oscillatory(c: &mut Criterion) {
    let mut g = c.benchmark_group("oscint-eval");
    for lambda in [32.0, 128.0] {
        let (op, f, grid) = paraboloid_fixture(lambda).unwrap();
        g.bench_with_input(BenchmarkId::new("separable", lambda), &lambda, |b, _| {
            b.iter(|| eval_oscillatory(&op, &f, &grid).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("direct", lambda), &lambda, |b, _| {
            b.iter(|| eval_direct(&op, &f, &grid).unwrap())
        });
    }
    g.finish();
}

fn kernel(c: &mut Criterion) {
    let amp_a = Amplitude::new(Support::new(0.0, 0.5), vec![Support::new(0.0, 0.5)], vec![Support::new(1.5, 0.5)]);
    let amp_b = Amplitude::new(Support::new(0.0, 0.5), vec![Support::new(0.0, 0.5)], vec![Support::new(-1.0, 1.0)]);
    let setup = KernelSetup::new(
        PhaseFunction::paraboloid(1),
        amp_a,
        PhaseFunction::paraboloid(1),
        amp_b,
        64.0,
        8.0,
        vec![],
        MIN_NODES,
    )
    .unwrap();
    c.bench_function("kernel-k/lambda=64", |b| {
        b.iter(|| kernel_k(&setup, black_box(&[1.4]), -0.8, &[1.6], -1.1))
    });
}

fn torus(c: &mut Criterion) {
    let mut g = c.benchmark_group("torus-product");
    g.sample_size(10);
    for n1 in [16.0, 64.0] {
        let (u, v) = torus_modes(n1, 2.0).unwrap();
        for backend in [Backend::Fft, Backend::Sparse] {
            g.bench_with_input(BenchmarkId::new(format!("{backend:?}").to_lowercase(), n1), &n1, |b, &n1| {
                b.iter(|| product_norm_sq(&u, &v, 1.0 / n1, backend).unwrap())
            });
        }
    }
    let (u, v) = gaussian_modes(8.0, 1.0).unwrap();
    g.bench_function("gaussian-auto/8", |b| b.iter(|| product_norm_sq(&u, &v, 0.125, Backend::Auto).unwrap()));
    g.finish();

    let (u, v) = gaussian_modes(2.0, 0.5).unwrap();
    if u.len() * v.len() <= 10_000 {
        c.bench_function("resonance-oracle/toy", |b| b.iter(|| resonance_oracle(&u, &v, 0.5).unwrap()));
    }
}

fn circle(c: &mut Criterion) {
    let mut g = c.benchmark_group("circle");
    g.sample_size(10);
    let metric = Metric::cosine_1d(0.1);
    g.bench_function("eigensolve/256", |b| b.iter(|| CircleSolver::new(&metric, 256).unwrap()));
    let solver = CircleSolver::new(&metric, 256).unwrap();
    let u0: Vec<Complex64> = solver.nodes().iter().map(|&x| Complex64::from_polar(1.0, 4.0 * x)).collect();
    g.bench_function("evolve/256", |b| b.iter(|| solver.evolve(&u0, 0.3).unwrap()));
    g.finish();
}

fn fits(c: &mut Criterion) {
    let pts: Vec<(f64, f64)> = (1..=64).map(|i| (i as f64, (i as f64).powf(-0.5))).collect();
    c.bench_function("fit-power-law/64", |b| b.iter(|| fit_power_law(black_box(&pts)).unwrap()));
}

criterion_group!(benches, oscillatory, kernel, torus, circle, fits);
criterion_main!(benches);
