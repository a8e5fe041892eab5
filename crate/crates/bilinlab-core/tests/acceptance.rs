//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test -p bilinlab-core --test acceptance`.

use std::path::PathBuf;

use bilinlab_core::harness::{run_experiment, Check, ExperimentConfig, Outcome, ResultRecord, RunOptions};
use bilinlab_core::numerics::{geomspace, linspace};
use bilinlab_core::oscint::{kernel_k, sharpness_witness, Amplitude, KernelSetup, SpaceTimeGrid, Support};
use bilinlab_core::phasekit::{normal_vector, solve_eikonal, EikonalGrid, EikonalOptions, Metric, PhaseFunction};
use bilinlab_core::toruslab::{
    make_band_field, propagate, ratio_of_fields, resonance_oracle, Backend, DyadicBand, FourierMultiplier,
    Generator, ModeSet, TorusField,
};
use bilinlab_core::{fit_power_law, Complex64};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Line {
    id: usize,
    pass: bool,
    detail: String,
}

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn describe(rec: &ResultRecord) -> String {
    rec.verdicts
        .iter()
        .map(|v| match &v.check {
            Check::Exponent { bound, .. } => format!(
                "{} {:?} {:.4} (claim {}, R2 {:.4}, {:.2} dec)",
                v.name, v.status, bound.fitted, bound.claimed, bound.r_squared, bound.span_decades
            ),
            Check::AtMost { measured, limit } => format!("{} {:?} {measured:.4e} <= {limit}", v.name, v.status),
            Check::AtLeast { measured, limit } => format!("{} {:?} {measured:.4e} >= {limit}", v.name, v.status),
            Check::Error { cell } => format!("{} {:?} error in {cell}", v.name, v.status),
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn by_config(id: usize, names: &[&str]) -> Line {
    run_configs(id, names).0
}

fn run_configs(id: usize, names: &[&str]) -> (Line, Vec<ResultRecord>) {
    let mut pass = true;
    let mut detail = Vec::new();
    let mut records = Vec::new();
    for name in names {
        match run_experiment(&config(name), &RunOptions::default()) {
            Ok(rec) => {
                pass &= rec.outcome() == Outcome::Pass;
                detail.push(format!("[{}] {}", rec.config.label, describe(&rec)));
                records.push(rec);
            }
            Err(e) => {
                pass = false;
                detail.push(format!("[{name}] {e}"));
            }
        }
    }
    let line = Line {
        id,
        pass,
        detail: detail.join(" "),
    };
    (line, records)
}

fn kernel_criterion() -> Line {
    let (mut line, records) = run_configs(4, &["kernel.toml"]);
    let Some(rec) = records.first() else { return line };
    for f in &rec.fits {
        line.pass &= f.fit.span_decades >= 1.5;
        line.detail.push_str(&format!(" {} span {:.2} dec", f.name, f.fit.span_decades));
    }
    line.pass &= rec.fits.len() == 2;
    line
}

fn time_one_criterion() -> Line {
    let (mut line, records) = run_configs(6, &["torus-time-one.toml"]);
    let Some(rec) = records.first() else { return line };
    for v in &rec.verdicts {
        if let Check::Exponent { bound, .. } = &v.check {
            line.pass &= bound.uniform_constant.is_finite() && bound.uniform_constant > 0.0;
            line.detail.push_str(&format!(" uniform constant {:.4}", bound.uniform_constant));
        }
    }
    line
}

fn sharpness_criterion() -> Line {
    let mut scaled: Vec<f64> = [16.0, 32.0, 64.0, 128.0]
        .iter()
        .map(|&n| sharpness_witness(n, 1).map(|s| s.scaled_ratio).unwrap_or(f64::NAN))
        .collect();
    let shown = format!("{scaled:.4?}");
    scaled.sort_by(f64::total_cmp);
    let median = 0.5 * (scaled[1] + scaled[2]);
    let worst = scaled.iter().map(|s| (s / median).max(median / s)).fold(0.0, f64::max);
    Line {
        id: 9,
        pass: worst <= 1.5,
        detail: format!("ratio*N1^(1/2) = {shown}, max factor from median {worst:.4}"),
    }
}

fn toy_field(rng: &mut ChaCha8Rng, d: usize, lambda: f64) -> TorusField {
    let mut f = TorusField::zeros(d, 16, lambda).unwrap();
    for _ in 0..rng.random_range(1..=8) {
        let k = [rng.random_range(-5..=5), if d == 2 { rng.random_range(-5..=5) } else { 0 }];
        let slot = f.slot(k).unwrap();
        f.coeffs[slot] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0) + 1e-3);
    }
    f
}

fn generator(rng: &mut ChaCha8Rng) -> Generator {
    [Generator::Schrodinger, Generator::HalfWave(1), Generator::HalfWave(-1)][rng.random_range(0..3)]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn oracle_criterion() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let d = rng.random_range(1..=2);
        let lambda = [1.0, 2.0][rng.random_range(0..2)];
        let (u, v) = (toy_field(&mut rng, d, lambda), toy_field(&mut rng, d, lambda));
        let t = rng.random_range(0.05..2.0);
        let g = [generator(&mut rng), generator(&mut rng)];
        let (mu, mv) = (ModeSet::from_field(&u, g[0]), ModeSet::from_field(&v, g[1]));
        let exact = resonance_oracle(&mu, &mv, t).unwrap().sqrt() / (mu.norm_sq() * mv.norm_sq()).sqrt();
        for backend in [Backend::Fft, Backend::Sparse] {
            let r = ratio_of_fields(&u, &v, t, g, [0, 0], backend).unwrap();
            worst = worst.max(rel(r, exact));
        }
    }
    Line {
        id: 11,
        pass: worst <= 1e-6,
        detail: format!("50 instances, both backends, worst relative gap {worst:.3e}"),
    }
}

fn invariant_suite() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut failures = Vec::new();
    let mut check = |name: &str, ok: bool, value: f64| {
        if !ok {
            failures.push(format!("{name} {value:.3e}"));
        }
    };

    let (mut unit, mut parseval, mut commute) = (0.0f64, 0.0f64, true);
    for seed in 0..16 {
        let d = 1 + seed as usize % 2;
        let u = make_band_field(d, 64, 1.0, &DyadicBand::new(6.0), seed).unwrap();
        let mult = if seed % 2 == 0 {
            FourierMultiplier::Schrodinger { t: rng.random_range(-3.0..3.0) }
        } else {
            FourierMultiplier::HalfWave { t: rng.random_range(-3.0..3.0), sign: 1 }
        };
        unit = unit.max(rel(propagate(&u, &mult).norm(), u.norm()));
        parseval = parseval.max(rel(u.physical_norm(), u.norm()));
        let band = DyadicBand::new(rng.random_range(2.0..8.0));
        let a = propagate(&u.project(&band), &mult);
        let b = propagate(&u, &mult).project(&band);
        for idx in 0..u.coeffs.len() {
            let w = band.weight(u.frequency(idx));
            let gap = (a.coeffs[idx] - b.coeffs[idx]).norm();
            commute &= if w == 0.0 || w == 1.0 {
                gap == 0.0
            } else {
                gap <= 4.0 * f64::EPSILON * u.coeffs[idx].norm()
            };
        }
    }
    check("unitarity", unit < 1e-14, unit);
    check("parseval", parseval < 1e-12, parseval);
    check("commutation", commute, 0.0);

    let opts = EikonalOptions {
        grid: EikonalGrid {
            n_s: 64,
            n_x: 64,
            n_xi: 64,
            ..EikonalGrid::default()
        },
        ..EikonalOptions::default()
    };
    let residual = solve_eikonal(&Metric::cosine_1d(0.1), 0.2, (1.0, 2.0), &opts)
        .map(|t| t.max_residual)
        .unwrap_or(f64::INFINITY);
    check("eikonal residual", residual < 1e-6, residual);

    let mut ortho = 0.0f64;
    for i in 0..200 {
        let phase = if i % 2 == 0 { PhaseFunction::cone(2) } else { PhaseFunction::paraboloid(2) };
        let t = rng.random_range(-1.0..1.0);
        let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let xi = [rng.random_range(0.5..2.0), rng.random_range(0.5..2.0)];
        let h = phase.mixed_hess(t, &x, &xi).unwrap();
        let nu = normal_vector(&phase, t, &x, &xi).unwrap();
        for j in 0..2 {
            ortho = ortho.max(h.column(j).iter().zip(&nu).map(|(a, b)| a * b).sum::<f64>().abs());
        }
    }
    check("normal orthogonality", ortho < 1e-10, ortho);

    let amp = |lo: f64, hi: f64| {
        Amplitude::new(Support::new(0.0, 0.5), vec![Support::new(0.0, 0.5)], vec![Support::new(lo, hi)])
    };
    let grid = SpaceTimeGrid::new(linspace(-0.5, 0.5, 9), vec![linspace(-0.5, 0.5, 9)]).unwrap();
    let setup = KernelSetup::with_grid(
        PhaseFunction::paraboloid(1),
        amp(1.5, 0.5),
        PhaseFunction::paraboloid(1),
        amp(-1.0, 1.0),
        16.0,
        4.0,
        vec![],
        grid,
    )
    .unwrap();
    let mut hermitian = true;
    for _ in 0..32 {
        let (z, q, x, p) = (
            rng.random_range(1.0..2.0),
            rng.random_range(-2.0..0.0),
            rng.random_range(1.0..2.0),
            rng.random_range(-2.0..0.0),
        );
        hermitian &= kernel_k(&setup, &[z], q, &[x], p).value == kernel_k(&setup, &[x], p, &[z], q).value.conj();
    }
    check("kernel conjugate symmetry", hermitian, 0.0);

    let mut fit_gap = 0.0f64;
    for _ in 0..64 {
        let (c, p) = (rng.random_range(1e-2..1e2), rng.random_range(-4.0..4.0));
        let pts: Vec<(f64, f64)> = geomspace(1.0, 1e3, 7).into_iter().map(|s| (s, c * s.powf(p))).collect();
        fit_gap = fit_gap.max((fit_power_law(&pts).unwrap().exponent - p).abs());
    }
    check("fit exactness", fit_gap < 1e-12, fit_gap);

    Line {
        id: 12,
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!(
                "unitarity {unit:.1e}, parseval {parseval:.1e}, commutation exact, eikonal {residual:.1e}, \
                 orthogonality {ortho:.1e}, kernel symmetry exact, fit {fit_gap:.1e}"
            )
        } else {
            failures.join(", ")
        },
    }
}

fn main() {
    let criteria: Vec<Box<dyn Fn() -> Line>> = vec![
        Box::new(|| by_config(1, &["decay-lambda.toml"])),
        Box::new(|| by_config(2, &["decay-mu.toml"])),
        Box::new(|| by_config(3, &["decay-hyperplane.toml"])),
        Box::new(kernel_criterion),
        Box::new(|| by_config(5, &["torus-semiclassical.toml"])),
        Box::new(time_one_criterion),
        Box::new(|| by_config(7, &["torus-rescaled-small.toml", "torus-rescaled-large.toml"])),
        Box::new(|| by_config(8, &["torus-mixed.toml"])),
        Box::new(sharpness_criterion),
        Box::new(|| by_config(10, &["parametrix.toml"])),
        Box::new(oracle_criterion),
        Box::new(invariant_suite),
    ];
    let mut failed = Vec::new();
    for criterion in &criteria {
        let start = std::time::Instant::now();
        let line = criterion();
        println!(
            "criterion {:>2}: {} ({:.1} s) {}",
            line.id,
            if line.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            line.detail
        );
        if !line.pass {
            failed.push(line.id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("all {} criteria pass", criteria.len());
}
