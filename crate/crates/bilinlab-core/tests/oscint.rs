use bilinlab_core::oscint::{
    decay_sweep, eval_direct, eval_oscillatory, kernel_k, sharpness_witness, Amplitude, DecaySweep,
    FrequencyProfile, KernelSetup, MuRule, Operator, ScaleSchedule, SpaceTimeGrid, Support, MIN_NODES,
};
use bilinlab_core::phasekit::PhaseFunction;
use bilinlab_core::{Complex64, Error};
use proptest::prelude::*;

fn amp(xi: (f64, f64)) -> Amplitude {
    Amplitude::new(Support::new(0.0, 0.5), vec![Support::new(0.0, 0.5)], vec![Support::new(xi.0, xi.1)])
}

fn paraboloid_pair(xi_b: (f64, f64)) -> (Operator, Operator) {
    (
        Operator::new(PhaseFunction::paraboloid(1), amp((1.5, 0.5)), 1.0),
        Operator::new(PhaseFunction::paraboloid(1), amp(xi_b), 1.0),
    )
}

fn small_sweep(xi_b: (f64, f64), lambdas: Vec<f64>, mu: f64) -> DecaySweep {
    let (a, b) = paraboloid_pair(xi_b);
    DecaySweep {
        trials: 2,
        ..DecaySweep::new(a, b, ScaleSchedule::Lambda {
            lambdas,
            mu: MuRule::Fixed(mu),
        })
    }
}

#[test]
fn sweep_is_deterministic() {
    let s = small_sweep((-1.0, 1.0), vec![16.0, 32.0], 8.0);
    let a = decay_sweep(&s).unwrap();
    assert_eq!(a, decay_sweep(&s).unwrap());
    assert!(a[1].ratio < a[0].ratio);
}

#[test]
fn coinciding_caps_fail_the_hypothesis() {
    let s = small_sweep((1.5, 0.5), vec![16.0, 32.0], 8.0);
    assert!(matches!(decay_sweep(&s), Err(Error::Precondition(_))));
}

#[test]
fn mu_above_lambda_is_an_argument_error() {
    let s = small_sweep((-1.0, 1.0), vec![16.0, 32.0], 24.0);
    assert!(matches!(decay_sweep(&s), Err(Error::ArgumentOrder { .. })));
}

#[test]
fn hyperplane_routes_agree() {
    let op = Operator::new(PhaseFunction::hyperplane(vec![0.7]), amp((1.5, 0.5)), 24.0);
    let bounds = op.bounds().unwrap();
    let grid = SpaceTimeGrid::resolved(&op.amp, &[(&bounds, 24.0)], MIN_NODES).unwrap();
    let f = FrequencyProfile::from_fn(FrequencyProfile::axes_for(&op.amp, &bounds, 24.0, MIN_NODES), |xi| {
        Complex64::new(xi[0], 1.0 - xi[0] * xi[0])
    });
    let a = eval_oscillatory(&op, &f, &grid).unwrap();
    let b = eval_direct(&op, &f, &grid).unwrap();
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let gap = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    assert!(gap < 1e-10 * scale, "gap {gap:e}");
}

#[test]
fn sharpness_scaled_ratio_is_flat() {
    let s: Vec<f64> = [16.0, 32.0, 64.0, 128.0]
        .iter()
        .map(|&n| sharpness_witness(n, 1).unwrap().scaled_ratio)
        .collect();
    let (lo, hi) = s.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    assert!(hi / lo < 1.01, "{s:?}");
}

fn kernel_setup() -> KernelSetup {
    let grid = SpaceTimeGrid::new(
        bilinlab_core::numerics::linspace(-0.5, 0.5, 9),
        vec![bilinlab_core::numerics::linspace(-0.5, 0.5, 9)],
    )
    .unwrap();
    KernelSetup::with_grid(
        PhaseFunction::paraboloid(1),
        amp((1.5, 0.5)),
        PhaseFunction::paraboloid(1),
        amp((-1.0, 1.0)),
        16.0,
        4.0,
        vec![],
        grid,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_is_hermitian(z in 1.0f64..2.0, q in -2.0f64..0.0, x in 1.0f64..2.0, p in -2.0f64..0.0) {
        let s = kernel_setup();
        let k = kernel_k(&s, &[z], q, &[x], p).value;
        let kt = kernel_k(&s, &[x], p, &[z], q).value;
        prop_assert_eq!(k, kt.conj());
        let d = kernel_k(&s, &[z], q, &[z], q).value;
        prop_assert!(d.im == 0.0 && d.re >= 0.0);
    }
}
