//! Fixtures shared by the criterion benches.

pub use bilinlab_core as core;

use bilinlab_core::oscint::{Amplitude, FrequencyProfile, Operator, SpaceTimeGrid, Support, MIN_NODES};
use bilinlab_core::phasekit::PhaseFunction;
use bilinlab_core::toruslab::{Family, Generator, ModeSet, RatioSetup};
use bilinlab_core::{Complex64, Result};

/// The d = 1 paraboloid operator at frequency scale `lambda` with a grid and
/// a smooth profile sized for it.
pub fn paraboloid_fixture(lambda: f64) -> Result<(Operator, FrequencyProfile, SpaceTimeGrid)> {
    let amp = Amplitude::new(Support::new(0.0, 0.5), vec![Support::new(0.0, 0.5)], vec![Support::new(1.5, 0.5)]);
    let op = Operator::new(PhaseFunction::paraboloid(1), amp, lambda);
    let bounds = op.bounds()?;
    let grid = SpaceTimeGrid::resolved(&op.amp, &[(&bounds, lambda)], MIN_NODES)?;
    let f = FrequencyProfile::from_fn(FrequencyProfile::axes_for(&op.amp, &bounds, lambda, MIN_NODES), |xi| {
        Complex64::from_polar(1.0, 3.0 * xi[0])
    });
    Ok((op, f, grid))
}

/// Mode sets of one slab/focused trial in d = 2 at λ_scale = 4.
pub fn torus_modes(n1: f64, n2: f64) -> Result<(ModeSet, ModeSet)> {
    let setup = RatioSetup {
        lambda_scale: 4.0,
        ..RatioSetup::new(2, n1, n2, 1.0 / n1).with_families(Family::Slab { halfwidth: 1.0 }, Family::Focused)
    };
    let (u, v) = setup.draw(0)?;
    Ok((
        ModeSet::from_field(&u, Generator::Schrodinger),
        ModeSet::from_field(&v, Generator::Schrodinger),
    ))
}

/// Gaussian band data in d = 2 at λ_scale = 1.
pub fn gaussian_modes(n1: f64, n2: f64) -> Result<(ModeSet, ModeSet)> {
    let (u, v) = RatioSetup::new(2, n1, n2, 1.0 / n1).draw(0)?;
    Ok((
        ModeSet::from_field(&u, Generator::Schrodinger),
        ModeSet::from_field(&v, Generator::Schrodinger),
    ))
}
