use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::amplitude::{Amplitude, Support};
use crate::error::{Error, Result};
use crate::numerics::{complex_gaussian, linspace, trapezoid_weights};
use crate::phasekit::transversality::tensor_points;
use crate::phasekit::PhaseFunction;

/// Points per wavelength demanded by the resolution rule.
pub const POINTS_PER_WAVELENGTH: f64 = 8.0;
/// Floor on nodes per axis; keeps the plateau cutoffs resolved at small λ.
pub const MIN_NODES: usize = 33;

/// Largest admissible step for oscillation λ·sup|∂φ| on one axis.
pub fn max_step(lambda: f64, sup_derivative: f64) -> f64 {
    if sup_derivative <= 0.0 || lambda <= 0.0 {
        f64::INFINITY
    } else {
        std::f64::consts::TAU / (POINTS_PER_WAVELENGTH * lambda * sup_derivative)
    }
}

/// Uniform nodes covering a support with at most `step` spacing.
pub fn uniform_axis(s: &Support, step: f64, min_nodes: usize) -> Vec<f64> {
    let by_step = if step.is_finite() && step > 0.0 {
        (2.0 * s.radius / step).ceil() as usize + 1
    } else {
        0
    };
    linspace(s.lo(), s.hi(), by_step.max(min_nodes).max(2))
}

fn axis_step(nodes: &[f64]) -> f64 {
    if nodes.len() < 2 {
        0.0
    } else {
        (nodes[nodes.len() - 1] - nodes[0]) / (nodes.len() - 1) as f64
    }
}

/// Sup of |∂_t φ|, |∂_{x_i} φ| and |∂_{ξ_i} φ| over a sampled support box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseBounds {
    pub dt: f64,
    pub dx: Vec<f64>,
    pub dxi: Vec<f64>,
}

impl PhaseBounds {
    pub fn sample(phase: &PhaseFunction, amp: &Amplitude) -> Result<Self> {
        let d = phase.dim;
        if amp.dim() != d || amp.xi.len() != d {
            return Err(Error::Config(format!("amplitude dimension {} does not match phase dimension {d}", amp.dim())));
        }
        let per_axis = if d == 1 { 9 } else { 5 };
        let ts = linspace(amp.t.lo(), amp.t.hi(), per_axis);
        let xs = tensor_points(&amp.x.iter().map(|s| linspace(s.lo(), s.hi(), per_axis)).collect::<Vec<_>>());
        let xis = tensor_points(&amp.xi.iter().map(|s| linspace(s.lo(), s.hi(), per_axis)).collect::<Vec<_>>());
        let mut b = PhaseBounds {
            dt: 0.0,
            dx: vec![0.0; d],
            dxi: vec![0.0; d],
        };
        for &t in &ts {
            for x in &xs {
                for xi in &xis {
                    let g = phase.grad_tx(t, x, xi)?;
                    let gx = phase.grad_xi(t, x, xi)?;
                    for i in 0..d {
                        b.dx[i] = b.dx[i].max(g[i].abs());
                        b.dxi[i] = b.dxi[i].max(gx[i].abs());
                    }
                    b.dt = b.dt.max(g[d].abs());
                }
            }
        }
        Ok(b)
    }
}

/// Tensor grid over (t, x) with trapezoid weights; x points flattened,
/// first axis slowest. Fields on the grid are stored x-major:
/// index = ix · n_t + it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeGrid {
    pub t: Vec<f64>,
    pub x_axes: Vec<Vec<f64>>,
    pub t_weights: Vec<f64>,
    pub x_points: Vec<Vec<f64>>,
    pub x_weights: Vec<f64>,
}

impl SpaceTimeGrid {
    pub fn new(t: Vec<f64>, x_axes: Vec<Vec<f64>>) -> Result<Self> {
        if t.is_empty() || x_axes.is_empty() || x_axes.iter().any(|a| a.is_empty()) {
            return Err(Error::Config("space-time grid needs nonempty axes".into()));
        }
        for axis in std::iter::once(&t).chain(x_axes.iter()) {
            if axis.len() > 1 && !(axis_step(axis) > 0.0) {
                return Err(Error::Config("grid steps must be strictly positive".into()));
            }
        }
        let t_weights = trapezoid_weights(t.len(), axis_step(&t));
        let x_points = tensor_points(&x_axes);
        let axis_w: Vec<Vec<f64>> = x_axes.iter().map(|a| trapezoid_weights(a.len(), axis_step(a))).collect();
        let x_weights = tensor_points(&axis_w).into_iter().map(|w| w.iter().product()).collect();
        Ok(Self {
            t,
            x_axes,
            t_weights,
            x_points,
            x_weights,
        })
    }

    /// Grid over the (t, x) support of `amp`, fine enough for every
    /// (phase, λ) pair listed.
    pub fn resolved(amp: &Amplitude, pairs: &[(&PhaseBounds, f64)], min_nodes: usize) -> Result<Self> {
        let d = amp.dim();
        let mut t_step = f64::INFINITY;
        let mut x_steps = vec![f64::INFINITY; d];
        for (b, lambda) in pairs {
            t_step = t_step.min(max_step(*lambda, b.dt));
            for i in 0..d {
                x_steps[i] = x_steps[i].min(max_step(*lambda, b.dx[i]));
            }
        }
        let t = uniform_axis(&amp.t, t_step, min_nodes);
        let x_axes = amp.x.iter().zip(&x_steps).map(|(s, &h)| uniform_axis(s, h, min_nodes)).collect();
        Self::new(t, x_axes)
    }

    pub fn n_t(&self) -> usize {
        self.t.len()
    }

    pub fn n_x(&self) -> usize {
        self.x_points.len()
    }

    pub fn len(&self) -> usize {
        self.n_t() * self.n_x()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn t_step(&self) -> f64 {
        axis_step(&self.t)
    }

    pub fn x_steps(&self) -> Vec<f64> {
        self.x_axes.iter().map(|a| axis_step(a)).collect()
    }

    /// Checks the oscillation-resolution rule for one (phase, λ) pair.
    pub fn check(&self, bounds: &PhaseBounds, lambda: f64) -> Result<()> {
        let tol = 1.0 + 1e-9;
        let lim = max_step(lambda, bounds.dt);
        if self.n_t() > 1 && self.t_step() > lim * tol {
            return Err(Error::Resolution {
                axis: "t".into(),
                step: self.t_step(),
                max_step: lim,
            });
        }
        for (i, h) in self.x_steps().into_iter().enumerate() {
            let lim = max_step(lambda, bounds.dx[i]);
            if self.x_axes[i].len() > 1 && h > lim * tol {
                return Err(Error::Resolution {
                    axis: format!("x{}", i + 1),
                    step: h,
                    max_step: lim,
                });
            }
        }
        Ok(())
    }
}

/// Smooth random function on a ξ-box: a tensor sum of Gaussian bumps with
/// standard complex Gaussian coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomProfile {
    pub centers: Vec<Vec<f64>>,
    pub widths: Vec<f64>,
    pub coeffs: Vec<Complex64>,
}

impl RandomProfile {
    pub const BUMPS_PER_AXIS: usize = 4;

    pub fn draw<R: Rng + ?Sized>(boxes: &[Support], rng: &mut R) -> Self {
        let j = Self::BUMPS_PER_AXIS;
        let centers: Vec<Vec<f64>> = boxes.iter().map(|s| linspace(s.lo(), s.hi(), j)).collect();
        let widths = boxes.iter().map(|s| (2.0 * s.radius / (j - 1) as f64).max(1e-12)).collect();
        let n = j.pow(boxes.len() as u32);
        let coeffs = (0..n).map(|_| complex_gaussian(rng)).collect();
        Self { centers, widths, coeffs }
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        let d = self.centers.len();
        let j = Self::BUMPS_PER_AXIS;
        let factors: Vec<Vec<f64>> = (0..d)
            .map(|a| {
                self.centers[a]
                    .iter()
                    .map(|c| {
                        let u = (xi[a] - c) / self.widths[a];
                        (-0.5 * u * u).exp()
                    })
                    .collect()
            })
            .collect();
        let mut out = Complex64::new(0.0, 0.0);
        for (idx, c) in self.coeffs.iter().enumerate() {
            let mut w = 1.0;
            let mut r = idx;
            for a in (0..d).rev() {
                w *= factors[a][r % j];
                r /= j;
            }
            out += c * w;
        }
        out
    }
}

/// Samples f(ξ) on a tensor grid with trapezoid weights.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyProfile {
    pub axes: Vec<Vec<f64>>,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl FrequencyProfile {
    pub fn from_fn(axes: Vec<Vec<f64>>, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let points = tensor_points(&axes);
        let axis_w: Vec<Vec<f64>> = axes.iter().map(|a| trapezoid_weights(a.len(), axis_step(a))).collect();
        let weights = tensor_points(&axis_w).into_iter().map(|w| w.iter().product()).collect();
        let values = points.iter().map(|p| f(p)).collect();
        Self {
            axes,
            points,
            weights,
            values,
        }
    }

    /// Axes over the amplitude's ξ-box, fine enough for λ·sup|∂_ξ φ|.
    pub fn axes_for(amp: &Amplitude, bounds: &PhaseBounds, lambda: f64, min_nodes: usize) -> Vec<Vec<f64>> {
        amp.xi
            .iter()
            .zip(&bounds.dxi)
            .map(|(s, &b)| uniform_axis(s, max_step(lambda, b), min_nodes))
            .collect()
    }

    pub fn node_counts(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.len()).collect()
    }

    pub fn steps(&self) -> Vec<f64> {
        self.axes.iter().map(|a| axis_step(a)).collect()
    }

    /// Discrete L² norm (Σ w |f|²)^{1/2}.
    pub fn norm(&self) -> f64 {
        let terms: Vec<f64> = self.weights.iter().zip(&self.values).map(|(w, v)| w * v.norm_sqr()).collect();
        crate::numerics::pairwise_sum(&terms).sqrt()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }

    pub fn check(&self, bounds: &PhaseBounds, lambda: f64) -> Result<()> {
        for (i, h) in self.steps().into_iter().enumerate() {
            let lim = max_step(lambda, bounds.dxi[i]);
            if self.axes[i].len() > 1 && h > lim * (1.0 + 1e-9) {
                return Err(Error::Resolution {
                    axis: format!("xi{}", i + 1),
                    step: h,
                    max_step: lim,
                });
            }
        }
        Ok(())
    }
}
