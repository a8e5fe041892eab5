//! Schrödinger evolution on the circle with a variable metric, and the
//! leading-order WKB parametrix measured against it.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{band_bump, pairwise_sum};
use crate::phasekit::{EikonalOptions, Metric, RaySlice};

/// Largest grid the dense solver accepts.
pub const MAX_POINTS: usize = 2048;
/// Symmetry defect of the discrete generator tolerated before symmetrizing.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// i∂_t u = −Δ_g u on R/2πZ, g = g¹¹(x), discretized spectrally.
///
/// With w = g^{−1/4}u the generator becomes B = G^{1/4} Dᵀ G^{1/2} D G^{1/4},
/// D the periodic spectral derivative, which is symmetric positive
/// semidefinite; its eigendecomposition gives the exact discrete flow.
#[derive(Clone, Debug)]
pub struct CircleSolver {
    pub metric: Metric,
    pub p: usize,
    g: Vec<f64>,
    eigvals: Vec<f64>,
    eigvecs: DMatrix<f64>,
}

fn spectral_derivative(p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            0.0
        } else {
            let k = i as i64 - j as i64;
            let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            0.5 * sign / (k as f64 * PI / p as f64).tan()
        }
    })
}

impl CircleSolver {
    pub fn new(metric: &Metric, p: usize) -> Result<Self> {
        metric.validate()?;
        if metric.dim != 1 {
            return Err(Error::Unsupported("circle solver needs a one-dimensional metric".into()));
        }
        if (metric.period - TAU).abs() > 1e-12 {
            return Err(Error::Config("circle solver needs a 2π-periodic metric".into()));
        }
        if p > MAX_POINTS {
            return Err(Error::Scale(format!("{p} grid points exceed the dense limit {MAX_POINTS}")));
        }
        if p < 8 || p % 2 != 0 {
            return Err(Error::Config(format!("grid size must be even and at least 8, got {p}")));
        }
        let g: Vec<f64> = (0..p).map(|i| metric.scalar_1d(TAU * i as f64 / p as f64).0).collect();
        let d = spectral_derivative(p);
        let q = DMatrix::from_fn(p, p, |i, j| d[(i, j)] * g[j].powf(0.25));
        let inner = DMatrix::from_fn(p, p, |i, j| g[i].sqrt() * q[(i, j)]);
        let mut b = q.transpose() * inner;
        let scale = b.amax();
        let defect = (&b - b.transpose()).amax();
        if defect > SYMMETRY_TOL * scale {
            return Err(Error::Discretization(format!(
                "generator symmetry defect {defect:.3e} relative to {scale:.3e}"
            )));
        }
        b = (&b + b.transpose()) * 0.5;
        let eig = SymmetricEigen::new(b);
        Ok(Self {
            metric: metric.clone(),
            p,
            g,
            eigvals: eig.eigenvalues.iter().copied().collect(),
            eigvecs: eig.eigenvectors,
        })
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.p).map(|i| TAU * i as f64 / self.p as f64).collect()
    }

    /// Quadrature weights of the Riemannian volume, (2π/P)/√g.
    pub fn weights(&self) -> Vec<f64> {
        self.g.iter().map(|g| TAU / self.p as f64 / g.sqrt()).collect()
    }

    pub fn mass(&self, u: &[Complex64]) -> f64 {
        let terms: Vec<f64> = u.iter().zip(self.weights()).map(|(v, w)| w * v.norm_sqr()).collect();
        pairwise_sum(&terms)
    }

    pub fn evolve(&self, u0: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
        if u0.len() != self.p {
            return Err(Error::Config(format!("expected {} samples, got {}", self.p, u0.len())));
        }
        let p = self.p;
        let w0 = DMatrix::from_fn(p, 2, |i, c| {
            let v = u0[i] / self.g[i].powf(0.25);
            if c == 0 {
                v.re
            } else {
                v.im
            }
        });
        let y = self.eigvecs.tr_mul(&w0);
        let rotated = DMatrix::from_fn(p, 2, |i, c| {
            let z = Complex64::new(y[(i, 0)], y[(i, 1)]) * Complex64::from_polar(1.0, -t * self.eigvals[i]);
            if c == 0 {
                z.re
            } else {
                z.im
            }
        });
        let w = &self.eigvecs * rotated;
        Ok((0..p)
            .map(|i| Complex64::new(w[(i, 0)], w[(i, 1)]) * self.g[i].powf(0.25))
            .collect())
    }
}

pub fn exact_1d_solver(metric: &Metric, u0: &[Complex64], t: f64, p: usize) -> Result<Vec<Complex64>> {
    CircleSolver::new(metric, p)?.evolve(u0, t)
}

/// Coefficients φ_bump(k/N)e^{−ikπ}, k ∈ [N/2, 2N]: a packet centred at π.
pub fn wave_packet(n: usize) -> Vec<(i64, Complex64)> {
    (n / 2..=2 * n)
        .map(|k| {
            let k = k as i64;
            (k, Complex64::from_polar(band_bump(k as f64 / n as f64), -(k as f64) * PI))
        })
        .filter(|(_, c)| c.norm() > 0.0)
        .collect()
}

pub fn synthesize(packet: &[(i64, Complex64)], xs: &[f64]) -> Vec<Complex64> {
    xs.iter()
        .map(|&x| packet.iter().map(|(k, c)| c * Complex64::from_polar(1.0, *k as f64 * x)).sum())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParametrixSample {
    pub h: f64,
    pub s: f64,
    /// ‖w̃(s) − w(s)‖ / ‖w₀‖ in the Riemannian L² norm.
    pub error: f64,
    pub min_jacobian: f64,
}

/// Leading-order parametrix Σ_k c_k a₀ e^{iφ̃(s,x,hk)/h} at semiclassical
/// time s, on the solver grid. Each frequency uses its own fan of rays.
pub fn parametrix(solver: &CircleSolver, packet: &[(i64, Complex64)], h: f64, s: f64) -> Result<(Vec<Complex64>, f64)> {
    let opts = EikonalOptions::default();
    let xs = solver.nodes();
    let parts: Vec<Result<(Vec<Complex64>, f64)>> = packet
        .par_iter()
        .map(|&(k, c)| {
            let xi = h * k as f64;
            let slice = RaySlice::new(&solver.metric, xi, s, solver.p, opts.grid.max_step);
            let jmin = slice.min_jacobian();
            if jmin < opts.jacobian_floor {
                return Err(Error::Caustic { s, jacobian: jmin });
            }
            let vals = xs
                .iter()
                .map(|&x| {
                    let pt = slice.locate(x);
                    c * pt.amp * Complex64::from_polar(1.0, k as f64 * x + pt.rho / h)
                })
                .collect();
            Ok((vals, jmin))
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); xs.len()];
    let mut jmin = f64::INFINITY;
    for part in parts {
        let (vals, j) = part?;
        jmin = jmin.min(j);
        for (o, v) in out.iter_mut().zip(vals) {
            *o += v;
        }
    }
    Ok((out, jmin))
}

/// Relative L² error of the parametrix at h = 1/N against the exact flow
/// at time t = h·s.
pub fn parametrix_error(solver: &CircleSolver, n: usize, s: f64) -> Result<ParametrixSample> {
    if n < 2 {
        return Err(Error::Config("band scale must be at least 2".into()));
    }
    if 4 * n >= solver.p {
        return Err(Error::Aliasing(format!("band 2N = {} needs more than {} grid points", 2 * n, solver.p)));
    }
    if !(s >= 0.0) {
        return Err(Error::Config("semiclassical time must be nonnegative".into()));
    }
    let h = 1.0 / n as f64;
    let packet = wave_packet(n);
    let u0 = synthesize(&packet, &solver.nodes());
    let exact = solver.evolve(&u0, h * s)?;
    let (approx, min_jacobian) = parametrix(solver, &packet, h, s)?;
    let diff: Vec<Complex64> = approx.iter().zip(&exact).map(|(a, b)| a - b).collect();
    Ok(ParametrixSample {
        h,
        s,
        error: (solver.mass(&diff) / solver.mass(&u0)).sqrt(),
        min_jacobian,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_matches_spectral_flow() {
        let solver = CircleSolver::new(&Metric::euclidean(1), 64).unwrap();
        let packet = wave_packet(8);
        let xs = solver.nodes();
        let u0 = synthesize(&packet, &xs);
        let t = 0.37;
        let got = solver.evolve(&u0, t).unwrap();
        let moved: Vec<(i64, Complex64)> = packet
            .iter()
            .map(|&(k, c)| (k, c * Complex64::from_polar(1.0, -t * (k * k) as f64)))
            .collect();
        let want = synthesize(&moved, &xs);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn mass_conserved() {
        let solver = CircleSolver::new(&Metric::cosine_1d(0.1), 128).unwrap();
        let u0 = synthesize(&wave_packet(8), &solver.nodes());
        let m0 = solver.mass(&u0);
        let m1 = solver.mass(&solver.evolve(&u0, 0.8).unwrap());
        assert!((m1 - m0).abs() < 1e-8 * m0);
    }

    /// Centered difference in time recovers iΔ_g u, with
    /// Δ_g e^{2ix} = (ig′ − 4g)e^{2ix} for g = 1 + ε cos x.
    #[test]
    fn generator_is_laplace_beltrami() {
        let eps = 0.3;
        let solver = CircleSolver::new(&Metric::cosine_1d(eps), 64).unwrap();
        let xs = solver.nodes();
        let u: Vec<Complex64> = xs.iter().map(|&x| Complex64::from_polar(1.0, 2.0 * x)).collect();
        let tau = 1e-4;
        let fwd = solver.evolve(&u, tau).unwrap();
        let bwd = solver.evolve(&u, -tau).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            let (g, g1) = (1.0 + eps * x.cos(), -eps * x.sin());
            let lap = Complex64::new(-4.0 * g, g1) * u[i];
            let dt = (fwd[i] - bwd[i]) / (2.0 * tau);
            assert!((dt - Complex64::i() * lap).norm() < 1e-6, "{x}: {dt} vs {}", Complex64::i() * lap);
        }
    }

    #[test]
    fn size_cap() {
        assert!(matches!(
            CircleSolver::new(&Metric::euclidean(1), 4096),
            Err(Error::Scale(_))
        ));
    }

    #[test]
    fn packet_band() {
        let p = wave_packet(16);
        assert!(p.iter().all(|(k, _)| (8..=32).contains(k)));
        assert!((p.iter().find(|(k, _)| *k == 16).unwrap().1 - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn initial_time_is_data() {
        let solver = CircleSolver::new(&Metric::cosine_1d(0.1), 128).unwrap();
        let e = parametrix_error(&solver, 16, 0.0).unwrap();
        assert!(e.error < 1e-10, "{}", e.error);
    }
}
