//! The TT* kernel K(ζ,q,ξ,p) = Σ w e^{iλ[Φ(ξ,p) − Φ(ζ,q)]} c(ξ,p) c(ζ,q) and
//! its off-diagonal decay.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::amplitude::Amplitude;
use super::grid::{PhaseBounds, SpaceTimeGrid};
use crate::error::{Error, Result};
use crate::numerics::{geomspace, pairwise_sum_complex};
use crate::phasekit::PhaseFunction;
use crate::scalefit::{fit_power_law, ScalingFit};

/// Everything needed to evaluate Φ and c for one frozen ξ₂′.
#[derive(Clone, Debug)]
pub struct KernelSetup {
    pub phi: PhaseFunction,
    pub amp_a: Amplitude,
    pub psi: PhaseFunction,
    pub amp_b: Amplitude,
    pub lambda: f64,
    pub mu: f64,
    /// ξ₂′ ∈ R^{d−1}; ξ₂ = (p, ξ₂′).
    pub xi2_frozen: Vec<f64>,
    /// A⁻¹B with A, B the x-blocks of the mixed Hessians at the support centers.
    pub shift: DMatrix<f64>,
    pub grid: SpaceTimeGrid,
}

fn x_block(phase: &PhaseFunction, amp: &Amplitude) -> Result<DMatrix<f64>> {
    let (t, x, xi) = amp.center();
    let h = phase.mixed_hess(t, &x, &xi)?;
    let d = phase.dim;
    Ok(h.rows(0, d).into_owned())
}

impl KernelSetup {
    /// Builds the setup with a (t, x) grid over `amp_a`'s support resolving λΦ.
    pub fn new(
        phi: PhaseFunction,
        amp_a: Amplitude,
        psi: PhaseFunction,
        amp_b: Amplitude,
        lambda: f64,
        mu: f64,
        xi2_frozen: Vec<f64>,
        min_nodes: usize,
    ) -> Result<Self> {
        let ba = PhaseBounds::sample(&phi, &amp_a)?;
        let bb = PhaseBounds::sample(&psi, &amp_b)?;
        let r = mu / lambda;
        let combined = PhaseBounds {
            dt: ba.dt + r * bb.dt,
            dx: ba.dx.iter().zip(&bb.dx).map(|(a, b)| a + r * b).collect(),
            dxi: ba.dxi.clone(),
        };
        let grid = SpaceTimeGrid::resolved(&amp_a, &[(&combined, lambda)], min_nodes)?;
        Self::with_grid(phi, amp_a, psi, amp_b, lambda, mu, xi2_frozen, grid)
    }

    /// Caller-supplied grid; no resolution check is made.
    pub fn with_grid(
        phi: PhaseFunction,
        amp_a: Amplitude,
        psi: PhaseFunction,
        amp_b: Amplitude,
        lambda: f64,
        mu: f64,
        xi2_frozen: Vec<f64>,
        grid: SpaceTimeGrid,
    ) -> Result<Self> {
        if mu > lambda {
            return Err(Error::ArgumentOrder { lambda, mu });
        }
        let d = phi.dim;
        if psi.dim != d || xi2_frozen.len() + 1 != d {
            return Err(Error::Config(format!("kernel setup needs matching dimensions and |xi2'| = d - 1 = {}", d - 1)));
        }
        let a = x_block(&phi, &amp_a)?;
        let b = x_block(&psi, &amp_b)?;
        let smin = crate::phasekit::transversality::sigma_min(&a);
        let floor = 1e-10;
        if !(smin >= floor) {
            return Err(Error::Degenerate { sigma_min: smin, floor });
        }
        let shift = a.try_inverse().ok_or(Error::Degenerate { sigma_min: 0.0, floor })? * b;
        Ok(Self {
            phi,
            amp_a,
            psi,
            amp_b,
            lambda,
            mu,
            xi2_frozen,
            shift,
            grid,
        })
    }

    fn xi2(&self, p: f64) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.xi2_frozen.len() + 1);
        v.push(p);
        v.extend_from_slice(&self.xi2_frozen);
        v
    }

    /// ξ − (μ/λ)A⁻¹Bξ₂.
    pub fn shifted(&self, xi: &[f64], p: f64) -> Vec<f64> {
        let x2 = DVector::from_vec(self.xi2(p));
        let s = &self.shift * x2 * (self.mu / self.lambda);
        xi.iter().zip(s.iter()).map(|(a, b)| a - b).collect()
    }

    /// e^{iλΦ(·,ξ,p)} c(·,ξ,p) on the grid, x-major.
    pub fn wave(&self, xi: &[f64], p: f64) -> Vec<Complex64> {
        let eta = self.shifted(xi, p);
        let x2 = self.xi2(p);
        let ratio = self.mu / self.lambda;
        let axi = self.amp_a.factor_xi(&eta) * self.amp_b.factor_xi(&x2);
        let nt = self.grid.n_t();
        let zero = Complex64::new(0.0, 0.0);
        if axi == 0.0 {
            return vec![zero; self.grid.len()];
        }
        let rows: Vec<Vec<Complex64>> = self
            .grid
            .x_points
            .par_iter()
            .map(|x| {
                let ax = self.amp_a.factor_x(x) * self.amp_b.factor_x(x);
                let mut row = vec![zero; nt];
                if ax == 0.0 {
                    return row;
                }
                for (it, &t) in self.grid.t.iter().enumerate() {
                    let c = ax * axi * self.amp_a.factor_t(t) * self.amp_b.factor_t(t);
                    if c == 0.0 {
                        continue;
                    }
                    let ph = self.phi.phi_unchecked(t, x, &eta).unwrap_or(0.0)
                        + ratio * self.psi.phi_unchecked(t, x, &x2).unwrap_or(0.0);
                    row[it] = Complex64::from_polar(c, self.lambda * ph);
                }
                row
            })
            .collect();
        rows.concat()
    }

    /// Σ w conj(W_ζq) W_ξp over the grid.
    pub fn pair(&self, left: &[Complex64], right: &[Complex64]) -> Complex64 {
        let nt = self.grid.n_t();
        let rows: Vec<Complex64> = (0..self.grid.n_x())
            .into_par_iter()
            .map(|ix| {
                let terms: Vec<Complex64> = (0..nt)
                    .map(|it| {
                        let k = ix * nt + it;
                        left[k].conj() * right[k] * self.grid.t_weights[it]
                    })
                    .collect();
                pairwise_sum_complex(&terms) * self.grid.x_weights[ix]
            })
            .collect();
        pairwise_sum_complex(&rows)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub zeta: Vec<f64>,
    pub q: f64,
    pub xi: Vec<f64>,
    pub p: f64,
    pub xi2_frozen: Vec<f64>,
    pub value: Complex64,
    pub lambda: f64,
    pub mu: f64,
}

impl KernelSample {
    /// 1 + λ|ξ − ζ| + μ|p − q|.
    pub fn separation(&self) -> f64 {
        let dxi = self.xi.iter().zip(&self.zeta).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        1.0 + self.lambda * dxi + self.mu * (self.p - self.q).abs()
    }
}

pub fn kernel_k(setup: &KernelSetup, zeta: &[f64], q: f64, xi: &[f64], p: f64) -> KernelSample {
    let left = setup.wave(zeta, q);
    let right = setup.wave(xi, p);
    sample(setup, zeta, q, xi, p, setup.pair(&left, &right))
}

fn sample(setup: &KernelSetup, zeta: &[f64], q: f64, xi: &[f64], p: f64, value: Complex64) -> KernelSample {
    KernelSample {
        zeta: zeta.to_vec(),
        q,
        xi: xi.to_vec(),
        p,
        xi2_frozen: setup.xi2_frozen.clone(),
        value,
        lambda: setup.lambda,
        mu: setup.mu,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RayKind {
    /// ξ moves along e₁ with p fixed.
    Xi,
    /// p moves with ξ fixed.
    P,
}

/// Samples K along a ray from a base point inside the supports. The ξ-ray
/// covers separations λs for s ∈ [1/λ, r₁]; the p-ray starts at c₂ − 0.9r₂
/// and covers μs for s ∈ [1/(8μ), 1.8r₂].
pub fn kernel_ray(setup: &KernelSetup, kind: RayKind, n: usize) -> Vec<KernelSample> {
    let (_, _, ca) = setup.amp_a.center();
    let r1 = setup.amp_a.xi[0].radius;
    let c2 = setup.amp_b.xi[0].center;
    let r2 = setup.amp_b.xi[0].radius;
    let ratio = setup.mu / setup.lambda;
    let lift = |q: f64| -> Vec<f64> {
        let s = &setup.shift * DVector::from_vec(setup.xi2(q)) * ratio;
        ca.iter().zip(s.iter()).map(|(a, b)| a + b).collect()
    };
    let (q0, mut zeta, steps) = match kind {
        RayKind::Xi => (c2, lift(c2), geomspace(1.0 / setup.lambda, r1, n)),
        RayKind::P => {
            let q0 = c2 - 0.9 * r2;
            (q0, lift(q0), geomspace(1.0 / (8.0 * setup.mu), 1.8 * r2, n))
        }
    };
    if kind == RayKind::Xi {
        zeta[0] -= 0.5 * r1;
    }
    let base = setup.wave(&zeta, q0);
    steps
        .iter()
        .map(|&s| {
            let (xi, p) = match kind {
                RayKind::Xi => {
                    let mut xi = zeta.clone();
                    xi[0] += s;
                    (xi, q0)
                }
                RayKind::P => (zeta.clone(), q0 + s),
            };
            let w = setup.wave(&xi, p);
            sample(setup, &zeta, q0, &xi, p, setup.pair(&base, &w))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelDecayFit {
    /// Fit of the tail-sup envelope max_{j≥i}|K_j| against the separation.
    pub fit: ScalingFit,
    pub required_slope: f64,
    pub passed: bool,
}

/// Fits log|K| against log(1 + λ|ξ−ζ| + μ|q−p|) along one ray. |K|
/// oscillates through near-zeros, so the fit is taken on its decreasing
/// tail-sup envelope, which is what an upper bound constrains.
pub fn kernel_decay_check(samples: &[KernelSample], d: usize) -> Result<KernelDecayFit> {
    let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.separation(), s.value.norm())).collect();
    decay_fit(&pts, d)
}

/// As [`kernel_decay_check`] on raw (separation, |K|) pairs.
pub fn decay_fit(points: &[(f64, f64)], d: usize) -> Result<KernelDecayFit> {
    if points.len() < 6 {
        return Err(Error::Fit(format!("kernel decay needs >= 6 samples per ray, got {}", points.len())));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let span = (pts[pts.len() - 1].0 / pts[0].0).log10();
    if span < 1.5 - 1e-12 {
        return Err(Error::Fit(format!("kernel ray spans {span:.2} decades, need 1.5")));
    }
    let mut env = 0.0f64;
    for pt in pts.iter_mut().rev() {
        env = env.max(pt.1);
        pt.1 = env;
    }
    let fit = fit_power_law(&pts)?;
    let required = -((d + 2) as f64);
    Ok(KernelDecayFit {
        passed: fit.exponent <= required,
        fit,
        required_slope: required,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TtStarCheck {
    /// σ_max(S)², from an SVD of the discretized S.
    pub sigma_max_sq: f64,
    /// Largest eigenvalue of S*S assembled entrywise from kernel values.
    pub eig_max: f64,
    pub relative_gap: f64,
}

/// Discretizes S on the setup grid and the given (ξ, p) nodes (trapezoid
/// weights) and compares its top singular value with the spectrum of the
/// kernel-assembled S*S.
pub fn tt_star_check(setup: &KernelSetup, xi_nodes: &[f64], p_nodes: &[f64]) -> Result<TtStarCheck> {
    if setup.phi.dim != 1 {
        return Err(Error::Unsupported("the TT* toy is one-dimensional".into()));
    }
    let hw = |v: &[f64]| crate::numerics::trapezoid_weights(v.len(), if v.len() > 1 { v[1] - v[0] } else { 1.0 });
    let wxi = hw(xi_nodes);
    let wp = hw(p_nodes);
    let mut cols = Vec::new();
    let mut cw = Vec::new();
    for (i, &xi) in xi_nodes.iter().enumerate() {
        for (j, &p) in p_nodes.iter().enumerate() {
            cols.push(setup.wave(&[xi], p));
            cw.push((wxi[i] * wp[j]).sqrt());
        }
    }
    let nt = setup.grid.n_t();
    let rows = setup.grid.len();
    let s = DMatrix::from_fn(rows, cols.len(), |r, c| {
        let w = (setup.grid.x_weights[r / nt] * setup.grid.t_weights[r % nt]).sqrt();
        cols[c][r] * (w * cw[c])
    });
    let sigma = s.singular_values().max();
    let n = cols.len();
    let gram = DMatrix::from_fn(n, n, |a, b| setup.pair(&cols[a], &cols[b]) * (cw[a] * cw[b]));
    let eig = gram.symmetric_eigenvalues().max();
    let sq = sigma * sigma;
    Ok(TtStarCheck {
        sigma_max_sq: sq,
        eig_max: eig,
        relative_gap: (sq - eig).abs() / sq.max(f64::MIN_POSITIVE),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::linspace;
    use crate::oscint::amplitude::Support;

    fn toy() -> KernelSetup {
        let amp_a = Amplitude::new(Support::new(0.0, 0.5), vec![Support::new(0.0, 0.5)], vec![Support::new(1.5, 0.5)]);
        let amp_b = Amplitude::new(Support::new(0.0, 0.5), vec![Support::new(0.0, 0.5)], vec![Support::new(-1.0, 1.0)]);
        let grid = SpaceTimeGrid::new(linspace(-0.5, 0.5, 6), vec![linspace(-0.5, 0.5, 6)]).unwrap();
        KernelSetup::with_grid(
            PhaseFunction::paraboloid(1),
            amp_a,
            PhaseFunction::paraboloid(1),
            amp_b,
            4.0,
            2.0,
            vec![],
            grid,
        )
        .unwrap()
    }

    #[test]
    fn synthetic_power_law_slope() {
        let pts: Vec<(f64, f64)> = geomspace(1.0, 100.0, 8).into_iter().map(|s| (1.0 + s, (1.0 + s).powi(-5))).collect();
        let r = decay_fit(&pts, 1).unwrap();
        assert!((r.fit.exponent + 5.0).abs() < 1e-12);
        assert!(r.passed);
        let flat: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, 0.3)).collect();
        let r = decay_fit(&flat, 1).unwrap();
        assert_eq!(r.fit.exponent, 0.0);
        assert!(!r.passed);
    }

    #[test]
    fn short_ray_rejected() {
        let pts: Vec<(f64, f64)> = (1..8).map(|i| (i as f64, 1.0 / i as f64)).collect();
        assert!(matches!(decay_fit(&pts, 1), Err(Error::Fit(_))));
    }

    #[test]
    fn diagonal_real_and_swap_conjugates() {
        let s = toy();
        let k = kernel_k(&s, &[1.4], -0.8, &[1.6], -1.1);
        let kt = kernel_k(&s, &[1.6], -1.1, &[1.4], -0.8);
        assert_eq!(k.value, kt.value.conj());
        let dg = kernel_k(&s, &[1.4], -0.8, &[1.4], -0.8);
        assert_eq!(dg.value.im, 0.0);
        assert!(dg.value.re >= 0.0);
    }

    #[test]
    fn tt_star_toy_agrees() {
        let s = toy();
        let r = tt_star_check(&s, &linspace(1.1, 1.9, 6), &linspace(-1.8, -0.2, 6)).unwrap();
        assert!(r.relative_gap < 1e-8, "{r:?}");
    }
}
