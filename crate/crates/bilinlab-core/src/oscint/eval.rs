use num_complex::Complex64;
use rayon::prelude::*;

use super::amplitude::Amplitude;
use super::grid::{FrequencyProfile, PhaseBounds, SpaceTimeGrid};
use crate::error::{Error, Result};
use crate::numerics::{complex_matmul, pairwise_sum};
use crate::phasekit::PhaseFunction;

/// T_λ with phase φ and amplitude a.
#[derive(Clone, Debug)]
pub struct Operator {
    pub phase: PhaseFunction,
    pub amp: Amplitude,
    pub lambda: f64,
}

impl Operator {
    pub fn new(phase: PhaseFunction, amp: Amplitude, lambda: f64) -> Self {
        Self { phase, amp, lambda }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    pub fn bounds(&self) -> Result<PhaseBounds> {
        PhaseBounds::sample(&self.phase, &self.amp)
    }

    fn check_domain(&self, grid: &SpaceTimeGrid, f: &FrequencyProfile) -> Result<()> {
        if !(self.lambda >= 1.0) {
            return Err(Error::Config(format!("lambda must be >= 1, got {}", self.lambda)));
        }
        let d = self.phase.dim;
        if grid.x_axes.len() != d || f.axes.len() != d {
            return Err(Error::Config("grid or profile dimension does not match the phase".into()));
        }
        let t_ends = [grid.t[0], grid.t[grid.n_t() - 1]];
        let x_ends: Vec<Vec<f64>> = grid.x_axes.iter().map(|a| vec![a[0], a[a.len() - 1]]).collect();
        let xi_ends: Vec<Vec<f64>> = f.axes.iter().map(|a| vec![a[0], a[a.len() - 1]]).collect();
        let xs = crate::phasekit::transversality::tensor_points(&x_ends);
        let xis = crate::phasekit::transversality::tensor_points(&xi_ends);
        for &t in &t_ends {
            for x in &xs {
                for xi in &xis {
                    self.phase.phi(t, x, xi)?;
                }
            }
        }
        Ok(())
    }
}

/// T_λf on the grid, x-major. Uses the factored matrix product when the
/// phase has the form x·ξ + t·h(ξ), the direct sum otherwise.
pub fn eval_oscillatory(op: &Operator, f: &FrequencyProfile, grid: &SpaceTimeGrid) -> Result<Vec<Complex64>> {
    let bounds = op.bounds()?;
    grid.check(&bounds, op.lambda)?;
    f.check(&bounds, op.lambda)?;
    op.check_domain(grid, f)?;
    if op.phase.is_separable() {
        eval_separable(op, f, grid)
    } else {
        Ok(eval_direct_unchecked(op, f, grid))
    }
}

/// Direct Σ_ξ w a f e^{iλφ} at every grid point. No resolution check.
pub fn eval_direct(op: &Operator, f: &FrequencyProfile, grid: &SpaceTimeGrid) -> Result<Vec<Complex64>> {
    op.check_domain(grid, f)?;
    Ok(eval_direct_unchecked(op, f, grid))
}

fn eval_direct_unchecked(op: &Operator, f: &FrequencyProfile, grid: &SpaceTimeGrid) -> Vec<Complex64> {
    let coef: Vec<Complex64> = f
        .points
        .iter()
        .zip(&f.weights)
        .zip(&f.values)
        .map(|((xi, w), v)| v * (w * op.amp.factor_xi(xi)))
        .collect();
    let nt = grid.n_t();
    let rows: Vec<Vec<Complex64>> = grid
        .x_points
        .par_iter()
        .map(|x| {
            let ax = op.amp.factor_x(x);
            let mut row = vec![Complex64::new(0.0, 0.0); nt];
            if ax == 0.0 {
                return row;
            }
            for (it, &t) in grid.t.iter().enumerate() {
                let at = op.amp.factor_t(t);
                if at == 0.0 {
                    continue;
                }
                let mut s = Complex64::new(0.0, 0.0);
                for (xi, c) in f.points.iter().zip(&coef) {
                    if *c == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let ph = op.phase.phi_unchecked(t, x, xi).unwrap_or(0.0);
                    s += c * Complex64::from_polar(1.0, op.lambda * ph);
                }
                row[it] = s * (ax * at);
            }
            row
        })
        .collect();
    rows.concat()
}

/// Factored evaluation for φ = x·ξ + t·h(ξ): E_x · diag(w a f) · E_t.
pub fn eval_separable(op: &Operator, f: &FrequencyProfile, grid: &SpaceTimeGrid) -> Result<Vec<Complex64>> {
    let lam = op.lambda;
    let nk = f.points.len();
    let nx = grid.n_x();
    let nt = grid.n_t();
    let mut h = Vec::with_capacity(nk);
    for xi in &f.points {
        h.push(
            op.phase
                .time_symbol(xi)
                .ok_or_else(|| Error::Unsupported("phase is not of the form x·ξ + t·h(ξ)".into()))?,
        );
    }
    let coef: Vec<Complex64> = f
        .points
        .iter()
        .zip(&f.weights)
        .zip(&f.values)
        .map(|((xi, w), v)| v * (w * op.amp.factor_xi(xi)))
        .collect();
    let mut ex = vec![Complex64::new(0.0, 0.0); nx * nk];
    ex.par_chunks_mut(nk).zip(&grid.x_points).for_each(|(row, x)| {
        for ((e, xi), c) in row.iter_mut().zip(&f.points).zip(&coef) {
            let dot: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
            *e = c * Complex64::from_polar(1.0, lam * dot);
        }
    });
    let mut et = vec![Complex64::new(0.0, 0.0); nk * nt];
    et.par_chunks_mut(nt).zip(&h).for_each(|(row, &hk)| {
        for (e, &t) in row.iter_mut().zip(&grid.t) {
            *e = Complex64::from_polar(1.0, lam * t * hk);
        }
    });
    let mut out = complex_matmul(&ex, &et, nx, nk, nt);
    let at: Vec<f64> = grid.t.iter().map(|&t| op.amp.factor_t(t)).collect();
    out.par_chunks_mut(nt).zip(&grid.x_points).for_each(|(row, x)| {
        let ax = op.amp.factor_x(x);
        for (v, a) in row.iter_mut().zip(&at) {
            *v *= ax * a;
        }
    });
    Ok(out)
}

/// Discrete L²(t, x) norm of the pointwise product of two grid fields.
pub fn product_norm(u: &[Complex64], v: &[Complex64], grid: &SpaceTimeGrid) -> f64 {
    let nt = grid.n_t();
    let rows: Vec<f64> = (0..grid.n_x())
        .into_par_iter()
        .map(|ix| {
            let terms: Vec<f64> = (0..nt)
                .map(|it| {
                    let k = ix * nt + it;
                    grid.t_weights[it] * (u[k] * v[k]).norm_sqr()
                })
                .collect();
            grid.x_weights[ix] * pairwise_sum(&terms)
        })
        .collect();
    pairwise_sum(&rows).sqrt()
}

/// ‖T_λf · T̃_μg‖_{L²(t,x)} on a shared grid. Requires μ ≤ λ.
pub fn bilinear_l2_norm(
    a: &Operator,
    f: &FrequencyProfile,
    b: &Operator,
    g: &FrequencyProfile,
    grid: &SpaceTimeGrid,
) -> Result<f64> {
    if b.lambda > a.lambda {
        return Err(Error::ArgumentOrder {
            lambda: a.lambda,
            mu: b.lambda,
        });
    }
    let u = eval_oscillatory(a, f, grid)?;
    let v = eval_oscillatory(b, g, grid)?;
    Ok(product_norm(&u, &v, grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscint::amplitude::Support;
    use crate::oscint::grid::MIN_NODES;

    fn setup(lambda: f64) -> (Operator, FrequencyProfile, SpaceTimeGrid) {
        let amp = Amplitude::new(Support::new(0.0, 0.5), vec![Support::new(0.0, 0.5)], vec![Support::new(1.5, 0.5)]);
        let op = Operator::new(PhaseFunction::paraboloid(1), amp, lambda);
        let b = op.bounds().unwrap();
        let axes = FrequencyProfile::axes_for(&op.amp, &b, lambda, MIN_NODES);
        let f = FrequencyProfile::from_fn(axes, |xi| Complex64::new((-(xi[0] - 1.4).powi(2) * 8.0).exp(), 0.3));
        let grid = SpaceTimeGrid::resolved(&op.amp, &[(&b, lambda)], MIN_NODES).unwrap();
        (op, f, grid)
    }

    #[test]
    fn separable_matches_direct() {
        let (op, f, grid) = setup(16.0);
        let a = eval_separable(&op, &f, &grid).unwrap();
        let b = eval_direct(&op, &f, &grid).unwrap();
        let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() <= 1e-11 * scale);
        }
    }

    #[test]
    fn zero_profile_gives_zero() {
        let (op, f, grid) = setup(8.0);
        let z = f.scaled(Complex64::new(0.0, 0.0));
        assert!(eval_oscillatory(&op, &z, &grid).unwrap().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn mu_above_lambda_rejected() {
        let (op, f, grid) = setup(8.0);
        let big = op.with_lambda(9.0);
        assert!(matches!(
            bilinear_l2_norm(&op, &f, &big, &f, &grid),
            Err(Error::ArgumentOrder { .. })
        ));
    }
}
