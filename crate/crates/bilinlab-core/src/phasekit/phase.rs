use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::eikonal::EikonalPhase;
use crate::error::{Error, Result};

/// Closed interval; infinite endpoints mean unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const UNBOUNDED: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn centered(center: f64, radius: f64) -> Self {
        Self::new(center - radius, center + radius)
    }

    pub fn contains(&self, v: f64) -> bool {
        let tol = 1e-12 * (1.0 + v.abs());
        v >= self.lo - tol && v <= self.hi + tol
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn radius(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }
}

/// Box in (t, x, ξ) outside which a phase refuses to evaluate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidityBox {
    pub t: Interval,
    pub x: Vec<Interval>,
    pub xi: Vec<Interval>,
}

impl ValidityBox {
    pub fn unbounded(dim: usize) -> Self {
        Self {
            t: Interval::UNBOUNDED,
            x: vec![Interval::UNBOUNDED; dim],
            xi: vec![Interval::UNBOUNDED; dim],
        }
    }

    fn check(&self, t: f64, x: &[f64], xi: &[f64]) -> Result<()> {
        if x.len() != self.x.len() || xi.len() != self.xi.len() {
            return Err(Error::Domain(format!(
                "dimension mismatch: x has {}, xi has {}, phase expects {}",
                x.len(),
                xi.len(),
                self.x.len()
            )));
        }
        if !self.t.contains(t) {
            return Err(Error::Domain(format!("t = {t} outside [{}, {}]", self.t.lo, self.t.hi)));
        }
        for (k, (v, iv)) in x.iter().zip(&self.x).enumerate() {
            if !iv.contains(*v) {
                return Err(Error::Domain(format!("x[{k}] = {v} outside [{}, {}]", iv.lo, iv.hi)));
            }
        }
        for (k, (v, iv)) in xi.iter().zip(&self.xi).enumerate() {
            if !iv.contains(*v) {
                return Err(Error::Domain(format!("xi[{k}] = {v} outside [{}, {}]", iv.lo, iv.hi)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum PhaseKind {
    /// x·ξ + t|ξ|²
    Paraboloid,
    /// x·ξ + t (v·ξ)
    Hyperplane { velocity: Vec<f64> },
    /// x·ξ + t|ξ|
    Cone,
    /// Tabulated eikonal solution φ̃(t, x, ξ) (d = 1).
    Eikonal(Arc<EikonalPhase>),
    /// ψ(t, x, ξ) = inner(c·t, x, ξ)
    TimeRescaled { factor: f64, inner: Box<PhaseFunction> },
    /// Identically zero; degenerate, for tests.
    Zero,
}

/// A phase φ(t, x, ξ). Gradients and Hessian rows are ordered (x₁..x_d, t).
#[derive(Clone, Debug)]
pub struct PhaseFunction {
    pub dim: usize,
    pub kind: PhaseKind,
    pub validity: ValidityBox,
}

impl PhaseFunction {
    pub fn paraboloid(dim: usize) -> Self {
        Self {
            dim,
            kind: PhaseKind::Paraboloid,
            validity: ValidityBox::unbounded(dim),
        }
    }

    pub fn hyperplane(velocity: Vec<f64>) -> Self {
        let dim = velocity.len();
        Self {
            dim,
            kind: PhaseKind::Hyperplane { velocity },
            validity: ValidityBox::unbounded(dim),
        }
    }

    pub fn cone(dim: usize) -> Self {
        Self {
            dim,
            kind: PhaseKind::Cone,
            validity: ValidityBox::unbounded(dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            kind: PhaseKind::Zero,
            validity: ValidityBox::unbounded(dim),
        }
    }

    pub fn eikonal(table: Arc<EikonalPhase>) -> Self {
        let validity = ValidityBox {
            t: Interval::new(-table.alpha, table.alpha),
            x: vec![Interval::UNBOUNDED],
            xi: vec![Interval::new(table.xi_box.0, table.xi_box.1)],
        };
        Self {
            dim: 1,
            kind: PhaseKind::Eikonal(table),
            validity,
        }
    }

    pub fn time_rescaled(factor: f64, inner: PhaseFunction) -> Self {
        let dim = inner.dim;
        let t = if factor == 0.0 {
            Interval::UNBOUNDED
        } else {
            let a = inner.validity.t.lo / factor;
            let b = inner.validity.t.hi / factor;
            Interval::new(a.min(b), a.max(b))
        };
        let validity = ValidityBox {
            t,
            x: inner.validity.x.clone(),
            xi: inner.validity.xi.clone(),
        };
        Self {
            dim,
            kind: PhaseKind::TimeRescaled {
                factor,
                inner: Box::new(inner),
            },
            validity,
        }
    }

    pub fn with_validity(mut self, validity: ValidityBox) -> Self {
        self.validity = validity;
        self
    }

    pub fn variant_name(&self) -> String {
        match &self.kind {
            PhaseKind::Paraboloid => "paraboloid".into(),
            PhaseKind::Hyperplane { velocity } => format!("hyperplane({velocity:?})"),
            PhaseKind::Cone => "cone".into(),
            PhaseKind::Eikonal(_) => "eikonal".into(),
            PhaseKind::TimeRescaled { factor, inner } => {
                format!("time-rescaled({factor}, {})", inner.variant_name())
            }
            PhaseKind::Zero => "zero".into(),
        }
    }

    /// If φ = x·ξ + t·h(ξ), returns h(ξ). Such phases factor over (t, x)
    /// and admit the matrix-product evaluation path.
    pub fn time_symbol(&self, xi: &[f64]) -> Option<f64> {
        match &self.kind {
            PhaseKind::Paraboloid => Some(dot(xi, xi)),
            PhaseKind::Hyperplane { velocity } => Some(dot(velocity, xi)),
            PhaseKind::Cone => Some(dot(xi, xi).sqrt()),
            PhaseKind::TimeRescaled { factor, inner } => inner.time_symbol(xi).map(|h| factor * h),
            PhaseKind::Eikonal(_) | PhaseKind::Zero => None,
        }
    }

    pub fn is_separable(&self) -> bool {
        self.time_symbol(&vec![1.0; self.dim]).is_some()
    }

    pub fn phi(&self, t: f64, x: &[f64], xi: &[f64]) -> Result<f64> {
        self.validity.check(t, x, xi)?;
        self.phi_unchecked(t, x, xi)
    }

    pub fn grad_tx(&self, t: f64, x: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
        self.validity.check(t, x, xi)?;
        self.grad_tx_unchecked(t, x, xi)
    }

    pub fn grad_xi(&self, t: f64, x: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
        self.validity.check(t, x, xi)?;
        self.grad_xi_unchecked(t, x, xi)
    }

    /// ∂²φ/∂ξ∂(x, t): a (d+1)×d matrix, rows (x₁..x_d, t).
    pub fn mixed_hess(&self, t: f64, x: &[f64], xi: &[f64]) -> Result<DMatrix<f64>> {
        self.validity.check(t, x, xi)?;
        self.mixed_hess_unchecked(t, x, xi)
    }

    pub(crate) fn phi_unchecked(&self, t: f64, x: &[f64], xi: &[f64]) -> Result<f64> {
        Ok(match &self.kind {
            PhaseKind::Paraboloid => dot(x, xi) + t * dot(xi, xi),
            PhaseKind::Hyperplane { velocity } => dot(x, xi) + t * dot(velocity, xi),
            PhaseKind::Cone => dot(x, xi) + t * cone_norm(xi)?,
            PhaseKind::Eikonal(tab) => tab.phi(t, x[0], xi[0]),
            PhaseKind::TimeRescaled { factor, inner } => inner.phi_unchecked(factor * t, x, xi)?,
            PhaseKind::Zero => 0.0,
        })
    }

    pub(crate) fn grad_tx_unchecked(&self, t: f64, x: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim;
        let mut g = vec![0.0; d + 1];
        match &self.kind {
            PhaseKind::Paraboloid => {
                g[..d].copy_from_slice(xi);
                g[d] = dot(xi, xi);
            }
            PhaseKind::Hyperplane { velocity } => {
                g[..d].copy_from_slice(xi);
                g[d] = dot(velocity, xi);
            }
            PhaseKind::Cone => {
                g[..d].copy_from_slice(xi);
                g[d] = cone_norm(xi)?;
            }
            PhaseKind::Eikonal(tab) => {
                let (px, ps) = tab.grad_tx(t, x[0], xi[0]);
                g[0] = px;
                g[1] = ps;
            }
            PhaseKind::TimeRescaled { factor, inner } => {
                g = inner.grad_tx_unchecked(factor * t, x, xi)?;
                g[d] *= factor;
            }
            PhaseKind::Zero => {}
        }
        Ok(g)
    }

    pub(crate) fn grad_xi_unchecked(&self, t: f64, x: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
        Ok(match &self.kind {
            PhaseKind::Paraboloid => x.iter().zip(xi).map(|(a, b)| a + 2.0 * t * b).collect(),
            PhaseKind::Hyperplane { velocity } => x.iter().zip(velocity).map(|(a, v)| a + t * v).collect(),
            PhaseKind::Cone => {
                let r = cone_norm(xi)?;
                x.iter().zip(xi).map(|(a, b)| a + t * b / r).collect()
            }
            PhaseKind::Eikonal(tab) => vec![tab.grad_xi(t, x[0], xi[0])],
            PhaseKind::TimeRescaled { factor, inner } => inner.grad_xi_unchecked(factor * t, x, xi)?,
            PhaseKind::Zero => vec![0.0; self.dim],
        })
    }

    pub(crate) fn mixed_hess_unchecked(&self, t: f64, x: &[f64], xi: &[f64]) -> Result<DMatrix<f64>> {
        let d = self.dim;
        let mut h = DMatrix::zeros(d + 1, d);
        match &self.kind {
            PhaseKind::Paraboloid => {
                for i in 0..d {
                    h[(i, i)] = 1.0;
                    h[(d, i)] = 2.0 * xi[i];
                }
            }
            PhaseKind::Hyperplane { velocity } => {
                for i in 0..d {
                    h[(i, i)] = 1.0;
                    h[(d, i)] = velocity[i];
                }
            }
            PhaseKind::Cone => {
                let r = cone_norm(xi)?;
                for i in 0..d {
                    h[(i, i)] = 1.0;
                    h[(d, i)] = xi[i] / r;
                }
            }
            PhaseKind::Eikonal(tab) => {
                let (hx, hs) = tab.mixed_hess(t, x[0], xi[0]);
                h[(0, 0)] = hx;
                h[(1, 0)] = hs;
            }
            PhaseKind::TimeRescaled { factor, inner } => {
                h = inner.mixed_hess_unchecked(factor * t, x, xi)?;
                for j in 0..d {
                    h[(d, j)] *= factor;
                }
            }
            PhaseKind::Zero => {}
        }
        Ok(h)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cone_norm(xi: &[f64]) -> Result<f64> {
    let r = dot(xi, xi).sqrt();
    if r == 0.0 {
        return Err(Error::Domain("cone phase is not smooth at xi = 0".into()));
    }
    Ok(r)
}

/// ∂²φ/∂ξ∂(x, t) with rows (x₁..x_d, t).
pub fn mixed_hessian(phase: &PhaseFunction, t: f64, x: &[f64], xi: &[f64]) -> Result<DMatrix<f64>> {
    phase.mixed_hess(t, x, xi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paraboloid_hessian_d1() {
        let h = mixed_hessian(&PhaseFunction::paraboloid(1), 0.0, &[0.4], &[1.0]).unwrap();
        assert_eq!(h.nrows(), 2);
        assert_eq!(h[(0, 0)], 1.0);
        assert_eq!(h[(1, 0)], 2.0);
    }

    #[test]
    fn hyperplane_hessian_d2() {
        let p = PhaseFunction::hyperplane(vec![1.0, 0.0]);
        let h = p.mixed_hess(0.3, &[0.0, 1.0], &[0.5, -0.2]).unwrap();
        let expected = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
        assert_eq!(h, expected);
    }

    #[test]
    fn time_rescaled_scales_t_row_only() {
        let p = PhaseFunction::time_rescaled(0.25, PhaseFunction::paraboloid(2));
        let h = p.mixed_hess(0.5, &[0.1, 0.2], &[1.0, -2.0]).unwrap();
        assert_eq!(h[(0, 0)], 1.0);
        assert_eq!(h[(1, 1)], 1.0);
        assert_eq!(h[(2, 0)], 0.5);
        assert_eq!(h[(2, 1)], -1.0);
        let phi = p.phi(0.5, &[0.1, 0.2], &[1.0, -2.0]).unwrap();
        assert!((phi - (0.1 - 0.4 + 0.125 * 5.0)).abs() < 1e-15);
    }

    #[test]
    fn validity_box_enforced() {
        let p = PhaseFunction::paraboloid(1).with_validity(ValidityBox {
            t: Interval::new(-1.0, 1.0),
            x: vec![Interval::new(-1.0, 1.0)],
            xi: vec![Interval::new(0.5, 2.0)],
        });
        assert!(matches!(p.phi(2.0, &[0.0], &[1.0]), Err(Error::Domain(_))));
        assert!(matches!(p.mixed_hess(0.0, &[0.0], &[3.0]), Err(Error::Domain(_))));
        assert!(p.phi(0.5, &[0.0], &[1.0]).is_ok());
    }

    #[test]
    fn cone_rejects_origin() {
        assert!(PhaseFunction::cone(2).grad_tx(0.0, &[0.0, 0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn separable_time_symbols() {
        assert_eq!(PhaseFunction::paraboloid(2).time_symbol(&[1.0, 2.0]), Some(5.0));
        assert_eq!(PhaseFunction::hyperplane(vec![1.0, -1.0]).time_symbol(&[3.0, 1.0]), Some(2.0));
        assert_eq!(PhaseFunction::zero(1).time_symbol(&[1.0]), None);
    }
}
