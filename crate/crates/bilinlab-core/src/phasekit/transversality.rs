use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::phase::PhaseFunction;
use crate::error::{Error, Result};

/// Default lower bound on the smallest singular value of a mixed Hessian.
pub const RANK_FLOOR: f64 = 0.5;

/// Smallest singular value of a (d+1)×d matrix.
pub fn sigma_min(h: &DMatrix<f64>) -> f64 {
    h.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn cofactor_normal(h: &DMatrix<f64>) -> Vec<f64> {
    let rows = h.nrows();
    let mut nu = Vec::with_capacity(rows);
    for i in 0..rows {
        let minor = h.clone().remove_row(i);
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        nu.push(sign * minor.determinant());
    }
    nu
}

/// Unit normal to the image of the mixed Hessian, ordered (x₁..x_d, t),
/// with non-positive t-component.
pub fn normal_vector(phase: &PhaseFunction, t: f64, x: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
    normal_vector_with_floor(phase, t, x, xi, RANK_FLOOR).map(|(nu, _)| nu)
}

/// As [`normal_vector`], also returning the smallest singular value.
pub fn normal_vector_with_floor(
    phase: &PhaseFunction,
    t: f64,
    x: &[f64],
    xi: &[f64],
    floor: f64,
) -> Result<(Vec<f64>, f64)> {
    let h = phase.mixed_hess(t, x, xi)?;
    let s = sigma_min(&h);
    if !(s >= floor) {
        return Err(Error::Degenerate { sigma_min: s, floor });
    }
    let mut nu = cofactor_normal(&h);
    let norm = nu.iter().map(|v| v * v).sum::<f64>().sqrt();
    let sign = if nu[nu.len() - 1] > 0.0 { -1.0 } else { 1.0 };
    for v in nu.iter_mut() {
        *v *= sign / norm;
    }
    Ok((nu, s))
}

/// Product lattice of sample points for the transversality sup.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub xi1: Vec<Vec<f64>>,
    pub xi2: Vec<Vec<f64>>,
}

impl Lattice {
    /// Tensor lattice from per-axis node lists. `x_axes` and the ξ axis
    /// lists each have one entry per spatial dimension.
    pub fn tensor(t: Vec<f64>, x_axes: &[Vec<f64>], xi1_axes: &[Vec<f64>], xi2_axes: &[Vec<f64>]) -> Self {
        Self {
            t,
            x: tensor_points(x_axes),
            xi1: tensor_points(xi1_axes),
            xi2: tensor_points(xi2_axes),
        }
    }

    /// Same lattice with the roles of ξ₁ and ξ₂ exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            t: self.t.clone(),
            x: self.x.clone(),
            xi1: self.xi2.clone(),
            xi2: self.xi1.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.t.len() * self.x.len() * self.xi1.len() * self.xi2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Cartesian product of axis node lists, first axis slowest.
pub fn tensor_points(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for p in &out {
            for &v in axis {
                let mut q = p.clone();
                q.push(v);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub xi1: Vec<f64>,
    pub xi2: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransversalityReport {
    pub sup: f64,
    pub margin: f64,
    pub argmax: SamplePoint,
    /// Sample counts for (t, x, ξ₁, ξ₂).
    pub counts: [usize; 4],
    pub sigma_min_a: f64,
    pub sigma_min_b: f64,
}

/// sup of |⟨ν_A(t,x,ξ₁), ν_B(t,x,ξ₂)⟩| over the lattice.
pub fn transversality_margin(a: &PhaseFunction, b: &PhaseFunction, lattice: &Lattice) -> Result<TransversalityReport> {
    if lattice.is_empty() {
        return Err(Error::Precondition("empty transversality lattice".into()));
    }
    let mut sup = f64::NEG_INFINITY;
    let mut argmax = None;
    let mut sa = f64::INFINITY;
    let mut sb = f64::INFINITY;
    for &t in &lattice.t {
        for x in &lattice.x {
            let mut nb = Vec::with_capacity(lattice.xi2.len());
            for xi2 in &lattice.xi2 {
                let (nu, s) = normal_vector_with_floor(b, t, x, xi2, RANK_FLOOR)?;
                sb = sb.min(s);
                nb.push(nu);
            }
            for xi1 in &lattice.xi1 {
                let (na, s) = normal_vector_with_floor(a, t, x, xi1, RANK_FLOOR)?;
                sa = sa.min(s);
                for (xi2, nu_b) in lattice.xi2.iter().zip(&nb) {
                    let ip = na.iter().zip(nu_b).map(|(p, q)| p * q).sum::<f64>().abs().min(1.0);
                    if ip > sup {
                        sup = ip;
                        argmax = Some(SamplePoint {
                            t,
                            x: x.clone(),
                            xi1: xi1.clone(),
                            xi2: xi2.clone(),
                        });
                    }
                }
            }
        }
    }
    Ok(TransversalityReport {
        sup,
        margin: 1.0 - sup,
        argmax: argmax.expect("nonempty lattice"),
        counts: [lattice.t.len(), lattice.x.len(), lattice.xi1.len(), lattice.xi2.len()],
        sigma_min_a: sa,
        sigma_min_b: sb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paraboloid_normal_d1() {
        let nu = normal_vector(&PhaseFunction::paraboloid(1), 0.0, &[0.3], &[1.0]).unwrap();
        let s5 = 5f64.sqrt();
        assert!((nu[0] - 2.0 / s5).abs() < 1e-15);
        assert!((nu[1] + 1.0 / s5).abs() < 1e-15);
    }

    #[test]
    fn zero_phase_is_degenerate() {
        let err = normal_vector(&PhaseFunction::zero(2), 0.0, &[0.0, 0.0], &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::Degenerate { .. }));
    }

    #[test]
    fn identical_phases_have_zero_margin() {
        let p = PhaseFunction::paraboloid(1);
        let lat = Lattice::tensor(vec![0.0], &[vec![0.0]], &[vec![1.0, 1.5]], &[vec![1.5]]);
        let r = transversality_margin(&p, &p, &lat).unwrap();
        assert!((r.sup - 1.0).abs() < 1e-15);
        assert!(r.margin.abs() < 1e-15);
    }

    #[test]
    fn tensor_points_order() {
        let pts = tensor_points(&[vec![0.0, 1.0], vec![5.0, 6.0]]);
        assert_eq!(pts, vec![vec![0.0, 5.0], vec![0.0, 6.0], vec![1.0, 5.0], vec![1.0, 6.0]]);
    }
}
