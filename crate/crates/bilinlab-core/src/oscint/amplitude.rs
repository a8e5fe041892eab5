use serde::{Deserialize, Serialize};

use crate::numerics::plateau;

/// Centered interval [center − radius, center + radius].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub center: f64,
    pub radius: f64,
}

impl Support {
    pub fn new(center: f64, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn lo(&self) -> f64 {
        self.center - self.radius
    }

    pub fn hi(&self) -> f64 {
        self.center + self.radius
    }

    /// Smooth bump: 1 on the inner half, 0 outside.
    pub fn bump(&self, v: f64) -> f64 {
        if self.radius <= 0.0 {
            return if v == self.center { 1.0 } else { 0.0 };
        }
        plateau((v - self.center) / self.radius)
    }

    pub fn contains(&self, v: f64) -> bool {
        (v - self.center).abs() <= self.radius * (1.0 + 1e-12)
    }
}

/// Tensorized C^∞ cutoff a(t, x, ξ) = χ_t(t) Π χ_x(x_i) Π χ_ξ(ξ_i), with an
/// optional smooth radial factor confining |ξ| to [r₀, r₁].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Amplitude {
    pub t: Support,
    pub x: Vec<Support>,
    pub xi: Vec<Support>,
    #[serde(default)]
    pub annulus: Option<(f64, f64)>,
}

impl Amplitude {
    pub fn new(t: Support, x: Vec<Support>, xi: Vec<Support>) -> Self {
        Self {
            t,
            x,
            xi,
            annulus: None,
        }
    }

    pub fn with_annulus(mut self, r0: f64, r1: f64) -> Self {
        self.annulus = Some((r0, r1));
        self
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn factor_t(&self, t: f64) -> f64 {
        self.t.bump(t)
    }

    pub fn factor_x(&self, x: &[f64]) -> f64 {
        self.x.iter().zip(x).map(|(s, &v)| s.bump(v)).product()
    }

    pub fn factor_xi(&self, xi: &[f64]) -> f64 {
        let mut v: f64 = self.xi.iter().zip(xi).map(|(s, &v)| s.bump(v)).product();
        if let Some((r0, r1)) = self.annulus {
            let r = xi.iter().map(|a| a * a).sum::<f64>().sqrt();
            v *= Support::new(0.5 * (r0 + r1), 0.5 * (r1 - r0)).bump(r);
        }
        v
    }

    pub fn eval(&self, t: f64, x: &[f64], xi: &[f64]) -> f64 {
        self.factor_t(t) * self.factor_x(x) * self.factor_xi(xi)
    }

    pub fn center(&self) -> (f64, Vec<f64>, Vec<f64>) {
        (
            self.t.center,
            self.x.iter().map(|s| s.center).collect(),
            self.xi.iter().map(|s| s.center).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_outside_one_on_plateau() {
        let a = Amplitude::new(Support::new(0.0, 0.5), vec![Support::new(1.0, 0.25)], vec![Support::new(1.5, 0.5)]);
        assert_eq!(a.eval(0.6, &[1.0], &[1.5]), 0.0);
        assert_eq!(a.eval(0.0, &[1.3], &[1.5]), 0.0);
        assert_eq!(a.eval(0.25, &[1.125], &[1.25]), 1.0);
        let v = a.eval(0.4, &[1.0], &[1.5]);
        assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn annulus_cuts_radially() {
        let a = Amplitude::new(
            Support::new(0.0, 1.0),
            vec![Support::new(0.0, 1.0); 2],
            vec![Support::new(0.0, 3.0); 2],
        )
        .with_annulus(1.0, 2.0);
        assert_eq!(a.factor_xi(&[0.5, 0.0]), 0.0);
        assert_eq!(a.factor_xi(&[1.5, 0.0]), 1.0);
        assert_eq!(a.factor_xi(&[0.0, 2.5]), 0.0);
    }
}
