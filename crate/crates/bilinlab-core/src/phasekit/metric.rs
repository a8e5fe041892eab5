use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One trigonometric contribution `cos_coeff·cos(κ·x) + sin_coeff·sin(κ·x)`
/// to the (i, j) and (j, i) entries of the perturbation p^{ij}, with
/// κ = 2π·wave / period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub i: usize,
    pub j: usize,
    pub wave: Vec<i32>,
    #[serde(default)]
    pub cos_coeff: f64,
    #[serde(default)]
    pub sin_coeff: f64,
}

/// Inverse metric g^{ij}(x) = δ^{ij} + ε·p^{ij}(x) on a periodic box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub dim: usize,
    pub epsilon: f64,
    pub period: f64,
    pub terms: Vec<TrigTerm>,
}

impl Metric {
    pub fn euclidean(dim: usize) -> Self {
        Self {
            dim,
            epsilon: 0.0,
            period: std::f64::consts::TAU,
            terms: Vec::new(),
        }
    }

    /// The circle metric g^{11}(x) = 1 + ε cos x.
    pub fn cosine_1d(epsilon: f64) -> Self {
        Self {
            dim: 1,
            epsilon,
            period: std::f64::consts::TAU,
            terms: vec![TrigTerm {
                i: 0,
                j: 0,
                wave: vec![1],
                cos_coeff: 1.0,
                sin_coeff: 0.0,
            }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dim == 1 || self.dim == 2) {
            return Err(Error::Config(format!("metric dimension must be 1 or 2, got {}", self.dim)));
        }
        if !(self.epsilon >= 0.0) || !(self.period > 0.0) {
            return Err(Error::Config("metric needs epsilon >= 0 and period > 0".into()));
        }
        for t in &self.terms {
            if t.i >= self.dim || t.j >= self.dim || t.wave.len() != self.dim {
                return Err(Error::Config(format!("trig term {t:?} does not match dimension {}", self.dim)));
            }
        }
        Ok(())
    }

    fn kappa(&self, term: &TrigTerm) -> Vec<f64> {
        let scale = std::f64::consts::TAU / self.period;
        term.wave.iter().map(|&w| w as f64 * scale).collect()
    }

    /// Entry-wise accumulation of `ε·Σ c·∂^α[cos/sin](κ·x)` where `order`
    /// lists the differentiation axes.
    fn perturbation(&self, x: &[f64], order: &[usize]) -> DMatrix<f64> {
        let d = self.dim;
        let mut m = DMatrix::zeros(d, d);
        if self.epsilon == 0.0 {
            return m;
        }
        for term in &self.terms {
            let k = self.kappa(term);
            let arg: f64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
            let factor: f64 = order.iter().map(|&ax| k[ax]).product();
            // The n-th derivative of cos(θ) is cos(θ + nπ/2), likewise for sin.
            let shift = order.len() as f64 * std::f64::consts::FRAC_PI_2;
            let v = factor * (term.cos_coeff * (arg + shift).cos() + term.sin_coeff * (arg + shift).sin());
            m[(term.i, term.j)] += self.epsilon * v;
            if term.i != term.j {
                m[(term.j, term.i)] += self.epsilon * v;
            }
        }
        m
    }

    pub fn g_inv(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(self.dim, self.dim) + self.perturbation(x, &[])
    }

    /// ∂_m g^{ij}(x).
    pub fn d_g_inv(&self, x: &[f64], m: usize) -> DMatrix<f64> {
        self.perturbation(x, &[m])
    }

    /// ∂_m ∂_n g^{ij}(x).
    pub fn d2_g_inv(&self, x: &[f64], m: usize, n: usize) -> DMatrix<f64> {
        self.perturbation(x, &[m, n])
    }

    /// (g, g', g'') for a one-dimensional metric.
    /// Allocation-free; this sits inside the ray integrator's inner loop.
    pub fn scalar_1d(&self, x: f64) -> (f64, f64, f64) {
        let (mut g, mut g1, mut g2) = (1.0, 0.0, 0.0);
        if self.epsilon == 0.0 {
            return (g, g1, g2);
        }
        let scale = std::f64::consts::TAU / self.period;
        for term in &self.terms {
            let k = term.wave[0] as f64 * scale;
            let (s, c) = (k * x).sin_cos();
            let e = self.epsilon;
            g += e * (term.cos_coeff * c + term.sin_coeff * s);
            g1 += e * k * (term.sin_coeff * c - term.cos_coeff * s);
            g2 -= e * k * k * (term.cos_coeff * c + term.sin_coeff * s);
        }
        (g, g1, g2)
    }

    /// |ξ|²_g = g^{ij}(x) ξ_i ξ_j.
    pub fn norm_sq(&self, x: &[f64], xi: &[f64]) -> f64 {
        let g = self.g_inv(x);
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += g[(i, j)] * xi[i] * xi[j];
            }
        }
        s
    }

    /// Checks symmetry and positive-definiteness at the given points.
    pub fn check_positive_definite(&self, points: &[Vec<f64>]) -> Result<()> {
        for x in points {
            let g = self.g_inv(x);
            if (g.clone() - g.transpose()).amax() > 0.0 {
                return Err(Error::Precondition(format!("g_inv not symmetric at {x:?}")));
            }
            if g.cholesky().is_none() {
                return Err(Error::Precondition(format!("g_inv not positive definite at {x:?}")));
            }
        }
        Ok(())
    }
}
