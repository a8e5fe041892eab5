//! Rectangle witness: χ_{R₁} * χ_{R₂} for R₁ = [N, N + 1/N] × [0,1]^d and
//! R₂ = [−1,1]^{d+1}, by discrete convolution on grids aligned with the
//! rectangle edges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cells across the thin side of R₁.
pub const CELLS_ACROSS_SLAB: usize = 16;
/// Cells per unit length on the unit axes.
pub const CELLS_PER_UNIT: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessSample {
    pub n1: f64,
    pub d: usize,
    pub conv_norm: f64,
    pub u0_norm: f64,
    pub v0_norm: f64,
    /// conv_norm / (‖u₀‖‖v₀‖) · N^{1/2}.
    pub scaled_ratio: f64,
    /// min of the convolution over R₃, times N.
    pub r3_min_times_n: f64,
}

/// Convolution of the indicators of na and nb consecutive cells of width h,
/// at the nodes 0, h, …, (na+nb)h. Two cells convolve to a tent of height
/// h peaked at the node after their index sum, so node k collects h once
/// for every cell pair with i + j = k − 1.
fn box_convolution(na: usize, nb: usize, h: f64) -> Vec<f64> {
    let a = vec![1.0; na];
    let b = vec![1.0; nb];
    let mut out = vec![0.0; na + nb + 1];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i + j + 1] += h * ai * bj;
        }
    }
    out
}

/// ∫ y² over a piecewise-linear function given by node values (exact).
fn l2_sq_piecewise_linear(y: &[f64], h: f64) -> f64 {
    let mut s = 0.0;
    for w in y.windows(2) {
        s += h * (w[0] * w[0] + w[0] * w[1] + w[1] * w[1]) / 3.0;
    }
    s
}

struct Axis {
    values: Vec<f64>,
    /// Coordinate of node 0.
    origin: f64,
    h: f64,
}

impl Axis {
    fn build(a_lo: f64, a_len: f64, b_lo: f64, b_len: f64, h: f64) -> Self {
        let na = (a_len / h).round() as usize;
        let nb = (b_len / h).round() as usize;
        Self {
            values: box_convolution(na, nb, h),
            origin: a_lo + b_lo,
            h,
        }
    }

    fn min_on(&self, lo: f64, hi: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let y = self.origin + *k as f64 * self.h;
                y >= lo - 1e-12 && y <= hi + 1e-12
            })
            .map(|(_, v)| *v)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn sharpness_witness(n1: f64, d: usize) -> Result<SharpnessSample> {
    if !(n1 >= 16.0) {
        return Err(Error::Config(format!("sharpness witness needs N1 >= 16, got {n1}")));
    }
    if d == 0 {
        return Err(Error::Config("dimension must be positive".into()));
    }
    let a = 1.0 / n1;
    let thin = Axis::build(n1, a, -1.0, 2.0, a / CELLS_ACROSS_SLAB as f64);
    let unit = Axis::build(0.0, 1.0, -1.0, 2.0, 1.0 / CELLS_PER_UNIT as f64);
    let thin_sq = l2_sq_piecewise_linear(&thin.values, thin.h);
    let unit_sq = l2_sq_piecewise_linear(&unit.values, unit.h);
    let conv_norm = (thin_sq * unit_sq.powi(d as i32)).sqrt();
    let u0_norm = (a * 2f64.powi(d as i32 - 1)).sqrt();
    let v0_norm = 2f64.powi(d as i32).sqrt();
    let r3_min = thin.min_on(n1 + 0.25, n1 + 0.75) * unit.min_on(-0.5, 0.5).powi(d as i32);
    Ok(SharpnessSample {
        n1,
        d,
        conv_norm,
        u0_norm,
        v0_norm,
        scaled_ratio: conv_norm / (u0_norm * v0_norm) * n1.sqrt(),
        r3_min_times_n: r3_min * n1,
    })
}
