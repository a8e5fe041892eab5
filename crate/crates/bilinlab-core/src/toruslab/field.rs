use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{band_bump, complex_gaussian, pairwise_sum, rayleigh, rng_from_seed};

/// Littlewood–Paley band φ(|ξ|/N) with φ supported in [1/2, 2] and equal
/// to 1 on [3/4, 3/2].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicBand {
    pub n: f64,
}

impl DyadicBand {
    pub fn new(n: f64) -> Self {
        Self { n }
    }

    pub fn weight(&self, freq: f64) -> f64 {
        band_bump(freq / self.n)
    }
}

/// Complex Fourier coefficients on the torus of side L = 2πλ, with
/// u(x) = Σ_k c_k e^{ik·x/λ}. Coefficients are stored densely in FFT order,
/// M per axis, first axis slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusField {
    pub d: usize,
    pub m: usize,
    pub lambda_scale: f64,
    pub coeffs: Vec<Complex64>,
}

fn wavenumber(i: usize, m: usize) -> i64 {
    if i < m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

impl TorusField {
    pub fn zeros(d: usize, m: usize, lambda_scale: f64) -> Result<Self> {
        if !(d == 1 || d == 2) {
            return Err(Error::Config(format!("torus dimension must be 1 or 2, got {d}")));
        }
        if !m.is_power_of_two() || m < 2 {
            return Err(Error::Config(format!("modes per axis must be a power of two, got {m}")));
        }
        if !(lambda_scale > 0.0) {
            return Err(Error::Config("lambda_scale must be positive".into()));
        }
        Ok(Self {
            d,
            m,
            lambda_scale,
            coeffs: vec![Complex64::new(0.0, 0.0); m.pow(d as u32)],
        })
    }

    pub fn side(&self) -> f64 {
        std::f64::consts::TAU * self.lambda_scale
    }

    /// Torus volume (2πλ)^d.
    pub fn volume(&self) -> f64 {
        self.side().powi(self.d as i32)
    }

    /// Integer wavevector of storage slot `idx` (unused trailing axes are 0).
    pub fn mode(&self, idx: usize) -> [i64; 2] {
        match self.d {
            1 => [wavenumber(idx, self.m), 0],
            _ => [wavenumber(idx / self.m, self.m), wavenumber(idx % self.m, self.m)],
        }
    }

    /// |k/λ|.
    pub fn frequency(&self, idx: usize) -> f64 {
        let k = self.mode(idx);
        ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt() / self.lambda_scale
    }

    pub fn slot(&self, k: [i64; 2]) -> Option<usize> {
        let h = (self.m / 2) as i64;
        let ok = |v: i64| v >= -h && v < h;
        let w = |v: i64| v.rem_euclid(self.m as i64) as usize;
        match self.d {
            1 if ok(k[0]) && k[1] == 0 => Some(w(k[0])),
            2 if ok(k[0]) && ok(k[1]) => Some(w(k[0]) * self.m + w(k[1])),
            _ => None,
        }
    }

    /// ‖u‖_{L²} from the coefficients: (2πλ)^{d/2} (Σ|c|²)^{1/2}.
    pub fn norm(&self) -> f64 {
        let sq: Vec<f64> = self.coeffs.iter().map(|c| c.norm_sqr()).collect();
        (self.volume() * pairwise_sum(&sq)).sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        for c in &mut self.coeffs {
            *c *= s;
        }
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::Undefined("cannot normalize the zero field".into()));
        }
        self.scale(1.0 / n);
        Ok(self)
    }

    /// Complex conjugate in physical space: c'_k = conj(c_{−k}).
    pub fn conjugate(&self) -> Self {
        let mut out = self.clone();
        for idx in 0..self.coeffs.len() {
            let k = self.mode(idx);
            out.coeffs[idx] = match self.slot([-k[0], -k[1]]) {
                Some(j) => self.coeffs[j].conj(),
                None => Complex64::new(0.0, 0.0),
            };
        }
        out
    }

    /// Samples on the uniform M^d grid.
    pub fn to_physical(&self) -> Vec<Complex64> {
        let mut buf = self.coeffs.clone();
        fft_nd(&mut buf, self.d, self.m, true);
        buf
    }

    /// Inverse of [`TorusField::to_physical`].
    pub fn from_physical(d: usize, m: usize, lambda_scale: f64, samples: &[Complex64]) -> Result<Self> {
        let mut f = Self::zeros(d, m, lambda_scale)?;
        if samples.len() != f.coeffs.len() {
            return Err(Error::Config("sample count does not match M^d".into()));
        }
        let mut buf = samples.to_vec();
        fft_nd(&mut buf, d, m, false);
        let n = buf.len() as f64;
        for (c, b) in f.coeffs.iter_mut().zip(buf) {
            *c = b / n;
        }
        Ok(f)
    }

    /// (L^d · mean |u(x_j)|²)^{1/2} from physical samples.
    pub fn physical_norm(&self) -> f64 {
        let sq: Vec<f64> = self.to_physical().iter().map(|c| c.norm_sqr()).collect();
        (self.volume() * pairwise_sum(&sq) / sq.len() as f64).sqrt()
    }

    pub fn project(&self, band: &DyadicBand) -> Self {
        let mut out = self.clone();
        for (idx, c) in out.coeffs.iter_mut().enumerate() {
            *c *= band.weight(self.frequency(idx));
        }
        out
    }

    pub fn nonzero_count(&self) -> usize {
        self.coeffs.iter().filter(|c| c.norm_sqr() > 0.0).count()
    }
}

/// Unnormalized multidimensional FFT in place; `inverse` uses e^{+2πi jk/M}.
pub(crate) fn fft_nd(buf: &mut [Complex64], d: usize, m: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let plan = if inverse {
        planner.plan_fft_inverse(m)
    } else {
        planner.plan_fft_forward(m)
    };
    plan.process(buf);
    if d == 2 {
        let mut t = vec![Complex64::new(0.0, 0.0); buf.len()];
        transpose(buf, &mut t, m);
        plan.process(&mut t);
        transpose(&t, buf, m);
    }
}

pub(crate) fn transpose(src: &[Complex64], dst: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in 0..m {
            dst[j * m + i] = src[i * m + j];
        }
    }
}

/// Smallest power of two M with 2·N·λ ≤ M/2.
pub fn modes_for_band(n: f64, lambda_scale: f64) -> usize {
    let need = (4.0 * n * lambda_scale).ceil().max(8.0) as usize;
    need.next_power_of_two()
}

fn check_nyquist(m: usize, band: &DyadicBand, lambda_scale: f64) -> Result<()> {
    if 2.0 * band.n * lambda_scale > (m / 2) as f64 {
        return Err(Error::Aliasing(format!(
            "band 2N·λ = {} exceeds M/2 = {}",
            2.0 * band.n * lambda_scale,
            m / 2
        )));
    }
    Ok(())
}

/// Seeded complex Gaussian coefficients times φ(|k/λ|/N), unit L² norm.
pub fn make_band_field(d: usize, m: usize, lambda_scale: f64, band: &DyadicBand, seed: u64) -> Result<TorusField> {
    let mut rng = rng_from_seed(seed);
    band_field_with(d, m, lambda_scale, band, &mut rng)
}

pub(crate) fn band_field_with<R: Rng + ?Sized>(
    d: usize,
    m: usize,
    lambda_scale: f64,
    band: &DyadicBand,
    rng: &mut R,
) -> Result<TorusField> {
    let mut f = TorusField::zeros(d, m, lambda_scale)?;
    check_nyquist(m, band, lambda_scale)?;
    for idx in 0..f.coeffs.len() {
        let w = band.weight(f.frequency(idx));
        if w > 0.0 {
            f.coeffs[idx] = complex_gaussian(rng) * w;
        }
    }
    f.normalized()
}

/// Random data families used by the ratio sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum Family {
    /// Complex Gaussian coefficients over the whole dyadic band.
    Gaussian,
    /// Modes with k₁ = round(Nλ) and |k₂/λ| ≤ halfwidth · N', where N' is
    /// the partner field's scale; Rayleigh moduli, phases aligned at the
    /// origin.
    Slab { halfwidth: f64 },
    /// The whole dyadic band with Rayleigh moduli and aligned phases.
    Focused,
}

impl Family {
    pub fn generate<R: Rng + ?Sized>(
        &self,
        d: usize,
        n: f64,
        partner: f64,
        lambda_scale: f64,
        rng: &mut R,
    ) -> Result<TorusField> {
        let band = DyadicBand::new(n);
        let m = modes_for_band(n, lambda_scale);
        match *self {
            Family::Gaussian => band_field_with(d, m, lambda_scale, &band, rng),
            Family::Focused => {
                let mut f = TorusField::zeros(d, m, lambda_scale)?;
                check_nyquist(m, &band, lambda_scale)?;
                for idx in 0..f.coeffs.len() {
                    let w = band.weight(f.frequency(idx));
                    if w > 0.0 {
                        f.coeffs[idx] = Complex64::new(w * rayleigh(rng), 0.0);
                    }
                }
                f.normalized()
            }
            Family::Slab { halfwidth } => {
                let mut f = TorusField::zeros(d, m, lambda_scale)?;
                check_nyquist(m, &band, lambda_scale)?;
                let k1 = (n * lambda_scale).round() as i64;
                let k2max = if d == 1 {
                    0
                } else {
                    (halfwidth * partner * lambda_scale + 1e-9).floor() as i64
                };
                for k2 in -k2max..=k2max {
                    let idx = f
                        .slot([k1, k2])
                        .ok_or_else(|| Error::Aliasing(format!("slab mode ({k1}, {k2}) outside the grid")))?;
                    let w = band.weight(f.frequency(idx));
                    if w > 0.0 {
                        f.coeffs[idx] = Complex64::new(w * rayleigh(rng), 0.0);
                    }
                }
                f.normalized()
            }
        }
    }
}

/// Diagonal Fourier multipliers, with symbols in terms of ξ = k/λ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum FourierMultiplier {
    /// e^{itΔ}: e^{−it|ξ|²}.
    Schrodinger { t: f64 },
    /// e^{±it|∇|}: e^{±it|ξ|}.
    HalfWave { t: f64, sign: i8 },
    /// |ξ|^order.
    Derivative { order: u32 },
}

impl FourierMultiplier {
    pub fn symbol(&self, freq: f64) -> Complex64 {
        match *self {
            FourierMultiplier::Schrodinger { t } => Complex64::from_polar(1.0, -t * freq * freq),
            FourierMultiplier::HalfWave { t, sign } => Complex64::from_polar(1.0, sign as f64 * t * freq),
            FourierMultiplier::Derivative { order } => Complex64::new(freq.powi(order as i32), 0.0),
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, FourierMultiplier::Derivative { .. })
    }
}

pub fn propagate(field: &TorusField, mult: &FourierMultiplier) -> TorusField {
    let mut out = field.clone();
    for (idx, c) in out.coeffs.iter_mut().enumerate() {
        *c *= mult.symbol(field.frequency(idx));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_support_d1() {
        let f = make_band_field(1, 64, 1.0, &DyadicBand::new(8.0), 3).unwrap();
        for (idx, c) in f.coeffs.iter().enumerate() {
            let k = f.mode(idx)[0].abs();
            if !(4..=16).contains(&k) {
                assert_eq!(*c, Complex64::new(0.0, 0.0));
            }
        }
        assert!((f.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nyquist_guard() {
        assert!(matches!(
            make_band_field(2, 32, 1.0, &DyadicBand::new(16.0), 0),
            Err(Error::Aliasing(_))
        ));
    }

    #[test]
    fn plane_wave_phase() {
        let mut f = TorusField::zeros(2, 16, 1.0).unwrap();
        let i = f.slot([3, -2]).unwrap();
        f.coeffs[i] = Complex64::new(1.0, 0.0);
        let g = propagate(&f, &FourierMultiplier::Schrodinger { t: 0.1 });
        assert!((g.coeffs[i] - Complex64::from_polar(1.0, -0.1 * 13.0)).norm() < 1e-15);
        assert_eq!(g.coeffs[i].norm(), 1.0);
    }

    #[test]
    fn slot_roundtrip() {
        let f = TorusField::zeros(2, 8, 2.0).unwrap();
        for idx in 0..64 {
            assert_eq!(f.slot(f.mode(idx)), Some(idx));
        }
    }

    #[test]
    fn slab_family_shape() {
        let mut rng = rng_from_seed(1);
        let f = Family::Slab { halfwidth: 2.0 }.generate(2, 16.0, 1.0, 1.0, &mut rng).unwrap();
        assert_eq!(f.nonzero_count(), 5);
        for idx in 0..f.coeffs.len() {
            if f.coeffs[idx].norm() > 0.0 {
                assert_eq!(f.mode(idx)[0], 16);
            }
        }
    }
}
