use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::field::{transpose, DyadicBand, Family, TorusField};
use crate::error::{Error, Result};
use crate::numerics::{
    composite_gauss_legendre, interquartile_range, median, next_smooth, pairwise_sum, rng_from_seed, trial_seed,
};

/// Gauss–Legendre nodes per time panel.
pub const GL_ORDER: usize = 12;
/// Largest phase advance, in radians, of the fastest temporal frequency
/// across one panel.
pub const PANEL_PHASE: f64 = 6.0;
/// Pair budget of the resonance oracle.
pub const ORACLE_MAX_PAIRS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "generator", content = "sign")]
pub enum Generator {
    /// e^{itΔ}, symbol e^{−it|ξ|²}.
    Schrodinger,
    /// e^{±it|∇|}, symbol e^{±it|ξ|}.
    HalfWave(i8),
}

impl Generator {
    /// ω(ξ) with the evolution acting as e^{−itω}.
    pub fn omega(&self, freq: f64) -> f64 {
        match *self {
            Generator::Schrodinger => freq * freq,
            Generator::HalfWave(s) => -(s as f64) * freq,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Generator::Schrodinger => "schrodinger",
            Generator::HalfWave(s) if *s >= 0 => "wave+",
            Generator::HalfWave(_) => "wave-",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    #[default]
    Auto,
    /// Both factors on a 5-smooth grid holding the full product band.
    Fft,
    /// Direct convolution of the two mode lists.
    Sparse,
}

/// Nonzero modes of a field with their temporal frequencies.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSet {
    pub d: usize,
    pub lambda_scale: f64,
    pub k: Vec<[i64; 2]>,
    pub c: Vec<Complex64>,
    pub omega: Vec<f64>,
}

impl ModeSet {
    pub fn from_field(field: &TorusField, gen: Generator) -> Self {
        let mut k = Vec::new();
        let mut c = Vec::new();
        let mut omega = Vec::new();
        for (idx, &v) in field.coeffs.iter().enumerate() {
            if v.norm_sqr() > 0.0 {
                k.push(field.mode(idx));
                c.push(v);
                omega.push(gen.omega(field.frequency(idx)));
            }
        }
        Self {
            d: field.d,
            lambda_scale: field.lambda_scale,
            k,
            c,
            omega,
        }
    }

    pub fn frequency(&self, i: usize) -> f64 {
        let k = self.k[i];
        ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt() / self.lambda_scale
    }

    /// Applies |ξ|^order to every coefficient.
    pub fn differentiated(mut self, order: u32) -> Self {
        if order > 0 {
            for i in 0..self.c.len() {
                let f = self.frequency(i).powi(order as i32);
                self.c[i] *= f;
            }
        }
        self
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    fn volume(&self) -> f64 {
        (std::f64::consts::TAU * self.lambda_scale).powi(self.d as i32)
    }

    pub fn norm_sq(&self) -> f64 {
        let sq: Vec<f64> = self.c.iter().map(|c| c.norm_sqr()).collect();
        self.volume() * pairwise_sum(&sq)
    }

    fn kmax(&self) -> i64 {
        self.k.iter().flat_map(|k| k.iter().map(|v| v.abs())).max().unwrap_or(0)
    }

    fn spread(&self) -> f64 {
        let hi = self.omega.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = self.omega.iter().copied().fold(f64::INFINITY, f64::min);
        if hi >= lo {
            hi - lo
        } else {
            0.0
        }
    }

    fn at_time(&self, t: f64) -> Vec<Complex64> {
        self.c
            .iter()
            .zip(&self.omega)
            .map(|(c, w)| c * Complex64::from_polar(1.0, -t * w))
            .collect()
    }
}

fn check_pair(u: &ModeSet, v: &ModeSet, t: f64) -> Result<()> {
    if u.d != v.d || u.lambda_scale != v.lambda_scale {
        return Err(Error::Config("fields live on different tori".into()));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Config(format!("time window must be positive, got {t}")));
    }
    Ok(())
}

/// Time nodes on [−T, T], fine enough for every temporal frequency of |uv|².
pub fn time_nodes(u: &ModeSet, v: &ModeSet, t: f64) -> Vec<(f64, f64)> {
    let omega = u.spread() + v.spread();
    let panels = ((2.0 * t * omega / PANEL_PHASE).ceil() as usize).max(1);
    composite_gauss_legendre(-t, t, panels, GL_ORDER)
}

struct FftPlan {
    m: usize,
    fft: Arc<dyn Fft<f64>>,
}

fn fft_grid(u: &ModeSet, v: &ModeSet) -> usize {
    next_smooth((2 * (u.kmax() + v.kmax()) + 1) as usize)
}

fn fft_cost(u: &ModeSet, v: &ModeSet) -> f64 {
    let size = (fft_grid(u, v) as f64).powi(u.d as i32);
    2.0 * size * (2.5 * size.log2() + 4.0)
}

fn sparse_cost(u: &ModeSet, v: &ModeSet) -> f64 {
    (u.len() * v.len()) as f64
}

/// Largest pair table the sparse backend will build.
const SPARSE_MAX_PAIRS: usize = 1 << 26;

fn choose(u: &ModeSet, v: &ModeSet, backend: Backend) -> Backend {
    match backend {
        Backend::Auto => {
            if u.len() * v.len() <= SPARSE_MAX_PAIRS && sparse_cost(u, v) < fft_cost(u, v) {
                Backend::Sparse
            } else {
                Backend::Fft
            }
        }
        b => b,
    }
}

fn physical(modes: &ModeSet, t: f64, plan: &FftPlan, buf: &mut Vec<Complex64>, scratch: &mut Vec<Complex64>) {
    let m = plan.m as i64;
    buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
    for (k, c) in modes.k.iter().zip(modes.at_time(t)) {
        let i0 = k[0].rem_euclid(m) as usize;
        let idx = if modes.d == 1 {
            i0
        } else {
            i0 * plan.m + k[1].rem_euclid(m) as usize
        };
        buf[idx] += c;
    }
    plan.fft.process(buf);
    if modes.d == 2 {
        transpose(buf, scratch, plan.m);
        plan.fft.process(scratch);
        std::mem::swap(buf, scratch);
    }
}

fn norm_sq_fft(u: &ModeSet, v: &ModeSet, nodes: &[(f64, f64)]) -> f64 {
    let m = fft_grid(u, v);
    let plan = FftPlan {
        m,
        fft: FftPlanner::new().plan_fft_inverse(m),
    };
    let size = m.pow(u.d as u32);
    let vol = u.volume();
    let per_node: Vec<f64> = nodes
        .par_iter()
        .map_init(
            || {
                (
                    vec![Complex64::new(0.0, 0.0); size],
                    vec![Complex64::new(0.0, 0.0); size],
                    vec![Complex64::new(0.0, 0.0); size],
                )
            },
            |(bu, bv, scratch), &(t, w)| {
                physical(u, t, &plan, bu, scratch);
                physical(v, t, &plan, bv, scratch);
                let sq: Vec<f64> = bu.iter().zip(bv.iter()).map(|(a, b)| (a * b).norm_sqr()).collect();
                w * vol * pairwise_sum(&sq) / size as f64
            },
        )
        .collect();
    pairwise_sum(&per_node)
}

fn norm_sq_sparse(u: &ModeSet, v: &ModeSet, nodes: &[(f64, f64)]) -> f64 {
    let d = u.d;
    let lo: Vec<i64> = (0..d)
        .map(|a| u.k.iter().map(|k| k[a]).min().unwrap_or(0) + v.k.iter().map(|k| k[a]).min().unwrap_or(0))
        .collect();
    let hi: Vec<i64> = (0..d)
        .map(|a| u.k.iter().map(|k| k[a]).max().unwrap_or(0) + v.k.iter().map(|k| k[a]).max().unwrap_or(0))
        .collect();
    let width: Vec<usize> = (0..d).map(|a| (hi[a] - lo[a] + 1) as usize).collect();
    let size: usize = width.iter().product();
    let mut pairs = Vec::with_capacity(u.len() * v.len());
    for ku in &u.k {
        for kv in &v.k {
            let mut idx = 0usize;
            for a in 0..d {
                idx = idx * width[a] + (ku[a] + kv[a] - lo[a]) as usize;
            }
            pairs.push(idx as u32);
        }
    }
    let vol = u.volume();
    let nv = v.len();
    let per_node: Vec<f64> = nodes
        .par_iter()
        .map_init(
            || vec![Complex64::new(0.0, 0.0); size],
            |acc, &(t, w)| {
                acc.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
                let cu = u.at_time(t);
                let cv = v.at_time(t);
                for (i, a) in cu.iter().enumerate() {
                    let row = &pairs[i * nv..(i + 1) * nv];
                    for (b, &idx) in cv.iter().zip(row) {
                        acc[idx as usize] += a * b;
                    }
                }
                let sq: Vec<f64> = acc.iter().map(|z| z.norm_sqr()).collect();
                w * vol * pairwise_sum(&sq)
            },
        )
        .collect();
    pairwise_sum(&per_node)
}

/// ‖uv‖²_{L²([−T,T]×torus)} for the evolutions of two mode sets.
pub fn product_norm_sq(u: &ModeSet, v: &ModeSet, t: f64, backend: Backend) -> Result<f64> {
    check_pair(u, v, t)?;
    if u.is_empty() || v.is_empty() {
        return Ok(0.0);
    }
    let nodes = time_nodes(u, v, t);
    Ok(match choose(u, v, backend) {
        Backend::Sparse => norm_sq_sparse(u, v, &nodes),
        _ => norm_sq_fft(u, v, &nodes),
    })
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Exact ‖uv‖² over [−T, T] by summing the time integral of every pair of
/// resonant products in closed form.
pub fn resonance_oracle(u: &ModeSet, v: &ModeSet, t: f64) -> Result<f64> {
    check_pair(u, v, t)?;
    let pairs = u.len() * v.len();
    if pairs > ORACLE_MAX_PAIRS {
        return Err(Error::Scale(format!(
            "{pairs} mode pairs exceed the oracle budget of {ORACLE_MAX_PAIRS}"
        )));
    }
    let mut groups: BTreeMap<[i64; 2], Vec<(Complex64, f64)>> = BTreeMap::new();
    for i in 0..u.len() {
        for j in 0..v.len() {
            let k = [u.k[i][0] + v.k[j][0], u.k[i][1] + v.k[j][1]];
            groups
                .entry(k)
                .or_default()
                .push((u.c[i] * v.c[j], u.omega[i] + v.omega[j]));
        }
    }
    let mut terms = Vec::new();
    for members in groups.values() {
        for (za, wa) in members {
            for (zb, wb) in members {
                terms.push((za * zb.conj()).re * 2.0 * t * sinc((wa - wb) * t));
            }
        }
    }
    Ok(u.volume() * pairwise_sum(&terms))
}

/// One configuration of the torus ratio measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSetup {
    pub d: usize,
    pub n1: f64,
    pub n2: f64,
    pub t: f64,
    pub lambda_scale: f64,
    pub generators: [Generator; 2],
    pub families: [Family; 2],
    pub orders: [u32; 2],
    pub trials: usize,
    pub seed: u64,
    pub label: String,
    pub backend: Backend,
}

impl RatioSetup {
    pub fn new(d: usize, n1: f64, n2: f64, t: f64) -> Self {
        Self {
            d,
            n1,
            n2,
            t,
            lambda_scale: 1.0,
            generators: [Generator::Schrodinger; 2],
            families: [Family::Gaussian; 2],
            orders: [0, 0],
            trials: 8,
            seed: 0,
            label: "torus-bilinear".into(),
            backend: Backend::Auto,
        }
    }

    pub fn with_families(mut self, u: Family, v: Family) -> Self {
        self.families = [u, v];
        self
    }

    /// The two fields of one trial, drawn u first.
    pub fn draw(&self, trial: usize) -> Result<(TorusField, TorusField)> {
        let mut rng = rng_from_seed(trial_seed(self.seed, &self.label, trial as u64));
        let u = self.families[0].generate(self.d, self.n1, self.n2, self.lambda_scale, &mut rng)?;
        let v = self.families[1].generate(self.d, self.n2, self.n1, self.lambda_scale, &mut rng)?;
        Ok((u, v))
    }

    fn validate(&self) -> Result<()> {
        if !(self.d == 1 || self.d == 2) {
            return Err(Error::Config(format!("torus dimension must be 1 or 2, got {}", self.d)));
        }
        if self.trials == 0 {
            return Err(Error::Config("ratio needs at least one trial".into()));
        }
        if !(self.n2 > 0.0 && self.n1.is_finite()) {
            return Err(Error::Config("band scales must be positive".into()));
        }
        if self.n2 > self.n1 {
            return Err(Error::ArgumentOrder {
                lambda: self.n1,
                mu: self.n2,
            });
        }
        if !(self.t > 0.0) {
            return Err(Error::Config("time window must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSample {
    pub n1: f64,
    pub n2: f64,
    pub t: f64,
    pub lambda_scale: f64,
    pub generators: [Generator; 2],
    pub orders: [u32; 2],
    /// Median over trials.
    pub value: f64,
    pub spread: f64,
    pub trials: Vec<f64>,
}

/// ‖P(D)u · Q(D)v‖_{L²([−T,T]×torus)} / (‖u₀‖‖v₀‖) for given data.
pub fn ratio_of_fields(
    u: &TorusField,
    v: &TorusField,
    t: f64,
    generators: [Generator; 2],
    orders: [u32; 2],
    backend: Backend,
) -> Result<f64> {
    let mu = ModeSet::from_field(u, generators[0]);
    let mv = ModeSet::from_field(v, generators[1]);
    let norm = (mu.norm_sq() * mv.norm_sq()).sqrt();
    if norm == 0.0 {
        return Err(Error::Undefined("ratio of a zero field".into()));
    }
    let sq = product_norm_sq(&mu.differentiated(orders[0]), &mv.differentiated(orders[1]), t, backend)?;
    Ok(sq.sqrt() / norm)
}

pub fn bilinear_ratio(setup: &RatioSetup) -> Result<RatioSample> {
    setup.validate()?;
    let vals: Vec<Result<f64>> = (0..setup.trials)
        .into_par_iter()
        .map(|trial| {
            let (u, v) = setup.draw(trial)?;
            ratio_of_fields(&u, &v, setup.t, setup.generators, setup.orders, setup.backend)
        })
        .collect();
    let vals = vals.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(RatioSample {
        n1: setup.n1,
        n2: setup.n2,
        t: setup.t,
        lambda_scale: setup.lambda_scale,
        generators: setup.generators,
        orders: setup.orders,
        value: median(&vals),
        spread: interquartile_range(&vals),
        trials: vals,
    })
}

/// Time-one ratio on the torus of side 2πλ_scale.
pub fn rescaled_ratio(setup: &RatioSetup, lambda_scale: f64) -> Result<RatioSample> {
    if !(lambda_scale > 0.0) {
        return Err(Error::Config("lambda_scale must be positive".into()));
    }
    let s = RatioSetup {
        lambda_scale,
        t: 1.0,
        ..setup.clone()
    };
    bilinear_ratio(&s)
}

/// Schrödinger evolution of u against the half-wave evolution e^{±it|∇|} of v.
pub fn mixed_ratio(setup: &RatioSetup, sign: i8) -> Result<RatioSample> {
    if setup.n1 < 2.0 {
        return Err(Error::Precondition(format!(
            "mixed ratio needs N1 well above 1, got {}",
            setup.n1
        )));
    }
    let s = RatioSetup {
        generators: [Generator::Schrodinger, Generator::HalfWave(sign.signum())],
        ..setup.clone()
    };
    bilinear_ratio(&s)
}

pub fn derivative_twisted_ratio(setup: &RatioSetup, orders: [u32; 2]) -> Result<RatioSample> {
    let s = RatioSetup {
        orders,
        ..setup.clone()
    };
    bilinear_ratio(&s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearSample {
    pub n: f64,
    pub t: f64,
    pub value: f64,
    pub spread: f64,
    pub trials: Vec<f64>,
}

/// ‖e^{itΔ}P_N u₀‖_{L⁴([−T,T]×torus)} / ‖u₀‖.
pub fn linear_strichartz_of_field(u0: &TorusField, n: f64, t: f64) -> Result<f64> {
    let norm = u0.norm();
    if norm == 0.0 {
        return Err(Error::Undefined("zero initial datum".into()));
    }
    let p = u0.project(&DyadicBand::new(n));
    let modes = ModeSet::from_field(&p, Generator::Schrodinger);
    if modes.is_empty() {
        return Err(Error::Undefined(format!("datum has no content in the band N = {n}")));
    }
    let fourth = product_norm_sq(&modes, &modes, t, Backend::Fft)?;
    Ok(fourth.powf(0.25) / norm)
}

/// Median L⁴ ratio over random band data of the given family at T = 1/N.
pub fn linear_strichartz_ratio(
    n: f64,
    d: usize,
    family: Family,
    trials: usize,
    seed: u64,
    lambda_scale: f64,
) -> Result<LinearSample> {
    if trials == 0 {
        return Err(Error::Config("ratio needs at least one trial".into()));
    }
    let t = 1.0 / n;
    let vals: Vec<Result<f64>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = rng_from_seed(trial_seed(seed, "linear-baseline", trial as u64));
            let u = family.generate(d, n, n, lambda_scale, &mut rng)?;
            linear_strichartz_of_field(&u, n, t)
        })
        .collect();
    let vals = vals.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(LinearSample {
        n,
        t,
        value: median(&vals),
        spread: interquartile_range(&vals),
        trials: vals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn single(d: usize, m: usize, lam: f64, k: [i64; 2]) -> TorusField {
        let mut f = TorusField::zeros(d, m, lam).unwrap();
        let i = f.slot(k).unwrap();
        f.coeffs[i] = Complex64::new(1.0, 0.0);
        f
    }

    #[test]
    fn plane_waves_closed_form() {
        for &(d, lam) in &[(1, 1.0), (2, 1.0), (2, 2.0)] {
            let u = single(d, 32, lam, [5, if d == 2 { -3 } else { 0 }]);
            let v = single(d, 32, lam, [2, 0]);
            for backend in [Backend::Fft, Backend::Sparse] {
                let r = ratio_of_fields(&u, &v, 0.3, [Generator::Schrodinger; 2], [0, 0], backend).unwrap();
                let exact = (0.6f64).sqrt() * (TAU * lam).powf(-(d as f64) / 2.0);
                assert!((r - exact).abs() < 1e-13 * exact, "{r} {exact}");
            }
        }
    }

    #[test]
    fn backends_agree() {
        let band = DyadicBand::new(4.0);
        let u = super::super::field::make_band_field(2, 32, 1.0, &band, 1).unwrap();
        let v = super::super::field::make_band_field(2, 16, 1.0, &DyadicBand::new(2.0), 2).unwrap();
        let mu = ModeSet::from_field(&u, Generator::Schrodinger);
        let mv = ModeSet::from_field(&v, Generator::HalfWave(1));
        let a = product_norm_sq(&mu, &mv, 0.25, Backend::Fft).unwrap();
        let b = product_norm_sq(&mu, &mv, 0.25, Backend::Sparse).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn oracle_budget() {
        let u = super::super::field::make_band_field(2, 64, 1.0, &DyadicBand::new(8.0), 1).unwrap();
        let m = ModeSet::from_field(&u, Generator::Schrodinger);
        assert!(matches!(resonance_oracle(&m, &m, 0.1), Err(Error::Scale(_))));
    }

    #[test]
    fn equal_frequencies_constant_integrand() {
        let u = single(1, 16, 1.0, [3, 0]);
        let v = single(1, 16, 1.0, [-3, 0]);
        let mu = ModeSet::from_field(&u, Generator::Schrodinger);
        let mv = ModeSet::from_field(&v, Generator::Schrodinger);
        let o = resonance_oracle(&mu, &mv, 0.7).unwrap();
        assert!((o - 1.4 * TAU).abs() < 1e-13);
    }

    #[test]
    fn derivative_single_mode_factor() {
        let u = single(2, 32, 1.0, [6, 8]);
        let v = single(2, 32, 1.0, [1, 0]);
        let g = [Generator::Schrodinger; 2];
        let r0 = ratio_of_fields(&u, &v, 0.1, g, [0, 0], Backend::Auto).unwrap();
        let r1 = ratio_of_fields(&u, &v, 0.1, g, [1, 0], Backend::Auto).unwrap();
        assert!((r1 / r0 - 10.0).abs() < 1e-13);
    }

    #[test]
    fn order_zero_is_bitwise_plain() {
        let s = RatioSetup {
            trials: 2,
            ..RatioSetup::new(2, 4.0, 2.0, 0.25)
        };
        assert_eq!(bilinear_ratio(&s).unwrap(), derivative_twisted_ratio(&s, [0, 0]).unwrap());
    }

    #[test]
    fn constant_datum_has_no_band_content() {
        let u = single(2, 16, 1.0, [0, 0]);
        assert!(matches!(linear_strichartz_of_field(&u, 2.0, 0.5), Err(Error::Undefined(_))));
    }

    #[test]
    fn n2_above_n1_rejected() {
        assert!(matches!(
            bilinear_ratio(&RatioSetup::new(2, 2.0, 4.0, 0.5)),
            Err(Error::ArgumentOrder { .. })
        ));
    }
}
