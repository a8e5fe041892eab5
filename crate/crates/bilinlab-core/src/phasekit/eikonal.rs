//! Eikonal phase ∂_sφ̃ + g(x)(∂_xφ̃)² = 0, φ̃(0,x,ξ) = xξ, on the circle,
//! built from bicharacteristics and tabulated as ρ = φ̃ − xξ.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::metric::Metric;
use super::transversality::RANK_FLOOR;
use crate::error::{Error, Result};
use crate::numerics::linspace;

/// State along one bicharacteristic. `jac = ∂x/∂x₀`, `q = ∂p/∂x₀`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayState {
    pub x: f64,
    pub p: f64,
    pub jac: f64,
    pub q: f64,
    pub amp: f64,
    pub phi: f64,
}

impl RayState {
    pub fn initial(x0: f64, xi: f64) -> Self {
        Self {
            x: x0,
            p: xi,
            jac: 1.0,
            q: 0.0,
            amp: 1.0,
            phi: x0 * xi,
        }
    }

    fn axpy(&self, h: f64, d: &RayState) -> RayState {
        RayState {
            x: self.x + h * d.x,
            p: self.p + h * d.p,
            jac: self.jac + h * d.jac,
            q: self.q + h * d.q,
            amp: self.amp + h * d.amp,
            phi: self.phi + h * d.phi,
        }
    }
}

fn rhs(metric: &Metric, y: &RayState) -> RayState {
    let (g, g1, g2) = metric.scalar_1d(y.x);
    let p = y.p;
    RayState {
        x: 2.0 * g * p,
        p: -g1 * p * p,
        jac: 2.0 * g1 * p * y.jac + 2.0 * g * y.q,
        q: -g2 * p * p * y.jac - 2.0 * g1 * p * y.q,
        // Δ_gφ̃ = g'p/2 + g ∂_x p and ∂_x p = q / jac.
        amp: -(0.5 * g1 * p + g * y.q / y.jac) * y.amp,
        phi: g * p * p,
    }
}

fn rk4(metric: &Metric, y: &RayState, h: f64) -> RayState {
    let k1 = rhs(metric, y);
    let k2 = rhs(metric, &y.axpy(0.5 * h, &k1));
    let k3 = rhs(metric, &y.axpy(0.5 * h, &k2));
    let k4 = rhs(metric, &y.axpy(h, &k3));
    RayState {
        x: y.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
        p: y.p + h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p),
        jac: y.jac + h / 6.0 * (k1.jac + 2.0 * k2.jac + 2.0 * k3.jac + k4.jac),
        q: y.q + h / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q),
        amp: y.amp + h / 6.0 * (k1.amp + 2.0 * k2.amp + 2.0 * k3.amp + k4.amp),
        phi: y.phi + h / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi),
    }
}

/// Integrates one ray from s = 0 and records it at every target time.
/// Positive and negative targets are reached by separate sweeps out of 0.
pub fn trace_ray(metric: &Metric, x0: f64, xi: f64, targets: &[f64], max_step: f64) -> Vec<RayState> {
    let mut out = vec![RayState::initial(x0, xi); targets.len()];
    for forward in [true, false] {
        let mut order: Vec<usize> = (0..targets.len())
            .filter(|&i| if forward { targets[i] > 0.0 } else { targets[i] < 0.0 })
            .collect();
        order.sort_by(|&a, &b| targets[a].abs().total_cmp(&targets[b].abs()));
        let mut s = 0.0;
        let mut y = RayState::initial(x0, xi);
        for i in order {
            let span = targets[i] - s;
            let n = (span.abs() / max_step).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for _ in 0..n {
                y = rk4(metric, &y, h);
            }
            s = targets[i];
            out[i] = y;
        }
    }
    out
}

/// A fan of rays launched from a uniform periodic grid of base points,
/// all with the same initial momentum, observed at one time.
#[derive(Clone, Debug)]
pub struct RaySlice {
    pub xi: f64,
    pub period: f64,
    pub states: Vec<RayState>,
}

/// Ray data interpolated to a target point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayPoint {
    pub x0: f64,
    /// φ̃ − xξ.
    pub rho: f64,
    pub p: f64,
    pub amp: f64,
    pub jac: f64,
}

fn hermite(u: f64, f0: f64, m0: f64, f1: f64, m1: f64, h: f64) -> (f64, f64) {
    let u2 = u * u;
    let u3 = u2 * u;
    let v = (2.0 * u3 - 3.0 * u2 + 1.0) * f0
        + (u3 - 2.0 * u2 + u) * h * m0
        + (-2.0 * u3 + 3.0 * u2) * f1
        + (u3 - u2) * h * m1;
    let dv = (6.0 * u2 - 6.0 * u) * f0 + (3.0 * u2 - 4.0 * u + 1.0) * h * m0 + (-6.0 * u2 + 6.0 * u) * f1
        + (3.0 * u2 - 2.0 * u) * h * m1;
    (v, dv / h)
}

/// Four-point Lagrange weights for nodes at offsets −1, 0, 1, 2 and their
/// derivatives with respect to the local coordinate u.
pub(crate) fn lagrange4(u: f64) -> ([f64; 4], [f64; 4]) {
    let a = u + 1.0;
    let b = u;
    let c = u - 1.0;
    let d = u - 2.0;
    let w = [-b * c * d / 6.0, a * c * d / 2.0, -a * b * d / 2.0, a * b * c / 6.0];
    let dw = [
        -(c * d + b * d + b * c) / 6.0,
        (c * d + a * d + a * c) / 2.0,
        -(b * d + a * d + a * b) / 2.0,
        (b * c + a * c + a * b) / 6.0,
    ];
    (w, dw)
}

impl RaySlice {
    pub fn new(metric: &Metric, xi: f64, s: f64, rays: usize, max_step: f64) -> Self {
        let period = metric.period;
        let states = (0..rays)
            .map(|r| trace_ray(metric, period * r as f64 / rays as f64, xi, &[s], max_step)[0])
            .collect();
        Self { xi, period, states }
    }

    pub fn min_jacobian(&self) -> f64 {
        self.states.iter().map(|s| s.jac).fold(f64::INFINITY, f64::min)
    }

    fn spacing(&self) -> f64 {
        self.period / self.states.len() as f64
    }

    fn base(&self, i: usize) -> f64 {
        self.period * i as f64 / self.states.len() as f64
    }

    fn cell(&self, y: f64) -> (usize, usize, f64) {
        let r = self.states.len();
        let h = self.spacing();
        let yy = y.rem_euclid(self.period);
        let pos = yy / h;
        let i = (pos.floor() as usize).min(r - 1);
        (i, (i + 1) % r, pos - i as f64)
    }

    /// Displacement x − x₀ (periodic in x₀) and its derivative jac − 1.
    fn displacement(&self, y: f64) -> (f64, f64) {
        let (i, j, u) = self.cell(y);
        let (a, b) = (&self.states[i], &self.states[j]);
        hermite(u, a.x - self.base(i), a.jac - 1.0, b.x - self.base(j), b.jac - 1.0, self.spacing())
    }

    /// Solves x(x₀) = x by Newton iteration on the Hermite interpolant.
    pub fn foot_point(&self, x: f64) -> f64 {
        let mut y = x;
        for _ in 0..3 {
            y = x - self.displacement(y).0;
        }
        for _ in 0..30 {
            let (dlt, ddlt) = self.displacement(y);
            let step = (y + dlt - x) / (1.0 + ddlt);
            y -= step;
            if step.abs() < 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        y
    }

    pub fn locate(&self, x: f64) -> RayPoint {
        let y = self.foot_point(x);
        let (i, j, u) = self.cell(y);
        let h = self.spacing();
        let (a, b) = (&self.states[i], &self.states[j]);
        let xi = self.xi;
        let rho_of = |st: &RayState| st.phi - st.x * xi;
        let (rho, _) = hermite(u, rho_of(a), (a.p - xi) * a.jac, rho_of(b), (b.p - xi) * b.jac, h);
        let (p, _) = hermite(u, a.p, a.q, b.p, b.q, h);
        let r = self.states.len();
        let (w, _) = lagrange4(u);
        let (mut amp, mut jac) = (0.0, 0.0);
        for (k, wk) in w.iter().enumerate() {
            let st = &self.states[(i + r + k - 1) % r];
            amp += wk * st.amp;
            jac += wk * st.jac;
        }
        RayPoint {
            x0: y,
            rho,
            p,
            amp,
            jac,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EikonalGrid {
    /// Nodes in s over [−α, α]; odd counts place a node at s = 0.
    pub n_s: usize,
    pub n_x: usize,
    pub n_xi: usize,
    /// Rays per ξ node.
    pub rays: usize,
    /// Largest RK4 step.
    pub max_step: f64,
}

impl Default for EikonalGrid {
    fn default() -> Self {
        Self {
            n_s: 65,
            n_x: 64,
            n_xi: 64,
            rays: 256,
            max_step: 1.0 / 256.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EikonalOptions {
    pub grid: EikonalGrid,
    pub residual_tol: f64,
    pub jacobian_floor: f64,
}

impl Default for EikonalOptions {
    fn default() -> Self {
        Self {
            grid: EikonalGrid::default(),
            residual_tol: 1e-6,
            jacobian_floor: 0.25,
        }
    }
}

/// Tabulated eikonal phase on an (s, x, ξ) tensor grid, x periodic.
/// Values are stored as ρ = φ̃ − xξ, which is periodic in x.
#[derive(Clone, Debug)]
pub struct EikonalPhase {
    pub metric: Metric,
    pub alpha: f64,
    pub xi_box: (f64, f64),
    pub s_nodes: Vec<f64>,
    pub x_nodes: Vec<f64>,
    pub xi_nodes: Vec<f64>,
    rho: Vec<f64>,
    amp: Vec<f64>,
    pub max_residual: f64,
    pub min_jacobian: f64,
}

/// Interpolated ρ and the derivatives needed by the phase interface.
#[derive(Clone, Copy, Debug, Default)]
struct RhoInterp {
    v: f64,
    ds: f64,
    dx: f64,
    dxi: f64,
    dx_dxi: f64,
    ds_dxi: f64,
}

fn stencil(pos: f64, n: usize) -> (usize, f64) {
    let near = pos.round();
    let pos = if (pos - near).abs() < 1e-9 { near } else { pos };
    let i = (pos.floor() as isize).clamp(1, n as isize - 3) as usize;
    (i - 1, pos - i as f64)
}

impl EikonalPhase {
    fn idx(&self, is: usize, ix: usize, ixi: usize) -> usize {
        (is * self.x_nodes.len() + ix) * self.xi_nodes.len() + ixi
    }

    /// ρ at a grid node.
    pub fn rho_at(&self, is: usize, ix: usize, ixi: usize) -> f64 {
        self.rho[self.idx(is, ix, ixi)]
    }

    fn step(nodes: &[f64]) -> f64 {
        (nodes[nodes.len() - 1] - nodes[0]) / (nodes.len() - 1) as f64
    }

    fn weights(&self, s: f64, x: f64, xi: f64) -> ([usize; 3], [[f64; 4]; 3], [[f64; 4]; 3], [f64; 3]) {
        let hs = Self::step(&self.s_nodes);
        let hx = self.metric.period / self.x_nodes.len() as f64;
        let hxi = if self.xi_nodes.len() > 1 { Self::step(&self.xi_nodes) } else { 1.0 };
        let (is, us) = stencil((s - self.s_nodes[0]) / hs, self.s_nodes.len());
        let px = x.rem_euclid(self.metric.period) / hx;
        let nx = self.x_nodes.len();
        let ix0 = (px.floor() as usize).min(nx - 1);
        let ux = px - ix0 as f64;
        let ix = (ix0 + nx - 1) % nx;
        let (ixi, uxi) = stencil((xi - self.xi_nodes[0]) / hxi, self.xi_nodes.len());
        let (ws, dws) = lagrange4(us);
        let (wx, dwx) = lagrange4(ux);
        let (wxi, dwxi) = lagrange4(uxi);
        ([is, ix, ixi], [ws, wx, wxi], [dws, dwx, dwxi], [hs, hx, hxi])
    }

    fn interp_table(&self, table: &[f64], s: f64, x: f64, xi: f64) -> RhoInterp {
        let ([is, ix, ixi], [ws, wx, wxi], [dws, dwx, dwxi], [hs, hx, hxi]) = self.weights(s, x, xi);
        let nx = self.x_nodes.len();
        let nxi = self.xi_nodes.len();
        let mut r = RhoInterp::default();
        for a in 0..4 {
            for b in 0..4 {
                let row = ((is + a) * nx + (ix + b) % nx) * nxi;
                for c in 0..4 {
                    let v = table[row + ixi + c];
                    r.v += ws[a] * wx[b] * wxi[c] * v;
                    r.ds += dws[a] * wx[b] * wxi[c] * v;
                    r.dx += ws[a] * dwx[b] * wxi[c] * v;
                    r.dxi += ws[a] * wx[b] * dwxi[c] * v;
                    r.dx_dxi += ws[a] * dwx[b] * dwxi[c] * v;
                    r.ds_dxi += dws[a] * wx[b] * dwxi[c] * v;
                }
            }
        }
        r.ds /= hs;
        r.dx /= hx;
        r.dxi /= hxi;
        r.dx_dxi /= hx * hxi;
        r.ds_dxi /= hs * hxi;
        r
    }

    pub fn phi(&self, s: f64, x: f64, xi: f64) -> f64 {
        x * xi + self.interp_table(&self.rho, s, x, xi).v
    }

    /// (∂_xφ̃, ∂_sφ̃).
    pub fn grad_tx(&self, s: f64, x: f64, xi: f64) -> (f64, f64) {
        let r = self.interp_table(&self.rho, s, x, xi);
        (xi + r.dx, r.ds)
    }

    pub fn grad_xi(&self, s: f64, x: f64, xi: f64) -> f64 {
        x + self.interp_table(&self.rho, s, x, xi).dxi
    }

    /// (∂_ξ∂_xφ̃, ∂_ξ∂_sφ̃).
    pub fn mixed_hess(&self, s: f64, x: f64, xi: f64) -> (f64, f64) {
        let r = self.interp_table(&self.rho, s, x, xi);
        (1.0 + r.dx_dxi, r.ds_dxi)
    }

    /// Leading transport amplitude a₀ with a₀(0) = 1.
    pub fn amplitude(&self, s: f64, x: f64, xi: f64) -> f64 {
        self.interp_table(&self.amp, s, x, xi).v
    }

    /// |∂_sφ̃ + g(∂_xφ̃)²| at every interior node, with ∂_x spectral and ∂_s
    /// a sixth-order central difference; returned as (s, x, ξ) row-major
    /// over interior s indices 3..n_s−3.
    pub fn residuals(&self) -> Vec<f64> {
        let ns = self.s_nodes.len();
        let nx = self.x_nodes.len();
        let nxi = self.xi_nodes.len();
        if ns < 7 {
            return Vec::new();
        }
        let hs = Self::step(&self.s_nodes);
        let kappa = std::f64::consts::TAU / self.metric.period;
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(nx);
        let inv = planner.plan_fft_inverse(nx);
        const C: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
        let g: Vec<f64> = self.x_nodes.iter().map(|&x| self.metric.scalar_1d(x).0).collect();
        let mut out = Vec::with_capacity((ns - 6) * nx * nxi);
        for is in 3..ns - 3 {
            let mut slab = vec![0.0; nx * nxi];
            for ixi in 0..nxi {
                let mut buf: Vec<Complex64> = (0..nx).map(|ix| Complex64::new(self.rho_at(is, ix, ixi), 0.0)).collect();
                fwd.process(&mut buf);
                for (k, c) in buf.iter_mut().enumerate() {
                    let kk = if k < nx / 2 {
                        k as f64
                    } else if k == nx / 2 && nx % 2 == 0 {
                        0.0
                    } else {
                        k as f64 - nx as f64
                    };
                    *c *= Complex64::new(0.0, kappa * kk / nx as f64);
                }
                inv.process(&mut buf);
                let xi = self.xi_nodes[ixi];
                for ix in 0..nx {
                    let mut ds = 0.0;
                    for (m, cm) in C.iter().enumerate() {
                        ds += cm * (self.rho_at(is + m + 1, ix, ixi) - self.rho_at(is - m - 1, ix, ixi));
                    }
                    ds /= hs;
                    let px = xi + buf[ix].re;
                    slab[ix * nxi + ixi] = (ds + g[ix] * px * px).abs();
                }
            }
            out.extend(slab);
        }
        out
    }

    /// Smallest mixed-Hessian singular value (the column norm, d = 1) over
    /// the table nodes.
    pub fn min_sigma(&self) -> f64 {
        let mut m = f64::INFINITY;
        for &s in &self.s_nodes {
            for &x in self.x_nodes.iter().step_by(4) {
                for &xi in self.xi_nodes.iter().step_by(4) {
                    let (a, b) = self.mixed_hess(s, x, xi);
                    m = m.min(a.hypot(b));
                }
            }
        }
        m
    }
}

/// Builds the eikonal table for a one-dimensional metric on [−α, α] × circle × ξ-box.
pub fn solve_eikonal(metric: &Metric, alpha: f64, xi_box: (f64, f64), opts: &EikonalOptions) -> Result<EikonalPhase> {
    metric.validate()?;
    if metric.dim != 1 {
        return Err(Error::Unsupported("eikonal tables are implemented for d = 1 only".into()));
    }
    let grid = opts.grid;
    if !(alpha > 0.0) || !(xi_box.1 >= xi_box.0) {
        return Err(Error::Config(format!("need alpha > 0 and a nonempty xi box, got {alpha}, {xi_box:?}")));
    }
    if grid.n_s < 4 || grid.n_x < 4 || grid.n_xi < 4 || grid.rays < 8 || !(grid.max_step > 0.0) {
        return Err(Error::Config(format!("eikonal grid too small: {grid:?}")));
    }
    let mut s_nodes = linspace(-alpha, alpha, grid.n_s);
    if grid.n_s % 2 == 1 {
        s_nodes[grid.n_s / 2] = 0.0;
    }
    let period = metric.period;
    let x_nodes: Vec<f64> = (0..grid.n_x).map(|j| period * j as f64 / grid.n_x as f64).collect();
    let xi_nodes = linspace(xi_box.0, xi_box.1, grid.n_xi);
    let ns = grid.n_s;
    let nx = grid.n_x;

    // Per ξ node: (ρ[s][x], a[s][x], min jacobian and where).
    type Column = (Vec<f64>, Vec<f64>, f64, f64);
    let columns: Vec<Column> = xi_nodes
        .par_iter()
        .map(|&xi| {
            let rays: Vec<Vec<RayState>> = (0..grid.rays)
                .map(|r| trace_ray(metric, period * r as f64 / grid.rays as f64, xi, &s_nodes, grid.max_step))
                .collect();
            let mut rho = vec![0.0; ns * nx];
            let mut amp = vec![1.0; ns * nx];
            let mut jmin = f64::INFINITY;
            let mut jmin_s = 0.0;
            for (is, &s) in s_nodes.iter().enumerate() {
                if s == 0.0 {
                    continue;
                }
                let slice = RaySlice {
                    xi,
                    period,
                    states: rays.iter().map(|r| r[is]).collect(),
                };
                let j = slice.min_jacobian();
                if j < jmin {
                    jmin = j;
                    jmin_s = s;
                }
                for (ix, &x) in x_nodes.iter().enumerate() {
                    let pt = slice.locate(x);
                    rho[is * nx + ix] = pt.rho;
                    amp[is * nx + ix] = pt.amp;
                }
            }
            (rho, amp, jmin, jmin_s)
        })
        .collect();

    let (mut jmin, mut jmin_s) = (f64::INFINITY, 0.0);
    for c in &columns {
        if c.2 < jmin {
            jmin = c.2;
            jmin_s = c.3;
        }
    }
    if jmin < opts.jacobian_floor {
        return Err(Error::Caustic {
            s: jmin_s,
            jacobian: jmin,
        });
    }

    let nxi = grid.n_xi;
    let mut rho = vec![0.0; ns * nx * nxi];
    let mut amp = vec![0.0; ns * nx * nxi];
    for (ixi, (cr, ca, _, _)) in columns.iter().enumerate() {
        for is in 0..ns {
            for ix in 0..nx {
                rho[(is * nx + ix) * nxi + ixi] = cr[is * nx + ix];
                amp[(is * nx + ix) * nxi + ixi] = ca[is * nx + ix];
            }
        }
    }
    let mut table = EikonalPhase {
        metric: metric.clone(),
        alpha,
        xi_box,
        s_nodes,
        x_nodes,
        xi_nodes,
        rho,
        amp,
        max_residual: 0.0,
        min_jacobian: jmin.min(1.0),
    };
    table.max_residual = table.residuals().into_iter().fold(0.0, f64::max);
    if table.max_residual > opts.residual_tol {
        return Err(Error::Accuracy {
            residual: table.max_residual,
            tol: opts.residual_tol,
        });
    }
    Ok(table)
}

/// Starts at α = 1/2 and halves until the table builds without caustics,
/// meets the residual tolerance, and keeps the mixed Hessian above the
/// rank floor.
pub fn choose_alpha(metric: &Metric, xi_box: (f64, f64), opts: &EikonalOptions) -> Result<EikonalPhase> {
    let mut alpha = 0.5;
    let mut last = None;
    for _ in 0..10 {
        match solve_eikonal(metric, alpha, xi_box, opts) {
            Ok(t) if t.min_sigma() >= RANK_FLOOR => return Ok(t),
            Ok(t) => {
                last = Some(Error::Degenerate {
                    sigma_min: t.min_sigma(),
                    floor: RANK_FLOOR,
                })
            }
            Err(e @ (Error::Caustic { .. } | Error::Accuracy { .. })) => last = Some(e),
            Err(e) => return Err(e),
        }
        alpha *= 0.5;
    }
    Err(last.unwrap_or_else(|| Error::Precondition("no admissible alpha".into())))
}
