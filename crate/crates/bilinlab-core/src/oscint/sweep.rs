use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eval::{eval_oscillatory, product_norm, Operator};
use super::grid::{FrequencyProfile, RandomProfile, SpaceTimeGrid, MIN_NODES};
use crate::error::{Error, Result};
use crate::numerics::{interquartile_range, linspace, median, rng_from_seed, trial_seed};
use crate::phasekit::{transversality_margin, Lattice, TransversalityReport};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule", content = "value")]
pub enum MuRule {
    Fixed(f64),
    Tied,
    /// μ = λ / ρ.
    Ratio(f64),
}

impl MuRule {
    pub fn mu(&self, lambda: f64) -> f64 {
        match *self {
            MuRule::Fixed(m) => m,
            MuRule::Tied => lambda,
            MuRule::Ratio(r) => lambda / r,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "axis")]
pub enum ScaleSchedule {
    Lambda { lambdas: Vec<f64>, mu: MuRule },
    Mu { lambda: f64, mus: Vec<f64> },
}

impl ScaleSchedule {
    pub fn cells(&self) -> Vec<(f64, f64)> {
        match self {
            ScaleSchedule::Lambda { lambdas, mu } => lambdas.iter().map(|&l| (l, mu.mu(l))).collect(),
            ScaleSchedule::Mu { lambda, mus } => mus.iter().map(|&m| (*lambda, m)).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DecaySweep {
    pub a: Operator,
    pub b: Operator,
    pub schedule: ScaleSchedule,
    pub trials: usize,
    pub seed: u64,
    pub label: String,
    pub delta_min: f64,
    pub min_nodes: usize,
}

impl DecaySweep {
    pub fn new(a: Operator, b: Operator, schedule: ScaleSchedule) -> Self {
        Self {
            a,
            b,
            schedule,
            trials: 8,
            seed: 0,
            label: "decay-sweep".into(),
            delta_min: 0.1,
            min_nodes: MIN_NODES,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub lambda: f64,
    pub mu: f64,
    /// Median over trials of ‖T_λf·T̃_μg‖ / (‖f‖‖g‖).
    pub ratio: f64,
    pub spread: f64,
    pub trials: Vec<f64>,
    /// (n_t, n_x, n_ξ for f, n_ξ for g).
    pub nodes: [usize; 4],
}

/// Transversality of the pair over a 5-point-per-axis lattice of the
/// amplitude supports.
pub fn support_transversality(a: &Operator, b: &Operator) -> Result<TransversalityReport> {
    let axis = |s: &super::amplitude::Support| linspace(s.lo(), s.hi(), 5);
    let lat = Lattice::tensor(
        axis(&a.amp.t),
        &a.amp.x.iter().map(axis).collect::<Vec<_>>(),
        &a.amp.xi.iter().map(axis).collect::<Vec<_>>(),
        &b.amp.xi.iter().map(axis).collect::<Vec<_>>(),
    );
    transversality_margin(&a.phase, &b.phase, &lat)
}

fn normalized(u: &[Complex64], v: &[Complex64], grid: &SpaceTimeGrid, nf: f64, ng: f64) -> f64 {
    product_norm(u, v, grid) / (nf * ng)
}

/// Normalized bilinear norms over the schedule, median of seeded trials.
pub fn decay_sweep(cfg: &DecaySweep) -> Result<Vec<DecaySample>> {
    if cfg.trials == 0 {
        return Err(Error::Config("decay sweep needs at least one trial".into()));
    }
    let cells = cfg.schedule.cells();
    if cells.is_empty() {
        return Err(Error::Config("decay sweep needs at least one scale".into()));
    }
    for w in cells.windows(2) {
        if w[1].0 < w[0].0 || (w[1].0 == w[0].0 && w[1].1 < w[0].1) {
            return Err(Error::Config("scale lists must be ascending".into()));
        }
    }
    for &(l, m) in &cells {
        if !(l >= 1.0 && m >= 1.0) {
            return Err(Error::Config(format!("scales must be >= 1, got ({l}, {m})")));
        }
        if m > l {
            return Err(Error::ArgumentOrder { lambda: l, mu: m });
        }
    }
    let report = support_transversality(&cfg.a, &cfg.b)?;
    if report.margin < cfg.delta_min {
        return Err(Error::Precondition(format!(
            "transversality margin {:.4} below delta_min {}",
            report.margin, cfg.delta_min
        )));
    }
    let ba = cfg.a.bounds()?;
    let bb = cfg.b.bounds()?;

    // A fixed-λ schedule shares one grid so T_λf is computed once per trial.
    let shared = match &cfg.schedule {
        ScaleSchedule::Mu { lambda, mus } => {
            let mu_max = mus.iter().copied().fold(0.0, f64::max);
            Some(SpaceTimeGrid::resolved(&cfg.a.amp, &[(&ba, *lambda), (&bb, mu_max)], cfg.min_nodes)?)
        }
        ScaleSchedule::Lambda { .. } => None,
    };

    let per_trial: Vec<Result<Vec<(f64, [usize; 4])>>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = rng_from_seed(trial_seed(cfg.seed, &cfg.label, trial as u64));
            let pf = RandomProfile::draw(&cfg.a.amp.xi, &mut rng);
            let pg = RandomProfile::draw(&cfg.b.amp.xi, &mut rng);
            let mut cached: Option<(f64, Vec<Complex64>, f64, usize)> = None;
            let mut out = Vec::with_capacity(cells.len());
            for &(lambda, mu) in &cells {
                let a = cfg.a.with_lambda(lambda);
                let b = cfg.b.with_lambda(mu);
                let grid = match &shared {
                    Some(g) => g.clone(),
                    None => SpaceTimeGrid::resolved(&cfg.a.amp, &[(&ba, lambda), (&bb, mu)], cfg.min_nodes)?,
                };
                let (u, nf, nkf) = match &cached {
                    Some((l, u, nf, n)) if *l == lambda && shared.is_some() => (u.clone(), *nf, *n),
                    _ => {
                        let f = FrequencyProfile::from_fn(
                            FrequencyProfile::axes_for(&a.amp, &ba, lambda, cfg.min_nodes),
                            |xi| pf.eval(xi),
                        );
                        let u = eval_oscillatory(&a, &f, &grid)?;
                        let nf = f.norm();
                        let n = f.points.len();
                        if shared.is_some() {
                            cached = Some((lambda, u.clone(), nf, n));
                        }
                        (u, nf, n)
                    }
                };
                let g = FrequencyProfile::from_fn(FrequencyProfile::axes_for(&b.amp, &bb, mu, cfg.min_nodes), |xi| {
                    pg.eval(xi)
                });
                let v = eval_oscillatory(&b, &g, &grid)?;
                let r = normalized(&u, &v, &grid, nf, g.norm());
                out.push((r, [grid.n_t(), grid.n_x(), nkf, g.points.len()]));
            }
            Ok(out)
        })
        .collect();

    let mut trials = Vec::with_capacity(cfg.trials);
    for t in per_trial {
        trials.push(t?);
    }
    Ok(cells
        .iter()
        .enumerate()
        .map(|(c, &(lambda, mu))| {
            let vals: Vec<f64> = trials.iter().map(|t| t[c].0).collect();
            DecaySample {
                lambda,
                mu,
                ratio: median(&vals),
                spread: interquartile_range(&vals),
                trials: vals,
                nodes: trials[0][c].1,
            }
        })
        .collect())
}
