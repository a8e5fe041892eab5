use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oscint::{Amplitude, Operator, ScaleSchedule, Support};
use crate::phasekit::{choose_alpha, EikonalOptions, Metric, PhaseFunction};
use crate::scalefit::FitPolicy;
use crate::toruslab::{Backend, Family};

/// Every experiment kind, in the order `list-kinds` prints them.
pub const KINDS: [&str; 10] = [
    "decay-sweep",
    "kernel-decay",
    "transversality",
    "torus-bilinear",
    "torus-rescaled",
    "torus-mixed",
    "torus-derivative",
    "linear-baseline",
    "sharpness",
    "parametrix",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub label: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub verdict: Tolerances,
    pub experiment: Experiment,
}

fn default_trials() -> usize {
    8
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub exponent: f64,
    pub boundedness: f64,
    pub r_squared_floor: f64,
    pub min_span_decades: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            exponent: 0.1,
            boundedness: 0.15,
            r_squared_floor: 0.95,
            min_span_decades: 1.2,
        }
    }
}

impl Tolerances {
    pub fn rate(&self) -> FitPolicy {
        FitPolicy {
            tolerance: self.exponent,
            r_squared_floor: self.r_squared_floor,
            min_span_decades: self.min_span_decades,
        }
    }

    /// A flat law has no variance for R² to explain, so only the slope is
    /// judged.
    pub fn bounded(&self) -> FitPolicy {
        FitPolicy {
            tolerance: self.boundedness,
            r_squared_floor: 0.0,
            min_span_decades: self.min_span_decades,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum PhaseSpec {
    Paraboloid,
    Hyperplane { velocity: Vec<f64> },
    Cone,
    Zero,
    /// WKB phase of the 1D metric g¹¹ = 1 + ε cos x on the given ξ window.
    Eikonal { epsilon: f64, xi: [f64; 2] },
}

impl PhaseSpec {
    pub fn build(&self, dim: usize) -> Result<PhaseFunction> {
        Ok(match self {
            PhaseSpec::Paraboloid => PhaseFunction::paraboloid(dim),
            PhaseSpec::Hyperplane { velocity } => {
                if velocity.len() != dim {
                    return Err(Error::Config(format!(
                        "hyperplane velocity has {} components, expected {dim}",
                        velocity.len()
                    )));
                }
                PhaseFunction::hyperplane(velocity.clone())
            }
            PhaseSpec::Cone => PhaseFunction::cone(dim),
            PhaseSpec::Zero => PhaseFunction::zero(dim),
            PhaseSpec::Eikonal { epsilon, xi } => {
                if dim != 1 {
                    return Err(Error::Unsupported("eikonal phases are one-dimensional".into()));
                }
                let table = choose_alpha(&Metric::cosine_1d(*epsilon), (xi[0], xi[1]), &EikonalOptions::default())?;
                PhaseFunction::eikonal(Arc::new(table))
            }
        })
    }
}

/// Phase and amplitude support of one operator; supports are [center, radius].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub phase: PhaseSpec,
    pub t: [f64; 2],
    pub x: Vec<[f64; 2]>,
    pub xi: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annulus: Option<[f64; 2]>,
}

impl OperatorSpec {
    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn amplitude(&self) -> Amplitude {
        let s = |v: &[f64; 2]| Support::new(v[0], v[1]);
        let a = Amplitude::new(s(&self.t), self.x.iter().map(s).collect(), self.xi.iter().map(s).collect());
        match self.annulus {
            Some([r0, r1]) => a.with_annulus(r0, r1),
            None => a,
        }
    }

    pub fn operator(&self, lambda: f64) -> Result<Operator> {
        Ok(Operator::new(self.phase.build(self.dim())?, self.amplitude(), lambda))
    }

    fn validate(&self, what: &str) -> Result<()> {
        let d = self.dim();
        if d == 0 || d > 2 {
            return Err(Error::Config(format!("{what}: dimension must be 1 or 2, got {d}")));
        }
        if self.xi.len() != d {
            return Err(Error::Config(format!("{what}: xi has {} supports, x has {d}", self.xi.len())));
        }
        let all = std::iter::once(&self.t).chain(&self.x).chain(&self.xi);
        for s in all {
            if !(s[1] > 0.0 && s[0].is_finite() && s[1].is_finite()) {
                return Err(Error::Config(format!("{what}: support radius must be positive, got {s:?}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule", deny_unknown_fields)]
pub enum TimeRule {
    /// T = alpha / N₁.
    InverseN1 { alpha: f64 },
    Fixed { value: f64 },
}

impl TimeRule {
    pub fn time(&self, n1: f64) -> f64 {
        match *self {
            TimeRule::InverseN1 { alpha } => alpha / n1,
            TimeRule::Fixed { value } => value,
        }
    }

    /// Whether the window sits inside the semiclassical range T ≲ 1/N₁.
    pub fn semiclassical(&self) -> bool {
        matches!(*self, TimeRule::InverseN1 { alpha } if alpha <= 1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct N1Sweep {
    pub n1: Vec<f64>,
    pub n2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct N2Sweep {
    pub n2: Vec<f64>,
    pub n1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusSpec {
    pub dim: usize,
    #[serde(default = "one")]
    pub lambda_scale: f64,
    pub time: TimeRule,
    #[serde(default = "gaussian_pair")]
    pub families: [Family; 2],
    #[serde(default)]
    pub backend: Backend,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n1_sweep: Option<N1Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2_sweep: Option<N2Sweep>,
}

fn one() -> f64 {
    1.0
}

fn gaussian_pair() -> [Family; 2] {
    [Family::Gaussian; 2]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "branch", deny_unknown_fields)]
pub enum RescaledRegime {
    /// λ_scale ≲ N₁: sweep λ_scale at fixed N₁.
    Small { n1: f64, lambda_scales: Vec<f64> },
    /// λ_scale = factor·N₁ ≫ N₁: sweep N₁.
    Large { n1: Vec<f64>, factor: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum Experiment {
    DecaySweep {
        a: OperatorSpec,
        b: OperatorSpec,
        schedule: ScaleSchedule,
        #[serde(default = "default_delta")]
        delta_min: f64,
        #[serde(default = "default_min_nodes")]
        min_nodes: usize,
    },
    KernelDecay {
        a: OperatorSpec,
        b: OperatorSpec,
        lambda: f64,
        mu: f64,
        #[serde(default)]
        xi2_frozen: Vec<f64>,
        #[serde(default = "default_ray_samples")]
        samples: usize,
        #[serde(default = "default_min_nodes")]
        min_nodes: usize,
    },
    Transversality {
        a: OperatorSpec,
        b: OperatorSpec,
        #[serde(default = "default_delta")]
        delta_min: f64,
        /// Decay sweep to run when the hypothesis holds.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        schedule: Option<ScaleSchedule>,
    },
    TorusBilinear(TorusSpec),
    TorusRescaled {
        dim: usize,
        n2: f64,
        #[serde(default = "gaussian_pair")]
        families: [Family; 2],
        regime: RescaledRegime,
    },
    TorusMixed {
        torus: TorusSpec,
        signs: Vec<i8>,
    },
    TorusDerivative {
        torus: TorusSpec,
        orders: [u32; 2],
    },
    LinearBaseline {
        dim: usize,
        n: Vec<f64>,
        #[serde(default = "focused")]
        family: Family,
        #[serde(default = "one")]
        lambda_scale: f64,
    },
    Sharpness {
        dim: usize,
        n1: Vec<f64>,
        #[serde(default = "default_sharp_factor")]
        factor: f64,
    },
    Parametrix {
        epsilon: f64,
        #[serde(default = "default_points")]
        points: usize,
        s: f64,
        n: Vec<usize>,
        #[serde(default = "default_min_slope")]
        min_slope: f64,
        #[serde(default = "default_flat_tol")]
        flat_tolerance: f64,
    },
}

fn default_delta() -> f64 {
    0.1
}
fn default_min_nodes() -> usize {
    crate::oscint::MIN_NODES
}
fn default_ray_samples() -> usize {
    24
}
fn focused() -> Family {
    Family::Focused
}
fn default_sharp_factor() -> f64 {
    1.5
}
fn default_points() -> usize {
    1024
}
fn default_min_slope() -> f64 {
    0.8
}
fn default_flat_tol() -> f64 {
    1e-4
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::DecaySweep { .. } => KINDS[0],
            Experiment::KernelDecay { .. } => KINDS[1],
            Experiment::Transversality { .. } => KINDS[2],
            Experiment::TorusBilinear(_) => KINDS[3],
            Experiment::TorusRescaled { .. } => KINDS[4],
            Experiment::TorusMixed { .. } => KINDS[5],
            Experiment::TorusDerivative { .. } => KINDS[6],
            Experiment::LinearBaseline { .. } => KINDS[7],
            Experiment::Sharpness { .. } => KINDS[8],
            Experiment::Parametrix { .. } => KINDS[9],
        }
    }
}

fn nonempty<T>(v: &[T], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Config(format!("{what} must not be empty")));
    }
    Ok(())
}

fn positive(v: &[f64], what: &str) -> Result<()> {
    nonempty(v, what)?;
    if let Some(x) = v.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(Error::Config(format!("{what} must be positive, got {x}")));
    }
    Ok(())
}

fn torus_dim(d: usize) -> Result<()> {
    if d == 1 || d == 2 {
        Ok(())
    } else {
        Err(Error::Config(format!("torus dimension must be 1 or 2, got {d}")))
    }
}

fn schedule_ok(s: &ScaleSchedule) -> Result<()> {
    match s {
        ScaleSchedule::Lambda { lambdas, .. } => positive(lambdas, "schedule.lambdas"),
        ScaleSchedule::Mu { lambda, mus } => {
            positive(mus, "schedule.mus")?;
            positive(&[*lambda], "schedule.lambda")
        }
    }
}

impl TorusSpec {
    fn validate(&self) -> Result<()> {
        torus_dim(self.dim)?;
        positive(&[self.lambda_scale], "lambda_scale")?;
        match self.time {
            TimeRule::InverseN1 { alpha } => positive(&[alpha], "time.alpha")?,
            TimeRule::Fixed { value } => positive(&[value], "time.value")?,
        }
        if self.n1_sweep.is_none() && self.n2_sweep.is_none() {
            return Err(Error::Config("torus experiments need n1_sweep or n2_sweep".into()));
        }
        if let Some(s) = &self.n1_sweep {
            positive(&s.n1, "n1_sweep.n1")?;
            positive(&[s.n2], "n1_sweep.n2")?;
        }
        if let Some(s) = &self.n2_sweep {
            positive(&s.n2, "n2_sweep.n2")?;
            positive(&[s.n1], "n2_sweep.n1")?;
        }
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.label.is_empty() || !self.label.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(Error::Config(format!(
                "label must be nonempty and use only letters, digits, '-' and '_', got {:?}",
                self.label
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let t = &self.verdict;
        if !(t.exponent > 0.0 && t.boundedness > 0.0 && (0.0..=1.0).contains(&t.r_squared_floor) && t.min_span_decades >= 0.0)
        {
            return Err(Error::Config("verdict tolerances out of range".into()));
        }
        match &self.experiment {
            Experiment::DecaySweep { a, b, schedule, .. } => {
                a.validate("a")?;
                b.validate("b")?;
                schedule_ok(schedule)
            }
            Experiment::KernelDecay {
                a,
                b,
                lambda,
                mu,
                samples,
                ..
            } => {
                a.validate("a")?;
                b.validate("b")?;
                positive(&[*lambda, *mu], "lambda and mu")?;
                if *samples < 6 {
                    return Err(Error::Config("kernel rays need at least 6 samples".into()));
                }
                Ok(())
            }
            Experiment::Transversality { a, b, schedule, .. } => {
                a.validate("a")?;
                b.validate("b")?;
                schedule.as_ref().map_or(Ok(()), schedule_ok)
            }
            Experiment::TorusBilinear(s) => s.validate(),
            Experiment::TorusRescaled { dim, n2, regime, .. } => {
                torus_dim(*dim)?;
                positive(&[*n2], "n2")?;
                match regime {
                    RescaledRegime::Small { n1, lambda_scales } => {
                        positive(&[*n1], "regime.n1")?;
                        positive(lambda_scales, "regime.lambda_scales")
                    }
                    RescaledRegime::Large { n1, factor } => {
                        positive(n1, "regime.n1")?;
                        positive(&[*factor], "regime.factor")
                    }
                }
            }
            Experiment::TorusMixed { torus, signs } => {
                torus.validate()?;
                nonempty(signs, "signs")?;
                if signs.iter().any(|s| *s != 1 && *s != -1) {
                    return Err(Error::Config("signs must be +1 or -1".into()));
                }
                Ok(())
            }
            Experiment::TorusDerivative { torus, .. } => torus.validate(),
            Experiment::LinearBaseline { dim, n, lambda_scale, .. } => {
                torus_dim(*dim)?;
                positive(n, "n")?;
                positive(&[*lambda_scale], "lambda_scale")
            }
            Experiment::Sharpness { dim, n1, factor } => {
                if *dim == 0 {
                    return Err(Error::Config("dimension must be positive".into()));
                }
                positive(n1, "n1")?;
                if !(*factor > 1.0) {
                    return Err(Error::Config("factor must exceed 1".into()));
                }
                Ok(())
            }
            Experiment::Parametrix { points, s, n, .. } => {
                nonempty(n, "n")?;
                if *points < 8 {
                    return Err(Error::Config("points must be at least 8".into()));
                }
                if !(*s >= 0.0) {
                    return Err(Error::Config("s must be nonnegative".into()));
                }
                Ok(())
            }
        }
    }
}
