//! Power-law fits in log-log coordinates and verdicts against claimed rates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line through (ln s, ln y).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    /// Natural-log intercept: y ≈ exp(intercept) · s^exponent.
    pub intercept: f64,
    pub r_squared: f64,
    /// Samples sorted by abscissa.
    pub samples: Vec<(f64, f64)>,
    pub span_decades: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictStatus {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundVerdict {
    pub claimed: f64,
    pub fitted: f64,
    pub tolerance: f64,
    pub r_squared: f64,
    pub r_squared_floor: f64,
    pub span_decades: f64,
    pub status: VerdictStatus,
    /// max over samples of y / s^claimed.
    pub uniform_constant: f64,
}

impl BoundVerdict {
    pub fn passed(&self) -> bool {
        self.status == VerdictStatus::Pass
    }
}

/// Thresholds used by [`check_bound`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPolicy {
    pub tolerance: f64,
    pub r_squared_floor: f64,
    pub min_span_decades: f64,
}

impl Default for FitPolicy {
    fn default() -> Self {
        Self {
            tolerance: 0.1,
            r_squared_floor: 0.95,
            min_span_decades: 1.2,
        }
    }
}

impl FitPolicy {
    /// Exponent-0 checks: R² measures explained variance, which a flat
    /// sample table does not have, so the floor is dropped.
    pub fn boundedness() -> Self {
        Self {
            tolerance: 0.15,
            r_squared_floor: 0.0,
            ..Self::default()
        }
    }

    pub fn with_min_span(mut self, decades: f64) -> Self {
        self.min_span_decades = decades;
        self
    }
}

pub fn fit_power_law(samples: &[(f64, f64)]) -> Result<ScalingFit> {
    if samples.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 samples, got {}", samples.len())));
    }
    if let Some(&(s, y)) = samples
        .iter()
        .find(|&&(s, y)| !(s > 0.0 && y > 0.0 && s.is_finite() && y.is_finite()))
    {
        return Err(Error::Fit(format!("non-positive or non-finite sample ({s}, {y})")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let s_min = sorted[0].0;
    let s_max = sorted[sorted.len() - 1].0;
    if s_min == s_max {
        return Err(Error::Fit("need at least two distinct abscissae".into()));
    }

    let n = sorted.len() as f64;
    let lx: Vec<f64> = sorted.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = sorted.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let mut ss_res = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        let r = y - (intercept + exponent * x);
        ss_res += r * r;
    }
    // A constant ordinate is fitted perfectly by slope 0.
    let r_squared = if syy <= f64::EPSILON * f64::EPSILON * n {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(ScalingFit {
        exponent,
        intercept,
        r_squared,
        span_decades: (s_max / s_min).log10(),
        samples: sorted,
    })
}

pub fn check_bound(fit: &ScalingFit, claimed: f64, policy: &FitPolicy) -> BoundVerdict {
    let uniform_constant = fit
        .samples
        .iter()
        .map(|&(s, y)| y / s.powf(claimed))
        .fold(f64::NEG_INFINITY, f64::max);
    let status = if fit.span_decades + 1e-12 < policy.min_span_decades {
        VerdictStatus::Inconclusive
    } else if (fit.exponent - claimed).abs() <= policy.tolerance && fit.r_squared >= policy.r_squared_floor {
        VerdictStatus::Pass
    } else {
        VerdictStatus::Fail
    };
    BoundVerdict {
        claimed,
        fitted: fit.exponent,
        tolerance: policy.tolerance,
        r_squared: fit.r_squared,
        r_squared_floor: policy.r_squared_floor,
        span_decades: fit.span_decades,
        status,
        uniform_constant,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wide() -> FitPolicy {
        FitPolicy::default().with_min_span(0.0)
    }

    #[test]
    fn exact_square_law() {
        let f = fit_power_law(&[(2.0, 4.0), (4.0, 16.0), (8.0, 64.0)]).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-14);
        assert_eq!(f.r_squared, 1.0);
    }

    #[test]
    fn exact_inverse_sqrt_law_with_intercept() {
        let s: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&s: &f64| (s, 3.7 * s.powf(-0.5))).collect();
        let f = fit_power_law(&s).unwrap();
        assert!((f.exponent + 0.5).abs() < 1e-14);
        assert!((f.intercept - 3.7f64.ln()).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(fit_power_law(&[(2.0, 1.0), (2.0, 3.0), (2.0, 5.0)]).is_err());
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 3.0)]).is_err());
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, -3.0), (3.0, 1.0)]).is_err());
    }

    #[test]
    fn verdict_examples() {
        let near = ScalingFit {
            exponent: -0.52,
            intercept: 0.0,
            r_squared: 0.99,
            samples: vec![(1.0, 1.0), (100.0, 0.1)],
            span_decades: 2.0,
        };
        assert!(check_bound(&near, -0.5, &wide()).passed());
        let far = ScalingFit { exponent: -0.2, ..near };
        assert_eq!(check_bound(&far, -0.5, &wide()).status, VerdictStatus::Fail);
    }

    #[test]
    fn boundedness_uniform_constant() {
        let f = fit_power_law(&[(1.0, 1.1), (2.0, 1.3), (4.0, 1.2)]).unwrap();
        let v = check_bound(&f, 0.0, &FitPolicy::boundedness().with_min_span(0.0));
        assert!((v.uniform_constant - 1.3).abs() < 1e-15);
        assert!(v.passed());
        let strict = FitPolicy { r_squared_floor: 0.95, ..FitPolicy::boundedness().with_min_span(0.0) };
        assert_eq!(check_bound(&f, 0.0, &strict).status, VerdictStatus::Fail);
    }

    #[test]
    fn short_span_is_inconclusive() {
        let f = fit_power_law(&[(1.0, 1.0), (2.0, 0.7), (4.0, 0.5)]).unwrap();
        assert_eq!(check_bound(&f, -0.5, &FitPolicy::default()).status, VerdictStatus::Inconclusive);
    }
}
