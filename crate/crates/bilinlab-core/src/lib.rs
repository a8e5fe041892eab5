//! Numerical laboratory for bilinear oscillatory integrals and bilinear
//! Strichartz estimates on tori.

pub mod error;
pub mod harness;
pub mod numerics;
pub mod oscint;
pub mod phasekit;
pub mod scalefit;
pub mod toruslab;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use harness::{run_experiment, ExperimentConfig, Outcome, ResultRecord, RunOptions};
pub use phasekit::{EikonalPhase, Metric, PhaseFunction, TransversalityReport};
pub use scalefit::{check_bound, fit_power_law, BoundVerdict, FitPolicy, ScalingFit, VerdictStatus};
pub use toruslab::{DyadicBand, FourierMultiplier, RatioSample, TorusField};
