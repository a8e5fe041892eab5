//! Experiment configs, the runner that turns a config into samples, fits
//! and verdicts, and the record and report files.

pub mod config;
pub mod record;
pub mod report;
pub mod run;

pub use config::{Experiment, ExperimentConfig, OperatorSpec, PhaseSpec, TimeRule, Tolerances, TorusSpec, KINDS};
pub use record::{Check, CellError, FitRecord, Outcome, ResultRecord, RunMeta, Table, Verdict, SCHEMA_VERSION};
pub use report::{emit_report, parse_formats, persist_record, ReportFormat};
pub use run::{run_experiment, RunOptions, DEFAULT_CAP_GRID};
