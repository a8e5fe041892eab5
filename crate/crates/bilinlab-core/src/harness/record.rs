use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::scalefit::{BoundVerdict, ScalingFit, VerdictStatus};

/// Version of the record layout and of every CSV table.
pub const SCHEMA_VERSION: u32 = 1;

/// A numeric sample table; each becomes one CSV file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// (x, y) pairs of two columns.
    pub fn pairs(&self, x: &str, y: &str) -> Result<Vec<(f64, f64)>> {
        let xs = self
            .column(x)
            .ok_or_else(|| Error::Config(format!("table {} has no column {x}", self.name)))?;
        let ys = self
            .column(y)
            .ok_or_else(|| Error::Config(format!("table {} has no column {y}", self.name)))?;
        Ok(xs.into_iter().zip(ys).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub name: String,
    pub table: String,
    pub x: String,
    pub y: String,
    pub fit: ScalingFit,
}

/// How a verdict was decided.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "test")]
pub enum Check {
    /// Fitted exponent against a claimed one.
    Exponent { fit: String, bound: BoundVerdict },
    /// measured ≤ limit.
    AtMost { measured: f64, limit: f64 },
    /// measured ≥ limit.
    AtLeast { measured: f64, limit: f64 },
    /// A module error stopped the measurement.
    Error { cell: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub claim: String,
    pub status: VerdictStatus,
    pub check: Check,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    pub fn exponent(name: &str, claim: &str, fit: &str, bound: BoundVerdict) -> Self {
        Self {
            name: name.into(),
            claim: claim.into(),
            status: bound.status,
            check: Check::Exponent { fit: fit.into(), bound },
            note: None,
        }
    }

    pub fn at_most(name: &str, claim: &str, measured: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            claim: claim.into(),
            status: if measured <= limit {
                VerdictStatus::Pass
            } else {
                VerdictStatus::Fail
            },
            check: Check::AtMost { measured, limit },
            note: None,
        }
    }

    pub fn at_least(name: &str, claim: &str, measured: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            claim: claim.into(),
            status: if measured >= limit {
                VerdictStatus::Pass
            } else {
                VerdictStatus::Fail
            },
            check: Check::AtLeast { measured, limit },
            note: None,
        }
    }

    pub fn failed(name: &str, claim: &str, cell: &str, note: &str) -> Self {
        Self {
            name: name.into(),
            claim: claim.into(),
            status: VerdictStatus::Fail,
            check: Check::Error { cell: cell.into() },
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub cell: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub wall_seconds: f64,
    pub workers: usize,
    /// Grid sizes and similar resolution facts, by cell.
    pub resolution: BTreeMap<String, String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::Inconclusive => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub tool_version: String,
    pub kind: String,
    pub config: ExperimentConfig,
    /// Raw per-cell samples including every trial value.
    pub samples: BTreeMap<String, serde_json::Value>,
    pub tables: Vec<Table>,
    pub fits: Vec<FitRecord>,
    pub verdicts: Vec<Verdict>,
    pub errors: Vec<CellError>,
    pub meta: RunMeta,
}

impl ResultRecord {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            kind: config.experiment.kind().into(),
            config: config.clone(),
            samples: BTreeMap::new(),
            tables: Vec::new(),
            fits: Vec::new(),
            verdicts: Vec::new(),
            errors: Vec::new(),
            meta: RunMeta {
                wall_seconds: 0.0,
                workers: 1,
                resolution: BTreeMap::new(),
            },
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Fail if any verdict failed or any cell errored; otherwise
    /// inconclusive if any verdict was; otherwise pass.
    pub fn outcome(&self) -> Outcome {
        if !self.errors.is_empty() || self.verdicts.iter().any(|v| v.status == VerdictStatus::Fail) {
            Outcome::Fail
        } else if self.verdicts.iter().any(|v| v.status == VerdictStatus::Inconclusive) {
            Outcome::Inconclusive
        } else {
            Outcome::Pass
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: Self = serde_json::from_str(text).map_err(|e| Error::Serde(e.to_string()))?;
        if rec.schema_version != SCHEMA_VERSION {
            return Err(Error::Serde(format!(
                "record schema version {} is not supported (expected {SCHEMA_VERSION})",
                rec.schema_version
            )));
        }
        Ok(rec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}
