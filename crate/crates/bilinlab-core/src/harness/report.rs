use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use super::record::{Check, FitRecord, Outcome, ResultRecord, Table, Verdict, SCHEMA_VERSION};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReportFormat {
    Csv,
    Json,
    Plot,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [ReportFormat::Csv, ReportFormat::Json, ReportFormat::Plot];
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "plot" => Ok(Self::Plot),
            other => Err(Error::Config(format!("unknown report format `{other}` (csv, json, plot)"))),
        }
    }
}

/// Parses a comma-separated format list such as `csv,json`.
pub fn parse_formats(list: &str) -> Result<Vec<ReportFormat>> {
    let mut out: Vec<ReportFormat> = list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(Error::Config("no report formats given".into()));
    }
    Ok(out)
}

/// Writes the record under `dir` without touching earlier records: the first
/// run of a label gets `<label>.record.json`, later ones a numbered suffix.
pub fn persist_record(record: &ResultRecord, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let label = &record.config.label;
    let mut path = dir.join(format!("{label}.record.json"));
    let mut i = 1;
    while path.exists() {
        path = dir.join(format!("{label}.record.{i}.json"));
        i += 1;
    }
    record.save(&path)?;
    Ok(path)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Serde(e.to_string())
}

fn table_csv(table: &Table) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["schema_version".to_string()];
    header.extend(table.columns.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for row in &table.rows {
        let mut rec = vec![SCHEMA_VERSION.to_string()];
        rec.extend(row.iter().map(|v| format!("{v:e}")));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Serde(e.to_string()))
}

#[derive(Serialize)]
struct FitSummary<'a> {
    name: &'a str,
    table: &'a str,
    x: &'a str,
    y: &'a str,
    exponent: f64,
    intercept: f64,
    r_squared: f64,
    span_decades: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    schema_version: u32,
    tool_version: &'a str,
    label: &'a str,
    kind: &'a str,
    seed: u64,
    trials: usize,
    outcome: Outcome,
    verdicts: &'a [Verdict],
    fits: Vec<FitSummary<'a>>,
    errors: &'a [super::record::CellError],
    tables: Vec<&'a str>,
}

fn summary_json(rec: &ResultRecord) -> Result<String> {
    let s = Summary {
        schema_version: SCHEMA_VERSION,
        tool_version: &rec.tool_version,
        label: &rec.config.label,
        kind: &rec.kind,
        seed: rec.config.seed,
        trials: rec.config.trials,
        outcome: rec.outcome(),
        verdicts: &rec.verdicts,
        fits: rec
            .fits
            .iter()
            .map(|f: &FitRecord| FitSummary {
                name: &f.name,
                table: &f.table,
                x: &f.x,
                y: &f.y,
                exponent: f.fit.exponent,
                intercept: f.fit.intercept,
                r_squared: f.fit.r_squared,
                span_decades: f.fit.span_decades,
            })
            .collect(),
        errors: &rec.errors,
        tables: rec.tables.iter().map(|t| t.name.as_str()).collect(),
    };
    serde_json::to_string_pretty(&s)
        .map(|t| t + "\n")
        .map_err(|e| Error::Serde(e.to_string()))
}

fn claimed_slope(rec: &ResultRecord, fit: &FitRecord) -> Option<f64> {
    rec.verdicts.iter().find(|v| v.name == fit.name).and_then(|v| match &v.check {
        Check::Exponent { bound, .. } => Some(bound.claimed),
        Check::AtMost { limit, .. } | Check::AtLeast { limit, .. } => Some(*limit),
        Check::Error { .. } => None,
    })
}

fn py_str(s: &str) -> String {
    serde_json::to_string(s).unwrap_or_else(|_| "\"\"".into())
}

/// A matplotlib script with one log-log panel per fit, drawing the samples,
/// the fitted line and a guide line at the claimed slope.
fn plot_script(rec: &ResultRecord) -> String {
    let label = &rec.config.label;
    let mut s = String::new();
    let _ = writeln!(s, "import csv\nimport math\nimport os\n");
    let _ = writeln!(s, "import matplotlib\n\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n");
    let _ = writeln!(s, "HERE = os.path.dirname(os.path.abspath(__file__))");
    let _ = writeln!(s, "LABEL = {}\n", py_str(label));
    let _ = writeln!(s, "# name, table, x column, y column, fitted exponent, intercept, claimed slope");
    let _ = writeln!(s, "PANELS = [");
    for f in &rec.fits {
        let claimed = claimed_slope(rec, f).map_or("None".to_string(), |c| format!("{c:e}"));
        let _ = writeln!(
            s,
            "    ({}, {}, {}, {}, {:e}, {:e}, {}),",
            py_str(&f.name),
            py_str(&f.table),
            py_str(&f.x),
            py_str(&f.y),
            f.fit.exponent,
            f.fit.intercept,
            claimed
        );
    }
    let _ = writeln!(s, "]\n");
    s.push_str(
        r#"

def column(table, name):
    with open(os.path.join(HERE, f"{LABEL}.{table}.csv"), newline="") as fh:
        return [float(row[name]) for row in csv.DictReader(fh)]


def main():
    if not PANELS:
        return
    fig, axes = plt.subplots(1, len(PANELS), figsize=(4.5 * len(PANELS), 4), squeeze=False)
    for ax, (name, table, xc, yc, slope, icept, claimed) in zip(axes[0], PANELS):
        xs, ys = column(table, xc), column(table, yc)
        ax.loglog(xs, ys, "o", label="samples")
        lo, hi = min(xs), max(xs)
        grid = [lo * (hi / lo) ** (i / 50) for i in range(51)]
        ax.loglog(grid, [math.exp(icept) * g**slope for g in grid], "-", label=f"fit {slope:+.3f}")
        if claimed is not None:
            anchor = ys[0] / xs[0] ** claimed
            ax.loglog(grid, [anchor * g**claimed for g in grid], "--", label=f"claimed {claimed:+.3f}")
        ax.set_xlabel(xc)
        ax.set_ylabel(yc)
        ax.set_title(name)
        ax.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, f"{LABEL}.png"), dpi=120)


if __name__ == "__main__":
    main()
"#,
    );
    s
}

fn write(path: PathBuf, bytes: &[u8], out: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::write(&path, bytes)?;
    out.push(path);
    Ok(())
}

/// Emits the requested report files for a record into `dir` and returns
/// their paths. Output depends only on the record, so re-emitting the same
/// record produces byte-identical files.
pub fn emit_report(record: &ResultRecord, dir: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let label = &record.config.label;
    let mut out = Vec::new();
    for f in formats {
        match f {
            ReportFormat::Csv => {
                for t in &record.tables {
                    write(dir.join(format!("{label}.{}.csv", t.name)), &table_csv(t)?, &mut out)?;
                }
            }
            ReportFormat::Json => {
                write(dir.join(format!("{label}.summary.json")), summary_json(record)?.as_bytes(), &mut out)?
            }
            ReportFormat::Plot => write(dir.join(format!("{label}.plot.py")), plot_script(record).as_bytes(), &mut out)?,
        }
    }
    Ok(out)
}
