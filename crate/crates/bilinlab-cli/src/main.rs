use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use bilinlab_core::harness::{
    emit_report, parse_formats, persist_record, run_experiment, ExperimentConfig, ResultRecord, RunOptions,
    DEFAULT_CAP_GRID, KINDS,
};
use clap::{Args, Parser, Subcommand};

/// Numerical checks of bilinear oscillatory integral and torus Strichartz bounds.
#[derive(Parser, Debug)]
#[command(name = "bilinlab", version)]
struct Cli {
    /// Worker threads for the sweeps (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment config, store its record and write reports.
    Run(RunArgs),
    /// Re-emit reports from a stored record.
    Report(ReportArgs),
    /// Print the experiment kinds a config may use.
    ListKinds,
    /// Parse and check configs without running them.
    Validate {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Directory for records and reports; falls back to the config's
    /// `output_dir`, then `results`.
    #[arg(long, env = "BILINLAB_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
    /// Comma-separated subset of csv, json, plot.
    #[arg(long, default_value = "csv,json,plot")]
    formats: String,
}

#[derive(Args, Debug)]
struct RunArgs {
    config: PathBuf,
    #[command(flatten)]
    out: OutputArgs,
    /// Replace the config's base seed.
    #[arg(long)]
    seed_override: Option<u64>,
    /// Largest grid size allowed along any axis.
    #[arg(long, default_value_t = DEFAULT_CAP_GRID)]
    cap_grid: usize,
}

#[derive(Args, Debug)]
struct ReportArgs {
    record: PathBuf,
    #[command(flatten)]
    out: OutputArgs,
}

const EXIT_USAGE: u8 = 2;

fn output_dir(flag: Option<&Path>, config: Option<&Path>) -> PathBuf {
    flag.or(config).map_or_else(|| PathBuf::from("results"), Path::to_path_buf)
}

fn print_verdicts(rec: &ResultRecord) {
    for v in &rec.verdicts {
        let status = format!("{:?}", v.status).to_uppercase();
        match &v.note {
            Some(n) => println!("{status:<12} {:<24} {} ({n})", v.name, v.claim),
            None => println!("{status:<12} {:<24} {}", v.name, v.claim),
        }
    }
    for e in &rec.errors {
        println!("{:<12} {:<24} {}", "ERROR", e.cell, e.message);
    }
    println!("outcome: {:?}", rec.outcome());
}

fn run(args: &RunArgs) -> Result<u8, (u8, anyhow::Error)> {
    let usage = |e: anyhow::Error| (EXIT_USAGE, e);
    let formats = parse_formats(&args.out.formats).map_err(|e| usage(e.into()))?;
    let cfg = ExperimentConfig::load(&args.config)
        .with_context(|| format!("loading {}", args.config.display()))
        .map_err(usage)?;
    let opts = RunOptions {
        cap_grid: args.cap_grid,
        seed_override: args.seed_override,
    };
    let rec = run_experiment(&cfg, &opts)
        .with_context(|| format!("preflight for {}", cfg.label))
        .map_err(usage)?;
    let dir = output_dir(args.out.output_dir.as_deref(), cfg.output_dir.as_deref());
    let saved = persist_record(&rec, &dir).context("writing record").map_err(|e| (1, e))?;
    let files = emit_report(&rec, &dir, &formats).context("writing reports").map_err(|e| (1, e))?;
    print_verdicts(&rec);
    println!("record: {}", saved.display());
    for f in files {
        println!("report: {}", f.display());
    }
    Ok(rec.outcome().exit_code() as u8)
}

fn report(args: &ReportArgs) -> Result<u8, (u8, anyhow::Error)> {
    let usage = |e: anyhow::Error| (EXIT_USAGE, e);
    let formats = parse_formats(&args.out.formats).map_err(|e| usage(e.into()))?;
    let rec = ResultRecord::load(&args.record)
        .with_context(|| format!("loading {}", args.record.display()))
        .map_err(usage)?;
    let default_dir = args.record.parent().map(Path::to_path_buf);
    let dir = output_dir(
        args.out.output_dir.as_deref(),
        rec.config.output_dir.as_deref().or(default_dir.as_deref()),
    );
    for f in emit_report(&rec, &dir, &formats).context("writing reports").map_err(|e| (1, e))? {
        println!("{}", f.display());
    }
    Ok(0)
}

fn validate(paths: &[PathBuf]) -> Result<u8, (u8, anyhow::Error)> {
    let mut bad = 0;
    for p in paths {
        match ExperimentConfig::load(p) {
            Ok(cfg) => println!("ok      {} ({})", p.display(), cfg.experiment.kind()),
            Err(e) => {
                println!("invalid {}: {e}", p.display());
                bad += 1;
            }
        }
    }
    Ok(if bad == 0 { 0 } else { EXIT_USAGE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} workers: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Report(a) => report(a),
        Command::ListKinds => {
            for k in KINDS {
                println!("{k}");
            }
            Ok(0)
        }
        Command::Validate { configs } => validate(configs),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err((code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
