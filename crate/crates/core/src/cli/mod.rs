//! Command-line front end: argument parsing, the five subcommands and their
//! CSV/JSON output.

pub mod format;
pub mod verify;

use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::estimators::{
    baseline_estimate, mc_expected_l2_sq_for, qmc_expected_l2_sq, random_baseline, ratio_to_random,
    vertical_baseline, DEFAULT_NODE_COUNT,
};
use crate::exactform::{asymptotic_expected_l2_sq, exact_expected_l2_sq};
use crate::lowdisc::{halton, HaltonConfig};
use crate::partition::Stratification;

use format::{fmt_sig12, round_sig12};
use verify::{run_verify, VerifyOptions, VerifyReport};

/// Written in place of a value the exact method cannot provide (odd `N`).
pub const ODD_N_MARKER: &str = "unsupported:odd-n";

pub const DEFAULT_TABLE_N: [usize; 14] = [4, 6, 8, 10, 12, 14, 16, 32, 48, 64, 80, 96, 112, 128];
pub const DEFAULT_RATIO_N: [usize; 11] = [4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096];
pub const DEFAULT_REPLICATES: usize = 10_000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Expected discrepancy by every method, one row per N
    Table,
    /// Ratio of the i.i.d. baseline to the exact value
    Ratio,
    /// Draw one stratified sample
    Sample,
    /// Monte Carlo estimate over independent samples
    Mc,
    /// Run the numerical checks; exit status 3 if any fails
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionKind {
    Diagonal,
    Vertical,
    Jittered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "stratdisc",
    version,
    about = "Expected L2-discrepancy of diagonal stratified sampling"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Comma-separated list of point counts
    #[arg(long, global = true, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Halton nodes for the QMC estimate
    #[arg(long, global = true, default_value_t = DEFAULT_NODE_COUNT)]
    pub m_nodes: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_REPLICATES)]
    pub replicates: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = PartitionKind::Diagonal)]
    pub partition: PartitionKind,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Write to this file instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub n: Vec<usize>,
    pub m_nodes: usize,
    pub replicates: usize,
    pub seed: u64,
    pub partition: PartitionKind,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
    pub inject_fault: bool,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let n = match (cli.n, cli.command) {
            (Some(n), _) => n,
            (None, Command::Table) => DEFAULT_TABLE_N.to_vec(),
            (None, Command::Ratio) => DEFAULT_RATIO_N.to_vec(),
            (None, Command::Sample) => vec![16],
            (None, Command::Mc) => vec![4],
            (None, Command::Verify) => VerifyOptions::default().ns,
        };
        let config = Self {
            command: cli.command,
            n,
            m_nodes: cli.m_nodes,
            replicates: cli.replicates,
            seed: cli.seed,
            partition: cli.partition,
            format: cli.format,
            output: cli.out,
            inject_fault: cli.inject_fault,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), Error> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n.is_empty() {
            return bad("--n needs at least one value".into());
        }
        if let Some(&n) = self.n.iter().find(|&&n| n < 2) {
            return bad(format!("point counts must be >= 2, got {n}"));
        }
        if self.m_nodes == 0 {
            return bad("--m-nodes must be >= 1".into());
        }
        if self.command == Command::Mc && self.replicates < 2 {
            return bad(format!(
                "--replicates must be >= 2, got {}",
                self.replicates
            ));
        }
        if self.command == Command::Sample && self.n.len() != 1 {
            return bad("sample takes a single --n value".into());
        }
        Ok(())
    }
}

/// Runs the command and writes its output. Returns `false` only when
/// `verify` found a failing check.
pub fn execute(config: &RunConfig) -> Result<bool, CliError> {
    let mut buf = Vec::new();
    let ok = render(config, &mut buf)?;
    match &config.output {
        Some(path) => std::fs::write(path, &buf)?,
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(ok)
}

/// Like [`execute`] but into an arbitrary writer.
pub fn render(config: &RunConfig, out: &mut impl Write) -> Result<bool, CliError> {
    match config.command {
        Command::Table => cmd_table(config, out).map(|_| true),
        Command::Ratio => cmd_ratio(config, out).map(|_| true),
        Command::Sample => cmd_sample(config, out).map(|_| true),
        Command::Mc => cmd_mc(config, out).map(|_| true),
        Command::Verify => cmd_verify(config, out),
    }
}

fn num(v: f64) -> Value {
    json!(round_sig12(v))
}

fn write_json(out: &mut impl Write, value: &Value) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// `Ok(value)` for even `n`, `Err(marker)` for odd `n`.
fn exact_or_marker(n: usize) -> Result<Result<f64, &'static str>, Error> {
    match exact_expected_l2_sq(n) {
        Ok(e) => Ok(Ok(e.value)),
        Err(Error::Unsupported(_)) => Ok(Err(ODD_N_MARKER)),
        Err(e) => Err(e),
    }
}

fn note_odd(ns: &[usize]) {
    if ns.iter().any(|n| n % 2 == 1) {
        eprintln!("note: the exact closed form covers even N only; odd N is expected to match the even-N asymptotics");
    }
}

fn cmd_table(config: &RunConfig, out: &mut impl Write) -> Result<(), CliError> {
    note_odd(&config.n);
    let nodes = halton(&HaltonConfig::standard(config.m_nodes)?);
    let mut rows = Vec::new();
    for &n in &config.n {
        rows.push((
            n,
            exact_or_marker(n)?,
            qmc_expected_l2_sq(n, &nodes)?.value,
            asymptotic_expected_l2_sq(n)?,
            random_baseline(n)?,
            vertical_baseline(n)?,
        ));
    }
    match config.format {
        OutputFormat::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["n", "exact", "qmc", "asymptotic", "random", "vertical"])?;
            for (n, exact, qmc, asym, random, vertical) in rows {
                let exact = exact.map_or_else(str::to_string, fmt_sig12);
                w.write_record([
                    n.to_string(),
                    exact,
                    fmt_sig12(qmc),
                    fmt_sig12(asym),
                    fmt_sig12(random),
                    fmt_sig12(vertical),
                ])?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = rows
                .into_iter()
                .map(|(n, exact, qmc, asym, random, vertical)| {
                    json!({
                        "n": n,
                        "exact": exact.map_or(Value::Null, num),
                        "exact_error": exact.err(),
                        "qmc": num(qmc),
                        "asymptotic": num(asym),
                        "random": num(random),
                        "vertical": num(vertical),
                    })
                })
                .collect();
            write_json(out, &json!({ "m_nodes": config.m_nodes, "rows": rows }))?;
        }
    }
    Ok(())
}

fn cmd_ratio(config: &RunConfig, out: &mut impl Write) -> Result<(), CliError> {
    note_odd(&config.n);
    let mut rows = Vec::new();
    for &n in &config.n {
        let ratio = match exact_expected_l2_sq(n) {
            Ok(est) => Ok(ratio_to_random(n, &est)?),
            Err(Error::Unsupported(_)) => Err(ODD_N_MARKER),
            Err(e) => return Err(e.into()),
        };
        rows.push((n, ratio));
    }
    match config.format {
        OutputFormat::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["n", "ratio"])?;
            for (n, ratio) in rows {
                w.write_record([n.to_string(), ratio.map_or_else(str::to_string, fmt_sig12)])?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = rows
                .into_iter()
                .map(|(n, r)| json!({ "n": n, "ratio": r.map_or(Value::Null, num), "ratio_error": r.err() }))
                .collect();
            write_json(out, &json!({ "rows": rows }))?;
        }
    }
    Ok(())
}

fn stratification(kind: PartitionKind, n: usize) -> Result<Stratification, Error> {
    match kind {
        PartitionKind::Diagonal => Stratification::diagonal(n),
        PartitionKind::Vertical => Stratification::vertical(n),
        PartitionKind::Jittered => Stratification::jittered_from_count(n),
    }
}

fn cmd_sample(config: &RunConfig, out: &mut impl Write) -> Result<(), CliError> {
    let strat = stratification(config.partition, config.n[0])?;
    let sample = strat.sample(config.seed);
    match config.format {
        OutputFormat::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["x", "y", "cell"])?;
            for (p, c) in sample.points.iter().zip(&sample.cells) {
                w.write_record([fmt_sig12(p.x), fmt_sig12(p.y), c.get().to_string()])?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let points: Vec<Value> = sample
                .points
                .iter()
                .zip(&sample.cells)
                .map(|(p, c)| json!({ "x": num(p.x), "y": num(p.y), "cell": c.get() }))
                .collect();
            write_json(
                out,
                &json!({ "n": config.n[0], "partition": config.partition, "seed": config.seed, "points": points }),
            )?;
        }
    }
    Ok(())
}

fn cmd_mc(config: &RunConfig, out: &mut impl Write) -> Result<(), CliError> {
    struct Row {
        n: usize,
        value: f64,
        std_error: f64,
        reference: Option<f64>,
    }
    let mut rows = Vec::new();
    for &n in &config.n {
        let strat = stratification(config.partition, n)?;
        let est = mc_expected_l2_sq_for(&strat, config.replicates, config.seed)?;
        let reference = match baseline_estimate(&strat)? {
            Some(b) => Some(b.value),
            None => exact_or_marker(n)?.ok(),
        };
        rows.push(Row {
            n,
            value: est.value,
            std_error: est.std_error.unwrap_or(f64::NAN),
            reference,
        });
    }
    let partition = serde_json::to_value(config.partition)?;
    let partition = partition.as_str().unwrap_or_default();
    match config.format {
        OutputFormat::Csv => {
            let mut w = csv_writer(out);
            w.write_record([
                "n",
                "partition",
                "estimate",
                "std_error",
                "replicates",
                "seed",
                "reference",
            ])?;
            for r in rows {
                w.write_record([
                    r.n.to_string(),
                    partition.to_string(),
                    fmt_sig12(r.value),
                    fmt_sig12(r.std_error),
                    config.replicates.to_string(),
                    config.seed.to_string(),
                    r.reference.map_or_else(String::new, fmt_sig12),
                ])?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = rows
                .into_iter()
                .map(|r| {
                    json!({
                        "n": r.n,
                        "estimate": num(r.value),
                        "std_error": num(r.std_error),
                        "reference": r.reference.map_or(Value::Null, num),
                    })
                })
                .collect();
            write_json(
                out,
                &json!({ "partition": partition, "replicates": config.replicates, "seed": config.seed, "rows": rows }),
            )?;
        }
    }
    Ok(())
}

fn cmd_verify(config: &RunConfig, out: &mut impl Write) -> Result<bool, CliError> {
    let opts = VerifyOptions {
        ns: config.n.clone(),
        seed: config.seed,
        inject_fault: config.inject_fault,
    };
    let report = run_verify(&opts)?;
    write_verify(&report, config.format, out)?;
    let failing: Vec<&str> = report.failing().map(|c| c.name.as_str()).collect();
    if failing.is_empty() {
        eprintln!("verify: all {} checks passed", report.checks.len());
    } else {
        eprintln!(
            "verify: {} of {} checks failed: {}",
            failing.len(),
            report.checks.len(),
            failing.join(", ")
        );
    }
    Ok(report.passed)
}

fn write_verify(
    report: &VerifyReport,
    format: OutputFormat,
    out: &mut impl Write,
) -> Result<(), CliError> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["check", "status", "detail"])?;
            for c in &report.checks {
                w.write_record([
                    c.name.as_str(),
                    if c.passed { "pass" } else { "fail" },
                    c.detail.as_str(),
                ])?;
            }
            w.flush()?;
        }
        OutputFormat::Json => write_json(out, &serde_json::to_value(report)?)?,
    }
    Ok(())
}
