//! `tangle-response`: invariant checks, single-point reports, sweep data and
//! the convex-roof oracle from the command line.

mod output;
mod roof;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tangle_core::figures::{fig1, fig2, fig3};
use tangle_core::response::lrt;
use tangle_core::states::SymParams;
use tangle_core::ResponseReport;

use crate::output::{write_output, Sink};

pub const SCHEMA: &str = "tangle-response/1";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Check(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Check(m) => write!(f, "check failed: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

/// Errors raised by the library while validating user input.
pub fn usage(e: tangle_core::Error) -> Failure {
    Failure::Usage(e.to_string())
}

/// Errors raised by the library during a computation that should succeed.
pub fn compute(e: tangle_core::Error) -> Failure {
    Failure::Check(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "tangle-response", version, about = "Linear response of concurrence and three-tangle to W-type noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the invariant suite and print one record per check.
    Verify(verify::VerifyArgs),
    /// First-order response of a symmetric three-qubit state.
    Report {
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, allow_negative_numbers = true)]
        gamma: f64,
    },
    /// Response cloud with the G and J boundary curves.
    Fig1(SweepArgs),
    /// Average decay rates of the G and J families.
    Fig2(SweepArgs),
    /// Critical noise curves of the two normal forms.
    Fig3(SweepArgs),
    /// Convex-roof oracle against the analytic ensemble.
    Roof(roof::RoofArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn as_str(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Grid density; defaults to 24 (fig1), 50 (fig2) or 101 (fig3).
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

/// Validated sweep settings.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub command: &'static str,
    pub grid: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl SweepConfig {
    fn new(command: &'static str, default_grid: usize, args: SweepArgs) -> Result<Self, Failure> {
        let grid = args.grid.unwrap_or(default_grid);
        if grid < 2 {
            return Err(Failure::Usage(format!("--grid must be at least 2, got {grid}")));
        }
        Ok(Self { command, grid, seed: args.seed, out: args.out, format: args.format })
    }

    /// Comment line for CSV output.
    pub fn provenance(&self) -> String {
        format!(
            "# tangle-response {VERSION} {} grid={} seed={} format={}",
            self.command,
            self.grid,
            self.seed,
            self.format.as_str()
        )
    }
}

#[derive(Serialize)]
struct ReportJson<'a> {
    schema: &'a str,
    alpha: f64,
    beta: f64,
    gamma: f64,
    #[serde(flatten)]
    report: ResponseReport,
}

fn cmd_report(alpha: f64, beta: f64, gamma: f64) -> Result<(), Failure> {
    let p = SymParams::new(alpha, beta, gamma).map_err(usage)?;
    let report = lrt(&p).map_err(compute)?;
    let json = ReportJson { schema: SCHEMA, alpha, beta, gamma, report };
    println!("{}", serde_json::to_string_pretty(&json).expect("report serializes"));
    Ok(())
}

fn cmd_fig1(cfg: &SweepConfig) -> Result<(), Failure> {
    let rows = fig1(cfg.grid, cfg.seed).map_err(compute)?;
    let header = ["alpha", "beta", "gamma", "tau", "negativity", "eta", "family"];
    let csv = rows
        .iter()
        .map(|r| output::csv_row(&[r.alpha, r.beta, r.gamma, r.tau, r.negativity, r.eta], &[r.family.as_str()]))
        .collect();
    write_output(cfg, Sink { header: &header, csv_rows: csv, json_rows: &rows })
}

fn cmd_fig2(cfg: &SweepConfig) -> Result<(), Failure> {
    let rows = fig2(cfg.grid).map_err(compute)?;
    let header = ["family", "param", "tau", "p", "q_tilde_c", "q_c", "avg_decay"];
    let csv = rows
        .iter()
        .map(|r| {
            let mut line = format!("{},", r.family.as_str());
            line.push_str(&output::csv_row(&[r.param, r.tau, r.p, r.q_tilde_c, r.q_c, r.avg_decay], &[]));
            line
        })
        .collect();
    write_output(cfg, Sink { header: &header, csv_rows: csv, json_rows: &rows })
}

fn cmd_fig3(cfg: &SweepConfig) -> Result<(), Failure> {
    let curves = fig3(cfg.grid).map_err(compute)?;
    let header = ["family", "p", "q_tilde_c", "x", "y", "convex"];
    let mut csv = Vec::new();
    for c in &curves {
        for pt in &c.points {
            let mut line = format!("{},", c.family.as_str());
            line.push_str(&output::csv_row(&[pt.p, pt.q_tilde_c, pt.x, pt.y], &[if c.convex { "true" } else { "false" }]));
            csv.push(line);
        }
    }
    for c in &curves {
        eprintln!("{}: convex {} (min slope change {:.3e})", c.family.as_str(), c.convex, c.min_slope_change);
    }
    write_output(cfg, Sink { header: &header, csv_rows: csv, json_rows: &curves })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Verify(args) => verify::cmd_verify(&args),
        Command::Report { alpha, beta, gamma } => cmd_report(alpha, beta, gamma),
        Command::Fig1(args) => cmd_fig1(&SweepConfig::new("fig1", 24, args)?),
        Command::Fig2(args) => cmd_fig2(&SweepConfig::new("fig2", 50, args)?),
        Command::Fig3(args) => cmd_fig3(&SweepConfig::new("fig3", 101, args)?),
        Command::Roof(args) => roof::cmd_roof(&args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("tangle-response: {f}");
            ExitCode::from(f.code())
        }
    }
}
