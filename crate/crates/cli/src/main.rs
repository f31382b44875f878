//! `disclosure-eq`: solves, sweeps, differentiates, simulates and checks the
//! disclosure equilibrium from the command line.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use config::{
    parse_grid, read_dist_file, Command, GridSpec, Layer, MethodKind, ModelKind, Param, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "disclosure-eq",
    version,
    about = "Disclosure equilibrium solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Solve one instance and print thresholds, regions and report statistics.
    Solve(Opts),
    /// Solve every cell of one or more --grid axes and write CSV.
    Sweep(Opts),
    /// Threshold and report-statistic derivatives in beta and q.
    Sensitivity(Opts),
    /// Monte Carlo simulation of the full game.
    Simulate(Opts),
    /// Enumerate every deviation from the equilibrium strategy.
    CheckDeviations(Opts),
    /// Write fig3a..fig4d CSV series into the --out directory.
    Figures(Opts),
}

#[derive(Args, Debug)]
struct Opts {
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    /// Probability the investor learns r.
    #[arg(long)]
    alpha: Option<f64>,
    /// Probability the investor also learns x.
    #[arg(long)]
    beta: Option<f64>,
    /// Probability of outside revelation (baseline).
    #[arg(long)]
    q: Option<f64>,
    /// Probability the firm is informed (extension).
    #[arg(long)]
    p: Option<f64>,
    /// Realized first signal.
    #[arg(long)]
    r: Option<f64>,
    /// Prior mean of r.
    #[arg(long)]
    r0: Option<f64>,
    /// Prior mean of x.
    #[arg(long)]
    mu0: Option<f64>,
    /// Spread of x.
    #[arg(long)]
    sigma: Option<f64>,
    /// JSON distribution of x, e.g. {"family": "logistic", "mu": 1, "scale": 0.3}.
    #[arg(long)]
    dist_file: Option<PathBuf>,
    /// JSON config file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sweep axis, `param=min:max:steps` or `param=v1,v2,...`. Repeatable.
    #[arg(long, value_parser = grid_arg)]
    grid: Vec<(Param, GridSpec)>,
    /// Monte Carlo paths.
    #[arg(long)]
    paths: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Root-finding tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Output file (output directory for `figures`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Machine-readable JSON instead of a table or CSV.
    #[arg(long)]
    json: bool,
    /// Log-scale of a log-normal r with mean r0 (simulate); default holds r fixed.
    #[arg(long)]
    r_sigma: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<MethodKind>,
    /// Worker thread cap.
    #[arg(long, env = "DISCLOSURE_EQ_THREADS")]
    threads: Option<usize>,
}

fn grid_arg(s: &str) -> std::result::Result<(Param, GridSpec), String> {
    parse_grid(s).map_err(|e| format!("{e:#}"))
}

/// Marks errors in how the program was invoked.
#[derive(Debug)]
struct Usage(anyhow::Error);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for Usage {}

fn resolve(command: Command, o: Opts) -> Result<RunConfig> {
    let file = match &o.config {
        Some(path) => Layer::from_file(path)?,
        None => Layer::default(),
    };
    let mut flags = Layer {
        model: o.model,
        alpha: o.alpha,
        beta: o.beta,
        q: o.q,
        p: o.p,
        r: o.r,
        r0: o.r0,
        mu0: o.mu0,
        sigma: o.sigma,
        x_dist: o.dist_file.as_deref().map(read_dist_file).transpose()?,
        paths: o.paths,
        seed: o.seed,
        tol: o.tol,
        out: o.out,
        r_sigma: o.r_sigma,
        method: o.method,
        ..Layer::default()
    };
    for (param, g) in o.grid {
        if flags.grid.insert(param, g).is_some() {
            bail!("--grid given twice for {param}");
        }
    }
    RunConfig::resolve(command, flags, file, o.json, o.threads)
}

fn run(cli: Cli) -> Result<()> {
    let (command, opts) = match cli.command {
        Sub::Solve(o) => (Command::Solve, o),
        Sub::Sweep(o) => (Command::Sweep, o),
        Sub::Sensitivity(o) => (Command::Sensitivity, o),
        Sub::Simulate(o) => (Command::Simulate, o),
        Sub::CheckDeviations(o) => (Command::CheckDeviations, o),
        Sub::Figures(o) => (Command::Figures, o),
    };
    let cfg = resolve(command, opts).map_err(|e| anyhow::Error::new(Usage(e)))?;
    eprintln!("# config: {}", serde_json::to_string(&cfg)?);
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    commands::run(&cfg)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.downcast_ref::<Usage>().is_some()
                || matches!(
                    e.downcast_ref::<disclosure_core::Error>(),
                    Some(disclosure_core::Error::InvalidParameter { .. })
                );
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
