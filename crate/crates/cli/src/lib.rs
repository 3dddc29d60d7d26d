//! Command-line front end: `qtrace <oracle|ht|gst|entropy|sweep|bounds>`.
//!
//! Scientific parameters come from a JSON config (`--config`); flags override
//! individual fields. Results go to CSV or JSON with fixed columns.

pub mod commands;
pub mod config;
pub mod error;
pub mod golden;
pub mod table;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{Overrides, Settings};
use crate::config::{
    parse_config, load_config, Estimator, Format, Mode, RunConfig, Strategy, SweepParameter, BUNDLED_REFERENCE,
};
use crate::error::CliError;
use crate::table::ResultRow;

pub const THREADS_ENV: &str = "QTRACE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "qtrace", version, about = "Power traces and entropy of ensemble-prepared quantum states")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, short, global = true)]
    pub output: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (also QTRACE_THREADS); never changes results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Record wall-clock milliseconds instead of 0.
    #[arg(long, global = true)]
    pub timing: bool,
    /// Run the bundled regression rows and report pass/fail.
    #[arg(long)]
    pub golden: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact dense-matrix values.
    Oracle(OracleArgs),
    /// Hadamard-test estimates of Tr{ρ^m}.
    Ht(HtArgs),
    /// Subspace tomography estimates of Tr{ρ^m} and Tr{G^k}.
    Gst(GstArgs),
    /// Truncated series for Tr{ρ ln ρ}.
    Entropy(EntropyArgs),
    /// One estimate per value of a swept parameter.
    Sweep(SweepArgs),
    /// Shot counts and error bounds.
    Bounds(BoundsArgs),
}

#[derive(Debug, Args, Default)]
pub struct EstimatorFlags {
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, value_enum)]
    pub strategy: Option<Strategy>,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long = "epsilon-trunc")]
    pub epsilon_trunc: Option<f64>,
    /// Dressing angle in radians.
    #[arg(long = "theta-basis")]
    pub theta_basis: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "enumeration-cap")]
    pub enumeration_cap: Option<u64>,
    #[arg(long = "ht-sigma")]
    pub ht_sigma: Option<f64>,
    #[arg(long = "gst-sigma")]
    pub gst_sigma: Option<f64>,
}

impl EstimatorFlags {
    fn overrides(&self) -> Overrides {
        Overrides {
            mode: self.mode,
            strategy: self.strategy,
            shots: self.shots,
            trials: self.trials,
            epsilon: self.epsilon_trunc,
            theta: self.theta_basis,
            seed: self.seed,
            cap: self.enumeration_cap,
            ht_sigma: self.ht_sigma,
            gst_sigma: self.gst_sigma,
        }
    }
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_delimiter = ',')]
    pub power: Option<Vec<usize>>,
    #[arg(long = "g-power", value_delimiter = ',')]
    pub g_power: Option<Vec<usize>>,
    /// Also emit exact Tr{ρ ln ρ}.
    #[arg(long)]
    pub entropy: bool,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct HtArgs {
    #[arg(long, value_delimiter = ',')]
    pub power: Option<Vec<usize>>,
    #[command(flatten)]
    pub flags: EstimatorFlags,
}

#[derive(Debug, Args)]
pub struct GstArgs {
    #[arg(long, value_delimiter = ',')]
    pub power: Option<Vec<usize>>,
    #[arg(long = "g-power", value_delimiter = ',')]
    pub g_power: Option<Vec<usize>>,
    #[command(flatten)]
    pub flags: EstimatorFlags,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    /// Truncation order of the series.
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long, value_enum)]
    pub estimator: Option<Estimator>,
    #[command(flatten)]
    pub flags: EstimatorFlags,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub parameter: Option<SweepParameter>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub estimator: Option<Estimator>,
    #[arg(long)]
    pub power: Option<usize>,
    #[command(flatten)]
    pub flags: EstimatorFlags,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long = "eps-tilde")]
    pub eps_tilde: Option<f64>,
    #[arg(long = "delta-tilde")]
    pub delta_tilde: Option<f64>,
    #[arg(long)]
    pub eps1: Option<f64>,
    #[arg(long)]
    pub eps2: Option<f64>,
    #[arg(long = "n-layers")]
    pub n_layers: Option<usize>,
    #[command(flatten)]
    pub flags: EstimatorFlags,
}

pub const DEFAULT_ENTROPY_ORDER: usize = 8;

fn config_powers(cfg: &RunConfig) -> Vec<usize> {
    cfg.params.power.as_ref().map(|p| p.to_vec()).unwrap_or_else(|| vec![2])
}

fn config_g_powers(cfg: &RunConfig) -> Vec<usize> {
    cfg.params.g_power.as_ref().map(|p| p.to_vec()).unwrap_or_default()
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    match &cli.config {
        Some(p) => load_config(p),
        None => Err(CliError::Usage("--config is required".into())),
    }
}

/// Runs a command and returns its rows (without writing them).
pub fn execute(cli: &Cli, cfg: &RunConfig, command: &Command) -> Result<Vec<ResultRow>, CliError> {
    let e = cfg.ensemble()?;
    let p = &cfg.params;
    let t = cli.timing;
    match command {
        Command::Oracle(a) => {
            let o = Overrides { seed: a.seed, ..Overrides::default() };
            let s = Settings::resolve(&o, p, Strategy::Enumerate, t)?;
            let powers = match (&a.power, &a.g_power) {
                (Some(pw), _) => pw.clone(),
                (None, Some(_)) => Vec::new(),
                (None, None) if a.entropy => Vec::new(),
                (None, None) => config_powers(cfg),
            };
            let g = a.g_power.clone().unwrap_or_else(|| if a.power.is_some() { Vec::new() } else { config_g_powers(cfg) });
            commands::oracle(&e, &powers, &g, a.entropy, &s)
        }
        Command::Ht(a) => {
            let s = Settings::resolve(&a.flags.overrides(), p, Strategy::Enumerate, t)?;
            commands::ht(&e, &a.power.clone().unwrap_or_else(|| config_powers(cfg)), &s)
        }
        Command::Gst(a) => {
            let s = Settings::resolve(&a.flags.overrides(), p, Strategy::Enumerate, t)?;
            let (powers, g) = match (&a.power, &a.g_power) {
                (None, None) => (config_powers(cfg), config_g_powers(cfg)),
                (pw, g) => (pw.clone().unwrap_or_default(), g.clone().unwrap_or_default()),
            };
            commands::gst(&e, &powers, &g, &s)
        }
        Command::Entropy(a) => {
            let s = Settings::resolve(&a.flags.overrides(), p, Strategy::Enumerate, t)?;
            let order = a.order.or(p.order).unwrap_or(DEFAULT_ENTROPY_ORDER);
            let estimator = a.estimator.or(p.estimator).unwrap_or(Estimator::Oracle);
            commands::entropy(&e, order, estimator, &s)
        }
        Command::Sweep(a) => {
            let s = Settings::resolve(&a.flags.overrides(), p, Strategy::Mc, t)?;
            let sweep = p.sweep.as_ref();
            let parameter = a
                .parameter
                .or(sweep.map(|w| w.parameter))
                .ok_or_else(|| CliError::Usage("sweep needs --parameter or params.sweep".into()))?;
            let values = a
                .values
                .clone()
                .or(sweep.map(|w| w.values.clone()))
                .ok_or_else(|| CliError::Usage("sweep needs --values or params.sweep".into()))?;
            let estimator = a.estimator.or(p.estimator).unwrap_or(match parameter {
                SweepParameter::Shots | SweepParameter::HtSigma => Estimator::Ht,
                SweepParameter::EpsilonTrunc | SweepParameter::GstSigma => Estimator::Gst,
            });
            let m = a.power.unwrap_or_else(|| config_powers(cfg)[0]);
            commands::sweep(&e, m, parameter, &values, estimator, &s)
        }
        Command::Bounds(a) => {
            let s = Settings::resolve(&a.flags.overrides(), p, Strategy::Enumerate, t)?;
            let base = p.bounds.clone().unwrap_or_default();
            let b = config::BoundsConfig {
                d: a.d.or(base.d),
                eps_tilde: a.eps_tilde.or(base.eps_tilde),
                delta_tilde: a.delta_tilde.or(base.delta_tilde),
                eps1: a.eps1.or(base.eps1),
                eps2: a.eps2.or(base.eps2),
                n_layers: a.n_layers.or(base.n_layers),
            };
            commands::bounds(&b, &s)
        }
    }
}

fn render(rows: &[ResultRow], format: Format) -> String {
    match format {
        Format::Csv => table::to_csv(rows),
        Format::Json => table::to_json(rows),
    }
}

fn run_inner(cli: &Cli) -> Result<(), CliError> {
    if cli.golden {
        let cfg = match &cli.config {
            Some(p) => load_config(p)?,
            None => parse_config(BUNDLED_REFERENCE)?,
        };
        let rows = golden::run_golden(&cfg.ensemble()?, cfg.params.seed.unwrap_or(0))?;
        let mut report = String::new();
        for r in &rows {
            report.push_str(&r.to_string());
            report.push('\n');
        }
        let failed = rows.iter().filter(|r| !r.pass).count();
        report.push_str(&format!("golden: {} of {} rows passed\n", rows.len() - failed, rows.len()));
        table::write_output(cli.output.as_deref(), &report)?;
        return if failed == 0 {
            Ok(())
        } else {
            Err(CliError::GoldenFailed { failed, total: rows.len() })
        };
    }
    let command = cli
        .command
        .as_ref()
        .ok_or_else(|| CliError::Usage("a subcommand is required (or --golden)".into()))?;
    let cfg = load(cli)?;
    let rows = execute(cli, &cfg, command)?;
    let format = cli.format.unwrap_or(cfg.output.format);
    let path = cli.output.clone().or(cfg.output.path.clone());
    table::write_output(path.as_deref(), &render(&rows, format))
}

fn thread_count(cli: &Cli) -> Result<Option<usize>, CliError> {
    let n = match cli.threads {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={v} is not a thread count")))?,
            ),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(CliError::Usage("thread count must be >= 1".into()));
    }
    Ok(n)
}

/// Runs `cli` on its own worker pool.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match thread_count(cli)? {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            pool.install(|| run_inner(cli))
        }
        None => run_inner(cli),
    }
}

/// Process entry point: parses `args`, runs, reports errors on stderr and
/// returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
