use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lambda_memory::criteria::DelayScale;
use lambda_memory::dynamics::SolverConfig;
use lambda_memory::sensitivity::NoiseMode;
use lambda_memory::sweep::{run, AnalysisKind, SweepConfig, ERRORS_FILE};
use lambda_memory::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_PARTIAL: u8 = 2;

/// Storage efficiency, control optimization and sensitivity maps for
/// Lambda-type quantum memories.
#[derive(Parser, Debug)]
#[command(name = "qmem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimal Gaussian control and efficiency at each point.
    Optimize(Common),
    /// Monte Carlo spread of η under memory-parameter fluctuations.
    Fluctuations(Common),
    /// One-at-a-time control-parameter sensitivity.
    Oat(Common),
    /// Sobol' indices over (pulse area, delay, duration).
    Sobol(Common),
    /// Shape optimization followed by per-knot OAT sensitivity.
    ShapeOat(Common),
    /// Mean overlap fidelity of neighboring optimal controls.
    Fidelity(Common),
    /// Any analysis over the configured grid (kind from --kind or config).
    Sweep {
        #[arg(long)]
        kind: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// JSON config file (a manifest from an earlier run also works).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    eps_m: Option<f64>,
    #[arg(long)]
    eps_g: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    grid_m: Option<usize>,
    /// Optical depths, comma separated.
    #[arg(long, value_delimiter = ',')]
    d: Option<Vec<f64>>,
    /// Dimensionless linewidths, comma separated.
    #[arg(long, value_delimiter = ',')]
    g: Option<Vec<f64>>,
    /// independent | atom-number-preserving
    #[arg(long)]
    noise_mode: Option<String>,
    /// Scale of the delay axis in control boxes: relative | signal
    #[arg(long)]
    delay_scale: Option<String>,
    #[arg(long)]
    shape_points: Option<usize>,
    /// Read-only optimum cache consulted before optimizing.
    #[arg(long)]
    cache_in: Option<PathBuf>,
    /// Export each point's optimal control as a (tau, omega) CSV.
    #[arg(long)]
    envelopes: bool,
    /// Use the coarse discretization for analyses as well as searches.
    #[arg(long)]
    coarse: bool,
}

fn build_config(kind: Option<AnalysisKind>, c: Common) -> Result<SweepConfig, Error> {
    let mut cfg = match &c.config {
        Some(p) => SweepConfig::load(p)?,
        None => SweepConfig::default(),
    };
    if let Some(k) = kind {
        cfg.kind = k;
    }
    macro_rules! set {
        ($($field:ident),*) => { $(if let Some(v) = c.$field { cfg.$field = v; })* };
    }
    set!(out, seed, workers, eps_m, eps_g, samples, grid_m, shape_points);
    if let Some(d) = c.d {
        cfg.d_axis = d;
    }
    if let Some(g) = c.g {
        cfg.g_axis = g;
    }
    if let Some(m) = c.noise_mode {
        cfg.noise_mode = m.parse::<NoiseMode>().map_err(|e| Error::Config(e.to_string()))?;
    }
    if let Some(s) = c.delay_scale {
        cfg.delay_scale = match s.as_str() {
            "relative" => DelayScale::Relative,
            "signal" => DelayScale::Signal,
            other => return Err(Error::Config(format!("unknown delay scale `{other}`"))),
        };
    }
    if c.cache_in.is_some() {
        cfg.cache_in = c.cache_in;
    }
    cfg.envelopes |= c.envelopes;
    if c.coarse {
        cfg.solver = SolverConfig::coarse();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let (kind, common) = match cli.command {
        Command::Optimize(c) => (Some(AnalysisKind::Optimize), c),
        Command::Fluctuations(c) => (Some(AnalysisKind::Fluctuations), c),
        Command::Oat(c) => (Some(AnalysisKind::Oat), c),
        Command::Sobol(c) => (Some(AnalysisKind::Sobol), c),
        Command::ShapeOat(c) => (Some(AnalysisKind::ShapeOat), c),
        Command::Fidelity(c) => (Some(AnalysisKind::Fidelity), c),
        Command::Sweep { kind, common } => match kind.map(|k| k.parse::<AnalysisKind>()).transpose() {
            Ok(k) => (k, common),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        },
    };
    let cfg = match build_config(kind, common) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run(&cfg) {
        Ok(outcome) => {
            println!("{}: {} points written to {}", cfg.kind, outcome.rows.len(), outcome.data_file.display());
            if outcome.is_partial() {
                eprintln!(
                    "{} points failed; see {}",
                    outcome.errors.len(),
                    cfg.out.join(ERRORS_FILE).display()
                );
                ExitCode::from(EXIT_PARTIAL)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
