use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use gafzeros::densities::Which;
use gafzeros::Kind;

mod config;
mod run;
mod svg;
mod verify;

use config::{Command, ExperimentConfig, MeasureSpec};

/// Simulate zeros of stationary Gaussian analytic functions on a strip and
/// check them against their predicted horizontal densities.
#[derive(Parser)]
#[command(name = "gafzeros", version)]
struct Cli {
    /// Directory artifacts are written to.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Tables of L(y), S(y) and the real atom R.
    Density(Common),
    /// First-intensity grid from the kernel.
    Intensity(Common),
    /// Coefficients of one realization.
    Sample(Common),
    /// Located zeros of one realization.
    Zeros(Common),
    /// Ensemble of empirical horizontal measures.
    Measure(Common),
    /// Variance scaling between the first and last window length.
    Randomness(Common),
    /// Full acceptance pipeline for a named family.
    Verify(Common),
    /// Survival curve of the zero count in a rectangle.
    Tail(Common),
    /// L and S curves of the three worked families as SVG.
    Figure1(Common),
    /// Re-run the configuration embedded in a result JSON.
    Replay { result: PathBuf },
}

#[derive(Args, Default)]
struct Common {
    /// Start from a JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// paley-wiener (pw), fock-bargmann (fb), sech, two-atom or mixture.
    #[arg(long)]
    family: Option<String>,
    /// Family parameter: a, the atom position q, or the mixture atom mass.
    #[arg(long, alias = "a")]
    param: Option<f64>,
    /// Spectral measure JSON document instead of a named family.
    #[arg(long, conflicts_with = "family")]
    measure: Option<PathBuf>,
    /// gaf or sym.
    #[arg(long)]
    kind: Option<Kind>,
    #[arg(long, allow_hyphen_values = true)]
    y_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    y_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x_max: Option<f64>,
    /// Window lengths, comma separated.
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    /// Spectral nodes per continuous component.
    #[arg(long)]
    n_modes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trial: Option<u64>,
    /// L or S.
    #[arg(long, value_parser = parse_which)]
    which: Option<Which>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    /// Laplacian step for intensity grids.
    #[arg(long)]
    step: Option<f64>,
}

fn parse_which(s: &str) -> Result<Which, String> {
    match s {
        "L" | "l" => Ok(Which::L),
        "S" | "s" => Ok(Which::S),
        other => Err(format!("expected L or S, got `{other}`")),
    }
}

impl Common {
    fn into_config(self, command: Command) -> Result<ExperimentConfig> {
        let measure = match (&self.family, &self.measure) {
            (Some(name), _) => Some(MeasureSpec::parse(name, self.param)?),
            (None, Some(path)) => Some(MeasureSpec::from_file(path)?),
            (None, None) => None,
        };
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let mut cfg: ExperimentConfig = serde_json::from_str(&text).context("parsing config")?;
                cfg.command = command;
                if let Some(m) = measure {
                    cfg.band = m.default_band()?;
                    cfg.measure = m;
                }
                cfg
            }
            None => {
                let default_family = if command == Command::Tail { "paley-wiener" } else { "sech" };
                let m = measure.map_or_else(|| MeasureSpec::parse(default_family, None), Ok)?;
                ExperimentConfig::new(command, m)?
            }
        };
        if command == Command::Tail && self.config.is_none() {
            cfg.x_range = [0.0, 1.0];
            cfg.trials = 10_000;
            cfg.n_modes = 0;
        }
        if let Some(v) = self.kind {
            cfg.kind = v;
        }
        if let Some(v) = self.y_min {
            cfg.band[0] = v;
        }
        if let Some(v) = self.y_max {
            cfg.band[1] = v;
        }
        if let Some(v) = self.x_min {
            cfg.x_range[0] = v;
        }
        if let Some(v) = self.x_max {
            cfg.x_range[1] = v;
        }
        if let Some(v) = self.t {
            cfg.t_list = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.bins {
            cfg.bins = v;
        }
        if let Some(v) = self.n_modes {
            cfg.n_modes = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.trial {
            cfg.trial = v;
        }
        if self.which.is_some() {
            cfg.which = self.which;
        }
        if let Some(v) = self.points {
            cfg.points = v;
        }
        if let Some(v) = self.nx {
            cfg.nx = v;
        }
        if let Some(v) = self.ny {
            cfg.ny = v;
        }
        if let Some(v) = self.step {
            cfg.step = v;
        }
        Ok(cfg)
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("GAFZEROS_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("GAFZEROS_THREADS must be a positive integer, got `{v}`"))?;
        gafzeros::exec::configure_threads(n);
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<run::Outcome> {
    configure_threads()?;
    let out: &Path = &cli.out;
    let (command, common) = match cli.command {
        Sub::Replay { result } => return run::replay(&result, out),
        Sub::Density(c) => (Command::Density, c),
        Sub::Intensity(c) => (Command::Intensity, c),
        Sub::Sample(c) => (Command::Sample, c),
        Sub::Zeros(c) => (Command::Zeros, c),
        Sub::Measure(c) => (Command::Measure, c),
        Sub::Randomness(c) => (Command::Randomness, c),
        Sub::Verify(c) => (Command::Verify, c),
        Sub::Tail(c) => (Command::Tail, c),
        Sub::Figure1(c) => (Command::Figure1, c),
    };
    let cfg = common.into_config(command)?;
    run::run(&cfg, out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(outcome) => {
            let files: Vec<String> = outcome.files.iter().map(|p| p.display().to_string()).collect();
            println!("{}", serde_json::json!({ "passed": outcome.passed, "files": files }));
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let chain: Vec<String> = e.chain().skip(1).map(|c| c.to_string()).collect();
            eprintln!("{}", serde_json::json!({ "error": e.to_string(), "causes": chain }));
            ExitCode::from(2)
        }
    }
}
