use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use melnikov_chaos::cli::{execute, Command};
use melnikov_chaos::config::ExperimentConfig;
use melnikov_chaos::constructor::GapMode;
use melnikov_chaos::Result;

#[derive(Parser)]
#[command(name = "melchaos", version, about = "Melnikov chaos for planar Filippov systems with a saddle on the switching curve")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Experiment config (TOML, or JSON).
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Perturbation sizes, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    epsilon: Vec<f64>,
    #[arg(long, global = true)]
    nu: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    tau: Option<f64>,
    /// Symbol prefixes such as `110`, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    symbols: Vec<String>,
    #[arg(long, global = true)]
    mode: Option<Mode>,
    #[arg(long, global = true)]
    levels: Option<usize>,
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Lambda,
    Bj,
}

#[derive(Subcommand)]
enum Cmd {
    /// Hypotheses, scenario and derived constants.
    Check,
    /// Table of the Melnikov function.
    Melnikov,
    /// Zero structure of the Melnikov function.
    Zeros,
    /// Manifold endpoints and the calibrated distance law.
    Endpoints,
    /// Power laws of the loop maps.
    Scaling,
    /// Nested intervals and shadowing of the symbol family.
    Construct,
    /// Re-verifies shadowing, optionally at one chart coordinate.
    Shadow {
        #[arg(long)]
        d: Option<f64>,
        #[arg(long)]
        c_star: Option<f64>,
    },
    /// Finite-horizon semi-conjugacy with the shift.
    Conjugacy {
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Scaling and construction at every epsilon.
    Sweep,
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    if !cli.epsilon.is_empty() {
        cfg.epsilon = cli.epsilon.clone();
    }
    if !cli.symbols.is_empty() {
        cfg.symbols = cli.symbols.clone();
    }
    cfg.nu = cli.nu.or(cfg.nu);
    cfg.tau = cli.tau.or(cfg.tau);
    cfg.workers = cli.workers.or(cfg.workers);
    if let Some(m) = cli.mode {
        cfg.construction.mode = match m {
            Mode::Lambda => GapMode::Lambda,
            Mode::Bj => GapMode::Bj,
        };
    }
    if let Some(l) = cli.levels {
        cfg.construction.levels = l;
    }
    match cli.command {
        Cmd::Shadow { d, c_star } => {
            cfg.shadow.d = d.or(cfg.shadow.d);
            cfg.shadow.c_star = c_star.or(cfg.shadow.c_star);
        }
        Cmd::Conjugacy { k_max } => {
            if let Some(k) = k_max {
                cfg.conjugacy.k_max = k;
            }
        }
        _ => {}
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = match cli.command {
        Cmd::Check => Command::Check,
        Cmd::Melnikov => Command::Melnikov,
        Cmd::Zeros => Command::Zeros,
        Cmd::Endpoints => Command::Endpoints,
        Cmd::Scaling => Command::Scaling,
        Cmd::Construct => Command::Construct,
        Cmd::Shadow { .. } => Command::Shadow,
        Cmd::Conjugacy { .. } => Command::Conjugacy,
        Cmd::Sweep => Command::Sweep,
    };
    let fallback = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let code = execute(cmd, load(&cli), &fallback);
    ExitCode::from(code as u8)
}
