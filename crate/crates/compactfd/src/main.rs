use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use compactfd::cli::{self, ModelConfig, RunConfig, SchemeConfig, SideConfig};

/// Jump-diffusion option pricing with a fourth-order compact scheme.
#[derive(Parser)]
#[command(name = "compactfd", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON configuration file; command-line flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Model selector; picks that model's benchmark parameter block.
    #[arg(long, global = true, value_enum)]
    model: Option<ModelKind>,

    /// Option side.
    #[arg(long, global = true, value_enum)]
    side: Option<SideKind>,

    /// Space intervals N (even).
    #[arg(long = "N", global = true)]
    intervals: Option<usize>,

    /// Domain half-width L in log-moneyness units.
    #[arg(long = "L", global = true)]
    half_width: Option<f64>,

    /// Parabolic mesh ratio δτ/δx².
    #[arg(long, global = true)]
    rho: Option<f64>,

    /// Payoff smoothing: on | off.
    #[arg(long, global = true, value_parser = parse_on_off)]
    smoothing: Option<bool>,

    /// Spatial scheme.
    #[arg(long, global = true, value_enum)]
    scheme: Option<SchemeKind>,

    /// Output directory for the CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Price the configured contract at the requested spots.
    Price,
    /// Grid-doubling convergence study.
    Converge,
    /// Von Neumann amplification-root sweep.
    Stability,
    /// Modified-wavenumber resolution curves.
    Wavenumber,
    /// Compact vs second-order central scheme timing at fixed accuracy.
    Efficiency,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Merton,
    Kou,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideKind {
    Call,
    Put,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeKind {
    Compact,
    Fd2,
}

fn parse_on_off(value: &str) -> Result<bool, String> {
    match value {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(format!("expected 'on' or 'off', got '{other}'")),
    }
}

fn build_config(args: &Cli) -> compactfd::Result<RunConfig> {
    let mut cfg = match (&args.config, args.model) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(ModelKind::Kou)) => RunConfig::kou_default(),
        (None, _) => RunConfig::merton_default(),
    };
    if let Some(model) = args.model {
        let wanted_kou = matches!(model, ModelKind::Kou);
        let is_kou = matches!(cfg.model, ModelConfig::Kou { .. });
        if wanted_kou != is_kou {
            cfg.model = if wanted_kou {
                RunConfig::kou_default().model
            } else {
                RunConfig::merton_default().model
            };
        }
    }
    if let Some(side) = args.side {
        cfg.contract.side = match side {
            SideKind::Call => SideConfig::Call,
            SideKind::Put => SideConfig::Put,
        };
    }
    if let Some(n) = args.intervals {
        cfg.grid.intervals = n;
    }
    if let Some(l) = args.half_width {
        cfg.grid.half_width = l;
    }
    if let Some(rho) = args.rho {
        cfg.grid.mesh_ratio = rho;
        cfg.grid.time_steps = None;
    }
    if let Some(smoothing) = args.smoothing {
        cfg.options.smoothing = smoothing;
    }
    if let Some(scheme) = args.scheme {
        cfg.options.scheme = match scheme {
            SchemeKind::Compact => SchemeConfig::Compact,
            SchemeKind::Fd2 => SchemeConfig::Fd2,
        };
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn run(args: &Cli) -> compactfd::Result<PathBuf> {
    let cfg = build_config(args)?;
    match args.command {
        Command::Price => cli::cmd_price(&cfg),
        Command::Converge => cli::cmd_converge(&cfg),
        Command::Stability => cli::cmd_stability(&cfg),
        Command::Wavenumber => cli::cmd_wavenumber(&cfg),
        Command::Efficiency => cli::cmd_efficiency(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let args = Cli::parse();
    match run(&args) {
        Ok(path) => {
            println!("wrote {}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
