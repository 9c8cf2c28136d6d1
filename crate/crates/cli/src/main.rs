//! `blindchan run`: Monte Carlo BER sweeps written to CSV.

use std::path::PathBuf;
use std::process::ExitCode;

use blindchan::experiments::{parse_snr_grid, run_all, write_csv, EstimatorKind, RunConfig};
use blindchan::Error;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "blindchan", version, about = "Subspace blind channel estimation BER experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a preset (or a custom curve) and write one CSV row per curve and SNR point.
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    Fig12,
    Fig13,
    Fig14,
    Custom,
}

impl Preset {
    fn name(self) -> &'static str {
        match self {
            Preset::Fig12 => "fig12",
            Preset::Fig13 => "fig13",
            Preset::Fig14 => "fig14",
            Preset::Custom => "custom",
        }
    }
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Preset to run; defaults to the config file's value, then `custom`.
    #[arg(long, value_enum)]
    scenario: Option<Preset>,
    /// Correlation between main and nearby channel taps.
    #[arg(long)]
    rho: Option<f64>,
    /// Forgetting factor in (0, 1].
    #[arg(long)]
    ff: Option<f64>,
    /// SNR grid in dB as LO:STEP:HI (inclusive).
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// blind, pilot or blind_nearby_init.
    #[arg(long)]
    estimator: Option<String>,
    /// Flat key = value file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

impl RunArgs {
    fn overrides(&self) -> Result<RunConfig, Error> {
        Ok(RunConfig {
            scenario: self.scenario.map(|p| p.name().to_string()),
            estimator: self.estimator.as_deref().map(str::parse::<EstimatorKind>).transpose()?,
            rho: self.rho,
            ff: self.ff,
            snr_grid_db: self.snr.as_deref().map(parse_snr_grid).transpose()?,
            trials: self.trials,
            seed: self.seed,
            ..RunConfig::default()
        })
    }
}

fn run(args: &RunArgs) -> Result<(), Error> {
    let file = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let curves = file.overridden_by(args.overrides()?).scenarios()?;
    for s in &curves {
        eprintln!(
            "running {} {} ({} trials, {} SNR points, seed {})",
            s.name,
            s.label(),
            s.trials,
            s.snr_grid_db.len(),
            s.seed
        );
    }
    let results = run_all(&curves)?;
    write_csv(&results, &args.out)?;
    let rows: usize = results.iter().map(|r| r.points.len()).sum();
    eprintln!("wrote {rows} rows to {}", args.out.display());
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 3,
        Error::Config(_) | Error::Parse { .. } | Error::Domain(_) | Error::Dimension { .. } => 2,
        Error::Eigen { .. } | Error::RankDeficient { .. } => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => match run(&args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(exit_code(&e))
            }
        },
    }
}
