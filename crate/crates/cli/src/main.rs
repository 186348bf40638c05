mod cmd;
mod config;
mod manifest;
mod output;
mod support;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dicke_lindblad::liouvillian::Sector;

use manifest::RunManifest;
use support::Ctx;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SectorArg {
    Even,
    Odd,
    Full,
}

#[derive(Parser)]
#[command(
    name = "dicke-lindblad",
    version,
    about = "Liouvillian spectra, eigenvector statistics, and driven dynamics of the dissipative anisotropic Dicke model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV artifacts and the run manifest.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Spectrum cache directory.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Worker count; defaults to the logical core count.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed recorded in the manifest and used by sampled baselines.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Parity-sector override for the commands that honor one.
    #[arg(long, global = true, value_enum)]
    sector: Option<SectorArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Complex-spectrum scatter CSVs over a coupling grid.
    Spectrum,
    /// Liouvillian gap versus system size with power-law fits.
    GapScaling,
    /// Average participation ratios over a coupling grid.
    PrMap,
    /// Unfolded spacing histograms, spacing ratios, and KS summaries.
    SpacingStats,
    /// Thue-Morse driven dynamics observable series.
    Dynamics,
    /// Closed-form critical line sampled over g1.
    CriticalLine,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<bool, String> {
    let config_path = cli.config.ok_or("missing --config PATH")?;
    let bytes = std::fs::read(&config_path)
        .map_err(|e| format!("cannot read config {}: {e}", config_path.display()))?;
    let config_hash = {
        use sha2::{Digest, Sha256};
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect::<String>()
    };
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| format!("cannot create output directory {}: {e}", cli.out.display()))?;
    let ctx = Ctx {
        out_dir: cli.out,
        cache_dir: cli.cache,
        jobs: cli.jobs.unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        }),
        seed: cli.seed,
        sector: cli.sector.map(|s| match s {
            SectorArg::Even => Sector::Even,
            SectorArg::Odd => Sector::Odd,
            SectorArg::Full => Sector::Full,
        }),
    };

    let (name, tasks) = match cli.command {
        Command::Spectrum => (
            "spectrum",
            cmd::spectrum::run(&ctx, &config::load(&config_path)?)?,
        ),
        Command::GapScaling => (
            "gap-scaling",
            cmd::gap_scaling::run(&ctx, &config::load(&config_path)?)?,
        ),
        Command::PrMap => (
            "pr-map",
            cmd::pr_map::run(&ctx, &config::load(&config_path)?)?,
        ),
        Command::SpacingStats => (
            "spacing-stats",
            cmd::spacing::run(&ctx, &config::load(&config_path)?)?,
        ),
        Command::Dynamics => (
            "dynamics",
            cmd::dynamics::run(&ctx, &config::load(&config_path)?)?,
        ),
        Command::CriticalLine => (
            "critical-line",
            cmd::critical_line::run(&ctx, &config::load(&config_path)?)?,
        ),
    };

    let mut manifest = RunManifest::new(name, config_hash, ctx.seed, tasks);
    manifest.verify_outputs(&ctx.out_dir);
    manifest.write(&ctx.out_dir).map_err(|e| e.to_string())?;
    for task in &manifest.tasks {
        if !task.ok {
            log::error!("task {} failed: {}", task.id, task.status);
        }
    }
    Ok(manifest.all_ok())
}
