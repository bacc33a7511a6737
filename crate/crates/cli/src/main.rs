use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use eswap_cli::config::{Experiment, ExperimentConfig, Mode, Overrides, ResolvedConfig, OUT_ROOT_ENV};

#[derive(Debug, Parser)]
#[command(name = "eswap", version, about = "Simulate exponential-SWAP experiments between two cavities")]
struct Args {
    /// Experiment to run; overrides the config file.
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,

    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long)]
    seed: Option<u64>,

    /// Output directory (default: $ESWAP_OUT_ROOT/<experiment> or runs/<experiment>).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Exact expectation values.
    #[arg(long, conflicts_with = "sampled")]
    exact: bool,

    /// Finite parity shots.
    #[arg(long)]
    sampled: bool,

    /// Output root used when --out is absent.
    #[arg(long, env = OUT_ROOT_ENV, hide = true)]
    out_root: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(args: Args) -> anyhow::Result<()> {
    let file = match &args.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    let mode = if args.sampled {
        Some(Mode::Sampled)
    } else if args.exact {
        Some(Mode::Exact)
    } else {
        None
    };
    let over = Overrides {
        experiment: args.experiment,
        seed: args.seed,
        out: args.out,
        mode,
    };
    let cfg = ResolvedConfig::resolve(file, over, args.out_root)?;
    let manifest = eswap_cli::run(&cfg)?;
    println!(
        "{}: {} files in {} ({:.1} s)",
        manifest.experiment,
        manifest.outputs.len() + 1,
        cfg.out.display(),
        manifest.wall_time_s
    );
    Ok(())
}
