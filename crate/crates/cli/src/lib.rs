//! Command runner for the eSWAP simulations: configuration, run
//! manifests and one module per experiment.

pub mod config;
pub mod experiments;
pub mod manifest;

use std::time::Instant;

use anyhow::Result;

use config::{Experiment, ResolvedConfig};
use manifest::{OutputDir, RunManifest};

/// Runs the configured experiment, writes its artifacts, the resolved
/// config and the manifest into `cfg.out`.
pub fn run(cfg: &ResolvedConfig) -> Result<RunManifest> {
    let start = Instant::now();
    let mut out = OutputDir::create(&cfg.out)?;
    out.write_json("config.json", cfg)?;
    log::info!("running {} into {}", cfg.experiment, cfg.out.display());
    match cfg.experiment {
        Experiment::FockDemo => {
            experiments::fock_demo::run(cfg, &mut out)?;
        }
        Experiment::CoherentSweep => {
            experiments::coherent::run(cfg, &mut out)?;
        }
        Experiment::Qpt => {
            experiments::qpt::run(cfg, &mut out)?;
        }
        Experiment::Fredkin => {
            experiments::fredkin::run(cfg, &mut out)?;
        }
        Experiment::Kerr => {
            experiments::kerr::run(cfg, &mut out)?;
        }
        Experiment::ErrorBudget => {
            experiments::budget::run(cfg, &mut out)?;
        }
    }
    let manifest = RunManifest::new(cfg, vec![cfg.seed], start.elapsed(), out.files().to_vec())?;
    manifest.write(out.root())?;
    Ok(manifest)
}
