//! Per-mechanism process infidelity of the eSWAP.

use anyhow::{bail, Result};
use eswap_core::processtomo::{error_budget, write_budget_csv, BudgetConfig, BudgetRow, Mechanism};
use serde::{Deserialize, Serialize};

use super::ensure_finite;
use crate::config::ResolvedConfig;
use crate::manifest::OutputDir;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetSummary {
    pub encoding: String,
    pub cutoff: usize,
    pub thetas: Vec<f64>,
    pub rows: Vec<BudgetRow>,
    pub total: Option<f64>,
}

impl BudgetSummary {
    pub fn row(&self, m: Mechanism) -> Option<f64> {
        self.rows.iter().find(|r| r.mechanism == m).map(|r| r.infidelity)
    }
}

pub fn run(cfg: &ResolvedConfig, out: &mut OutputDir) -> Result<BudgetSummary> {
    if cfg.noiseless {
        bail!("error-budget needs noise parameters; drop `noiseless`");
    }
    let bc = BudgetConfig {
        cutoff: Some(cfg.cutoff),
        thetas: cfg.thetas.clone(),
        rows: cfg.budget_rows.clone(),
        ..BudgetConfig::new(cfg.encoding, cfg.noise.to_model()?)
    };
    let rows = error_budget(&bc)?;
    ensure_finite(
        "error-budget",
        &rows.iter().map(|r| r.infidelity).collect::<Vec<_>>(),
    )?;
    write_budget_csv(&rows, &out.file("budget.csv")?)?;
    let summary = BudgetSummary {
        encoding: cfg.encoding.to_string(),
        cutoff: cfg.cutoff,
        thetas: cfg.thetas.clone(),
        total: rows
            .iter()
            .find(|r| r.mechanism == Mechanism::Total)
            .map(|r| r.infidelity),
        rows,
    };
    out.write_json("summary.json", &summary)?;
    Ok(summary)
}
