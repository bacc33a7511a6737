use std::f64::consts::FRAC_PI_4;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::qpt::{run_qpt, Operation, QptMode, QptSetup};
use crate::dynamics::{Mechanisms, NoiseModel};
use crate::encodings::{default_cutoff, make_encoding, EncodingKind};
use crate::error::Result;

/// One row of the error budget: a group of mechanisms switched on alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    QcHeating,
    PhotonLoss,
    CavityDephasing,
    Kerr,
    CpsError,
    /// Ancilla left excited by miscalibrated rotations.
    AncillaExcitation,
    AncillaDecoherence,
    Dispersive,
    /// Everything at once.
    Total,
}

impl Mechanism {
    pub const ROWS: [Mechanism; 9] = [
        Mechanism::QcHeating,
        Mechanism::PhotonLoss,
        Mechanism::CavityDephasing,
        Mechanism::Kerr,
        Mechanism::CpsError,
        Mechanism::AncillaExcitation,
        Mechanism::AncillaDecoherence,
        Mechanism::Dispersive,
        Mechanism::Total,
    ];

    pub fn switches(self) -> Mechanisms {
        let mut m = Mechanisms::NONE;
        match self {
            Mechanism::QcHeating => m.qc_heating = true,
            Mechanism::PhotonLoss => m.cavity_loss = true,
            Mechanism::CavityDephasing => m.cavity_dephasing = true,
            Mechanism::Kerr => m.kerr = true,
            Mechanism::CpsError => m.cps_miscalibration = true,
            Mechanism::AncillaExcitation => m.rotation_error = true,
            Mechanism::AncillaDecoherence => {
                m.ancilla_decay = true;
                m.ancilla_dephasing = true;
            }
            Mechanism::Dispersive => m.dispersive = true,
            Mechanism::Total => m = Mechanisms::ALL,
        }
        m
    }

    pub fn name(self) -> &'static str {
        match self {
            Mechanism::QcHeating => "qc_heating",
            Mechanism::PhotonLoss => "photon_loss",
            Mechanism::CavityDephasing => "cavity_dephasing",
            Mechanism::Kerr => "kerr",
            Mechanism::CpsError => "cps_error",
            Mechanism::AncillaExcitation => "ancilla_excitation",
            Mechanism::AncillaDecoherence => "ancilla_decoherence",
            Mechanism::Dispersive => "dispersive",
            Mechanism::Total => "total",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BudgetConfig {
    pub encoding: EncodingKind,
    /// `None` uses the encoding default.
    pub cutoff: Option<usize>,
    pub thetas: Vec<f64>,
    /// Rates and strengths; its mechanism switches are ignored.
    pub noise: NoiseModel,
    pub rows: Vec<Mechanism>,
}

impl BudgetConfig {
    pub fn new(encoding: EncodingKind, noise: NoiseModel) -> Self {
        Self {
            encoding,
            cutoff: None,
            thetas: vec![0.0, FRAC_PI_4, 2.0 * FRAC_PI_4],
            noise,
            rows: Mechanism::ROWS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetRow {
    pub mechanism: Mechanism,
    pub encoding: String,
    /// `1 − F_χ` averaged over the control angles.
    pub infidelity: f64,
    pub per_theta: Vec<f64>,
}

/// Process infidelity of the eSWAP with each mechanism group switched on
/// in isolation, without SPAM.
pub fn error_budget(cfg: &BudgetConfig) -> Result<Vec<BudgetRow>> {
    let cutoff = cfg.cutoff.unwrap_or_else(|| default_cutoff(cfg.encoding));
    let enc = make_encoding(cfg.encoding, cutoff)?;
    let mut rows = Vec::with_capacity(cfg.rows.len());
    for &mech in &cfg.rows {
        let setup = QptSetup {
            noise: cfg.noise.clone().with_mechanisms(mech.switches()),
            allow_coherent: true,
            ..QptSetup::new(enc.clone())
        };
        let per_theta = cfg
            .thetas
            .iter()
            .map(|&theta| {
                Ok(1.0 - run_qpt(&setup, Operation::Eswap { theta }, QptMode::Exact)?.fidelity_chi)
            })
            .collect::<Result<Vec<_>>>()?;
        let infidelity = per_theta.iter().sum::<f64>() / per_theta.len().max(1) as f64;
        log::info!("budget {}: {:.4}", mech.name(), infidelity);
        rows.push(BudgetRow {
            mechanism: mech,
            encoding: cfg.encoding.to_string(),
            infidelity,
            per_theta,
        });
    }
    Ok(rows)
}

pub fn write_budget_csv(rows: &[BudgetRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["mechanism", "encoding", "infidelity", "per_theta"])?;
    for r in rows {
        let per: Vec<String> = r.per_theta.iter().map(|x| format!("{x}")).collect();
        w.write_record([
            r.mechanism.name().to_string(),
            r.encoding.clone(),
            format!("{}", r.infidelity),
            per.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}
