//! Process tomography of eSWAP(θ) and of encoding alone.

use anyhow::{bail, Result};
use eswap_core::encodings::make_encoding;
use eswap_core::processtomo::{run_qpt, Operation, QptMode, QptReport, QptSetup};
use serde::{Deserialize, Serialize};

use super::{ensure_finite, spam_setup, SpamSetup};
use crate::config::{Mode, ResolvedConfig};
use crate::manifest::OutputDir;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QptPoint {
    pub theta: f64,
    pub fidelity_chi: f64,
    pub ptm_overlap: f64,
    pub chi_min_eigenvalue: f64,
    pub report: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QptSummary {
    pub encoding: String,
    pub cutoff: usize,
    pub mode: QptMode,
    pub points: Vec<QptPoint>,
    pub mean_fidelity_chi: f64,
    pub mean_ptm_overlap: f64,
    /// χ fidelity of preparation and measurement alone.
    pub f_encode: f64,
    pub spam: Option<SpamSetup>,
}

fn save(out: &mut OutputDir, stem: &str, r: &QptReport) -> Result<String> {
    let json = format!("{stem}.json");
    r.write_json(&out.file(&json)?)?;
    r.write_ptm_csv(&out.file(&format!("{stem}_ptm.csv"))?)?;
    Ok(json)
}

pub fn run(cfg: &ResolvedConfig, out: &mut OutputDir) -> Result<QptSummary> {
    let enc = make_encoding(cfg.encoding, cfg.cutoff)?;
    let spam = spam_setup(cfg, &enc)?;
    let setup = QptSetup {
        noise: cfg.noise_model()?,
        spam: spam.as_ref().map(|s| s.model.clone()),
        seed: Some(cfg.seed),
        ..QptSetup::new(enc)
    };
    let mode = match cfg.mode {
        Mode::Exact => QptMode::Exact,
        Mode::Sampled => QptMode::Sampled {
            shots_per_point: cfg.shots_per_point,
        },
    };
    let encode_only = run_qpt(&setup, Operation::EncodeOnly, mode)?;
    save(out, "encode_only", &encode_only)?;
    let mut points = Vec::with_capacity(cfg.thetas.len());
    for (k, &theta) in cfg.thetas.iter().enumerate() {
        let r = run_qpt(&setup, Operation::Eswap { theta }, mode)?;
        if mode == QptMode::Exact && r.chi_min_eigenvalue < -1e-6 {
            bail!(
                "theta {theta}: process matrix is not positive (min eigenvalue {:.3e})",
                r.chi_min_eigenvalue
            );
        }
        log::info!(
            "theta {theta:.4}: F_chi {:.4}, PTM overlap {:.4}",
            r.fidelity_chi,
            r.ptm_overlap
        );
        let report = save(out, &format!("theta{k}"), &r)?;
        points.push(QptPoint {
            theta,
            fidelity_chi: r.fidelity_chi,
            ptm_overlap: r.ptm_overlap,
            chi_min_eigenvalue: r.chi_min_eigenvalue,
            report,
        });
    }
    let n = points.len() as f64;
    let summary = QptSummary {
        encoding: cfg.encoding.to_string(),
        cutoff: cfg.cutoff,
        mode,
        mean_fidelity_chi: points.iter().map(|p| p.fidelity_chi).sum::<f64>() / n,
        mean_ptm_overlap: points.iter().map(|p| p.ptm_overlap).sum::<f64>() / n,
        f_encode: encode_only.fidelity_chi,
        points,
        spam,
    };
    ensure_finite(
        "qpt",
        &[summary.mean_fidelity_chi, summary.mean_ptm_overlap, summary.f_encode],
    )?;
    out.write_json("summary.json", &summary)?;
    Ok(summary)
}
