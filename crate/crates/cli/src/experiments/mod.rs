//! One module per command. Each `run` writes its artifacts into the
//! output directory and returns the summary it also saves as JSON.

pub mod budget;
pub mod coherent;
pub mod fock_demo;
pub mod fredkin;
pub mod kerr;
pub mod qpt;

use std::sync::Arc;

use anyhow::{bail, Result};
use eswap_core::circuits::compile_eswap_on;
use eswap_core::dynamics::{AncillaBranch, CavityChannel, Channel, NoiseModel, NoisyCircuitChannel};
use eswap_core::encodings::{EncodingKind, LogicalEncoding, make_encoding};
use eswap_core::fockspace::linalg::{CMat, C64};
use eswap_core::fockspace::{DensityMatrix, ModeSpace};
use eswap_core::processtomo::{calibrate_prep, SpamModel};
use eswap_core::tomography::{sample_parity_shots, GridPoint, WignerGrid, WignerNorm};
use serde::{Deserialize, Serialize};

use crate::config::{Mode, ResolvedConfig};
use crate::manifest::OutputDir;

/// Encode-only process fidelity the preparation noise is tuned to.
pub fn default_f_encode(kind: EncodingKind) -> f64 {
    match kind {
        EncodingKind::Binomial => 0.77,
        _ => 0.88,
    }
}

/// The SPAM model used by a run and how its preparation strength was set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpamSetup {
    pub model: SpamModel,
    /// Calibration target, absent when the strength was given directly.
    pub f_encode_target: Option<f64>,
    /// Encode-only fidelity reached by the calibration.
    pub f_encode: Option<f64>,
    /// Encoding the calibration ran on.
    pub calibrated_on: Option<String>,
}

/// Resolves the SPAM model, calibrating the preparation strength on
/// `enc` unless it is fixed in the config. The coherent encoding borrows
/// the Fock calibration.
pub fn spam_setup(cfg: &ResolvedConfig, enc: &LogicalEncoding) -> Result<Option<SpamSetup>> {
    let Some(base) = cfg.spam_readout() else {
        return Ok(None);
    };
    base.validate()?;
    if cfg.spam.prep_strength.is_some() {
        return Ok(Some(SpamSetup {
            model: base,
            f_encode_target: None,
            f_encode: None,
            calibrated_on: None,
        }));
    }
    let cal_enc = match enc.kind {
        EncodingKind::Coherent { .. } => make_encoding(EncodingKind::Fock, 2)?,
        _ => enc.clone(),
    };
    let target = cfg.spam.f_encode.unwrap_or_else(|| default_f_encode(cal_enc.kind));
    let (model, f) = calibrate_prep(&cal_enc, &base, target)?;
    log::info!(
        "prep strength {:.5} gives F_encode {:.4} on {}",
        model.prep_strength,
        f,
        cal_enc.kind
    );
    Ok(Some(SpamSetup {
        model,
        f_encode_target: Some(target),
        f_encode: Some(f),
        calibrated_on: Some(cal_enc.kind.to_string()),
    }))
}

pub fn ground_ancilla() -> CMat {
    let mut g = CMat::zeros(2, 2);
    g[(0, 0)] = C64::new(1.0, 0.0);
    g
}

/// Noisy eSWAP(θ) on the two cavities with the ancilla traced out.
pub fn eswap_channel(
    theta: f64,
    a: ModeSpace,
    b: ModeSpace,
    noise: &NoiseModel,
    spam: Option<&SpamModel>,
) -> Result<CavityChannel> {
    let circuit = compile_eswap_on(theta, vec![ModeSpace::ancilla(), a, b])?;
    let noisy = NoisyCircuitChannel::new(&circuit, noise)?;
    let anc = spam.map(|s| s.ancilla_in()).unwrap_or_else(ground_ancilla);
    Ok(CavityChannel::new(Arc::new(noisy), anc, AncillaBranch::Trace)?)
}

/// Two-mode state after the preparation noise of `spam`.
pub fn prepare(rho: &DensityMatrix, spam: Option<&SpamModel>) -> Result<DensityMatrix> {
    match spam {
        Some(s) if s.prep_strength > 0.0 => {
            let ch = s.prep_channel(&rho.space)?;
            Ok(DensityMatrix::from_raw(ch.apply_matrix(&rho.matrix)?, rho.space.clone()))
        }
        _ => Ok(rho.clone()),
    }
}

/// Joint Wigner values as the experiment would report them: exact
/// values scaled by the joint readout contrast, or shot averages.
pub fn measured_joint_grid(
    rho: &DensityMatrix,
    points: &[GridPoint],
    spam: Option<&SpamModel>,
    cfg: &ResolvedConfig,
    seed: u64,
) -> Result<WignerGrid> {
    match cfg.mode {
        Mode::Exact => {
            let mut g = WignerGrid::evaluate(rho, points, WignerNorm::TwoOverPi)?;
            let c = spam.map(|s| s.joint_contrast()).unwrap_or(1.0);
            g.values.iter_mut().for_each(|v| *v *= c);
            Ok(g)
        }
        Mode::Sampled => {
            let flips = spam.map(|s| s.effective_flip()).unwrap_or([0.0, 0.0]);
            let rec = sample_parity_shots(rho, points, cfg.shots_per_point, flips, Some(seed))?;
            Ok(rec.to_grid(WignerNorm::TwoOverPi))
        }
    }
}

pub fn write_grid(out: &mut OutputDir, name: &str, grid: &WignerGrid) -> Result<()> {
    let path = out.file(name)?;
    grid.write_csv(&path)?;
    Ok(())
}

/// Fails if any of the named values is NaN or infinite.
pub fn ensure_finite(what: &str, values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        bail!("{what}: non-finite result");
    }
    Ok(())
}

pub fn fmt(x: f64) -> String {
    format!("{x}")
}
