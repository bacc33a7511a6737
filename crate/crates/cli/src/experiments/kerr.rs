//! Self-Kerr distortion of the entangled coherent state produced by
//! eSWAP(π/4) on |−α⟩|α⟩.

use std::f64::consts::FRAC_PI_4;

use anyhow::Result;
use eswap_core::circuits::{eswap_ideal, T_BS};
use eswap_core::dynamics::kerr_unitary;
use eswap_core::encodings::make_encoding;
use eswap_core::fockspace::{state_fidelity, ModeLabel};
use eswap_core::tomography::{Plane, WignerGrid, WignerNorm};
use serde::{Deserialize, Serialize};

use super::{ensure_finite, write_grid};
use crate::config::ResolvedConfig;
use crate::manifest::OutputDir;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KerrSummary {
    pub alpha: f64,
    pub cutoff: usize,
    /// K/2π for Alice and Bob, in kHz.
    pub kerr_khz: [f64; 2],
    pub duration_us: f64,
    /// Fidelity of the Kerr-evolved state to the undistorted one.
    pub fidelity: f64,
    /// Largest pointwise change on the Re–Re plane (parity units).
    pub max_plane_change: f64,
}

/// Kerr acts for two beamsplitter durations.
pub const KERR_DURATION: f64 = 2.0 * T_BS;

pub fn run(cfg: &ResolvedConfig, out: &mut OutputDir) -> Result<KerrSummary> {
    let alpha = match cfg.encoding {
        eswap_core::encodings::EncodingKind::Coherent { alpha } => alpha,
        other => anyhow::bail!("kerr needs the coherent encoding, got {other}"),
    };
    let enc = make_encoding(cfg.encoding, cfg.cutoff)?;
    let (a, b) = (enc.mode(ModeLabel::Alice), enc.mode(ModeLabel::Bob));
    let input = enc.encode_two_qubit("01")?;
    let clean = eswap_ideal(FRAC_PI_4, a, b)?.apply(&input)?.to_density();
    let noise = cfg.noise_model()?;
    let u = kerr_unitary(noise.kerr_alice, noise.kerr_bob, KERR_DURATION, a, b)?;
    let distorted = u.conjugate(&clean)?;
    let fidelity = state_fidelity(&distorted, &clean)?;

    let pts = WignerGrid::joint_plane(Plane::ReRe, cfg.grid.n, cfg.grid.extent);
    let g0 = WignerGrid::evaluate(&clean, &pts, WignerNorm::TwoOverPi)?;
    let g1 = WignerGrid::evaluate(&distorted, &pts, WignerNorm::TwoOverPi)?;
    let max_plane_change = g0
        .parity_values()
        .iter()
        .zip(g1.parity_values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    write_grid(out, "grids/no_kerr_rere.csv", &g0)?;
    write_grid(out, "grids/kerr_rere.csv", &g1)?;
    let imim = WignerGrid::joint_plane(Plane::ImIm, cfg.grid.n, cfg.grid.extent);
    write_grid(out, "grids/no_kerr_imim.csv", &WignerGrid::evaluate(&clean, &imim, WignerNorm::TwoOverPi)?)?;
    write_grid(out, "grids/kerr_imim.csv", &WignerGrid::evaluate(&distorted, &imim, WignerNorm::TwoOverPi)?)?;

    let to_khz = |k: f64| k / (2.0 * std::f64::consts::PI * 1e3);
    let summary = KerrSummary {
        alpha,
        cutoff: cfg.cutoff,
        kerr_khz: [to_khz(noise.kerr_alice), to_khz(noise.kerr_bob)],
        duration_us: KERR_DURATION * 1e6,
        fidelity,
        max_plane_change,
    };
    ensure_finite("kerr", &[fidelity, max_plane_change])?;
    out.write_json("summary.json", &summary)?;
    Ok(summary)
}
