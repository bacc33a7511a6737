//! Controlled SWAP: conditional-resonance spectroscopy and three-mode
//! density matrices assembled from ancilla-conditioned cavity states.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use anyhow::Result;
use eswap_core::circuits::{cswap_ideal, Circuit, GateSpec};
use eswap_core::dynamics::{simulate_cswap_spectroscopy, Channel, NoiseModel, NoisyCircuitChannel};
use eswap_core::fockspace::linalg::{hermitize, CMat, CVec, C64};
use eswap_core::fockspace::{overlap_with_pure, DensityMatrix, MatrixRecord, ModeSpace, StateVector};
use eswap_core::processtomo::SpamModel;
use eswap_core::tomography::{
    assemble_three_mode, conditional_states, reconstruct_density_matrix, ring_points,
    sample_parity_shots, AssemblyConvention, Reconstructor, WignerGrid, WignerNorm,
};
use eswap_core::encodings::{make_encoding, EncodingKind};
use serde::{Deserialize, Serialize};

use super::{ensure_finite, fmt, prepare, spam_setup, SpamSetup};
use crate::config::{Mode, ResolvedConfig};
use crate::manifest::OutputDir;

/// Ancilla preparations, in output order.
pub const ANCILLA_INPUTS: [&str; 4] = ["g", "e", "+", "-"];

fn ancilla_vector(label: &str) -> CVec {
    let s = FRAC_1_SQRT_2;
    let (a, b) = match label {
        "g" => (1.0, 0.0),
        "e" => (0.0, 1.0),
        "+" => (s, s),
        _ => (s, -s),
    };
    CVec::from_vec(vec![C64::new(a, 0.0), C64::new(b, 0.0)])
}

/// Unitary taking |g⟩ to `v`, used to rotate a thermally mixed ancilla.
fn preparation_unitary(v: &CVec) -> CMat {
    let perp = CVec::from_vec(vec![-v[1].conj(), v[0].conj()]);
    CMat::from_columns(&[v.clone(), perp])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectroscopySummary {
    pub separation_mhz: f64,
    pub centre_g_mhz: f64,
    pub centre_e_mhz: f64,
    pub max_transfer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssembledState {
    pub ancilla: String,
    /// `⟨ψ_ideal|ρ|ψ_ideal⟩` for the assembled (measured) matrix.
    pub overlap: f64,
    pub trace: f64,
    pub hermiticity_residual: f64,
    pub matrix: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FredkinSummary {
    pub spectroscopy: SpectroscopySummary,
    pub states: Vec<AssembledState>,
    pub mean_overlap: f64,
    pub spam: Option<SpamSetup>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

fn spectroscopy(cfg: &ResolvedConfig, out: &mut OutputDir) -> Result<SpectroscopySummary> {
    let sp = &cfg.spectroscopy;
    let to_rad = 2.0 * PI * 1e6;
    let det_mhz = linspace(-sp.detuning_span_mhz, sp.detuning_span_mhz, sp.detuning_points);
    let dur_us = linspace(0.0, sp.max_duration_us, sp.duration_points);
    let detunings: Vec<f64> = det_mhz.iter().map(|d| d * to_rad).collect();
    let durations: Vec<f64> = dur_us.iter().map(|t| t * 1e-6).collect();
    let map = simulate_cswap_spectroscopy(&detunings, &durations, &cfg.noise_model()?)?;
    let mut rows = Vec::with_capacity(det_mhz.len() * dur_us.len());
    for (i, d) in det_mhz.iter().enumerate() {
        for (j, t) in dur_us.iter().enumerate() {
            rows.push(vec![
                fmt(*d),
                fmt(*t),
                fmt(map.transfer_g[i][j]),
                fmt(map.transfer_e[i][j]),
            ]);
        }
    }
    out.write_csv(
        "chevron.csv",
        &["detuning_mhz", "duration_us", "transfer_g", "transfer_e"],
        &rows,
    )?;
    let (sg, se) = map.swap_spectra();
    let rows: Vec<Vec<String>> = det_mhz
        .iter()
        .zip(sg.iter().zip(&se))
        .map(|(d, (g, e))| vec![fmt(*d), fmt(*g), fmt(*e)])
        .collect();
    out.write_csv("swap_spectra.csv", &["detuning_mhz", "transfer_g", "transfer_e"], &rows)?;
    let (cg, ce) = map.resonance_centres()?;
    Ok(SpectroscopySummary {
        separation_mhz: map.separation()? / to_rad,
        centre_g_mhz: cg / to_rad,
        centre_e_mhz: ce / to_rad,
        max_transfer: map.max_transfer(),
    })
}

/// The four conditional cavity states as the tomography would report
/// them: ancilla readout errors mix each projection with its
/// complement, and the joint parity contrast scales the trace-free
/// reconstruction.
fn measured_conditionals(
    rho: &DensityMatrix,
    spam: Option<&SpamModel>,
    cfg: &ResolvedConfig,
    seed: u64,
) -> Result<[DensityMatrix; 4]> {
    let cond = conditional_states(rho, AssemblyConvention::XY)?;
    let cavities = rho.space[1..].to_vec();
    let reduced = eswap_core::dynamics::AncillaBranch::Trace.reduce(&rho.matrix);
    let (e, c) = match spam {
        Some(s) => (s.readout_error[0], s.joint_contrast()),
        None => (0.0, 1.0),
    };
    let mut out = Vec::with_capacity(4);
    for (k, d) in cond.iter().enumerate() {
        let mixed = d.matrix.map(|z| z * (1.0 - 2.0 * e)) + reduced.map(|z| z * e);
        let m = match cfg.mode {
            Mode::Exact => mixed.map(|z| z * c),
            Mode::Sampled => {
                let weight = mixed.trace().re;
                let state = DensityMatrix::from_raw(hermitize(&mixed), cavities.clone());
                let ring = ring_points(2, 1.0);
                let pts = WignerGrid::product(&ring, &ring);
                let flips = spam.map(|s| s.effective_flip()).unwrap_or([0.0, 0.0]);
                let rec = sample_parity_shots(&state, &pts, cfg.shots_per_point, flips, Some(seed + k as u64))?;
                let cutoff = cavities[0].cutoff;
                let support = (0..cutoff * cutoff)
                    .filter(|i| i / cutoff + i % cutoff <= 1)
                    .collect();
                let opts = Reconstructor {
                    support: Some(support),
                    ..Reconstructor::default()
                };
                let r = reconstruct_density_matrix(&rec.to_grid(WignerNorm::Parity), &cavities, &opts)?;
                r.rho.matrix.map(|z| z * weight)
            }
        };
        out.push(DensityMatrix::from_raw(m, cavities.clone()));
    }
    Ok([out.remove(0), out.remove(0), out.remove(0), out.remove(0)])
}

pub fn run(cfg: &ResolvedConfig, out: &mut OutputDir) -> Result<FredkinSummary> {
    let spectroscopy = spectroscopy(cfg, out)?;

    let spaces = vec![
        ModeSpace::ancilla(),
        ModeSpace::alice(cfg.cutoff)?,
        ModeSpace::bob(cfg.cutoff)?,
    ];
    let cavities = spaces[1..].to_vec();
    let enc = make_encoding(EncodingKind::Fock, cfg.cutoff)?;
    let spam = spam_setup(cfg, &enc)?;
    let model = spam.as_ref().map(|s| &s.model);
    let circuit = Circuit::new(
        vec![GateSpec::cswap().with_duration(cfg.cswap_duration_us * 1e-6)],
        spaces.clone(),
    )?;
    // Exposure overrides describe the eSWAP sequence; the controlled SWAP
    // sees the cavities for its full duration.
    let noise = NoiseModel {
        cavity_exposure_time: None,
        kerr_exposure_time: None,
        ..cfg.noise_model()?
    };
    let channel = NoisyCircuitChannel::new(&circuit, &noise)?;
    let target_op = cswap_ideal(spaces[0], spaces[1], spaces[2])?;
    let cav_in = StateVector::basis(&cavities, &[0, 1])?;
    let cav_rho = prepare(&cav_in.to_density(), model)?;
    let anc_mixed = model.map(|s| s.ancilla_in()).unwrap_or_else(super::ground_ancilla);

    let mut states = Vec::with_capacity(4);
    for (k, label) in ANCILLA_INPUTS.iter().enumerate() {
        let v = ancilla_vector(label);
        let anc_pure = StateVector::new(v.clone(), vec![spaces[0]])?;
        let ideal = target_op.apply(&anc_pure.tensor(&cav_in)?)?;
        let u = preparation_unitary(&v);
        let anc_rho = DensityMatrix::from_raw(&u * &anc_mixed * u.adjoint(), vec![spaces[0]]);
        let rho_in = anc_rho.tensor(&cav_rho)?;
        let rho_out = DensityMatrix::from_raw(channel.apply_matrix(&rho_in.matrix)?, spaces.clone());
        let [gg, ee, pp, mm] = measured_conditionals(&rho_out, model, cfg, cfg.seed.wrapping_add(10 * k as u64))?;
        let asm = assemble_three_mode(&gg, &ee, &pp, &mm)?;
        let overlap = overlap_with_pure(&asm.rho, &ideal)?;
        let name = format!("assembled_{k}.json");
        out.write_json(&name, &MatrixRecord::from_density(&asm.rho))?;
        ensure_finite("fredkin", &[overlap])?;
        log::info!("ancilla {label}: overlap {overlap:.4}");
        states.push(AssembledState {
            ancilla: label.to_string(),
            overlap,
            trace: asm.rho.trace(),
            hermiticity_residual: asm.hermiticity_residual,
            matrix: name,
        });
    }
    let mean_overlap = states.iter().map(|s| s.overlap).sum::<f64>() / states.len() as f64;
    let summary = FredkinSummary {
        spectroscopy,
        states,
        mean_overlap,
        spam,
    };
    out.write_json("summary.json", &summary)?;
    Ok(summary)
}
