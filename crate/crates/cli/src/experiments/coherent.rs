//! Coherent-state encoding: θ sweep of the logical correlators, the
//! sixteen-bar data, joint Wigner planes and the direct fidelity.

use std::f64::consts::FRAC_PI_2;

use anyhow::{Context, Result};
use eswap_core::circuits::eswap_ideal;
use eswap_core::dynamics::{Channel, Sector};
use eswap_core::encodings::{
    correlators, direct_fidelity_estimate, fit_harmonic, make_encoding, theta_sweep, CorrelatorSet,
    HarmonicFit, LogicalEncoding, SweepRow, PAULI_LABELS,
};
use eswap_core::fockspace::linalg::hermitize;
use eswap_core::fockspace::DensityMatrix;
use eswap_core::processtomo::SpamModel;
use eswap_core::tomography::{
    pauli_points_plan, sample_parity_shots, Plane, WignerGrid, WignerNorm,
};
use serde::{Deserialize, Serialize};

use super::{ensure_finite, eswap_channel, fmt, measured_joint_grid, prepare, spam_setup, write_grid, SpamSetup};
use crate::config::{Mode, ResolvedConfig};
use crate::manifest::OutputDir;

/// Logical input of every sweep: `|−α⟩_A |α⟩_B`.
pub const SWEEP_INPUT: &str = "01";

/// Peak-to-peak half amplitude of the parity values on the Im–Im plane.
/// Coherent-state populations at `±α` are exponentially small there, so
/// the value is dominated by interference between the two branches.
pub fn fringe_contrast(grid: &WignerGrid) -> f64 {
    let v = grid.parity_values();
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    0.5 * (max - min)
}

/// Population of the logical |10⟩ state from the correlators.
pub fn transfer_population(c: &CorrelatorSet) -> f64 {
    0.25 * (c.get("II") - c.get("ZI") + c.get("IZ") - c.get("ZZ"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFits {
    pub xy: HarmonicFit,
    pub yx: HarmonicFit,
    pub iz: HarmonicFit,
    pub zi: HarmonicFit,
    /// Largest deviation of ⟨II⟩ and ⟨ZZ⟩ from their θ = first value.
    pub ii_zz_spread: f64,
    /// Largest `|⟨IZ⟩ + ⟨ZI⟩|`.
    pub iz_zi_antisymmetry: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaPoint {
    pub theta: f64,
    pub ideal: CorrelatorSet,
    pub measured: CorrelatorSet,
    pub dfe_ideal: f64,
    pub dfe_measured: f64,
    pub transfer_ideal: f64,
    pub transfer_measured: f64,
    pub fringe_contrast_ideal: f64,
    pub fringe_contrast_measured: f64,
    /// Weight dropped when the input was cut to the simulated sector.
    pub truncated_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherentSummary {
    pub alpha: f64,
    pub cutoff: usize,
    pub sweep: Vec<SweepRow>,
    pub fits: SweepFits,
    pub points: Vec<ThetaPoint>,
    /// Noiseless DFE at θ = π/4 (the ceiling set by the encoding).
    pub dfe_ceiling: f64,
    /// Measured DFE at θ = π/4, if that angle was run.
    pub dfe: Option<f64>,
    pub spam: Option<SpamSetup>,
}

/// Noiseless correlators of eSWAP(θ)|01⟩ over `thetas`.
pub fn ideal_sweep(enc: &LogicalEncoding, thetas: &[f64]) -> Result<Vec<SweepRow>> {
    let (a, b) = (enc.mode(eswap_core::ModeLabel::Alice), enc.mode(eswap_core::ModeLabel::Bob));
    Ok(theta_sweep(enc, SWEEP_INPUT, thetas, |t, rho| {
        eswap_ideal(t, a, b)?.conjugate(rho)
    })?)
}

pub fn fit_sweep(rows: &[SweepRow]) -> Result<SweepFits> {
    let th: Vec<f64> = rows.iter().map(|r| r.theta).collect();
    let col = |f: fn(&SweepRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let spread = rows
        .iter()
        .map(|r| (r.ii - rows[0].ii).abs().max((r.zz - rows[0].zz).abs()))
        .fold(0.0, f64::max);
    let anti = rows.iter().map(|r| (r.iz + r.zi).abs()).fold(0.0, f64::max);
    Ok(SweepFits {
        xy: fit_harmonic(&th, &col(|r| r.xy))?,
        yx: fit_harmonic(&th, &col(|r| r.yx))?,
        iz: fit_harmonic(&th, &col(|r| r.iz))?,
        zi: fit_harmonic(&th, &col(|r| r.zi))?,
        ii_zz_spread: spread,
        iz_zi_antisymmetry: anti,
    })
}

/// Correlators as read out through the sixteen-point plan.
fn plan_correlators(
    rho: &DensityMatrix,
    enc: &LogicalEncoding,
    spam: Option<&SpamModel>,
    cfg: &ResolvedConfig,
    seed: u64,
) -> Result<CorrelatorSet> {
    let plan = pauli_points_plan(enc)?;
    let values: Vec<f64> = match cfg.mode {
        Mode::Exact => {
            let c = spam.map(|s| s.joint_contrast()).unwrap_or(1.0);
            WignerGrid::evaluate(rho, &plan.points, WignerNorm::Parity)?
                .values
                .into_iter()
                .map(|v| v * c)
                .collect()
        }
        Mode::Sampled => {
            let flips = spam.map(|s| s.effective_flip()).unwrap_or([0.0, 0.0]);
            sample_parity_shots(rho, &plan.points, cfg.shots_per_point, flips, Some(seed))?
                .joint_means()
                .into_iter()
                .map(|(m, _)| m)
                .collect()
        }
    };
    Ok(plan.correlators(&values)?)
}

pub fn run(cfg: &ResolvedConfig, out: &mut OutputDir) -> Result<CoherentSummary> {
    let alpha = match cfg.encoding {
        eswap_core::encodings::EncodingKind::Coherent { alpha } => alpha,
        other => anyhow::bail!("coherent-sweep needs the coherent encoding, got {other}"),
    };
    let enc = make_encoding(cfg.encoding, cfg.cutoff)?;
    let n = cfg.sweep_points;
    let dense: Vec<f64> = (0..n)
        .map(|k| -FRAC_PI_2 + std::f64::consts::PI * k as f64 / (n - 1) as f64)
        .collect();
    let sweep = ideal_sweep(&enc, &dense)?;
    let fits = fit_sweep(&sweep)?;
    let rows: Vec<Vec<String>> = sweep
        .iter()
        .map(|r| [r.theta, r.ii, r.zz, r.iz, r.zi, r.xy, r.yx].map(fmt).to_vec())
        .collect();
    out.write_csv("sweep.csv", &["theta", "II", "ZZ", "IZ", "ZI", "XY", "YX"], &rows)?;

    let spam = spam_setup(cfg, &enc)?;
    let model = spam.as_ref().map(|s| &s.model);
    let noise = cfg.noise_model()?;
    let space = enc.two_mode_space();
    let (a, b) = (space[0], space[1]);
    let sector = Sector::faithful(&space);
    let input = enc.encode_two_qubit(SWEEP_INPUT)?.to_density();
    let (n_grid, ext) = (cfg.grid.n, cfg.grid.extent);

    let mut points = Vec::with_capacity(cfg.thetas.len());
    let mut bars = Vec::new();
    let mut noisy_rows = Vec::new();
    for (k, &theta) in cfg.thetas.iter().enumerate() {
        let ideal_rho = eswap_ideal(theta, a, b)?.conjugate(&input)?;
        let ideal = correlators(&ideal_rho, &enc)?;
        let prepared = prepare(&input, model)?;
        let (cut, lost) = sector.truncate(&prepared.matrix);
        let channel = eswap_channel(theta, a, b, &noise, model)?;
        let noisy = DensityMatrix::from_raw(
            hermitize(&channel.apply_matrix(&cut).with_context(|| format!("theta {theta}"))?),
            space.clone(),
        );
        let seed = cfg.seed.wrapping_add(100 * k as u64);
        let measured = plan_correlators(&noisy, &enc, model, cfg, seed)?;

        let mut fringe = [0.0; 2];
        for (j, (rho, m)) in [(&ideal_rho, None), (&noisy, model)].into_iter().enumerate() {
            let tag = if j == 0 { "ideal" } else { "measured" };
            for (plane, pname) in [(Plane::ReRe, "rere"), (Plane::ImIm, "imim")] {
                let pts = WignerGrid::joint_plane(plane, n_grid, ext);
                let g = match m {
                    None => WignerGrid::evaluate(rho, &pts, WignerNorm::TwoOverPi)?,
                    Some(_) => measured_joint_grid(rho, &pts, m, cfg, seed + 1 + j as u64)?,
                };
                if plane == Plane::ImIm {
                    fringe[j] = fringe_contrast(&g);
                }
                write_grid(out, &format!("grids/theta{k}_{tag}_{pname}.csv"), &g)?;
            }
        }
        for (i, label) in PAULI_LABELS.iter().enumerate() {
            bars.push(vec![
                fmt(theta),
                label.to_string(),
                fmt(ideal.values[i]),
                fmt(measured.values[i]),
            ]);
        }
        let row = eswap_core::encodings::SweepRow::from_correlators(theta, &measured);
        noisy_rows.push([row.theta, row.ii, row.zz, row.iz, row.zi, row.xy, row.yx].map(fmt).to_vec());
        let p = ThetaPoint {
            theta,
            dfe_ideal: direct_fidelity_estimate(&ideal),
            dfe_measured: direct_fidelity_estimate(&measured),
            transfer_ideal: transfer_population(&ideal),
            transfer_measured: transfer_population(&measured),
            fringe_contrast_ideal: fringe[0],
            fringe_contrast_measured: fringe[1],
            truncated_weight: lost,
            ideal,
            measured,
        };
        ensure_finite(
            "coherent-sweep",
            &[p.dfe_measured, p.transfer_measured, p.fringe_contrast_measured],
        )?;
        log::info!(
            "theta {theta:.4}: DFE {:.4} (ideal {:.4}), fringe {:.3}",
            p.dfe_measured,
            p.dfe_ideal,
            p.fringe_contrast_measured
        );
        points.push(p);
    }
    out.write_csv("bars.csv", &["theta", "pauli", "ideal", "measured"], &bars)?;
    out.write_csv(
        "sweep_measured.csv",
        &["theta", "II", "ZZ", "IZ", "ZI", "XY", "YX"],
        &noisy_rows,
    )?;

    let quarter = std::f64::consts::FRAC_PI_4;
    let ceiling_rho = eswap_ideal(quarter, a, b)?.conjugate(&input)?;
    let dfe_ceiling = direct_fidelity_estimate(&correlators(&ceiling_rho, &enc)?);
    let dfe = points
        .iter()
        .find(|p| (p.theta - quarter).abs() < 1e-9)
        .map(|p| p.dfe_measured);
    let summary = CoherentSummary {
        alpha,
        cutoff: cfg.cutoff,
        sweep,
        fits,
        points,
        dfe_ceiling,
        dfe,
        spam,
    };
    out.write_json("summary.json", &summary)?;
    Ok(summary)
}
