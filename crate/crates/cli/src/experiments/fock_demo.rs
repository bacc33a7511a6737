//! |0⟩_A|3⟩_B through eSWAP(π/4): single-mode and joint Wigner grids
//! and the photon-number parities at the origin.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use anyhow::Result;
use eswap_core::circuits::eswap_ideal;
use eswap_core::dynamics::Channel;
use eswap_core::encodings::{make_encoding, EncodingKind};
use eswap_core::fockspace::linalg::C64;
use eswap_core::fockspace::{
    overlap_with_pure, parity_operator, partial_trace, tensor, DensityMatrix, ModeLabel, ModeSpace,
    StateVector,
};
use eswap_core::processtomo::SpamModel;
use eswap_core::tomography::{sample_parity_shots, GridPoint, Plane, WignerGrid, WignerNorm};
use serde::{Deserialize, Serialize};

use super::{ensure_finite, eswap_channel, measured_joint_grid, prepare, spam_setup, write_grid, SpamSetup};
use crate::config::{Mode, ResolvedConfig};
use crate::manifest::OutputDir;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parities {
    pub p_a: f64,
    pub p_b: f64,
    pub p_ab: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockDemoSummary {
    pub theta: f64,
    pub cutoff: usize,
    pub initial_ideal: Parities,
    pub final_ideal: Parities,
    /// As read out, including preparation noise and readout contrast.
    pub initial_measured: Parities,
    pub final_measured: Parities,
    /// Overlap of the noiseless output with `(|0,3⟩ + i|3,0⟩)/√2`.
    pub ideal_target_fidelity: f64,
    /// Same for the noisy output state, before readout.
    pub noisy_target_fidelity: f64,
    pub spam: Option<SpamSetup>,
}

fn exact_parities(rho: &DensityMatrix, spam: Option<&SpamModel>) -> Result<Parities> {
    let (a, b) = (rho.space[0], rho.space[1]);
    let pa = tensor(&[parity_operator(a), eswap_core::fockspace::Operator::identity(&[b])?])?;
    let pb = tensor(&[eswap_core::fockspace::Operator::identity(&[a])?, parity_operator(b)])?;
    let pab = tensor(&[parity_operator(a), parity_operator(b)])?;
    let (ca, cb) = match spam {
        Some(s) => (s.mode_contrast(0), s.mode_contrast(1)),
        None => (1.0, 1.0),
    };
    Ok(Parities {
        p_a: ca * pa.expectation(rho)?.re,
        p_b: cb * pb.expectation(rho)?.re,
        p_ab: ca * cb * pab.expectation(rho)?.re,
    })
}

fn measured_parities(
    rho: &DensityMatrix,
    spam: Option<&SpamModel>,
    cfg: &ResolvedConfig,
    seed: u64,
) -> Result<Parities> {
    match cfg.mode {
        Mode::Exact => exact_parities(rho, spam),
        Mode::Sampled => {
            let flips = spam.map(|s| s.effective_flip()).unwrap_or([0.0, 0.0]);
            let origin = [GridPoint::joint(C64::new(0.0, 0.0), C64::new(0.0, 0.0))];
            let rec = sample_parity_shots(rho, &origin, cfg.shots_per_point, flips, Some(seed))?;
            let n = rec.shots.len() as f64;
            let mean = |f: &dyn Fn(&eswap_core::tomography::Shot) -> i8| {
                rec.shots.iter().map(|s| f(s) as f64).sum::<f64>() / n
            };
            Ok(Parities {
                p_a: mean(&|s| s.parity_a),
                p_b: mean(&|s| s.parity_b),
                p_ab: mean(&|s| s.joint()),
            })
        }
    }
}

fn single_grids(
    rho: &DensityMatrix,
    points: &[GridPoint],
    spam: Option<&SpamModel>,
) -> Result<[WignerGrid; 2]> {
    let mut out = Vec::with_capacity(2);
    for (k, label) in [ModeLabel::Alice, ModeLabel::Bob].into_iter().enumerate() {
        let reduced = partial_trace(rho, &[label])?;
        let mut g = WignerGrid::evaluate(&reduced, points, WignerNorm::TwoOverPi)?;
        let c = spam.map(|s| s.mode_contrast(k)).unwrap_or(1.0);
        g.values.iter_mut().for_each(|v| *v *= c);
        out.push(g);
    }
    Ok([out.remove(0), out.remove(0)])
}

pub fn run(cfg: &ResolvedConfig, out: &mut OutputDir) -> Result<FockDemoSummary> {
    let theta = FRAC_PI_4;
    let a = ModeSpace::alice(cfg.cutoff)?;
    let b = ModeSpace::bob(cfg.cutoff)?;
    let psi0 = StateVector::basis(&[a, b], &[0, 3])?;
    let u = eswap_ideal(theta, a, b)?;
    let psi1 = u.apply(&psi0)?;
    let target = StateVector::basis(&[a, b], &[0, 3])?
        .add(&StateVector::basis(&[a, b], &[3, 0])?.scaled(C64::new(0.0, 1.0)))?
        .scaled(C64::new(FRAC_1_SQRT_2, 0.0));
    let ideal_target_fidelity = target.inner(&psi1)?.norm_sqr();

    let enc = make_encoding(EncodingKind::Fock, cfg.cutoff)?;
    let spam = spam_setup(cfg, &enc)?;
    let model = spam.as_ref().map(|s| &s.model);
    let noise = cfg.noise_model()?;
    let rho0 = prepare(&psi0.to_density(), model)?;
    let channel = eswap_channel(theta, a, b, &noise, model)?;
    let rho1 = DensityMatrix::from_raw(channel.apply_matrix(&rho0.matrix)?, vec![a, b]);
    let noisy_target_fidelity = overlap_with_pure(&rho1, &target)?;

    let summary = FockDemoSummary {
        theta,
        cutoff: cfg.cutoff,
        initial_ideal: exact_parities(&psi0.to_density(), None)?,
        final_ideal: exact_parities(&psi1.to_density(), None)?,
        initial_measured: measured_parities(&rho0, model, cfg, cfg.seed)?,
        final_measured: measured_parities(&rho1, model, cfg, cfg.seed.wrapping_add(1))?,
        ideal_target_fidelity,
        noisy_target_fidelity,
        spam: spam.clone(),
    };
    let p = |x: &Parities| [x.p_a, x.p_b, x.p_ab];
    let mut all = p(&summary.initial_measured).to_vec();
    all.extend(p(&summary.final_measured));
    all.extend([ideal_target_fidelity, noisy_target_fidelity]);
    ensure_finite("fock-demo", &all)?;

    let (n, ext) = (cfg.grid.n, cfg.grid.extent);
    let single = WignerGrid::single_plane(n, ext);
    let states = [
        ("ideal_initial", psi0.to_density(), None),
        ("ideal_final", psi1.to_density(), None),
        ("noisy_initial", rho0, model),
        ("noisy_final", rho1, model),
    ];
    let mut seed = cfg.seed.wrapping_add(2);
    for (name, rho, m) in &states {
        let [ga, gb] = single_grids(rho, &single, *m)?;
        write_grid(out, &format!("grids/{name}_alice.csv"), &ga)?;
        write_grid(out, &format!("grids/{name}_bob.csv"), &gb)?;
        for (plane, tag) in [(Plane::ReRe, "rere"), (Plane::ImIm, "imim")] {
            let pts = WignerGrid::joint_plane(plane, n, ext);
            let g = if m.is_some() {
                measured_joint_grid(rho, &pts, *m, cfg, seed)?
            } else {
                WignerGrid::evaluate(rho, &pts, WignerNorm::TwoOverPi)?
            };
            seed = seed.wrapping_add(1);
            write_grid(out, &format!("grids/{name}_{tag}.csv"), &g)?;
        }
    }
    out.write_json("summary.json", &summary)?;
    Ok(summary)
}
