use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spam::SpamModel;
use super::{fit_ptm, pauli_vector, process_fidelity_chi, ptm_overlap, ChiMatrix, PauliTransferMatrix};
use crate::circuits::compile_eswap_on;
use crate::dynamics::{AncillaBranch, CavityChannel, Channel, NoiseModel, NoisyCircuitChannel};
use crate::encodings::{CorrelatorSet, EncodingKind, LogicalEncoding, LogicalLabel};
use crate::error::{Error, Result};
use crate::fockspace::linalg::{self, CMat, CVec, C64, I};
use crate::fockspace::{DensityMatrix, ModeLabel, ModeSpace};
use crate::tomography::{
    pauli_points_plan, reconstruct_density_matrix, ring_points, sample_parity_shots, GridPoint,
    Reconstructor, WignerGrid, WignerNorm,
};

/// Recorded next to every overlap value.
pub const OVERLAP_DEFINITION: &str = "Tr(R_ideal^T R_meas) / Tr(R_ideal^T R_ideal)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Operation {
    Eswap { theta: f64 },
    /// Preparation and measurement only.
    EncodeOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum QptMode {
    /// Exact expectation values of the output states.
    Exact,
    /// Joint-parity shots per phase-space point, then reconstruction.
    Sampled { shots_per_point: usize },
}

/// Everything fixed across one tomography run.
#[derive(Debug, Clone)]
pub struct QptSetup {
    pub encoding: LogicalEncoding,
    pub noise: NoiseModel,
    pub spam: Option<SpamModel>,
    pub seed: Option<u64>,
    /// The coherent encoding is only run when this is set.
    pub allow_coherent: bool,
    /// Outer ring radius of the per-cavity sampling points (Fock).
    pub sampled_radius: f64,
}

impl QptSetup {
    /// Noiseless, no SPAM, no seed.
    pub fn new(encoding: LogicalEncoding) -> Self {
        Self {
            encoding,
            noise: NoiseModel::noiseless(),
            spam: None,
            seed: None,
            allow_coherent: false,
            sampled_radius: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub label: String,
    /// Trace of the output inside the code space before measurement.
    pub logical_population: f64,
    /// Reconstruction misfit (0 in exact mode).
    pub residual: f64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QptReport {
    pub operation: Operation,
    pub encoding: EncodingKind,
    pub cutoff: usize,
    pub mode: QptMode,
    pub ptm: PauliTransferMatrix,
    pub ideal_ptm: PauliTransferMatrix,
    pub chi: ChiMatrix,
    /// `Re Tr(χ_ideal χ)`.
    pub fidelity_chi: f64,
    pub fidelity_chi_imag: f64,
    pub ptm_overlap: f64,
    pub overlap_definition: String,
    pub chi_min_eigenvalue: f64,
    pub chi_trace: f64,
    /// Frobenius misfit of the least-squares PTM fit.
    pub fit_residual: f64,
    pub inputs: Vec<InputRecord>,
    pub seed: Option<u64>,
    pub spam: Option<SpamModel>,
}

impl QptReport {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    /// PTM as a 16 × 16 CSV with Pauli labels on both axes.
    pub fn write_ptm_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["out\\in".to_string()];
        header.extend(crate::encodings::PAULI_LABELS.iter().map(|s| s.to_string()));
        w.write_record(&header)?;
        for i in 0..16 {
            let mut row = vec![crate::encodings::PAULI_LABELS[i].to_string()];
            row.extend((0..16).map(|j| format!("{}", self.ptm.entries[(i, j)])));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `cos θ I + i sin θ SWAP` on two logical qubits.
pub fn eswap_logical(theta: f64) -> CMat {
    let mut s = CMat::zeros(4, 4);
    for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        s[(i, j)] = C64::new(1.0, 0.0);
    }
    CMat::identity(4, 4).map(|z| z * theta.cos()) + s.map(|z| z * I * theta.sin())
}

pub fn ideal_ptm(op: Operation) -> PauliTransferMatrix {
    match op {
        Operation::Eswap { theta } => PauliTransferMatrix::from_unitary(&eswap_logical(theta)),
        Operation::EncodeOnly => PauliTransferMatrix::identity(),
    }
}

/// The sixteen product inputs `{0, 1, +, +i}⊗2`, Alice label first.
pub fn qpt_inputs() -> Vec<(LogicalLabel, LogicalLabel)> {
    let mut out = Vec::with_capacity(16);
    for a in LogicalLabel::QPT_INPUTS {
        for b in LogicalLabel::QPT_INPUTS {
            out.push((a, b));
        }
    }
    out
}

fn logical_input(a: LogicalLabel, b: LogicalLabel) -> CMat {
    let qubit = |l: LogicalLabel| {
        let v = CVec::from_vec(l.coefficients().to_vec());
        let n = v.norm();
        v / C64::new(n, 0.0)
    };
    let psi = qubit(a).kronecker(&qubit(b));
    &psi * psi.adjoint()
}

fn operation_channel(setup: &QptSetup, op: Operation) -> Result<Option<Arc<dyn Channel>>> {
    match op {
        Operation::EncodeOnly => Ok(None),
        Operation::Eswap { theta } => {
            let enc = &setup.encoding;
            let spaces = vec![
                ModeSpace::ancilla(),
                enc.mode(ModeLabel::Alice),
                enc.mode(ModeLabel::Bob),
            ];
            let circuit = compile_eswap_on(theta, spaces)?;
            let noisy = NoisyCircuitChannel::new(&circuit, &setup.noise)?;
            let anc = setup.spam.as_ref().map(|s| s.ancilla_in()).unwrap_or_else(|| {
                let mut g = CMat::zeros(2, 2);
                g[(0, 0)] = C64::new(1.0, 0.0);
                g
            });
            Ok(Some(Arc::new(CavityChannel::new(
                Arc::new(noisy),
                anc,
                AncillaBranch::Trace,
            )?)))
        }
    }
}

/// Basis indices with `n_A + n_B ≤ nmax` in a `cutoff × cutoff` space.
fn low_photon_support(cutoff: usize, nmax: usize) -> Vec<usize> {
    (0..cutoff * cutoff)
        .filter(|i| i / cutoff + i % cutoff <= nmax)
        .collect()
}

enum Readout {
    Exact,
    FockGrid {
        points: Vec<GridPoint>,
        support: Vec<usize>,
        shots: usize,
    },
    PauliPlan {
        plan: crate::tomography::PauliPlan,
        shots: usize,
    },
}

fn readout(setup: &QptSetup, mode: QptMode) -> Result<Readout> {
    let shots = match mode {
        QptMode::Exact => return Ok(Readout::Exact),
        QptMode::Sampled { shots_per_point } => shots_per_point,
    };
    if setup.seed.is_none() {
        return Err(Error::SeedRequired);
    }
    let enc = &setup.encoding;
    match enc.kind {
        EncodingKind::Fock => {
            if enc.cutoff < 3 {
                return Err(Error::UnderdeterminedGrid(
                    "Fock sampling needs cutoff >= 3".into(),
                ));
            }
            let ring = ring_points(2, setup.sampled_radius);
            Ok(Readout::FockGrid {
                points: WignerGrid::product(&ring, &ring),
                support: low_photon_support(enc.cutoff, 2),
                shots,
            })
        }
        EncodingKind::Coherent { .. } => Ok(Readout::PauliPlan {
            plan: pauli_points_plan(enc)?,
            shots,
        }),
        EncodingKind::Binomial => Err(Error::EncodingUnsupported(
            "binomial (sampled mode); use exact mode".into(),
        )),
    }
}

struct Measured {
    pauli: [f64; 16],
    population: f64,
    residual: f64,
    seed: Option<u64>,
}

fn measure(
    setup: &QptSetup,
    ro: &Readout,
    rho: &CMat,
    contrast: f64,
    flips: [f64; 2],
    seed: Option<u64>,
) -> Result<Measured> {
    let enc = &setup.encoding;
    let logical = enc.project(rho);
    let population = logical.trace().re;
    let space = enc.two_mode_space();
    match ro {
        Readout::Exact => {
            let mut pauli = pauli_vector(&logical);
            pauli.iter_mut().for_each(|v| *v *= contrast);
            Ok(Measured {
                pauli,
                population,
                residual: 0.0,
                seed: None,
            })
        }
        Readout::FockGrid {
            points,
            support,
            shots,
        } => {
            let state = DensityMatrix::from_raw(linalg::hermitize(rho), space.clone());
            let rec = sample_parity_shots(&state, points, *shots, flips, seed)?;
            let grid = rec.to_grid(WignerNorm::Parity);
            let opts = Reconstructor {
                support: Some(support.clone()),
                ..Reconstructor::default()
            };
            let r = reconstruct_density_matrix(&grid, &space, &opts)?;
            Ok(Measured {
                pauli: pauli_vector(&enc.project(&r.rho.matrix)),
                population,
                residual: r.residual,
                seed,
            })
        }
        Readout::PauliPlan { plan, shots } => {
            let state = DensityMatrix::from_raw(linalg::hermitize(rho), space);
            let rec = sample_parity_shots(&state, &plan.points, *shots, flips, seed)?;
            let values: Vec<f64> = rec.joint_means().into_iter().map(|(m, _)| m).collect();
            let c: CorrelatorSet = plan.correlators(&values)?;
            Ok(Measured {
                pauli: c.values,
                population,
                residual: 0.0,
                seed,
            })
        }
    }
}

/// Runs process tomography of `op`: sixteen product inputs are prepared
/// (through the preparation noise, if any), sent through the operation,
/// read out and reduced to Pauli vectors; the PTM is the least-squares
/// solution over all inputs and χ follows by linear inversion.
pub fn run_qpt(setup: &QptSetup, op: Operation, mode: QptMode) -> Result<QptReport> {
    let enc = &setup.encoding;
    if matches!(enc.kind, EncodingKind::Coherent { .. }) && !setup.allow_coherent {
        return Err(Error::EncodingUnsupported(format!(
            "{} for process tomography (set allow_coherent)",
            enc.kind
        )));
    }
    if let Some(s) = &setup.spam {
        s.validate()?;
    }
    let space = enc.two_mode_space();
    let prep = match &setup.spam {
        Some(s) if s.prep_strength > 0.0 => Some(s.prep_channel(&space)?),
        _ => None,
    };
    let channel = operation_channel(setup, op)?;
    let ro = readout(setup, mode)?;
    let (contrast, flips) = match &setup.spam {
        Some(s) => (s.joint_contrast(), s.effective_flip()),
        None => (1.0, [0.0, 0.0]),
    };
    let inputs = qpt_inputs();
    let results = inputs
        .par_iter()
        .enumerate()
        .map(|(k, &(a, b))| -> Result<(CMat, Measured)> {
            let rho_l = logical_input(a, b);
            let mut rho = enc.lift(&rho_l);
            if let Some(p) = &prep {
                rho = p.apply_matrix(&rho)?;
            }
            if let Some(ch) = &channel {
                rho = ch.apply_matrix(&rho)?;
            }
            let seed = setup.seed.map(|s| s.wrapping_add(k as u64));
            let m = measure(setup, &ro, &rho, contrast, flips, seed)?;
            Ok((rho_l, m))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut p_in = DMatrix::<f64>::zeros(16, 16);
    let mut p_out = DMatrix::<f64>::zeros(16, 16);
    for (k, (rho_l, m)) in results.iter().enumerate() {
        let v = pauli_vector(rho_l);
        for i in 0..16 {
            p_in[(i, k)] = v[i];
            p_out[(i, k)] = m.pauli[i];
        }
    }
    let mut ptm = fit_ptm(&p_in, &p_out)?;
    ptm.encoding = Some(enc.kind);
    let fit_residual = (&ptm.entries * &p_in - &p_out).norm();
    let ideal = ideal_ptm(op);
    let chi = ptm.to_chi();
    let (fidelity_chi, fidelity_chi_imag) = process_fidelity_chi(&chi, &ideal.to_chi());
    let chi_min_eigenvalue = chi.min_eigenvalue();
    if chi_min_eigenvalue < -1e-6 {
        log::warn!("process matrix has a negative eigenvalue {chi_min_eigenvalue:.3e}");
    }
    let records = inputs
        .iter()
        .zip(&results)
        .map(|(&(a, b), (_, m))| InputRecord {
            label: format!("{}{}", a.symbol(), b.symbol()),
            logical_population: m.population,
            residual: m.residual,
            seed: m.seed,
        })
        .collect();
    Ok(QptReport {
        operation: op,
        encoding: enc.kind,
        cutoff: enc.cutoff,
        mode,
        ptm_overlap: ptm_overlap(&ptm, &ideal),
        overlap_definition: OVERLAP_DEFINITION.to_string(),
        chi_trace: chi.trace(),
        ptm,
        ideal_ptm: ideal,
        chi,
        fidelity_chi,
        fidelity_chi_imag,
        chi_min_eigenvalue,
        fit_residual,
        inputs: records,
        seed: setup.seed,
        spam: setup.spam.clone(),
    })
}
