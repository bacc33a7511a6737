//! Per-gate generators and the pulse schedule of a circuit.

use std::f64::consts::{FRAC_PI_2, PI};

use super::lindblad::Liouvillian;
use super::sector::Sector;
use super::{NoiseModel, ResonantBranch};
use crate::circuits::{pauli, Axis, Circuit, GateKind, GateSpec};
use crate::error::{Error, Result};
use crate::fockspace::linalg::{CMat, C64};
use crate::fockspace::{
    annihilation, embed, number, swap_operator, unflatten, ModeLabel, ModeSpace, Operator,
};

#[derive(Debug, Clone, PartialEq)]
pub struct PulseEntry {
    pub gate: GateSpec,
    pub duration: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    pub entries: Vec<PulseEntry>,
}

impl PulseSchedule {
    pub fn total_duration(&self) -> f64 {
        self.entries.iter().map(|e| e.duration).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for e in &self.entries {
            if e.duration > 0.0 && e.dt > e.duration / 50.0 * (1.0 + 1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "step {} exceeds duration/50 for a {} s gate",
                    e.dt, e.duration
                )));
            }
        }
        Ok(())
    }
}

/// Dense operators on (ancilla, Alice, Bob).
pub(crate) struct FullOps {
    pub a: CMat,
    pub b: CMat,
    pub n_a: CMat,
    pub n_b: CMat,
    pub sm: CMat,
    pub p_e: CMat,
    pub sz: CMat,
    pub id: CMat,
    pub spaces: Vec<ModeSpace>,
}

impl FullOps {
    pub fn new(spaces: &[ModeSpace]) -> Result<Self> {
        let find = |l: ModeLabel| {
            spaces
                .iter()
                .copied()
                .find(|m| m.label == l)
                .ok_or_else(|| Error::SpaceMismatch(format!("noisy simulation needs mode {l}")))
        };
        let anc = find(ModeLabel::Ancilla)?;
        let a = find(ModeLabel::Alice)?;
        let b = find(ModeLabel::Bob)?;
        let lift = |op: Operator| embed(&op, spaces).map(|o| o.matrix);
        let sm = CMat::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
        );
        let mut p_e = CMat::zeros(2, 2);
        p_e[(1, 1)] = C64::new(1.0, 0.0);
        let d = crate::fockspace::space_dim(spaces);
        Ok(Self {
            a: lift(annihilation(a))?,
            b: lift(annihilation(b))?,
            n_a: lift(number(a))?,
            n_b: lift(number(b))?,
            sm: lift(Operator::new(sm, vec![anc])?)?,
            p_e: lift(Operator::new(p_e, vec![anc])?)?,
            sz: lift(Operator::new(pauli(Axis::Z), vec![anc])?)?,
            id: CMat::identity(d, d),
            spaces: spaces.to_vec(),
        })
    }

    fn ancilla_op(&self, m: CMat) -> Result<CMat> {
        let anc = self.spaces[0];
        Ok(embed(&Operator::new(m, vec![anc])?, &self.spaces)?.matrix)
    }

    fn swap(&self) -> Result<CMat> {
        let a = self.spaces[1];
        let b = self.spaces[2];
        Ok(embed(&swap_operator(a, b)?, &self.spaces)?.matrix)
    }
}

/// One gate's worth of evolution on the restricted sector.
#[derive(Debug, Clone)]
pub(crate) struct Segment {
    pub liou: Liouvillian,
    pub duration: f64,
    pub steps: usize,
    /// Applied after the continuous evolution.
    pub post_unitary: Option<CMat>,
    /// Elementwise factors applied after the continuous evolution.
    pub post_mask: Option<Vec<f64>>,
}

pub(crate) struct SegmentScales {
    pub cavity: f64,
    pub kerr: f64,
}

/// Generator (in the frame of the resonant branch) for a gate of
/// non-zero duration.
fn gate_hamiltonian(gate: &GateSpec, ops: &FullOps, noise: &NoiseModel) -> Result<CMat> {
    let t = gate.duration;
    let mech = &noise.mechanisms;
    let c = |x: f64| C64::new(x, 0.0);
    Ok(match &gate.kind {
        GateKind::BeamSplitter { theta, phi } => {
            let g = theta / t;
            let adag_b = ops.a.adjoint() * &ops.b;
            let e = C64::from_polar(g, *phi);
            let mut h = adag_b.map(|z| z * e) + adag_b.adjoint().map(|z| z * e.conj());
            if mech.dispersive {
                let (proj, sign) = match noise.resonant_branch {
                    ResonantBranch::G => (ops.p_e.clone(), -1.0),
                    ResonantBranch::E => (&ops.id - &ops.p_e, 1.0),
                };
                h += (proj * &ops.n_b).map(|z| z * sign * noise.chi_qb_bob);
            }
            h
        }
        GateKind::Cps { .. } => {
            let eps = if mech.cps_miscalibration {
                noise.cps_phase_error
            } else {
                0.0
            };
            (&ops.p_e * &ops.n_b).map(|z| z * c(-PI * (1.0 + eps) / t))
        }
        GateKind::AncillaRotation { axis, angle } => {
            let err = if mech.rotation_error {
                noise.rotation_error
            } else {
                0.0
            };
            let mut s = pauli(*axis);
            if *axis == Axis::Hadamard {
                s -= CMat::identity(2, 2);
            }
            let w = angle * (1.0 + err) / (2.0 * t);
            ops.ancilla_op(s.map(|z| z * w))?
        }
        GateKind::Swap { .. } => (&ops.id - ops.swap()?).map(|z| z * (FRAC_PI_2 / t)),
        GateKind::CustomUnitary { name, matrix: None } if name == "cswap" => {
            (&ops.p_e * (&ops.id - ops.swap()?)).map(|z| z * (FRAC_PI_2 / t))
        }
        GateKind::CustomUnitary { .. } => CMat::zeros(ops.id.nrows(), ops.id.ncols()),
    })
}

fn kerr_hamiltonian(ops: &FullOps, noise: &NoiseModel) -> CMat {
    let nn = |n: &CMat| n * (n - &ops.id);
    nn(&ops.n_a).map(|z| z * 0.5 * noise.kerr_alice) + nn(&ops.n_b).map(|z| z * 0.5 * noise.kerr_bob)
}

pub(crate) fn collapse_ops(ops: &FullOps, noise: &NoiseModel, cavity_scale: f64) -> Vec<CMat> {
    let m = &noise.mechanisms;
    let mut out = Vec::new();
    if m.cavity_loss {
        out.push(ops.a.map(|z| z * (cavity_scale / noise.t1_alice).sqrt()));
        out.push(ops.b.map(|z| z * (cavity_scale / noise.t1_bob).sqrt()));
    }
    if m.cavity_dephasing {
        let ga = NoiseModel::gamma_phi(noise.t1_alice, noise.t2_alice);
        let gb = NoiseModel::gamma_phi(noise.t1_bob, noise.t2_bob);
        out.push(ops.n_a.map(|z| z * (2.0 * ga * cavity_scale).sqrt()));
        out.push(ops.n_b.map(|z| z * (2.0 * gb * cavity_scale).sqrt()));
    }
    if m.ancilla_decay {
        out.push(ops.sm.map(|z| z * (1.0 / noise.t1_qb).sqrt()));
    }
    if m.ancilla_dephasing {
        let g = NoiseModel::gamma_phi(noise.t1_qb, noise.t2_qb);
        out.push(ops.sz.map(|z| z * (g / 2.0).sqrt()));
    }
    out.retain(|l| l.iter().any(|z| z.norm() > 0.0));
    out
}

/// Elementwise mask for full number-basis dephasing of both cavities with
/// probability `p`: coherences between different `(n_A, n_B)` shrink by
/// `1 − p`.
fn heating_mask(sector: &Sector, p: f64) -> Vec<f64> {
    let idx = sector.indices();
    let d = idx.len();
    let occ: Vec<Vec<usize>> = idx.iter().map(|&i| unflatten(i, &sector.space)).collect();
    let mut mask = vec![1.0; d * d];
    for c in 0..d {
        for r in 0..d {
            if occ[r][1..] != occ[c][1..] {
                mask[c * d + r] = 1.0 - p;
            }
        }
    }
    mask
}

pub(crate) fn build_segment(
    gate: &GateSpec,
    ops: &FullOps,
    noise: &NoiseModel,
    sector: &Sector,
    scales: &SegmentScales,
) -> Result<Segment> {
    let full_space = &ops.spaces;
    let mut post_unitary = None;
    let mut h = CMat::zeros(ops.id.nrows(), ops.id.ncols());
    if gate.duration > 0.0 {
        h += gate_hamiltonian(gate, ops, noise)?;
    }
    if gate.duration == 0.0
        || matches!(&gate.kind, GateKind::CustomUnitary { matrix: Some(_), .. })
    {
        post_unitary = Some(sector.restrict_op(&gate.unitary(full_space)?.matrix));
    }
    if noise.mechanisms.kerr {
        h += kerr_hamiltonian(ops, noise).map(|z| z * scales.kerr);
    }
    let collapse: Vec<CMat> = collapse_ops(ops, noise, scales.cavity)
        .iter()
        .map(|l| sector.restrict_op(l))
        .collect();
    let liou = Liouvillian::new(&sector.restrict_op(&h), &collapse)?;
    let steps = if gate.duration > 0.0 {
        (gate.duration / liou.default_dt(gate.duration)).ceil() as usize
    } else {
        0
    };
    let post_mask = match gate.kind {
        GateKind::BeamSplitter { .. } if noise.mechanisms.qc_heating && noise.qc_heating > 0.0 => {
            Some(heating_mask(sector, noise.qc_heating))
        }
        _ => None,
    };
    Ok(Segment {
        liou,
        duration: gate.duration,
        steps,
        post_unitary,
        post_mask,
    })
}

impl Segment {
    pub fn run(&self, rho: &CMat) -> Result<CMat> {
        let mut out = self.liou.evolve(rho, self.duration, self.steps)?;
        if let Some(u) = &self.post_unitary {
            out = u * out * u.adjoint();
        }
        if let Some(mask) = &self.post_mask {
            for (z, m) in out.as_mut_slice().iter_mut().zip(mask) {
                *z *= *m;
            }
        }
        Ok(out)
    }

    pub fn dt(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.duration / self.steps as f64
        }
    }
}

/// Time during which the ideal circuit leaves the ancilla outside |g⟩:
/// a gate counts when the ancilla has excited population before or after
/// it, starting from |g⟩ with the cavities maximally mixed.
pub fn ancilla_exposure(circuit: &Circuit) -> Result<f64> {
    let spaces = &circuit.spaces;
    if spaces.first().map(|m| m.label) != Some(ModeLabel::Ancilla) {
        return Ok(0.0);
    }
    let sector = Sector::faithful(spaces);
    let ops = FullOps::new(spaces)?;
    let p_e = sector.restrict_op(&ops.p_e);
    let d = sector.dim();
    let mut rho = CMat::zeros(d, d);
    let g_states: Vec<usize> = (0..d).filter(|&k| p_e[(k, k)].re == 0.0).collect();
    for &k in &g_states {
        rho[(k, k)] = C64::new(1.0 / g_states.len() as f64, 0.0);
    }
    let excited = |r: &CMat| (&p_e * r).trace().re;
    let mut total = 0.0;
    for gate in &circuit.gates {
        let before = excited(&rho);
        let u = sector.restrict_op(&gate.unitary(spaces)?.matrix);
        rho = &u * &rho * u.adjoint();
        let after = excited(&rho);
        if before > 1e-9 || after > 1e-9 {
            total += gate.duration;
        }
    }
    Ok(total)
}
