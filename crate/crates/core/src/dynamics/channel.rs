use std::sync::Arc;

use super::schedule::{build_segment, FullOps, PulseEntry, PulseSchedule, Segment, SegmentScales};
use super::sector::Sector;
use super::NoiseModel;
use crate::circuits::Circuit;
use crate::error::{Error, Result};
use crate::fockspace::linalg::{self, CMat, CVec, C64};
use crate::fockspace::{space_dim, tol, DensityMatrix, ModeLabel, ModeSpace, Operator};

/// A linear map on density matrices.
pub trait Channel: Send + Sync {
    fn space(&self) -> &[ModeSpace];

    fn output_space(&self) -> Vec<ModeSpace> {
        self.space().to_vec()
    }

    /// Applies the map to an arbitrary (not necessarily physical) matrix.
    fn apply_matrix(&self, m: &CMat) -> Result<CMat>;

    fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.space != self.space() {
            return Err(Error::SpaceMismatch(format!(
                "channel expects {}, got {}",
                crate::fockspace::describe_space(self.space()),
                crate::fockspace::describe_space(&rho.space)
            )));
        }
        Ok(DensityMatrix::from_raw(
            self.apply_matrix(&rho.matrix)?,
            self.output_space(),
        ))
    }
}

#[derive(Debug, Clone)]
pub struct IdentityChannel {
    pub space: Vec<ModeSpace>,
}

impl Channel for IdentityChannel {
    fn space(&self) -> &[ModeSpace] {
        &self.space
    }

    fn apply_matrix(&self, m: &CMat) -> Result<CMat> {
        Ok(m.clone())
    }
}

#[derive(Debug, Clone)]
pub struct UnitaryChannel {
    pub op: Operator,
}

impl UnitaryChannel {
    pub fn new(op: Operator) -> Result<Self> {
        if !op.is_unitary() {
            return Err(Error::InvalidParameter("operator is not unitary".into()));
        }
        Ok(Self { op })
    }
}

impl Channel for UnitaryChannel {
    fn space(&self) -> &[ModeSpace] {
        &self.op.space
    }

    fn apply_matrix(&self, m: &CMat) -> Result<CMat> {
        Ok(&self.op.matrix * m * self.op.matrix.adjoint())
    }
}

/// `ρ ↦ Σ K ρ K†`; requires `Σ K†K ≤ I`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    pub ops: Vec<CMat>,
    pub space: Vec<ModeSpace>,
}

impl KrausChannel {
    pub fn new(ops: Vec<CMat>, space: Vec<ModeSpace>) -> Result<Self> {
        let d = space_dim(&space);
        if ops.is_empty() || ops.iter().any(|k| k.nrows() != d || k.ncols() != d) {
            return Err(Error::SpaceMismatch("Kraus operators do not match space".into()));
        }
        let sum = ops
            .iter()
            .fold(CMat::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        let top = linalg::eigvalsh(&sum).into_iter().fold(f64::MIN, f64::max);
        if top > 1.0 + tol::NORM {
            return Err(Error::InvalidParameter(format!(
                "Kraus operators are trace increasing (largest eigenvalue {top})"
            )));
        }
        Ok(Self { ops, space })
    }
}

impl Channel for KrausChannel {
    fn space(&self) -> &[ModeSpace] {
        &self.space
    }

    fn apply_matrix(&self, m: &CMat) -> Result<CMat> {
        let d = m.nrows();
        Ok(self
            .ops
            .iter()
            .fold(CMat::zeros(d, d), |acc, k| acc + k * m * k.adjoint()))
    }
}

/// Stages applied in order, first stage first.
pub struct ComposedChannel {
    pub stages: Vec<Arc<dyn Channel>>,
}

impl ComposedChannel {
    pub fn new(stages: Vec<Arc<dyn Channel>>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidParameter("empty channel composition".into()));
        }
        for w in stages.windows(2) {
            if w[0].output_space() != w[1].space() {
                return Err(Error::SpaceMismatch("composed stages do not chain".into()));
            }
        }
        Ok(Self { stages })
    }
}

impl Channel for ComposedChannel {
    fn space(&self) -> &[ModeSpace] {
        self.stages[0].space()
    }

    fn output_space(&self) -> Vec<ModeSpace> {
        self.stages.last().expect("non-empty").output_space()
    }

    fn apply_matrix(&self, m: &CMat) -> Result<CMat> {
        self.stages
            .iter()
            .try_fold(m.clone(), |acc, s| s.apply_matrix(&acc))
    }
}

/// What happens to the ancilla at the end of a cavity channel.
#[derive(Debug, Clone, PartialEq)]
pub enum AncillaBranch {
    /// Discard it.
    Trace,
    /// Keep the unnormalized cavity state conditioned on finding the
    /// ancilla in this state.
    Project(CVec),
}

impl AncillaBranch {
    pub fn ground() -> Self {
        AncillaBranch::Project(CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]))
    }

    pub fn excited() -> Self {
        AncillaBranch::Project(CVec::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]))
    }

    /// Reduces a matrix on (ancilla, rest) to the rest.
    pub fn reduce(&self, m: &CMat) -> CMat {
        let d = m.nrows() / 2;
        let block = |i: usize, j: usize| m.view((i * d, j * d), (d, d)).into_owned();
        match self {
            AncillaBranch::Trace => block(0, 0) + block(1, 1),
            AncillaBranch::Project(v) => {
                let mut out = CMat::zeros(d, d);
                for i in 0..2 {
                    for j in 0..2 {
                        let w = v[i].conj() * v[j];
                        if w.norm() > 0.0 {
                            out += block(i, j).map(|z| z * w);
                        }
                    }
                }
                out
            }
        }
    }
}

/// Cavity-only view of a channel on (ancilla, Alice, Bob): the ancilla
/// is prepared in `ancilla_in`, the inner channel runs, and the ancilla
/// is reduced according to `branch`.
pub struct CavityChannel {
    pub inner: Arc<dyn Channel>,
    pub ancilla_in: CMat,
    pub branch: AncillaBranch,
    cavities: Vec<ModeSpace>,
}

impl CavityChannel {
    pub fn new(inner: Arc<dyn Channel>, ancilla_in: CMat, branch: AncillaBranch) -> Result<Self> {
        let space = inner.space();
        if space.first().map(|m| m.label) != Some(ModeLabel::Ancilla) {
            return Err(Error::SpaceMismatch("inner channel has no ancilla".into()));
        }
        if ancilla_in.nrows() != 2 || ancilla_in.ncols() != 2 {
            return Err(Error::SpaceMismatch("ancilla state must be 2x2".into()));
        }
        let cavities = space[1..].to_vec();
        Ok(Self {
            inner,
            ancilla_in,
            branch,
            cavities,
        })
    }

    /// Ancilla starting in |g⟩ and traced out at the end.
    pub fn ground(inner: Arc<dyn Channel>) -> Result<Self> {
        let mut g = CMat::zeros(2, 2);
        g[(0, 0)] = C64::new(1.0, 0.0);
        Self::new(inner, g, AncillaBranch::Trace)
    }
}

impl Channel for CavityChannel {
    fn space(&self) -> &[ModeSpace] {
        &self.cavities
    }

    fn apply_matrix(&self, m: &CMat) -> Result<CMat> {
        let full = linalg::kron(&self.ancilla_in, m);
        let out = self.inner.apply_matrix(&full)?;
        Ok(self.branch.reduce(&out))
    }
}

/// Noisy evolution of a compiled circuit on (ancilla, Alice, Bob).
///
/// Each gate is a static Lindbladian over its duration, integrated on the
/// photon-number sector that the cutoffs represent faithfully.
#[derive(Debug, Clone)]
pub struct NoisyCircuitChannel {
    pub circuit: Circuit,
    pub noise: NoiseModel,
    sector: Sector,
    segments: Vec<Segment>,
}

impl NoisyCircuitChannel {
    pub fn new(circuit: &Circuit, noise: &NoiseModel) -> Result<Self> {
        noise.validate()?;
        Self::with_sector(circuit, noise, Sector::faithful(&circuit.spaces))
    }

    pub fn with_sector(circuit: &Circuit, noise: &NoiseModel, sector: Sector) -> Result<Self> {
        if sector.space != circuit.spaces {
            return Err(Error::SpaceMismatch("sector and circuit spaces differ".into()));
        }
        let ops = FullOps::new(&circuit.spaces)?;
        let total = circuit.total_duration();
        let scale = |exposure: Option<f64>| match exposure {
            Some(t) if total > 0.0 => t / total,
            _ => 1.0,
        };
        let cavity = scale(noise.cavity_exposure_time);
        let scales = SegmentScales {
            cavity,
            kerr: scale(noise.kerr_exposure_time),
        };
        let segments = circuit
            .gates
            .iter()
            .map(|g| build_segment(g, &ops, noise, &sector, &scales))
            .collect::<Result<Vec<_>>>()?;
        log::debug!(
            "noisy circuit: {} gates, sector dim {}, cavity scale {:.4}",
            segments.len(),
            sector.dim(),
            cavity
        );
        Ok(Self {
            circuit: circuit.clone(),
            noise: noise.clone(),
            sector,
            segments,
        })
    }

    pub fn sector(&self) -> &Sector {
        &self.sector
    }

    pub fn schedule(&self) -> PulseSchedule {
        PulseSchedule {
            entries: self
                .circuit
                .gates
                .iter()
                .zip(&self.segments)
                .map(|(g, s)| PulseEntry {
                    gate: g.clone(),
                    duration: s.duration,
                    dt: s.dt(),
                })
                .collect(),
        }
    }

    /// Evolves a matrix already restricted to the sector.
    pub fn apply_sector(&self, m: &CMat) -> Result<CMat> {
        self.segments.iter().try_fold(m.clone(), |acc, s| s.run(&acc))
    }
}

impl Channel for NoisyCircuitChannel {
    fn space(&self) -> &[ModeSpace] {
        &self.circuit.spaces
    }

    fn apply_matrix(&self, m: &CMat) -> Result<CMat> {
        let r = self.sector.restrict_state(m)?;
        Ok(self.sector.expand(&self.apply_sector(&r)?))
    }
}

/// Column-stacked superoperator `S` with `vec(E(ρ)) = S vec(ρ)`.
pub fn superoperator(ch: &dyn Channel) -> Result<CMat> {
    let d_in = space_dim(ch.space());
    let d_out = space_dim(&ch.output_space());
    let mut s = CMat::zeros(d_out * d_out, d_in * d_in);
    for j in 0..d_in {
        for i in 0..d_in {
            let mut e = CMat::zeros(d_in, d_in);
            e[(i, j)] = C64::new(1.0, 0.0);
            let out = ch.apply_matrix(&e)?;
            let col = j * d_in + i;
            for (k, z) in out.as_slice().iter().enumerate() {
                s[(k, col)] = *z;
            }
        }
    }
    Ok(s)
}

/// Unnormalized Choi matrix `Σ |i⟩⟨j| ⊗ E(|i⟩⟨j|)`; fails with
/// `CpViolation` when an eigenvalue falls below `−tol · trace`.
pub fn choi_matrix(ch: &dyn Channel) -> Result<CMat> {
    let d_in = space_dim(ch.space());
    let d_out = space_dim(&ch.output_space());
    let mut choi = CMat::zeros(d_in * d_out, d_in * d_out);
    for j in 0..d_in {
        for i in 0..d_in {
            let mut e = CMat::zeros(d_in, d_in);
            e[(i, j)] = C64::new(1.0, 0.0);
            let out = ch.apply_matrix(&e)?;
            choi.view_mut((i * d_out, j * d_out), (d_out, d_out))
                .copy_from(&out);
        }
    }
    let scale = choi.trace().re.abs().max(1.0);
    let min = linalg::eigvalsh(&linalg::hermitize(&choi))
        .into_iter()
        .fold(f64::MAX, f64::min);
    if min < -tol::NEGATIVE_EIGENVALUE * scale {
        return Err(Error::CpViolation(min));
    }
    Ok(choi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{compile_eswap_on, compile_fredkin_on, cswap_ideal};
    use crate::dynamics::{Mechanisms, NoiseConfig};

    fn spaces(c: usize) -> Vec<ModeSpace> {
        vec![
            ModeSpace::ancilla(),
            ModeSpace::alice(c).unwrap(),
            ModeSpace::bob(c).unwrap(),
        ]
    }

    #[test]
    fn noiseless_channel_matches_ideal_fredkin() {
        let sp = spaces(4);
        let circ = compile_fredkin_on(sp.clone()).unwrap();
        let ch = NoisyCircuitChannel::new(&circ, &NoiseModel::noiseless()).unwrap();
        let target = cswap_ideal(sp[0], sp[1], sp[2]).unwrap();
        let psi = crate::fockspace::StateVector::basis(&sp, &[1, 1, 2]).unwrap();
        let plus = crate::fockspace::StateVector::basis(&sp, &[0, 1, 2])
            .unwrap()
            .add(&psi)
            .unwrap()
            .normalized()
            .unwrap();
        let rho = plus.to_density();
        let out = ch.apply(&rho).unwrap();
        let want = target.conjugate(&rho).unwrap();
        assert!(linalg::max_norm(&(out.matrix - want.matrix)) < 1e-8);
    }

    #[test]
    fn noisy_eswap_is_trace_preserving_and_cp() {
        let sp = spaces(3);
        let circ = compile_eswap_on(0.4, sp.clone()).unwrap();
        let noise = NoiseConfig::default().to_model().unwrap();
        // Whole truncated space, so every Choi input is admissible.
        let sector = Sector::new(&sp, 4);
        let inner: Arc<dyn Channel> =
            Arc::new(NoisyCircuitChannel::with_sector(&circ, &noise, sector).unwrap());
        let cav = CavityChannel::ground(inner).unwrap();
        let choi = choi_matrix(&cav).unwrap();
        let d = 9;
        for i in 0..d {
            for j in 0..d {
                let tr: C64 = (0..d).map(|k| choi[(i * d + k, j * d + k)]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((tr - want).norm() < 1e-8, "{i} {j} {tr}");
            }
        }
    }

    #[test]
    fn superoperator_of_unitary_is_kron() {
        let m = ModeSpace::alice(3).unwrap();
        let u = crate::fockspace::displacement(C64::new(0.1, 0.0), m);
        // Truncated displacement is not unitary; use an exponential instead.
        let h = u.matrix.clone() + u.matrix.adjoint();
        let v = linalg::expm(&h, C64::new(0.0, -0.3)).unwrap();
        let ch = UnitaryChannel::new(Operator::new(v.clone(), vec![m]).unwrap()).unwrap();
        let s = superoperator(&ch).unwrap();
        let want = linalg::kron(&v.conjugate(), &v);
        assert!(linalg::max_norm(&(s - want)) < 1e-12);
    }

    #[test]
    fn kraus_rejects_trace_increasing() {
        let m = ModeSpace::ancilla();
        let k = CMat::identity(2, 2).map(|z| z * 1.1);
        assert!(KrausChannel::new(vec![k], vec![m]).is_err());
    }

    #[test]
    fn non_cp_map_detected() {
        struct Transpose(Vec<ModeSpace>);
        impl Channel for Transpose {
            fn space(&self) -> &[ModeSpace] {
                &self.0
            }
            fn apply_matrix(&self, m: &CMat) -> Result<CMat> {
                Ok(m.transpose())
            }
        }
        let t = Transpose(vec![ModeSpace::ancilla()]);
        assert!(matches!(choi_matrix(&t), Err(Error::CpViolation(_))));
    }

    #[test]
    fn schedule_steps_are_fine_enough() {
        let circ = compile_eswap_on(0.2, spaces(4)).unwrap();
        let noise = NoiseConfig::default().to_model().unwrap();
        let ch = NoisyCircuitChannel::new(&circ, &noise).unwrap();
        let s = ch.schedule();
        s.validate().unwrap();
        assert!((s.total_duration() - circ.total_duration()).abs() < 1e-15);
        let m = noise.with_mechanisms(Mechanisms::NONE);
        assert!(NoisyCircuitChannel::new(&circ, &m).is_ok());
    }
}
