//! Gate set, compiled Fredkin and eSWAP circuits, and equivalence checks.
//!
//! Truncation note: a two-mode space with per-mode cutoff `c` contains
//! every state of total photon number `N < c` but only part of the higher
//! sectors. Beamsplitters conserve `N`, so compiled circuits are exact on
//! the `N < c` sectors and only there; [`verify_equivalence`] compares on
//! that subspace.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::linalg::{self, CMat, C64, I, ONE, ZERO};
use crate::fockspace::{
    annihilation, check_canonical, embed, flatten, space_dim, swap_operator, unflatten,
    DensityMatrix, MatrixRecord, ModeLabel, ModeSpace, Operator, StateVector,
};

pub const T_BS: f64 = 5e-6;
pub const T_CPS: f64 = 0.5e-6;
pub const T_ROT: f64 = 50e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
    Hadamard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    /// `exp(−iθ(e^{iφ} a†b + e^{−iφ} ab†))` on Alice and Bob.
    BeamSplitter { theta: f64, phi: f64 },
    /// `|g⟩⟨g| ⊗ I + |e⟩⟨e| ⊗ e^{iπ n}` on the target cavity.
    Cps { target: ModeLabel },
    /// `exp(−i angle σ/2)`; the Hadamard axis carries an extra phase
    /// `e^{i angle/2}` so that `angle = π` is the usual Hadamard matrix.
    AncillaRotation { axis: Axis, angle: f64 },
    Swap { a: ModeLabel, b: ModeLabel },
    /// Named unitary. `"cswap"` is the ancilla-controlled SWAP; any other
    /// name must carry an explicit matrix on the circuit space.
    CustomUnitary {
        name: String,
        matrix: Option<MatrixRecord>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub kind: GateKind,
    /// Seconds.
    pub duration: f64,
}

impl GateSpec {
    pub fn beamsplitter(theta: f64, phi: f64) -> Self {
        Self {
            kind: GateKind::BeamSplitter { theta, phi },
            duration: T_BS,
        }
    }

    pub fn cps() -> Self {
        Self {
            kind: GateKind::Cps {
                target: ModeLabel::Bob,
            },
            duration: T_CPS,
        }
    }

    pub fn rotation(axis: Axis, angle: f64) -> Self {
        Self {
            kind: GateKind::AncillaRotation { axis, angle },
            duration: T_ROT,
        }
    }

    pub fn hadamard() -> Self {
        Self::rotation(Axis::Hadamard, PI)
    }

    pub fn cswap() -> Self {
        Self {
            kind: GateKind::CustomUnitary {
                name: "cswap".into(),
                matrix: None,
            },
            duration: T_BS,
        }
    }

    pub fn with_duration(mut self, duration: f64) -> Self {
        self.duration = duration;
        self
    }

    pub fn validate(&self, spaces: &[ModeSpace]) -> Result<()> {
        if !(self.duration >= 0.0) || !self.duration.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gate duration must be finite and >= 0, got {}",
                self.duration
            )));
        }
        let has = |l: ModeLabel| spaces.iter().any(|m| m.label == l);
        let need = |labels: &[ModeLabel]| -> Result<()> {
            for &l in labels {
                if !has(l) {
                    return Err(Error::SpaceMismatch(format!(
                        "gate {:?} needs mode {l}",
                        self.kind
                    )));
                }
            }
            Ok(())
        };
        match &self.kind {
            GateKind::BeamSplitter { theta, phi } => {
                if !(0.0..=PI).contains(theta) || !phi.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "beamsplitter needs theta in [0, pi], got {theta}"
                    )));
                }
                need(&[ModeLabel::Alice, ModeLabel::Bob])
            }
            GateKind::Cps { target } => {
                if *target != ModeLabel::Bob {
                    return Err(Error::InvalidParameter(format!(
                        "CPS target must be the ancilla-coupled mode (bob), got {target}"
                    )));
                }
                need(&[ModeLabel::Ancilla, ModeLabel::Bob])
            }
            GateKind::AncillaRotation { angle, .. } => {
                if !angle.is_finite() {
                    return Err(Error::InvalidParameter("rotation angle not finite".into()));
                }
                need(&[ModeLabel::Ancilla])
            }
            GateKind::Swap { a, b } => {
                if a == b {
                    return Err(Error::InvalidParameter("SWAP needs two distinct modes".into()));
                }
                need(&[*a, *b])
            }
            GateKind::CustomUnitary { name, matrix } => match (name.as_str(), matrix) {
                ("cswap", None) => need(&[ModeLabel::Ancilla, ModeLabel::Alice, ModeLabel::Bob]),
                (_, Some(_)) => Ok(()),
                (other, None) => Err(Error::InvalidParameter(format!(
                    "custom unitary `{other}` has no matrix"
                ))),
            },
        }
    }

    /// The gate's unitary on `spaces`.
    pub fn unitary(&self, spaces: &[ModeSpace]) -> Result<Operator> {
        self.validate(spaces)?;
        let find = |l: ModeLabel| *spaces.iter().find(|m| m.label == l).unwrap();
        match &self.kind {
            GateKind::BeamSplitter { theta, phi } => {
                let bs = beamsplitter_unitary(
                    *theta,
                    *phi,
                    find(ModeLabel::Alice),
                    find(ModeLabel::Bob),
                )?;
                embed(&bs, spaces)
            }
            GateKind::Cps { target } => {
                embed(&cps_unitary(find(ModeLabel::Ancilla), find(*target))?, spaces)
            }
            GateKind::AncillaRotation { axis, angle } => {
                embed(&ancilla_rotation(*axis, *angle), spaces)
            }
            GateKind::Swap { a, b } => {
                let (x, y) = if a < b { (*a, *b) } else { (*b, *a) };
                embed(&swap_operator(find(x), find(y))?, spaces)
            }
            GateKind::CustomUnitary { name, matrix } => match matrix {
                Some(rec) => {
                    let op = rec.to_operator()?;
                    if op.space != spaces {
                        return Err(Error::SpaceMismatch(format!(
                            "custom unitary `{name}` is defined on a different space"
                        )));
                    }
                    Ok(op)
                }
                None => cswap_ideal(
                    find(ModeLabel::Ancilla),
                    find(ModeLabel::Alice),
                    find(ModeLabel::Bob),
                ),
            },
        }
    }
}

pub fn pauli(axis: Axis) -> CMat {
    let c = |re: f64, im: f64| C64::new(re, im);
    match axis {
        Axis::X => CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        Axis::Y => CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        Axis::Z => CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        Axis::Hadamard => {
            let h = FRAC_1_SQRT_2;
            CMat::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
        }
    }
}

pub fn ancilla_rotation(axis: Axis, angle: f64) -> Operator {
    let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    let mut m = CMat::identity(2, 2).map(|z| z * c) - pauli(axis).map(|z| z * I * s);
    if axis == Axis::Hadamard {
        m *= C64::from_polar(1.0, angle / 2.0);
    }
    Operator {
        matrix: m,
        space: vec![ModeSpace::ancilla()],
    }
}

/// `exp(−iθ(e^{iφ} a†b + e^{−iφ} ab†))` on `(a, b)`.
pub fn beamsplitter_unitary(theta: f64, phi: f64, a: ModeSpace, b: ModeSpace) -> Result<Operator> {
    let space = vec![a, b];
    check_canonical(&space)?;
    if a.label == ModeLabel::Ancilla || b.label == ModeLabel::Ancilla {
        return Err(Error::SpaceMismatch("beamsplitter acts on cavity modes".into()));
    }
    let am = annihilation(a).matrix;
    let bm = annihilation(b).matrix;
    let ida = CMat::identity(a.cutoff, a.cutoff);
    let idb = CMat::identity(b.cutoff, b.cutoff);
    let adag_b = linalg::kron(&am.adjoint(), &idb) * linalg::kron(&ida, &bm);
    let e = C64::from_polar(1.0, phi);
    let gen = adag_b.map(|z| z * e) + adag_b.adjoint().map(|z| z * e.conj());
    let u = linalg::expm(&gen, C64::new(0.0, -theta))?;
    Operator::new(u, space)
}

/// `|g⟩⟨g| ⊗ I + |e⟩⟨e| ⊗ e^{iπn}` on `(ancilla, cavity)`.
pub fn cps_unitary(ancilla: ModeSpace, cavity: ModeSpace) -> Result<Operator> {
    if ancilla.cutoff != 2 || ancilla.label != ModeLabel::Ancilla {
        return Err(Error::SpaceMismatch("CPS needs a two-level ancilla".into()));
    }
    let n = cavity.cutoff;
    let mut m = CMat::identity(2 * n, 2 * n);
    for k in 0..n {
        if k % 2 == 1 {
            m[(n + k, n + k)] = -ONE;
        }
    }
    Operator::new(m, vec![ancilla, cavity])
}

/// `exp(iθ SWAP) = cos θ I + i sin θ SWAP`.
pub fn eswap_ideal(theta_c: f64, a: ModeSpace, b: ModeSpace) -> Result<Operator> {
    let swap = swap_operator(a, b)?;
    let d = swap.dim();
    let m = CMat::identity(d, d).map(|z| z * theta_c.cos()) + swap.matrix.map(|z| z * I * theta_c.sin());
    Operator::new(m, swap.space)
}

/// `|g⟩⟨g| ⊗ I + |e⟩⟨e| ⊗ SWAP`.
pub fn cswap_ideal(ancilla: ModeSpace, a: ModeSpace, b: ModeSpace) -> Result<Operator> {
    if ancilla.cutoff != 2 {
        return Err(Error::SpaceMismatch("cSWAP needs a two-level ancilla".into()));
    }
    let swap = swap_operator(a, b)?;
    let d = swap.dim();
    let mut m = CMat::identity(2 * d, 2 * d);
    m.view_mut((d, d), (d, d)).copy_from(&swap.matrix);
    Operator::new(m, vec![ancilla, a, b])
}

/// Per-mode phase rotation `exp(i(φ_A n_A + φ_B n_B))` relating a
/// compiled circuit to its target.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseFrame {
    pub alice: f64,
    pub bob: f64,
}

impl PhaseFrame {
    pub fn is_identity(&self) -> bool {
        self.alice == 0.0 && self.bob == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub gates: Vec<GateSpec>,
    pub spaces: Vec<ModeSpace>,
    pub control_angle: Option<f64>,
    pub phase_frame: PhaseFrame,
}

impl Circuit {
    pub fn new(gates: Vec<GateSpec>, spaces: Vec<ModeSpace>) -> Result<Self> {
        check_canonical(&spaces)?;
        for g in &gates {
            g.validate(&spaces)?;
        }
        Ok(Self {
            gates,
            spaces,
            control_angle: None,
            phase_frame: PhaseFrame::default(),
        })
    }

    pub fn total_duration(&self) -> f64 {
        self.gates.iter().map(|g| g.duration).sum()
    }

    /// Product of the gate unitaries, first gate rightmost.
    pub fn unitary(&self) -> Result<Operator> {
        let mut u = Operator::identity(&self.spaces)?;
        for g in &self.gates {
            u = g.unitary(&self.spaces)?.compose(&u)?;
        }
        Ok(u)
    }

    pub fn apply_state(&self, psi: &StateVector) -> Result<StateVector> {
        self.gates.iter().try_fold(psi.clone(), |acc, g| {
            g.unitary(&self.spaces)?.apply(&acc)
        })
    }

    pub fn apply_density(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.unitary()?.conjugate(rho)
    }

    /// Same circuit on different cutoffs.
    pub fn with_spaces(&self, spaces: Vec<ModeSpace>) -> Result<Self> {
        let mut c = Circuit::new(self.gates.clone(), spaces)?;
        c.control_angle = self.control_angle;
        c.phase_frame = self.phase_frame;
        Ok(c)
    }
}

/// Default verification spaces: ancilla plus two cavities with cutoff 8.
pub fn default_spaces() -> Vec<ModeSpace> {
    vec![
        ModeSpace::ancilla(),
        ModeSpace::alice(8).unwrap(),
        ModeSpace::bob(8).unwrap(),
    ]
}

/// Closing beamsplitter phase: `BS(θ, φ)† = BS(θ, φ + π)`.
const BS_PHI: f64 = FRAC_PI_2;
const BS_PHI_CLOSE: f64 = -FRAC_PI_2;

/// Fredkin gate from two 50:50 beamsplitters around a CPS.
///
/// With `φ = π/2` the opening beamsplitter maps Bob onto the
/// antisymmetric mode `(b − a)/√2`, whose parity is exactly SWAP, so
/// the phase frame is the identity.
pub fn compile_fredkin_on(spaces: Vec<ModeSpace>) -> Result<Circuit> {
    let gates = vec![
        GateSpec::beamsplitter(FRAC_PI_4, BS_PHI),
        GateSpec::cps(),
        GateSpec::beamsplitter(FRAC_PI_4, BS_PHI_CLOSE),
    ];
    Circuit::new(gates, spaces)
}

pub fn compile_fredkin() -> Result<Circuit> {
    let c = compile_fredkin_on(default_spaces())?;
    let target = cswap_ideal(c.spaces[0], c.spaces[1], c.spaces[2])?;
    check_report(verify_equivalence(&c, &target)?)?;
    Ok(c)
}

/// Simplified eSWAP: the ancilla stays in |g⟩ during both beamsplitters
/// and only leaves it between the two Hadamards.
///
/// The middle rotation is `X(−2θc)`: with CPS reading out Bob's parity
/// `p`, the ancilla sequence acts as `exp(iθc p)` on |g⟩, and conjugating
/// by the beamsplitter turns Bob's parity into SWAP.
pub fn compile_eswap_on(theta_c: f64, spaces: Vec<ModeSpace>) -> Result<Circuit> {
    if !(-PI..=PI).contains(&theta_c) {
        return Err(Error::InvalidParameter(format!(
            "control angle must lie in [-pi, pi], got {theta_c}"
        )));
    }
    let gates = vec![
        GateSpec::beamsplitter(FRAC_PI_4, BS_PHI),
        GateSpec::hadamard(),
        GateSpec::cps(),
        GateSpec::rotation(Axis::X, -2.0 * theta_c),
        GateSpec::cps(),
        GateSpec::hadamard(),
        GateSpec::beamsplitter(FRAC_PI_4, BS_PHI_CLOSE),
    ];
    let mut c = Circuit::new(gates, spaces)?;
    c.control_angle = Some(theta_c);
    Ok(c)
}

pub fn compile_eswap(theta_c: f64) -> Result<Circuit> {
    let c = compile_eswap_on(theta_c, default_spaces())?;
    let target = eswap_ideal(theta_c, c.spaces[1], c.spaces[2])?;
    check_report(verify_equivalence(&c, &target)?)?;
    Ok(c)
}

fn check_report(r: EquivalenceReport) -> Result<()> {
    if r.distance > crate::fockspace::tol::PHASE_EQUIVALENCE || r.leakage > 1e-9 {
        return Err(Error::CompileError {
            distance: r.distance,
            leakage: r.leakage,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    /// Max-norm distance after removing the best global phase.
    pub distance: f64,
    /// Largest amplitude from ancilla |g⟩ into ancilla |e⟩.
    pub leakage: f64,
    pub global_phase: f64,
    /// Dimension of the compared (faithfully truncated) subspace.
    pub compared_dim: usize,
}

/// Cavity basis indices with total photon number below every cavity
/// cutoff, i.e. the sectors the truncated space represents completely.
fn faithful_indices(cavities: &[ModeSpace]) -> Vec<usize> {
    let limit = cavities.iter().map(|m| m.cutoff).min().unwrap_or(0);
    (0..space_dim(cavities))
        .filter(|&i| unflatten(i, cavities).iter().sum::<usize>() < limit)
        .collect()
}

/// Compares a circuit with a target operator up to global phase.
///
/// A target on the cavity modes alone is compared against the
/// ancilla-|g⟩ input/output block of the circuit; a target on the full
/// circuit space is compared directly. Both restrict to the photon-number
/// sectors that fit inside the cutoffs.
pub fn verify_equivalence(circuit: &Circuit, target: &Operator) -> Result<EquivalenceReport> {
    let u = circuit.unitary()?;
    let spaces = &circuit.spaces;
    let cavities: Vec<ModeSpace> = spaces
        .iter()
        .copied()
        .filter(|m| m.label != ModeLabel::Ancilla)
        .collect();
    let has_ancilla = spaces.len() != cavities.len();
    let faithful = faithful_indices(&cavities);
    let dc = space_dim(&cavities);

    let (block, leak_block, tgt) = if target.space == *spaces {
        // full-space comparison: include both ancilla branches
        let na = if has_ancilla { 2 } else { 1 };
        let idx: Vec<usize> = (0..na)
            .flat_map(|a| faithful.iter().map(move |&i| a * dc + i))
            .collect();
        let pick = |m: &CMat| CMat::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])]);
        (pick(&u.matrix), None, pick(&target.matrix))
    } else if target.space == cavities && has_ancilla {
        let f = &faithful;
        let gg = CMat::from_fn(f.len(), f.len(), |r, c| u.matrix[(f[r], f[c])]);
        let eg = CMat::from_fn(f.len(), f.len(), |r, c| u.matrix[(dc + f[r], f[c])]);
        let t = CMat::from_fn(f.len(), f.len(), |r, c| target.matrix[(f[r], f[c])]);
        (gg, Some(eg), t)
    } else {
        return Err(Error::SpaceMismatch(format!(
            "target on {} does not match circuit on {}",
            crate::fockspace::describe_space(&target.space),
            crate::fockspace::describe_space(spaces)
        )));
    };
    let overlap = (tgt.adjoint() * &block).trace();
    let phase = if overlap.norm() > 0.0 { overlap.arg() } else { 0.0 };
    let aligned = tgt.map(|z| z * C64::from_polar(1.0, phase));
    Ok(EquivalenceReport {
        distance: linalg::max_norm(&(block - aligned)),
        leakage: leak_block.map(|m| linalg::max_norm(&m)).unwrap_or(0.0),
        global_phase: phase,
        compared_dim: tgt.nrows(),
    })
}

/// Projects `psi` (ancilla first) onto ancilla |k⟩, returning the
/// unnormalized cavity state.
pub fn ancilla_component(psi: &StateVector, k: usize) -> Result<StateVector> {
    if psi.space.first().map(|m| m.label) != Some(ModeLabel::Ancilla) {
        return Err(Error::SpaceMismatch("state has no ancilla".into()));
    }
    let cav = psi.space[1..].to_vec();
    let dc = space_dim(&cav);
    let amps = psi.amplitudes.rows(k * dc, dc).into_owned();
    StateVector::new(amps, cav)
}

/// Basis index helper re-exported for callers building cavity states.
pub fn basis_index(occ: &[usize], space: &[ModeSpace]) -> usize {
    flatten(occ, space)
}
