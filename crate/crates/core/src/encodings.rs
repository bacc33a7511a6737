//! Logical qubits in a cavity: Fock {0,1}, coherent-state and binomial
//! codewords, two-qubit logical states and Pauli correlators.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::linalg::{self, CMat, CVec, C64, I, ONE, ZERO};
use crate::fockspace::{
    coherent_state, displacement_guard, DensityMatrix, MatrixRecord, ModeLabel, ModeSpace,
    Operator, StateVector,
};

/// Amplitude used for the coherent-state encoding.
pub const DEFAULT_ALPHA: f64 = 1.41;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum EncodingKind {
    Fock,
    Coherent { alpha: f64 },
    Binomial,
}

impl fmt::Display for EncodingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EncodingKind::Fock => f.write_str("fock"),
            EncodingKind::Coherent { alpha } => write!(f, "coherent(alpha={alpha})"),
            EncodingKind::Binomial => f.write_str("binomial"),
        }
    }
}

impl std::str::FromStr for EncodingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fock" => Ok(EncodingKind::Fock),
            "coherent" | "cat" => Ok(EncodingKind::Coherent {
                alpha: DEFAULT_ALPHA,
            }),
            "binomial" => Ok(EncodingKind::Binomial),
            other => Err(Error::InvalidParameter(format!("unknown encoding `{other}`"))),
        }
    }
}

/// Two codewords in one cavity and an orthonormal logical basis for them.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalEncoding {
    pub kind: EncodingKind,
    pub cutoff: usize,
    /// Codewords on an Alice-labelled mode; see [`LogicalEncoding::codeword`].
    pub codeword0: StateVector,
    pub codeword1: StateVector,
    /// True when the logical basis differs from the raw codewords.
    pub orthogonalized: bool,
    pub nbar: [f64; 2],
    /// `cutoff × 2` isometry whose columns are `|0_L⟩`, `|1_L⟩`.
    basis: CMat,
}

fn mean_photon(v: &CVec) -> f64 {
    v.iter()
        .enumerate()
        .map(|(n, z)| n as f64 * z.norm_sqr())
        .sum::<f64>()
        / v.norm_squared()
}

pub fn make_encoding(kind: EncodingKind, cutoff: usize) -> Result<LogicalEncoding> {
    let mode = ModeSpace::alice(cutoff)?;
    let fock = |n: usize| -> Result<StateVector> {
        if n >= cutoff {
            return Err(Error::InvalidParameter(format!(
                "{kind} encoding needs |{n}>, cutoff is {cutoff}"
            )));
        }
        StateVector::basis(&[mode], &[n])
    };
    let (c0, c1) = match kind {
        EncodingKind::Fock => (fock(0)?, fock(1)?),
        EncodingKind::Binomial => {
            if cutoff < 9 {
                // |4,4> has eight photons in total
                log::warn!("truncation: two-cavity binomial states want cutoff >= 9, got {cutoff}");
            }
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let plus = fock(0)?.add(&fock(4)?)?.scaled(C64::new(s, 0.0));
            (plus, fock(2)?)
        }
        EncodingKind::Coherent { alpha } => {
            if !(alpha > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "coherent encoding needs alpha > 0, got {alpha}"
                )));
            }
            (
                coherent_state(C64::new(-alpha, 0.0), mode)?,
                coherent_state(C64::new(alpha, 0.0), mode)?,
            )
        }
    };
    let raw = CMat::from_columns(&[c0.amplitudes.clone(), c1.amplitudes.clone()]);
    let gram = raw.adjoint() * &raw;
    let orthogonalized = linalg::max_norm(&(&gram - CMat::identity(2, 2))) > 1e-14;
    let basis = if orthogonalized {
        // symmetric (Löwdin) orthogonalization, S^{-1/2}
        let eig = linalg::eigh(&gram);
        if eig.values[0] < 1e-12 {
            return Err(Error::InvalidParameter("codewords are linearly dependent".into()));
        }
        let inv_sqrt = linalg::spectral_map(&eig, |v| C64::new(v.powf(-0.5), 0.0));
        &raw * inv_sqrt
    } else {
        raw
    };
    Ok(LogicalEncoding {
        kind,
        cutoff,
        nbar: [mean_photon(&c0.amplitudes), mean_photon(&c1.amplitudes)],
        codeword0: c0,
        codeword1: c1,
        orthogonalized,
        basis,
    })
}

/// Default cutoff for each encoding: enough headroom for displacement
/// and beamsplitter dynamics of the codewords.
pub fn default_cutoff(kind: EncodingKind) -> usize {
    match kind {
        EncodingKind::Fock => 4,
        EncodingKind::Binomial => 9,
        EncodingKind::Coherent { alpha } => displacement_guard(C64::new(alpha, 0.0)),
    }
}

/// Single-qubit logical preparation labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogicalLabel {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl LogicalLabel {
    /// Coefficients on (codeword0, codeword1) before normalization.
    pub fn coefficients(self) -> [C64; 2] {
        match self {
            LogicalLabel::Zero => [ONE, ZERO],
            LogicalLabel::One => [ZERO, ONE],
            LogicalLabel::Plus => [ONE, ONE],
            LogicalLabel::Minus => [ONE, -ONE],
            LogicalLabel::PlusI => [ONE, I],
            LogicalLabel::MinusI => [ONE, -I],
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            LogicalLabel::Zero => "0",
            LogicalLabel::One => "1",
            LogicalLabel::Plus => "+",
            LogicalLabel::Minus => "-",
            LogicalLabel::PlusI => "+i",
            LogicalLabel::MinusI => "-i",
        }
    }

    /// The four per-qubit inputs used for process tomography.
    pub const QPT_INPUTS: [LogicalLabel; 4] = [
        LogicalLabel::Zero,
        LogicalLabel::One,
        LogicalLabel::Plus,
        LogicalLabel::PlusI,
    ];
}

/// Parses strings such as `"01"`, `"++"` or `"+i0"` into per-qubit labels.
pub fn parse_labels(s: &str) -> Result<Vec<LogicalLabel>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut k = 0;
    while k < chars.len() {
        let next_i = chars.get(k + 1) == Some(&'i');
        let (label, width) = match chars[k] {
            '0' => (LogicalLabel::Zero, 1),
            '1' => (LogicalLabel::One, 1),
            '+' if next_i => (LogicalLabel::PlusI, 2),
            '-' if next_i => (LogicalLabel::MinusI, 2),
            '+' => (LogicalLabel::Plus, 1),
            '-' => (LogicalLabel::Minus, 1),
            c => {
                return Err(Error::InvalidParameter(format!(
                    "bad logical label character `{c}` in `{s}`"
                )))
            }
        };
        out.push(label);
        k += width;
    }
    Ok(out)
}

impl LogicalEncoding {
    pub fn mode(&self, label: ModeLabel) -> ModeSpace {
        ModeSpace {
            cutoff: self.cutoff,
            label,
        }
    }

    /// Codeword `k` relabelled onto `label`.
    pub fn codeword(&self, k: usize, label: ModeLabel) -> StateVector {
        let cw = if k == 0 { &self.codeword0 } else { &self.codeword1 };
        StateVector {
            amplitudes: cw.amplitudes.clone(),
            space: vec![self.mode(label)],
        }
    }

    /// Orthonormal logical basis as columns (`cutoff × 2`).
    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    /// Codeword overlap `⟨cw0|cw1⟩`.
    pub fn overlap(&self) -> C64 {
        self.codeword0.amplitudes.dotc(&self.codeword1.amplitudes)
    }

    /// Single-cavity logical state built from the raw codewords.
    pub fn encode_single(&self, label: LogicalLabel, mode: ModeLabel) -> Result<StateVector> {
        let [a, b] = label.coefficients();
        self.codeword(0, mode)
            .scaled(a)
            .add(&self.codeword(1, mode).scaled(b))?
            .normalized()
    }

    /// `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩` from the raw codewords.
    pub fn encode_bloch(&self, theta: f64, phi: f64, mode: ModeLabel) -> Result<StateVector> {
        let a = C64::new((theta / 2.0).cos(), 0.0);
        let b = C64::from_polar((theta / 2.0).sin(), phi);
        self.codeword(0, mode)
            .scaled(a)
            .add(&self.codeword(1, mode).scaled(b))?
            .normalized()
    }

    /// Product state on Alice ⊗ Bob; the first label is Alice.
    pub fn encode_two_qubit(&self, labels: &str) -> Result<StateVector> {
        let parsed = parse_labels(labels)?;
        if parsed.len() != 2 {
            return Err(Error::InvalidParameter(format!(
                "two-qubit label needs two entries, got `{labels}`"
            )));
        }
        self.encode_pair(parsed[0], parsed[1])
    }

    pub fn encode_pair(&self, a: LogicalLabel, b: LogicalLabel) -> Result<StateVector> {
        self.encode_single(a, ModeLabel::Alice)?
            .tensor(&self.encode_single(b, ModeLabel::Bob)?)
    }

    /// Logical Pauli `B σ B†` on one cavity, order I, X, Y, Z.
    pub fn single_paulis(&self, label: ModeLabel) -> [Operator; 4] {
        let b = &self.basis;
        let mk = |s: &CMat| Operator {
            matrix: b * s * b.adjoint(),
            space: vec![self.mode(label)],
        };
        let p = pauli_matrices();
        [mk(&p[0]), mk(&p[1]), mk(&p[2]), mk(&p[3])]
    }

    /// `(B ⊗ B)` isometry from the two-qubit logical space into Alice ⊗ Bob.
    pub fn two_mode_isometry(&self) -> CMat {
        linalg::kron(&self.basis, &self.basis)
    }

    /// Compresses a two-cavity operator to the 4×4 logical block.
    pub fn project(&self, m: &CMat) -> CMat {
        let v = self.two_mode_isometry();
        v.adjoint() * m * v
    }

    /// Lifts a 4×4 logical operator to Alice ⊗ Bob.
    pub fn lift(&self, m: &CMat) -> CMat {
        let v = self.two_mode_isometry();
        &v * m * v.adjoint()
    }

    pub fn two_mode_space(&self) -> Vec<ModeSpace> {
        vec![self.mode(ModeLabel::Alice), self.mode(ModeLabel::Bob)]
    }

    pub fn to_record(&self) -> EncodingRecord {
        EncodingRecord {
            kind: self.kind,
            cutoff: self.cutoff,
            orthogonalized: self.orthogonalized,
            nbar: self.nbar,
            codeword0: MatrixRecord::from_state(&self.codeword0),
            codeword1: MatrixRecord::from_state(&self.codeword1),
        }
    }
}

/// JSON export of an encoding definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingRecord {
    pub kind: EncodingKind,
    pub cutoff: usize,
    pub orthogonalized: bool,
    pub nbar: [f64; 2],
    pub codeword0: MatrixRecord,
    pub codeword1: MatrixRecord,
}

/// I, X, Y, Z as 2×2 matrices.
pub fn pauli_matrices() -> [CMat; 4] {
    [
        CMat::identity(2, 2),
        CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    ]
}

/// Two-qubit Pauli labels, index `4μ + ν` with μ on Alice.
pub const PAULI_LABELS: [&str; 16] = [
    "II", "IX", "IY", "IZ", "XI", "XX", "XY", "XZ", "YI", "YX", "YY", "YZ", "ZI", "ZX", "ZY", "ZZ",
];

pub fn pauli_index(label: &str) -> Result<usize> {
    PAULI_LABELS
        .iter()
        .position(|&l| l.eq_ignore_ascii_case(label))
        .ok_or_else(|| Error::InvalidParameter(format!("unknown Pauli label `{label}`")))
}

/// Two-qubit Paulis `σ_μ ⊗ σ_ν` as 4×4 matrices in label order.
pub fn two_qubit_paulis() -> Vec<CMat> {
    let p = pauli_matrices();
    let mut out = Vec::with_capacity(16);
    for a in &p {
        for b in &p {
            out.push(linalg::kron(a, b));
        }
    }
    out
}

/// All 16 logical Paulis embedded in Alice ⊗ Bob.
pub fn logical_pauli_operators(enc: &LogicalEncoding) -> Vec<Operator> {
    let pa = enc.single_paulis(ModeLabel::Alice);
    let pb = enc.single_paulis(ModeLabel::Bob);
    let mut out = Vec::with_capacity(16);
    for a in &pa {
        for b in &pb {
            out.push(Operator {
                matrix: linalg::kron(&a.matrix, &b.matrix),
                space: enc.two_mode_space(),
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorSet {
    pub values: [f64; 16],
}

impl CorrelatorSet {
    pub fn get(&self, label: &str) -> f64 {
        self.values[pauli_index(label).expect("valid Pauli label")]
    }

    /// Expectations of a 4×4 logical density matrix.
    pub fn from_logical(rho_l: &CMat) -> Self {
        let mut values = [0.0; 16];
        for (k, p) in two_qubit_paulis().iter().enumerate() {
            values[k] = (p * rho_l).trace().re;
        }
        Self { values }
    }

    /// Inverse of [`CorrelatorSet::from_logical`]: `¼ Σ c_k P_k`.
    pub fn to_logical(&self) -> CMat {
        let mut m = CMat::zeros(4, 4);
        for (k, p) in two_qubit_paulis().iter().enumerate() {
            m += p.map(|z| z * self.values[k] * 0.25);
        }
        m
    }
}

/// `Tr(ρ P_i ⊗ P_j)` for the 16 logical Paulis.
pub fn correlators(rho: &DensityMatrix, enc: &LogicalEncoding) -> Result<CorrelatorSet> {
    if rho.space != enc.two_mode_space() {
        return Err(Error::SpaceMismatch(format!(
            "correlators need {}, got {}",
            crate::fockspace::describe_space(&enc.two_mode_space()),
            crate::fockspace::describe_space(&rho.space)
        )));
    }
    Ok(CorrelatorSet::from_logical(&enc.project(&rho.matrix)))
}

/// `¼(⟨II⟩ − ⟨XY⟩ + ⟨YX⟩ − ⟨ZZ⟩)`, the overlap estimate with
/// `(|01⟩ + i|10⟩)/√2`.
pub fn direct_fidelity_estimate(c: &CorrelatorSet) -> f64 {
    0.25 * (c.get("II") - c.get("XY") + c.get("YX") - c.get("ZZ"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    pub ii: f64,
    pub zz: f64,
    pub iz: f64,
    pub zi: f64,
    pub xy: f64,
    pub yx: f64,
}

impl SweepRow {
    pub fn from_correlators(theta: f64, c: &CorrelatorSet) -> Self {
        Self {
            theta,
            ii: c.get("II"),
            zz: c.get("ZZ"),
            iz: c.get("IZ"),
            zi: c.get("ZI"),
            xy: c.get("XY"),
            yx: c.get("YX"),
        }
    }
}

/// Runs `channel(θ, ρ_in)` for each angle on the logical input `input`
/// (e.g. `"01"`) and tabulates the selected correlators.
pub fn theta_sweep<F>(
    enc: &LogicalEncoding,
    input: &str,
    thetas: &[f64],
    mut channel: F,
) -> Result<Vec<SweepRow>>
where
    F: FnMut(f64, &DensityMatrix) -> Result<DensityMatrix>,
{
    let rho_in = enc.encode_two_qubit(input)?.to_density();
    thetas
        .iter()
        .map(|&t| {
            let out = channel(t, &rho_in)?;
            Ok(SweepRow::from_correlators(t, &correlators(&out, enc)?))
        })
        .collect()
}

/// Least-squares fit `y ≈ c0 + c1 cos 2θ + c2 sin 2θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicFit {
    pub offset: f64,
    pub cos2: f64,
    pub sin2: f64,
    pub r_squared: f64,
}

pub fn fit_harmonic(thetas: &[f64], y: &[f64]) -> Result<HarmonicFit> {
    if thetas.len() != y.len() || thetas.len() < 3 {
        return Err(Error::InvalidParameter(
            "harmonic fit needs >= 3 paired samples".into(),
        ));
    }
    let a = nalgebra::DMatrix::from_fn(thetas.len(), 3, |r, c| match c {
        0 => 1.0,
        1 => (2.0 * thetas[r]).cos(),
        _ => (2.0 * thetas[r]).sin(),
    });
    let yv = nalgebra::DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let coef = svd
        .solve(&yv, 1e-12)
        .map_err(|e| Error::NonConvergence(format!("harmonic fit: {e}")))?;
    let resid = &yv - &a * &coef;
    let mean = yv.mean();
    let ss_tot: f64 = yv.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res = resid.norm_squared();
    // a constant series is fit perfectly by the offset term
    let r_squared = if ss_tot < 1e-24 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(HarmonicFit {
        offset: coef[0],
        cos2: coef[1],
        sin2: coef[2],
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_parsing() {
        use LogicalLabel::*;
        assert_eq!(parse_labels("01").unwrap(), vec![Zero, One]);
        assert_eq!(parse_labels("+i-").unwrap(), vec![PlusI, Minus]);
        assert_eq!(parse_labels("-i+i").unwrap(), vec![MinusI, PlusI]);
        assert!(parse_labels("0x").is_err());
    }

    #[test]
    fn pauli_labels_roundtrip() {
        for (k, l) in PAULI_LABELS.iter().enumerate() {
            assert_eq!(pauli_index(l).unwrap(), k);
        }
    }

    #[test]
    fn correlator_logical_roundtrip() {
        let enc = make_encoding(EncodingKind::Fock, 3).unwrap();
        let psi = enc.encode_two_qubit("+i1").unwrap();
        let c = correlators(&psi.to_density(), &enc).unwrap();
        let back = c.to_logical();
        let direct = enc.project(&psi.to_density().matrix);
        assert!(linalg::max_norm(&(back - direct)) < 1e-14);
    }
}
