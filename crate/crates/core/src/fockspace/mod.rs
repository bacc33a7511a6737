//! Truncated Fock-space linear algebra.
//!
//! Every multi-mode object uses the canonical mode order
//! (ancilla, Alice, Bob) with the leftmost mode as the slowest index.

pub mod linalg;
mod metrics;
mod ops;
mod serial;
pub mod sparse;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use linalg::{CMat, CVec, C64};
pub use metrics::*;
pub use ops::*;
pub use serial::MatrixRecord;

/// Tolerances shared across the crate.
pub mod tol {
    pub const UNITARITY: f64 = 1e-9;
    pub const HERMITICITY: f64 = 1e-10;
    pub const PHASE_EQUIVALENCE: f64 = 1e-8;
    pub const NORM: f64 = 1e-9;
    pub const NEGATIVE_EIGENVALUE: f64 = 1e-8;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModeLabel {
    Ancilla,
    Alice,
    Bob,
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModeLabel::Ancilla => "ancilla",
            ModeLabel::Alice => "alice",
            ModeLabel::Bob => "bob",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ModeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ancilla" | "qb" => Ok(ModeLabel::Ancilla),
            "alice" | "a" => Ok(ModeLabel::Alice),
            "bob" | "b" => Ok(ModeLabel::Bob),
            other => Err(Error::InvalidParameter(format!("unknown mode label `{other}`"))),
        }
    }
}

/// One truncated mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeSpace {
    pub cutoff: usize,
    pub label: ModeLabel,
}

impl ModeSpace {
    pub fn new(label: ModeLabel, cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::InvalidParameter(format!(
                "mode {label} needs cutoff >= 2, got {cutoff}"
            )));
        }
        Ok(Self { cutoff, label })
    }

    /// Two-level transmon ancilla (|g>, |e>).
    pub fn ancilla() -> Self {
        Self {
            cutoff: 2,
            label: ModeLabel::Ancilla,
        }
    }

    pub fn alice(cutoff: usize) -> Result<Self> {
        Self::new(ModeLabel::Alice, cutoff)
    }

    pub fn bob(cutoff: usize) -> Result<Self> {
        Self::new(ModeLabel::Bob, cutoff)
    }
}

/// Checks that a list of modes is in canonical order with unique labels.
pub fn check_canonical(space: &[ModeSpace]) -> Result<()> {
    if space.is_empty() {
        return Err(Error::SpaceMismatch("empty mode list".into()));
    }
    for w in space.windows(2) {
        if w[0].label >= w[1].label {
            return Err(Error::SpaceMismatch(format!(
                "modes must be unique and ordered (ancilla, alice, bob); got {} before {}",
                w[0].label, w[1].label
            )));
        }
    }
    Ok(())
}

pub fn space_dim(space: &[ModeSpace]) -> usize {
    space.iter().map(|m| m.cutoff).product()
}

pub fn describe_space(space: &[ModeSpace]) -> String {
    let parts: Vec<String> = space
        .iter()
        .map(|m| format!("{}({})", m.label, m.cutoff))
        .collect();
    format!("[{}]", parts.join(", "))
}

pub(crate) fn same_space(a: &[ModeSpace], b: &[ModeSpace]) -> Result<()> {
    if a != b {
        return Err(Error::SpaceMismatch(format!(
            "{} vs {}",
            describe_space(a),
            describe_space(b)
        )));
    }
    Ok(())
}

/// A linear operator on a (multi-)mode space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    pub matrix: CMat,
    pub space: Vec<ModeSpace>,
}

impl Operator {
    pub fn new(matrix: CMat, space: Vec<ModeSpace>) -> Result<Self> {
        check_canonical(&space)?;
        let d = space_dim(&space);
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::SpaceMismatch(format!(
                "matrix is {}x{}, space {} has dimension {d}",
                matrix.nrows(),
                matrix.ncols(),
                describe_space(&space)
            )));
        }
        Ok(Self { matrix, space })
    }

    pub fn identity(space: &[ModeSpace]) -> Result<Self> {
        let d = space_dim(space);
        Self::new(CMat::identity(d, d), space.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dagger(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            space: self.space.clone(),
        }
    }

    /// Operator product `self · other`.
    pub fn compose(&self, other: &Operator) -> Result<Self> {
        same_space(&self.space, &other.space)?;
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
            space: self.space.clone(),
        })
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            matrix: self.matrix.map(|z| z * s),
            space: self.space.clone(),
        }
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        same_space(&self.space, &other.space)?;
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
            space: self.space.clone(),
        })
    }

    pub fn is_hermitian(&self) -> bool {
        linalg::hermiticity_residual(&self.matrix) <= tol::HERMITICITY
    }

    pub fn is_unitary(&self) -> bool {
        linalg::unitarity_residual(&self.matrix) <= tol::UNITARITY
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        same_space(&self.space, &psi.space)?;
        Ok(StateVector {
            amplitudes: &self.matrix * &psi.amplitudes,
            space: self.space.clone(),
        })
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        same_space(&self.space, &rho.space)?;
        Ok(DensityMatrix {
            matrix: &self.matrix * &rho.matrix * self.matrix.adjoint(),
            space: self.space.clone(),
        })
    }

    pub fn expectation(&self, rho: &DensityMatrix) -> Result<C64> {
        same_space(&self.space, &rho.space)?;
        Ok((&self.matrix * &rho.matrix).trace())
    }
}

/// A pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: CVec,
    pub space: Vec<ModeSpace>,
}

impl StateVector {
    pub fn new(amplitudes: CVec, space: Vec<ModeSpace>) -> Result<Self> {
        check_canonical(&space)?;
        if amplitudes.len() != space_dim(&space) {
            return Err(Error::SpaceMismatch(format!(
                "{} amplitudes for space {}",
                amplitudes.len(),
                describe_space(&space)
            )));
        }
        Ok(Self { amplitudes, space })
    }

    /// Product of number states, one occupation per mode.
    pub fn basis(space: &[ModeSpace], occupations: &[usize]) -> Result<Self> {
        check_canonical(space)?;
        if occupations.len() != space.len() {
            return Err(Error::SpaceMismatch(format!(
                "{} occupations for {} modes",
                occupations.len(),
                space.len()
            )));
        }
        let mut index = 0;
        for (m, &n) in space.iter().zip(occupations) {
            if n >= m.cutoff {
                return Err(Error::InvalidParameter(format!(
                    "occupation {n} exceeds cutoff {} of {}",
                    m.cutoff, m.label
                )));
            }
            index = index * m.cutoff + n;
        }
        let mut amps = CVec::zeros(space_dim(space));
        amps[index] = linalg::ONE;
        Ok(Self {
            amplitudes: amps,
            space: space.to_vec(),
        })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidParameter("cannot normalize a zero vector".into()));
        }
        Ok(Self {
            amplitudes: self.amplitudes.unscale(n),
            space: self.space.clone(),
        })
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        same_space(&self.space, &other.space)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let mut space = self.space.clone();
        space.extend_from_slice(&other.space);
        check_canonical(&space)?;
        Ok(Self {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
            space,
        })
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
            space: self.space.clone(),
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            amplitudes: self.amplitudes.map(|z| z * s),
            space: self.space.clone(),
        }
    }

    pub fn add(&self, other: &StateVector) -> Result<Self> {
        same_space(&self.space, &other.space)?;
        Ok(Self {
            amplitudes: &self.amplitudes + &other.amplitudes,
            space: self.space.clone(),
        })
    }
}

/// A (possibly subnormalized) mixed state. Reconstructed states keep
/// whatever trace the data support.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub matrix: CMat,
    pub space: Vec<ModeSpace>,
}

impl DensityMatrix {
    /// Wraps a matrix after checking shape and Hermiticity.
    pub fn new(matrix: CMat, space: Vec<ModeSpace>) -> Result<Self> {
        check_canonical(&space)?;
        let d = space_dim(&space);
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::SpaceMismatch(format!(
                "density matrix is {}x{}, space {} has dimension {d}",
                matrix.nrows(),
                matrix.ncols(),
                describe_space(&space)
            )));
        }
        let res = linalg::hermiticity_residual(&matrix);
        if res > tol::HERMITICITY * linalg::max_norm(&matrix).max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "density matrix not Hermitian (residual {res:.2e})"
            )));
        }
        Ok(Self { matrix, space })
    }

    /// Skips validation; used for intermediate linear-algebra results.
    pub fn from_raw(matrix: CMat, space: Vec<ModeSpace>) -> Self {
        Self { matrix, space }
    }

    pub fn maximally_mixed(space: &[ModeSpace]) -> Result<Self> {
        let d = space_dim(space);
        Self::new(
            CMat::identity(d, d).unscale(d as f64),
            space.to_vec(),
        )
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix)
    }

    /// Checks Hermiticity, positivity and trace bounds.
    pub fn validate_physical(&self) -> Result<()> {
        let res = linalg::hermiticity_residual(&self.matrix);
        if res > tol::HERMITICITY {
            return Err(Error::InvalidParameter(format!(
                "not Hermitian (residual {res:.2e})"
            )));
        }
        let min = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -tol::NEGATIVE_EIGENVALUE {
            return Err(Error::InvalidParameter(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        let tr = self.trace();
        if tr > 1.0 + 1e-8 {
            return Err(Error::InvalidParameter(format!("trace {tr} exceeds 1")));
        }
        Ok(())
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<Self> {
        let mut space = self.space.clone();
        space.extend_from_slice(&other.space);
        check_canonical(&space)?;
        Ok(Self {
            matrix: self.matrix.kronecker(&other.matrix),
            space,
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            matrix: self.matrix.scale(s),
            space: self.space.clone(),
        }
    }

    pub fn add(&self, other: &DensityMatrix) -> Result<Self> {
        same_space(&self.space, &other.space)?;
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
            space: self.space.clone(),
        })
    }

    pub fn hermitized(&self) -> Self {
        Self {
            matrix: linalg::hermitize(&self.matrix),
            space: self.space.clone(),
        }
    }
}
