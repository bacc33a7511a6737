//! Process tomography in the Pauli-transfer and χ representations.

mod budget;
mod qpt;
mod spam;

use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::Channel;
use crate::encodings::{two_qubit_paulis, EncodingKind, LogicalEncoding};
use crate::error::{Error, Result};
use crate::fockspace::linalg::{self, CMat, C64};

pub use budget::{error_budget, write_budget_csv, BudgetConfig, BudgetRow, Mechanism};
pub use qpt::{
    eswap_logical, ideal_ptm, qpt_inputs, run_qpt, InputRecord, Operation, QptMode, QptReport,
    QptSetup, OVERLAP_DEFINITION,
};
pub use spam::{calibrate_prep, PrepNoiseChannel, SpamModel};

/// Real 16×16 Pauli transfer matrix, basis order II, IX, …, ZZ with the
/// first letter on Alice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTransferMatrix {
    #[serde(with = "real_rows")]
    pub entries: DMatrix<f64>,
    pub encoding: Option<EncodingKind>,
}

/// Complex 16×16 process matrix in the two-qubit Pauli operator basis:
/// `E(ρ) = Σ χ_mn P_m ρ P_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiMatrix {
    #[serde(with = "complex_rows")]
    pub entries: CMat,
}

impl PauliTransferMatrix {
    pub fn identity() -> Self {
        Self {
            entries: DMatrix::identity(16, 16),
            encoding: None,
        }
    }

    /// `R_ij = ¼ Tr(P_i M P_j M†)` for a 4×4 unitary.
    pub fn from_unitary(u: &CMat) -> Self {
        let p = two_qubit_paulis();
        let entries = DMatrix::from_fn(16, 16, |i, j| {
            0.25 * (&p[i] * u * &p[j] * u.adjoint()).trace().re
        });
        Self {
            entries,
            encoding: None,
        }
    }

    /// PTM of a linear map on 4×4 logical matrices.
    pub fn from_logical_map<F>(map: F) -> Result<Self>
    where
        F: Fn(&CMat) -> Result<CMat>,
    {
        let p = two_qubit_paulis();
        let mut entries = DMatrix::zeros(16, 16);
        for j in 0..16 {
            let out = map(&p[j])?;
            for i in 0..16 {
                entries[(i, j)] = 0.25 * (&p[i] * &out).trace().re;
            }
        }
        Ok(Self {
            entries,
            encoding: None,
        })
    }

    pub fn compose(&self, first: &PauliTransferMatrix) -> Self {
        Self {
            entries: &self.entries * &first.entries,
            encoding: self.encoding.or(first.encoding),
        }
    }

    pub fn to_chi(&self) -> ChiMatrix {
        let r: Vec<C64> = self.entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        let rv = CMat::from_vec(256, 1, r);
        // column-major vec(R) -> vec(χ) in the same layout
        let chi = chi_inverse() * rv;
        ChiMatrix {
            entries: linalg::hermitize(&CMat::from_vec(16, 16, chi.as_slice().to_vec())),
        }
    }
}

impl ChiMatrix {
    pub fn to_ptm(&self) -> PauliTransferMatrix {
        let v = CMat::from_vec(256, 1, self.entries.as_slice().to_vec());
        let r = chi_forward() * v;
        PauliTransferMatrix {
            entries: DMatrix::from_vec(16, 16, r.iter().map(|z| z.re).collect()),
            encoding: None,
        }
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::eigvalsh(&self.entries)
            .into_iter()
            .fold(f64::MAX, f64::min)
    }
}

mod real_rows {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(serde::de::Error::custom("ragged matrix rows"));
        }
        Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
    }
}

mod complex_rows {
    use crate::fockspace::linalg::{CMat, C64};
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Parts {
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
    }

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        let part = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            m.row_iter().map(|r| r.iter().map(f).collect()).collect()
        };
        Parts {
            re: part(|z| z.re),
            im: part(|z| z.im),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let p = Parts::deserialize(d)?;
        let n = p.re.len();
        let m = p.re.first().map_or(0, Vec::len);
        let ok = p.im.len() == n && p.re.iter().chain(&p.im).all(|r| r.len() == m);
        if !ok {
            return Err(serde::de::Error::custom("mismatched re/im rows"));
        }
        Ok(DMatrix::from_fn(n, m, |i, j| C64::new(p.re[i][j], p.im[i][j])))
    }
}

/// `A` with `vec(R) = A vec(χ)`, `A[(i,j),(m,n)] = ¼ Tr(P_i P_m P_j P_n)`,
/// column-major vectorization on both sides.
fn chi_forward() -> &'static CMat {
    static A: OnceLock<CMat> = OnceLock::new();
    A.get_or_init(|| {
        let p = two_qubit_paulis();
        let mut a = CMat::zeros(256, 256);
        for n in 0..16 {
            for m in 0..16 {
                let col = n * 16 + m;
                for j in 0..16 {
                    let mid = &p[m] * &p[j] * &p[n];
                    for i in 0..16 {
                        a[(j * 16 + i, col)] = (&p[i] * &mid).trace() * 0.25;
                    }
                }
            }
        }
        a
    })
}

fn chi_inverse() -> &'static CMat {
    static INV: OnceLock<CMat> = OnceLock::new();
    INV.get_or_init(|| {
        chi_forward()
            .clone()
            .try_inverse()
            .expect("Pauli χ map is invertible")
    })
}

/// `Tr(χ_ideal χ_meas)`: the real part and the size of the imaginary
/// residual.
pub fn process_fidelity_chi(chi_meas: &ChiMatrix, chi_ideal: &ChiMatrix) -> (f64, f64) {
    let t = (&chi_ideal.entries * &chi_meas.entries).trace();
    (t.re, t.im.abs())
}

/// `Tr(R_idealᵀ R_meas) / Tr(R_idealᵀ R_ideal)`.
pub fn ptm_overlap(r_meas: &PauliTransferMatrix, r_ideal: &PauliTransferMatrix) -> f64 {
    let num = r_ideal.entries.dot(&r_meas.entries);
    let den = r_ideal.entries.dot(&r_ideal.entries);
    num / den
}

/// PTM of a two-cavity channel restricted to the logical subspace:
/// logical Paulis are lifted into the cavities, sent through the channel
/// and compressed back.
pub fn ptm_from_channel(channel: &dyn Channel, enc: &LogicalEncoding) -> Result<PauliTransferMatrix> {
    if channel.space() != enc.two_mode_space() {
        return Err(Error::SpaceMismatch("channel is not on the encoded cavities".into()));
    }
    let mut r = PauliTransferMatrix::from_logical_map(|p| {
        Ok(enc.project(&channel.apply_matrix(&enc.lift(p))?))
    })?;
    r.encoding = Some(enc.kind);
    Ok(r)
}

/// χ of a two-cavity channel; fails with `CpViolation` when it has an
/// eigenvalue below −1e-6.
pub fn chi_from_channel(channel: &dyn Channel, enc: &LogicalEncoding) -> Result<ChiMatrix> {
    let chi = ptm_from_channel(channel, enc)?.to_chi();
    let min = chi.min_eigenvalue();
    if min < -1e-6 {
        return Err(Error::CpViolation(min));
    }
    Ok(chi)
}

/// Least-squares PTM from input and output Pauli vectors (columns).
pub fn fit_ptm(p_in: &DMatrix<f64>, p_out: &DMatrix<f64>) -> Result<PauliTransferMatrix> {
    if p_in.nrows() != 16 || p_out.nrows() != 16 || p_in.ncols() != p_out.ncols() {
        return Err(Error::InvalidParameter("Pauli vectors must be 16 × N".into()));
    }
    // R P_in = P_out  ⇔  P_inᵀ Rᵀ = P_outᵀ
    let svd = p_in.transpose().svd(true, true);
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-10).count();
    if rank < 16 {
        return Err(Error::UnderdeterminedGrid(format!(
            "input Pauli vectors have rank {rank} < 16"
        )));
    }
    let rt = svd
        .solve(&p_out.transpose(), 1e-12)
        .map_err(|e| Error::NonConvergence(e.to_string()))?;
    Ok(PauliTransferMatrix {
        entries: rt.transpose(),
        encoding: None,
    })
}

/// Pauli expectation vector `Tr(P_k ρ)` of a 4×4 matrix.
pub fn pauli_vector(rho_l: &CMat) -> [f64; 16] {
    let p = two_qubit_paulis();
    let mut v = [0.0; 16];
    for k in 0..16 {
        v[k] = (&p[k] * rho_l).trace().re;
    }
    v
}
