use nalgebra::DMatrix;

use super::GridPoint;
use crate::encodings::{pauli_matrices, CorrelatorSet, EncodingKind, LogicalEncoding};
use crate::error::{Error, Result};
use crate::fockspace::displaced_parity_matrix;
use crate::fockspace::linalg::C64;

/// Sixteen joint-parity points and the linear map that turns their
/// values into the sixteen logical correlators.
///
/// Per cavity the probes are β ∈ {α, −α, 0, iπ/(8α)}. On the logical
/// subspace their displaced parities are close to (I − Z)/2, (I + Z)/2,
/// X and a multiple of Y; the exact 4×4 single-mode transfer matrix `T`
/// is computed from the codewords, so the inverse map is exact for any
/// state inside the code space and biased only by leakage out of it.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliPlan {
    pub alpha: f64,
    pub points: Vec<GridPoint>,
    /// `values = forward · correlators` for code-space states.
    pub forward: DMatrix<f64>,
    /// `correlators = inverse · values`.
    pub inverse: DMatrix<f64>,
}

pub fn pauli_points_plan(enc: &LogicalEncoding) -> Result<PauliPlan> {
    let alpha = match enc.kind {
        EncodingKind::Coherent { alpha } => alpha,
        other => return Err(Error::EncodingUnsupported(other.to_string())),
    };
    let betas = [
        C64::new(alpha, 0.0),
        C64::new(-alpha, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, std::f64::consts::PI / (8.0 * alpha)),
    ];
    let b = enc.basis();
    let paulis = pauli_matrices();
    // T[k][μ] = ½ Tr(σ_μ B† M_k B)
    let t = DMatrix::from_fn(4, 4, |k, mu| {
        let m = displaced_parity_matrix(betas[k], enc.cutoff);
        let l = b.adjoint() * m * b;
        0.5 * (&paulis[mu] * l).trace().re
    });
    let forward = t.kronecker(&t);
    let inverse = forward
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::UnderdeterminedGrid("Pauli plan map is singular".into()))?;
    let mut points = Vec::with_capacity(16);
    for &ba in &betas {
        for &bb in &betas {
            points.push(GridPoint::joint(ba, bb));
        }
    }
    Ok(PauliPlan {
        alpha,
        points,
        forward,
        inverse,
    })
}

impl PauliPlan {
    /// Correlators from joint-parity values (parity normalization) in
    /// point order.
    pub fn correlators(&self, values: &[f64]) -> Result<CorrelatorSet> {
        if values.len() != 16 {
            return Err(Error::InvalidParameter(format!(
                "Pauli plan needs 16 values, got {}",
                values.len()
            )));
        }
        let v = nalgebra::DVector::from_column_slice(values);
        let c = &self.inverse * v;
        let mut out = [0.0; 16];
        out.copy_from_slice(c.as_slice());
        Ok(CorrelatorSet { values: out })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encodings::{correlators, make_encoding};
    use crate::tomography::{WignerGrid, WignerNorm};

    #[test]
    fn plan_matches_intrinsic_on_codewords() {
        let enc = make_encoding(EncodingKind::Coherent { alpha: 1.41 }, 14).unwrap();
        let plan = pauli_points_plan(&enc).unwrap();
        let rho = enc.encode_two_qubit("01").unwrap().to_density();
        let grid = WignerGrid::evaluate(&rho, &plan.points, WignerNorm::Parity).unwrap();
        let c = plan.correlators(&grid.values).unwrap();
        let want = correlators(&rho, &enc).unwrap();
        assert!((c.get("ZI") - want.get("ZI")).abs() < 0.02);
        assert!((c.get("IZ") - want.get("IZ")).abs() < 0.02);
    }

    #[test]
    fn fock_encoding_unsupported() {
        let enc = make_encoding(EncodingKind::Fock, 4).unwrap();
        assert!(matches!(pauli_points_plan(&enc), Err(Error::EncodingUnsupported(_))));
    }
}
