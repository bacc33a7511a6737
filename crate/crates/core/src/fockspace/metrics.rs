use super::linalg::{self, CMat};
use super::ops::partial_trace;
use super::{same_space, DensityMatrix, ModeLabel, StateVector};
use crate::error::Result;

fn looks_pure(rho: &DensityMatrix) -> bool {
    (rho.trace() - 1.0).abs() < 1e-9 && (rho.purity() - 1.0).abs() < 1e-9
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(ρ) σ sqrt(ρ)))²`.
///
/// When either argument is a normalized pure state this reduces to
/// `Tr(ρσ)`, which is used directly.
pub fn state_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_space(&rho.space, &sigma.space)?;
    if looks_pure(sigma) || looks_pure(rho) {
        return Ok((&rho.matrix * &sigma.matrix).trace().re);
    }
    let s = linalg::sqrtm_psd(&rho.matrix);
    let inner = &s * &sigma.matrix * &s;
    let root: f64 = linalg::eigvalsh(&inner)
        .iter()
        .map(|v| v.max(0.0).sqrt())
        .sum();
    Ok(root * root)
}

/// `⟨ψ|ρ|ψ⟩` for a pure target.
pub fn overlap_with_pure(rho: &DensityMatrix, psi: &StateVector) -> Result<f64> {
    same_space(&rho.space, &psi.space)?;
    Ok((psi.amplitudes.adjoint() * &rho.matrix * &psi.amplitudes)[(0, 0)].re)
}

/// `½ ‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_space(&rho.space, &sigma.space)?;
    let diff: CMat = &rho.matrix - &sigma.matrix;
    Ok(0.5 * linalg::eigvalsh(&diff).iter().map(|v| v.abs()).sum::<f64>())
}

/// Von Neumann entropy (natural log), ignoring eigenvalues below 1e-15.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.eigenvalues()
        .iter()
        .filter(|&&p| p > 1e-15)
        .map(|&p| -p * p.ln())
        .sum()
}

/// Entropy of the reduced state on `keep`.
pub fn entanglement_entropy(psi: &StateVector, keep: &[ModeLabel]) -> Result<f64> {
    let reduced = partial_trace(&psi.to_density(), keep)?;
    Ok(von_neumann_entropy(&reduced))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{coherent_state, fock_state, ModeSpace, C64};

    #[test]
    fn pure_self_fidelity_is_one() {
        let m = ModeSpace::alice(6).unwrap();
        let psi = coherent_state(C64::new(0.5, 0.2), m).unwrap().to_density();
        assert!((state_fidelity(&psi, &psi).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_fock_states() {
        let m = ModeSpace::alice(3).unwrap();
        let a = fock_state(m, 0).unwrap().to_density();
        let b = fock_state(m, 1).unwrap().to_density();
        assert!(state_fidelity(&a, &b).unwrap().abs() < 1e-15);
    }

    #[test]
    fn opposite_coherent_states_overlap() {
        let m = ModeSpace::alice(30).unwrap();
        let alpha: f64 = 1.41;
        let p = coherent_state(C64::new(alpha, 0.0), m).unwrap().to_density();
        let q = coherent_state(C64::new(-alpha, 0.0), m).unwrap().to_density();
        let f = state_fidelity(&p, &q).unwrap();
        let want = (-4.0 * alpha * alpha).exp();
        assert!((f - want).abs() < 1e-9, "{f} vs {want}");
        assert!((f - 3.48e-4).abs() < 1e-5);
    }

    #[test]
    fn mixed_state_fidelity_matches_classical_overlap() {
        // Diagonal states: fidelity is the squared Bhattacharyya coefficient.
        let m = ModeSpace::alice(3).unwrap();
        let diag = |p: [f64; 3]| {
            let mut mat = CMat::zeros(3, 3);
            for k in 0..3 {
                mat[(k, k)] = C64::new(p[k], 0.0);
            }
            DensityMatrix::new(mat, vec![m]).unwrap()
        };
        let p: [f64; 3] = [0.5, 0.3, 0.2];
        let q: [f64; 3] = [0.1, 0.6, 0.3];
        let bc: f64 = p.iter().zip(&q).map(|(a, b)| (a * b).sqrt()).sum();
        let f = state_fidelity(&diag(p), &diag(q)).unwrap();
        assert!((f - bc * bc).abs() < 1e-12);
    }
}
