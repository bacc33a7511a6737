use serde::{Deserialize, Serialize};

use crate::dynamics::AncillaBranch;
use crate::error::{Error, Result};
use crate::fockspace::linalg::{self, CMat, CVec, C64, I};
use crate::fockspace::{DensityMatrix, ModeLabel, ModeSpace};

/// Which ancilla states the third and fourth conditionals use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssemblyConvention {
    /// `(|g⟩ + |e⟩)/√2` and `(|g⟩ + i|e⟩)/√2`: X and Y eigenstates.
    #[default]
    XY,
    /// `(|g⟩ + |e⟩)/√2` and `(|g⟩ − |e⟩)/√2`.
    Literal,
}

impl AssemblyConvention {
    /// Ancilla states for the conditionals `gg, ee, ++, −−`.
    pub fn probe_states(self) -> [CVec; 4] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = |a: C64, b: C64| CVec::from_vec(vec![a, b]);
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let second = match self {
            AssemblyConvention::XY => I * s,
            AssemblyConvention::Literal => C64::new(-s, 0.0),
        };
        [
            v(one, zero),
            v(zero, one),
            v(C64::new(s, 0.0), C64::new(s, 0.0)),
            v(C64::new(s, 0.0), second),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreeModeAssembly {
    pub rho: DensityMatrix,
    /// Max-norm of `ρ − ρ†` before symmetrization.
    pub hermiticity_residual: f64,
}

/// Builds `ρ = [[ρ1, ρ2], [ρ3, ρ4]]` on (ancilla, Alice, Bob) from the
/// four unnormalized conditional two-mode states:
///
/// * `ρ1 = E(gg)`, `ρ4 = E(ee)`
/// * `ρ2 = E(++) − i E(−−) − (1 − i)(ρ1 + ρ4)/2`
/// * `ρ3 = E(++) + i E(−−) − (1 + i)(ρ1 + ρ4)/2`
pub fn assemble_three_mode(
    e_gg: &DensityMatrix,
    e_ee: &DensityMatrix,
    e_pp: &DensityMatrix,
    e_mm: &DensityMatrix,
) -> Result<ThreeModeAssembly> {
    let space = &e_gg.space;
    if [e_ee, e_pp, e_mm].iter().any(|m| &m.space != space) {
        return Err(Error::SpaceMismatch("conditionals live on different spaces".into()));
    }
    if space.iter().any(|m| m.label == ModeLabel::Ancilla) {
        return Err(Error::SpaceMismatch("conditionals must not include the ancilla".into()));
    }
    let r1 = &e_gg.matrix;
    let r4 = &e_ee.matrix;
    let half_sum = (r1 + r4).map(|z| z * 0.5);
    let one = C64::new(1.0, 0.0);
    let r2 = &e_pp.matrix - e_mm.matrix.map(|z| z * I) - half_sum.map(|z| z * (one - I));
    let r3 = &e_pp.matrix + e_mm.matrix.map(|z| z * I) - half_sum.map(|z| z * (one + I));
    let d = r1.nrows();
    let mut rho = CMat::zeros(2 * d, 2 * d);
    rho.view_mut((0, 0), (d, d)).copy_from(r1);
    rho.view_mut((0, d), (d, d)).copy_from(&r2);
    rho.view_mut((d, 0), (d, d)).copy_from(&r3);
    rho.view_mut((d, d), (d, d)).copy_from(r4);
    let residual = linalg::hermiticity_residual(&rho);
    let mut full_space = vec![ModeSpace::ancilla()];
    full_space.extend_from_slice(space);
    Ok(ThreeModeAssembly {
        rho: DensityMatrix::from_raw(linalg::hermitize(&rho), full_space),
        hermiticity_residual: residual,
    })
}

/// The four conditional cavity states of a three-mode state, projecting
/// the ancilla on the probe states of `convention`.
pub fn conditional_states(
    rho: &DensityMatrix,
    convention: AssemblyConvention,
) -> Result<[DensityMatrix; 4]> {
    if rho.space.first().map(|m| m.label) != Some(ModeLabel::Ancilla) {
        return Err(Error::SpaceMismatch("state has no ancilla".into()));
    }
    let rest = rho.space[1..].to_vec();
    Ok(convention.probe_states().map(|v| {
        DensityMatrix::from_raw(AncillaBranch::Project(v).reduce(&rho.matrix), rest.clone())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{fock_state, tensor_states, trace_distance, ModeSpace};

    #[test]
    fn ground_ancilla_gives_single_block() {
        let a = ModeSpace::alice(3).unwrap();
        let b = ModeSpace::bob(3).unwrap();
        let cav = tensor_states(&[fock_state(a, 1).unwrap(), fock_state(b, 0).unwrap()])
            .unwrap()
            .to_density();
        let g = fock_state(ModeSpace::ancilla(), 0).unwrap().to_density();
        let full = g.tensor(&cav).unwrap();
        let c = conditional_states(&full, AssemblyConvention::XY).unwrap();
        let out = assemble_three_mode(&c[0], &c[1], &c[2], &c[3]).unwrap();
        assert!(trace_distance(&out.rho, &full).unwrap() < 1e-12);
        let d = 9;
        assert!(linalg::max_norm(&out.rho.matrix.view((0, d), (d, d)).into_owned()) < 1e-15);
    }
}
