use super::ResonantBranch;
use crate::error::{Error, Result};
use crate::fockspace::linalg::{CMat, C64};
use crate::fockspace::{
    annihilation, check_canonical, embed, number, unflatten, ModeLabel, ModeSpace, Operator,
};

/// `exp(−i t (K_A/2) n_A(n_A−1)) ⊗ exp(−i t (K_B/2) n_B(n_B−1))`.
pub fn kerr_unitary(k_a: f64, k_b: f64, t: f64, a: ModeSpace, b: ModeSpace) -> Result<Operator> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("Kerr time must be >= 0, got {t}")));
    }
    let space = vec![a, b];
    check_canonical(&space)?;
    let d = a.cutoff * b.cutoff;
    let mut m = CMat::zeros(d, d);
    for i in 0..d {
        let occ = unflatten(i, &space);
        let e = |k: f64, n: usize| 0.5 * k * (n as f64) * (n as f64 - 1.0);
        let phase = -t * (e(k_a, occ[0]) + e(k_b, occ[1]));
        m[(i, i)] = C64::from_polar(1.0, phase);
    }
    Operator::new(m, space)
}

/// Parametrically driven beamsplitter `g e^{iδt} a b† + h.c.` with the
/// detuning `δ` applied only on the off-resonant ancilla branch.
#[derive(Debug, Clone)]
pub struct DrivenBeamSplitter {
    pub g: f64,
    pub delta: f64,
    pub space: Vec<ModeSpace>,
    ab_dag: CMat,
    /// Projector onto the detuned ancilla branch (identity without ancilla).
    off_branch: CMat,
    n_b: CMat,
}

pub fn driven_bs_hamiltonian(
    g: f64,
    delta: f64,
    space: &[ModeSpace],
    resonant: ResonantBranch,
) -> Result<DrivenBeamSplitter> {
    check_canonical(space)?;
    let find = |l: ModeLabel| {
        space
            .iter()
            .copied()
            .find(|m| m.label == l)
            .ok_or_else(|| Error::SpaceMismatch(format!("driven beamsplitter needs {l}")))
    };
    let a = find(ModeLabel::Alice)?;
    let b = find(ModeLabel::Bob)?;
    let am = embed(&annihilation(a), space)?.matrix;
    let bm = embed(&annihilation(b), space)?.matrix;
    let n_b = embed(&number(b), space)?.matrix;
    let d = am.nrows();
    let off_branch = match space.iter().find(|m| m.label == ModeLabel::Ancilla) {
        Some(&anc) => {
            let mut p = CMat::zeros(2, 2);
            let k = match resonant {
                ResonantBranch::G => 1,
                ResonantBranch::E => 0,
            };
            p[(k, k)] = C64::new(1.0, 0.0);
            embed(&Operator::new(p, vec![anc])?, space)?.matrix
        }
        None => CMat::identity(d, d),
    };
    Ok(DrivenBeamSplitter {
        g,
        delta,
        space: space.to_vec(),
        ab_dag: &am * bm.adjoint(),
        off_branch,
        n_b,
    })
}

impl DrivenBeamSplitter {
    /// Lab-frame Hamiltonian at time `t`.
    pub fn at(&self, t: f64) -> Operator {
        let on = C64::new(1.0, 0.0);
        let off = C64::from_polar(1.0, self.delta * t);
        let d = self.ab_dag.nrows();
        let on_branch = CMat::identity(d, d) - &self.off_branch;
        let coupling = (&on_branch * &self.ab_dag).map(|z| z * on * self.g)
            + (&self.off_branch * &self.ab_dag).map(|z| z * off * self.g);
        Operator {
            matrix: &coupling + coupling.adjoint(),
            space: self.space.clone(),
        }
    }

    /// Static Hamiltonian in the frame rotating at `δ n_B` on the detuned
    /// branch: `g(ab† + a†b) + δ P_off n_B`.
    pub fn rotating_frame(&self) -> Operator {
        let c = self.ab_dag.map(|z| z * self.g);
        Operator {
            matrix: &c + c.adjoint() + (&self.off_branch * &self.n_b).map(|z| z * self.delta),
            space: self.space.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::linalg;

    #[test]
    fn kerr_zero_is_identity() {
        let a = ModeSpace::alice(5).unwrap();
        let b = ModeSpace::bob(5).unwrap();
        let u = kerr_unitary(0.0, 0.0, 1e-5, a, b).unwrap();
        assert!(linalg::max_norm(&(u.matrix - CMat::identity(25, 25))) < 1e-15);
    }

    #[test]
    fn time_dependent_and_rotating_frames_agree_on_populations() {
        let a = ModeSpace::alice(3).unwrap();
        let b = ModeSpace::bob(3).unwrap();
        let space = vec![a, b];
        let g = 1.0;
        let delta = 0.7;
        let bs = driven_bs_hamiltonian(g, delta, &space, ResonantBranch::G).unwrap();
        let psi0 = crate::fockspace::StateVector::basis(&space, &[0, 1]).unwrap();
        let t_end = 2.0;
        let steps = 4000;
        let h = t_end / steps as f64;
        let mut psi = psi0.amplitudes.clone();
        for k in 0..steps {
            let hm = bs.at((k as f64 + 0.5) * h).matrix;
            psi = linalg::expm(&hm, C64::new(0.0, -h)).unwrap() * psi;
        }
        let u = linalg::expm(&bs.rotating_frame().matrix, C64::new(0.0, -t_end)).unwrap();
        let psi_rot = u * psi0.amplitudes;
        for i in 0..9 {
            assert!((psi[i].norm_sqr() - psi_rot[i].norm_sqr()).abs() < 1e-6);
        }
    }
}
