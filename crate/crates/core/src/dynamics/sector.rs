use crate::error::{Error, Result};
use crate::fockspace::linalg::CMat;
use crate::fockspace::{space_dim, unflatten, ModeLabel, ModeSpace};

/// Basis states whose total cavity photon number is at most `nmax`.
///
/// Every generator used here either conserves or lowers the total photon
/// number, so this subspace is invariant and evolution can be restricted
/// to it without approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct Sector {
    pub space: Vec<ModeSpace>,
    pub nmax: usize,
    keep: Vec<usize>,
}

impl Sector {
    pub fn new(space: &[ModeSpace], nmax: usize) -> Self {
        let keep = (0..space_dim(space))
            .filter(|&i| {
                let occ = unflatten(i, space);
                let total: usize = occ
                    .iter()
                    .zip(space)
                    .filter(|(_, m)| m.label != ModeLabel::Ancilla)
                    .map(|(n, _)| n)
                    .sum();
                total <= nmax
            })
            .collect();
        Self {
            space: space.to_vec(),
            nmax,
            keep,
        }
    }

    /// Largest sector the cutoffs represent without truncating any
    /// beamsplitter orbit.
    pub fn faithful(space: &[ModeSpace]) -> Self {
        let limit = space
            .iter()
            .filter(|m| m.label != ModeLabel::Ancilla)
            .map(|m| m.cutoff)
            .min()
            .unwrap_or(1);
        Self::new(space, limit - 1)
    }

    pub fn dim(&self) -> usize {
        self.keep.len()
    }

    pub fn full_dim(&self) -> usize {
        space_dim(&self.space)
    }

    pub fn indices(&self) -> &[usize] {
        &self.keep
    }

    pub fn restrict_op(&self, m: &CMat) -> CMat {
        let k = &self.keep;
        CMat::from_fn(k.len(), k.len(), |r, c| m[(k[r], k[c])])
    }

    /// Restricts a density matrix; fails if it has weight outside.
    pub fn restrict_state(&self, rho: &CMat) -> Result<CMat> {
        let inside: f64 = self.keep.iter().map(|&i| rho[(i, i)].re).sum();
        let total = rho.trace().re;
        if (total - inside).abs() > 1e-10 * total.abs().max(1.0) {
            return Err(Error::SpaceMismatch(format!(
                "state has weight {:.3e} above total photon number {}",
                total - inside,
                self.nmax
            )));
        }
        Ok(self.restrict_op(rho))
    }

    /// Drops the part of `rho` outside the sector and rescales to the
    /// original trace. Returns the full-space matrix and the weight lost.
    pub fn truncate(&self, rho: &CMat) -> (CMat, f64) {
        let total = rho.trace().re;
        let inside: f64 = self.keep.iter().map(|&i| rho[(i, i)].re).sum();
        let mut out = self.expand(&self.restrict_op(rho));
        if inside > 0.0 {
            out *= crate::fockspace::linalg::C64::new(total / inside, 0.0);
        }
        (out, total - inside)
    }

    pub fn expand(&self, m: &CMat) -> CMat {
        let d = self.full_dim();
        let mut out = CMat::zeros(d, d);
        for (r, &i) in self.keep.iter().enumerate() {
            for (c, &j) in self.keep.iter().enumerate() {
                out[(i, j)] = m[(r, c)];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_states() {
        let space = vec![
            ModeSpace::ancilla(),
            ModeSpace::alice(10).unwrap(),
            ModeSpace::bob(10).unwrap(),
        ];
        let s = Sector::faithful(&space);
        assert_eq!(s.nmax, 9);
        assert_eq!(s.dim(), 2 * 55);
    }
}
