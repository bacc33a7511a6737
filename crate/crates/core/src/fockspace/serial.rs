use serde::{Deserialize, Serialize};

use super::linalg::{CMat, CVec, C64};
use super::{space_dim, DensityMatrix, ModeLabel, ModeSpace, Operator, StateVector};
use crate::error::{Error, Result};

/// Flat JSON form of a vector or matrix, row-major.
///
/// `dims` holds the per-mode cutoffs; a vector has `prod(dims)` entries
/// and a matrix its square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub dims: Vec<usize>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub mode_order: Vec<ModeLabel>,
}

impl MatrixRecord {
    fn from_parts(space: &[ModeSpace], entries: impl Iterator<Item = C64>) -> Self {
        let (re, im) = entries.map(|z| (z.re, z.im)).unzip();
        Self {
            dims: space.iter().map(|m| m.cutoff).collect(),
            re,
            im,
            mode_order: space.iter().map(|m| m.label).collect(),
        }
    }

    fn matrix_entries(m: &CMat) -> impl Iterator<Item = C64> + '_ {
        (0..m.nrows()).flat_map(move |r| (0..m.ncols()).map(move |c| m[(r, c)]))
    }

    pub fn from_operator(op: &Operator) -> Self {
        Self::from_parts(&op.space, Self::matrix_entries(&op.matrix))
    }

    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self::from_parts(&rho.space, Self::matrix_entries(&rho.matrix))
    }

    pub fn from_state(psi: &StateVector) -> Self {
        Self::from_parts(&psi.space, psi.amplitudes.iter().copied())
    }

    fn space(&self) -> Result<Vec<ModeSpace>> {
        if self.dims.len() != self.mode_order.len() {
            return Err(Error::SpaceMismatch(format!(
                "{} dims for {} mode labels",
                self.dims.len(),
                self.mode_order.len()
            )));
        }
        self.dims
            .iter()
            .zip(&self.mode_order)
            .map(|(&c, &l)| ModeSpace::new(l, c))
            .collect()
    }

    fn values(&self, expected: usize) -> Result<Vec<C64>> {
        if self.re.len() != expected || self.im.len() != expected {
            return Err(Error::SpaceMismatch(format!(
                "expected {expected} entries, found re={} im={}",
                self.re.len(),
                self.im.len()
            )));
        }
        Ok(self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&r, &i)| C64::new(r, i))
            .collect())
    }

    fn matrix(&self) -> Result<(CMat, Vec<ModeSpace>)> {
        let space = self.space()?;
        let d = space_dim(&space);
        let vals = self.values(d * d)?;
        Ok((CMat::from_row_slice(d, d, &vals), space))
    }

    pub fn to_operator(&self) -> Result<Operator> {
        let (m, space) = self.matrix()?;
        Operator::new(m, space)
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        let (m, space) = self.matrix()?;
        DensityMatrix::new(m, space)
    }

    pub fn to_state(&self) -> Result<StateVector> {
        let space = self.space()?;
        let vals = self.values(space_dim(&space))?;
        StateVector::new(CVec::from_vec(vals), space)
    }
}
