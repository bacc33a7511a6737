//! Compressed sparse row storage for the few sparse products the
//! master-equation integrator needs.

use super::linalg::{CMat, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl Csr {
    /// Drops entries with modulus at or below `tol`.
    pub fn from_dense(m: &CMat, tol: f64) -> Self {
        let mut indptr = Vec::with_capacity(m.nrows() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                if v.norm() > tol {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            nrows: m.nrows(),
            ncols: m.ncols(),
            indptr,
            indices,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                m[(r, self.indices[k])] += self.values[k];
            }
        }
        m
    }

    /// Largest modulus among the stored entries.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    /// `out += s · (self · x)` for a dense `x`.
    pub fn mul_dense_acc(&self, x: &CMat, s: C64, out: &mut CMat) {
        assert_eq!(self.ncols, x.nrows());
        assert_eq!((self.nrows, x.ncols()), out.shape());
        let (n_in, n_out) = (x.nrows(), self.nrows);
        let xs = x.as_slice();
        let os = out.as_mut_slice();
        for c in 0..x.ncols() {
            let col = &xs[c * n_in..(c + 1) * n_in];
            let dst = &mut os[c * n_out..(c + 1) * n_out];
            for (r, d) in dst.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for k in self.indptr[r]..self.indptr[r + 1] {
                    acc += self.values[k] * col[self.indices[k]];
                }
                *d += s * acc;
            }
        }
    }

    pub fn mul_dense(&self, x: &CMat) -> CMat {
        let mut out = CMat::zeros(self.nrows, x.ncols());
        self.mul_dense_acc(x, C64::new(1.0, 0.0), &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense_product() {
        let a = CMat::from_fn(4, 4, |r, c| {
            if (r + 2 * c) % 3 == 0 {
                C64::new(r as f64 - 1.0, c as f64 * 0.5)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let x = CMat::from_fn(4, 3, |r, c| C64::new((r * c) as f64, r as f64 - c as f64));
        let s = Csr::from_dense(&a, 0.0);
        assert_eq!(s.to_dense(), a);
        let diff = s.mul_dense(&x) - &a * &x;
        assert!(diff.iter().all(|z| z.norm() < 1e-14));
    }
}
