use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::WignerGrid;
use crate::error::{Error, Result};
use crate::fockspace::linalg::{self, CMat, C64};
use crate::fockspace::{check_canonical, displaced_parity_matrix, space_dim, DensityMatrix, ModeSpace};

/// Reconstruction settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstructor {
    /// Eigenvalues below this are set to zero after the fit.
    pub clip_below: f64,
    /// Optional restriction to a subset of basis indices of the space.
    pub support: Option<Vec<usize>>,
    /// Relative singular-value threshold for the rank test.
    pub rank_tol: f64,
}

impl Default for Reconstructor {
    fn default() -> Self {
        Self {
            clip_below: -1e-8,
            support: None,
            rank_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub rho: DensityMatrix,
    /// Root-sum-square misfit of the parity values.
    pub residual: f64,
    /// Number of eigenvalues above 1e-6 of the largest.
    pub effective_rank: usize,
    /// Total weight of the eigenvalues removed by clipping.
    pub clipped: f64,
    pub parameters: usize,
}

/// Real orthonormal Hermitian basis on a `d`-dimensional space; returns
/// the coefficient of `Tr(M G_k)` per `k` for Hermitian `M`.
fn hermitian_coordinates(m: &CMat, support: &[usize]) -> Vec<f64> {
    let d = support.len();
    let s2 = std::f64::consts::SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for (a, &i) in support.iter().enumerate() {
        out.push(m[(i, i)].re);
        for &j in &support[a + 1..] {
            let z = m[(i, j)];
            out.push(s2 * z.re);
            out.push(s2 * z.im);
        }
    }
    out
}

fn from_coordinates(x: &DVector<f64>, d: usize) -> CMat {
    let s2 = std::f64::consts::SQRT_2;
    let mut rho = CMat::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        rho[(i, i)] = C64::new(x[k], 0.0);
        k += 1;
        for j in i + 1..d {
            let z = C64::new(x[k], x[k + 1]) / s2;
            rho[(i, j)] = z;
            rho[(j, i)] = z.conj();
            k += 2;
        }
    }
    rho
}

/// Least-squares density matrix from Wigner values; the trace is left
/// free and positivity is restored by clipping eigenvalues.
pub fn reconstruct_density_matrix(
    grid: &WignerGrid,
    space: &[ModeSpace],
    opts: &Reconstructor,
) -> Result<Reconstruction> {
    check_canonical(space)?;
    if grid.points.len() != grid.values.len() {
        return Err(Error::InvalidParameter("grid points and values differ".into()));
    }
    let modes = space.len();
    if !(1..=2).contains(&modes) || grid.points.iter().any(|p| p.modes() != modes) {
        return Err(Error::SpaceMismatch(
            "grid points do not match the number of modes".into(),
        ));
    }
    let full = space_dim(space);
    let support: Vec<usize> = match &opts.support {
        Some(s) => {
            if s.iter().any(|&i| i >= full) || s.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidParameter("support must be sorted indices".into()));
            }
            s.clone()
        }
        None => (0..full).collect(),
    };
    let d = support.len();
    let params = d * d;
    if grid.points.len() < params {
        return Err(Error::UnderdeterminedGrid(format!(
            "{} points for {params} real parameters",
            grid.points.len()
        )));
    }
    let values = grid.parity_values();
    if values.iter().all(|v| *v == 0.0) {
        return Err(Error::NonConvergence("grid carries no signal".into()));
    }
    let mut a = DMatrix::<f64>::zeros(grid.points.len(), params);
    for (r, p) in grid.points.iter().enumerate() {
        let m = match p.beta2 {
            None => displaced_parity_matrix(p.beta1, space[0].cutoff),
            Some(b2) => linalg::kron(
                &displaced_parity_matrix(p.beta1, space[0].cutoff),
                &displaced_parity_matrix(b2, space[1].cutoff),
            ),
        };
        for (c, v) in hermitian_coordinates(&m, &support).into_iter().enumerate() {
            a[(r, c)] = v;
        }
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > opts.rank_tol * smax)
        .count();
    if rank < params {
        return Err(Error::UnderdeterminedGrid(format!(
            "design matrix rank {rank} < {params}"
        )));
    }
    let b = DVector::from_vec(values);
    let x = svd
        .solve(&b, opts.rank_tol * smax)
        .map_err(|e| Error::NonConvergence(e.to_string()))?;
    let residual = (&a * &x - &b).norm();
    let small = from_coordinates(&x, d);
    let eig = linalg::eigh(&small);
    let mut clipped = 0.0;
    let vals: Vec<f64> = eig
        .values
        .iter()
        .map(|&l| {
            if l < opts.clip_below {
                clipped += -l;
                0.0
            } else {
                l
            }
        })
        .collect();
    let diag = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        vals.iter().map(|&l| C64::new(l, 0.0)),
    ));
    let fixed = linalg::hermitize(&(&eig.vectors * diag * eig.vectors.adjoint()));
    let top = vals.iter().cloned().fold(0.0, f64::max);
    let effective_rank = vals.iter().filter(|&&l| l > 1e-6 * top).count();
    let mut rho = CMat::zeros(full, full);
    for (r, &i) in support.iter().enumerate() {
        for (c, &j) in support.iter().enumerate() {
            rho[(i, j)] = fixed[(r, c)];
        }
    }
    if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("reconstruct_density_matrix"));
    }
    Ok(Reconstruction {
        rho: DensityMatrix::from_raw(rho, space.to_vec()),
        residual,
        effective_rank,
        clipped,
        parameters: params,
    })
}

/// The origin plus `cutoff` concentric rings of `2·cutoff + 1` points
/// out to `radius`; enough for the displaced parities of one mode to be
/// informationally complete up to `cutoff`.
pub fn ring_points(cutoff: usize, radius: f64) -> Vec<C64> {
    let n = 2 * cutoff + 1;
    let mut pts = vec![C64::new(0.0, 0.0)];
    for ring in 1..=cutoff {
        let r = radius * ring as f64 / cutoff as f64;
        let offset = 0.5 * (ring % 2) as f64;
        for j in 0..n {
            let phi = 2.0 * std::f64::consts::PI * (j as f64 + offset) / n as f64;
            pts.push(C64::from_polar(r, phi));
        }
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{state_fidelity, ModeSpace};
    use crate::tomography::{WignerGrid, WignerNorm};

    #[test]
    fn single_mode_round_trip() {
        let m = ModeSpace::alice(4).unwrap();
        let mut rho = CMat::zeros(4, 4);
        rho[(0, 0)] = C64::new(0.6, 0.0);
        rho[(2, 2)] = C64::new(0.4, 0.0);
        rho[(0, 2)] = C64::new(0.2, 0.3);
        rho[(2, 0)] = C64::new(0.2, -0.3);
        let rho = DensityMatrix::new(rho, vec![m]).unwrap();
        let pts: Vec<_> = ring_points(4, 1.5)
            .into_iter()
            .map(super::super::GridPoint::single)
            .collect();
        let grid = WignerGrid::evaluate(&rho, &pts, WignerNorm::TwoOverPi).unwrap();
        let rec = reconstruct_density_matrix(&grid, &[m], &Reconstructor::default()).unwrap();
        assert!(linalg::max_norm(&(rec.rho.matrix.clone() - rho.matrix.clone())) < 1e-9);
        assert!(state_fidelity(&rec.rho, &rho).unwrap() > 0.999999);
    }

    #[test]
    fn too_few_points_rejected() {
        let m = ModeSpace::alice(4).unwrap();
        let rho = DensityMatrix::maximally_mixed(&[m]).unwrap();
        let pts = WignerGrid::single_plane(3, 1.0);
        let grid = WignerGrid::evaluate(&rho, &pts, WignerNorm::Parity).unwrap();
        assert!(matches!(
            reconstruct_density_matrix(&grid, &[m], &Reconstructor::default()),
            Err(Error::UnderdeterminedGrid(_))
        ));
    }
}
