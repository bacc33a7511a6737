//! Wigner and joint-Wigner evaluation, parity shot sampling, density
//! matrix reconstruction and three-mode assembly.

mod assembly;
mod plan;
mod reconstruct;
mod sampling;

use std::f64::consts::FRAC_2_PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::linalg::{CMat, C64};
use crate::fockspace::{displaced_parity_matrix, DensityMatrix, ModeLabel};

pub use assembly::{assemble_three_mode, conditional_states, AssemblyConvention, ThreeModeAssembly};
pub use plan::{pauli_points_plan, PauliPlan};
pub use reconstruct::{reconstruct_density_matrix, ring_points, Reconstruction, Reconstructor};
pub use sampling::{sample_parity_shots, MeasurementRecord, Shot};

/// How Wigner values are scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WignerNorm {
    /// `(2/π)` per mode, so the single-mode function integrates to one.
    #[default]
    TwoOverPi,
    /// Bare displaced-parity expectation in [−1, 1].
    Parity,
}

impl WignerNorm {
    pub fn factor(self, modes: usize) -> f64 {
        match self {
            WignerNorm::TwoOverPi => FRAC_2_PI.powi(modes as i32),
            WignerNorm::Parity => 1.0,
        }
    }
}

/// A phase-space point; `beta2` is absent for single-mode grids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub beta1: C64,
    pub beta2: Option<C64>,
}

impl GridPoint {
    pub fn single(beta: C64) -> Self {
        Self {
            beta1: beta,
            beta2: None,
        }
    }

    pub fn joint(beta1: C64, beta2: C64) -> Self {
        Self {
            beta1,
            beta2: Some(beta2),
        }
    }

    pub fn modes(&self) -> usize {
        if self.beta2.is_some() {
            2
        } else {
            1
        }
    }
}

/// Wigner values on a set of phase-space points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub points: Vec<GridPoint>,
    pub values: Vec<f64>,
    /// 0 for exact values.
    pub shots_per_point: usize,
    pub normalization: WignerNorm,
}

/// Which pair of quadratures a joint-Wigner plane spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Plane {
    /// `(Re β1, Re β2)` with both imaginary parts zero.
    ReRe,
    /// `(Im β1, Im β2)` with both real parts zero.
    ImIm,
}

/// `n` evenly spaced values over `[-extent, extent]`.
pub fn axis(n: usize, extent: f64) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n)
        .map(|k| -extent + 2.0 * extent * k as f64 / (n - 1) as f64)
        .collect()
}

/// Default plane: 21 × 21 points with |coordinate| ≤ 2.5.
pub const DEFAULT_GRID_N: usize = 21;
pub const DEFAULT_GRID_EXTENT: f64 = 2.5;

impl WignerGrid {
    fn check(&self) -> Result<()> {
        if self.points.len() != self.values.len() {
            return Err(Error::InvalidParameter(format!(
                "{} points but {} values",
                self.points.len(),
                self.values.len()
            )));
        }
        Ok(())
    }

    /// Square grid over the real plane of a single mode.
    pub fn single_plane(n: usize, extent: f64) -> Vec<GridPoint> {
        let ax = axis(n, extent);
        let mut pts = Vec::with_capacity(n * n);
        for &y in &ax {
            for &x in &ax {
                pts.push(GridPoint::single(C64::new(x, y)));
            }
        }
        pts
    }

    /// Square grid over one joint plane.
    pub fn joint_plane(plane: Plane, n: usize, extent: f64) -> Vec<GridPoint> {
        let ax = axis(n, extent);
        let mk = |v: f64| match plane {
            Plane::ReRe => C64::new(v, 0.0),
            Plane::ImIm => C64::new(0.0, v),
        };
        let mut pts = Vec::with_capacity(n * n);
        for &y in &ax {
            for &x in &ax {
                pts.push(GridPoint::joint(mk(x), mk(y)));
            }
        }
        pts
    }

    /// All pairs of the two single-mode point sets.
    pub fn product(points_a: &[C64], points_b: &[C64]) -> Vec<GridPoint> {
        let mut out = Vec::with_capacity(points_a.len() * points_b.len());
        for &a in points_a {
            for &b in points_b {
                out.push(GridPoint::joint(a, b));
            }
        }
        out
    }

    /// Exact Wigner values of `rho` (one or two modes) at `points`.
    pub fn evaluate(rho: &DensityMatrix, points: &[GridPoint], norm: WignerNorm) -> Result<Self> {
        let values = points
            .iter()
            .map(|p| match p.beta2 {
                None => wigner_single(rho, p.beta1, norm),
                Some(b2) => joint_wigner(rho, p.beta1, b2, norm),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            points: points.to_vec(),
            values,
            shots_per_point: 0,
            normalization: norm,
        })
    }

    /// Values rescaled to bare parity expectations.
    pub fn parity_values(&self) -> Vec<f64> {
        self.points
            .iter()
            .zip(&self.values)
            .map(|(p, v)| v / self.normalization.factor(p.modes()))
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        self.check()?;
        let mut w = csv::Writer::from_path(path)?;
        for (k, (p, v)) in self.points.iter().zip(&self.values).enumerate() {
            let b2 = p.beta2.unwrap_or(C64::new(f64::NAN, f64::NAN));
            w.serialize(GridRow {
                index: k,
                beta1_re: p.beta1.re,
                beta1_im: p.beta1.im,
                beta2_re: if p.beta2.is_some() { Some(b2.re) } else { None },
                beta2_im: if p.beta2.is_some() { Some(b2.im) } else { None },
                value: *v,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a grid written by [`WignerGrid::write_csv`]; the shot count
    /// and normalization are not part of the CSV and must be supplied.
    pub fn read_csv(path: &Path, shots_per_point: usize, normalization: WignerNorm) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let mut points = Vec::new();
        let mut values = Vec::new();
        for row in r.deserialize() {
            let row: GridRow = row?;
            if row.index != points.len() {
                return Err(Error::InvalidParameter(format!(
                    "grid row {} out of order",
                    row.index
                )));
            }
            let beta2 = match (row.beta2_re, row.beta2_im) {
                (Some(re), Some(im)) => Some(C64::new(re, im)),
                _ => None,
            };
            points.push(GridPoint {
                beta1: C64::new(row.beta1_re, row.beta1_im),
                beta2,
            });
            values.push(row.value);
        }
        Ok(Self {
            points,
            values,
            shots_per_point,
            normalization,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct GridRow {
    index: usize,
    beta1_re: f64,
    beta1_im: f64,
    beta2_re: Option<f64>,
    beta2_im: Option<f64>,
    value: f64,
}

fn trace_product(m: &CMat, rho: &CMat) -> f64 {
    // Tr(M ρ) for Hermitian M, ρ
    let mut acc = 0.0;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            acc += (m[(r, c)] * rho[(c, r)]).re;
        }
    }
    acc
}

/// `(2/π) Tr[D(β) P D(β)† ρ]` for a single-mode state.
pub fn wigner_single(rho: &DensityMatrix, beta: C64, norm: WignerNorm) -> Result<f64> {
    if rho.space.len() != 1 {
        return Err(Error::SpaceMismatch(format!(
            "single-mode Wigner needs one mode, got {}",
            rho.space.len()
        )));
    }
    let c = rho.space[0].cutoff;
    let m = displaced_parity_matrix(beta, c);
    Ok(norm.factor(1) * trace_product(&m, &rho.matrix))
}

/// Displaced joint parity `⟨D(β1)P_A D(β1)† ⊗ D(β2)P_B D(β2)†⟩`.
pub fn joint_wigner(rho: &DensityMatrix, beta1: C64, beta2: C64, norm: WignerNorm) -> Result<f64> {
    let labels: Vec<ModeLabel> = rho.space.iter().map(|m| m.label).collect();
    if labels != [ModeLabel::Alice, ModeLabel::Bob] {
        return Err(Error::SpaceMismatch(
            "joint Wigner needs an (Alice, Bob) state".into(),
        ));
    }
    let (ca, cb) = (rho.space[0].cutoff, rho.space[1].cutoff);
    let pa = displaced_parity_matrix(beta1, ca);
    let pb = displaced_parity_matrix(beta2, cb);
    Ok(norm.factor(2) * joint_expectation(&pa, &pb, &rho.matrix))
}

/// `Tr[(A ⊗ B) ρ]` without forming the Kronecker product.
pub(crate) fn joint_expectation(pa: &CMat, pb: &CMat, rho: &CMat) -> f64 {
    let (ca, cb) = (pa.nrows(), pb.nrows());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..ca {
        for k in 0..ca {
            let a = pa[(i, k)];
            if a.norm() == 0.0 {
                continue;
            }
            let mut inner = C64::new(0.0, 0.0);
            for j in 0..cb {
                for l in 0..cb {
                    // (A⊗B)_{(i,j),(k,l)} ρ_{(k,l),(i,j)}
                    inner += pb[(j, l)] * rho[(k * cb + l, i * cb + j)];
                }
            }
            acc += a * inner;
        }
    }
    acc.re
}
