//! Dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Largest absolute entry.
pub fn max_norm(m: &CMat) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

/// Kronecker product with `a` as the slow (leftmost) index.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn hermiticity_residual(m: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn unitarity_residual(m: &CMat) -> f64 {
    let n = m.nrows();
    max_norm(&(m.adjoint() * m - CMat::identity(n, n)))
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

/// Eigendecomposition of a Hermitian matrix. Eigenvalues ascend.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

pub fn eigh(m: &CMat) -> HermitianEigen {
    let sym = hermitize(m);
    let SymmetricEigen {
        eigenvalues,
        eigenvectors,
    } = SymmetricEigen::new(sym);
    let n = eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
    let values = order.iter().map(|&k| eigenvalues[k]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eigenvectors[(r, order[c])]);
    HermitianEigen { values, vectors }
}

/// `V f(Λ) V†` for a Hermitian matrix with eigendecomposition `eig`.
pub fn spectral_map(eig: &HermitianEigen, f: impl Fn(f64) -> C64) -> CMat {
    let n = eig.values.len();
    let v = &eig.vectors;
    let mut scaled = v.clone();
    for (c, &lam) in eig.values.iter().enumerate() {
        let w = f(lam);
        for r in 0..n {
            scaled[(r, c)] *= w;
        }
    }
    scaled * v.adjoint()
}

/// `exp(scale * h)`.
///
/// Hermitian and anti-Hermitian generators go through the spectral
/// decomposition; anything else uses Padé-13 scaling and squaring.
pub fn expm(h: &CMat, scale: C64) -> Result<CMat> {
    if h.nrows() != h.ncols() {
        return Err(Error::InvalidParameter(format!(
            "expm needs a square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let tol = 1e-12 * max_norm(h).max(1.0);
    let out = if hermiticity_residual(h) <= tol {
        let eig = eigh(h);
        spectral_map(&eig, |lam| (scale * lam).exp())
    } else {
        let k = h.map(|z| -I * z);
        if hermiticity_residual(&k) <= tol {
            // h = i k
            let eig = eigh(&k);
            spectral_map(&eig, |lam| (scale * I * lam).exp())
        } else {
            expm_pade(&h.map(|z| z * scale))?
        }
    };
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("expm"));
    }
    Ok(out)
}

fn one_norm(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|c| m.column(c).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Higham's degree-13 Padé approximant with scaling and squaring.
pub fn expm_pade(a: &CMat) -> Result<CMat> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;
    let n = a.nrows();
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(Error::NonFinite("expm"));
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.scale(0.5f64.powi(s));
    let id = CMat::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let c = |k: usize| C64::new(B[k], 0.0);
    let u_inner = &a6 * (a6.map(|z| z * c(13)) + a4.map(|z| z * c(11)) + a2.map(|z| z * c(9)))
        + a6.map(|z| z * c(7))
        + a4.map(|z| z * c(5))
        + a2.map(|z| z * c(3))
        + id.map(|z| z * c(1));
    let u = &a * u_inner;
    let v = &a6 * (a6.map(|z| z * c(12)) + a4.map(|z| z * c(10)) + a2.map(|z| z * c(8)))
        + a6.map(|z| z * c(6))
        + a4.map(|z| z * c(4))
        + a2.map(|z| z * c(2))
        + id.map(|z| z * c(0));
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or(Error::NonFinite("expm Padé denominator"))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// Principal square root of a Hermitian positive semidefinite matrix;
/// negative eigenvalues are clipped to zero.
pub fn sqrtm_psd(m: &CMat) -> CMat {
    let eig = eigh(m);
    spectral_map(&eig, |lam| C64::new(lam.max(0.0).sqrt(), 0.0))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    eigh(m).values
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(n: usize, seed: u64) -> CMat {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = CMat::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        hermitize(&m)
    }

    /// Plain Taylor series with many terms, used as an oracle.
    fn expm_series(a: &CMat) -> CMat {
        let n = a.nrows();
        let mut term = CMat::identity(n, n);
        let mut sum = term.clone();
        for k in 1..80 {
            term = &term * a / C64::new(k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    #[test]
    fn expm_zero_is_identity() {
        let z = CMat::zeros(5, 5);
        let e = expm(&z, ONE).unwrap();
        assert!(max_norm(&(e - CMat::identity(5, 5))) < 1e-15);
    }

    #[test]
    fn expm_matches_series_on_random_hermitian() {
        for seed in 0..10 {
            let h = random_hermitian(8, seed);
            let spectral = expm(&h, C64::new(0.0, -0.7)).unwrap();
            let series = expm_series(&h.map(|z| z * C64::new(0.0, -0.7)));
            assert!(max_norm(&(&spectral - &series)) < 1e-9, "seed {seed}");
            // Padé route on the same input agrees as well
            let pade = expm_pade(&h.map(|z| z * C64::new(0.0, -0.7))).unwrap();
            assert!(max_norm(&(&spectral - &pade)) < 1e-11, "seed {seed}");
        }
    }

    #[test]
    fn pade_handles_non_normal_input() {
        let a = CMat::from_row_slice(
            3,
            3,
            &[
                C64::new(0.1, 0.0),
                C64::new(2.0, 1.0),
                ZERO,
                ZERO,
                C64::new(-0.3, 0.2),
                C64::new(4.0, 0.0),
                C64::new(0.5, 0.0),
                ZERO,
                C64::new(1.0, -1.0),
            ],
        );
        let e = expm(&a, ONE).unwrap();
        let series = expm_series(&a);
        assert!(max_norm(&(&e - &series)) / max_norm(&series) < 1e-12);
    }

    #[test]
    fn sqrtm_squares_back() {
        let h = random_hermitian(6, 3);
        let psd = &h * &h;
        let r = sqrtm_psd(&psd);
        assert!(max_norm(&(&r * &r - &psd)) < 1e-10);
    }

    #[test]
    fn overflow_reports_non_finite() {
        let h = CMat::from_element(2, 2, C64::new(1e308, 0.0));
        assert!(matches!(expm(&h, C64::new(1e10, 0.0)), Err(Error::NonFinite(_))));
    }
}
