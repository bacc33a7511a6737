//! Fixed-step Lindblad integration.
//!
//! The generator is split into a part that is diagonal in the number
//! basis (detunings, Kerr, dispersive shifts, the anti-commutator of jump
//! operators whose `L†L` is diagonal, dephasing by diagonal jump
//! operators) and a sparse remainder. The diagonal part acts elementwise
//! on ρ and is integrated exactly; the remainder goes through a Lawson
//! (integrating-factor) RK4 step.

use crate::error::{Error, Result};
use crate::fockspace::linalg::{self, CMat, C64, I};
use crate::fockspace::sparse::Csr;
use crate::fockspace::{DensityMatrix, Operator};

/// Threshold on the a-priori local error `(hΛ)^5 / 120`.
pub const LOCAL_ERROR_LIMIT: f64 = 1e-6;

fn is_diagonal(m: &CMat) -> bool {
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if r != c && m[(r, c)].norm() > 1e-15 {
                return false;
            }
        }
    }
    true
}

/// Non-diagonal jump operator.
#[derive(Debug, Clone)]
enum Jump {
    /// At most one entry per row, `(column, value)`, as for `a` and `σ−`;
    /// `L ρ L†` is then a single gather.
    Monomial(Vec<Option<(usize, C64)>>),
    General(Csr),
}

impl Jump {
    fn new(l: &CMat) -> Self {
        let mut rows = Vec::with_capacity(l.nrows());
        for r in 0..l.nrows() {
            let mut entry = None;
            for c in 0..l.ncols() {
                let v = l[(r, c)];
                if v.norm() > 0.0 {
                    if entry.is_some() {
                        return Jump::General(Csr::from_dense(l, 0.0));
                    }
                    entry = Some((c, v));
                }
            }
            rows.push(entry);
        }
        Jump::Monomial(rows)
    }
}

/// Scratch matrices for the right-hand side.
struct Buffers {
    a: CMat,
    b: CMat,
}

impl Buffers {
    fn new(d: usize) -> Self {
        Self {
            a: CMat::zeros(d, d),
            b: CMat::zeros(d, d),
        }
    }
}

/// A static Lindbladian over one time segment.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    dim: usize,
    /// Elementwise rates λ_jk, column-major like `CMat`.
    lambda: Vec<C64>,
    /// Off-diagonal part of `H − (i/2) Σ L†L`.
    heff: Csr,
    jumps: Vec<Jump>,
    /// Bound on the frequencies handled by the RK stage.
    rate_bound: f64,
}

impl Liouvillian {
    /// Builds from a Hermitian Hamiltonian and jump operators (dense).
    pub fn new(h: &CMat, collapse: &[CMat]) -> Result<Self> {
        let d = h.nrows();
        if h.ncols() != d || collapse.iter().any(|l| l.nrows() != d || l.ncols() != d) {
            return Err(Error::SpaceMismatch("Lindbladian operand shapes differ".into()));
        }
        let herm = linalg::hermiticity_residual(h);
        if herm > 1e-9 * linalg::max_norm(h).max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "Hamiltonian not Hermitian (residual {herm:.2e})"
            )));
        }
        let mut heff = h.clone();
        let mut diag_jumps: Vec<Vec<C64>> = Vec::new();
        let mut jumps = Vec::new();
        for l in collapse {
            if is_diagonal(l) {
                diag_jumps.push((0..d).map(|k| l[(k, k)]).collect());
            } else {
                let ldl = l.adjoint() * l;
                heff -= ldl.map(|z| z * I * 0.5);
                jumps.push(Jump::new(l));
            }
        }
        let diag: Vec<C64> = (0..d).map(|k| heff[(k, k)]).collect();
        let mut off = heff;
        for k in 0..d {
            off[(k, k)] = C64::new(0.0, 0.0);
        }
        let mut lambda = vec![C64::new(0.0, 0.0); d * d];
        for c in 0..d {
            for r in 0..d {
                // -i (D_r ρ − ρ D_c*) for ρ_rc
                let mut v = -I * (diag[r] - diag[c].conj());
                for l in &diag_jumps {
                    v += l[r] * l[c].conj() - 0.5 * (l[r].norm_sqr() + l[c].norm_sqr());
                }
                lambda[c * d + r] = v;
            }
        }
        let row_sum = |m: &CMat| {
            (0..m.nrows())
                .map(|r| m.row(r).iter().map(|z| z.norm()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        let mut rate_bound = 2.0 * row_sum(&off);
        for l in collapse.iter().filter(|l| !is_diagonal(l)) {
            rate_bound += row_sum(l).powi(2);
        }
        Ok(Self {
            dim: d,
            lambda,
            heff: Csr::from_dense(&off, 1e-300),
            jumps,
            rate_bound,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest frequency scale the RK stage resolves.
    pub fn rate_bound(&self) -> f64 {
        self.rate_bound
    }

    /// Step rule: `min(duration/200, 1/(50 ω_max))`, at least one step.
    pub fn default_dt(&self, duration: f64) -> f64 {
        let mut dt = duration / 200.0;
        if self.rate_bound > 0.0 {
            dt = dt.min(1.0 / (50.0 * self.rate_bound));
        }
        dt
    }

    fn rhs(&self, rho: &CMat, out: &mut CMat, buf: &mut Buffers) {
        let d = self.dim;
        out.fill(C64::new(0.0, 0.0));
        if !self.heff.is_empty() {
            buf.a.fill(C64::new(0.0, 0.0));
            self.heff.mul_dense_acc(rho, C64::new(1.0, 0.0), &mut buf.a);
            // −i H ρ + i ρ H† = −i Hρ + (−i Hρ)†
            let hr = buf.a.as_slice();
            let o = out.as_mut_slice();
            for c in 0..d {
                for r in 0..d {
                    let x = hr[c * d + r];
                    let y = hr[r * d + c];
                    o[c * d + r] = C64::new(x.im + y.im, y.re - x.re);
                }
            }
        }
        for jump in &self.jumps {
            match jump {
                Jump::Monomial(rows) => {
                    let x = rho.as_slice();
                    let o = out.as_mut_slice();
                    for (c, ec) in rows.iter().enumerate() {
                        let Some((kc, vc)) = ec else { continue };
                        let vc = vc.conj();
                        for (r, er) in rows.iter().enumerate() {
                            if let Some((kr, vr)) = er {
                                o[c * d + r] += vr * x[kc * d + kr] * vc;
                            }
                        }
                    }
                }
                Jump::General(l) => {
                    buf.a.fill(C64::new(0.0, 0.0));
                    l.mul_dense_acc(rho, C64::new(1.0, 0.0), &mut buf.a);
                    buf.a.adjoint_to(&mut buf.b);
                    l.mul_dense_acc(&buf.b, C64::new(1.0, 0.0), out);
                }
            }
        }
    }

    fn factors(&self, h: f64) -> Vec<C64> {
        self.lambda.iter().map(|&l| (l * h).exp()).collect()
    }

    /// Integrates for `duration` with `n_steps` equal steps. Non-Hermitian
    /// input is split into Hermitian parts and evolved by linearity.
    pub fn evolve(&self, rho: &CMat, duration: f64, n_steps: usize) -> Result<CMat> {
        let scale = linalg::max_norm(rho).max(f64::MIN_POSITIVE);
        if linalg::hermiticity_residual(rho) > 1e-14 * scale {
            let adj = rho.adjoint();
            let re = (rho + &adj).map(|z| z * 0.5);
            let im = (rho - &adj).map(|z| z * (-0.5 * I));
            let a = self.evolve_hermitian(&re, duration, n_steps)?;
            let b = self.evolve_hermitian(&im, duration, n_steps)?;
            return Ok(a + b.map(|z| z * I));
        }
        self.evolve_hermitian(rho, duration, n_steps)
    }

    fn evolve_hermitian(&self, rho: &CMat, duration: f64, n_steps: usize) -> Result<CMat> {
        let mut u = linalg::hermitize(rho);
        if duration == 0.0 || n_steps == 0 {
            return Ok(u);
        }
        let h = duration / n_steps as f64;
        let est = (h * self.rate_bound).powi(5) / 120.0;
        if est > LOCAL_ERROR_LIMIT {
            return Err(Error::StepTooLarge {
                estimate: est,
                limit: LOCAL_ERROR_LIMIT,
            });
        }
        let e_full = self.factors(h);
        let e_half = self.factors(h / 2.0);
        let d = self.dim;
        let mut buf = Buffers::new(d);
        let mut k1 = CMat::zeros(d, d);
        let mut k2 = CMat::zeros(d, d);
        let mut k3 = CMat::zeros(d, d);
        let mut k4 = CMat::zeros(d, d);
        let mut tmp = CMat::zeros(d, d);
        let hc = C64::new(h, 0.0);
        let (h2, h6) = (C64::new(0.5 * h, 0.0), C64::new(h / 6.0, 0.0));
        let two = C64::new(2.0, 0.0);
        for _ in 0..n_steps {
            self.rhs(&u, &mut k1, &mut buf);
            // k2 = N(E½ (u + h/2 k1))
            for (i, (t, (a, b))) in tmp
                .as_mut_slice()
                .iter_mut()
                .zip(u.as_slice().iter().zip(k1.as_slice()))
                .enumerate()
            {
                *t = (a + h2 * b) * e_half[i];
            }
            self.rhs(&tmp, &mut k2, &mut buf);
            // k3 = N(E½ u + h/2 k2)
            for (i, (t, (a, b))) in tmp
                .as_mut_slice()
                .iter_mut()
                .zip(u.as_slice().iter().zip(k2.as_slice()))
                .enumerate()
            {
                *t = a * e_half[i] + h2 * b;
            }
            self.rhs(&tmp, &mut k3, &mut buf);
            // k4 = N(E u + h E½ k3)
            for (i, (t, (a, b))) in tmp
                .as_mut_slice()
                .iter_mut()
                .zip(u.as_slice().iter().zip(k3.as_slice()))
                .enumerate()
            {
                *t = a * e_full[i] + hc * e_half[i] * b;
            }
            self.rhs(&tmp, &mut k4, &mut buf);
            // u ← E u + h/6 (E k1 + 2 E½ (k2 + k3) + k4)
            let ks = k1
                .as_slice()
                .iter()
                .zip(k2.as_slice().iter().zip(k3.as_slice()))
                .zip(k4.as_slice());
            for (i, (z, ((a, (b, c)), e))) in u.as_mut_slice().iter_mut().zip(ks).enumerate() {
                let incr = a * e_full[i] + two * e_half[i] * (b + c) + e;
                *z = *z * e_full[i] + h6 * incr;
            }
        }
        if u.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("lindblad_evolve"));
        }
        Ok(linalg::hermitize(&u))
    }

    /// Evolves and records ρ at each of the (ascending) `times`.
    pub fn evolve_record(&self, rho: &CMat, times: &[f64], dt: f64) -> Result<Vec<CMat>> {
        let mut out = Vec::with_capacity(times.len());
        let mut cur = rho.clone();
        let mut t = 0.0;
        for &target in times {
            if target < t - 1e-15 {
                return Err(Error::InvalidParameter("record times must ascend".into()));
            }
            let span = target - t;
            if span > 0.0 {
                let steps = (span / dt).ceil().max(1.0) as usize;
                cur = self.evolve(&cur, span, steps)?;
            }
            t = target;
            out.push(cur.clone());
        }
        Ok(out)
    }
}

/// Integrates `dρ/dt = −i[H,ρ] + Σ D[L]ρ` for time `t` with step `dt`.
pub fn lindblad_evolve(
    rho: &DensityMatrix,
    h: &Operator,
    collapse: &[Operator],
    t: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    if h.space != rho.space || collapse.iter().any(|l| l.space != rho.space) {
        return Err(Error::SpaceMismatch("Lindblad operands on different spaces".into()));
    }
    if !(t >= 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need t >= 0 and dt > 0, got t={t}, dt={dt}"
        )));
    }
    let ls: Vec<CMat> = collapse.iter().map(|l| l.matrix.clone()).collect();
    let liou = Liouvillian::new(&h.matrix, &ls)?;
    let steps = (t / dt).round().max(1.0) as usize;
    let m = liou.evolve(&rho.matrix, t, steps)?;
    Ok(DensityMatrix::from_raw(m, rho.space.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{annihilation, fock_state, number, ModeSpace};

    #[test]
    fn free_evolution_is_identity() {
        let m = ModeSpace::alice(4).unwrap();
        let psi = fock_state(m, 2).unwrap();
        let rho = psi.add(&fock_state(m, 1).unwrap()).unwrap().normalized().unwrap().to_density();
        let h = Operator::new(CMat::zeros(4, 4), vec![m]).unwrap();
        let out = lindblad_evolve(&rho, &h, &[], 1e-6, 1e-8).unwrap();
        assert!(linalg::max_norm(&(out.matrix - rho.matrix)) < 1e-15);
    }

    #[test]
    fn driven_qubit_rabi_matches_expm() {
        // Off-diagonal Hamiltonian exercises the RK stage alone.
        let m = ModeSpace::ancilla();
        let h = CMat::from_row_slice(
            2,
            2,
            &[C64::new(0.3, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(-0.3, 0.0)],
        );
        let rho = fock_state(m, 0).unwrap().to_density();
        let l = Liouvillian::new(&h, &[]).unwrap();
        let out = l.evolve(&rho.matrix, 2.0, 400).unwrap();
        let u = linalg::expm(&h, C64::new(0.0, -2.0)).unwrap();
        let want = &u * &rho.matrix * u.adjoint();
        let err = linalg::max_norm(&(out - want));
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn decay_with_hamiltonian_conserves_trace() {
        let m = ModeSpace::alice(5).unwrap();
        let a = annihilation(m).matrix;
        let h = (&a + a.adjoint()).map(|z| z * 0.4) + number(m).matrix;
        let rho = fock_state(m, 3).unwrap().to_density();
        let l = Liouvillian::new(&h, &[a.map(|z| z * 0.3)]).unwrap();
        let out = l.evolve(&rho.matrix, 1.0, l.default_dt(1.0).recip().ceil() as usize).unwrap();
        assert!((out.trace().re - 1.0).abs() < 1e-7);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let h = CMat::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        );
        let l = Liouvillian::new(&h, &[]).unwrap();
        let rho = CMat::identity(2, 2).unscale(2.0);
        assert!(matches!(
            l.evolve(&rho, 10.0, 1),
            Err(Error::StepTooLarge { .. })
        ));
    }
}
