use std::sync::atomic::{AtomicBool, Ordering};

use super::linalg::{self, CMat, CVec, C64, ONE, ZERO};
use super::{
    check_canonical, describe_space, space_dim, DensityMatrix, ModeLabel, ModeSpace, Operator,
    StateVector,
};
use crate::error::{Error, Result};

/// Ladder operator `a` with `<n-1|a|n> = sqrt(n)`.
pub fn annihilation(space: ModeSpace) -> Operator {
    let n = space.cutoff;
    let mut m = CMat::zeros(n, n);
    for k in 1..n {
        m[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    Operator {
        matrix: m,
        space: vec![space],
    }
}

pub fn creation(space: ModeSpace) -> Operator {
    annihilation(space).dagger()
}

pub fn number(space: ModeSpace) -> Operator {
    diagonal(space, |n| n as f64)
}

fn diagonal(space: ModeSpace, f: impl Fn(usize) -> f64) -> Operator {
    let n = space.cutoff;
    let mut m = CMat::zeros(n, n);
    for k in 0..n {
        m[(k, k)] = C64::new(f(k), 0.0);
    }
    Operator {
        matrix: m,
        space: vec![space],
    }
}

/// Photon-number parity `exp(iπn) = diag((-1)^n)`.
pub fn parity_operator(space: ModeSpace) -> Operator {
    diagonal(space, |n| if n % 2 == 0 { 1.0 } else { -1.0 })
}

/// Minimum cutoff trusted for a displacement of amplitude `beta`.
pub fn displacement_guard(beta: C64) -> usize {
    (4.0 * beta.norm_sqr()).ceil() as usize + 10
}

/// Logs at warn level the first time a call site trips, debug after that.
pub(crate) fn warn_once(seen: &AtomicBool, msg: impl FnOnce() -> String) {
    if seen.swap(true, Ordering::Relaxed) {
        log::debug!("{}", msg());
    } else {
        log::warn!("{} (further occurrences logged at debug level)", msg());
    }
}

/// `D(β) = exp(β a† − β* a)` computed on the truncated space.
///
/// The truncated generator is anti-Hermitian, so the result is exactly
/// unitary; it only approximates the infinite-dimensional displacement
/// when the cutoff clears [`displacement_guard`].
pub fn displacement(beta: C64, space: ModeSpace) -> Operator {
    if space.cutoff < displacement_guard(beta) {
        static SEEN: AtomicBool = AtomicBool::new(false);
        warn_once(&SEEN, || {
            format!(
                "truncation: displacement |beta|^2 = {:.3} on {} with cutoff {} (< {})",
                beta.norm_sqr(),
                space.label,
                space.cutoff,
                displacement_guard(beta)
            )
        });
    }
    let a = annihilation(space).matrix;
    let gen = a.adjoint().map(|z| z * beta) - a.map(|z| z * beta.conj());
    // anti-Hermitian generator, spectral route never fails on finite input
    let matrix = linalg::expm(&gen, ONE).expect("finite displacement generator");
    Operator {
        matrix,
        space: vec![space],
    }
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Generalized Laguerre polynomial `L_n^{(k)}(x)`.
fn laguerre(n: usize, k: usize, x: f64) -> f64 {
    let k = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + k - x;
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + k - x) * cur - (jf + k) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Infinite-space matrix element `<m|D(α)|n>` (Laguerre closed form).
pub fn displacement_element(alpha: C64, m: usize, n: usize) -> C64 {
    let x = alpha.norm_sqr();
    let gauss = (-x / 2.0).exp();
    if m >= n {
        let k = m - n;
        let pref = (0.5 * (ln_factorial(n) - ln_factorial(m))).exp();
        alpha.powu(k as u32) * (pref * gauss * laguerre(n, k, x))
    } else {
        let k = n - m;
        let pref = (0.5 * (ln_factorial(m) - ln_factorial(n))).exp();
        (-alpha.conj()).powu(k as u32) * (pref * gauss * laguerre(m, k, x))
    }
}

/// Displaced parity `D(β) P D(β)† = D(2β) P` restricted to the first
/// `cutoff` Fock states, from exact matrix elements.
pub fn displaced_parity_matrix(beta: C64, cutoff: usize) -> CMat {
    let two_beta = beta * 2.0;
    CMat::from_fn(cutoff, cutoff, |m, n| {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        displacement_element(two_beta, m, n) * sign
    })
}

pub fn fock_state(space: ModeSpace, n: usize) -> Result<StateVector> {
    StateVector::basis(&[space], &[n])
}

/// Coherent state `|α>` truncated to the mode cutoff and renormalized.
pub fn coherent_state(alpha: C64, space: ModeSpace) -> Result<StateVector> {
    if space.cutoff < displacement_guard(alpha) {
        static SEEN: AtomicBool = AtomicBool::new(false);
        warn_once(&SEEN, || {
            format!(
                "truncation: coherent state |alpha|^2 = {:.3} on cutoff {}",
                alpha.norm_sqr(),
                space.cutoff
            )
        });
    }
    let amps = CVec::from_fn(space.cutoff, |n, _| {
        let ln_mag = -alpha.norm_sqr() / 2.0 - 0.5 * ln_factorial(n);
        alpha.powu(n as u32) * ln_mag.exp()
    });
    StateVector {
        amplitudes: amps,
        space: vec![space],
    }
    .normalized()
}

/// Kronecker product of operators listed in canonical mode order.
pub fn tensor(ops: &[Operator]) -> Result<Operator> {
    let first = ops
        .first()
        .ok_or_else(|| Error::SpaceMismatch("tensor of an empty list".into()))?;
    let mut matrix = first.matrix.clone();
    let mut space = first.space.clone();
    for op in &ops[1..] {
        matrix = linalg::kron(&matrix, &op.matrix);
        space.extend_from_slice(&op.space);
    }
    check_canonical(&space)?;
    Operator::new(matrix, space)
}

/// Tensor product of states in canonical order.
pub fn tensor_states(states: &[StateVector]) -> Result<StateVector> {
    let first = states
        .first()
        .ok_or_else(|| Error::SpaceMismatch("tensor of an empty list".into()))?;
    states[1..].iter().try_fold(first.clone(), |acc, s| acc.tensor(s))
}

/// Positions of `sub`'s modes inside `full`.
fn mode_positions(sub: &[ModeSpace], full: &[ModeSpace]) -> Result<Vec<usize>> {
    sub.iter()
        .map(|m| {
            full.iter().position(|f| f == m).ok_or_else(|| {
                Error::SpaceMismatch(format!(
                    "mode {}({}) not present in {}",
                    m.label,
                    m.cutoff,
                    describe_space(full)
                ))
            })
        })
        .collect()
}

/// Splits a flat index into per-mode occupations.
pub fn unflatten(mut index: usize, space: &[ModeSpace]) -> Vec<usize> {
    let mut occ = vec![0; space.len()];
    for (k, m) in space.iter().enumerate().rev() {
        occ[k] = index % m.cutoff;
        index /= m.cutoff;
    }
    occ
}

pub fn flatten(occ: &[usize], space: &[ModeSpace]) -> usize {
    occ.iter()
        .zip(space)
        .fold(0, |acc, (&n, m)| acc * m.cutoff + n)
}

/// Pads `op` with identities on the modes of `full_space` it does not act on.
pub fn embed(op: &Operator, full_space: &[ModeSpace]) -> Result<Operator> {
    check_canonical(full_space)?;
    let pos = mode_positions(&op.space, full_space)?;
    if op.space.len() == full_space.len() {
        return Ok(op.clone());
    }
    let rest: Vec<usize> = (0..full_space.len()).filter(|k| !pos.contains(k)).collect();
    let rest_space: Vec<ModeSpace> = rest.iter().map(|&k| full_space[k]).collect();
    let d_full = space_dim(full_space);
    let d_rest = space_dim(&rest_space);
    let d_op = op.dim();
    let mut out = CMat::zeros(d_full, d_full);
    let mut occ = vec![0usize; full_space.len()];
    for r in 0..d_rest {
        let rest_occ = unflatten(r, &rest_space);
        for (k, &p) in rest.iter().enumerate() {
            occ[p] = rest_occ[k];
        }
        let full_index = |sub: usize, occ: &mut Vec<usize>| {
            let sub_occ = unflatten(sub, &op.space);
            for (k, &p) in pos.iter().enumerate() {
                occ[p] = sub_occ[k];
            }
            flatten(occ, full_space)
        };
        for i in 0..d_op {
            let fi = full_index(i, &mut occ);
            for j in 0..d_op {
                let v = op.matrix[(i, j)];
                if v != ZERO {
                    let fj = full_index(j, &mut occ);
                    out[(fi, fj)] = v;
                }
            }
        }
    }
    Operator::new(out, full_space.to_vec())
}

/// Two-mode SWAP on modes `a` and `b` (equal cutoffs).
pub fn swap_operator(a: ModeSpace, b: ModeSpace) -> Result<Operator> {
    if a.cutoff != b.cutoff {
        return Err(Error::SpaceMismatch(format!(
            "SWAP needs equal cutoffs, got {} and {}",
            a.cutoff, b.cutoff
        )));
    }
    let space = vec![a, b];
    check_canonical(&space)?;
    let n = a.cutoff;
    let mut m = CMat::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            m[(j * n + i, i * n + j)] = ONE;
        }
    }
    Operator::new(m, space)
}

pub fn projector(psi: &StateVector) -> Operator {
    Operator {
        matrix: &psi.amplitudes * psi.amplitudes.adjoint(),
        space: psi.space.clone(),
    }
}

/// Keeps only the modes in `keep`, tracing out the rest.
pub fn partial_trace(rho: &DensityMatrix, keep: &[ModeLabel]) -> Result<DensityMatrix> {
    let kept: Vec<usize> = rho
        .space
        .iter()
        .enumerate()
        .filter(|(_, m)| keep.contains(&m.label))
        .map(|(k, _)| k)
        .collect();
    if kept.len() != keep.len() {
        return Err(Error::SpaceMismatch(format!(
            "cannot keep {keep:?} from {}",
            describe_space(&rho.space)
        )));
    }
    let kept_space: Vec<ModeSpace> = kept.iter().map(|&k| rho.space[k]).collect();
    let traced: Vec<usize> = (0..rho.space.len()).filter(|k| !kept.contains(k)).collect();
    let traced_space: Vec<ModeSpace> = traced.iter().map(|&k| rho.space[k]).collect();
    let dk = space_dim(&kept_space);
    let dt = if traced.is_empty() { 1 } else { space_dim(&traced_space) };
    let mut out = CMat::zeros(dk, dk);
    let mut occ = vec![0usize; rho.space.len()];
    let index = |kidx: usize, tidx: usize, occ: &mut Vec<usize>| {
        let ko = unflatten(kidx, &kept_space);
        for (n, &p) in kept.iter().enumerate() {
            occ[p] = ko[n];
        }
        if !traced.is_empty() {
            let to = unflatten(tidx, &traced_space);
            for (n, &p) in traced.iter().enumerate() {
                occ[p] = to[n];
            }
        }
        flatten(occ, &rho.space)
    };
    for t in 0..dt {
        for i in 0..dk {
            let fi = index(i, t, &mut occ);
            for j in 0..dk {
                let fj = index(j, t, &mut occ);
                out[(i, j)] += rho.matrix[(fi, fj)];
            }
        }
    }
    Ok(DensityMatrix::from_raw(out, kept_space))
}
