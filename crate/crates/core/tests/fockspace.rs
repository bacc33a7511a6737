use eswap_core::fockspace::linalg::{expm, max_norm, CMat, C64};
use eswap_core::fockspace::{
    annihilation, coherent_state, displacement, embed, fock_state, number, parity_operator,
    partial_trace, tensor, tensor_states, DensityMatrix, ModeLabel, ModeSpace, Operator,
    MatrixRecord,
};
use proptest::prelude::*;

fn random_hermitian(n: usize, xs: &[f64]) -> CMat {
    let m = CMat::from_fn(n, n, |i, j| C64::new(xs[(i * n + j) % xs.len()], xs[(j * n + i + 7) % xs.len()]));
    (&m + m.adjoint()).map(|z| z * 0.5)
}

/// Taylor series with scaling and squaring, as an independent reference.
fn series_exp(a: &CMat) -> CMat {
    let n = a.nrows();
    let s = 8;
    let scaled = a.map(|z| z / (1u64 << s) as f64);
    let mut term = CMat::identity(n, n);
    let mut sum = CMat::identity(n, n);
    for k in 1..40 {
        term = &term * &scaled / C64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

#[test]
fn vacuum_statistics_and_parity() {
    let a = ModeSpace::alice(6).unwrap();
    let vac = fock_state(a, 0).unwrap().to_density();
    assert_eq!(number(a).expectation(&vac).unwrap().re, 0.0);
    assert_eq!(parity_operator(a).expectation(&vac).unwrap().re, 1.0);
    let three = fock_state(a, 3).unwrap().to_density();
    assert_eq!(parity_operator(a).expectation(&three).unwrap().re, -1.0);
}

#[test]
fn coherent_state_matches_displaced_vacuum() {
    let a = ModeSpace::alice(30).unwrap();
    let alpha = C64::new(1.2, -0.4);
    let from_d = displacement(alpha, a).apply(&fock_state(a, 0).unwrap()).unwrap();
    let direct = coherent_state(alpha, a).unwrap();
    assert!(1.0 - direct.inner(&from_d).unwrap().norm_sqr() < 1e-10);
    let n = number(a).expectation(&direct.to_density()).unwrap().re;
    assert!((n - alpha.norm_sqr()).abs() < 1e-9);
}

#[test]
fn embedded_observables_factorize_on_products() {
    let sp = vec![ModeSpace::ancilla(), ModeSpace::alice(4).unwrap(), ModeSpace::bob(4).unwrap()];
    let psi = tensor_states(&[
        fock_state(sp[0], 1).unwrap(),
        coherent_state(C64::new(0.5, 0.1), sp[1]).unwrap(),
        coherent_state(C64::new(-0.3, 0.6), sp[2]).unwrap(),
    ])
    .unwrap();
    let rho = psi.to_density();
    let na = embed(&number(sp[1]), &sp).unwrap();
    let ab = embed(&annihilation(sp[2]), &sp).unwrap();
    let joint = na.compose(&ab).unwrap().expectation(&rho).unwrap();
    let product = na.expectation(&rho).unwrap() * ab.expectation(&rho).unwrap();
    assert!((joint - product).norm() < 1e-12);
}

#[test]
fn partial_trace_recovers_factor() {
    let a = ModeSpace::alice(3).unwrap();
    let b = ModeSpace::bob(4).unwrap();
    let ra = coherent_state(C64::new(0.4, 0.0), a).unwrap().to_density();
    let rb = fock_state(b, 2).unwrap().to_density();
    let joint = ra.tensor(&rb).unwrap();
    let back = partial_trace(&joint, &[ModeLabel::Alice]).unwrap();
    assert!(max_norm(&(back.matrix - ra.matrix)) < 1e-14);
}

#[test]
fn density_record_round_trip_is_exact() {
    let a = ModeSpace::alice(3).unwrap();
    let rho: DensityMatrix = coherent_state(C64::new(0.3, 0.7), a).unwrap().to_density();
    let back = MatrixRecord::from_density(&rho).to_density().unwrap();
    assert_eq!(back, rho);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn expm_agrees_with_series(xs in prop::collection::vec(-1.0f64..1.0, 64), t in -2.0f64..2.0) {
        let h = random_hermitian(8, &xs);
        let u = expm(&h, C64::new(0.0, -t)).unwrap();
        let reference = series_exp(&h.map(|z| z * C64::new(0.0, -t)));
        prop_assert!(max_norm(&(&u - reference)) < 1e-9);
        prop_assert!(max_norm(&(&u * u.adjoint() - CMat::identity(8, 8))) < 1e-9);
    }

    #[test]
    fn truncated_displacements_are_unitary(re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let d = displacement(C64::new(re, im), ModeSpace::alice(10).unwrap());
        prop_assert!(d.is_unitary());
    }

    #[test]
    fn tensor_is_associative(xs in prop::collection::vec(-1.0f64..1.0, 16)) {
        let sp = [ModeSpace::ancilla(), ModeSpace::alice(2).unwrap(), ModeSpace::bob(3).unwrap()];
        let op = |k: usize, s: ModeSpace| {
            let n = s.cutoff;
            Operator::new(CMat::from_fn(n, n, |i, j| C64::new(xs[(k + i * n + j) % 16], xs[(k + 3 * j + i) % 16])), vec![s]).unwrap()
        };
        let (x, y, z) = (op(0, sp[0]), op(5, sp[1]), op(9, sp[2]));
        let left = tensor(&[tensor(&[x.clone(), y.clone()]).unwrap(), z.clone()]).unwrap();
        let right = tensor(&[x, tensor(&[y, z]).unwrap()]).unwrap();
        prop_assert!(max_norm(&(left.matrix - right.matrix)) < 1e-15);
        prop_assert_eq!(left.space, right.space);
    }
}
