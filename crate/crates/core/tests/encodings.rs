use std::f64::consts::PI;

use eswap_core::circuits::eswap_ideal;
use eswap_core::encodings::{
    correlators, direct_fidelity_estimate, fit_harmonic, logical_pauli_operators, make_encoding,
    theta_sweep, EncodingKind, LogicalEncoding,
};
use eswap_core::fockspace::linalg::{max_norm, sqrtm_psd, CMat, C64};
use eswap_core::fockspace::ModeLabel;
use proptest::prelude::*;

fn encodings() -> Vec<LogicalEncoding> {
    vec![
        make_encoding(EncodingKind::Fock, 4).unwrap(),
        make_encoding(EncodingKind::Binomial, 6).unwrap(),
        make_encoding(EncodingKind::Coherent { alpha: 1.41 }, 18).unwrap(),
    ]
}

#[test]
fn logical_paulis_are_an_orthogonal_hermitian_set() {
    for enc in encodings() {
        let ops = logical_pauli_operators(&enc);
        let proj = enc.lift(&CMat::identity(4, 4));
        for (i, p) in ops.iter().enumerate() {
            assert!(p.is_hermitian(), "{} [{i}]", enc.kind);
            assert!(max_norm(&(&p.matrix * &p.matrix - &proj)) < 1e-9);
            for (j, q) in ops.iter().enumerate() {
                let t = (&p.matrix * &q.matrix).trace();
                let want = if i == j { 4.0 } else { 0.0 };
                assert!((t - C64::new(want, 0.0)).norm() < 1e-9, "{} [{i},{j}]", enc.kind);
            }
        }
    }
}

#[test]
fn code_properties() {
    let bin = make_encoding(EncodingKind::Binomial, 6).unwrap();
    assert!((bin.nbar[0] - 2.0).abs() < 1e-12 && (bin.nbar[1] - 2.0).abs() < 1e-12);
    assert!(!bin.orthogonalized);
    let cat = make_encoding(EncodingKind::Coherent { alpha: 1.41 }, 18).unwrap();
    assert!(cat.orthogonalized);
    assert!(cat.overlap().norm() > 1e-3);
    assert!(make_encoding(EncodingKind::Binomial, 4).is_err());
}

#[test]
fn cat_basis_is_the_symmetric_orthogonalization() {
    let enc = make_encoding(EncodingKind::Coherent { alpha: 1.41 }, 18).unwrap();
    let c = CMat::from_columns(&[enc.codeword0.amplitudes.clone(), enc.codeword1.amplitudes.clone()]);
    let s = c.adjoint() * &c;
    let inv_sqrt = sqrtm_psd(&s).try_inverse().unwrap();
    let want = &c * inv_sqrt;
    assert!(max_norm(&(enc.basis() - &want)) < 1e-9);
    // symmetric: each logical state is equally close to its own codeword
    let b = enc.basis();
    let d0 = b.column(0).dotc(&c.column(0));
    let d1 = b.column(1).dotc(&c.column(1));
    assert!((d0 - d1).norm() < 1e-12);
}

#[test]
fn noiseless_sweep_has_the_expected_harmonic_shapes() {
    for enc in encodings() {
        let (a, b) = (enc.mode(ModeLabel::Alice), enc.mode(ModeLabel::Bob));
        let thetas: Vec<f64> = (0..17).map(|k| -PI / 2.0 + PI * k as f64 / 16.0).collect();
        let rows = theta_sweep(&enc, "01", &thetas, |t, rho| eswap_ideal(t, a, b)?.conjugate(rho)).unwrap();
        let col = |f: fn(&eswap_core::encodings::SweepRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
        let (ii, zz, iz, zi, xy, yx) = (col(|r| r.ii), col(|r| r.zz), col(|r| r.iz), col(|r| r.zi), col(|r| r.xy), col(|r| r.yx));
        for k in 0..rows.len() {
            assert!((ii[k] - ii[0]).abs() < 1e-6 && (zz[k] - zz[0]).abs() < 1e-6);
            assert!((iz[k] + zi[k]).abs() < 1e-9);
        }
        let fx = fit_harmonic(&thetas, &xy).unwrap();
        let fy = fit_harmonic(&thetas, &yx).unwrap();
        assert!(fx.r_squared > 0.999 && fy.r_squared > 0.999, "{}", enc.kind);
        // sin 2θ shape: extremal at ±π/4, zero at 0 and ±π/2
        assert!(fx.sin2.abs() > 0.9 * ii[0].abs() && fx.cos2.abs() < 1e-6);
        let fz = fit_harmonic(&thetas, &iz).unwrap();
        assert!(fz.r_squared > 0.999 && fz.sin2.abs() < 1e-6);
    }
}

#[test]
fn direct_fidelity_is_one_for_the_ideal_entangled_state() {
    for enc in encodings() {
        let (a, b) = (enc.mode(ModeLabel::Alice), enc.mode(ModeLabel::Bob));
        let rho = enc.encode_two_qubit("01").unwrap().to_density();
        let out = eswap_ideal(PI / 4.0, a, b).unwrap().conjugate(&rho).unwrap();
        let f = direct_fidelity_estimate(&correlators(&out, &enc).unwrap());
        let floor = if enc.orthogonalized { 0.99 } else { 1.0 - 1e-9 };
        assert!(f > floor, "{}: {f}", enc.kind);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bloch_vectors_round_trip(t1 in 0.0..PI, p1 in -PI..PI, t2 in 0.0..PI, p2 in -PI..PI) {
        for enc in encodings().into_iter().filter(|e| !e.orthogonalized) {
            let psi = enc.encode_bloch(t1, p1, ModeLabel::Alice).unwrap()
                .tensor(&enc.encode_bloch(t2, p2, ModeLabel::Bob).unwrap()).unwrap();
            let c = correlators(&psi.to_density(), &enc).unwrap();
            let bloch = |t: f64, p: f64| [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
            let (ra, rb) = (bloch(t1, p1), bloch(t2, p2));
            for k in 0..3 {
                prop_assert!((c.values[4 * (k + 1)] - ra[k]).abs() < 1e-9);
                prop_assert!((c.values[k + 1] - rb[k]).abs() < 1e-9);
            }
            // pure product state: the logical state has unit fidelity with itself
            let rho_l = c.to_logical();
            let purity = (&rho_l * &rho_l).trace().re;
            prop_assert!((purity - 1.0).abs() < 1e-8);
        }
    }
}
