use std::f64::consts::FRAC_2_PI;

use eswap_core::encodings::{correlators, make_encoding, EncodingKind};
use eswap_core::fockspace::linalg::{hermitize, CMat, CVec, C64};
use eswap_core::fockspace::{
    coherent_state, fock_state, space_dim, state_fidelity, trace_distance, DensityMatrix,
    ModeSpace, StateVector,
};
use eswap_core::tomography::{
    assemble_three_mode, axis, conditional_states, joint_wigner, pauli_points_plan,
    reconstruct_density_matrix, ring_points, sample_parity_shots, wigner_single,
    AssemblyConvention, GridPoint, Plane, Reconstructor, WignerGrid, WignerNorm,
};
use proptest::prelude::*;

fn cavities(c: usize) -> Vec<ModeSpace> {
    vec![ModeSpace::alice(c).unwrap(), ModeSpace::bob(c).unwrap()]
}

/// Mixed state of the given rank built deterministically from `xs`.
fn random_mixed(space: &[ModeSpace], rank: usize, xs: &[f64]) -> DensityMatrix {
    let d = space_dim(space);
    let mut rho = CMat::zeros(d, d);
    for r in 0..rank {
        let v = CVec::from_fn(d, |i, _| {
            let k = (r * 31 + i * 7) % xs.len();
            C64::new(xs[k], xs[(k + 13) % xs.len()])
        });
        let v = v.normalize();
        rho += (&v * v.adjoint()).map(|z| z * (1.0 + r as f64) / (rank as f64 * (rank as f64 + 1.0) / 2.0));
    }
    DensityMatrix::new(hermitize(&rho), space.to_vec()).unwrap()
}

#[test]
fn sampled_means_follow_contrast_scaling_within_three_sigma() {
    let sp = cavities(5);
    let psi = StateVector::basis(&sp, &[0, 1])
        .unwrap()
        .add(&StateVector::basis(&sp, &[1, 0]).unwrap().scaled(C64::new(0.0, 1.0)))
        .unwrap()
        .normalized()
        .unwrap();
    let rho = psi.to_density();
    let points = WignerGrid::joint_plane(Plane::ReRe, 5, 1.0);
    let e = [0.03, 0.05];
    let contrast = (1.0 - 2.0 * e[0]) * (1.0 - 2.0 * e[1]);
    for (shots, seed) in [(100, 3), (10_000, 4)] {
        let rec = sample_parity_shots(&rho, &points, shots, e, Some(seed)).unwrap();
        for (p, (mean, _)) in points.iter().zip(rec.joint_means()) {
            let exact = joint_wigner(&rho, p.beta1, p.beta2.unwrap(), WignerNorm::Parity).unwrap();
            let m = contrast * exact;
            let sigma = ((1.0 - m * m) / shots as f64).sqrt();
            assert!(
                (mean - m).abs() <= 3.0 * sigma + 1e-12,
                "{shots} shots at {p:?}: {mean} vs {m} (sigma {sigma})"
            );
        }
    }
}

#[test]
fn exact_grid_reconstructs_rank_two_state() {
    let sp = cavities(3);
    let xs: Vec<f64> = (0..40).map(|k| ((k * 37 % 17) as f64 / 8.5) - 1.0).collect();
    let rho = random_mixed(&sp, 2, &xs);
    let ring = ring_points(3, 1.4);
    let pts = WignerGrid::product(&ring, &ring);
    let grid = WignerGrid::evaluate(&rho, &pts, WignerNorm::TwoOverPi).unwrap();
    let rec = reconstruct_density_matrix(&grid, &sp, &Reconstructor::default()).unwrap();
    assert!(state_fidelity(&rec.rho, &rho).unwrap() > 0.999);
    assert!(trace_distance(&rec.rho, &rho).unwrap() < 1e-6);
    assert_eq!(rec.effective_rank, 2);
}

#[test]
fn single_mode_wigner_integrates_to_trace() {
    let a = ModeSpace::alice(8).unwrap();
    let xs = axis(81, 4.0);
    let h = xs[1] - xs[0];
    for rho in [
        fock_state(a, 1).unwrap().to_density(),
        coherent_state(C64::new(0.8, -0.5), a).unwrap().to_density(),
    ] {
        let mut total = 0.0;
        for &x in &xs {
            for &y in &xs {
                total += wigner_single(&rho, C64::new(x, y), WignerNorm::TwoOverPi).unwrap();
            }
        }
        // ∫ W d²β with W normalized by 2/π
        let integral = total * h * h;
        assert!((integral - 1.0).abs() < 0.02, "{integral}");
    }
    // parity and 2/π normalizations differ by the constant factor
    let rho = fock_state(a, 1).unwrap().to_density();
    let p = wigner_single(&rho, C64::new(0.2, 0.1), WignerNorm::Parity).unwrap();
    let w = wigner_single(&rho, C64::new(0.2, 0.1), WignerNorm::TwoOverPi).unwrap();
    assert!((w - FRAC_2_PI * p).abs() < 1e-15);
}

#[test]
fn xy_assembly_reproduces_synthetic_channel_output() {
    let mut sp = vec![ModeSpace::ancilla()];
    sp.extend(cavities(2));
    let xs: Vec<f64> = (0..50).map(|k| ((k * 23 % 19) as f64 / 9.5) - 1.0).collect();
    let rho = random_mixed(&sp, 3, &xs);
    let c = conditional_states(&rho, AssemblyConvention::XY).unwrap();
    let asm = assemble_three_mode(&c[0], &c[1], &c[2], &c[3]).unwrap();
    assert!(trace_distance(&asm.rho, &rho).unwrap() < 1e-9);
    assert!(asm.hermiticity_residual < 1e-12);
}

#[test]
fn literal_minus_probe_cannot_resolve_imaginary_coherence() {
    let mut sp = vec![ModeSpace::ancilla()];
    sp.extend(cavities(2));
    // (|g⟩ + i|e⟩)|0,1⟩/√2: the ancilla coherence is purely imaginary
    let g = StateVector::basis(&sp, &[0, 0, 1]).unwrap();
    let e = StateVector::basis(&sp, &[1, 0, 1]).unwrap();
    let psi = g.add(&e.scaled(C64::new(0.0, 1.0))).unwrap().normalized().unwrap();
    let rho = psi.to_density();
    let lit = conditional_states(&rho, AssemblyConvention::Literal).unwrap();
    let wrong = assemble_three_mode(&lit[0], &lit[1], &lit[2], &lit[3]).unwrap();
    assert!(trace_distance(&wrong.rho, &rho).unwrap() > 0.1);
    let xy = conditional_states(&rho, AssemblyConvention::XY).unwrap();
    let right = assemble_three_mode(&xy[0], &xy[1], &xy[2], &xy[3]).unwrap();
    assert!(trace_distance(&right.rho, &rho).unwrap() < 1e-12);
}

#[test]
fn pauli_plan_recovers_correlators_of_code_states() {
    let enc = make_encoding(EncodingKind::Coherent { alpha: 1.41 }, 18).unwrap();
    let plan = pauli_points_plan(&enc).unwrap();
    assert_eq!(plan.points.len(), 16);
    for labels in ["01", "+0", "+i-", "-1"] {
        let rho = enc.encode_two_qubit(labels).unwrap().to_density();
        let values: Vec<f64> = plan
            .points
            .iter()
            .map(|p: &GridPoint| joint_wigner(&rho, p.beta1, p.beta2.unwrap(), WignerNorm::Parity).unwrap())
            .collect();
        let got = plan.correlators(&values).unwrap();
        let want = correlators(&rho, &enc).unwrap();
        for k in 0..16 {
            assert!((got.values[k] - want.values[k]).abs() < 1e-9, "{labels} [{k}]");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn assembly_is_exact_for_random_three_mode_states(xs in prop::collection::vec(-1.0f64..1.0, 24), rank in 1usize..4) {
        let mut sp = vec![ModeSpace::ancilla()];
        sp.extend(cavities(2));
        let rho = random_mixed(&sp, rank, &xs);
        let c = conditional_states(&rho, AssemblyConvention::XY).unwrap();
        let asm = assemble_three_mode(&c[0], &c[1], &c[2], &c[3]).unwrap();
        prop_assert!(trace_distance(&asm.rho, &rho).unwrap() < 1e-9);
    }

    #[test]
    fn reconstruction_returns_the_generator(xs in prop::collection::vec(-1.0f64..1.0, 24)) {
        let sp = cavities(2);
        let rho = random_mixed(&sp, 1, &xs);
        let ring = ring_points(2, 1.0);
        let grid = WignerGrid::evaluate(&rho, &WignerGrid::product(&ring, &ring), WignerNorm::Parity).unwrap();
        let rec = reconstruct_density_matrix(&grid, &sp, &Reconstructor::default()).unwrap();
        prop_assert!(trace_distance(&rec.rho, &rho).unwrap() < 1e-7);
    }
}
