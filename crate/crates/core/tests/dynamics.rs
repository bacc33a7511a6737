use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use eswap_core::circuits::{
    compile_eswap_on, compile_fredkin_on, eswap_ideal, Axis, Circuit, GateSpec, T_BS,
};
use eswap_core::dynamics::{
    ancilla_exposure, kerr_unitary, lindblad_evolve, CavityChannel, Channel, Liouvillian,
    Mechanisms, NoiseConfig, NoiseModel, NoisyCircuitChannel,
};
use eswap_core::fockspace::linalg::{max_norm, CMat, C64};
use eswap_core::fockspace::{
    annihilation, coherent_state, embed, fock_state, number, state_fidelity, tensor_states,
    ModeSpace, Operator, StateVector,
};

fn spaces(c: usize) -> Vec<ModeSpace> {
    vec![ModeSpace::ancilla(), ModeSpace::alice(c).unwrap(), ModeSpace::bob(c).unwrap()]
}

fn loss_only() -> NoiseModel {
    NoiseConfig::default().to_model().unwrap().with_mechanisms(Mechanisms {
        cavity_loss: true,
        ..Mechanisms::NONE
    })
}

#[test]
fn channel_applies_gates_in_circuit_order() {
    let sp = spaces(2);
    let gates = vec![GateSpec::rotation(Axis::X, 0.7), GateSpec::rotation(Axis::Y, 1.1)];
    let fwd = Circuit::new(gates.clone(), sp.clone()).unwrap();
    let rev = Circuit::new(gates.into_iter().rev().collect(), sp.clone()).unwrap();
    let rho = fock_state(sp[0], 0)
        .unwrap()
        .tensor(&StateVector::basis(&sp[1..], &[0, 0]).unwrap())
        .unwrap()
        .to_density();
    let ch = NoisyCircuitChannel::new(&fwd, &NoiseModel::noiseless()).unwrap();
    let out = ch.apply(&rho).unwrap();
    let u = fwd.unitary().unwrap();
    assert!(max_norm(&(&out.matrix - u.conjugate(&rho).unwrap().matrix)) < 1e-9);
    let other = rev.unitary().unwrap().conjugate(&rho).unwrap();
    assert!(max_norm(&(&out.matrix - other.matrix)) > 1e-2);
}

#[test]
fn noiseless_channel_reproduces_ideal_eswap() {
    let sp = spaces(4);
    let (a, b) = (sp[1], sp[2]);
    for theta in [0.0, PI / 8.0, PI / 4.0, PI / 2.0] {
        let c = compile_eswap_on(theta, sp.clone()).unwrap();
        let inner = Arc::new(NoisyCircuitChannel::new(&c, &NoiseModel::noiseless()).unwrap());
        let ch = CavityChannel::ground(inner).unwrap();
        let psi = StateVector::basis(&[a, b], &[0, 1])
            .unwrap()
            .add(&StateVector::basis(&[a, b], &[2, 1]).unwrap())
            .unwrap()
            .normalized()
            .unwrap();
        let out = ch.apply(&psi.to_density()).unwrap();
        let want = eswap_ideal(theta, a, b).unwrap().conjugate(&psi.to_density()).unwrap();
        assert!(max_norm(&(out.matrix - want.matrix)) < 1e-6, "theta {theta}");
    }
}

#[test]
fn loss_never_increases_photon_number() {
    let sp = spaces(4);
    let c = compile_eswap_on(PI / 4.0, sp.clone()).unwrap();
    let ch = NoisyCircuitChannel::new(&c, &loss_only()).unwrap();
    let n_tot = embed(&number(sp[1]), &sp).unwrap().add(&embed(&number(sp[2]), &sp).unwrap()).unwrap();
    for occ in [[0, 1], [1, 2], [0, 3]] {
        let rho = fock_state(sp[0], 0)
            .unwrap()
            .tensor(&StateVector::basis(&sp[1..], &occ).unwrap())
            .unwrap()
            .to_density();
        let before = n_tot.expectation(&rho).unwrap().re;
        let after = n_tot.expectation(&ch.apply(&rho).unwrap()).unwrap().re;
        assert!(after <= before + 1e-12, "{occ:?}: {before} -> {after}");
        assert!(after < before, "loss should remove photons");
    }
}

#[test]
fn amplitude_damping_matches_exponential_decay() {
    let a = ModeSpace::alice(4).unwrap();
    let gamma: f64 = 1.0 / 250e-6;
    let l = annihilation(a).scaled(C64::new(gamma.sqrt(), 0.0));
    let h = Operator::new(CMat::zeros(4, 4), vec![a]).unwrap();
    let rho = fock_state(a, 1).unwrap().to_density();
    for t in [10e-6, 50e-6, 200e-6] {
        let out = lindblad_evolve(&rho, &h, &[l.clone()], t, 1e-7).unwrap();
        let p1 = out.matrix[(1, 1)].re;
        assert!((p1 - (-gamma * t).exp()).abs() < 1e-6, "t = {t}: {p1}");
    }
}

#[test]
fn number_dephasing_kills_coherences_at_the_right_rate() {
    let a = ModeSpace::alice(3).unwrap();
    let kappa: f64 = 1.0 / 100e-6;
    let l = number(a).scaled(C64::new(kappa.sqrt(), 0.0));
    let liou = Liouvillian::new(&CMat::zeros(3, 3), &[l.matrix]).unwrap();
    let psi = StateVector::new(
        eswap_core::fockspace::linalg::CVec::from_vec(vec![
            C64::new(FRAC_1_SQRT_2, 0.0),
            C64::new(0.0, 0.0),
            C64::new(FRAC_1_SQRT_2, 0.0),
        ]),
        vec![a],
    )
    .unwrap();
    let times = [20e-6, 60e-6];
    let out = liou.evolve_record(&psi.to_density().matrix, &times, 1e-7).unwrap();
    for (t, m) in times.iter().zip(&out) {
        // (m − n)² = 4 for the 0–2 coherence
        let want = 0.5 * (-0.5 * kappa * 4.0 * t).exp();
        assert!((m[(0, 2)].re - want).abs() < 1e-6, "t = {t}");
        assert!((m[(0, 0)].re - 0.5).abs() < 1e-12);
    }
}

#[test]
fn kerr_revival_and_cat_at_half_period() {
    let c = 40;
    let (a, b) = (ModeSpace::alice(c).unwrap(), ModeSpace::bob(c).unwrap());
    let k = 2.0 * PI * 5e3;
    let alpha = C64::new(1.5, 0.0);
    let psi = tensor_states(&[coherent_state(alpha, a).unwrap(), fock_state(b, 0).unwrap()]).unwrap();
    let full = kerr_unitary(k, k, 2.0 * PI / k, a, b).unwrap().apply(&psi).unwrap();
    assert!(1.0 - full.inner(&psi).unwrap().norm_sqr() < 1e-10);

    // K t = π: the phase is +1 for n mod 4 ∈ {0, 1} and −1 otherwise,
    // i.e. (e^{−iπ/4}|iα⟩ + e^{iπ/4}|−iα⟩)/√2
    let half = kerr_unitary(k, k, PI / k, a, b).unwrap().apply(&psi).unwrap();
    let vac = fock_state(b, 0).unwrap();
    let plus = tensor_states(&[coherent_state(alpha * C64::i(), a).unwrap(), vac.clone()]).unwrap();
    let minus = tensor_states(&[coherent_state(-alpha * C64::i(), a).unwrap(), vac]).unwrap();
    let cat = plus
        .scaled(C64::from_polar(1.0, -PI / 4.0))
        .add(&minus.scaled(C64::from_polar(1.0, PI / 4.0)))
        .unwrap()
        .normalized()
        .unwrap();
    assert!(1.0 - half.inner(&cat).unwrap().norm_sqr() < 1e-8);
    let f = state_fidelity(&half.to_density(), &psi.to_density()).unwrap();
    assert!(f < 0.6);
}

#[test]
fn ancilla_exposure_is_the_hadamard_window() {
    let sp = spaces(3);
    for theta in [0.0, PI / 4.0] {
        let c = compile_eswap_on(theta, sp.clone()).unwrap();
        let window: f64 = c.gates[1..6].iter().map(|g| g.duration).sum();
        let got = ancilla_exposure(&c).unwrap();
        assert!((got - window).abs() < 1e-15, "theta {theta}: {got} vs {window}");
        assert!(got < c.total_duration() - 2.0 * T_BS + 1e-15);
    }
    // the ancilla never leaves |g> in the Fredkin sequence started from |g>
    let f = compile_fredkin_on(sp).unwrap();
    assert_eq!(ancilla_exposure(&f).unwrap(), 0.0);
}

#[test]
fn default_noise_is_trace_preserving_on_physical_inputs() {
    let sp = spaces(3);
    let c = compile_eswap_on(PI / 4.0, sp.clone()).unwrap();
    let ch = NoisyCircuitChannel::new(&c, &NoiseConfig::default().to_model().unwrap()).unwrap();
    let rho = fock_state(sp[0], 0)
        .unwrap()
        .tensor(&StateVector::basis(&sp[1..], &[1, 1]).unwrap())
        .unwrap()
        .to_density();
    let out = ch.apply(&rho).unwrap();
    assert!((out.trace() - 1.0).abs() < 1e-9);
    assert!(out.eigenvalues().iter().all(|&e| e > -1e-9));
}
