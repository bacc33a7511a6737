use std::f64::consts::FRAC_PI_4;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use eswap_core::circuits::compile_eswap_on;
use eswap_core::dynamics::{Channel, NoiseConfig, NoisyCircuitChannel};
use eswap_core::encodings::{make_encoding, EncodingKind};
use eswap_core::fockspace::linalg::{expm, CMat, C64};
use eswap_core::fockspace::{fock_state, ModeSpace, StateVector};
use eswap_core::processtomo::{run_qpt, Operation, QptMode, QptSetup};
use eswap_core::tomography::{Plane, WignerGrid, WignerNorm};

fn spaces(c: usize) -> Vec<ModeSpace> {
    vec![ModeSpace::ancilla(), ModeSpace::alice(c).unwrap(), ModeSpace::bob(c).unwrap()]
}

fn bench_expm(c: &mut Criterion) {
    let d = 64;
    let h = CMat::from_fn(d, d, |i, j| {
        let x = ((i * 7 + j * 3) % 11) as f64 - 5.0;
        C64::new(x + if i == j { 1.0 } else { 0.0 }, 0.0)
    });
    let h = (&h + h.adjoint()).map(|z| z * 0.05);
    c.bench_function("expm 64x64", |b| {
        b.iter(|| expm(black_box(&h), C64::new(0.0, -1.0)).unwrap())
    });
}

fn bench_noisy_eswap(c: &mut Criterion) {
    let sp = spaces(4);
    let circuit = compile_eswap_on(FRAC_PI_4, sp.clone()).unwrap();
    let noise = NoiseConfig::default().to_model().unwrap();
    let rho = fock_state(sp[0], 0)
        .unwrap()
        .tensor(&StateVector::basis(&sp[1..], &[1, 1]).unwrap())
        .unwrap()
        .to_density();
    let mut g = c.benchmark_group("noisy eswap");
    g.sample_size(10);
    g.bench_function("build channel, cutoff 4", |b| {
        b.iter(|| NoisyCircuitChannel::new(black_box(&circuit), &noise).unwrap())
    });
    let ch = NoisyCircuitChannel::new(&circuit, &noise).unwrap();
    g.bench_function("apply, cutoff 4", |b| b.iter(|| ch.apply(black_box(&rho)).unwrap()));
    g.finish();
}

fn bench_wigner(c: &mut Criterion) {
    let enc = make_encoding(EncodingKind::Binomial, 9).unwrap();
    let rho = enc.encode_two_qubit("+0").unwrap().to_density();
    let points = WignerGrid::joint_plane(Plane::ImIm, 21, 2.5);
    let mut g = c.benchmark_group("joint wigner");
    g.sample_size(10);
    g.bench_function("21x21 plane, cutoff 9", |b| {
        b.iter(|| WignerGrid::evaluate(black_box(&rho), &points, WignerNorm::Parity).unwrap())
    });
    g.finish();
}

fn bench_qpt(c: &mut Criterion) {
    let setup = QptSetup::new(make_encoding(EncodingKind::Fock, 4).unwrap());
    let mut g = c.benchmark_group("qpt");
    g.sample_size(10);
    g.bench_function("exact noiseless fock", |b| {
        b.iter(|| run_qpt(&setup, Operation::Eswap { theta: FRAC_PI_4 }, QptMode::Exact).unwrap())
    });
    g.finish();
}

criterion_group!(benches, bench_expm, bench_noisy_eswap, bench_wigner, bench_qpt);
criterion_main!(benches);
