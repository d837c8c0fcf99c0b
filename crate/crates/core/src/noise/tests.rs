use super::*;
use crate::circuit::{sample_counts, simulate_statevector, synthesize_qmarina};
use crate::model::{evolve_single_excitation, populations, TcParams};
use crate::transpiler::{transpile, Entangler, GateSetSpec, TranspileOptions};

fn reference_circuit(t: f64) -> Circuit {
    let p = TcParams::reference();
    let d = populations(&evolve_single_excitation(&p, t).unwrap());
    synthesize_qmarina(&d, p.excited_emitter).unwrap().0
}

fn compiled(t: f64, entangler: Entangler, use_zz: bool) -> Circuit {
    let opts = TranspileOptions { use_zz, fuse_single_qubit: use_zz, ..Default::default() };
    transpile(&reference_circuit(t), &GateSetSpec::ion(entangler), &opts).unwrap().circuit
}

fn hamming_one_weight(probs: &[f64]) -> f64 {
    probs.iter().enumerate().filter(|(i, _)| i.count_ones() == 1).map(|(_, p)| p).sum()
}

type NoJitter = rand_chacha::ChaCha8Rng;

#[test]
fn zero_noise_is_the_ideal_simulator() {
    for t in [0.0, 0.4, 1.7] {
        let c = compiled(t, Entangler::MsXx, false);
        let ideal = simulate_statevector(&c).unwrap();
        let noisy = noisy_distribution::<NoJitter>(&c, &NoiseModel::ideal(), None).unwrap();
        assert!(ideal.iter().zip(&noisy).all(|(a, b)| (a - b).abs() < 1e-10));
        let a = apply_noisy(&c, &NoiseModel::ideal(), 2000, 11).unwrap();
        let b = sample_counts(&c, 2000, 11).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn trace_and_positivity_under_all_channels() {
    let mut model = noise_from_fidelity(&FidelityTable::qscout(), 0).unwrap();
    model.coherent_overrotation.insert("ZZ".into(), 0.05);
    model.coherent_overrotation.insert("U1q".into(), -0.02);
    model.amplitude_noise_coeff = 0.1;
    let c = compiled(1.2, Entangler::Zz, true);
    let mut rng = crate::rng::stream(3, &[]);
    let rho = evolve_density(&c, &model, Some(&mut rng)).unwrap();
    assert!((rho.trace() - ONE).norm() < 1e-9);
    assert!(rho.populations().iter().all(|&p| p > -1e-9));
    model.spam_flip = 0.03;
    let probs = noisy_distribution(&c, &model, Some(&mut rng)).unwrap();
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn fidelity_conversion_for_run_zero() {
    let m = noise_from_fidelity(&FidelityTable::qscout(), 0).unwrap();
    assert!((m.depol_1q - 0.014).abs() < 1e-12);
    assert!((m.depol_for_pair(1, 0) - 0.016 * 4.0 / 3.0).abs() < 1e-12);
    assert!((m.depol_for_pair(0, 3) - 0.024 * 4.0 / 3.0).abs() < 1e-12);
    let mean = [0.016, 0.007, 0.024, 0.008, 0.015].iter().sum::<f64>() / 5.0 * 4.0 / 3.0;
    assert!((m.depol_for_pair(1, 2) - mean).abs() < 1e-12);
    assert!(noise_from_fidelity(&FidelityTable::qscout(), 9).is_err());
}

#[test]
fn discard_fraction_band_at_two_percent() {
    let model = NoiseModel { depol_2q: 0.02, ..NoiseModel::default() };
    for t in [0.3, 0.9, 1.5, 2.4] {
        let c = compiled(t, Entangler::Zz, true);
        let probs = noisy_distribution::<NoJitter>(&c, &model, None).unwrap();
        let discard = 1.0 - hamming_one_weight(&probs);
        assert!(discard > 0.0);
        assert!(discard < 0.35, "t = {t}: discard {discard}");
    }
}

#[test]
fn discard_grows_with_depolarizing() {
    let c = compiled(1.1, Entangler::MsXx, false);
    let mut last = -1.0;
    for k in 0..8 {
        let model = NoiseModel { depol_2q: 0.01 * k as f64, ..NoiseModel::default() };
        let probs = noisy_distribution::<NoJitter>(&c, &model, None).unwrap();
        let discard = 1.0 - hamming_one_weight(&probs);
        assert!(discard >= last - 1e-12);
        last = discard;
    }
    // Sampled discard fractions follow within binomial noise.
    let lo = apply_noisy(&c, &NoiseModel { depol_2q: 0.01, ..NoiseModel::default() }, 4000, 5).unwrap();
    let hi = apply_noisy(&c, &NoiseModel { depol_2q: 0.06, ..NoiseModel::default() }, 4000, 5).unwrap();
    let frac = |c: &Counts| c.iter().filter(|(k, _)| k.count_ones() != 1).map(|(_, n)| n).sum::<u64>() as f64 / 4000.0;
    assert!(frac(&hi) > frac(&lo));
}

#[test]
fn deterministic_per_seed() {
    let model = NoiseModel { depol_2q: 0.02, amplitude_noise_coeff: 0.05, spam_flip: 0.01, ..NoiseModel::default() };
    let c = compiled(0.7, Entangler::Zz, true);
    let a = apply_noisy(&c, &model, 1234, 9).unwrap();
    let b = apply_noisy(&c, &model, 1234, 9).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.shots(), 1234);
    assert_ne!(a, apply_noisy(&c, &model, 1234, 10).unwrap());
}

#[test]
fn readout_flips() {
    let mut c = Circuit::new(2);
    c.push(Gate::one(GateKind::X, 1)).unwrap();
    let model = NoiseModel { spam_flip: 0.1, ..NoiseModel::default() };
    let p = noisy_distribution::<NoJitter>(&c, &model, None).unwrap();
    let want = [0.1 * 0.9, 0.1 * 0.1, 0.9 * 0.9, 0.9 * 0.1];
    assert!(p.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12));
}

#[test]
fn overrotation_scales_angles() {
    let model: NoiseModel = NoiseModel {
        coherent_overrotation: [("RX".to_string(), 0.1), ("CZ".to_string(), 0.03)].into_iter().collect(),
        ..NoiseModel::default()
    };
    let NoisyGate::One(m) = noisy_matrix(&Gate::one(GateKind::Rx(1.0), 0), &model, 0.0) else { panic!() };
    assert!(crate::linalg::phase_distance2(&m, &GateKind::Rx(1.1).matrix1().unwrap()) < 1e-12);
    let NoisyGate::Two(cz) = noisy_matrix(&Gate::two(GateKind::Cz, 0, 1), &model, 0.0) else { panic!() };
    assert!((cz[(3, 3)] - crate::linalg::expi(std::f64::consts::PI * 1.03)).norm() < 1e-12);
    let u = GateKind::U1q { theta: 0.8, phi: -0.4, lambda: 1.9 }.matrix1().unwrap();
    assert!(crate::linalg::phase_distance2(&scale_rotation(&u, 1.0), &u) < 1e-12);
    let jit = NoiseModel { amplitude_noise_coeff: 0.5, ..NoiseModel::default() };
    let NoisyGate::Two(ms) = noisy_matrix(&Gate::two(GateKind::MsXx(0.4), 0, 1), &jit, 1.0) else { panic!() };
    let want = GateKind::MsXx(0.4 * (1.0 + 0.5 * 0.4)).matrix2().unwrap();
    assert!(crate::linalg::phase_distance4(&ms, &want) < 1e-12);
}

#[test]
fn invalid_models_and_widths() {
    let c = reference_circuit(0.3);
    for bad in [
        NoiseModel { depol_1q: -0.1, ..NoiseModel::default() },
        NoiseModel { spam_flip: 1.5, ..NoiseModel::default() },
        NoiseModel { amplitude_noise_coeff: -1.0, ..NoiseModel::default() },
        NoiseModel { batch_shots: 0, ..NoiseModel::default() },
        NoiseModel { coherent_overrotation: [("FOO".to_string(), 0.1)].into_iter().collect(), ..NoiseModel::default() },
    ] {
        assert!(matches!(apply_noisy(&c, &bad, 10, 0), Err(Error::InvalidNoise(_))));
    }
    let wide = Circuit::new(11);
    assert!(matches!(apply_noisy(&wide, &NoiseModel::ideal(), 10, 0), Err(Error::TooWide { .. })));
}
