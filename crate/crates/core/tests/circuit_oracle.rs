mod common;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{dense_parity, dense_run, max_abs_diff};
use windqnn::circuit::{build_ansatz, build_z_feature_map, compose, EntanglementStrategy};
use windqnn::qnn::{build_template, FeatureMapKind, QnnConfigId, QnnModel, QnnSettings};

fn random_point(rng: &mut ChaCha8Rng, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(lo..hi)).collect()
}

#[test]
fn every_config_matches_the_dense_oracle() {
    let settings = QnnSettings::default();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for id in QnnConfigId::all() {
        let t = build_template(id.feature_map(), id.ansatz(), 4, &settings).unwrap();
        for _ in 0..5 {
            let x = random_point(&mut rng, 4, 0.0, PI);
            let p = random_point(&mut rng, t.n_parameter_slots(), -PI, PI);
            let state = t.simulate(&x, &p).unwrap();
            let dense = dense_run(&t.bind(&x, &p).unwrap(), 4);
            assert!(max_abs_diff(state.amplitudes(), &dense) < 1e-12, "{id}");
            assert!((t.evaluate(&x, &p).unwrap() - dense_parity(&dense, 4)).abs() < 1e-12);
        }
    }
}

#[test]
fn composition_equals_sequential_application() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let map = build_z_feature_map(3, 2).unwrap();
    let ansatz = build_ansatz(3, 2, EntanglementStrategy::Sca).unwrap();
    let both = compose(&map, &ansatz).unwrap();
    let x = random_point(&mut rng, 3, 0.0, PI);
    let p = random_point(&mut rng, ansatz.n_parameter_slots(), -PI, PI);
    let mut gates = map.bind(&x, &[]).unwrap();
    gates.extend(ansatz.bind(&[], &p).unwrap());
    let sequential = dense_run(&gates, 3);
    let composed = both.simulate(&x, &p).unwrap();
    assert!(max_abs_diff(composed.amplitudes(), &sequential) < 1e-12);
}

#[test]
fn parameter_counts_follow_reps() {
    let settings = QnnSettings::default();
    for id in QnnConfigId::all() {
        let t = build_template(id.feature_map(), id.ansatz(), 4, &settings).unwrap();
        assert_eq!(t.n_parameter_slots(), 4 * (settings.ansatz_reps + 1));
        assert_eq!(t.n_feature_slots(), 4);
    }
}

// On four qubits the full and reverse-linear CX blocks realize the same
// basis permutation, so configs 2/5 and 8/11 are the same function.
#[test]
fn full_and_reverse_linear_blocks_coincide_on_four_qubits() {
    let settings = QnnSettings::default();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for map in [FeatureMapKind::Z, FeatureMapKind::Zz] {
        let full = build_template(map, EntanglementStrategy::Full, 4, &settings).unwrap();
        let rev = build_template(map, EntanglementStrategy::ReverseLinear, 4, &settings).unwrap();
        assert_ne!(full.gates(), rev.gates());
        for _ in 0..20 {
            let x = random_point(&mut rng, 4, 0.0, PI);
            let p = random_point(&mut rng, full.n_parameter_slots(), -PI, PI);
            let a = full.simulate(&x, &p).unwrap();
            let b = rev.simulate(&x, &p).unwrap();
            assert!(max_abs_diff(a.amplitudes(), b.amplitudes()) < 1e-12);
        }
    }
    let linear = build_template(FeatureMapKind::Z, EntanglementStrategy::Linear, 4, &settings).unwrap();
    let full = build_template(FeatureMapKind::Z, EntanglementStrategy::Full, 4, &settings).unwrap();
    let x = [0.3, 1.1, 2.0, 0.7];
    let p = random_point(&mut rng, full.n_parameter_slots(), -PI, PI);
    assert!((linear.evaluate(&x, &p).unwrap() - full.evaluate(&x, &p).unwrap()).abs() > 1e-6);
}

#[test]
fn models_predict_inside_the_readout_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for id in QnnConfigId::all() {
        let model = QnnModel::for_config(id, 4, &QnnSettings::default()).unwrap();
        for _ in 0..10 {
            let y = model.predict_scaled(&random_point(&mut rng, 4, 0.0, PI)).unwrap();
            assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&y));
        }
    }
}
