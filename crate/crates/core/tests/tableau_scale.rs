//! Cross-validation of the tableau simulator against dense matrices on
//! every code small enough to hold densely, then the finite-time encoding
//! property on toric lattices well beyond dense reach.

use dissenc::channels::nominal_gauge_vector;
use dissenc::codes::builtin;
use dissenc::gf2::BitVec;
use dissenc::{
    build_toric, embed_logical, enumerate_branches, synthesize_plan, tableau_for_plan,
    toric_plan, ComposedEncoder, DensityMatrix, EncoderPlan, EnumerationLimits, PauliOperator,
    QubitState, StateVector,
};
use rand::{Rng as _, SeedableRng as _};
use rand_chacha::ChaCha8Rng;

fn qubit_state(symbol: char) -> QubitState {
    match symbol {
        '0' => QubitState::Zero,
        '1' => QubitState::One,
        '+' => QubitState::Plus,
        '-' => QubitState::Minus,
        other => panic!("bad symbol {other}"),
    }
}

fn upload_density(spec: &str) -> DensityMatrix<f64> {
    let qubits: Vec<QubitState> = spec.chars().map(qubit_state).collect();
    StateVector::<f64>::product(&qubits).unwrap().density()
}

/// Single-qubit expectations fixed by an upload symbol: (X, Z).
fn symbol_expectations(symbol: char) -> (f64, f64) {
    match symbol {
        '0' => (0.0, 1.0),
        '1' => (0.0, -1.0),
        '+' => (1.0, 0.0),
        '-' => (-1.0, 0.0),
        other => panic!("bad symbol {other}"),
    }
}

fn random_hermitian_pauli(n: usize, rng: &mut ChaCha8Rng) -> PauliOperator {
    loop {
        let mut x = BitVec::zeros(n);
        let mut z = BitVec::zeros(n);
        for i in 0..n {
            x.set(i, rng.random::<bool>());
            z.set(i, rng.random::<bool>());
        }
        let y_count = x.iter_ones().filter(|&i| z.get(i)).count();
        let op = PauliOperator::new(n, x, z, (y_count % 4) as u8).unwrap();
        if !op.is_identity_letters() {
            return op;
        }
    }
}

fn upload_specs(m: usize) -> Vec<String> {
    match m {
        1 => ["0", "1", "+", "-"].iter().map(|s| s.to_string()).collect(),
        2 => ["00", "0+", "+0", "++", "0-", "1+"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        _ => panic!("no upload set for m = {m}"),
    }
}

/// Branch-weighted tableau expectations must match the dense channel
/// output for every observable probed.
fn cross_validate(plan: &EncoderPlan, observables: &[PauliOperator]) {
    let encoder = ComposedEncoder::from_plan(plan, None).unwrap();
    let sigma = nominal_gauge_vector::<f64>(plan.nominal_gauge())
        .unwrap()
        .density();
    for spec in upload_specs(plan.m()) {
        let dense_in = embed_logical(&upload_density(&spec), &sigma, plan).unwrap();
        let dense_out = encoder.apply(&dense_in).unwrap();

        let initial = tableau_for_plan(plan, &spec).unwrap();
        let set =
            enumerate_branches(&initial, plan.steps(), &EnumerationLimits::default()).unwrap();
        assert!(!set.sampled, "{}: expected exact enumeration", spec);
        let total: f64 = set.leaves.iter().map(|(p, _)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);

        for op in observables {
            let dense_value = dense_out.expectation(op).unwrap();
            assert!(dense_value.im.abs() < 1e-10);
            let tableau_value: f64 = set
                .leaves
                .iter()
                .map(|(p, t)| p * f64::from(t.expectation(op).unwrap()))
                .sum();
            assert!(
                (dense_value.re - tableau_value).abs() < 1e-10,
                "{}: <{op}> dense {} tableau {tableau_value}",
                spec,
                dense_value.re
            );
        }
    }
}

fn probe_set(plan: &EncoderPlan, seed: u64) -> Vec<PauliOperator> {
    let mut observables: Vec<PauliOperator> = plan
        .steps()
        .iter()
        .map(|s| s.stabilizer.clone())
        .chain(plan.logical_x().iter().cloned())
        .chain(plan.logical_z().iter().cloned())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..8 {
        observables.push(random_hermitian_pauli(plan.n(), &mut rng));
    }
    observables
}

#[test]
fn tableau_matches_dense_on_small_codes() {
    for name in ["repetition3", "perfect5", "steane7"] {
        let fixture = builtin(name).unwrap();
        let plan = synthesize_plan(&fixture.code).unwrap();
        cross_validate(&plan, &probe_set(&plan, 11));
    }
}

#[test]
fn tableau_matches_dense_on_toric_l2() {
    let (lat, _) = build_toric(2).unwrap();
    let plan = toric_plan(&lat).unwrap();
    cross_validate(&plan, &probe_set(&plan, 13));
}

#[test]
fn toric_l2_leaves_agree_on_logical_readout() {
    let (lat, _) = build_toric(2).unwrap();
    let plan = toric_plan(&lat).unwrap();
    for spec in upload_specs(2) {
        let initial = tableau_for_plan(&plan, &spec).unwrap();
        let set =
            enumerate_branches(&initial, plan.steps(), &EnumerationLimits::default()).unwrap();
        let symbols: Vec<char> = spec.chars().collect();
        for (_, leaf) in &set.leaves {
            for (i, &symbol) in symbols.iter().enumerate() {
                let (ex, ez) = symbol_expectations(symbol);
                let x = leaf.expectation(&plan.logical_x()[i]).unwrap();
                let z = leaf.expectation(&plan.logical_z()[i]).unwrap();
                assert_eq!(f64::from(x), ex, "{spec}: logical X {i}");
                assert_eq!(f64::from(z), ez, "{spec}: logical Z {i}");
            }
        }
    }
}

#[test]
fn measurement_randomness_matches_dense_at_l2() {
    let (lat, _) = build_toric(2).unwrap();
    let plan = toric_plan(&lat).unwrap();
    let sigma = nominal_gauge_vector::<f64>(plan.nominal_gauge())
        .unwrap()
        .density();
    let dense = embed_logical(&upload_density("00"), &sigma, &plan).unwrap();
    let initial = tableau_for_plan(&plan, "00").unwrap();
    for step in plan.steps() {
        let (outcome, _, deterministic) = initial.measure_pauli(&step.stabilizer, None).unwrap();
        let mean = dense.expectation(&step.stabilizer).unwrap().re;
        if deterministic {
            assert!((mean - f64::from(outcome)).abs() < 1e-12);
        } else {
            assert!(mean.abs() < 1e-12, "{}: <S> = {mean}", step.stabilizer);
        }
    }
}

#[test]
fn finite_time_encoding_holds_at_scale() {
    for l in [3usize, 4, 5] {
        let (lat, _) = build_toric(l).unwrap();
        let plan = toric_plan(&lat).unwrap();
        for spec in upload_specs(2) {
            let initial = tableau_for_plan(&plan, &spec).unwrap();
            let set =
                enumerate_branches(&initial, plan.steps(), &EnumerationLimits::default())
                    .unwrap();
            assert!(!set.leaves.is_empty());
            let symbols: Vec<char> = spec.chars().collect();
            for (_, leaf) in &set.leaves {
                for step in plan.steps() {
                    assert_eq!(
                        leaf.expectation(&step.stabilizer).unwrap(),
                        1,
                        "L = {l}, upload {spec}"
                    );
                }
                for (i, &symbol) in symbols.iter().enumerate() {
                    let (ex, ez) = symbol_expectations(symbol);
                    let x = leaf.expectation(&plan.logical_x()[i]).unwrap();
                    let z = leaf.expectation(&plan.logical_z()[i]).unwrap();
                    assert_eq!(f64::from(x), ex, "L = {l}, upload {spec}, logical X {i}");
                    assert_eq!(f64::from(z), ez, "L = {l}, upload {spec}, logical Z {i}");
                }
            }
        }
    }
}
