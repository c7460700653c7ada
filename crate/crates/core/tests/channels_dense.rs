//! Dense-simulation checks of the measure-and-correct channels: Kraus forms
//! against a literal oracle, codeword outputs, idempotence, order robustness,
//! and the continuous-time limit.

mod common;

use common::{c, dense_oracle, mats_equal};
use dissenc::channels::{max_abs_diff, random_density};
use dissenc::codes::builtin;
use dissenc::verify::ReferenceEncoding;
use dissenc::{
    cde_generator, embed_logical, embed_state, encoding_map, encoding_residuals, evolve_cde,
    projector_onto_code, synthesize_plan, ComposedEncoder, DensityMatrix, EncoderPlan, KrausMap,
    PauliOperator, QubitState, StateVector, Tolerances,
};
use nalgebra::{Complex, DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn plan_for(name: &str) -> EncoderPlan {
    synthesize_plan(&builtin(name).unwrap().code).unwrap()
}

fn nominal_density(plan: &EncoderPlan) -> DensityMatrix<f64> {
    dissenc::channels::nominal_gauge_vector::<f64>(plan.nominal_gauge())
        .unwrap()
        .density()
}

#[test]
fn single_step_kraus_operators_match_the_oracle() {
    for name in ["repetition3", "perfect5"] {
        let plan = plan_for(name);
        for step in plan.steps() {
            let map: KrausMap<f64> = encoding_map(&step.stabilizer, &step.correction).unwrap();
            let d = 1usize << plan.n();
            let eye = DMatrix::from_diagonal_element(d, d, c(1.0, 0.0));
            let s = dense_oracle(&step.stabilizer);
            let corr = dense_oracle(&step.correction);
            let half = c(0.5, 0.0);
            let plus = (&eye + &s) * half;
            let minus = &corr * ((&eye - &s) * half);
            assert!(mats_equal(&map.kraus_list()[0], &plus, 1e-14));
            assert!(mats_equal(&map.kraus_list()[1], &minus, 1e-14));
            assert!(map.trace_preservation_residual() < 1e-13);
        }
    }
}

#[test]
fn composed_kraus_form_agrees_with_sequential_application() {
    let plan = plan_for("perfect5");
    let encoder = ComposedEncoder::from_plan(&plan, None).unwrap();
    let kraus = encoder.kraus_map::<f64>().unwrap();
    assert_eq!(kraus.kraus_list().len(), 1 << plan.r());
    assert!(kraus.trace_preservation_residual() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let rho = random_density::<f64>(plan.n(), 2, &mut rng).unwrap();
        let fast = encoder.apply(&rho).unwrap();
        let explicit = kraus.apply(&rho).unwrap();
        assert!(fast.max_abs_diff(&explicit) < 1e-12);
    }
}

#[test]
fn repetition_encoder_is_amplitude_exact_on_superpositions() {
    let plan = plan_for("repetition3");
    let encoder = ComposedEncoder::from_plan(&plan, None).unwrap();
    let alpha = Complex::new(0.6, 0.0);
    let beta = Complex::new(0.0, 0.8);
    let psi = StateVector::<f64>::new(1, DVector::from_vec(vec![alpha, beta])).unwrap();
    let gauge = StateVector::product(&[QubitState::Plus, QubitState::Plus]).unwrap();
    let input = embed_state(&psi, &gauge, &plan).unwrap();
    let output = encoder.apply(&input.density()).unwrap();

    let mut expected = DVector::zeros(8);
    expected[0] = alpha;
    expected[7] = beta;
    let expected = StateVector::<f64>::new(3, expected).unwrap();
    assert!(output.max_abs_diff(&expected.density()) < 1e-14);
    assert!((output.fidelity_pure(&expected).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn shor_uploads_land_on_the_ghz_product_codewords() {
    let plan = plan_for("shor9");
    let encoder = ComposedEncoder::from_plan(&plan, None).unwrap();
    let sigma = nominal_density(&plan);

    // The Z generators pair qubits into the GHZ blocks {0,5,6}, {1,2,7}
    // and {3,4,8}; the X generators flip two blocks at a time. Codewords
    // superpose the eight block-constant strings, split by the parity
    // that Z on qubits 0, 7, 8 reads out.
    let block_mask =
        |qubits: [usize; 3]| -> usize { qubits.iter().map(|q| 1usize << (8 - q)).sum() };
    let blocks = [
        block_mask([0, 5, 6]),
        block_mask([1, 2, 7]),
        block_mask([3, 4, 8]),
    ];
    let mut codewords = [DVector::zeros(512), DVector::zeros(512)];
    for choice in 0..8usize {
        let parity = choice.count_ones() as usize % 2;
        let string: usize = (0..3).filter(|i| choice >> i & 1 == 1).map(|i| blocks[i]).sum();
        codewords[parity][string] = c(0.5, 0.0);
    }

    for (index, amplitudes) in codewords.into_iter().enumerate() {
        let codeword = StateVector::<f64>::new(9, amplitudes).unwrap();
        let rho_l = DensityMatrix::<f64>::basis(1, index).unwrap();
        let input = embed_logical(&rho_l, &sigma, &plan).unwrap();
        let output = encoder.apply(&input).unwrap();
        let fidelity = output.fidelity_pure(&codeword).unwrap();
        assert!(
            (fidelity - 1.0).abs() < 1e-12,
            "upload {index}: fidelity {fidelity}"
        );
    }
}

#[test]
fn encoder_range_lies_inside_the_code_projector() {
    let plan = plan_for("perfect5");
    let encoder = ComposedEncoder::from_plan(&plan, None).unwrap();
    let generators: Vec<PauliOperator> = plan
        .steps()
        .iter()
        .map(|step| step.stabilizer.clone())
        .collect();
    let projector = projector_onto_code::<f64>(plan.n(), &generators).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for trial in 0..40 {
        let rho = random_density::<f64>(plan.n(), 1 + trial % 4, &mut rng).unwrap();
        let image = encoder.apply_matrix(rho.matrix());
        let sandwiched = &projector * &image * &projector;
        assert!(max_abs_diff(&sandwiched, &image) < 1e-12);
    }
}

#[test]
fn encoders_are_idempotent() {
    for name in ["repetition3", "perfect5"] {
        let plan = plan_for(name);
        let encoder = ComposedEncoder::from_plan(&plan, None).unwrap();
        let superop = encoder.superoperator::<f64>().unwrap();
        assert!(
            superop.idempotence_residual() < 1e-12,
            "{name} superoperator is not a projection"
        );
    }
    for name in ["steane7", "shor9"] {
        let plan = plan_for(name);
        let encoder = ComposedEncoder::from_plan(&plan, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..12 {
            let rho = random_density::<f64>(plan.n(), 2, &mut rng).unwrap();
            let once = encoder.apply(&rho).unwrap();
            let twice = encoder.apply(&once).unwrap();
            assert!(twice.max_abs_diff(&once) < 1e-12, "{name} moved a fixed point");
        }
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &head) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

#[test]
fn small_encoders_are_order_robust_exhaustively() {
    for name in ["repetition3", "perfect5"] {
        let plan = plan_for(name);
        assert!(plan.order_robust(), "{name} plan should be order robust");
        let baseline = ComposedEncoder::from_plan(&plan, None)
            .unwrap()
            .superoperator::<f64>()
            .unwrap();
        let steps: Vec<usize> = (0..plan.r()).collect();
        for order in permutations(&steps) {
            let shuffled = ComposedEncoder::from_plan(&plan, Some(&order))
                .unwrap()
                .superoperator::<f64>()
                .unwrap();
            assert!(
                baseline.max_abs_diff(&shuffled) < 1e-12,
                "{name} changed under order {order:?}"
            );
        }
    }
}

#[test]
fn large_encoders_are_order_robust_on_probe_states() {
    for name in ["steane7", "shor9"] {
        let plan = plan_for(name);
        assert!(plan.order_robust(), "{name} plan should be order robust");
        let baseline = ComposedEncoder::from_plan(&plan, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut order: Vec<usize> = (0..plan.r()).collect();
        for _ in 0..10 {
            order.shuffle(&mut rng);
            let shuffled = ComposedEncoder::from_plan(&plan, Some(&order)).unwrap();
            for _ in 0..5 {
                let rho = random_density::<f64>(plan.n(), 2, &mut rng).unwrap();
                let a = baseline.apply(&rho).unwrap();
                let b = shuffled.apply(&rho).unwrap();
                assert!(
                    a.max_abs_diff(&b) < 1e-12,
                    "{name} output depends on order {order:?}"
                );
            }
        }
    }
}

#[test]
fn cde_evolution_matches_the_closed_form() {
    let plan = plan_for("repetition3");
    let encoder = ComposedEncoder::from_plan(&plan, None).unwrap();
    let tol = Tolerances::<f64>::default();
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let rho = random_density::<f64>(3, 2, &mut rng).unwrap();
    let encoded = encoder.apply(&rho).unwrap();

    for t in [0.1, 1.0, 5.0] {
        let evolved = evolve_cde(&encoder, &rho, t, &tol).unwrap();
        let decay = (-t).exp();
        let closed = rho.matrix() * Complex::new(decay, 0.0)
            + encoded.matrix() * Complex::new(1.0 - decay, 0.0);
        assert!(
            max_abs_diff(evolved.matrix(), &closed) < 1e-10,
            "series deviates from the idempotent closed form at t = {t}"
        );
    }

    let late = evolve_cde(&encoder, &rho, 50.0, &tol).unwrap();
    assert!(late.max_abs_diff(&encoded) < 1e-9);

    let grid = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0];
    let mut last = f64::INFINITY;
    for t in grid {
        let evolved = evolve_cde(&encoder, &rho, t, &tol).unwrap();
        let distance = evolved.max_abs_diff(&encoded);
        assert!(distance <= last + 1e-10, "distance grew at t = {t}");
        last = distance;
    }
}

#[test]
fn cde_generator_annihilates_fixed_points_and_is_stable() {
    let plan = plan_for("repetition3");
    let encoder = ComposedEncoder::from_plan(&plan, None).unwrap();
    let generator = cde_generator::<f64>(&encoder).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(59);
    let rho = random_density::<f64>(3, 3, &mut rng).unwrap();
    let encoded = encoder.apply(&rho).unwrap();
    let moved = generator.apply(&encoded).unwrap();
    let residual = moved
        .matrix()
        .iter()
        .map(|e| e.norm())
        .fold(0.0f64, f64::max);
    assert!(residual < 1e-12, "generator moves an encoded state");

    for value in generator.eigenvalues().unwrap() {
        assert!(value.re <= 1e-9, "unstable eigenvalue {value}");
    }
}

#[test]
fn out_of_basin_gauge_states_break_the_encoding_identity() {
    let plan = plan_for("repetition3");
    let encoder = ComposedEncoder::from_plan(&plan, None).unwrap();
    let reference = ReferenceEncoding::<f64>::new(&plan).unwrap();
    let plus = StateVector::<f64>::product(&[QubitState::Plus]).unwrap().density();

    let inside = nominal_density(&plan);
    let (identity, matched) =
        encoding_residuals(&plan, &encoder, &reference, &plus, &inside).unwrap();
    assert!(identity < 1e-13 && matched < 1e-13);

    let outside = StateVector::<f64>::product(&[QubitState::Zero, QubitState::Zero])
        .unwrap()
        .density();
    let (identity, matched) =
        encoding_residuals(&plan, &encoder, &reference, &plus, &outside).unwrap();
    assert!(identity > 0.1, "coherence survived an out-of-basin gauge state");
    assert!(matched > 0.1);
}

#[test]
fn single_precision_encode_stays_within_float_accuracy() {
    let plan = plan_for("repetition3");
    let encoder = ComposedEncoder::from_plan(&plan, None).unwrap();
    let psi = StateVector::<f32>::product(&[QubitState::Plus]).unwrap();
    let gauge = StateVector::product(&[QubitState::Plus, QubitState::Plus]).unwrap();
    let input = embed_state(&psi, &gauge, &plan).unwrap();
    let output = encoder.apply(&input.density()).unwrap();

    let mut expected = DVector::zeros(8);
    expected[0] = Complex::new(std::f32::consts::FRAC_1_SQRT_2, 0.0);
    expected[7] = expected[0];
    let expected = StateVector::<f32>::new(3, expected).unwrap();
    assert!(output.max_abs_diff(&expected.density()) < 2e-6);
}
