//! Verification layer: structured pass/fail reports, symplectic-level checks
//! of encoder plans, and channel-level checks of the induced maps.

use nalgebra::{ComplexField as _, DMatrix};
use num_complex::Complex;
use rand::seq::SliceRandom as _;
use rand::SeedableRng as _;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channels::{
    apply_code_projector, embed_logical, embed_state, max_abs_diff, mix_with_identity,
    nominal_gauge_vector, project_state, random_density, ChannelError, ComposedEncoder,
    DensityMatrix, KrausMap, QubitState, Scalar, StateVector, Tolerances, MAX_SUPEROP_QUBITS,
};
use crate::code::{CodeError, EncoderPlan};
use crate::pauli::{CheckMatrix, PauliError, PauliLetter, PauliOperator};

/// Largest logical register for which 4^m Pauli products are enumerated.
pub const MAX_ENUMERATED_LOGICALS: usize = 8;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error("{m} logical qubits exceed the enumeration cap of {max}")]
    TooManyLogicals { m: usize, max: usize },
    #[error("projector annihilates upload basis state {index}; nominal gauge state is outside the basin")]
    DegenerateCodeword { index: usize },
    #[error("codeword norms differ ({first} vs {found}); plan operators are inconsistent")]
    UnevenCodewordNorms { first: f64, found: f64 },
    #[error("isometry of shape {rows}x{cols} does not match 2^{n} x {logical_dim}*{gauge_dim}")]
    DecompositionShape {
        n: usize,
        logical_dim: usize,
        gauge_dim: usize,
        rows: usize,
        cols: usize,
    },
    #[error("isometry columns are not orthonormal (residual {residual})")]
    NotIsometry { residual: f64 },
    #[error("cofactor eigenvalue {eigenvalue} falls below the full-rank cutoff {cutoff}")]
    RankDeficientCofactor { eigenvalue: f64, cutoff: f64 },
    #[error("cofactor is not a density matrix: {reason}")]
    InvalidCofactor { reason: String },
    #[error("decompositions cannot be compared: {reason}")]
    MismatchedDecompositions { reason: String },
    #[error("constructed encoder violates trace preservation (residual {residual})")]
    NotTracePreserving { residual: f64 },
}

fn lit<R: Scalar>(x: f64) -> R {
    R::from_f64(x).expect("literal representable in scalar type")
}

fn as_f64<R: Scalar>(x: R) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn list_violations(pairs: &[String]) -> String {
    const SHOWN: usize = 4;
    if pairs.is_empty() {
        return "none".to_string();
    }
    let mut out = pairs[..pairs.len().min(SHOWN)].join(", ");
    if pairs.len() > SHOWN {
        out.push_str(&format!(" and {} more", pairs.len() - SHOWN));
    }
    out
}

// ---------------------------------------------------------------------------
// Symplectic-level checks on an encoder plan.
// ---------------------------------------------------------------------------

/// Each correction must anticommute with its own stabilizer and commute with
/// the stabilizers of other steps. With `ordered = true` only earlier steps
/// are constrained, which is the minimal legality condition for running the
/// maps in the listed order; with `ordered = false` the plan is valid under
/// every ordering.
pub fn check_e1(plan: &EncoderPlan, ordered: bool) -> Result<VerificationReport, VerifyError> {
    let mut report = VerificationReport::new(plan.code().name());
    let steps = plan.steps();

    let mut flips = Vec::new();
    for (k, step) in steps.iter().enumerate() {
        if step.correction.commutes_with(&step.stabilizer)? {
            flips.push(format!("step {k}: [{}, {}] = 0", step.correction, step.stabilizer));
        }
    }
    report.push(CheckResult::exact(
        "correction_flips_own_stabilizer",
        flips.len(),
        list_violations(&flips),
    ));

    let mut disturbed = Vec::new();
    for (k, step_k) in steps.iter().enumerate() {
        for (j, step_j) in steps.iter().enumerate() {
            let constrained = if ordered { j < k } else { j != k };
            if constrained && !step_k.correction.commutes_with(&step_j.stabilizer)? {
                disturbed.push(format!("correction {k} vs stabilizer {j}"));
            }
        }
    }
    let name = if ordered {
        "correction_preserves_earlier_stabilizers"
    } else {
        "correction_preserves_other_stabilizers"
    };
    report.push(CheckResult::exact(name, disturbed.len(), list_violations(&disturbed)));
    Ok(report)
}

/// Corrections must commute with every logical representative, so that the
/// steered sector carries no logical action.
pub fn check_e3(plan: &EncoderPlan) -> Result<VerificationReport, VerifyError> {
    let mut report = VerificationReport::new(plan.code().name());
    let mut violations = Vec::new();
    for (k, step) in plan.steps().iter().enumerate() {
        for (j, lx) in plan.logical_x().iter().enumerate() {
            if !step.correction.commutes_with(lx)? {
                violations.push(format!("correction {k} vs logical X {j}"));
            }
        }
        for (j, lz) in plan.logical_z().iter().enumerate() {
            if !step.correction.commutes_with(lz)? {
                violations.push(format!("correction {k} vs logical Z {j}"));
            }
        }
    }
    report.push(CheckResult::exact(
        "correction_preserves_logicals",
        violations.len(),
        list_violations(&violations),
    ));
    Ok(report)
}

/// One product of logical representatives, factored over the upload register.
/// Masks index the logical qubits: bit i of `p` selects the X representative
/// of logical i, bit i of `q` the Z representative.
#[derive(Debug, Clone)]
pub struct LogicalFactor {
    pub p: usize,
    pub q: usize,
    /// Residual operator on the gauge register (plan gauge order), with the
    /// coefficient of the full product carried along.
    pub gauge_factor: PauliOperator,
}

/// Product ∏_i ops_x[i]^{p_i} · ∏_i ops_z[i]^{q_i}, ascending index within
/// each group.
fn pauli_word(
    n: usize,
    ops_x: &[PauliOperator],
    ops_z: &[PauliOperator],
    p: usize,
    q: usize,
) -> Result<PauliOperator, PauliError> {
    let mut w = PauliOperator::identity(n);
    for (i, op) in ops_x.iter().enumerate() {
        if p >> i & 1 == 1 {
            w = w.multiply(op)?;
        }
    }
    for (i, op) in ops_z.iter().enumerate() {
        if q >> i & 1 == 1 {
            w = w.multiply(op)?;
        }
    }
    Ok(w)
}

fn upload_singles(plan: &EncoderPlan, letter: PauliLetter) -> Result<Vec<PauliOperator>, PauliError> {
    plan.upload_qubits()
        .iter()
        .map(|&u| PauliOperator::single(plan.n(), u, letter))
        .collect()
}

/// Every product of logical representatives must split as a bare Pauli word
/// on the upload qubits times a residual factor on the gauge qubits, and the
/// single-index residuals must generate the recorded basin constraint group.
pub fn check_e2(
    plan: &EncoderPlan,
) -> Result<(VerificationReport, Vec<LogicalFactor>), VerifyError> {
    let m = plan.m();
    if m > MAX_ENUMERATED_LOGICALS {
        return Err(VerifyError::TooManyLogicals {
            m,
            max: MAX_ENUMERATED_LOGICALS,
        });
    }
    let n = plan.n();
    let mut report = VerificationReport::new(plan.code().name());
    let singles_x = upload_singles(plan, PauliLetter::X)?;
    let singles_z = upload_singles(plan, PauliLetter::Z)?;

    let mut leaks = Vec::new();
    let mut mismatches = Vec::new();
    let mut factors = Vec::new();
    for p in 0..(1usize << m) {
        for q in 0..(1usize << m) {
            let word = pauli_word(n, plan.logical_x(), plan.logical_z(), p, q)?;
            let upload_word = pauli_word(n, &singles_x, &singles_z, p, q)?;
            let residual = upload_word.inverse().multiply(&word)?;
            let leaked = plan
                .upload_qubits()
                .iter()
                .any(|&u| residual.letter_at(u) != PauliLetter::I);
            if leaked {
                leaks.push(format!("(p={p:b}, q={q:b})"));
                continue;
            }
            let gauge_factor = residual.restrict_signed(plan.gauge_qubits())?;
            let rebuilt =
                upload_word.multiply(&gauge_factor.embed(n, plan.gauge_qubits())?)?;
            if rebuilt != word {
                mismatches.push(format!("(p={p:b}, q={q:b})"));
            }
            factors.push(LogicalFactor { p, q, gauge_factor });
        }
    }
    report.push(CheckResult::exact(
        "logical_products_factor_over_upload",
        leaks.len(),
        list_violations(&leaks),
    ));
    report.push(CheckResult::exact(
        "factorization_reconstructs_products",
        mismatches.len(),
        list_violations(&mismatches),
    ));

    let mut unsigned = Vec::new();
    let mut extracted = CheckMatrix::new(plan.r());
    for factor in &factors {
        let single_x = factor.q == 0 && factor.p.count_ones() == 1;
        let single_z = factor.p == 0 && factor.q.count_ones() == 1;
        if single_x || single_z {
            if !factor.gauge_factor.is_plus_signed() {
                unsigned.push(format!(
                    "(p={:b}, q={:b}) -> {}",
                    factor.p, factor.q, factor.gauge_factor
                ));
            }
            extracted.push_row(factor.gauge_factor.check_vector()).map_err(CodeError::from)?;
        }
    }
    report.push(CheckResult::exact(
        "single_logical_factors_are_plus_signed",
        unsigned.len(),
        list_violations(&unsigned),
    ));

    let mut basin = CheckMatrix::new(plan.r());
    for row in plan.basin_rz().rows().iter().chain(plan.basin_rx().rows()) {
        basin.push_row(row.clone()).map_err(CodeError::from)?;
    }
    let rank_extracted = extracted.rank();
    let rank_basin = basin.rank();
    let mut stacked = extracted.to_bit_matrix();
    for row in basin.rows() {
        stacked.push_row(row.clone());
    }
    let rank_stacked = stacked.rank();
    let mut rank_mismatches = 0;
    if rank_stacked != rank_extracted {
        rank_mismatches += 1;
    }
    if rank_stacked != rank_basin {
        rank_mismatches += 1;
    }
    report.push(CheckResult::exact(
        "gauge_factors_generate_basin_group",
        rank_mismatches,
        format!(
            "rank extracted {rank_extracted}, recorded {rank_basin}, joint {rank_stacked}"
        ),
    ));

    Ok((report, factors))
}

/// Full symplectic battery: intra-plan commutation structure, factorization
/// over the upload register, and logical preservation.
pub fn check_plan_symplectic(
    plan: &EncoderPlan,
    ordered: bool,
) -> Result<VerificationReport, VerifyError> {
    let mut report = check_e1(plan, ordered)?;
    let (e2, _) = check_e2(plan)?;
    report.merge(e2);
    report.merge(check_e3(plan)?);
    Ok(report)
}

// ---------------------------------------------------------------------------
// Channel-level checks on the dense simulation of a plan.
// ---------------------------------------------------------------------------

/// Codewords obtained independently of the encoder: upload basis states with
/// the nominal gauge state, projected onto the code space and normalized.
#[derive(Debug, Clone)]
pub struct ReferenceEncoding<R: Scalar> {
    m: usize,
    codewords: Vec<StateVector<R>>,
}

impl<R: Scalar> ReferenceEncoding<R> {
    pub fn new(plan: &EncoderPlan) -> Result<Self, VerifyError> {
        let gauge = nominal_gauge_vector::<R>(plan.nominal_gauge())?;
        let generators: Vec<PauliOperator> = plan
            .steps()
            .iter()
            .map(|step| step.stabilizer.clone())
            .collect();
        let mut codewords = Vec::new();
        let mut first_norm: Option<R> = None;
        for index in 0..(1usize << plan.m()) {
            let upload = StateVector::basis(plan.m(), index)?;
            let full = embed_state(&upload, &gauge, plan)?;
            let projected = project_state(&full, &generators)?;
            let norm = projected.norm();
            if norm < lit::<R>(1e-9) {
                return Err(VerifyError::DegenerateCodeword { index });
            }
            match first_norm {
                None => first_norm = Some(norm),
                Some(reference) => {
                    if (norm - reference).abs() > lit::<R>(1e-9) {
                        return Err(VerifyError::UnevenCodewordNorms {
                            first: as_f64(reference),
                            found: as_f64(norm),
                        });
                    }
                }
            }
            codewords.push(
                projected
                    .normalized()
                    .expect("norm checked above"),
            );
        }
        Ok(Self {
            m: plan.m(),
            codewords,
        })
    }

    pub fn codewords(&self) -> &[StateVector<R>] {
        &self.codewords
    }

    /// ρ̄ = Σ_ij ⟨i|ρ_L|j⟩ |c_i⟩⟨c_j|.
    pub fn encode(&self, rho_l: &DensityMatrix<R>) -> Result<DensityMatrix<R>, VerifyError> {
        if rho_l.n() != self.m {
            return Err(VerifyError::Channel(ChannelError::Dimension {
                n: self.m,
                expected: 1 << self.m,
                found: rho_l.dim(),
            }));
        }
        let n = self.codewords[0].n();
        let d = 1usize << n;
        let mut out: DMatrix<Complex<R>> = DMatrix::zeros(d, d);
        for i in 0..self.codewords.len() {
            for j in 0..self.codewords.len() {
                let weight = rho_l.matrix()[(i, j)];
                if weight != Complex::new(R::zero(), R::zero()) {
                    out += self.codewords[i].amplitudes()
                        * self.codewords[j].amplitudes().adjoint()
                        * weight;
                }
            }
        }
        Ok(DensityMatrix::new(n, out)?)
    }
}

/// Pairs (W, w) of logical Pauli words: W on the physical register from the
/// plan's representatives, w the same word on a bare m-qubit register.
fn logical_word_pairs(
    plan: &EncoderPlan,
) -> Result<Vec<(usize, usize, PauliOperator, PauliOperator)>, VerifyError> {
    let m = plan.m();
    if m > MAX_ENUMERATED_LOGICALS {
        return Err(VerifyError::TooManyLogicals {
            m,
            max: MAX_ENUMERATED_LOGICALS,
        });
    }
    let bare_x: Vec<PauliOperator> = (0..m)
        .map(|i| PauliOperator::single(m, i, PauliLetter::X))
        .collect::<Result<_, _>>()?;
    let bare_z: Vec<PauliOperator> = (0..m)
        .map(|i| PauliOperator::single(m, i, PauliLetter::Z))
        .collect::<Result<_, _>>()?;
    let mut words = Vec::new();
    for p in 0..(1usize << m) {
        for q in 0..(1usize << m) {
            let big = pauli_word(plan.n(), plan.logical_x(), plan.logical_z(), p, q)?;
            let small = pauli_word(m, &bare_x, &bare_z, p, q)?;
            words.push((p, q, big, small));
        }
    }
    Ok(words)
}

/// Residuals of one encode run: worst logical expectation mismatch over all
/// 4^m Pauli words, and entrywise distance from the reference codeword state.
pub fn encoding_residuals<R: Scalar>(
    plan: &EncoderPlan,
    encoder: &ComposedEncoder,
    reference: &ReferenceEncoding<R>,
    rho_l: &DensityMatrix<R>,
    sigma: &DensityMatrix<R>,
) -> Result<(R, R), VerifyError> {
    let words = logical_word_pairs(plan)?;
    let input = embed_logical(rho_l, sigma, plan)?;
    let output = encoder.apply(&input)?;
    let mut worst = R::zero();
    for (_, _, big, small) in &words {
        let lhs = output.expectation(big)?;
        let rhs = rho_l.expectation(small)?;
        worst = worst.max((lhs - rhs).modulus());
    }
    let encoded = reference.encode(rho_l)?;
    Ok((worst, output.max_abs_diff(&encoded)))
}

fn purity_defect<R: Scalar>(rho: &DensityMatrix<R>) -> R {
    let mut sum = R::zero();
    for entry in rho.matrix().iter() {
        sum += entry.modulus_squared();
    }
    (sum - R::one()).abs()
}

fn re_trace_product<R: Scalar>(a: &DMatrix<Complex<R>>, b: &DMatrix<Complex<R>>) -> R {
    let mut sum = R::zero();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            sum += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    sum
}

/// Dense functional check of a plan: logical expectations survive encoding,
/// outputs match the independently projected reference states, pure uploads
/// land on the reference codewords with unit fidelity, and encoded states are
/// fixed points.
pub fn verify_ftde<R: Scalar>(
    plan: &EncoderPlan,
    logical_states: &[(String, DensityMatrix<R>)],
    gauge_states: &[(String, DensityMatrix<R>)],
    tol: &Tolerances<R>,
) -> Result<VerificationReport, VerifyError> {
    let mut report = VerificationReport::new(plan.code().name());
    let reference = ReferenceEncoding::<R>::new(plan)?;
    let encoder = ComposedEncoder::from_plan(plan, None)?;

    for (gauge_label, sigma) in gauge_states {
        for (logical_label, rho_l) in logical_states {
            let (identity, matched) =
                encoding_residuals(plan, &encoder, &reference, rho_l, sigma)?;
            report.push(CheckResult::numeric(
                format!("encoding_identity[{logical_label}*{gauge_label}]"),
                as_f64(identity),
                as_f64(tol.channel),
                "logical Pauli expectations preserved by the encoder",
            ));
            report.push(CheckResult::numeric(
                format!("encoding_reference[{logical_label}*{gauge_label}]"),
                as_f64(matched),
                as_f64(tol.channel),
                "encoder output equals the projected reference state",
            ));
            if purity_defect(rho_l) < lit::<R>(1e-9) {
                let input = embed_logical(rho_l, sigma, plan)?;
                let output = encoder.apply(&input)?;
                let encoded = reference.encode(rho_l)?;
                let fidelity = re_trace_product(encoded.matrix(), output.matrix());
                report.push(CheckResult::numeric(
                    format!("codeword_fidelity[{logical_label}*{gauge_label}]"),
                    as_f64((fidelity - R::one()).abs()),
                    as_f64(tol.channel),
                    "unit fidelity with the reference codeword",
                ));
            }
        }
    }

    for (logical_label, rho_l) in logical_states {
        let encoded = reference.encode(rho_l)?;
        let again = encoder.apply(&encoded)?;
        report.push(CheckResult::numeric(
            format!("reencoding_fixed_point[{logical_label}]"),
            as_f64(again.max_abs_diff(&encoded)),
            as_f64(tol.channel),
            "encoded states are fixed points of the encoder",
        ));
    }
    Ok(report)
}

/// Per-qubit factors spanning the 4^m dimensional operator space of the
/// logical register, labeled by their preparation symbols.
pub fn logical_density_basis<R: Scalar>(
    m: usize,
) -> Result<Vec<(String, DensityMatrix<R>)>, VerifyError> {
    if m > MAX_ENUMERATED_LOGICALS {
        return Err(VerifyError::TooManyLogicals {
            m,
            max: MAX_ENUMERATED_LOGICALS,
        });
    }
    let choices = [
        QubitState::Zero,
        QubitState::One,
        QubitState::Plus,
        QubitState::PlusI,
    ];
    let symbols = ['0', '1', '+', 'i'];
    let mut out = Vec::new();
    for index in 0..(4usize.pow(m as u32)) {
        let mut qubits = Vec::with_capacity(m);
        let mut label = String::new();
        let mut rest = index;
        for _ in 0..m {
            let digit = rest % 4;
            rest /= 4;
            qubits.push(choices[digit]);
            label.push(symbols[digit]);
        }
        let state = StateVector::<R>::product(&qubits)?;
        out.push((label, state.density()));
    }
    Ok(out)
}

/// Encoded logical information must survive pre-encoding noise: composing
/// the encoder with λ·N + (1−λ)·Id ahead of it reproduces the clean output
/// on a spanning set of logical inputs, for every λ in the grid.
pub fn check_noise_tolerance<R: Scalar>(
    plan: &EncoderPlan,
    noise: &KrausMap<R>,
    lambdas: &[R],
    tol: &Tolerances<R>,
) -> Result<VerificationReport, VerifyError> {
    if noise.n() != plan.n() {
        return Err(VerifyError::Channel(ChannelError::RegisterMismatch {
            left: noise.n(),
            right: plan.n(),
        }));
    }
    let encoder = ComposedEncoder::from_plan(plan, None)?;
    let sigma = nominal_gauge_vector::<R>(plan.nominal_gauge())?.density();
    let basis = logical_density_basis::<R>(plan.m())?;
    let prepared: Vec<(String, DMatrix<Complex<R>>, DMatrix<Complex<R>>)> = basis
        .iter()
        .map(|(label, rho_l)| {
            let input = embed_logical(rho_l, &sigma, plan)?;
            let clean = encoder.apply_matrix(input.matrix());
            Ok((label.clone(), input.matrix().clone(), clean))
        })
        .collect::<Result<_, VerifyError>>()?;

    let mut report = VerificationReport::new(plan.code().name());
    for &lambda in lambdas {
        let mixed = mix_with_identity(noise, lambda)?;
        let mut worst = R::zero();
        let mut worst_label = String::new();
        for (label, input, clean) in &prepared {
            let noisy = mixed.apply_matrix(input);
            let output = encoder.apply_matrix(&noisy);
            let diff = max_abs_diff(&output, clean);
            if diff > worst {
                worst = diff;
                worst_label = label.clone();
            }
        }
        report.push(CheckResult::numeric(
            format!("noise_tolerance[{}][lambda={}]", noise.label(), as_f64(lambda)),
            as_f64(worst),
            as_f64(tol.channel),
            if worst_label.is_empty() {
                "identical on all logical basis inputs".to_string()
            } else {
                format!("worst logical basis input {worst_label}")
            },
        ));
    }
    Ok(report)
}

/// The encoder must map every input into the code space: projecting its
/// output changes nothing, on seeded random mixed states.
pub fn check_range_property<R: Scalar>(
    plan: &EncoderPlan,
    num_states: usize,
    seed: u64,
    tol: &Tolerances<R>,
) -> Result<VerificationReport, VerifyError> {
    let encoder = ComposedEncoder::from_plan(plan, None)?;
    let generators: Vec<PauliOperator> = plan
        .steps()
        .iter()
        .map(|step| step.stabilizer.clone())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = R::zero();
    for trial in 0..num_states {
        let rho = random_density::<R>(plan.n(), 1 + trial % 3, &mut rng)?;
        let image = encoder.apply_matrix(rho.matrix());
        let projected = apply_code_projector(&generators, &image)?;
        worst = worst.max(max_abs_diff(&projected, &image));
    }
    let mut report = VerificationReport::new(plan.code().name());
    report.push(CheckResult::numeric(
        "range_in_code_space",
        as_f64(worst),
        as_f64(tol.channel),
        format!("{num_states} seeded random inputs, seed {seed}"),
    ));
    Ok(report)
}

fn factorial_saturating(r: usize) -> usize {
    (2..=r).fold(1usize, |f, k| f.saturating_mul(k))
}

fn all_orderings(r: usize) -> Vec<Vec<usize>> {
    fn permute(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == v.len() {
            out.push(v.clone());
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute(v, k + 1, out);
            v.swap(k, i);
        }
    }
    let mut out = Vec::new();
    permute(&mut (0..r).collect(), 0, &mut out);
    out
}

/// A plan marked order robust must realize one channel no matter how its
/// maps are ordered. When r! fits inside `num_orderings` every ordering is
/// tried, otherwise that many seeded shuffles; registers small enough for
/// full superoperators are compared exactly, larger ones on the outputs of
/// seeded random states.
pub fn check_order_robustness<R: Scalar>(
    plan: &EncoderPlan,
    num_orderings: usize,
    seed: u64,
    tol: &Tolerances<R>,
) -> Result<VerificationReport, VerifyError> {
    let r = plan.steps().len();
    let mut report = VerificationReport::new(plan.code().name());
    let baseline = ComposedEncoder::from_plan(plan, None)?;
    let exhaustive = factorial_saturating(r) <= num_orderings;
    let orderings: Vec<Vec<usize>> = if exhaustive {
        all_orderings(r)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..num_orderings)
            .map(|_| {
                let mut order: Vec<usize> = (0..r).collect();
                order.shuffle(&mut rng);
                order
            })
            .collect()
    };
    let coverage = if exhaustive {
        format!("all {} orderings", orderings.len())
    } else {
        format!("{} seeded orderings, seed {seed}", orderings.len())
    };

    if plan.n() <= MAX_SUPEROP_QUBITS {
        let reference = baseline.superoperator::<R>()?;
        let mut worst = R::zero();
        for order in &orderings {
            let permuted =
                ComposedEncoder::from_plan(plan, Some(order))?.superoperator::<R>()?;
            worst = worst.max(max_abs_diff(reference.matrix(), permuted.matrix()));
        }
        report.push(CheckResult::numeric(
            "order_robustness_superoperator",
            as_f64(worst),
            as_f64(tol.equality),
            coverage,
        ));
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let probes: Vec<DensityMatrix<R>> = (0..3)
            .map(|k| random_density::<R>(plan.n(), 1 + k % 3, &mut rng))
            .collect::<Result<_, _>>()?;
        let references: Vec<DMatrix<Complex<R>>> = probes
            .iter()
            .map(|p| baseline.apply_matrix(p.matrix()))
            .collect();
        let mut worst = R::zero();
        for order in &orderings {
            let permuted = ComposedEncoder::from_plan(plan, Some(order))?;
            for (probe, reference) in probes.iter().zip(&references) {
                worst =
                    worst.max(max_abs_diff(&permuted.apply_matrix(probe.matrix()), reference));
            }
        }
        report.push(CheckResult::numeric(
            "order_robustness_dense",
            as_f64(worst),
            as_f64(tol.channel),
            format!("{coverage}, {} random states", probes.len()),
        ));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Initializations: logical-times-gauge subsystem pictures of the register.
// ---------------------------------------------------------------------------

/// An isometry V: H_L ⊗ H_F → (C²)^⊗n together with a full-rank state on the
/// gauge factor. Initializing ρ means preparing V (ρ ⊗ τ) V†.
#[derive(Debug, Clone)]
pub struct SubsystemDecomposition<R: Scalar> {
    n: usize,
    logical_dim: usize,
    gauge_dim: usize,
    isometry: DMatrix<Complex<R>>,
    cofactor: DMatrix<Complex<R>>,
}

/// Cutoff below which a cofactor eigenvalue counts as a rank deficiency.
pub const COFACTOR_RANK_CUTOFF: f64 = 1e-12;

fn hermitian_defect<R: Scalar>(m: &DMatrix<Complex<R>>) -> R {
    let mut worst = R::zero();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conjugate()).modulus());
        }
    }
    worst
}

impl<R: Scalar> SubsystemDecomposition<R> {
    pub fn new(
        n: usize,
        logical_dim: usize,
        gauge_dim: usize,
        isometry: DMatrix<Complex<R>>,
        cofactor: DMatrix<Complex<R>>,
    ) -> Result<Self, VerifyError> {
        let d = 1usize << n;
        if isometry.nrows() != d
            || isometry.ncols() != logical_dim * gauge_dim
            || cofactor.nrows() != gauge_dim
            || cofactor.ncols() != gauge_dim
        {
            return Err(VerifyError::DecompositionShape {
                n,
                logical_dim,
                gauge_dim,
                rows: isometry.nrows(),
                cols: isometry.ncols(),
            });
        }
        let gram = isometry.adjoint() * &isometry;
        let eye: DMatrix<Complex<R>> =
            DMatrix::identity(logical_dim * gauge_dim, logical_dim * gauge_dim);
        let residual = max_abs_diff(&gram, &eye);
        if residual > lit::<R>(1e-12) {
            return Err(VerifyError::NotIsometry {
                residual: as_f64(residual),
            });
        }
        let herm = hermitian_defect(&cofactor);
        if herm > lit::<R>(1e-12) {
            return Err(VerifyError::InvalidCofactor {
                reason: format!("not Hermitian (defect {})", as_f64(herm)),
            });
        }
        let trace: R = (0..gauge_dim).map(|i| cofactor[(i, i)].re).fold(R::zero(), |a, b| a + b);
        if (trace - R::one()).abs() > lit::<R>(1e-9) {
            return Err(VerifyError::InvalidCofactor {
                reason: format!("trace {} differs from one", as_f64(trace)),
            });
        }
        let eigen = cofactor.clone().symmetric_eigen();
        for value in eigen.eigenvalues.iter() {
            if *value < lit::<R>(COFACTOR_RANK_CUTOFF) {
                return Err(VerifyError::RankDeficientCofactor {
                    eigenvalue: as_f64(*value),
                    cutoff: COFACTOR_RANK_CUTOFF,
                });
            }
        }
        Ok(Self {
            n,
            logical_dim,
            gauge_dim,
            isometry,
            cofactor,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn logical_dim(&self) -> usize {
        self.logical_dim
    }

    pub fn gauge_dim(&self) -> usize {
        self.gauge_dim
    }

    pub fn isometry(&self) -> &DMatrix<Complex<R>> {
        &self.isometry
    }

    pub fn cofactor(&self) -> &DMatrix<Complex<R>> {
        &self.cofactor
    }

    /// V (ρ ⊗ τ) V† on the physical register.
    pub fn initialize(&self, rho_l: &DMatrix<Complex<R>>) -> Result<DMatrix<Complex<R>>, VerifyError> {
        if rho_l.nrows() != self.logical_dim || rho_l.ncols() != self.logical_dim {
            return Err(VerifyError::MismatchedDecompositions {
                reason: format!(
                    "logical input is {}x{}, decomposition expects {}",
                    rho_l.nrows(),
                    rho_l.ncols(),
                    self.logical_dim
                ),
            });
        }
        let product = rho_l.kronecker(&self.cofactor);
        Ok(&self.isometry * product * self.isometry.adjoint())
    }

    /// V† M V: the physical operator pulled back to L ⊗ F coordinates.
    pub fn internal(&self, m: &DMatrix<Complex<R>>) -> DMatrix<Complex<R>> {
        self.isometry.adjoint() * m * &self.isometry
    }

    /// V V†: projector onto the decomposed subspace.
    pub fn support_projector(&self) -> DMatrix<Complex<R>> {
        &self.isometry * self.isometry.adjoint()
    }
}

/// Result of a compatibility check, with the extracted gauge cofactors of
/// each initialization seen in the other's frame.
pub struct CompatibilityOutcome<R: Scalar> {
    pub report: VerificationReport,
    /// States of the first initialization, restricted to the second frame,
    /// factor with this (possibly subnormalized) gauge state.
    pub cofactor_in_second: DMatrix<Complex<R>>,
    pub cofactor_in_first: DMatrix<Complex<R>>,
}

fn directional_cofactor<R: Scalar>(
    from: &SubsystemDecomposition<R>,
    to: &SubsystemDecomposition<R>,
    basis: &[(String, DensityMatrix<R>)],
) -> Result<(R, String, DMatrix<Complex<R>>), VerifyError> {
    let f = to.gauge_dim();
    let mut tau: Option<DMatrix<Complex<R>>> = None;
    let mut worst = R::zero();
    let mut worst_label = String::new();
    for (index, (label, rho_l)) in basis.iter().enumerate() {
        let physical = from.initialize(rho_l.matrix())?;
        let internal = to.internal(&physical);
        if index == 0 {
            tau = Some(internal.view((0, 0), (f, f)).into_owned());
        }
        let expected = rho_l.matrix().kronecker(tau.as_ref().expect("set on first state"));
        let diff = max_abs_diff(&internal, &expected);
        if diff > worst {
            worst = diff;
            worst_label = label.clone();
        }
    }
    Ok((worst, worst_label, tau.expect("basis is nonempty")))
}

/// Two initializations are compatible when each one's prepared states,
/// restricted to the other's subsystem picture, factor as the same logical
/// state times one fixed gauge state. The extraction uses the all-zero
/// computational state and is then enforced across a spanning basis.
pub fn check_compatibility<R: Scalar>(
    first: &SubsystemDecomposition<R>,
    second: &SubsystemDecomposition<R>,
    tol: &Tolerances<R>,
) -> Result<CompatibilityOutcome<R>, VerifyError> {
    if first.n() != second.n() {
        return Err(VerifyError::MismatchedDecompositions {
            reason: format!("physical registers differ: {} vs {} qubits", first.n(), second.n()),
        });
    }
    if first.logical_dim() != second.logical_dim() {
        return Err(VerifyError::MismatchedDecompositions {
            reason: format!(
                "logical dimensions differ: {} vs {}",
                first.logical_dim(),
                second.logical_dim()
            ),
        });
    }
    let m = first.logical_dim().trailing_zeros() as usize;
    if 1usize << m != first.logical_dim() {
        return Err(VerifyError::MismatchedDecompositions {
            reason: format!("logical dimension {} is not a power of two", first.logical_dim()),
        });
    }
    let basis = logical_density_basis::<R>(m)?;

    let mut report = VerificationReport::new("compatibility");
    let (forward, forward_label, tau_in_second) =
        directional_cofactor(first, second, &basis)?;
    report.push(CheckResult::numeric(
        "initializations_factor[first_in_second]",
        as_f64(forward),
        as_f64(tol.channel),
        if forward_label.is_empty() {
            "factorization exact".to_string()
        } else {
            format!("worst logical basis input {forward_label}")
        },
    ));
    let (backward, backward_label, tau_in_first) =
        directional_cofactor(second, first, &basis)?;
    report.push(CheckResult::numeric(
        "initializations_factor[second_in_first]",
        as_f64(backward),
        as_f64(tol.channel),
        if backward_label.is_empty() {
            "factorization exact".to_string()
        } else {
            format!("worst logical basis input {backward_label}")
        },
    ));
    Ok(CompatibilityOutcome {
        report,
        cofactor_in_second: tau_in_second,
        cofactor_in_first: tau_in_first,
    })
}

/// Channel that rebuilds the gauge factor of a decomposition: inside the
/// decomposed subspace it resets the gauge state to `target` while acting as
/// the identity on the logical factor, and it leaves the complement alone.
/// Kraus set {V (I_L ⊗ √μ_j |f_j⟩⟨k|) V†} ∪ {I − V V†}.
pub fn construct_tolerant_encoder<R: Scalar>(
    decomposition: &SubsystemDecomposition<R>,
    target: &DMatrix<Complex<R>>,
    tol: &Tolerances<R>,
) -> Result<KrausMap<R>, VerifyError> {
    let f = decomposition.gauge_dim();
    if target.nrows() != f || target.ncols() != f {
        return Err(VerifyError::InvalidCofactor {
            reason: format!("target is {}x{}, gauge factor has dimension {f}", target.nrows(), target.ncols()),
        });
    }
    let herm = hermitian_defect(target);
    if herm > lit::<R>(1e-12) {
        return Err(VerifyError::InvalidCofactor {
            reason: format!("target not Hermitian (defect {})", as_f64(herm)),
        });
    }
    let trace: R = (0..f).map(|i| target[(i, i)].re).fold(R::zero(), |a, b| a + b);
    if (trace - R::one()).abs() > lit::<R>(1e-9) {
        return Err(VerifyError::InvalidCofactor {
            reason: format!("target trace {} differs from one", as_f64(trace)),
        });
    }

    let eigen = target.clone().symmetric_eigen();
    let v = decomposition.isometry();
    let d = v.nrows();
    let logical_dim = decomposition.logical_dim();
    let eye_l: DMatrix<Complex<R>> = DMatrix::identity(logical_dim, logical_dim);
    let mut kraus: Vec<DMatrix<Complex<R>>> = Vec::new();
    for j in 0..f {
        let mu = eigen.eigenvalues[j];
        if mu < -lit::<R>(1e-10) {
            return Err(VerifyError::InvalidCofactor {
                reason: format!("target eigenvalue {} is negative", as_f64(mu)),
            });
        }
        if mu <= lit::<R>(1e-14) {
            continue;
        }
        let root = Complex::new(mu.sqrt(), R::zero());
        let mode = eigen.eigenvectors.column(j).into_owned();
        for k in 0..f {
            let mut reset: DMatrix<Complex<R>> = DMatrix::zeros(f, f);
            for row in 0..f {
                reset[(row, k)] = mode[row] * root;
            }
            kraus.push(v * eye_l.kronecker(&reset) * v.adjoint());
        }
    }
    let projector_out: DMatrix<Complex<R>> = DMatrix::identity(d, d) - v * v.adjoint();
    kraus.push(projector_out);

    let map = KrausMap::new(
        decomposition.n(),
        kraus,
        "gauge reset encoder",
    )?;
    let residual = map.trace_preservation_residual();
    if residual > tol.cptp {
        return Err(VerifyError::NotTracePreserving {
            residual: as_f64(residual),
        });
    }
    Ok(map)
}

/// Version tag written into serialized reports.
pub const ARTIFACT_VERSION: &str = "1";

/// One named check with a numeric residual. `residual` is 0.0 for exact
/// GF(2) checks that pass and a violation count when they fail; for numeric
/// checks it is the measured deviation compared against a pinned tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
    pub details: String,
}

impl CheckResult {
    /// An exact check: passes iff `violations == 0`.
    pub fn exact(name: impl Into<String>, violations: usize, details: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass: violations == 0,
            residual: violations as f64,
            details: details.into(),
        }
    }

    /// A numeric check: passes iff `residual <= tolerance`.
    pub fn numeric(
        name: impl Into<String>,
        residual: f64,
        tolerance: f64,
        details: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            pass: residual.is_finite() && residual <= tolerance,
            residual,
            details: details.into(),
        }
    }
}

/// A collection of check results for one artifact. `overall` is the
/// conjunction of the individual checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub artifact_version: String,
    pub code_name: String,
    pub checks: Vec<CheckResult>,
    pub overall: bool,
}

impl VerificationReport {
    pub fn new(code_name: impl Into<String>) -> Self {
        Self {
            artifact_version: ARTIFACT_VERSION.to_string(),
            code_name: code_name.into(),
            checks: Vec::new(),
            overall: true,
        }
    }

    pub fn push(&mut self, check: CheckResult) {
        self.overall &= check.pass;
        self.checks.push(check);
    }

    pub fn merge(&mut self, other: VerificationReport) {
        for check in other.checks {
            self.push(check);
        }
    }

    pub fn overall(&self) -> bool {
        self.overall
    }

    pub fn checks(&self) -> &[CheckResult] {
        &self.checks
    }

    pub fn failing_names(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn failure_summary(&self) -> String {
        let parts: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{}: {}", c.name, c.details))
            .collect();
        if parts.is_empty() {
            "all checks passed".to_string()
        } else {
            parts.join("; ")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::pauli_unitary_map;
    use crate::code::synthesize_plan;
    use crate::codes::{builtin, BUILTIN_NAMES};
    use crate::pauli::pauli_from_string;

    fn p(s: &str) -> PauliOperator {
        pauli_from_string(s).unwrap()
    }

    #[test]
    fn overall_is_conjunction() {
        let mut report = VerificationReport::new("demo");
        assert!(report.overall());
        report.push(CheckResult::exact("a", 0, "fine"));
        assert!(report.overall());
        report.push(CheckResult::numeric("b", 1e-3, 1e-6, "too big"));
        assert!(!report.overall());
        assert_eq!(report.failing_names(), vec!["b"]);
    }

    #[test]
    fn numeric_check_rejects_nan() {
        let check = CheckResult::numeric("nan", f64::NAN, 1.0, "propagated");
        assert!(!check.pass);
    }

    #[test]
    fn order_robustness_enumerates_small_plans_and_samples_large_ones() {
        let tol = Tolerances::<f64>::default();
        let plan = synthesize_plan(&builtin("repetition3").unwrap().code).unwrap();
        let report = check_order_robustness(&plan, 24, 5, &tol).unwrap();
        assert!(report.overall(), "{report:?}");
        assert!(report.checks()[0].details.starts_with("all 2 orderings"));

        let plan = synthesize_plan(&builtin("steane7").unwrap().code).unwrap();
        let report = check_order_robustness(&plan, 6, 5, &tol).unwrap();
        assert!(report.overall(), "{report:?}");
        assert_eq!(report.checks()[0].name, "order_robustness_dense");
    }

    #[test]
    fn symplectic_battery_passes_for_synthesized_plans() {
        for name in BUILTIN_NAMES {
            let plan = synthesize_plan(&builtin(name).unwrap().code).unwrap();
            let report = check_plan_symplectic(&plan, true).unwrap();
            assert!(report.overall(), "{name}: {}", report.failure_summary());
            if plan.order_robust() {
                assert!(check_e1(&plan, false).unwrap().overall());
            }
        }
    }

    #[test]
    fn e1_detects_swapped_corrections() {
        let plan = synthesize_plan(&builtin("repetition3").unwrap().code).unwrap();
        let mut steps = plan.steps().to_vec();
        let tmp = steps[0].correction.clone();
        steps[0].correction = steps[1].correction.clone();
        steps[1].correction = tmp;
        let tampered = EncoderPlan::from_parts(
            plan.code().clone(),
            steps,
            plan.logical_x().to_vec(),
            plan.logical_z().to_vec(),
            plan.upload_qubits().to_vec(),
            plan.gauge_qubits().to_vec(),
            plan.basin_rz().clone(),
            plan.basin_rx().clone(),
            plan.nominal_gauge().clone(),
            false,
        )
        .unwrap();
        let report = check_e1(&tampered, true).unwrap();
        assert!(!report.overall());
        assert!(report
            .failing_names()
            .contains(&"correction_flips_own_stabilizer"));
    }

    #[test]
    fn e2_extracts_basin_generators_from_logicals() {
        let plan = synthesize_plan(&builtin("shor9").unwrap().code).unwrap();
        let (report, factors) = check_e2(&plan).unwrap();
        assert!(report.overall(), "{}", report.failure_summary());
        let x_factor = factors
            .iter()
            .find(|f| f.p == 1 && f.q == 0)
            .unwrap();
        let z_factor = factors
            .iter()
            .find(|f| f.p == 0 && f.q == 1)
            .unwrap();
        assert_eq!(x_factor.gauge_factor, plan.basin_rx().pauli(0));
        assert_eq!(z_factor.gauge_factor, plan.basin_rz().pauli(0));
    }

    #[test]
    fn e3_detects_a_correction_that_moves_logicals() {
        let plan = synthesize_plan(&builtin("repetition3").unwrap().code).unwrap();
        let mut steps = plan.steps().to_vec();
        steps[1].correction = p("IIY");
        let tampered = EncoderPlan::from_parts(
            plan.code().clone(),
            steps,
            plan.logical_x().to_vec(),
            plan.logical_z().to_vec(),
            plan.upload_qubits().to_vec(),
            plan.gauge_qubits().to_vec(),
            plan.basin_rz().clone(),
            plan.basin_rx().clone(),
            plan.nominal_gauge().clone(),
            false,
        )
        .unwrap();
        assert!(check_e1(&tampered, true).unwrap().overall());
        let report = check_e3(&tampered).unwrap();
        assert!(!report.overall());
    }

    #[test]
    fn ftde_battery_passes_on_repetition() {
        let plan = synthesize_plan(&builtin("repetition3").unwrap().code).unwrap();
        let logical = logical_density_basis::<f64>(1).unwrap();
        let gauge = vec![(
            "nominal".to_string(),
            nominal_gauge_vector::<f64>(plan.nominal_gauge())
                .unwrap()
                .density(),
        )];
        let report = verify_ftde(&plan, &logical, &gauge, &Tolerances::default()).unwrap();
        assert!(report.overall(), "{}", report.failure_summary());
        assert!(report
            .checks()
            .iter()
            .any(|c| c.name.starts_with("encoding_identity[")));
        assert!(report
            .checks()
            .iter()
            .any(|c| c.name.starts_with("codeword_fidelity[")));
    }

    #[test]
    fn logical_density_basis_enumerates_products() {
        let basis = logical_density_basis::<f64>(2).unwrap();
        assert_eq!(basis.len(), 16);
        assert_eq!(basis[0].0, "00");
        assert!(basis.iter().any(|(label, _)| label == "+i"));
    }

    #[test]
    fn stabilizer_noise_is_tolerated_and_upload_noise_is_not() {
        let plan = synthesize_plan(&builtin("repetition3").unwrap().code).unwrap();
        let lambdas = [0.0, 0.25, 0.5, 0.75, 1.0];
        let tol = Tolerances::default();

        let stabilizer_noise = pauli_unitary_map::<f64>(&p("ZZI")).unwrap();
        let report = check_noise_tolerance(&plan, &stabilizer_noise, &lambdas, &tol).unwrap();
        assert!(report.overall(), "{}", report.failure_summary());

        let upload_noise = pauli_unitary_map::<f64>(&p("XII")).unwrap();
        let report = check_noise_tolerance(&plan, &upload_noise, &lambdas, &tol).unwrap();
        assert!(!report.overall());
        assert!(report.checks()[0].pass, "lambda = 0 leaves the input clean");
        assert!(!report.checks()[2].pass);
    }

    #[test]
    fn range_property_holds_for_repetition() {
        let plan = synthesize_plan(&builtin("repetition3").unwrap().code).unwrap();
        let report =
            check_range_property::<f64>(&plan, 25, 7, &Tolerances::default()).unwrap();
        assert!(report.overall(), "{}", report.failure_summary());
    }

    #[test]
    fn decomposition_rejects_rank_deficient_cofactor() {
        let eye = DMatrix::<Complex<f64>>::identity(2, 2);
        let mut pure = DMatrix::<Complex<f64>>::zeros(2, 2);
        pure[(0, 0)] = Complex::new(1.0, 0.0);
        let err = SubsystemDecomposition::new(1, 1, 2, eye.clone(), pure).unwrap_err();
        assert!(matches!(err, VerifyError::RankDeficientCofactor { .. }));
        let mixed = eye.clone() * Complex::new(0.5, 0.0);
        assert!(SubsystemDecomposition::new(1, 1, 2, eye, mixed).is_ok());
    }

    #[test]
    fn identical_pictures_are_compatible() {
        let eye = DMatrix::<Complex<f64>>::identity(2, 2);
        let one = DMatrix::<Complex<f64>>::identity(1, 1);
        let d = SubsystemDecomposition::new(1, 2, 1, eye, one.clone()).unwrap();
        let outcome = check_compatibility(&d, &d, &Tolerances::default()).unwrap();
        assert!(outcome.report.overall(), "{}", outcome.report.failure_summary());
        assert!((outcome.cofactor_in_second[(0, 0)].re - 1.0).abs() < 1e-12);

        let encoder = construct_tolerant_encoder(&d, &one, &Tolerances::default()).unwrap();
        let plus = StateVector::<f64>::product(&[QubitState::Plus]).unwrap().density();
        let out = encoder.apply(&plus).unwrap();
        assert!(out.max_abs_diff(&plus) < 1e-12);
    }
}
