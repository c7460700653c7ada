//! Stabilizer-code model and encoder synthesis: standard form of the check
//! matrix, logical operators, correction operators, and basin generators.
//!
//! Row operations on generators are performed as phase-tracked Pauli
//! multiplications, never as plain bit XOR. Products of +1-signed commuting
//! generators can pick up −1 signs (XX · YY = −ZZ), and the sign is part of
//! the group element: projecting onto the +1 eigenspace of the wrong sign
//! would change the code space.

use thiserror::Error;

use crate::gf2::{BitMatrix, BitVec, Gf2Error};
use crate::pauli::{
    solve_symplectic, symplectic_product, CheckMatrix, PauliError, PauliOperator,
};
use crate::verify::{CheckResult, VerificationReport};

/// Errors from code construction and encoder synthesis.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("generator {index} acts on {found} qubits, expected {expected}")]
    GeneratorLength {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("code rejected: {0}")]
    FailedValidation(String),
    #[error("standard form internal structure violated: {0}")]
    StructureViolation(String),
    #[error("logical-operator synthesis produced an inconsistent set: {0}")]
    LogicalSynthesis(String),
    #[error("correction-operator synthesis failed: {0}")]
    CorrectionSynthesis(String),
    #[error(transparent)]
    Solve(#[from] Gf2Error),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// A stabilizer code: `r` generators on `n` qubits, with optional distance
/// metadata. Construction checks only shapes; algebraic requirements
/// (commutation, independence, +1 signs) are checked by [`validate_code`].
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerCode {
    name: String,
    n: usize,
    generators: Vec<PauliOperator>,
    distance: Option<usize>,
}

impl StabilizerCode {
    pub fn new(
        name: impl Into<String>,
        n: usize,
        generators: Vec<PauliOperator>,
    ) -> Result<Self, CodeError> {
        for (index, g) in generators.iter().enumerate() {
            if g.n() != n {
                return Err(CodeError::GeneratorLength {
                    index,
                    expected: n,
                    found: g.n(),
                });
            }
        }
        Ok(Self {
            name: name.into(),
            n,
            generators,
            distance: None,
        })
    }

    pub fn with_distance(mut self, distance: usize) -> Self {
        self.distance = Some(distance);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stabilizer generators.
    pub fn r(&self) -> usize {
        self.generators.len()
    }

    /// Number of logical qubits, n − r.
    pub fn m(&self) -> usize {
        self.n - self.generators.len()
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    pub fn distance(&self) -> Option<usize> {
        self.distance
    }

    pub fn check_matrix(&self) -> CheckMatrix {
        CheckMatrix::from_paulis(self.n, &self.generators).expect("lengths checked at construction")
    }

    /// Do the letters of `p` lie in the row span of the check matrix?
    /// Signs are ignored; see [`equivalent_mod_stabilizer`].
    pub fn contains_letters(&self, p: &PauliOperator) -> bool {
        p.n() == self.n
            && crate::gf2::in_row_span(&self.check_matrix().to_bit_matrix(), &p.check_vector())
    }
}

/// Are two operators equal up to multiplication by a stabilizer-group
/// element? Phases are deliberately ignored: replacing C by C·S_k rescales
/// one Kraus operator by a unimodular factor and leaves the channel intact.
pub fn equivalent_mod_stabilizer(
    a: &PauliOperator,
    b: &PauliOperator,
    code: &StabilizerCode,
) -> Result<bool, CodeError> {
    let diff = a.multiply(&b.inverse())?;
    Ok(code.contains_letters(&diff))
}

/// Validate the stabilizer-code invariants, reporting every failure rather
/// than stopping at the first.
pub fn validate_code(code: &StabilizerCode) -> VerificationReport {
    let mut report = VerificationReport::new(code.name());

    let mut bad_signs = Vec::new();
    for (i, g) in code.generators.iter().enumerate() {
        if !g.is_plus_signed() {
            bad_signs.push(format!("generator {i} = {g}"));
        } else if g.is_identity_letters() {
            bad_signs.push(format!("generator {i} is the identity"));
        }
    }
    report.push(CheckResult::exact(
        "generator_signs",
        bad_signs.len(),
        if bad_signs.is_empty() {
            "all generators are +1-signed non-identity Pauli products".to_string()
        } else {
            format!("not +1-signed Pauli products: {}", bad_signs.join("; "))
        },
    ));

    let mut anticommuting = Vec::new();
    for i in 0..code.r() {
        for j in (i + 1)..code.r() {
            let commute = code.generators[i]
                .commutes_with(&code.generators[j])
                .expect("equal qubit counts by construction");
            if !commute {
                anticommuting.push(format!("({i}, {j})"));
            }
        }
    }
    report.push(CheckResult::exact(
        "pairwise_commutation",
        anticommuting.len(),
        if anticommuting.is_empty() {
            format!("all {} generator pairs commute", code.r() * code.r().saturating_sub(1) / 2)
        } else {
            format!("anticommuting generator pairs: {}", anticommuting.join(", "))
        },
    ));

    let rank = code.check_matrix().rank();
    report.push(CheckResult::exact(
        "independence",
        code.r() - rank,
        format!("check-matrix rank {rank} of {} generators", code.r()),
    ));

    report
}

/// The standard block form of a code's check matrix, together with the qubit
/// permutation that produces it and the phase-tracked transformed generators.
///
/// Column blocks are (m | r−s | s) on each side. The transformed generators
/// are stored on the original qubit labels and may carry −1 signs.
#[derive(Debug, Clone)]
pub struct StandardForm {
    source: StabilizerCode,
    /// `permutation[new_position] = original_qubit`.
    permutation: Vec<usize>,
    s: usize,
    a1: BitMatrix,
    a2: BitMatrix,
    b: BitMatrix,
    c: BitMatrix,
    d: BitMatrix,
    e: BitMatrix,
    transformed: Vec<PauliOperator>,
}

impl StandardForm {
    pub fn source(&self) -> &StabilizerCode {
        &self.source
    }

    pub fn n(&self) -> usize {
        self.source.n()
    }

    pub fn r(&self) -> usize {
        self.source.r()
    }

    pub fn m(&self) -> usize {
        self.source.m()
    }

    /// Rank of the X block: number of generator rows with X content.
    pub fn s(&self) -> usize {
        self.s
    }

    /// `permutation()[new_position] = original_qubit`. Upload qubits occupy
    /// positions 0..m, then the r−s middle columns, then the s right columns.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Original labels of the m upload qubits, in permuted order.
    pub fn upload_qubits(&self) -> &[usize] {
        &self.permutation[..self.m()]
    }

    /// Original labels of the r gauge qubits, in permuted order
    /// (middle block first, then the right block).
    pub fn gauge_qubits(&self) -> &[usize] {
        &self.permutation[self.m()..]
    }

    pub fn a1(&self) -> &BitMatrix {
        &self.a1
    }

    pub fn a2(&self) -> &BitMatrix {
        &self.a2
    }

    pub fn b(&self) -> &BitMatrix {
        &self.b
    }

    pub fn c(&self) -> &BitMatrix {
        &self.c
    }

    pub fn d(&self) -> &BitMatrix {
        &self.d
    }

    pub fn e(&self) -> &BitMatrix {
        &self.e
    }

    /// Transformed generators on original qubit labels: the same group as
    /// the source generators, row-reduced, possibly −1-signed.
    pub fn transformed_generators(&self) -> &[PauliOperator] {
        &self.transformed
    }

    /// Check matrix re-assembled from the blocks in permuted column order;
    /// used by round-trip tests.
    pub fn assembled_check_matrix(&self) -> CheckMatrix {
        let (m, r, s) = (self.m(), self.r(), self.s);
        let n = self.n();
        let mut rows = Vec::with_capacity(r);
        for i in 0..s {
            let mut row = BitVec::zeros(2 * n);
            for j in 0..m {
                row.set(j, self.a1.get(i, j));
                row.set(n + j, self.b.get(i, j));
            }
            for j in 0..(r - s) {
                row.set(m + j, self.a2.get(i, j));
            }
            for j in 0..s {
                if j == i {
                    row.set(m + (r - s) + j, true);
                }
                row.set(n + m + (r - s) + j, self.c.get(i, j));
            }
            rows.push(row);
        }
        for i in 0..(r - s) {
            let mut row = BitVec::zeros(2 * n);
            for j in 0..m {
                row.set(n + j, self.d.get(i, j));
            }
            for j in 0..(r - s) {
                if j == i {
                    row.set(n + m + j, true);
                }
            }
            for j in 0..s {
                row.set(n + m + (r - s) + j, self.e.get(i, j));
            }
            rows.push(row);
        }
        CheckMatrix::from_rows(n, rows).expect("assembled rows have length 2n")
    }
}

fn ensure_valid(code: &StabilizerCode) -> Result<(), CodeError> {
    let report = validate_code(code);
    if report.overall() {
        Ok(())
    } else {
        Err(CodeError::FailedValidation(report.failure_summary()))
    }
}

/// Bring the check matrix to standard form by phase-tracked row operations
/// and a deterministic qubit permutation (lowest-index pivots; non-pivot
/// columns become upload qubits in ascending order).
pub fn standard_form(code: &StabilizerCode) -> Result<StandardForm, CodeError> {
    ensure_valid(code)?;
    let n = code.n();
    let r = code.r();
    let mut rows: Vec<PauliOperator> = code.generators.to_vec();

    // Pass 1: reduced echelon form of the X block over all rows. Columns are
    // scanned from the high end so that pivots land on the trailing qubits
    // and the low-index qubits survive as upload qubits.
    let mut pivots_x = Vec::new();
    let mut next = 0;
    for col in (0..n).rev() {
        let Some(p) = (next..r).find(|&i| rows[i].x_bits().get(col)) else {
            continue;
        };
        rows.swap(next, p);
        for i in 0..r {
            if i != next && rows[i].x_bits().get(col) {
                rows[i] = rows[i].multiply(&rows[next])?;
            }
        }
        pivots_x.push(col);
        next += 1;
        if next == r {
            break;
        }
    }
    let s = pivots_x.len();

    // Pass 2: the remaining rows are pure-Z; reduce their Z block over the
    // columns not already holding X pivots, again from the high end.
    let mut pivots_z = Vec::new();
    let mut next = s;
    for col in (0..n).rev().filter(|c| !pivots_x.contains(c)) {
        let Some(p) = (next..r).find(|&i| rows[i].z_bits().get(col)) else {
            continue;
        };
        rows.swap(next, p);
        for i in 0..r {
            if i != next && rows[i].z_bits().get(col) {
                rows[i] = rows[i].multiply(&rows[next])?;
            }
        }
        pivots_z.push(col);
        next += 1;
        if next == r {
            break;
        }
    }
    if pivots_z.len() != r - s {
        return Err(CodeError::StructureViolation(format!(
            "Z block rank {} over non-pivot columns, expected {}",
            pivots_z.len(),
            r - s
        )));
    }

    // Pivots were collected in descending column order; flip rows and pivot
    // lists so each identity sub-block runs ascending along its columns.
    pivots_x.reverse();
    pivots_z.reverse();
    rows[..s].reverse();
    rows[s..].reverse();

    let upload: Vec<usize> = (0..n)
        .filter(|c| !pivots_x.contains(c) && !pivots_z.contains(c))
        .collect();
    let m = code.m();
    debug_assert_eq!(upload.len(), m);
    let permutation: Vec<usize> = upload
        .iter()
        .chain(pivots_z.iter())
        .chain(pivots_x.iter())
        .copied()
        .collect();

    // Extract blocks, reading each row in permuted column order.
    let mut a1 = BitMatrix::zeros(s, m);
    let mut a2 = BitMatrix::zeros(s, r - s);
    let mut b = BitMatrix::zeros(s, m);
    let mut c = BitMatrix::zeros(s, s);
    let mut d = BitMatrix::zeros(r - s, m);
    let mut e = BitMatrix::zeros(r - s, s);
    for i in 0..s {
        let row = &rows[i];
        for (j, &col) in upload.iter().enumerate() {
            if row.x_bits().get(col) {
                a1.set(i, j, true);
            }
            if row.z_bits().get(col) {
                b.set(i, j, true);
            }
        }
        for (j, &col) in pivots_z.iter().enumerate() {
            if row.x_bits().get(col) {
                a2.set(i, j, true);
            }
            if row.z_bits().get(col) {
                return Err(CodeError::StructureViolation(format!(
                    "row {i} keeps Z support on middle column {j} after reduction"
                )));
            }
        }
        for (j, &col) in pivots_x.iter().enumerate() {
            if row.x_bits().get(col) != (i == j) {
                return Err(CodeError::StructureViolation(format!(
                    "X block of row {i} is not the identity at column {j}"
                )));
            }
            if row.z_bits().get(col) {
                c.set(i, j, true);
            }
        }
    }
    for i in 0..(r - s) {
        let row = &rows[s + i];
        if !row.x_bits().is_zero() {
            return Err(CodeError::StructureViolation(format!(
                "row {} keeps X support after X-block reduction",
                s + i
            )));
        }
        for (j, &col) in upload.iter().enumerate() {
            if row.z_bits().get(col) {
                d.set(i, j, true);
            }
        }
        for (j, &col) in pivots_z.iter().enumerate() {
            if row.z_bits().get(col) != (i == j) {
                return Err(CodeError::StructureViolation(format!(
                    "Z block of row {} is not the identity at column {j}",
                    s + i
                )));
            }
        }
        for (j, &col) in pivots_x.iter().enumerate() {
            if row.z_bits().get(col) {
                e.set(i, j, true);
            }
        }
    }

    Ok(StandardForm {
        source: code.clone(),
        permutation,
        s,
        a1,
        a2,
        b,
        c,
        d,
        e,
        transformed: rows,
    })
}

/// Logical operators from the standard-form blocks: Z-type rows
/// `[0 0 0 | I 0 A1ᵀ]` and X-type rows `[I Dᵀ 0 | 0 0 Bᵀ]`, mapped back to
/// original qubit labels. Returns (logical_X, logical_Z).
pub fn logical_operators(
    sf: &StandardForm,
) -> Result<(Vec<PauliOperator>, Vec<PauliOperator>), CodeError> {
    let n = sf.n();
    let (m, r, s) = (sf.m(), sf.r(), sf.s);
    let mut logical_x = Vec::with_capacity(m);
    let mut logical_z = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = BitVec::zeros(n);
        let mut z = BitVec::zeros(n);
        x.set(i, true);
        for j in 0..(r - s) {
            if sf.d.get(j, i) {
                x.set(m + j, true);
            }
        }
        for j in 0..s {
            if sf.b.get(j, i) {
                z.set(n - s + j, true);
            }
        }
        let gx = PauliOperator::new(n, x, z, 0)?.relabel(&sf.permutation)?;

        let x = BitVec::zeros(n);
        let mut z = BitVec::zeros(n);
        z.set(i, true);
        for j in 0..s {
            if sf.a1.get(j, i) {
                z.set(n - s + j, true);
            }
        }
        let gz = PauliOperator::new(n, x, z, 0)?.relabel(&sf.permutation)?;
        logical_x.push(gx);
        logical_z.push(gz);
    }

    // These should be unreachable for any standard form produced above;
    // they guard the block assembly.
    for (i, g) in logical_x.iter().chain(logical_z.iter()).enumerate() {
        for (k, t) in sf.transformed.iter().enumerate() {
            if !g.commutes_with(t)? {
                return Err(CodeError::LogicalSynthesis(format!(
                    "logical {i} anticommutes with transformed generator {k}"
                )));
            }
        }
    }
    for i in 0..m {
        for j in 0..m {
            let zx = !logical_z[i].commutes_with(&logical_x[j])?;
            if zx != (i == j) {
                return Err(CodeError::LogicalSynthesis(format!(
                    "pairing failure between Z-logical {i} and X-logical {j}"
                )));
            }
            if !logical_x[i].commutes_with(&logical_x[j])?
                || !logical_z[i].commutes_with(&logical_z[j])?
            {
                return Err(CodeError::LogicalSynthesis(format!(
                    "like-type logicals {i}, {j} anticommute"
                )));
            }
        }
    }
    Ok((logical_x, logical_z))
}

/// Solve for correction operators: stack S̄ = [transformed; logical_Z;
/// logical_X] and solve S̄ Λ x_i = e_i for each generator index i. The
/// solution is the deterministic lowest-pivot one, returned as +1-signed
/// Pauli operators.
pub fn correction_operators(
    sf: &StandardForm,
    logical_x: &[PauliOperator],
    logical_z: &[PauliOperator],
) -> Result<Vec<PauliOperator>, CodeError> {
    let n = sf.n();
    let r = sf.r();
    let stacked: Vec<PauliOperator> = sf
        .transformed
        .iter()
        .chain(logical_z.iter())
        .chain(logical_x.iter())
        .cloned()
        .collect();
    let matrix = CheckMatrix::from_paulis(n, &stacked)?;
    let mut out = Vec::with_capacity(r);
    for i in 0..r {
        let e = BitVec::unit(stacked.len(), i);
        let x = solve_symplectic(&matrix, &e)
            .map_err(|err| CodeError::CorrectionSynthesis(format!("generator {i}: {err}")))?;
        out.push(PauliOperator::from_check_vector(n, &x)?);
    }
    Ok(out)
}

/// Basin generators on the r gauge qubits (middle block then right block):
/// Z-type rows `[0 0 | 0 A1ᵀ]` and X-type rows `[Dᵀ 0 | 0 Bᵀ]`.
pub fn basin_generators(sf: &StandardForm) -> Result<(CheckMatrix, CheckMatrix), CodeError> {
    let (m, r, s) = (sf.m(), sf.r(), sf.s);
    let mut rz_rows = Vec::with_capacity(m);
    let mut rx_rows = Vec::with_capacity(m);
    for i in 0..m {
        let mut rz = BitVec::zeros(2 * r);
        let mut rx = BitVec::zeros(2 * r);
        for j in 0..s {
            if sf.a1.get(j, i) {
                rz.set(r + (r - s) + j, true);
            }
            if sf.b.get(j, i) {
                rx.set(r + (r - s) + j, true);
            }
        }
        for j in 0..(r - s) {
            if sf.d.get(j, i) {
                rx.set(j, true);
            }
        }
        rz_rows.push(rz);
        rx_rows.push(rx);
    }
    let rz = CheckMatrix::from_rows(r, rz_rows)?;
    let rx = CheckMatrix::from_rows(r, rx_rows)?;

    let stacked: Vec<BitVec> = rz.rows().iter().chain(rx.rows().iter()).cloned().collect();
    for (i, u) in stacked.iter().enumerate() {
        for v in stacked.iter().skip(i + 1) {
            if symplectic_product(u, v)? {
                return Err(CodeError::StructureViolation(
                    "basin generators fail to commute pairwise".to_string(),
                ));
            }
        }
    }
    Ok((rz, rx))
}

/// Dimension of the basin of attraction and the generic lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasinDimension {
    /// Number of gauge qubits r.
    pub gauge_qubits: usize,
    /// Rank r̄ of the stacked basin generators.
    pub constraint_rank: usize,
    /// log2 of the basin dimension: r − r̄.
    pub log2_dimension: usize,
    /// Exponent of the worst-case guarantee 2^(3r − 2n); may be negative,
    /// in which case the guarantee is vacuous.
    pub worst_case_log2: i64,
}

impl BasinDimension {
    /// 2^(r − r̄) when it fits in a u128.
    pub fn dimension(&self) -> Option<u128> {
        (self.log2_dimension < 128).then(|| 1u128 << self.log2_dimension)
    }
}

/// Compute the basin dimension 2^(r − r̄) from the two generator matrices.
pub fn basin_dimension(rz: &CheckMatrix, rx: &CheckMatrix) -> BasinDimension {
    let r = rz.n();
    let m = rz.nrows();
    let n = r + m;
    let stacked = rz.to_bit_matrix().vstack(&rx.to_bit_matrix());
    let r_bar = stacked.rank();
    BasinDimension {
        gauge_qubits: r,
        constraint_rank: r_bar,
        log2_dimension: r - r_bar,
        worst_case_log2: 3 * r as i64 - 2 * n as i64,
    }
}

/// Single-qubit nominal initialization of a gauge qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeBasis {
    /// |+⟩, for the middle-block qubits.
    Plus,
    /// |0⟩, for the right-block qubits.
    Zero,
}

impl GaugeBasis {
    pub fn symbol(&self) -> char {
        match self {
            GaugeBasis::Plus => '+',
            GaugeBasis::Zero => '0',
        }
    }
}

/// Nominal gauge state: |+⟩ on the r−s middle qubits, |0⟩ on the s right
/// qubits, with free qubits flagged (those untouched by every basin
/// generator, whose state is arbitrary).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NominalGaugeState {
    pattern: Vec<GaugeBasis>,
    free: Vec<bool>,
    /// Original labels of the gauge qubits, in permuted order.
    gauge_qubits: Vec<usize>,
    /// Full qubit permutation of the standard form.
    permutation: Vec<usize>,
}

impl NominalGaugeState {
    /// Assemble directly, for hand-built plans whose gauge structure does
    /// not come from a standard form. `permutation[new_position]` is the
    /// original qubit label; upload positions come first.
    pub fn from_parts(
        pattern: Vec<GaugeBasis>,
        free: Vec<bool>,
        gauge_qubits: Vec<usize>,
        permutation: Vec<usize>,
    ) -> Result<Self, CodeError> {
        if free.len() != pattern.len() || gauge_qubits.len() != pattern.len() {
            return Err(CodeError::FailedValidation(
                "gauge pattern, free flags and qubit list must have equal lengths".to_string(),
            ));
        }
        let n = permutation.len();
        let mut seen = vec![false; n];
        for &q in &permutation {
            if q >= n || seen[q] {
                return Err(CodeError::FailedValidation(
                    "qubit permutation is not a bijection".to_string(),
                ));
            }
            seen[q] = true;
        }
        Ok(Self {
            pattern,
            free,
            gauge_qubits,
            permutation,
        })
    }

    pub fn pattern(&self) -> &[GaugeBasis] {
        &self.pattern
    }

    /// Textual pattern, e.g. "++00".
    pub fn pattern_string(&self) -> String {
        self.pattern.iter().map(GaugeBasis::symbol).collect()
    }

    pub fn free_flags(&self) -> &[bool] {
        &self.free
    }

    pub fn free_count(&self) -> usize {
        self.free.iter().filter(|&&f| f).count()
    }

    pub fn gauge_qubits(&self) -> &[usize] {
        &self.gauge_qubits
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }
}

impl std::fmt::Display for NominalGaugeState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.pattern_string())
    }
}

/// The nominal gauge state of a standard form, together with free-qubit
/// flags derived from the basin generators.
pub fn nominal_gauge_state(sf: &StandardForm) -> Result<NominalGaugeState, CodeError> {
    let (r, s) = (sf.r(), sf.s);
    let (rz, rx) = basin_generators(sf)?;
    let mut free = vec![true; r];
    for row in rz.rows().iter().chain(rx.rows().iter()) {
        for i in row.iter_ones() {
            free[i % r] = false;
        }
    }
    let pattern = (0..r)
        .map(|i| {
            if i < r - s {
                GaugeBasis::Plus
            } else {
                GaugeBasis::Zero
            }
        })
        .collect();
    Ok(NominalGaugeState {
        pattern,
        free,
        gauge_qubits: sf.gauge_qubits().to_vec(),
        permutation: sf.permutation.clone(),
    })
}

/// One measure-and-correct step: measure `stabilizer`, apply `correction`
/// on the −1 outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderStep {
    pub stabilizer: PauliOperator,
    pub correction: PauliOperator,
}

/// A complete synthesized (or hand-built) encoder: ordered steps, logical
/// operators, basin description, and nominal gauge state.
#[derive(Debug, Clone)]
pub struct EncoderPlan {
    code: StabilizerCode,
    steps: Vec<EncoderStep>,
    logical_x: Vec<PauliOperator>,
    logical_z: Vec<PauliOperator>,
    upload_qubits: Vec<usize>,
    gauge_qubits: Vec<usize>,
    basin_rz: CheckMatrix,
    basin_rx: CheckMatrix,
    nominal_gauge: NominalGaugeState,
    order_robust: bool,
}

impl EncoderPlan {
    /// Assemble a plan from parts, checking shapes only; property checks
    /// (E1, E2, E3) are the verify layer's job.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        code: StabilizerCode,
        steps: Vec<EncoderStep>,
        logical_x: Vec<PauliOperator>,
        logical_z: Vec<PauliOperator>,
        upload_qubits: Vec<usize>,
        gauge_qubits: Vec<usize>,
        basin_rz: CheckMatrix,
        basin_rx: CheckMatrix,
        nominal_gauge: NominalGaugeState,
        order_robust: bool,
    ) -> Result<Self, CodeError> {
        let n = code.n();
        let r = code.r();
        let m = code.m();
        if steps.len() != r {
            return Err(CodeError::FailedValidation(format!(
                "plan has {} steps for {r} generators",
                steps.len()
            )));
        }
        if logical_x.len() != m || logical_z.len() != m {
            return Err(CodeError::FailedValidation(format!(
                "plan has {}/{} logical X/Z operators for m = {m}",
                logical_x.len(),
                logical_z.len()
            )));
        }
        if upload_qubits.len() != m || gauge_qubits.len() != r {
            return Err(CodeError::FailedValidation(
                "upload/gauge qubit lists have wrong lengths".to_string(),
            ));
        }
        if basin_rz.n() != r || basin_rx.n() != r || basin_rz.nrows() != m || basin_rx.nrows() != m
        {
            return Err(CodeError::FailedValidation(
                "basin matrices must be m rows over the r gauge qubits".to_string(),
            ));
        }
        for step in &steps {
            if step.stabilizer.n() != n || step.correction.n() != n {
                return Err(CodeError::FailedValidation(
                    "plan operator acts on the wrong register size".to_string(),
                ));
            }
        }
        Ok(Self {
            code,
            steps,
            logical_x,
            logical_z,
            upload_qubits,
            gauge_qubits,
            basin_rz,
            basin_rx,
            nominal_gauge,
            order_robust,
        })
    }

    pub fn code(&self) -> &StabilizerCode {
        &self.code
    }

    pub fn n(&self) -> usize {
        self.code.n()
    }

    pub fn r(&self) -> usize {
        self.code.r()
    }

    pub fn m(&self) -> usize {
        self.code.m()
    }

    pub fn steps(&self) -> &[EncoderStep] {
        &self.steps
    }

    pub fn logical_x(&self) -> &[PauliOperator] {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &[PauliOperator] {
        &self.logical_z
    }

    pub fn upload_qubits(&self) -> &[usize] {
        &self.upload_qubits
    }

    pub fn gauge_qubits(&self) -> &[usize] {
        &self.gauge_qubits
    }

    pub fn basin_rz(&self) -> &CheckMatrix {
        &self.basin_rz
    }

    pub fn basin_rx(&self) -> &CheckMatrix {
        &self.basin_rx
    }

    pub fn nominal_gauge(&self) -> &NominalGaugeState {
        &self.nominal_gauge
    }

    pub fn order_robust(&self) -> bool {
        self.order_robust
    }

    /// Basin generators embedded on the full n-qubit register.
    pub fn basin_generators_embedded(&self) -> Result<Vec<PauliOperator>, CodeError> {
        let r = self.r();
        let mut out = Vec::new();
        for row in self.basin_rz.rows().iter().chain(self.basin_rx.rows()) {
            let local = PauliOperator::from_check_vector(r, row)?;
            out.push(local.embed(self.n(), &self.gauge_qubits)?);
        }
        Ok(out)
    }
}

/// Synthesize a full order-robust encoder plan from a validated code.
pub fn synthesize_plan(code: &StabilizerCode) -> Result<EncoderPlan, CodeError> {
    let sf = standard_form(code)?;
    let (logical_x, logical_z) = logical_operators(&sf)?;
    let corrections = correction_operators(&sf, &logical_x, &logical_z)?;
    let (basin_rz, basin_rx) = basin_generators(&sf)?;
    let nominal = nominal_gauge_state(&sf)?;
    let steps = sf
        .transformed
        .iter()
        .cloned()
        .zip(corrections)
        .map(|(stabilizer, correction)| EncoderStep {
            stabilizer,
            correction,
        })
        .collect();
    EncoderPlan::from_parts(
        code.clone(),
        steps,
        logical_x,
        logical_z,
        sf.upload_qubits().to_vec(),
        sf.gauge_qubits().to_vec(),
        basin_rz,
        basin_rx,
        nominal,
        true,
    )
}
