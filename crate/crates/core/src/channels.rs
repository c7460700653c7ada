//! Dense simulation of the measure-and-correct channels: density matrices,
//! Kraus maps, composed encoders, and the continuous-time generator.
//!
//! All Pauli actions use permutation-plus-phase kernels costing O(4^n) per
//! channel application instead of dense matrix products. Qubit 0 corresponds
//! to the leftmost letter of a Pauli string and to the most significant bit
//! of a computational basis index.

use nalgebra::{ComplexField as _, DMatrix, DVector};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};
use thiserror::Error;

use crate::pauli::{PauliError, PauliOperator};

/// Scalar type for dense numerics. Implemented by f32 and f64.
pub trait Scalar: nalgebra::RealField + FromPrimitive + ToPrimitive + Copy {}
impl<T: nalgebra::RealField + FromPrimitive + ToPrimitive + Copy> Scalar for T {}

/// Largest register simulated with dense density matrices and channels.
pub const MAX_DENSE_QUBITS: usize = 12;
/// Largest register simulated with dense state vectors.
pub const MAX_STATE_QUBITS: usize = 14;
/// Largest register for explicit 4^n-dimensional superoperator matrices.
pub const MAX_SUPEROP_QUBITS: usize = 5;

/// Numeric tolerances used across verification, centralized so acceptance
/// tests have a single knob.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<R> {
    /// Exact identities (channel equality, Hermiticity, trace).
    pub equality: R,
    /// Trace preservation and positivity slack.
    pub cptp: R,
    /// Convergence of iterative or time-evolved quantities.
    pub convergence: R,
    /// Residuals of channel outputs against reference states.
    pub channel: R,
}

impl<R: Scalar> Default for Tolerances<R> {
    fn default() -> Self {
        Self {
            equality: lit(1e-12),
            cptp: lit(1e-10),
            convergence: lit(1e-8),
            channel: lit(1e-10),
        }
    }
}

fn lit<R: Scalar>(x: f64) -> R {
    R::from_f64(x).expect("tolerance literal representable")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("{what} on {n} qubits exceeds the dense limit of {max} qubits")]
    DenseLimit {
        what: &'static str,
        n: usize,
        max: usize,
    },
    #[error("dimension {found} does not match 2^{n} = {expected}")]
    Dimension {
        n: usize,
        expected: usize,
        found: usize,
    },
    #[error("operators act on different registers: {left} vs {right} qubits")]
    RegisterMismatch { left: usize, right: usize },
    #[error("{which} operator {op} is not Hermitian")]
    NotHermitian { which: &'static str, op: String },
    #[error("stabilizer {s} and correction {c} commute; the map cannot steer the -1 sector")]
    CommutingPair { s: String, c: String },
    #[error("negative evolution time {t}")]
    NegativeTime { t: f64 },
    #[error("mixture weight {value} outside [0, 1]")]
    MixtureWeight { value: f64 },
    #[error("eigenvalue iteration did not converge on a {dim}x{dim} matrix")]
    SpectrumFailure { dim: usize },
    #[error("trace-preservation residual {residual} exceeds tolerance")]
    NotTracePreserving { residual: f64 },
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// i^phase for phase in 0..4.
fn phase_factor<R: Scalar>(phase: u8) -> Complex<R> {
    let one = R::one();
    let zero = R::zero();
    match phase % 4 {
        0 => Complex::new(one, zero),
        1 => Complex::new(zero, one),
        2 => Complex::new(-one, zero),
        _ => Complex::new(zero, -one),
    }
}

/// Bit masks of a Pauli operator in basis-index order (qubit 0 becomes the
/// most significant bit of the index).
#[derive(Debug, Clone, Copy)]
struct PauliMasks {
    x: usize,
    z: usize,
    phase: u8,
    n: usize,
}

impl PauliMasks {
    fn new(p: &PauliOperator) -> Self {
        let n = p.n();
        let mut x = 0usize;
        let mut z = 0usize;
        for q in 0..n {
            if p.x_bits().get(q) {
                x |= 1 << (n - 1 - q);
            }
            if p.z_bits().get(q) {
                z |= 1 << (n - 1 - q);
            }
        }
        Self {
            x,
            z,
            phase: p.phase(),
            n,
        }
    }

    /// Coefficient of |b ⊕ x⟩ in P|b⟩: i^phase · (−1)^(z·b).
    fn amp<R: Scalar>(&self, b: usize) -> Complex<R> {
        let sign = ((self.z & b).count_ones() & 1) as u8;
        phase_factor::<R>(self.phase + 2 * sign)
    }

    fn dim(&self) -> usize {
        1 << self.n
    }
}

/// Dense matrix of a Pauli operator (one nonzero per column).
pub fn pauli_dense<R: Scalar>(p: &PauliOperator) -> Result<DMatrix<Complex<R>>, ChannelError> {
    ensure_qubits("dense Pauli", p.n(), MAX_DENSE_QUBITS)?;
    let masks = PauliMasks::new(p);
    let d = masks.dim();
    let mut m = DMatrix::zeros(d, d);
    for b in 0..d {
        m[(b ^ masks.x, b)] = masks.amp::<R>(b);
    }
    Ok(m)
}

fn ensure_qubits(what: &'static str, n: usize, max: usize) -> Result<(), ChannelError> {
    if n > max {
        Err(ChannelError::DenseLimit { what, n, max })
    } else {
        Ok(())
    }
}

/// P·M in O(d²).
fn left_apply<R: Scalar>(masks: &PauliMasks, m: &DMatrix<Complex<R>>) -> DMatrix<Complex<R>> {
    let d = masks.dim();
    let mut out = DMatrix::zeros(d, d);
    for b in 0..d {
        let amp = masks.amp::<R>(b ^ masks.x);
        for col in 0..d {
            out[(b, col)] = m[(b ^ masks.x, col)] * amp;
        }
    }
    out
}

/// M·P in O(d²).
fn right_apply<R: Scalar>(m: &DMatrix<Complex<R>>, masks: &PauliMasks) -> DMatrix<Complex<R>> {
    let d = masks.dim();
    let mut out = DMatrix::zeros(d, d);
    for col in 0..d {
        let amp = masks.amp::<R>(col);
        for row in 0..d {
            out[(row, col ^ masks.x)] = m[(row, col)] * amp;
        }
    }
    out
}

/// P·M·P† in O(d²); global phases of P cancel, only the Z pattern matters.
fn conjugate_apply<R: Scalar>(masks: &PauliMasks, m: &DMatrix<Complex<R>>) -> DMatrix<Complex<R>> {
    let d = masks.dim();
    let mut out = DMatrix::zeros(d, d);
    for a in 0..d {
        let sa = (masks.z & a).count_ones() & 1;
        for b in 0..d {
            let s = sa ^ ((masks.z & b).count_ones() & 1);
            let v = m[(a ^ masks.x, b ^ masks.x)];
            out[(a, b)] = if s == 1 { -v } else { v };
        }
    }
    out
}

/// A pure state on n qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<R: Scalar> {
    n: usize,
    amplitudes: DVector<Complex<R>>,
}

/// Single-qubit preparations used to assemble product states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QubitState {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl QubitState {
    fn amplitudes<R: Scalar>(&self) -> [Complex<R>; 2] {
        let zero = Complex::new(R::zero(), R::zero());
        let one = Complex::new(R::one(), R::zero());
        let h = Complex::new(lit::<R>(std::f64::consts::FRAC_1_SQRT_2), R::zero());
        let hi = Complex::new(R::zero(), lit::<R>(std::f64::consts::FRAC_1_SQRT_2));
        match self {
            QubitState::Zero => [one, zero],
            QubitState::One => [zero, one],
            QubitState::Plus => [h, h],
            QubitState::Minus => [h, -h],
            QubitState::PlusI => [h, hi],
            QubitState::MinusI => [h, -hi],
        }
    }

    /// Symbols: 0, 1, +, -, i (for |+i⟩), j (for |−i⟩).
    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '0' => Some(QubitState::Zero),
            '1' => Some(QubitState::One),
            '+' => Some(QubitState::Plus),
            '-' => Some(QubitState::Minus),
            'i' => Some(QubitState::PlusI),
            'j' => Some(QubitState::MinusI),
            _ => None,
        }
    }
}

impl<R: Scalar> StateVector<R> {
    pub fn new(n: usize, amplitudes: DVector<Complex<R>>) -> Result<Self, ChannelError> {
        ensure_qubits("state vector", n, MAX_STATE_QUBITS)?;
        if amplitudes.len() != 1 << n {
            return Err(ChannelError::Dimension {
                n,
                expected: 1 << n,
                found: amplitudes.len(),
            });
        }
        Ok(Self { n, amplitudes })
    }

    /// |index⟩ in the computational basis.
    pub fn basis(n: usize, index: usize) -> Result<Self, ChannelError> {
        ensure_qubits("state vector", n, MAX_STATE_QUBITS)?;
        let mut v = DVector::zeros(1 << n);
        v[index] = Complex::new(R::one(), R::zero());
        Self::new(n, v)
    }

    /// Product of single-qubit states, qubit 0 first.
    pub fn product(qubits: &[QubitState]) -> Result<Self, ChannelError> {
        let n = qubits.len();
        ensure_qubits("state vector", n, MAX_STATE_QUBITS)?;
        let mut v = DVector::from_element(1, Complex::new(R::one(), R::zero()));
        for q in qubits {
            let a = q.amplitudes::<R>();
            let mut next = DVector::zeros(v.len() * 2);
            for (i, amp) in v.iter().enumerate() {
                next[2 * i] = *amp * a[0];
                next[2 * i + 1] = *amp * a[1];
            }
            v = next;
        }
        Self::new(n, v)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &DVector<Complex<R>> {
        &self.amplitudes
    }

    pub fn tensor(&self, other: &Self) -> Result<Self, ChannelError> {
        let n = self.n + other.n;
        ensure_qubits("state vector", n, MAX_STATE_QUBITS)?;
        let mut v = DVector::zeros(self.amplitudes.len() * other.amplitudes.len());
        for (i, a) in self.amplitudes.iter().enumerate() {
            for (j, b) in other.amplitudes.iter().enumerate() {
                v[i * other.amplitudes.len() + j] = *a * *b;
            }
        }
        Self::new(n, v)
    }

    /// P|ψ⟩ in O(d).
    pub fn apply_pauli(&self, p: &PauliOperator) -> Result<Self, ChannelError> {
        if p.n() != self.n {
            return Err(ChannelError::RegisterMismatch {
                left: self.n,
                right: p.n(),
            });
        }
        let masks = PauliMasks::new(p);
        let d = masks.dim();
        let mut v = DVector::zeros(d);
        for a in 0..d {
            v[a] = self.amplitudes[a ^ masks.x] * masks.amp::<R>(a ^ masks.x);
        }
        Self::new(self.n, v)
    }

    /// (|ψ⟩ + S|ψ⟩)/2: project onto the +1 eigenspace of a Hermitian Pauli.
    pub fn project_stabilizer(&self, s: &PauliOperator) -> Result<Self, ChannelError> {
        let applied = self.apply_pauli(s)?;
        let half = Complex::new(lit::<R>(0.5), R::zero());
        let v = (&self.amplitudes + &applied.amplitudes) * half;
        Self::new(self.n, v)
    }

    pub fn norm(&self) -> R {
        self.amplitudes.norm()
    }

    pub fn normalized(&self) -> Option<Self> {
        let norm = self.norm();
        if norm <= R::default_epsilon() {
            return None;
        }
        let inv = Complex::new(R::one() / norm, R::zero());
        Some(Self {
            n: self.n,
            amplitudes: &self.amplitudes * inv,
        })
    }

    pub fn inner(&self, other: &Self) -> Complex<R> {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn density(&self) -> DensityMatrix<R> {
        let d = self.amplitudes.len();
        let mut m = DMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                m[(a, b)] = self.amplitudes[a] * self.amplitudes[b].conj();
            }
        }
        DensityMatrix {
            n: self.n,
            matrix: m,
        }
    }
}

/// A density matrix on n qubits. Constructors check the dense cap and
/// dimension; algebraic validity is checked by [`DensityMatrix::validity`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<R: Scalar> {
    n: usize,
    matrix: DMatrix<Complex<R>>,
}

impl<R: Scalar> DensityMatrix<R> {
    pub fn new(n: usize, matrix: DMatrix<Complex<R>>) -> Result<Self, ChannelError> {
        ensure_qubits("density matrix", n, MAX_DENSE_QUBITS)?;
        if matrix.nrows() != 1 << n || matrix.ncols() != 1 << n {
            return Err(ChannelError::Dimension {
                n,
                expected: 1 << n,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { n, matrix })
    }

    /// |index⟩⟨index|.
    pub fn basis(n: usize, index: usize) -> Result<Self, ChannelError> {
        Ok(StateVector::<R>::basis(n, index)?.density())
    }

    pub fn maximally_mixed(n: usize) -> Result<Self, ChannelError> {
        ensure_qubits("density matrix", n, MAX_DENSE_QUBITS)?;
        let d = 1usize << n;
        let w = Complex::new(R::one() / lit::<R>(d as f64), R::zero());
        Ok(Self {
            n,
            matrix: DMatrix::from_diagonal_element(d, d, w),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex<R>> {
        &self.matrix
    }

    pub fn trace(&self) -> Complex<R> {
        self.matrix.trace()
    }

    /// tr(Pρ) in O(d).
    pub fn expectation(&self, p: &PauliOperator) -> Result<Complex<R>, ChannelError> {
        if p.n() != self.n {
            return Err(ChannelError::RegisterMismatch {
                left: self.n,
                right: p.n(),
            });
        }
        let masks = PauliMasks::new(p);
        let mut acc = Complex::new(R::zero(), R::zero());
        for b in 0..masks.dim() {
            acc += masks.amp::<R>(b ^ masks.x) * self.matrix[(b ^ masks.x, b)];
        }
        Ok(acc)
    }

    /// PρP† in O(d²); the phase of P cancels.
    pub fn conjugate_pauli(&self, p: &PauliOperator) -> Result<Self, ChannelError> {
        if p.n() != self.n {
            return Err(ChannelError::RegisterMismatch {
                left: self.n,
                right: p.n(),
            });
        }
        let masks = PauliMasks::new(p);
        Ok(Self {
            n: self.n,
            matrix: conjugate_apply(&masks, &self.matrix),
        })
    }

    pub fn tensor(&self, other: &Self) -> Result<Self, ChannelError> {
        let n = self.n + other.n;
        ensure_qubits("density matrix", n, MAX_DENSE_QUBITS)?;
        Ok(Self {
            n,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// ⟨ψ|ρ|ψ⟩ for a pure reference state.
    pub fn fidelity_pure(&self, reference: &StateVector<R>) -> Result<R, ChannelError> {
        if reference.n() != self.n {
            return Err(ChannelError::RegisterMismatch {
                left: self.n,
                right: reference.n(),
            });
        }
        let v = reference.amplitudes();
        let mut acc = Complex::new(R::zero(), R::zero());
        for a in 0..self.dim() {
            for b in 0..self.dim() {
                acc += v[a].conj() * self.matrix[(a, b)] * v[b];
            }
        }
        Ok(acc.re)
    }

    /// Largest absolute entry of ρ − σ.
    pub fn max_abs_diff(&self, other: &Self) -> R {
        max_abs_diff(&self.matrix, &other.matrix)
    }

    /// Residuals of the state invariants: (hermiticity, trace deviation,
    /// most negative eigenvalue clamped to ≥ 0).
    pub fn validity(&self) -> (R, R, R) {
        let herm = max_abs_diff(&self.matrix, &self.matrix.adjoint());
        let trace_dev = (self.trace() - Complex::new(R::one(), R::zero())).modulus();
        let hermitized = (&self.matrix + self.matrix.adjoint())
            * Complex::new(lit::<R>(0.5), R::zero());
        let eigen = hermitized.symmetric_eigen();
        let mut most_negative = R::zero();
        for ev in eigen.eigenvalues.iter() {
            if *ev < most_negative {
                most_negative = *ev;
            }
        }
        (herm, trace_dev, -most_negative)
    }

    pub fn is_valid(&self, tol: &Tolerances<R>) -> bool {
        let (herm, trace_dev, negativity) = self.validity();
        herm <= tol.equality && trace_dev <= tol.equality && negativity <= tol.cptp
    }
}

pub fn max_abs_diff<R: Scalar>(a: &DMatrix<Complex<R>>, b: &DMatrix<Complex<R>>) -> R {
    let mut worst = R::zero();
    for (x, y) in a.iter().zip(b.iter()) {
        let d = (*x - *y).modulus();
        if d > worst {
            worst = d;
        }
    }
    worst
}

/// ½‖ρ − σ‖₁ from the eigenvalues of the Hermitian difference.
pub fn trace_distance<R: Scalar>(
    a: &DensityMatrix<R>,
    b: &DensityMatrix<R>,
) -> Result<R, ChannelError> {
    if a.n() != b.n() {
        return Err(ChannelError::RegisterMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    let diff = &a.matrix - &b.matrix;
    let eigen = diff.symmetric_eigen();
    let half = lit::<R>(0.5);
    Ok(eigen
        .eigenvalues
        .iter()
        .fold(R::zero(), |s, &l| s + l.abs())
        * half)
}

/// A channel in explicit Kraus form.
#[derive(Debug, Clone)]
pub struct KrausMap<R: Scalar> {
    n: usize,
    kraus_list: Vec<DMatrix<Complex<R>>>,
    label: String,
}

impl<R: Scalar> KrausMap<R> {
    pub fn new(
        n: usize,
        kraus_list: Vec<DMatrix<Complex<R>>>,
        label: impl Into<String>,
    ) -> Result<Self, ChannelError> {
        ensure_qubits("Kraus map", n, MAX_DENSE_QUBITS)?;
        let d = 1usize << n;
        for k in &kraus_list {
            if k.nrows() != d || k.ncols() != d {
                return Err(ChannelError::Dimension {
                    n,
                    expected: d,
                    found: k.nrows().max(k.ncols()),
                });
            }
        }
        Ok(Self {
            n,
            kraus_list,
            label: label.into(),
        })
    }

    pub fn identity(n: usize) -> Result<Self, ChannelError> {
        let d = 1usize << n;
        Self::new(n, vec![DMatrix::identity(d, d)], "identity")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kraus_list(&self) -> &[DMatrix<Complex<R>>] {
        &self.kraus_list
    }

    /// ‖Σ K†K − I‖_max.
    pub fn trace_preservation_residual(&self) -> R {
        let d = 1usize << self.n;
        let mut acc: DMatrix<Complex<R>> = DMatrix::zeros(d, d);
        for k in &self.kraus_list {
            acc += k.adjoint() * k;
        }
        max_abs_diff(&acc, &DMatrix::identity(d, d))
    }

    pub fn apply_matrix(&self, m: &DMatrix<Complex<R>>) -> DMatrix<Complex<R>> {
        let d = 1usize << self.n;
        let mut out = DMatrix::zeros(d, d);
        for k in &self.kraus_list {
            out += k * m * k.adjoint();
        }
        out
    }

    pub fn apply(&self, rho: &DensityMatrix<R>) -> Result<DensityMatrix<R>, ChannelError> {
        if rho.n() != self.n {
            return Err(ChannelError::RegisterMismatch {
                left: self.n,
                right: rho.n(),
            });
        }
        DensityMatrix::new(self.n, self.apply_matrix(&rho.matrix))
    }

    /// Dense superoperator via vec(KρK†) = (conj K ⊗ K) vec(ρ), column-major.
    pub fn superoperator(&self) -> Result<Superoperator<R>, ChannelError> {
        ensure_qubits("superoperator", self.n, MAX_SUPEROP_QUBITS)?;
        let d = 1usize << self.n;
        let mut m = DMatrix::zeros(d * d, d * d);
        for k in &self.kraus_list {
            let conj = k.map(|c| c.conj());
            m += conj.kronecker(k);
        }
        Ok(Superoperator { n: self.n, matrix: m })
    }
}

/// One measure-and-correct map Φ(ρ) = A₊ρA₊ + A₋ρA₋ with A₊ = (I+S)/2 and
/// A₋ = C(I−S)/2, applied by Pauli kernels in O(4^n).
///
/// S must be a ±1-signed Hermitian Pauli: row reduction can hand back
/// generators like −ZZ whose +1 eigenspace is the correct code sector. The
/// sign of C is irrelevant (it enters as a conjugation).
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingMap {
    stabilizer: PauliOperator,
    correction: PauliOperator,
}

impl EncodingMap {
    pub fn new(stabilizer: PauliOperator, correction: PauliOperator) -> Result<Self, ChannelError> {
        if stabilizer.n() != correction.n() {
            return Err(ChannelError::RegisterMismatch {
                left: stabilizer.n(),
                right: correction.n(),
            });
        }
        if !stabilizer.is_hermitian() {
            return Err(ChannelError::NotHermitian {
                which: "stabilizer",
                op: stabilizer.to_string(),
            });
        }
        if !correction.is_hermitian() {
            return Err(ChannelError::NotHermitian {
                which: "correction",
                op: correction.to_string(),
            });
        }
        if stabilizer
            .commutes_with(&correction)
            .expect("equal registers")
        {
            return Err(ChannelError::CommutingPair {
                s: stabilizer.to_string(),
                c: correction.to_string(),
            });
        }
        Ok(Self {
            stabilizer,
            correction,
        })
    }

    pub fn n(&self) -> usize {
        self.stabilizer.n()
    }

    pub fn stabilizer(&self) -> &PauliOperator {
        &self.stabilizer
    }

    pub fn correction(&self) -> &PauliOperator {
        &self.correction
    }

    /// Apply to a raw matrix (not necessarily Hermitian), O(d²).
    pub fn apply_matrix<R: Scalar>(&self, m: &DMatrix<Complex<R>>) -> DMatrix<Complex<R>> {
        let s = PauliMasks::new(&self.stabilizer);
        let c = PauliMasks::new(&self.correction);
        let sm = left_apply(&s, m);
        let ms = right_apply(m, &s);
        let sms = right_apply(&sm, &s);
        let quarter = Complex::new(lit::<R>(0.25), R::zero());
        let plus = (m + &sm + &ms + &sms) * quarter;
        let minus_inner = (m - &sm - &ms + &sms) * quarter;
        let minus = conjugate_apply(&c, &minus_inner);
        plus + minus
    }

    pub fn apply<R: Scalar>(&self, rho: &DensityMatrix<R>) -> Result<DensityMatrix<R>, ChannelError> {
        if rho.n() != self.n() {
            return Err(ChannelError::RegisterMismatch {
                left: self.n(),
                right: rho.n(),
            });
        }
        DensityMatrix::new(rho.n(), self.apply_matrix(&rho.matrix))
    }

    /// Explicit two-operator Kraus form.
    pub fn kraus<R: Scalar>(&self) -> Result<KrausMap<R>, ChannelError> {
        let d = 1usize << self.n();
        let s = pauli_dense::<R>(&self.stabilizer)?;
        let c = pauli_dense::<R>(&self.correction)?;
        let half = Complex::new(lit::<R>(0.5), R::zero());
        let identity: DMatrix<Complex<R>> = DMatrix::identity(d, d);
        let a_plus = (&identity + &s) * half;
        let a_minus = &c * ((&identity - &s) * half);
        KrausMap::new(
            self.n(),
            vec![a_plus, a_minus],
            format!("phi({}, {})", self.stabilizer, self.correction),
        )
    }
}

/// Measure-and-correct channel for one stabilizer: explicit Kraus form.
pub fn encoding_map<R: Scalar>(
    stabilizer: &PauliOperator,
    correction: &PauliOperator,
) -> Result<KrausMap<R>, ChannelError> {
    EncodingMap::new(stabilizer.clone(), correction.clone())?.kraus()
}

/// Unitary conjugation by a Pauli operator, as a single-element Kraus map.
pub fn pauli_unitary_map<R: Scalar>(p: &PauliOperator) -> Result<KrausMap<R>, ChannelError> {
    let u = pauli_dense::<R>(p)?;
    KrausMap::new(p.n(), vec![u], format!("unitary {p}"))
}

/// Convex mixture λ·N + (1−λ)·Id, as Kraus set {√λ K_i} ∪ {√(1−λ) I}.
pub fn mix_with_identity<R: Scalar>(
    noise: &KrausMap<R>,
    lambda: R,
) -> Result<KrausMap<R>, ChannelError> {
    if lambda < R::zero() || lambda > R::one() {
        return Err(ChannelError::MixtureWeight {
            value: lambda.to_f64().unwrap_or(f64::NAN),
        });
    }
    let d = 1usize << noise.n();
    let sqrt_l = Complex::new(lambda.sqrt(), R::zero());
    let sqrt_c = Complex::new((R::one() - lambda).sqrt(), R::zero());
    let mut kraus: Vec<DMatrix<Complex<R>>> = noise
        .kraus_list()
        .iter()
        .map(|k| k * sqrt_l)
        .collect();
    kraus.push(DMatrix::identity(d, d) * sqrt_c);
    KrausMap::new(
        noise.n(),
        kraus,
        format!("mix({}, {})", noise.label(), lambda.to_f64().unwrap_or(f64::NAN)),
    )
}

/// An ordered product of encoding maps, applied sequentially in O(r·4^n)
/// rather than materializing 2^r Kraus operators.
#[derive(Debug, Clone)]
pub struct ComposedEncoder {
    n: usize,
    stages: Vec<EncodingMap>,
}

impl ComposedEncoder {
    pub fn new(n: usize, stages: Vec<EncodingMap>) -> Result<Self, ChannelError> {
        ensure_qubits("composed encoder", n, MAX_DENSE_QUBITS)?;
        for stage in &stages {
            if stage.n() != n {
                return Err(ChannelError::RegisterMismatch {
                    left: n,
                    right: stage.n(),
                });
            }
        }
        Ok(Self { n, stages })
    }

    /// Build from a plan, applying the plan's steps in the order given by
    /// `order` (indices into the step list; first entry applied first).
    pub fn from_plan(
        plan: &crate::code::EncoderPlan,
        order: Option<&[usize]>,
    ) -> Result<Self, ChannelError> {
        let r = plan.r();
        let default: Vec<usize> = (0..r).collect();
        let order = order.unwrap_or(&default);
        assert!(
            order.len() == r && {
                let mut seen = vec![false; r];
                order.iter().all(|&i| {
                    i < r && !std::mem::replace(&mut seen[i], true)
                })
            },
            "order must be a permutation of the step indices"
        );
        let stages = order
            .iter()
            .map(|&i| {
                let step = &plan.steps()[i];
                EncodingMap::new(step.stabilizer.clone(), step.correction.clone())
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(plan.n(), stages)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stages(&self) -> &[EncodingMap] {
        &self.stages
    }

    pub fn apply_matrix<R: Scalar>(&self, m: &DMatrix<Complex<R>>) -> DMatrix<Complex<R>> {
        let mut out = m.clone();
        for stage in &self.stages {
            out = stage.apply_matrix(&out);
        }
        out
    }

    pub fn apply<R: Scalar>(&self, rho: &DensityMatrix<R>) -> Result<DensityMatrix<R>, ChannelError> {
        if rho.n() != self.n {
            return Err(ChannelError::RegisterMismatch {
                left: self.n,
                right: rho.n(),
            });
        }
        DensityMatrix::new(self.n, self.apply_matrix(&rho.matrix))
    }

    /// Materialize the 2^r Kraus operators K_i = A_{±,r}···A_{±,1}. Memory
    /// cap: 2^r · 4^n complex entries must stay below the dense limit of
    /// 2^(2·MAX_DENSE_QUBITS).
    pub fn kraus_map<R: Scalar>(&self) -> Result<KrausMap<R>, ChannelError> {
        let r = self.stages.len();
        let budget_log2 = 2 * MAX_DENSE_QUBITS as u32;
        if (r as u32 + 2 * self.n as u32) > budget_log2 {
            return Err(ChannelError::DenseLimit {
                what: "materialized Kraus product",
                n: self.n,
                max: MAX_DENSE_QUBITS,
            });
        }
        let d = 1usize << self.n;
        let mut ops: Vec<DMatrix<Complex<R>>> = vec![DMatrix::identity(d, d)];
        for stage in &self.stages {
            let kraus = stage.kraus::<R>()?;
            let mut next = Vec::with_capacity(ops.len() * 2);
            for op in &ops {
                for k in kraus.kraus_list() {
                    next.push(k * op);
                }
            }
            ops = next;
        }
        KrausMap::new(self.n, ops, "composed encoder")
    }

    /// Dense superoperator built by applying the channel to all d² matrix
    /// units, column-major vectorization.
    pub fn superoperator<R: Scalar>(&self) -> Result<Superoperator<R>, ChannelError> {
        ensure_qubits("superoperator", self.n, MAX_SUPEROP_QUBITS)?;
        let d = 1usize << self.n;
        let mut m = DMatrix::zeros(d * d, d * d);
        for col_b in 0..d {
            for row_a in 0..d {
                let mut unit: DMatrix<Complex<R>> = DMatrix::zeros(d, d);
                unit[(row_a, col_b)] = Complex::new(R::one(), R::zero());
                let image = self.apply_matrix(&unit);
                let col = col_b * d + row_a;
                for b in 0..d {
                    for a in 0..d {
                        m[(b * d + a, col)] = image[(a, b)];
                    }
                }
            }
        }
        Ok(Superoperator { n: self.n, matrix: m })
    }
}

/// Place ρ_L on the upload qubits and σ on the gauge qubits, mapped back to
/// original physical labels through the plan's permutation.
pub fn embed_logical<R: Scalar>(
    rho_l: &DensityMatrix<R>,
    sigma: &DensityMatrix<R>,
    plan: &crate::code::EncoderPlan,
) -> Result<DensityMatrix<R>, ChannelError> {
    if rho_l.n() != plan.m() || sigma.n() != plan.r() {
        return Err(ChannelError::Dimension {
            n: plan.m(),
            expected: 1 << plan.m(),
            found: rho_l.dim(),
        });
    }
    let n = plan.n();
    ensure_qubits("density matrix", n, MAX_DENSE_QUBITS)?;
    let product = rho_l.tensor(sigma)?;
    let index_map = position_index_map(n, plan);
    let d = 1usize << n;
    let mut out = DMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            out[(a, b)] = product.matrix[(index_map[a], index_map[b])];
        }
    }
    DensityMatrix::new(n, out)
}

/// Same embedding at the state-vector level: |ψ_L⟩ on uploads, |φ⟩ on gauge.
pub fn embed_state<R: Scalar>(
    psi_l: &StateVector<R>,
    phi: &StateVector<R>,
    plan: &crate::code::EncoderPlan,
) -> Result<StateVector<R>, ChannelError> {
    if psi_l.n() != plan.m() || phi.n() != plan.r() {
        return Err(ChannelError::Dimension {
            n: plan.m(),
            expected: 1 << plan.m(),
            found: psi_l.amplitudes().len(),
        });
    }
    let n = plan.n();
    ensure_qubits("state vector", n, MAX_STATE_QUBITS)?;
    let product = psi_l.tensor(phi)?;
    let index_map = position_index_map(n, plan);
    let d = 1usize << n;
    let mut amplitudes = DVector::zeros(d);
    for a in 0..d {
        amplitudes[a] = product.amplitudes()[index_map[a]];
    }
    StateVector::new(n, amplitudes)
}

// index_map[a] is the (upload ++ gauge) product-register index whose bit at
// position p equals bit plan.permutation-of-p of the original index a.
fn position_index_map(n: usize, plan: &crate::code::EncoderPlan) -> Vec<usize> {
    let permutation: Vec<usize> = plan
        .upload_qubits()
        .iter()
        .chain(plan.gauge_qubits())
        .copied()
        .collect();
    let d = 1usize << n;
    let mut index_map = vec![0usize; d];
    for (p, &q) in permutation.iter().enumerate() {
        let src = 1usize << (n - 1 - p);
        let dst = 1usize << (n - 1 - q);
        for (orig, entry) in index_map.iter_mut().enumerate() {
            if orig & dst != 0 {
                *entry |= src;
            }
        }
    }
    index_map
}

/// Product state on the gauge register from a nominal pattern, free slots
/// filled with the pattern's own symbol.
pub fn nominal_gauge_vector<R: Scalar>(
    nominal: &crate::code::NominalGaugeState,
) -> Result<StateVector<R>, ChannelError> {
    let qubits: Vec<QubitState> = nominal
        .pattern()
        .iter()
        .map(|b| match b {
            crate::code::GaugeBasis::Plus => QubitState::Plus,
            crate::code::GaugeBasis::Zero => QubitState::Zero,
        })
        .collect();
    StateVector::product(&qubits)
}

/// Left-multiply by Π = ∏ (I+S_k)/2 using sequential O(d²) passes, without
/// ever materializing the projector.
pub fn apply_code_projector<R: Scalar>(
    generators: &[PauliOperator],
    m: &DMatrix<Complex<R>>,
) -> Result<DMatrix<Complex<R>>, ChannelError> {
    let mut out = m.clone();
    let half = Complex::new(lit::<R>(0.5), R::zero());
    for s in generators {
        let d = 1usize << s.n();
        if d != out.nrows() {
            return Err(ChannelError::Dimension {
                n: s.n(),
                expected: d,
                found: out.nrows(),
            });
        }
        if !s.is_hermitian() {
            return Err(ChannelError::NotHermitian {
                which: "stabilizer",
                op: s.to_string(),
            });
        }
        let masks = PauliMasks::new(s);
        let sm = left_apply(&masks, &out);
        out = (out + sm) * half;
    }
    Ok(out)
}

/// Π = ∏ (I+S_k)/2 as a dense matrix.
pub fn projector_onto_code<R: Scalar>(
    n: usize,
    generators: &[PauliOperator],
) -> Result<DMatrix<Complex<R>>, ChannelError> {
    ensure_qubits("code projector", n, MAX_DENSE_QUBITS)?;
    let d = 1usize << n;
    for s in generators {
        if s.n() != n {
            return Err(ChannelError::RegisterMismatch {
                left: n,
                right: s.n(),
            });
        }
    }
    apply_code_projector(generators, &DMatrix::identity(d, d))
}

/// Project a pure state onto the code space (unnormalized): ∏(I+S_k)/2 |ψ⟩.
pub fn project_state<R: Scalar>(
    state: &StateVector<R>,
    generators: &[PauliOperator],
) -> Result<StateVector<R>, ChannelError> {
    let mut v = state.clone();
    for s in generators {
        v = v.project_stabilizer(s)?;
    }
    Ok(v)
}

/// Dense superoperator on vectorized density matrices.
#[derive(Debug, Clone)]
pub struct Superoperator<R: Scalar> {
    n: usize,
    matrix: DMatrix<Complex<R>>,
}

impl<R: Scalar> Superoperator<R> {
    pub fn identity(n: usize) -> Result<Self, ChannelError> {
        ensure_qubits("superoperator", n, MAX_SUPEROP_QUBITS)?;
        let d = 1usize << n;
        Ok(Self {
            n,
            matrix: DMatrix::identity(d * d, d * d),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex<R>> {
        &self.matrix
    }

    pub fn compose(&self, other: &Self) -> Result<Self, ChannelError> {
        if self.n != other.n {
            return Err(ChannelError::RegisterMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(Self {
            n: self.n,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> R {
        max_abs_diff(&self.matrix, &other.matrix)
    }

    /// ‖S∘S − S‖_max.
    pub fn idempotence_residual(&self) -> R {
        let square = &self.matrix * &self.matrix;
        max_abs_diff(&square, &self.matrix)
    }

    pub fn apply(&self, rho: &DensityMatrix<R>) -> Result<DensityMatrix<R>, ChannelError> {
        if rho.n() != self.n {
            return Err(ChannelError::RegisterMismatch {
                left: self.n,
                right: rho.n(),
            });
        }
        let d = 1usize << self.n;
        let vec = vectorize(&rho.matrix);
        let out = &self.matrix * vec;
        DensityMatrix::new(self.n, unvectorize(d, &out))
    }

    /// Spectrum of the superoperator, through the real embedding
    /// [[Re, −Im], [Im, Re]] whose eigenvalues are those of the matrix
    /// together with their conjugates. Real parts are therefore faithful.
    ///
    /// Encoder superoperators are projections, with exact zeros in the
    /// spectrum, and the QR iteration's deflation test measures
    /// subdiagonals against the neighbouring diagonal entries, so it can
    /// fail to deflate near a zero eigenvalue. The embedding is shifted by
    /// 1 + the Frobenius norm (an upper bound on the spectral radius)
    /// before iterating and the shift is subtracted from the result; a
    /// seeded random orthogonal conjugation first breaks up structured
    /// sparsity that slows convergence. The deflation threshold is opened
    /// to 2¹⁰ machine epsilons: these operators have tiny minimal
    /// polynomials, so the Hessenberg form nearly decouples, and the
    /// leftover subdiagonals sit at the reduction's rounding error rather
    /// than at machine epsilon. Eigenvalues move by at most that relative
    /// amount.
    pub fn eigenvalues(&self) -> Result<Vec<Complex<R>>, ChannelError> {
        use rand::{Rng as _, SeedableRng as _};
        let dd = self.matrix.nrows();
        let mut real = DMatrix::<R>::zeros(2 * dd, 2 * dd);
        for a in 0..dd {
            for b in 0..dd {
                let v = self.matrix[(a, b)];
                real[(a, b)] = v.re;
                real[(a + dd, b + dd)] = v.re;
                real[(a, b + dd)] = -v.im;
                real[(a + dd, b)] = v.im;
            }
        }
        let shift = real.norm() + R::one();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x517ab);
        let noise = DMatrix::<R>::from_fn(2 * dd, 2 * dd, |_, _| {
            lit::<R>(rng.random::<f64>() * 2.0 - 1.0)
        });
        let q = noise.qr().q();
        let mut conjugated = q.transpose() * real * &q;
        for k in 0..2 * dd {
            conjugated[(k, k)] += shift;
        }
        let schur = nalgebra::linalg::Schur::try_new(
            conjugated,
            R::default_epsilon() * lit::<R>(1024.0),
            200 * (2 * dd).max(1),
        )
        .ok_or(ChannelError::SpectrumFailure { dim: 2 * dd })?;
        Ok(schur
            .complex_eigenvalues()
            .iter()
            .map(|v| Complex::new(v.re - shift, v.im))
            .collect())
    }
}

fn vectorize<R: Scalar>(m: &DMatrix<Complex<R>>) -> DVector<Complex<R>> {
    let (rows, cols) = m.shape();
    let mut v = DVector::zeros(rows * cols);
    for b in 0..cols {
        for a in 0..rows {
            v[b * rows + a] = m[(a, b)];
        }
    }
    v
}

fn unvectorize<R: Scalar>(d: usize, v: &DVector<Complex<R>>) -> DMatrix<Complex<R>> {
    let mut m = DMatrix::zeros(d, d);
    for b in 0..d {
        for a in 0..d {
            m[(a, b)] = v[b * d + a];
        }
    }
    m
}

/// The continuous-time generator ℒ = Φ_P − id as a dense superoperator.
/// Only available within the superoperator cap; large registers evolve
/// through [`evolve_cde`] directly.
pub fn cde_generator<R: Scalar>(
    encoder: &ComposedEncoder,
) -> Result<Superoperator<R>, ChannelError> {
    let phi = encoder.superoperator::<R>()?;
    let identity = Superoperator::<R>::identity(encoder.n())?;
    Ok(Superoperator {
        n: phi.n,
        matrix: phi.matrix - identity.matrix,
    })
}

/// e^{ℒt}ρ with ℒ = Φ_P − id, computed as the Poisson-weighted series
/// e^{−t} Σ_j (t^j / j!) Φ_P^j(ρ). The weights sum to one, so truncating
/// when the remaining tail mass drops below the tolerance bounds the error
/// in trace norm by that mass; no matrix exponential is needed.
pub fn evolve_cde<R: Scalar>(
    encoder: &ComposedEncoder,
    rho: &DensityMatrix<R>,
    t: R,
    tol: &Tolerances<R>,
) -> Result<DensityMatrix<R>, ChannelError> {
    if t < R::zero() {
        return Err(ChannelError::NegativeTime {
            t: t.to_f64().unwrap_or(f64::NAN),
        });
    }
    if rho.n() != encoder.n() {
        return Err(ChannelError::RegisterMismatch {
            left: encoder.n(),
            right: rho.n(),
        });
    }
    let cutoff = tol.convergence * lit::<R>(1e-3);
    let mut weight = (-t).exp();
    let mut accumulated = weight;
    let mut term = rho.matrix.clone();
    let mut out = &term * Complex::new(weight, R::zero());
    let mut j = R::zero();
    while R::one() - accumulated > cutoff {
        j += R::one();
        weight *= t / j;
        term = encoder.apply_matrix(&term);
        out += &term * Complex::new(weight, R::zero());
        accumulated += weight;
        if j > lit::<R>(1e6) {
            break;
        }
    }
    DensityMatrix::new(rho.n(), out)
}

/// Seeded random pure state (complex normal amplitudes, normalized).
pub fn random_state<R: Scalar>(
    n: usize,
    rng: &mut impl rand::Rng,
) -> Result<StateVector<R>, ChannelError> {
    ensure_qubits("state vector", n, MAX_STATE_QUBITS)?;
    let d = 1usize << n;
    let mut v = DVector::zeros(d);
    for a in 0..d {
        let re: f64 = rng.random::<f64>() * 2.0 - 1.0;
        let im: f64 = rng.random::<f64>() * 2.0 - 1.0;
        v[a] = Complex::new(lit::<R>(re), lit::<R>(im));
    }
    StateVector::new(n, v)?
        .normalized()
        .ok_or(ChannelError::Dimension {
            n,
            expected: d,
            found: 0,
        })
}

/// Seeded random mixed state: an even mixture of `rank` random pure states.
pub fn random_density<R: Scalar>(
    n: usize,
    rank: usize,
    rng: &mut impl rand::Rng,
) -> Result<DensityMatrix<R>, ChannelError> {
    ensure_qubits("density matrix", n, MAX_DENSE_QUBITS)?;
    let d = 1usize << n;
    let mut m = DMatrix::zeros(d, d);
    let w = Complex::new(R::one() / lit::<R>(rank.max(1) as f64), R::zero());
    for _ in 0..rank.max(1) {
        let psi = random_state::<R>(n, rng)?;
        m += psi.density().matrix * w;
    }
    DensityMatrix::new(n, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::pauli_from_string;

    fn p(s: &str) -> PauliOperator {
        pauli_from_string(s).unwrap()
    }

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    #[test]
    fn pauli_dense_matches_direct_action() {
        let op = p("iYXZ");
        let m = pauli_dense::<f64>(&op).unwrap();
        let psi = StateVector::<f64>::basis(3, 5).unwrap();
        let applied = psi.apply_pauli(&op).unwrap();
        let direct = &m * psi.amplitudes();
        for a in 0..8 {
            assert!((applied.amplitudes()[a] - direct[a]).norm() < 1e-15);
        }
    }

    #[test]
    fn single_qubit_encoding_map_pins_to_zero() {
        let phi = EncodingMap::new(p("Z"), p("X")).unwrap();
        for index in 0..2 {
            let rho = DensityMatrix::<f64>::basis(1, index).unwrap();
            let out = phi.apply(&rho).unwrap();
            let zero = DensityMatrix::<f64>::basis(1, 0).unwrap();
            assert!(out.max_abs_diff(&zero) < 1e-15, "input |{index}⟩");
        }
    }

    #[test]
    fn encoding_map_rejects_commuting_pair() {
        assert!(matches!(
            EncodingMap::new(p("ZZ"), p("XX")),
            Err(ChannelError::CommutingPair { .. })
        ));
    }

    #[test]
    fn encoding_map_is_trace_preserving() {
        let kraus = encoding_map::<f64>(&p("ZZI"), &p("IXI")).unwrap();
        assert!(kraus.trace_preservation_residual() < 1e-14);
        assert_eq!(kraus.kraus_list().len(), 2);
    }

    #[test]
    fn alternative_kraus_form_is_identical() {
        // C(I−S)/2 = (I+S)C/2 when {S, C} = 0.
        let s = pauli_dense::<f64>(&p("ZZI")).unwrap();
        let c = pauli_dense::<f64>(&p("IXI")).unwrap();
        let id = DMatrix::<Complex<f64>>::identity(8, 8);
        let lhs = &c * ((&id - &s) * Complex::new(0.5, 0.0));
        let rhs = ((&id + &s) * Complex::new(0.5, 0.0)) * &c;
        assert!(max_abs_diff(&lhs, &rhs) < 1e-15);
    }

    #[test]
    fn fast_apply_matches_kraus_apply() {
        use rand::SeedableRng;
        let phi = EncodingMap::new(p("YYZIZ"), p("ZIXIX")).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let rho = random_density::<f64>(5, 3, &mut rng).unwrap();
        let fast = phi.apply(&rho).unwrap();
        let dense = phi.kraus::<f64>().unwrap().apply(&rho).unwrap();
        assert!(fast.max_abs_diff(&dense) < 1e-13);
    }

    #[test]
    fn signed_stabilizer_projects_to_its_own_plus_sector() {
        // The +1 eigenspace of -ZZ is span{|01⟩, |10⟩}.
        let phi = EncodingMap::new(p("-ZZ"), p("XI")).unwrap();
        let rho = DensityMatrix::<f64>::basis(2, 0).unwrap();
        let out = phi.apply(&rho).unwrap();
        // |00⟩ is in the -1 sector, so it gets corrected by XI to |10⟩.
        let target = DensityMatrix::<f64>::basis(2, 2).unwrap();
        assert!(out.max_abs_diff(&target) < 1e-15);
        let expectation = out.expectation(&p("-ZZ")).unwrap().re;
        assert!((expectation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expectation_matches_trace() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let rho = random_density::<f64>(3, 2, &mut rng).unwrap();
        for op in ["XYZ", "-IZX", "iXII"] {
            let op = p(op);
            let dense = pauli_dense::<f64>(&op).unwrap();
            let trace = (&dense * rho.matrix()).trace();
            let fast = rho.expectation(&op).unwrap();
            assert!((trace - fast).norm() < 1e-13, "{op}");
        }
    }

    #[test]
    fn projector_rank_counts_codewords() {
        let gens = vec![p("ZZI"), p("IZZ")];
        let proj = projector_onto_code::<f64>(3, &gens).unwrap();
        let trace = proj.trace();
        assert!((trace.re - 2.0).abs() < 1e-13);
        // Π² = Π and Π† = Π.
        assert!(max_abs_diff(&(&proj * &proj), &proj) < 1e-13);
        assert!(max_abs_diff(&proj.adjoint(), &proj) < 1e-13);
        // |000⟩ and |111⟩ are fixed.
        for idx in [0usize, 7] {
            let v = StateVector::<f64>::basis(3, idx).unwrap();
            let pv = &proj * v.amplitudes();
            for a in 0..8 {
                assert!((pv[a] - v.amplitudes()[a]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn superoperator_matches_channel_action() {
        use rand::SeedableRng;
        let phi = EncodingMap::new(p("ZZ"), p("XI")).unwrap();
        let encoder = ComposedEncoder::new(2, vec![phi.clone()]).unwrap();
        let superop = encoder.superoperator::<f64>().unwrap();
        let kraus_superop = phi.kraus::<f64>().unwrap().superoperator().unwrap();
        assert!(superop.max_abs_diff(&kraus_superop) < 1e-14);

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let rho = random_density::<f64>(2, 2, &mut rng).unwrap();
        let via_matrix = superop.apply(&rho).unwrap();
        let direct = phi.apply(&rho).unwrap();
        assert!(via_matrix.max_abs_diff(&direct) < 1e-13);
    }

    #[test]
    fn trace_distance_matches_known_values() {
        let zero = DensityMatrix::<f64>::basis(1, 0).unwrap();
        let one = DensityMatrix::<f64>::basis(1, 1).unwrap();
        let plus = StateVector::<f64>::product(&[QubitState::Plus])
            .unwrap()
            .density();
        assert!(trace_distance(&zero, &zero).unwrap() < 1e-15);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-13);
        let expected = std::f64::consts::FRAC_1_SQRT_2;
        assert!((trace_distance(&zero, &plus).unwrap() - expected).abs() < 1e-13);
    }

    #[test]
    fn evolve_cde_rejects_negative_time() {
        let phi = EncodingMap::new(p("ZZ"), p("XI")).unwrap();
        let encoder = ComposedEncoder::new(2, vec![phi]).unwrap();
        let rho = DensityMatrix::<f64>::basis(2, 0).unwrap();
        assert!(matches!(
            evolve_cde(&encoder, &rho, -1.0, &tol()),
            Err(ChannelError::NegativeTime { .. })
        ));
    }

    #[test]
    fn evolve_cde_zero_time_is_identity() {
        let phi = EncodingMap::new(p("ZZ"), p("XI")).unwrap();
        let encoder = ComposedEncoder::new(2, vec![phi]).unwrap();
        let rho = DensityMatrix::<f64>::basis(2, 1).unwrap();
        let out = evolve_cde(&encoder, &rho, 0.0, &tol()).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-12);
    }

    #[test]
    fn embed_logical_places_factors_by_permutation() {
        // ZIZ on 3 qubits: the Z pivot lands on qubit 2, so uploads are
        // qubits 0 and 1 and the single gauge qubit is qubit 2.
        let code = crate::code::StabilizerCode::new("ziz", 3, vec![p("ZIZ")]).unwrap();
        let plan = crate::code::synthesize_plan(&code).unwrap();
        assert_eq!(plan.upload_qubits(), &[0, 1]);
        assert_eq!(plan.gauge_qubits(), &[2]);
        let rho_l = StateVector::<f64>::product(&[QubitState::Zero, QubitState::One])
            .unwrap()
            .density();
        let sigma = DensityMatrix::<f64>::basis(1, 0).unwrap();
        let embedded = embed_logical(&rho_l, &sigma, &plan).unwrap();
        let expected = DensityMatrix::<f64>::basis(3, 0b010).unwrap();
        assert!(embedded.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn dense_caps_are_enforced() {
        assert!(matches!(
            DensityMatrix::<f64>::maximally_mixed(MAX_DENSE_QUBITS + 1),
            Err(ChannelError::DenseLimit { .. })
        ));
        let phi = EncodingMap::new(p("ZZ"), p("XI")).unwrap();
        let enc = ComposedEncoder::new(2, vec![phi]).unwrap();
        assert!(enc.superoperator::<f64>().is_ok());
    }

    #[test]
    fn maximally_mixed_is_valid() {
        let rho = DensityMatrix::<f64>::maximally_mixed(3).unwrap();
        assert!(rho.is_valid(&tol()));
        let (h, t, neg) = rho.validity();
        assert!(h == 0.0 && t < 1e-15 && neg == 0.0);
    }
}
