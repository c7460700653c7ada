//! Phase-tracked Pauli operators and their GF(2) check-matrix representation.
//!
//! An operator is stored as `i^phase · ∏_j X_j^{x_j} Z_j^{z_j}` with the
//! phase exponent kept mod 4. Commutation only depends on the bits; exact
//! phases matter when multiplying group elements (row operations on
//! generators, correction products) and are tracked through every operation.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::gf2::{gf2_solve, BitMatrix, BitVec, Gf2Error};

/// Errors from Pauli construction and algebra.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PauliError {
    #[error("empty Pauli string: need at least one of I, X, Y, Z")]
    EmptyString,
    #[error("invalid character {found:?} at position {position} in Pauli string")]
    InvalidCharacter { position: usize, found: char },
    #[error("qubit count mismatch: {left} vs {right}")]
    QubitMismatch { left: usize, right: usize },
    #[error("operator is not Hermitian (phase exponent {phase}, {y_count} Y factors)")]
    NotHermitian { phase: u8, y_count: usize },
    #[error("bit vectors have lengths {x_len}/{z_len}, expected {n} each")]
    BitLength { n: usize, x_len: usize, z_len: usize },
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },
    #[error("operator acts nontrivially on qubit {qubit}, outside the requested factor")]
    NotAFactor { qubit: usize },
}

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    fn bits(self) -> (bool, bool) {
        match self {
            PauliLetter::I => (false, false),
            PauliLetter::X => (true, false),
            PauliLetter::Y => (true, true),
            PauliLetter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliLetter::I,
            (true, false) => PauliLetter::X,
            (true, true) => PauliLetter::Y,
            (false, true) => PauliLetter::Z,
        }
    }

    fn to_char(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }
}

/// Phase-tracked n-qubit Pauli operator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    phase: u8,
    x: BitVec,
    z: BitVec,
}

impl PauliOperator {
    /// Identity on n qubits.
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            phase: 0,
            x: BitVec::zeros(n),
            z: BitVec::zeros(n),
        }
    }

    /// Construct from raw parts. `phase` is reduced mod 4.
    pub fn new(n: usize, x: BitVec, z: BitVec, phase: u8) -> Result<Self, PauliError> {
        if x.len() != n || z.len() != n {
            return Err(PauliError::BitLength {
                n,
                x_len: x.len(),
                z_len: z.len(),
            });
        }
        Ok(Self {
            n,
            phase: phase % 4,
            x,
            z,
        })
    }

    /// A single letter placed on one qubit of an n-qubit register, with the
    /// conventional +1 coefficient.
    pub fn single(n: usize, index: usize, letter: PauliLetter) -> Result<Self, PauliError> {
        if index >= n {
            return Err(PauliError::QubitOutOfRange { index, n });
        }
        let mut op = Self::identity(n);
        let (x, z) = letter.bits();
        op.x.set(index, x);
        op.z.set(index, z);
        if letter == PauliLetter::Y {
            op.phase = 1;
        }
        Ok(op)
    }

    /// Rebuild from a length-2n check vector (X-part | Z-part) with the
    /// conventional +1 coefficient.
    pub fn from_check_vector(n: usize, row: &BitVec) -> Result<Self, PauliError> {
        if row.len() != 2 * n {
            return Err(PauliError::BitLength {
                n,
                x_len: row.len(),
                z_len: row.len(),
            });
        }
        let mut x = BitVec::zeros(n);
        let mut z = BitVec::zeros(n);
        for i in row.iter_ones() {
            if i < n {
                x.set(i, true);
            } else {
                z.set(i - n, true);
            }
        }
        let phase = (x.iter_ones().filter(|&i| z.get(i)).count() % 4) as u8;
        Ok(Self { n, phase, x, z })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Exponent of i in the stored normal form, mod 4.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn x_bits(&self) -> &BitVec {
        &self.x
    }

    pub fn z_bits(&self) -> &BitVec {
        &self.z
    }

    pub fn letter_at(&self, qubit: usize) -> PauliLetter {
        PauliLetter::from_bits(self.x.get(qubit), self.z.get(qubit))
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> usize {
        (0..self.n)
            .filter(|&i| self.x.get(i) || self.z.get(i))
            .count()
    }

    /// Indices of qubits acted on non-trivially, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| self.x.get(i) || self.z.get(i))
            .collect()
    }

    fn y_count(&self) -> usize {
        self.x.iter_ones().filter(|&i| self.z.get(i)).count()
    }

    /// True when the letters are all I (any phase).
    pub fn is_identity_letters(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Exponent of i multiplying the plain letter string: 0, 1, 2, 3 stand
    /// for +1, i, −1, −i.
    pub fn coefficient_exponent(&self) -> u8 {
        (self.phase + 4 - (self.y_count() % 4) as u8) % 4
    }

    /// True when the operator equals its letter string with coefficient +1.
    pub fn is_plus_signed(&self) -> bool {
        self.coefficient_exponent() == 0
    }

    pub fn is_hermitian(&self) -> bool {
        self.coefficient_exponent() % 2 == 0
    }

    /// +1 or −1 for a Hermitian operator.
    pub fn sign(&self) -> Result<i8, PauliError> {
        match self.coefficient_exponent() {
            0 => Ok(1),
            2 => Ok(-1),
            _ => Err(PauliError::NotHermitian {
                phase: self.phase,
                y_count: self.y_count(),
            }),
        }
    }

    /// Product self · rhs with exact phase tracking.
    pub fn multiply(&self, rhs: &PauliOperator) -> Result<PauliOperator, PauliError> {
        if self.n != rhs.n {
            return Err(PauliError::QubitMismatch {
                left: self.n,
                right: rhs.n,
            });
        }
        // Normal-ordering X^{x2} past Z^{z1} contributes (−1)^{z1·x2}.
        let swaps = self.z.dot(&rhs.x);
        let mut x = self.x.clone();
        x.xor_assign(&rhs.x);
        let mut z = self.z.clone();
        z.xor_assign(&rhs.z);
        let phase = (self.phase + rhs.phase + if swaps { 2 } else { 0 }) % 4;
        Ok(PauliOperator {
            n: self.n,
            phase,
            x,
            z,
        })
    }

    /// Group inverse (equals the adjoint, since Paulis are unitary).
    pub fn inverse(&self) -> PauliOperator {
        let xz_overlap = if self.x.dot(&self.z) { 2 } else { 0 };
        PauliOperator {
            n: self.n,
            phase: (4 - self.phase + xz_overlap) % 4,
            x: self.x.clone(),
            z: self.z.clone(),
        }
    }

    /// Same letters, opposite overall sign.
    pub fn negated(&self) -> PauliOperator {
        PauliOperator {
            phase: (self.phase + 2) % 4,
            ..self.clone()
        }
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> Result<bool, PauliError> {
        if self.n != other.n {
            return Err(PauliError::QubitMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(!(self.x.dot(&other.z) ^ self.z.dot(&other.x)))
    }

    /// Length-2n row (X-part | Z-part) for check-matrix use. Phase is dropped.
    pub fn check_vector(&self) -> BitVec {
        self.x.concat(&self.z)
    }

    /// Embed into a larger register, sending qubit j to `positions[j]`.
    /// Positions must be distinct and in range; phase carries over.
    pub fn embed(&self, n_total: usize, positions: &[usize]) -> Result<PauliOperator, PauliError> {
        if positions.len() != self.n {
            return Err(PauliError::QubitMismatch {
                left: self.n,
                right: positions.len(),
            });
        }
        let mut out = PauliOperator::identity(n_total);
        out.phase = self.phase;
        let mut seen = vec![false; n_total];
        for (j, &p) in positions.iter().enumerate() {
            if p >= n_total || seen[p] {
                return Err(PauliError::QubitOutOfRange {
                    index: p,
                    n: n_total,
                });
            }
            seen[p] = true;
            out.x.set(p, self.x.get(j));
            out.z.set(p, self.z.get(j));
        }
        Ok(out)
    }

    /// Restriction to the listed qubits, re-normalized to coefficient +1.
    /// The caller is responsible for knowing that the complement acts
    /// trivially (or for handling the discarded factor separately).
    pub fn restrict(&self, positions: &[usize]) -> PauliOperator {
        let x = self.x.select(positions);
        let z = self.z.select(positions);
        let phase = (x.iter_ones().filter(|&i| z.get(i)).count() % 4) as u8;
        PauliOperator {
            n: positions.len(),
            phase,
            x,
            z,
        }
    }

    /// Restriction to the listed qubits, keeping the stored coefficient.
    /// Fails unless every qubit outside `positions` carries the identity,
    /// so that `self` really is a tensor factor on `positions`.
    pub fn restrict_signed(&self, positions: &[usize]) -> Result<PauliOperator, PauliError> {
        let mut kept = vec![false; self.n];
        for &p in positions {
            if p >= self.n {
                return Err(PauliError::QubitOutOfRange { index: p, n: self.n });
            }
            kept[p] = true;
        }
        for q in 0..self.n {
            if !kept[q] && (self.x.get(q) || self.z.get(q)) {
                return Err(PauliError::NotAFactor { qubit: q });
            }
        }
        Ok(PauliOperator {
            n: positions.len(),
            phase: self.phase,
            x: self.x.select(positions),
            z: self.z.select(positions),
        })
    }

    /// Relabel qubits: qubit j of self becomes qubit `map[j]` of the result.
    /// `map` must be a bijection on 0..n.
    pub fn relabel(&self, map: &[usize]) -> Result<PauliOperator, PauliError> {
        if map.len() != self.n {
            return Err(PauliError::QubitMismatch {
                left: self.n,
                right: map.len(),
            });
        }
        let mut out = PauliOperator::identity(self.n);
        out.phase = self.phase;
        let mut seen = vec![false; self.n];
        for (j, &t) in map.iter().enumerate() {
            if t >= self.n || seen[t] {
                return Err(PauliError::QubitOutOfRange { index: t, n: self.n });
            }
            seen[t] = true;
            out.x.set(t, self.x.get(j));
            out.z.set(t, self.z.get(j));
        }
        Ok(out)
    }

    /// Tensor product self ⊗ rhs (self on the lower qubit indices).
    pub fn tensor(&self, rhs: &PauliOperator) -> PauliOperator {
        PauliOperator {
            n: self.n + rhs.n,
            phase: (self.phase + rhs.phase) % 4,
            x: self.x.concat(&rhs.x),
            z: self.z.concat(&rhs.z),
        }
    }
}

/// Parse a Pauli string: optional sign prefix (+, -, i, +i, -i) followed by
/// one letter per qubit from {I, X, Y, Z}; the leftmost letter is qubit 0.
pub fn pauli_from_string(s: &str) -> Result<PauliOperator, PauliError> {
    let chars: Vec<char> = s.chars().collect();
    let mut pos = 0;
    let mut prefix: u8 = 0;
    if pos < chars.len() && (chars[pos] == '+' || chars[pos] == '-') {
        if chars[pos] == '-' {
            prefix = 2;
        }
        pos += 1;
    }
    if pos < chars.len() && chars[pos] == 'i' {
        prefix = (prefix + 1) % 4;
        pos += 1;
    }
    let letters = &chars[pos..];
    if letters.is_empty() {
        return Err(PauliError::EmptyString);
    }
    let mut x = BitVec::zeros(letters.len());
    let mut z = BitVec::zeros(letters.len());
    let mut phase = prefix;
    for (j, &c) in letters.iter().enumerate() {
        let letter = match c {
            'I' => PauliLetter::I,
            'X' => PauliLetter::X,
            'Y' => PauliLetter::Y,
            'Z' => PauliLetter::Z,
            _ => {
                return Err(PauliError::InvalidCharacter {
                    position: pos + j,
                    found: c,
                })
            }
        };
        let (xb, zb) = letter.bits();
        x.set(j, xb);
        z.set(j, zb);
        if letter == PauliLetter::Y {
            phase = (phase + 1) % 4;
        }
    }
    Ok(PauliOperator {
        n: letters.len(),
        phase,
        x,
        z,
    })
}

impl FromStr for PauliOperator {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        pauli_from_string(s)
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.coefficient_exponent() {
            0 => {}
            1 => write!(f, "i")?,
            2 => write!(f, "-")?,
            _ => write!(f, "-i")?,
        }
        for q in 0..self.n {
            write!(f, "{}", self.letter_at(q).to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Symplectic product u Λ vᵀ mod 2 with Λ = [[0, I], [I, 0]]: 0 iff the
/// corresponding Paulis commute.
pub fn symplectic_product(u: &BitVec, v: &BitVec) -> Result<bool, Gf2Error> {
    if u.len() != v.len() {
        return Err(Gf2Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    if u.len() % 2 != 0 {
        return Err(Gf2Error::OddLength { len: u.len() });
    }
    let n = u.len() / 2;
    let idx_x: Vec<usize> = (0..n).collect();
    let idx_z: Vec<usize> = (n..2 * n).collect();
    let ux = u.select(&idx_x);
    let uz = u.select(&idx_z);
    let vx = v.select(&idx_x);
    let vz = v.select(&idx_z);
    Ok(ux.dot(&vz) ^ uz.dot(&vx))
}

/// Check matrix: one length-2n row (X-part | Z-part) per generator. Rows are
/// bit patterns only; signs live on the operators they came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckMatrix {
    n: usize,
    rows: Vec<BitVec>,
}

impl CheckMatrix {
    pub fn new(n: usize) -> Self {
        Self { n, rows: Vec::new() }
    }

    pub fn from_paulis(n: usize, ops: &[PauliOperator]) -> Result<Self, PauliError> {
        let mut rows = Vec::with_capacity(ops.len());
        for op in ops {
            if op.n() != n {
                return Err(PauliError::QubitMismatch {
                    left: n,
                    right: op.n(),
                });
            }
            rows.push(op.check_vector());
        }
        Ok(Self { n, rows })
    }

    pub fn from_rows(n: usize, rows: Vec<BitVec>) -> Result<Self, Gf2Error> {
        for (i, r) in rows.iter().enumerate() {
            if r.len() != 2 * n {
                return Err(Gf2Error::RaggedRows {
                    row: i,
                    expected: 2 * n,
                    found: r.len(),
                });
            }
        }
        Ok(Self { n, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn push_row(&mut self, row: BitVec) -> Result<(), Gf2Error> {
        if row.len() != 2 * self.n {
            return Err(Gf2Error::RaggedRows {
                row: self.rows.len(),
                expected: 2 * self.n,
                found: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn to_bit_matrix(&self) -> BitMatrix {
        BitMatrix::from_rows(self.rows.clone(), 2 * self.n).expect("rows validated on entry")
    }

    pub fn rank(&self) -> usize {
        self.to_bit_matrix().rank()
    }

    /// Row i as a +1-coefficient Pauli operator.
    pub fn pauli(&self, i: usize) -> PauliOperator {
        PauliOperator::from_check_vector(self.n, &self.rows[i]).expect("row length invariant")
    }

    /// All rows as +1-coefficient Pauli operators.
    pub fn paulis(&self) -> Vec<PauliOperator> {
        (0..self.rows.len()).map(|i| self.pauli(i)).collect()
    }

    /// Matrix of symplectic products: entry (i, j) = row_i(self) Λ row_j(other).
    pub fn lambda_product(&self, other: &CheckMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.n != other.n {
            return Err(Gf2Error::LengthMismatch {
                left: 2 * self.n,
                right: 2 * other.n,
            });
        }
        let mut out = BitMatrix::zeros(self.rows.len(), other.rows.len());
        for (i, u) in self.rows.iter().enumerate() {
            for (j, v) in other.rows.iter().enumerate() {
                if symplectic_product(u, v)? {
                    out.set(i, j, true);
                }
            }
        }
        Ok(out)
    }
}

/// Solve M Λ x = e over GF(2) for a check matrix with independent rows.
///
/// Deterministic (lowest-index pivots, free variables zero). Errors if the
/// rows are dependent or the system is inconsistent, reporting the rank
/// defect; post-solution consistency is re-checked in test builds.
pub fn solve_symplectic(m: &CheckMatrix, e: &BitVec) -> Result<BitVec, Gf2Error> {
    if e.len() != m.nrows() {
        return Err(Gf2Error::LengthMismatch {
            left: m.nrows(),
            right: e.len(),
        });
    }
    let n = m.n();
    // Row u of M contributes the equation (u Λ) · x = e, and u Λ just swaps
    // the X and Z halves of u.
    let swapped: Vec<BitVec> = m
        .rows()
        .iter()
        .map(|u| {
            let idx: Vec<usize> = (n..2 * n).chain(0..n).collect();
            u.select(&idx)
        })
        .collect();
    let a = BitMatrix::from_rows(swapped, 2 * n).expect("row lengths preserved");
    let rank = a.rank();
    if rank < m.nrows() {
        return Err(Gf2Error::NoSolution {
            rank,
            rank_defect: m.nrows() - rank,
        });
    }
    let x = gf2_solve(&a, e)?;
    #[cfg(debug_assertions)]
    for (i, u) in m.rows().iter().enumerate() {
        debug_assert_eq!(
            symplectic_product(u, &x).expect("lengths checked"),
            e.get(i),
            "solve_symplectic post-check failed on row {i}"
        );
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliOperator {
        pauli_from_string(s).unwrap()
    }

    #[test]
    fn parse_basic_strings() {
        let zzi = p("ZZI");
        assert_eq!(zzi.n(), 3);
        assert_eq!(zzi.phase(), 0);
        assert!(!zzi.x_bits().get(0));
        assert!(zzi.z_bits().get(0));
        assert!(zzi.z_bits().get(1));
        assert!(!zzi.z_bits().get(2));

        assert_eq!(p("III"), PauliOperator::identity(3));
        assert_eq!(p("+XI").to_string(), "XI");
        assert_eq!(p("-Y").to_string(), "-Y");
        assert_eq!(p("iZ").to_string(), "iZ");
        assert_eq!(p("-iX").to_string(), "-iX");
    }

    #[test]
    fn parse_errors_name_position() {
        assert_eq!(pauli_from_string(""), Err(PauliError::EmptyString));
        assert_eq!(pauli_from_string("-i"), Err(PauliError::EmptyString));
        assert_eq!(
            pauli_from_string("XQZ"),
            Err(PauliError::InvalidCharacter {
                position: 1,
                found: 'Q'
            })
        );
        assert_eq!(
            pauli_from_string("-XaZ"),
            Err(PauliError::InvalidCharacter {
                position: 2,
                found: 'a'
            })
        );
    }

    #[test]
    fn y_is_i_times_xz() {
        let y = p("Y");
        assert_eq!(y.phase(), 1);
        assert!(y.x_bits().get(0));
        assert!(y.z_bits().get(0));
        assert!(y.is_hermitian());
        assert!(y.is_plus_signed());
    }

    #[test]
    fn multiplication_phases() {
        let x = p("X");
        let z = p("Z");
        // X · Z = −i Y.
        let xz = x.multiply(&z).unwrap();
        assert_eq!(xz.to_string(), "-iY");
        // Z · X = i Y.
        let zx = z.multiply(&x).unwrap();
        assert_eq!(zx.to_string(), "iY");
        // (ZZI)·(IZZ) = ZIZ with coefficient +1.
        let s = p("ZZI").multiply(&p("IZZ")).unwrap();
        assert_eq!(s.to_string(), "ZIZ");
        // XX · YY = −ZZ: the sign tracking that row reduction relies on.
        let q = p("XX").multiply(&p("YY")).unwrap();
        assert_eq!(q.to_string(), "-ZZ");
    }

    #[test]
    fn identity_and_inverse() {
        for s in ["XIZY", "-YZXX", "iXYZI"] {
            let op = p(s);
            let id = op.multiply(&op.inverse()).unwrap();
            assert_eq!(id, PauliOperator::identity(op.n()));
            let again = op.multiply(&PauliOperator::identity(op.n())).unwrap();
            assert_eq!(again, op);
        }
    }

    #[test]
    fn associativity_spot_checks() {
        let a = p("XYZI");
        let b = p("-ZZXY");
        let c = p("iYIXZ");
        let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn hermitian_and_sign() {
        assert_eq!(p("ZZ").sign().unwrap(), 1);
        assert_eq!(p("-ZZ").sign().unwrap(), -1);
        assert_eq!(p("YY").sign().unwrap(), 1);
        let xz = p("X").multiply(&p("Z")).unwrap(); // equals −iY
        assert!(!xz.is_plus_signed());
        assert!(!xz.is_hermitian());
        assert!(xz.sign().is_err());
    }

    #[test]
    fn commutation_via_symplectic() {
        let zzi = p("ZZI");
        let izz = p("IZZ");
        assert!(zzi.commutes_with(&izz).unwrap());
        assert!(!p("X").commutes_with(&p("Z")).unwrap());
        assert!(!symplectic_product(&zzi.check_vector(), &izz.check_vector()).unwrap());
        assert!(symplectic_product(&p("X").check_vector(), &p("Z").check_vector()).unwrap());
        // u Λ uᵀ = 0 always.
        for s in ["XYZ", "ZIY", "XXX"] {
            let v = p(s).check_vector();
            assert!(!symplectic_product(&v, &v).unwrap());
        }
    }

    #[test]
    fn weight_support_letters() {
        let op = p("IXYZI");
        assert_eq!(op.weight(), 3);
        assert_eq!(op.support(), vec![1, 2, 3]);
        assert_eq!(op.letter_at(0), PauliLetter::I);
        assert_eq!(op.letter_at(2), PauliLetter::Y);
        assert_eq!(op.letter_at(3), PauliLetter::Z);
    }

    #[test]
    fn embed_restrict_relabel() {
        let op = p("XZ");
        let emb = op.embed(4, &[3, 1]).unwrap();
        assert_eq!(emb.to_string(), "IZIX");
        let back = emb.restrict(&[3, 1]);
        assert_eq!(back, op);

        let y = p("YI");
        let moved = y.relabel(&[1, 0]).unwrap();
        assert_eq!(moved.to_string(), "IY");

        assert!(op.embed(4, &[0, 0]).is_err());
        assert!(op.embed(1, &[0, 1]).is_err());
    }

    #[test]
    fn tensor_products() {
        let a = p("Y");
        let b = p("-XZ");
        assert_eq!(a.tensor(&b).to_string(), "-YXZ");
    }

    #[test]
    fn check_vector_round_trip() {
        for s in ["XYZI", "ZZZZ", "IYIY"] {
            let op = p(s);
            let rebuilt = PauliOperator::from_check_vector(op.n(), &op.check_vector()).unwrap();
            assert_eq!(rebuilt, op, "round trip for {s}");
        }
    }

    #[test]
    fn solve_symplectic_repetition_example() {
        // Stacked rows: S1 = ZZI, S2 = ZIZ, Z-logical = ZII, X-logical = XXX.
        let rows = ["ZZI", "ZIZ", "ZII", "XXX"];
        let ops: Vec<PauliOperator> = rows.iter().map(|s| p(s)).collect();
        let m = CheckMatrix::from_paulis(3, &ops).unwrap();
        let e = BitVec::from_bools(&[true, false, false, false]);
        let x = solve_symplectic(&m, &e).unwrap();
        let c1 = PauliOperator::from_check_vector(3, &x).unwrap();
        assert_eq!(c1.to_string(), "IXI");
    }

    #[test]
    fn solve_symplectic_zero_rhs() {
        let ops = vec![p("ZZI"), p("ZIZ")];
        let m = CheckMatrix::from_paulis(3, &ops).unwrap();
        let e = BitVec::zeros(2);
        let x = solve_symplectic(&m, &e).unwrap();
        assert!(x.is_zero());
    }

    #[test]
    fn solve_symplectic_rejects_dependent_rows() {
        let ops = vec![p("ZZI"), p("ZZI")];
        let m = CheckMatrix::from_paulis(3, &ops).unwrap();
        let e = BitVec::from_bools(&[true, false]);
        match solve_symplectic(&m, &e) {
            Err(Gf2Error::NoSolution { rank_defect, .. }) => assert_eq!(rank_defect, 1),
            other => panic!("expected NoSolution, got {other:?}"),
        }
    }

    #[test]
    fn lambda_product_matrix() {
        let s = CheckMatrix::from_paulis(3, &[p("ZZI"), p("ZIZ")]).unwrap();
        let logicals = CheckMatrix::from_paulis(3, &[p("ZII"), p("XXX")]).unwrap();
        let prod = s.lambda_product(&logicals).unwrap();
        assert!(prod.is_zero());
        let pair = logicals.lambda_product(&logicals).unwrap();
        assert!(pair.get(0, 1));
        assert!(pair.get(1, 0));
        assert!(!pair.get(0, 0));
    }
}
