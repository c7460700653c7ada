//! Packed GF(2) vectors and matrices, Gaussian elimination with operation
//! records, and linear solving.
//!
//! Everything here is exact bit arithmetic. Row reduction uses deterministic
//! lowest-index pivot selection so that synthesized operators are reproducible
//! across runs, and solutions returned by [`gf2_solve`] set all free variables
//! to zero for the same reason.

use std::fmt;

use thiserror::Error;

const WORD_BITS: usize = 64;

/// Errors from GF(2) vector and matrix operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("bit-vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("vector length {len} is not even")]
    OddLength { len: usize },
    #[error("matrix rows must all have length {expected}, row {row} has {found}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("no solution: system is inconsistent (coefficient rank {rank}, rank defect {rank_defect})")]
    NoSolution { rank: usize, rank_defect: usize },
}

/// Packed vector over GF(2).
///
/// Bits beyond `len` in the last word are kept zero, so equality and hashing
/// on the raw words are well defined.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(WORD_BITS)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Unit vector e_i of the given length.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    /// In-place XOR with another vector of the same length.
    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w ^= o;
        }
    }

    /// Parity of the AND of two vectors: the GF(2) dot product.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "dot of unequal lengths");
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Index of the lowest set bit, if any.
    pub fn first_one(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(wi * WORD_BITS + w.trailing_zeros() as usize);
            }
        }
        None
    }

    /// Iterate indices of set bits in increasing order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let bit = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(wi * WORD_BITS + bit)
                }
            })
        })
    }

    /// Copy of the sub-vector at the given indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> BitVec {
        let mut out = BitVec::zeros(indices.len());
        for (new, &old) in indices.iter().enumerate() {
            out.set(new, self.get(old));
        }
        out
    }

    /// Concatenation self ++ other.
    pub fn concat(&self, other: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.len + other.len);
        for i in self.iter_ones() {
            out.set(i, true);
        }
        for i in other.iter_ones() {
            out.set(self.len + i, true);
        }
        out
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Dense bit matrix stored as a list of equal-length rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVec>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BitVec::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Build from rows; `cols` disambiguates the empty-matrix case.
    pub fn from_rows(rows: Vec<BitVec>, cols: usize) -> Result<Self, Gf2Error> {
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Gf2Error::RaggedRows {
                    row: i,
                    expected: cols,
                    found: r.len(),
                });
            }
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows,
        })
    }

    pub fn from_bools(rows: &[&[bool]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self {
            rows: rows.len(),
            cols,
            data: rows.iter().map(|r| BitVec::from_bools(r)).collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.data[r].set(c, value);
    }

    pub fn row(&self, r: usize) -> &BitVec {
        &self.data[r]
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &BitVec> {
        self.data.iter()
    }

    pub fn push_row(&mut self, row: BitVec) {
        assert_eq!(row.len(), self.cols, "pushed row has wrong length");
        self.data.push(row);
        self.rows += 1;
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.data[r].iter_ones() {
                out.set(c, r, true);
            }
        }
        out
    }

    /// GF(2) matrix product.
    pub fn mul(&self, rhs: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in GF(2) product");
        let rhs_t = rhs.transpose();
        let mut out = BitMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for c in 0..rhs.cols {
                if self.data[r].dot(rhs_t.row(c)) {
                    out.set(r, c, true);
                }
            }
        }
        out
    }

    /// Stack `other` below `self`.
    pub fn vstack(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.cols, "vstack column mismatch");
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        BitMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Place `other` to the right of `self`.
    pub fn hstack(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.rows, other.rows, "hstack row mismatch");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.concat(b))
            .collect();
        BitMatrix {
            rows: self.rows,
            cols: self.cols + other.cols,
            data,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(BitVec::is_zero)
    }

    pub fn rank(&self) -> usize {
        gf2_row_reduce(self).rank
    }

    /// Submatrix with the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> BitMatrix {
        let data = rows.iter().map(|&r| self.data[r].select(cols)).collect();
        BitMatrix {
            rows: rows.len(),
            cols: cols.len(),
            data,
        }
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in &self.data {
            writeln!(f, "  {r:?}")?;
        }
        write!(f, "]")
    }
}

/// One elementary row operation, recorded during elimination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOp {
    Swap(usize, usize),
    /// Row `dst` ^= row `src`.
    AddInto { src: usize, dst: usize },
}

impl RowOp {
    pub fn apply(&self, m: &mut BitMatrix) {
        match *self {
            RowOp::Swap(a, b) => m.data.swap(a, b),
            RowOp::AddInto { src, dst } => {
                assert_ne!(src, dst);
                let (s, d) = if src < dst {
                    let (head, tail) = m.data.split_at_mut(dst);
                    (&head[src], &mut tail[0])
                } else {
                    let (head, tail) = m.data.split_at_mut(src);
                    (&tail[0], &mut head[dst])
                };
                d.xor_assign(s);
            }
        }
    }
}

/// Result of [`gf2_row_reduce`]: reduced matrix plus enough bookkeeping to
/// replay the reduction on parallel data or undo column swaps.
#[derive(Debug, Clone)]
pub struct RowReduction {
    pub matrix: BitMatrix,
    pub rank: usize,
    /// Pivot column (in original column labels) of each of the first `rank` rows.
    pub pivot_cols: Vec<usize>,
    pub row_ops: Vec<RowOp>,
    /// Column swaps applied after reduction, in application order.
    pub col_swaps: Vec<(usize, usize)>,
}

fn rref_in_place(m: &mut BitMatrix, row_ops: &mut Vec<RowOp>) -> Vec<usize> {
    let mut pivot_cols = Vec::new();
    let mut next_row = 0;
    for col in 0..m.cols {
        let Some(pivot) = (next_row..m.rows).find(|&r| m.get(r, col)) else {
            continue;
        };
        if pivot != next_row {
            let op = RowOp::Swap(pivot, next_row);
            op.apply(m);
            row_ops.push(op);
        }
        for r in 0..m.rows {
            if r != next_row && m.get(r, col) {
                let op = RowOp::AddInto {
                    src: next_row,
                    dst: r,
                };
                op.apply(m);
                row_ops.push(op);
            }
        }
        pivot_cols.push(col);
        next_row += 1;
        if next_row == m.rows {
            break;
        }
    }
    pivot_cols
}

/// Reduced row-echelon form over GF(2) with lowest-index pivot selection.
///
/// No column swaps are performed; `col_swaps` is returned empty.
pub fn gf2_row_reduce(m: &BitMatrix) -> RowReduction {
    let mut matrix = m.clone();
    let mut row_ops = Vec::new();
    let pivot_cols = rref_in_place(&mut matrix, &mut row_ops);
    RowReduction {
        rank: pivot_cols.len(),
        matrix,
        pivot_cols,
        row_ops,
        col_swaps: Vec::new(),
    }
}

/// Like [`gf2_row_reduce`], then swaps columns so that pivot `i` lands in
/// column `i`, leaving an identity block in the top-left corner. The swaps
/// are recorded so callers can map columns back to original labels.
pub fn gf2_row_reduce_packed(m: &BitMatrix) -> RowReduction {
    let mut red = gf2_row_reduce(m);
    let mut col_of = (0..red.matrix.cols).collect::<Vec<_>>();
    for (i, &target) in red.pivot_cols.iter().enumerate() {
        // Current position of the original pivot column.
        let cur = col_of.iter().position(|&c| c == target).unwrap();
        if cur != i {
            for row in &mut red.matrix.data {
                let a = row.get(cur);
                let b = row.get(i);
                row.set(cur, b);
                row.set(i, a);
            }
            col_of.swap(cur, i);
            red.col_swaps.push((cur, i));
        }
    }
    red
}

/// Solve `a · x = rhs` over GF(2).
///
/// Deterministic: elimination picks the lowest-index pivot in each column and
/// all free variables are set to zero. Returns [`Gf2Error::NoSolution`] when
/// the system is inconsistent, reporting the coefficient rank and the number
/// of rows that are not spanned.
pub fn gf2_solve(a: &BitMatrix, rhs: &BitVec) -> Result<BitVec, Gf2Error> {
    if rhs.len() != a.rows {
        return Err(Gf2Error::LengthMismatch {
            left: a.rows,
            right: rhs.len(),
        });
    }
    let rhs_col = a.cols;
    let widened = a
        .data
        .iter()
        .enumerate()
        .map(|(r, row)| {
            let mut w = BitVec::zeros(a.cols + 1);
            for i in row.iter_ones() {
                w.set(i, true);
            }
            w.set(rhs_col, rhs.get(r));
            w
        })
        .collect();
    let mut aug = BitMatrix {
        rows: a.rows,
        cols: a.cols + 1,
        data: widened,
    };

    let mut next_row = 0;
    let mut pivot_cols = Vec::new();
    for col in 0..a.cols {
        let Some(pivot) = (next_row..aug.rows).find(|&r| aug.get(r, col)) else {
            continue;
        };
        if pivot != next_row {
            RowOp::Swap(pivot, next_row).apply(&mut aug);
        }
        for r in 0..aug.rows {
            if r != next_row && aug.get(r, col) {
                RowOp::AddInto {
                    src: next_row,
                    dst: r,
                }
                .apply(&mut aug);
            }
        }
        pivot_cols.push(col);
        next_row += 1;
        if next_row == aug.rows {
            break;
        }
    }
    let rank = pivot_cols.len();
    let inconsistent_rows = (rank..aug.rows).filter(|&r| aug.get(r, rhs_col)).count();
    if inconsistent_rows > 0 {
        return Err(Gf2Error::NoSolution {
            rank,
            rank_defect: inconsistent_rows,
        });
    }
    let mut x = BitVec::zeros(a.cols);
    for (row, &col) in pivot_cols.iter().enumerate() {
        x.set(col, aug.get(row, rhs_col));
    }
    Ok(x)
}

/// Does `v` lie in the row span of `m`?
pub fn in_row_span(m: &BitMatrix, v: &BitVec) -> bool {
    gf2_solve(&m.transpose(), v).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitvec_basics() {
        let mut v = BitVec::zeros(130);
        assert!(v.is_zero());
        v.set(0, true);
        v.set(64, true);
        v.set(129, true);
        assert_eq!(v.count_ones(), 3);
        assert_eq!(v.iter_ones().collect::<Vec<_>>(), vec![0, 64, 129]);
        assert_eq!(v.first_one(), Some(0));
        v.set(0, false);
        assert_eq!(v.first_one(), Some(64));
    }

    #[test]
    fn dot_is_and_parity() {
        let a = BitVec::from_bools(&[true, true, false, true]);
        let b = BitVec::from_bools(&[true, false, true, true]);
        // AND = 1001, parity 0.
        assert!(!a.dot(&b));
        let c = BitVec::from_bools(&[true, false, false, false]);
        assert!(a.dot(&c));
    }

    #[test]
    fn rank_examples() {
        let m = BitMatrix::from_bools(&[&[true, true, false], &[false, true, true]]);
        assert_eq!(m.rank(), 2);
        assert_eq!(BitMatrix::zeros(3, 4).rank(), 0);
    }

    #[test]
    fn rref_is_canonical() {
        let m = BitMatrix::from_bools(&[
            &[true, true, true, false],
            &[true, true, false, true],
            &[false, false, true, true],
        ]);
        let red = gf2_row_reduce(&m);
        assert_eq!(red.rank, 2);
        assert_eq!(red.pivot_cols, vec![0, 2]);
        // Pivot columns contain exactly one 1.
        for (row, &col) in red.pivot_cols.iter().enumerate() {
            for r in 0..red.matrix.nrows() {
                assert_eq!(red.matrix.get(r, col), r == row);
            }
        }
    }

    #[test]
    fn row_ops_replay_reduction() {
        let m = BitMatrix::from_bools(&[
            &[true, false, true, true],
            &[true, true, true, false],
            &[false, true, false, true],
        ]);
        let red = gf2_row_reduce(&m);
        let mut replay = m.clone();
        for op in &red.row_ops {
            op.apply(&mut replay);
        }
        assert_eq!(replay, red.matrix);
    }

    #[test]
    fn packed_reduction_has_identity_block() {
        let m = BitMatrix::from_bools(&[
            &[false, true, true, false],
            &[false, true, false, true],
        ]);
        let red = gf2_row_reduce_packed(&m);
        assert_eq!(red.rank, 2);
        for i in 0..red.rank {
            for r in 0..red.matrix.nrows() {
                assert_eq!(red.matrix.get(r, i), r == i);
            }
        }
        assert!(!red.col_swaps.is_empty());
    }

    #[test]
    fn solve_round_trip() {
        let a = BitMatrix::from_bools(&[
            &[true, true, false],
            &[false, true, true],
        ]);
        let rhs = BitVec::from_bools(&[true, false]);
        let x = gf2_solve(&a, &rhs).unwrap();
        // Re-check a·x = rhs.
        for r in 0..a.nrows() {
            assert_eq!(a.row(r).dot(&x), rhs.get(r));
        }
    }

    #[test]
    fn solve_free_variables_are_zero() {
        // x0 + x1 = 1 with x2 free: deterministic answer sets x0 from the
        // pivot and leaves x1, x2 at zero.
        let a = BitMatrix::from_bools(&[&[true, true, false]]);
        let rhs = BitVec::from_bools(&[true]);
        let x = gf2_solve(&a, &rhs).unwrap();
        assert_eq!(x, BitVec::from_bools(&[true, false, false]));
    }

    #[test]
    fn solve_reports_inconsistency() {
        let a = BitMatrix::from_bools(&[&[true, false], &[true, false]]);
        let rhs = BitVec::from_bools(&[true, false]);
        match gf2_solve(&a, &rhs) {
            Err(Gf2Error::NoSolution { rank, rank_defect }) => {
                assert_eq!(rank, 1);
                assert_eq!(rank_defect, 1);
            }
            other => panic!("expected NoSolution, got {other:?}"),
        }
    }

    #[test]
    fn span_membership() {
        let m = BitMatrix::from_bools(&[&[true, true, false], &[false, true, true]]);
        assert!(in_row_span(&m, &BitVec::from_bools(&[true, false, true])));
        assert!(!in_row_span(&m, &BitVec::from_bools(&[true, false, false])));
    }
}
