//! Shared helpers for integration tests: a brute-force dense-matrix oracle
//! for Pauli algebra, built by literal Kronecker products so it shares no
//! code path with the library.

#![allow(dead_code)]

use dissenc::PauliOperator;
use nalgebra::DMatrix;
use num_complex::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn mat_i() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])
}

pub fn mat_x() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn mat_y() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn mat_z() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// Dense matrix of a phase-tracked Pauli, straight from the definition
/// i^phase · ∏_j X^{x_j} Z^{z_j}. Qubit 0 is the leftmost letter and the
/// most significant bit of the basis index.
pub fn dense_oracle(p: &PauliOperator) -> DMatrix<Complex64> {
    let phase = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)][p.phase() as usize];
    let mut out = DMatrix::from_element(1, 1, phase);
    for q in 0..p.n() {
        let factor = match (p.x_bits().get(q), p.z_bits().get(q)) {
            (false, false) => mat_i(),
            (true, false) => mat_x(),
            (false, true) => mat_z(),
            (true, true) => &mat_x() * &mat_z(),
        };
        out = kron(&out, &factor);
    }
    out
}

pub fn mats_equal(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, tol: f64) -> bool {
    a.shape() == b.shape() && (a - b).iter().all(|e| e.norm() <= tol)
}

pub fn mats_commute(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> bool {
    mats_equal(&(a * b), &(b * a), 1e-12)
}
