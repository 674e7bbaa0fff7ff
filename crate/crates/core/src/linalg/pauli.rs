//! Single-qubit Pauli matrices and their tensor-product strings.

use super::matrix::ComplexMatrix;
use crate::scalar::{c, Real};

/// σ⁰ = I, σ¹ = X, σ² = Y, σ³ = Z.
pub fn pauli<T: Real>(k: usize) -> ComplexMatrix<T> {
    let (o, z) = (T::one(), T::zero());
    let rows = match k {
        0 => [[c(o, z), c(z, z)], [c(z, z), c(o, z)]],
        1 => [[c(z, z), c(o, z)], [c(o, z), c(z, z)]],
        2 => [[c(z, z), c(z, -o)], [c(z, o), c(z, z)]],
        3 => [[c(o, z), c(z, z)], [c(z, z), c(-o, z)]],
        _ => panic!("Pauli index {k} out of range"),
    };
    ComplexMatrix::from_fn(2, 2, |i, j| rows[i][j])
}

/// Tensor product of Paulis on `n` qubits. The base-4 digits of `index`
/// select the factors, most significant digit on qubit 0.
pub fn pauli_string<T: Real>(index: usize, n: usize) -> ComplexMatrix<T> {
    assert!(index < 1 << (2 * n), "Pauli string index out of range");
    let mut out = ComplexMatrix::identity(1);
    for q in 0..n {
        let digit = (index >> (2 * (n - 1 - q))) & 3;
        out = out.kron(&pauli(digit));
    }
    out
}
