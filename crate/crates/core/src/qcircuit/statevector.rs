use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::qubits::{apply_left_raw, SubsystemIndex};
use crate::linalg::{ComplexMatrix, PureState};
use crate::scalar::{cr, Real, C};

/// Pure state of an `n`-qubit register; qubit 0 is the most significant bit.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T> {
    n_qubits: usize,
    amps: Vec<C<T>>,
}

impl<T: Real> StateVector<T> {
    /// |0…0⟩ on `n` qubits.
    pub fn zeros(n_qubits: usize) -> Self {
        let mut amps = vec![C::zero(); 1 << n_qubits];
        amps[0] = cr(T::one());
        Self { n_qubits, amps }
    }

    pub fn from_state(s: &PureState<T>) -> Self {
        Self {
            n_qubits: s.n_qubits(),
            amps: s.amplitudes().to_vec(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amps
    }

    pub fn norm(&self) -> T {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// self ⊗ other, with `self` on the most significant qubits.
    pub fn tensor(&self, other: &Self) -> Self {
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| *a * *b))
            .collect();
        Self {
            n_qubits: self.n_qubits + other.n_qubits,
            amps,
        }
    }

    /// Applies `op` to the qubits at `positions` (first position most significant).
    pub fn apply(&mut self, op: &ComplexMatrix<T>, positions: &[usize]) -> Result<()> {
        if op.qubits() != Some(positions.len()) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operator on {} qubits",
                op.rows(),
                op.cols(),
                positions.len()
            )));
        }
        let index = SubsystemIndex::new(self.n_qubits, positions)?;
        apply_left_raw(op, &index, 1, &mut self.amps);
        Ok(())
    }

    pub fn apply_hadamard(&mut self, qubit: usize) -> Result<()> {
        let s = T::FRAC_1_SQRT_2();
        let h = ComplexMatrix::from_fn(2, 2, |i, j| cr(if i == 1 && j == 1 { -s } else { s }));
        self.apply(&h, &[qubit])
    }

    /// Controlled exchange of two equal-size, disjoint blocks of qubits.
    pub fn apply_cswap(&mut self, control: usize, block_a: &[usize], block_b: &[usize]) -> Result<()> {
        if block_a.len() != block_b.len() {
            return Err(Error::InvalidSubsystem("swapped blocks differ in size".into()));
        }
        let mut all = vec![control];
        all.extend_from_slice(block_a);
        all.extend_from_slice(block_b);
        SubsystemIndex::new(self.n_qubits, &all)?;
        let bit = |p: usize| 1usize << (self.n_qubits - 1 - p);
        let cbit = bit(control);
        for i in 0..self.amps.len() {
            if i & cbit == 0 {
                continue;
            }
            let mut j = i;
            for (&a, &b) in block_a.iter().zip(block_b) {
                let (ba, bb) = (bit(a), bit(b));
                let (xa, xb) = (i & ba != 0, i & bb != 0);
                if xa != xb {
                    j ^= ba | bb;
                }
            }
            if j > i {
                self.amps.swap(i, j);
            }
        }
        Ok(())
    }

    /// Probability that measuring `qubit` gives 0.
    pub fn prob_zero(&self, qubit: usize) -> T {
        let b = 1usize << (self.n_qubits - 1 - qubit);
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & b == 0)
            .map(|(_, z)| z.norm_sqr())
            .sum()
    }

    /// Reduced density matrix on `keep`, ordered as given.
    pub fn reduced_density(&self, keep: &[usize]) -> Result<ComplexMatrix<T>> {
        let index = SubsystemIndex::new(self.n_qubits, keep)?;
        let k = index.local.len();
        let mut out = ComplexMatrix::zeros(k, k);
        for (a, &oa) in index.local.iter().enumerate() {
            for (b, &ob) in index.local.iter().enumerate() {
                out[(a, b)] = index
                    .rest
                    .iter()
                    .map(|&r| self.amps[oa + r] * self.amps[ob + r].conj())
                    .sum();
            }
        }
        Ok(out)
    }

    /// Reorders qubits so that new qubit i is old qubit `order[i]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n_qubits {
            return Err(Error::InvalidSubsystem("permutation must list every qubit".into()));
        }
        let index = SubsystemIndex::new(self.n_qubits, order)?;
        let amps = index.local.iter().map(|&old| self.amps[old]).collect();
        Ok(Self {
            n_qubits: self.n_qubits,
            amps,
        })
    }
}
