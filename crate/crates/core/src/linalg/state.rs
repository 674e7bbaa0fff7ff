use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::{cr, Real, C};

/// Normalised pure state on a register of qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState<T> {
    amps: Vec<C<T>>,
}

impl<T: Real> PureState<T> {
    /// Accepts `amps` only if its length is a power of two and its norm is 1 ± 1e-10.
    pub fn new(amps: Vec<C<T>>) -> Result<Self> {
        check_dim(amps.len())?;
        let norm = norm_of(&amps);
        if (norm - T::one()).abs() > T::tolerance(1e-10) {
            return Err(Error::InvalidArgument(format!("state norm is {norm}, expected 1")));
        }
        Ok(Self { amps })
    }

    /// Rescales `amps` to unit norm. Panics on a zero vector.
    pub fn normalized(amps: Vec<C<T>>) -> Self {
        let norm = norm_of(&amps);
        assert!(norm > T::zero(), "cannot normalise the zero vector");
        Self {
            amps: amps.into_iter().map(|z| z / norm).collect(),
        }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} outside dimension {dim}");
        let mut amps = vec![C::new(T::zero(), T::zero()); dim];
        amps[index] = cr(T::one());
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amps
    }

    pub fn norm(&self) -> T {
        norm_of(&self.amps)
    }

    /// |ψ⟩⟨ψ|
    pub fn projector(&self) -> ComplexMatrix<T> {
        ComplexMatrix::outer(&self.amps, &self.amps)
    }

    /// U|ψ⟩, renormalised to absorb roundoff.
    pub fn evolve(&self, u: &ComplexMatrix<T>) -> Result<Self> {
        if u.cols() != self.dim() || !u.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operator on a state of dimension {}",
                u.rows(),
                u.cols(),
                self.dim()
            )));
        }
        Ok(Self::normalized(u.apply(&self.amps)))
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Self) -> C<T> {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * *b).sum()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::DimensionMismatch(format!("state dimension {dim} is not a power of two")));
    }
    Ok(())
}

fn norm_of<T: Real>(amps: &[C<T>]) -> T {
    amps.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// ⟨φ|ρ|φ⟩ clamped to [0, 1].
pub fn fidelity_pure<T: Real>(phi: &PureState<T>, rho: &ComplexMatrix<T>) -> Result<T> {
    if !rho.is_square() || rho.rows() != phi.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} against a {}x{} density matrix",
            phi.dim(),
            rho.rows(),
            rho.cols()
        )));
    }
    let f = expectation(phi, rho).re;
    debug_assert!(
        f > -T::tolerance(1e-9) && f < T::one() + T::tolerance(1e-9),
        "fidelity {f} outside [0, 1]"
    );
    Ok(f.max(T::zero()).min(T::one()))
}

/// ⟨φ|A|φ⟩ for any square A of matching dimension.
pub(crate) fn expectation<T: Real>(phi: &PureState<T>, a: &ComplexMatrix<T>) -> C<T> {
    let a_phi = a.apply(phi.amplitudes());
    phi.amplitudes().iter().zip(&a_phi).map(|(x, y)| x.conj() * *y).sum()
}
