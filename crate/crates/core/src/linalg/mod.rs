//! Dense complex linear algebra on qubit registers.

pub mod eigen;
pub mod matrix;
pub mod pauli;
pub mod qubits;
pub mod random;
pub mod state;

pub use eigen::{eigh, expm_i_hermitian, polar_unitary};
pub use matrix::{tensor, ComplexMatrix};
pub use pauli::{pauli, pauli_string};
pub use qubits::{embed, embed_positions, partial_trace, partial_trace_positions, QubitLabel, QubitLayout};
pub use random::{haar_random_state, haar_random_unitary, split_seed, SeededRng};
pub use state::{fidelity_pure, PureState};
