//! Simulation and training of dissipative quantum neural networks built from
//! qubit perceptron unitaries.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix double precision, which is what the experiments use.

pub mod error;
pub mod experiments;
pub mod linalg;
pub mod network;
pub mod qcircuit;
pub mod trainer;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Real, C};

pub type Matrix = linalg::ComplexMatrix<f64>;
pub type State = linalg::PureState<f64>;
pub type Network64 = network::Network<f64>;
