//! Statevector simulation of the quantum training algorithm: fidelity by the
//! SWAP test, coherent execution of the network, and finite-difference
//! gradients over Pauli coefficients.

mod params;
mod resources;
mod statevector;

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::random::SeededRng;
use crate::linalg::PureState;
use crate::network::Network;
use crate::scalar::Real;
use crate::trainer::Dataset;

pub use params::{fd_ascent_step, fd_gradient, fd_gradient_vector, ParamVector};
pub use resources::{resource_count, ResourceCount};
pub use statevector::StateVector;

/// Largest register [`subroutine2_feedforward`] will allocate by default.
pub const DEFAULT_QUBIT_CAP: usize = 16;
/// Largest SWAP-test register (control, target copy and preparation).
pub const SWAP_TEST_QUBIT_CAP: usize = 22;

/// Outcome of a SWAP test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotResult {
    pub shots: u64,
    pub zeros: u64,
    /// Exact probability of reading 0 on the control qubit.
    pub p0_exact: f64,
    pub p0_estimate: f64,
    /// 2p̂₀ − 1, unbiased for the fidelity.
    pub fidelity_raw: f64,
    /// `fidelity_raw` clamped to [−1, 1].
    pub fidelity: f64,
}

/// p₀ of the SWAP test between |φ⟩ and the state the first m qubits of
/// `preparation` carry, where m is the size of |φ⟩.
pub fn swap_test_p0<T: Real>(phi: &PureState<T>, preparation: &StateVector<T>) -> Result<T> {
    let m = phi.n_qubits();
    if preparation.n_qubits() < m {
        return Err(Error::DimensionMismatch(format!(
            "preparation has {} qubits, the compared state needs {m}",
            preparation.n_qubits()
        )));
    }
    let total = 1 + m + preparation.n_qubits();
    if total > SWAP_TEST_QUBIT_CAP {
        return Err(Error::QubitCap { needed: total, cap: SWAP_TEST_QUBIT_CAP });
    }
    let mut reg = StateVector::zeros(1).tensor(&StateVector::from_state(phi)).tensor(preparation);
    let block_a: Vec<usize> = (1..=m).collect();
    let block_b: Vec<usize> = (m + 1..=2 * m).collect();
    reg.apply_hadamard(0)?;
    reg.apply_cswap(0, &block_a, &block_b)?;
    reg.apply_hadamard(0)?;
    Ok(reg.prob_zero(0).max(T::zero()).min(T::one()))
}

/// SWAP test with `shots` repetitions; the zero count is Binomial(shots, p₀).
pub fn swap_test<T: Real>(
    phi: &PureState<T>,
    preparation: &StateVector<T>,
    shots: u64,
    rng: &mut SeededRng,
) -> Result<ShotResult> {
    if shots == 0 {
        return Err(Error::InvalidArgument("swap test needs at least one shot".into()));
    }
    let p0 = swap_test_p0(phi, preparation)?.as_f64();
    let zeros = Binomial::new(shots, p0)
        .map_err(|e| Error::InvalidArgument(format!("binomial parameters: {e}")))?
        .sample(rng);
    let p0_estimate = zeros as f64 / shots as f64;
    let fidelity_raw = 2.0 * p0_estimate - 1.0;
    Ok(ShotResult {
        shots,
        zeros,
        p0_exact: p0,
        p0_estimate,
        fidelity_raw,
        fidelity: fidelity_raw.clamp(-1.0, 1.0),
    })
}

/// Runs every perceptron on one register holding all layers, keeping the
/// global pure state instead of tracing layers out.
pub fn subroutine2_feedforward<T: Real>(net: &Network<T>, input: &PureState<T>, cap: usize) -> Result<StateVector<T>> {
    let widths = net.topology().widths();
    if input.n_qubits() != widths[0] || input.dim() != 1 << widths[0] {
        return Err(Error::DimensionMismatch(format!("input of dimension {} for width {}", input.dim(), widths[0])));
    }
    let total = net.topology().total_qubits();
    if total > cap {
        return Err(Error::QubitCap { needed: total, cap });
    }
    let mut reg = StateVector::from_state(input).tensor(&StateVector::zeros(total - widths[0]));
    let starts = layer_starts(widths);
    for p in net.perceptrons() {
        let mut positions: Vec<usize> = (starts[p.layer - 1]..starts[p.layer]).collect();
        positions.push(starts[p.layer] + p.slot);
        reg.apply(&p.unitary, &positions)?;
    }
    Ok(reg)
}

fn layer_starts(widths: &[usize]) -> Vec<usize> {
    let mut starts = vec![0];
    for w in widths {
        starts.push(starts.last().expect("non-empty") + w);
    }
    starts
}

/// Output layer moved to the front of the global register.
pub fn output_first<T: Real>(net: &Network<T>, global: &StateVector<T>) -> Result<StateVector<T>> {
    let total = global.n_qubits();
    let m = net.topology().output_width();
    let order: Vec<usize> = (total - m..total).chain(0..total - m).collect();
    global.permute(&order)
}

/// How a SWAP test turns into a number.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    /// Use the exact p₀, the infinite-shot limit.
    Exact,
    Shots(u64),
}

/// Mean over pairs of 2p̂₀ − 1 from SWAP tests against the coherently
/// computed outputs. Pair x samples from `rng.split(x)`.
pub fn cost_from_sampling<T: Real>(net: &Network<T>, data: &Dataset<T>, sampling: Sampling, rng: &SeededRng) -> Result<f64> {
    let mut total = 0.0;
    for (x, pair) in data.pairs().iter().enumerate() {
        let global = subroutine2_feedforward(net, &pair.input, DEFAULT_QUBIT_CAP)?;
        let prep = output_first(net, &global)?;
        total += match sampling {
            Sampling::Exact => 2.0 * swap_test_p0(&pair.output, &prep)?.as_f64() - 1.0,
            Sampling::Shots(shots) => swap_test(&pair.output, &prep, shots, &mut rng.split(x as u64))?.fidelity_raw,
        };
    }
    Ok(total / data.len() as f64)
}
