//! Layer channels ℰˡ, their adjoints ℱˡ, and whole-network propagation.
//!
//! Both directions grow or shrink the working space one current-layer qubit
//! at a time. Perceptron j only needs layer l − 1 and current qubits 0..=j,
//! and the later qubits are still |0⟩, so the space never exceeds the
//! two-layer register and is usually much smaller.

use super::Network;
use crate::error::{Error, Result};
use crate::linalg::qubits::{conjugate_dagger_in_place, conjugate_in_place, partial_trace_positions, SubsystemIndex};
use crate::linalg::{ComplexMatrix, PureState};
use crate::scalar::Real;

/// x ⊗ |0⟩⟨0| on one extra least-significant qubit.
fn append_zero<T: Real>(x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let d = x.rows();
    let mut out = ComplexMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            out[(2 * i, 2 * j)] = x[(i, j)];
        }
    }
    out
}

/// (I ⊗ ⟨0|) x (I ⊗ |0⟩) on the least-significant qubit.
fn project_last_zero<T: Real>(x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let d = x.rows() / 2;
    ComplexMatrix::from_fn(d, d, |i, j| x[(2 * i, 2 * j)])
}

/// Positions touched by perceptron j in a space of `p + j + 1` qubits.
fn perceptron_positions(p: usize, j: usize) -> Vec<usize> {
    (0..p).chain(std::iter::once(p + j)).collect()
}

pub(crate) struct LayerForward<T> {
    pub output: ComplexMatrix<T>,
    /// After perceptron j: the state on layer l − 1 plus current qubits 0..=j.
    pub states: Vec<ComplexMatrix<T>>,
}

/// ℰˡ(ρ) with `us` the layer's perceptrons and `p` = m_{l−1}.
pub(crate) fn forward_layer<T: Real>(
    us: &[&ComplexMatrix<T>],
    p: usize,
    rho: &ComplexMatrix<T>,
    record: bool,
) -> LayerForward<T> {
    let m = us.len();
    let mut states = Vec::with_capacity(if record { m } else { 0 });
    let mut x = append_zero(rho);
    for (j, u) in us.iter().enumerate() {
        let index = SubsystemIndex::new(p + j + 1, &perceptron_positions(p, j)).expect("valid positions");
        conjugate_in_place(u, &index, &mut x);
        if record {
            states.push(x.clone());
        }
        if j + 1 < m {
            x = append_zero(&x);
        }
    }
    let keep: Vec<usize> = (p..p + m).collect();
    let output = partial_trace_positions(&x, p + m, &keep).expect("valid positions");
    LayerForward { output, states }
}

/// ℱˡ(σ), plus tr_{current 0..j−1}[Aⱼ, Yⱼ] for each perceptron when the
/// forward `states` are supplied. Yⱼ is σ pulled back through perceptrons
/// m−1..j+1 with their fresh qubits projected onto |0⟩; the result lives on
/// the support of perceptron j.
pub(crate) fn backward_layer<T: Real>(
    us: &[&ComplexMatrix<T>],
    p: usize,
    sigma: &ComplexMatrix<T>,
    states: Option<&[ComplexMatrix<T>]>,
) -> (ComplexMatrix<T>, Vec<ComplexMatrix<T>>) {
    let m = us.len();
    let mut y = ComplexMatrix::identity(1 << p).kron(sigma);
    let mut pieces = Vec::with_capacity(m);
    for j in (0..m).rev() {
        let n = p + j + 1;
        let positions = perceptron_positions(p, j);
        if let Some(states) = states {
            let a = &states[j];
            let ay = crate::linalg::qubits::partial_trace_of_product(a, &y, n, &positions).expect("valid positions");
            let ya = crate::linalg::qubits::partial_trace_of_product(&y, a, n, &positions).expect("valid positions");
            pieces.push(&ay - &ya);
        }
        let index = SubsystemIndex::new(n, &positions).expect("valid positions");
        conjugate_dagger_in_place(us[j], &index, &mut y);
        y = project_last_zero(&y);
    }
    pieces.reverse();
    (y, pieces)
}

fn check_operator<T: Real>(m: &ComplexMatrix<T>, qubits: usize, what: &str) -> Result<()> {
    if m.qubits() != Some(qubits) {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be {0}x{0}, got {1}x{2}",
            1usize << qubits,
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

fn check_state<T: Real>(s: &PureState<T>, qubits: usize, what: &str) -> Result<()> {
    if s.dim() != 1 << qubits {
        return Err(Error::DimensionMismatch(format!(
            "{what} has dimension {}, expected {}",
            s.dim(),
            1usize << qubits
        )));
    }
    Ok(())
}

/// ℰˡ(ρ) = tr_{l−1}(Uˡ (ρ ⊗ |0…0⟩⟨0…0|) Uˡ†).
pub fn apply_layer_channel<T: Real>(net: &Network<T>, l: usize, rho: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    net.topology().check_layer(l)?;
    let p = net.topology().width(l - 1);
    check_operator(rho, p, "layer input")?;
    Ok(forward_layer(&net.layer_unitaries(l), p, rho, false).output)
}

/// ℱˡ(σ) = tr_l((I ⊗ |0…0⟩⟨0…0|) Uˡ† (I ⊗ σ) Uˡ).
pub fn apply_adjoint_channel<T: Real>(net: &Network<T>, l: usize, sigma: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    net.topology().check_layer(l)?;
    check_operator(sigma, net.topology().width(l), "layer observable")?;
    let p = net.topology().width(l - 1);
    Ok(backward_layer(&net.layer_unitaries(l), p, sigma, None).0)
}

/// ρ⁰ = |φ^in⟩⟨φ^in| followed by ρˡ = ℰˡ(ρˡ⁻¹) for every layer.
pub fn feedforward<T: Real>(net: &Network<T>, input: &PureState<T>) -> Result<Vec<ComplexMatrix<T>>> {
    check_state(input, net.topology().input_width(), "input state")?;
    let mut rhos = vec![input.projector()];
    for l in 1..=net.topology().depth() {
        let next = apply_layer_channel(net, l, rhos.last().expect("non-empty"))?;
        rhos.push(next);
    }
    Ok(rhos)
}

/// σᴸ = |φ^out⟩⟨φ^out| and σˡ = ℱˡ⁺¹(σˡ⁺¹), returned for l = 1..=L in order.
pub fn backpropagate_targets<T: Real>(net: &Network<T>, target: &PureState<T>) -> Result<Vec<ComplexMatrix<T>>> {
    check_state(target, net.topology().output_width(), "target state")?;
    let depth = net.topology().depth();
    let mut sigmas = vec![target.projector()];
    for l in (2..=depth).rev() {
        let prev = apply_adjoint_channel(net, l, sigmas.last().expect("non-empty"))?;
        sigmas.push(prev);
    }
    sigmas.reverse();
    Ok(sigmas)
}

/// ρ^out for a pure input.
pub fn network_output<T: Real>(net: &Network<T>, input: &PureState<T>) -> Result<ComplexMatrix<T>> {
    Ok(feedforward(net, input)?.pop().expect("at least one layer"))
}

/// Forward states and back-propagated targets of one training pair.
#[derive(Clone, Debug)]
pub struct FeedforwardCache<T> {
    rho: Vec<ComplexMatrix<T>>,
    sigma: Vec<ComplexMatrix<T>>,
}

impl<T: Real> FeedforwardCache<T> {
    pub fn compute(net: &Network<T>, input: &PureState<T>, target: &PureState<T>) -> Result<Self> {
        Ok(Self {
            rho: feedforward(net, input)?,
            sigma: backpropagate_targets(net, target)?,
        })
    }

    /// ρˡ for l = 0 (input) ..= L (output).
    pub fn rho(&self, l: usize) -> &ComplexMatrix<T> {
        &self.rho[l]
    }

    /// σˡ for l = 1 ..= L.
    pub fn sigma(&self, l: usize) -> &ComplexMatrix<T> {
        assert!(l >= 1, "targets start at layer 1");
        &self.sigma[l - 1]
    }

    pub fn depth(&self) -> usize {
        self.sigma.len()
    }
}
