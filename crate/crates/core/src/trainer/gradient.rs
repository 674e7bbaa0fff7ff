//! Cost and parameter matrices.
//!
//! Two routes compute K. [`parameter_matrix_k`] follows the definition:
//! build M_j^l on the full two-layer register and trace it down.
//! [`parameter_matrices`] is the one training uses. It evaluates the same
//! partial traces on the smallest register that holds perceptron j's
//! support, reusing the intermediate states of the layer channel.

use rayon::prelude::*;

use super::{Dataset, TrainingPair};
use crate::error::{Error, Result};
use crate::linalg::qubits::{embed_positions, partial_trace_positions};
use crate::linalg::{fidelity_pure, ComplexMatrix};
use crate::network::{backward_layer, forward_layer, network_output, FeedforwardCache, Network};
use crate::scalar::{c, Real};

/// C = (1/N) Σ_x ⟨φ_x^out|ρ_x^out|φ_x^out⟩.
pub fn cost<T: Real>(net: &Network<T>, data: &Dataset<T>) -> Result<T> {
    data.check_against(net)?;
    let fidelities = data
        .pairs()
        .par_iter()
        .map(|p| fidelity_pure(&p.output, &network_output(net, &p.input)?))
        .collect::<Result<Vec<T>>>()?;
    Ok(mean(&fidelities))
}

fn mean<T: Real>(xs: &[T]) -> T {
    xs.iter().copied().sum::<T>() / T::from_usize(xs.len()).expect("length fits")
}

/// M_j^l on the two-layer register (layer l − 1 first), for slot `j` counted from 0.
pub fn commutator_matrix_m<T: Real>(
    net: &Network<T>,
    l: usize,
    j: usize,
    rho_prev: &ComplexMatrix<T>,
    sigma_curr: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    let layer = net.layer(l)?;
    if j >= layer.len() {
        return Err(Error::IndexOutOfRange(format!("slot {j} in layer {l}")));
    }
    let p = net.topology().width(l - 1);
    let m = layer.len();
    if rho_prev.qubits() != Some(p) || sigma_curr.qubits() != Some(m) {
        return Err(Error::DimensionMismatch(format!("cached states do not match layer {l}")));
    }
    let n = p + m;
    let embedded = layer
        .iter()
        .enumerate()
        .map(|(a, perc)| {
            let positions: Vec<usize> = (0..p).chain(std::iter::once(p + a)).collect();
            embed_positions(&perc.unitary, &positions, n)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut forward = rho_prev.kron(&ComplexMatrix::zero_projector(1 << m));
    for u in &embedded[..=j] {
        forward = u.matmul(&forward).matmul(&u.dagger());
    }
    let mut backward = ComplexMatrix::identity(1 << p).kron(sigma_curr);
    for u in embedded[j + 1..].iter().rev() {
        backward = u.dagger().matmul(&backward).matmul(u);
    }
    Ok(forward.commutator(&backward))
}

/// K_j^l = η·2^{m_{l−1}}/N · Σ_x tr_rest(i·M_j^l), from per-pair caches.
pub fn parameter_matrix_k<T: Real>(
    net: &Network<T>,
    l: usize,
    j: usize,
    caches: &[FeedforwardCache<T>],
    eta: T,
) -> Result<ComplexMatrix<T>> {
    if caches.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let depth = net.topology().depth();
    if caches.iter().any(|c| c.depth() != depth) {
        return Err(Error::InvalidArgument(format!("caches do not cover all {depth} layers")));
    }
    let m = net.layer(l)?.len();
    if j >= m {
        return Err(Error::IndexOutOfRange(format!("slot {j} in layer {l}")));
    }
    let p = net.topology().width(l - 1);
    let n = p + m;
    let keep: Vec<usize> = (0..p).chain(std::iter::once(p + j)).collect();
    let mut sum = ComplexMatrix::zeros(1 << (p + 1), 1 << (p + 1));
    for cache in caches {
        let m = commutator_matrix_m(net, l, j, cache.rho(l - 1), cache.sigma(l))?;
        sum = &sum + &partial_trace_positions(&m, n, &keep)?;
    }
    Ok(scale_to_k(sum, p, caches.len(), eta))
}

/// i·η·2^p/N · Σ, symmetrised to remove roundoff in the anti-Hermitian sum.
fn scale_to_k<T: Real>(sum: ComplexMatrix<T>, p: usize, n_pairs: usize, eta: T) -> ComplexMatrix<T> {
    let factor = eta * T::from_usize(1 << p).expect("fits") / T::from_usize(n_pairs).expect("fits");
    sum.scale(c(T::zero(), factor)).hermitian_part()
}

/// Every K_j^l of one round, computed against a single network snapshot.
#[derive(Clone, Debug)]
pub struct ParameterMatrices<T> {
    /// Cost of the snapshot, a by-product of the forward pass.
    pub cost: T,
    /// k[l − 1][j] = K_j^l.
    pub k: Vec<Vec<ComplexMatrix<T>>>,
    pub eta: T,
}

impl<T: Real> ParameterMatrices<T> {
    /// Frobenius norm of each K at η = 1, layer-major.
    pub fn norms_at_unit_eta(&self) -> Vec<T> {
        self.k.iter().flatten().map(|k| k.frobenius_norm() / self.eta).collect()
    }

    /// dC/ds = Σ_{l,j} tr(K²)/(η·2^{m_{l−1}}) for the update U → e^{isK}U.
    pub fn ascent_rate(&self, net: &Network<T>) -> T {
        self.k
            .iter()
            .enumerate()
            .map(|(i, layer)| {
                let scale = self.eta * T::from_usize(1 << net.topology().width(i)).expect("fits");
                layer.iter().map(|k| k.trace_product(k).re).sum::<T>() / scale
            })
            .sum()
    }
}

/// Per-pair fidelity and tr_rest M_j^l for every perceptron.
fn pair_contributions<T: Real>(net: &Network<T>, pair: &TrainingPair<T>) -> (T, Vec<Vec<ComplexMatrix<T>>>) {
    let depth = net.topology().depth();
    let widths = net.topology().widths();
    let mut rho = pair.input.projector();
    let mut states = Vec::with_capacity(depth);
    for l in 1..=depth {
        let step = forward_layer(&net.layer_unitaries(l), widths[l - 1], &rho, true);
        rho = step.output;
        states.push(step.states);
    }
    let fidelity = fidelity_pure(&pair.output, &rho).expect("dimensions checked");
    let mut sigma = pair.output.projector();
    let mut pieces = vec![Vec::new(); depth];
    for l in (1..=depth).rev() {
        let (prev, m) = backward_layer(&net.layer_unitaries(l), widths[l - 1], &sigma, Some(&states[l - 1]));
        pieces[l - 1] = m;
        sigma = prev;
    }
    (fidelity, pieces)
}

/// All K_j^l and the cost from one forward and one backward sweep per pair.
/// Pair contributions are summed in ascending pair order.
pub fn parameter_matrices<T: Real>(net: &Network<T>, data: &Dataset<T>, eta: T) -> Result<ParameterMatrices<T>> {
    data.check_against(net)?;
    let per_pair: Vec<(T, Vec<Vec<ComplexMatrix<T>>>)> =
        data.pairs().par_iter().map(|p| pair_contributions(net, p)).collect();
    let fidelities: Vec<T> = per_pair.iter().map(|(f, _)| *f).collect();
    let mut sums: Option<Vec<Vec<ComplexMatrix<T>>>> = None;
    for (_, pieces) in per_pair {
        match sums.as_mut() {
            None => sums = Some(pieces),
            Some(acc) => {
                for (acc_l, piece_l) in acc.iter_mut().zip(pieces) {
                    for (a, b) in acc_l.iter_mut().zip(piece_l) {
                        *a = &*a + &b;
                    }
                }
            }
        }
    }
    let widths = net.topology().widths();
    let k = sums
        .expect("dataset is non-empty")
        .into_iter()
        .enumerate()
        .map(|(i, layer)| layer.into_iter().map(|s| scale_to_k(s, widths[i], data.len(), eta)).collect())
        .collect();
    Ok(ParameterMatrices {
        cost: mean(&fidelities),
        k,
        eta,
    })
}

/// (i/N)·Σ_x Σ_{l,j} tr(M_j^l K_j^l), the first-order cost change per unit
/// step, evaluated from the literal commutators.
pub fn directional_derivative<T: Real>(
    net: &Network<T>,
    data: &Dataset<T>,
    k: &[Vec<ComplexMatrix<T>>],
) -> Result<T> {
    data.check_against(net)?;
    let depth = net.topology().depth();
    let mut total = c(T::zero(), T::zero());
    for pair in data.pairs() {
        let cache = FeedforwardCache::compute(net, &pair.input, &pair.output)?;
        for l in 1..=depth {
            let p = net.topology().width(l - 1);
            let n = p + net.topology().width(l);
            for (j, kj) in k[l - 1].iter().enumerate() {
                let m = commutator_matrix_m(net, l, j, cache.rho(l - 1), cache.sigma(l))?;
                let keep: Vec<usize> = (0..p).chain(std::iter::once(p + j)).collect();
                total += partial_trace_positions(&m, n, &keep)?.trace_product(kj);
            }
        }
    }
    let n_pairs = T::from_usize(data.len()).expect("fits");
    Ok((total * c(T::zero(), T::one())).re / n_pairs)
}
