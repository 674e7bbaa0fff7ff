use log::debug;

use super::gradient::parameter_matrices;
use super::{Dataset, TrainingConfig, TrainingHistory};
use crate::error::Result;
use crate::linalg::{expm_i_hermitian, polar_unitary, ComplexMatrix};
use crate::network::Network;
use crate::scalar::Real;

/// Unitarity drift beyond which an updated perceptron is projected back.
const REUNITARIZE_THRESHOLD: f64 = 1e-9;

/// U_j^l ← e^{iεK_j^l} U_j^l for every perceptron at once.
pub fn update_network<T: Real>(net: &Network<T>, k: &[Vec<ComplexMatrix<T>>], epsilon: T) -> Result<Network<T>> {
    Ok(update_counting(net, k, epsilon)?.0)
}

fn update_counting<T: Real>(
    net: &Network<T>,
    k: &[Vec<ComplexMatrix<T>>],
    epsilon: T,
) -> Result<(Network<T>, usize)> {
    let mut next = net.clone();
    if epsilon == T::zero() {
        return Ok((next, 0));
    }
    let mut projected = 0;
    for p in net.perceptrons() {
        let step = expm_i_hermitian(&k[p.layer - 1][p.slot], epsilon)?;
        let mut u = step.matmul(&p.unitary);
        let drift = u.unitarity_defect();
        if drift > T::lit(REUNITARIZE_THRESHOLD) {
            debug!("re-unitarising perceptron ({}, {}), drift {:e}", p.layer, p.slot, drift);
            u = polar_unitary(&u);
            projected += 1;
        }
        next.set_unitary(p.layer, p.slot, u)?;
    }
    Ok((next, projected))
}

/// One synchronous round: every K from the current network, then every
/// update. Returns the new network and the cost before the step.
pub fn training_step<T: Real>(net: &Network<T>, data: &Dataset<T>, config: &TrainingConfig) -> Result<(Network<T>, T)> {
    config.validate()?;
    let pm = parameter_matrices(net, data, T::lit(config.eta))?;
    let next = update_network(net, &pm.k, T::lit(config.epsilon))?;
    Ok((next, pm.cost))
}

/// Runs `config.rounds` synchronous rounds starting from `net`.
pub fn train<T: Real>(net: &Network<T>, data: &Dataset<T>, config: &TrainingConfig) -> Result<TrainingHistory<T>> {
    config.validate()?;
    let eta = T::lit(config.eta);
    let epsilon = T::lit(config.epsilon);
    let mut current = net.clone();
    let mut costs = Vec::with_capacity(config.rounds + 1);
    let mut norms = Vec::new();
    let mut reunitarizations = 0;
    for round in 0..=config.rounds {
        let last = round == config.rounds;
        if last && !config.record_gradient_norms {
            costs.push(super::cost(&current, data)?);
            break;
        }
        let pm = parameter_matrices(&current, data, eta)?;
        costs.push(pm.cost);
        if config.record_gradient_norms {
            norms.push(pm.norms_at_unit_eta());
        }
        if !last {
            let (next, projected) = update_counting(&current, &pm.k, epsilon)?;
            reunitarizations += projected;
            current = next;
        }
    }
    Ok(TrainingHistory {
        config: config.clone(),
        costs,
        gradient_norms: norms,
        perceptron_labels: current.perceptrons().map(|p| (p.layer, p.slot)).collect(),
        reunitarizations,
        network: current,
    })
}

/// ‖K_j^l‖_F at η = 1 for every perceptron, layer-major.
pub fn gradient_norm_probe<T: Real>(net: &Network<T>, data: &Dataset<T>) -> Result<Vec<T>> {
    Ok(parameter_matrices(net, data, T::one())?.norms_at_unit_eta())
}
