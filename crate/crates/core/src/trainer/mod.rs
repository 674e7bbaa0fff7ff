//! Fidelity cost, parameter matrices and the gradient-ascent training loop.

mod gradient;
mod train;

use std::io::Write;

use crate::error::{Error, Result};
use crate::linalg::PureState;
use crate::network::Network;
use crate::scalar::Real;

pub use gradient::{
    commutator_matrix_m, cost, directional_derivative, parameter_matrices, parameter_matrix_k, ParameterMatrices,
};
pub use train::{gradient_norm_probe, train, training_step, update_network};

/// An (input, desired output) pair of pure states.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingPair<T> {
    pub input: PureState<T>,
    pub output: PureState<T>,
}

/// Training pairs plus a flag per pair marking it as replaced by noise.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    pairs: Vec<TrainingPair<T>>,
    corrupted: Vec<bool>,
}

impl<T: Real> Dataset<T> {
    /// Rejects empty datasets and pairs whose dimensions disagree.
    pub fn new(pairs: Vec<TrainingPair<T>>) -> Result<Self> {
        let n = pairs.len();
        Self::with_mask(pairs, vec![false; n])
    }

    pub fn with_mask(pairs: Vec<TrainingPair<T>>, corrupted: Vec<bool>) -> Result<Self> {
        let first = pairs.first().ok_or(Error::EmptyDataset)?;
        let (din, dout) = (first.input.dim(), first.output.dim());
        if let Some(x) = pairs.iter().position(|p| p.input.dim() != din || p.output.dim() != dout) {
            return Err(Error::DimensionMismatch(format!("pair {x} differs in dimension from pair 0")));
        }
        if corrupted.len() != pairs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} corruption flags for {} pairs",
                corrupted.len(),
                pairs.len()
            )));
        }
        Ok(Self { pairs, corrupted })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// Always false: construction rejects empty datasets.
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[TrainingPair<T>] {
        &self.pairs
    }

    pub fn corrupted(&self) -> &[bool] {
        &self.corrupted
    }

    pub fn corrupted_count(&self) -> usize {
        self.corrupted.iter().filter(|&&c| c).count()
    }

    /// The first `n` pairs, flags included.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n > self.len() {
            return Err(Error::InvalidArgument(format!("prefix of {n} pairs from {}", self.len())));
        }
        Self::with_mask(self.pairs[..n].to_vec(), self.corrupted[..n].to_vec())
    }

    /// The pairs not flagged as corrupted; `EmptyDataset` if there are none.
    pub fn good_pairs(&self) -> Result<Self> {
        let pairs = self
            .pairs
            .iter()
            .zip(&self.corrupted)
            .filter(|(_, &c)| !c)
            .map(|(p, _)| p.clone())
            .collect();
        Self::new(pairs)
    }

    fn check_against(&self, net: &Network<T>) -> Result<()> {
        let t = net.topology();
        let first = &self.pairs[0];
        if first.input.dim() != 1 << t.input_width() || first.output.dim() != 1 << t.output_width() {
            return Err(Error::DimensionMismatch(format!(
                "pairs of dimension {} -> {} for widths {:?}",
                first.input.dim(),
                first.output.dim(),
                t.widths()
            )));
        }
        Ok(())
    }
}

/// Step size ε, learning rate η, number of rounds and the seed that drew the
/// initial network.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainingConfig {
    pub epsilon: f64,
    pub eta: f64,
    pub rounds: usize,
    pub seed: u64,
    /// Record ‖K‖ per perceptron at every round.
    #[serde(default)]
    pub record_gradient_norms: bool,
}

impl TrainingConfig {
    pub fn new(epsilon: f64, eta: f64, rounds: usize, seed: u64) -> Self {
        Self {
            epsilon,
            eta,
            rounds,
            seed,
            record_gradient_norms: false,
        }
    }

    /// ε = 0 is allowed and leaves the network unchanged.
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("epsilon must be non-negative, got {}", self.epsilon)));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidArgument(format!("eta must be positive, got {}", self.eta)));
        }
        Ok(())
    }
}

/// Cost per round, round 0 being the untrained network.
#[derive(Clone, Debug)]
pub struct TrainingHistory<T> {
    pub config: TrainingConfig,
    /// `rounds + 1` entries.
    pub costs: Vec<T>,
    /// Per round, ‖K_j^l‖_F at η = 1 in layer-major order; empty unless requested.
    pub gradient_norms: Vec<Vec<T>>,
    /// Perceptron labels matching the columns of `gradient_norms`.
    pub perceptron_labels: Vec<(usize, usize)>,
    /// Number of polar re-unitarisations applied.
    pub reunitarizations: usize,
    pub network: Network<T>,
}

impl<T: Real> TrainingHistory<T> {
    pub fn final_cost(&self) -> T {
        *self.costs.last().expect("history always holds round 0")
    }

    /// Writes `round,cost[,k_norm_l<l>_j<j>...]` rows with a header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["round".to_string(), "cost".to_string()];
        let with_norms = !self.gradient_norms.is_empty();
        if with_norms {
            header.extend(self.perceptron_labels.iter().map(|(l, j)| format!("k_norm_l{l}_j{j}")));
        }
        w.write_record(&header)?;
        for (round, c) in self.costs.iter().enumerate() {
            let mut row = vec![round.to_string(), format_float(c.as_f64())];
            if with_norms {
                row.extend(self.gradient_norms[round].iter().map(|k| format_float(k.as_f64())));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:?}")
}
