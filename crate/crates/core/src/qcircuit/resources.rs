use std::fmt;

use serde::{Deserialize, Serialize};

use crate::network::Topology;

/// Gate and qubit budget of estimating the cost on hardware with `shots`
/// repetitions per training pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceCount {
    pub pairs: u64,
    pub shots_per_pair: u64,
    /// Σ nᵢ, perceptrons applied in one pass through the network.
    pub perceptrons_per_pass: u64,
    /// N·M·(Σ nᵢ + 3): perceptrons plus the two Hadamards and the CSWAP of each run.
    pub gates_and_perceptrons: u64,
    /// 2W + m + 1 with W the widest non-input layer and m the output width.
    pub qubit_bound: u64,
    /// 1 + m + max_l (m_{l−1} + m_l): control, target copy and two live layers.
    pub qubits_required: u64,
    /// Two-qubit swaps inside one BIGSWAP with all-to-all connectivity.
    pub bigswap_swaps_all_to_all: u64,
    /// The same on a line of qubits.
    pub bigswap_swaps_line: u64,
    pub total_shots: u64,
}

pub fn resource_count(topology: &Topology, pairs: u64, shots_per_pair: u64) -> ResourceCount {
    let widths = topology.widths();
    let n_sum = topology.perceptron_count() as u64;
    let m = topology.output_width() as u64;
    let w = widths[1..].iter().copied().max().expect("at least one layer") as u64;
    let live = widths.windows(2).map(|p| p[0] + p[1]).max().expect("at least two layers") as u64;
    let runs = pairs * shots_per_pair;
    ResourceCount {
        pairs,
        shots_per_pair,
        perceptrons_per_pass: n_sum,
        gates_and_perceptrons: runs * (n_sum + 3),
        qubit_bound: 2 * w + m + 1,
        qubits_required: 1 + m + live,
        bigswap_swaps_all_to_all: m,
        bigswap_swaps_line: m * m,
        total_shots: runs,
    }
}

impl fmt::Display for ResourceCount {
    /// One `key = value` line per field.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pairs = {}", self.pairs)?;
        writeln!(f, "shots_per_pair = {}", self.shots_per_pair)?;
        writeln!(f, "perceptrons_per_pass = {}", self.perceptrons_per_pass)?;
        writeln!(f, "gates_and_perceptrons = {}", self.gates_and_perceptrons)?;
        writeln!(f, "qubit_bound = {}", self.qubit_bound)?;
        writeln!(f, "qubits_required = {}", self.qubits_required)?;
        writeln!(f, "bigswap_swaps_all_to_all = {}", self.bigswap_swaps_all_to_all)?;
        writeln!(f, "bigswap_swaps_line = {}", self.bigswap_swaps_line)?;
        writeln!(f, "total_shots = {}", self.total_shots)
    }
}
