//! Network topology, perceptron unitaries and their serialised form.
//!
//! Layer 0 is the input layer. Perceptron layers are numbered 1..=L where
//! L = widths.len() − 1, and layer L is the output. The perceptron (l, j)
//! acts on every qubit of layer l − 1 followed by qubit j of layer l, which
//! is the least significant qubit of its unitary.

mod channel;
mod embedding;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::random::{haar_random_unitary, SeededRng};
use crate::linalg::{embed_positions, qubits::swap_positions, ComplexMatrix};
use crate::scalar::{c, Real};

pub use channel::{
    apply_adjoint_channel, apply_layer_channel, backpropagate_targets, feedforward, network_output,
    FeedforwardCache,
};
pub(crate) use channel::{backward_layer, forward_layer};
pub use embedding::{brick_wall, build_circuit_embedding, CircuitLayout, Gate};

/// Qubit counts per layer, input first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    widths: Vec<usize>,
}

impl Topology {
    pub fn new(widths: Vec<usize>) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::InvalidTopology(format!(
                "need at least an input and an output layer, got {} layer(s)",
                widths.len()
            )));
        }
        if let Some(l) = widths.iter().position(|&w| w == 0) {
            return Err(Error::InvalidTopology(format!("layer {l} has zero width")));
        }
        Ok(Self { widths })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    /// Number of perceptron layers L.
    pub fn depth(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.widths.last().expect("validated non-empty")
    }

    pub fn width(&self, layer: usize) -> usize {
        self.widths[layer]
    }

    /// Qubits acted on by every perceptron of layer `l`: m_{l−1} + 1.
    pub fn arity(&self, l: usize) -> usize {
        self.widths[l - 1] + 1
    }

    pub fn perceptron_count(&self) -> usize {
        self.widths[1..].iter().sum()
    }

    pub fn total_qubits(&self) -> usize {
        self.widths.iter().sum()
    }

    fn check_layer(&self, l: usize) -> Result<()> {
        if l == 0 || l > self.depth() {
            return Err(Error::IndexOutOfRange(format!(
                "perceptron layer {l} outside 1..={}",
                self.depth()
            )));
        }
        Ok(())
    }
}

/// One quantum perceptron.
#[derive(Clone, Debug, PartialEq)]
pub struct Perceptron<T> {
    pub layer: usize,
    pub slot: usize,
    pub unitary: ComplexMatrix<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network<T> {
    topology: Topology,
    /// layers[l − 1][j] is perceptron (l, j), stored in application order.
    layers: Vec<Vec<Perceptron<T>>>,
}

impl<T: Real> Network<T> {
    /// Assembles a network from per-layer unitaries, validating shapes and unitarity.
    pub fn from_unitaries(topology: Topology, unitaries: Vec<Vec<ComplexMatrix<T>>>) -> Result<Self> {
        if unitaries.len() != topology.depth() {
            return Err(Error::InvalidTopology(format!(
                "{} perceptron layers given for depth {}",
                unitaries.len(),
                topology.depth()
            )));
        }
        let mut layers = Vec::with_capacity(unitaries.len());
        for (i, layer) in unitaries.into_iter().enumerate() {
            let l = i + 1;
            if layer.len() != topology.width(l) {
                return Err(Error::InvalidTopology(format!(
                    "layer {l} has {} perceptrons, width is {}",
                    layer.len(),
                    topology.width(l)
                )));
            }
            let dim = 1usize << topology.arity(l);
            let mut row = Vec::with_capacity(layer.len());
            for (slot, u) in layer.into_iter().enumerate() {
                if u.rows() != dim || u.cols() != dim {
                    return Err(Error::DimensionMismatch(format!(
                        "perceptron ({l}, {slot}) is {}x{}, expected {dim}x{dim}",
                        u.rows(),
                        u.cols()
                    )));
                }
                if !u.is_unitary(T::tolerance(1e-10)) {
                    return Err(Error::InvalidArgument(format!(
                        "perceptron ({l}, {slot}) is not unitary (defect {:e})",
                        u.unitarity_defect()
                    )));
                }
                row.push(Perceptron { layer: l, slot, unitary: u });
            }
            layers.push(row);
        }
        Ok(Self { topology, layers })
    }

    /// Haar-random perceptrons drawn layer by layer in slot order.
    pub fn random(topology: Topology, rng: &mut SeededRng) -> Self {
        let unitaries = (1..=topology.depth())
            .map(|l| {
                let dim = 1 << topology.arity(l);
                (0..topology.width(l)).map(|_| haar_random_unitary(dim, rng)).collect()
            })
            .collect();
        Self::from_unitaries(topology, unitaries).expect("Haar samples are unitary")
    }

    /// Every perceptron the identity: the output layer stays in |0…0⟩.
    pub fn identity(topology: Topology) -> Self {
        let unitaries = (1..=topology.depth())
            .map(|l| vec![ComplexMatrix::identity(1 << topology.arity(l)); topology.width(l)])
            .collect();
        Self::from_unitaries(topology, unitaries).expect("identity is unitary")
    }

    /// Perceptron (l, j) swaps qubit j of layer l − 1 into qubit j of layer l,
    /// so equal-width networks relay their input unchanged.
    pub fn swap_chain(topology: Topology) -> Result<Self> {
        if topology.widths().windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::InvalidTopology("swap chain needs equal widths".into()));
        }
        let unitaries = (1..=topology.depth())
            .map(|l| {
                let n = topology.arity(l);
                (0..topology.width(l)).map(|j| swap_positions(j, n - 1, n)).collect()
            })
            .collect();
        Self::from_unitaries(topology, unitaries)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn layer(&self, l: usize) -> Result<&[Perceptron<T>]> {
        self.topology.check_layer(l)?;
        Ok(&self.layers[l - 1])
    }

    pub fn perceptron(&self, l: usize, j: usize) -> Result<&Perceptron<T>> {
        self.layer(l)?
            .get(j)
            .ok_or_else(|| Error::IndexOutOfRange(format!("slot {j} in layer {l}")))
    }

    /// All perceptrons, layer-major then slot order.
    pub fn perceptrons(&self) -> impl Iterator<Item = &Perceptron<T>> {
        self.layers.iter().flatten()
    }

    pub(crate) fn layer_unitaries(&self, l: usize) -> Vec<&ComplexMatrix<T>> {
        self.layers[l - 1].iter().map(|p| &p.unitary).collect()
    }

    /// Replaces perceptron (l, j). The new unitary must have the same shape.
    pub fn set_unitary(&mut self, l: usize, j: usize, u: ComplexMatrix<T>) -> Result<()> {
        let old = &self.perceptron(l, j)?.unitary;
        if old.rows() != u.rows() || old.cols() != u.cols() {
            return Err(Error::DimensionMismatch(format!("replacement for perceptron ({l}, {j})")));
        }
        self.layers[l - 1][j].unitary = u;
        Ok(())
    }

    /// Layer unitary Uˡ = U_{m}…U_1 on the two-layer space (layer l − 1 first).
    pub fn layer_unitary(&self, l: usize) -> Result<ComplexMatrix<T>> {
        self.topology.check_layer(l)?;
        let p = self.topology.width(l - 1);
        let m = self.topology.width(l);
        let n = p + m;
        let mut total = ComplexMatrix::identity(1 << n);
        for (j, perc) in self.layers[l - 1].iter().enumerate() {
            let positions: Vec<usize> = (0..p).chain(std::iter::once(p + j)).collect();
            total = embed_positions(&perc.unitary, &positions, n)?.matmul(&total);
        }
        Ok(total)
    }

    /// Largest U†U − I entry over all perceptrons.
    pub fn max_unitarity_defect(&self) -> T {
        self.perceptrons()
            .map(|p| p.unitary.unitarity_defect())
            .fold(T::zero(), T::max)
    }

    pub fn to_document(&self) -> NetworkDocument {
        NetworkDocument {
            schema_version: NETWORK_SCHEMA_VERSION,
            widths: self.topology.widths.clone(),
            perceptrons: self
                .perceptrons()
                .map(|p| PerceptronDocument {
                    layer: p.layer,
                    slot: p.slot,
                    unitary: p.unitary.as_slice().iter().map(|z| [z.re.as_f64(), z.im.as_f64()]).collect(),
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &NetworkDocument) -> Result<Self> {
        if doc.schema_version != NETWORK_SCHEMA_VERSION {
            return Err(Error::SchemaVersion(doc.schema_version));
        }
        let topology = Topology::new(doc.widths.clone())?;
        let mut unitaries: Vec<Vec<Option<ComplexMatrix<T>>>> =
            (1..=topology.depth()).map(|l| vec![None; topology.width(l)]).collect();
        for p in &doc.perceptrons {
            topology.check_layer(p.layer)?;
            let dim = 1usize << topology.arity(p.layer);
            let data = p.unitary.iter().map(|&[re, im]| c(T::lit(re), T::lit(im))).collect();
            let slot = unitaries[p.layer - 1]
                .get_mut(p.slot)
                .ok_or_else(|| Error::IndexOutOfRange(format!("slot {} in layer {}", p.slot, p.layer)))?;
            if slot.is_some() {
                return Err(Error::InvalidArgument(format!("perceptron ({}, {}) listed twice", p.layer, p.slot)));
            }
            *slot = Some(ComplexMatrix::from_vec(dim, dim, data)?);
        }
        let unitaries = unitaries
            .into_iter()
            .enumerate()
            .map(|(i, layer)| {
                layer
                    .into_iter()
                    .enumerate()
                    .map(|(j, u)| u.ok_or_else(|| Error::InvalidArgument(format!("perceptron ({}, {j}) missing", i + 1))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_unitaries(topology, unitaries)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(text)?)
    }
}

pub const NETWORK_SCHEMA_VERSION: u32 = 1;

/// Serialised network: widths plus every unitary as row-major [re, im] pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub schema_version: u32,
    pub widths: Vec<usize>,
    pub perceptrons: Vec<PerceptronDocument>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerceptronDocument {
    pub layer: usize,
    pub slot: usize,
    pub unitary: Vec<[f64; 2]>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn topo(w: &[usize]) -> Topology {
        Topology::new(w.to_vec()).unwrap()
    }

    #[test]
    fn topology_rejects_degenerate_shapes() {
        assert!(matches!(Topology::new(vec![2]), Err(Error::InvalidTopology(_))));
        assert!(matches!(Topology::new(vec![2, 0, 2]), Err(Error::InvalidTopology(_))));
        let t = topo(&[2, 3, 2]);
        assert_eq!((t.depth(), t.arity(1), t.arity(2), t.perceptron_count()), (2, 3, 4, 5));
    }

    #[test]
    fn random_network_has_unitary_perceptrons_in_slot_order() {
        let mut rng = SeededRng::new(9);
        let net: Network<f64> = Network::random(topo(&[2, 3, 2]), &mut rng);
        let ids: Vec<(usize, usize)> = net.perceptrons().map(|p| (p.layer, p.slot)).collect();
        assert_eq!(ids, vec![(1, 0), (1, 1), (1, 2), (2, 0), (2, 1)]);
        assert!(net.max_unitarity_defect() < 1e-10);
        assert_eq!(net.perceptron(2, 1).unwrap().unitary.rows(), 16);
        assert!(net.perceptron(3, 0).is_err());
        assert!(net.perceptron(2, 2).is_err());
    }

    #[test]
    fn from_unitaries_checks_counts_and_shapes() {
        let t = topo(&[1, 1]);
        assert!(Network::<f64>::from_unitaries(t.clone(), vec![vec![]]).is_err());
        assert!(Network::<f64>::from_unitaries(t.clone(), vec![vec![ComplexMatrix::identity(2)]]).is_err());
        let bad = ComplexMatrix::<f64>::identity(4).scale_real(2.0);
        assert!(Network::<f64>::from_unitaries(t, vec![vec![bad]]).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let mut rng = SeededRng::new(10);
        let net: Network<f64> = Network::random(topo(&[2, 3, 2]), &mut rng);
        let back = Network::<f64>::from_json(&net.to_json().unwrap()).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn json_rejects_wrong_schema_and_unknown_fields() {
        let net = Network::<f64>::identity(topo(&[1, 1]));
        let mut doc = net.to_document();
        doc.schema_version = 99;
        assert!(matches!(Network::<f64>::from_document(&doc), Err(Error::SchemaVersion(99))));
        let text = net.to_json().unwrap().replacen("\"widths\"", "\"extra\": 1, \"widths\"", 1);
        assert!(matches!(Network::<f64>::from_json(&text), Err(Error::Json(_))));
    }

    #[test]
    fn layer_unitary_is_product_in_slot_order() {
        let mut rng = SeededRng::new(11);
        let net: Network<f64> = Network::random(topo(&[1, 2]), &mut rng);
        let u1 = embed_positions(&net.perceptron(1, 0).unwrap().unitary, &[0, 1], 3).unwrap();
        let u2 = embed_positions(&net.perceptron(1, 1).unwrap().unitary, &[0, 2], 3).unwrap();
        let got = net.layer_unitary(1).unwrap();
        assert!(got.max_abs_diff(&u2.matmul(&u1)) < 1e-14);
        assert!(got.max_abs_diff(&u1.matmul(&u2)) > 1e-3);
    }
}
