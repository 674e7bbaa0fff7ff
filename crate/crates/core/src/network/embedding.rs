//! Circuits of two-qubit gates rewritten as perceptron networks.
//!
//! A circuit on `r` qubits with `s` time steps becomes a network of `s + 1`
//! layers of width `r`. In each step, the perceptron at the smaller qubit
//! index of a gate applies the gate to layer l − 1 and then swaps its own
//! qubit into layer l. Every other perceptron just swaps its qubit across.
//! The gate acts on the previous layer before either of its qubits has been
//! swapped out, so the partner's later swap carries the updated value.

use super::{Network, Topology};
use crate::error::{Error, Result};
use crate::linalg::qubits::{embed_positions, swap_positions};
use crate::linalg::ComplexMatrix;
use crate::scalar::Real;

/// A two-qubit gate; `qubits.0` is its most significant qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate<T> {
    pub qubits: (usize, usize),
    pub unitary: ComplexMatrix<T>,
}

/// Gates grouped into time steps. Gates within a step act on disjoint qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitLayout<T> {
    pub registers: usize,
    pub steps: Vec<Vec<Gate<T>>>,
}

impl<T: Real> CircuitLayout<T> {
    fn validate(&self) -> Result<()> {
        if self.registers == 0 || !self.registers.is_multiple_of(2) {
            return Err(Error::MalformedCircuit(format!(
                "register count {} must be even and positive",
                self.registers
            )));
        }
        if self.steps.is_empty() {
            return Err(Error::MalformedCircuit("circuit has no time steps".into()));
        }
        for (s, step) in self.steps.iter().enumerate() {
            let mut used = vec![false; self.registers];
            for g in step {
                let (a, b) = g.qubits;
                if a == b || a >= self.registers || b >= self.registers {
                    return Err(Error::MalformedCircuit(format!("step {s}: gate on qubits ({a}, {b})")));
                }
                if used[a] || used[b] {
                    return Err(Error::MalformedCircuit(format!("step {s}: gates overlap on ({a}, {b})")));
                }
                used[a] = true;
                used[b] = true;
                if g.unitary.rows() != 4 || !g.unitary.is_unitary(T::tolerance(1e-10)) {
                    return Err(Error::MalformedCircuit(format!("step {s}: gate on ({a}, {b}) is not a 4x4 unitary")));
                }
            }
        }
        Ok(())
    }

    /// Full circuit unitary, later steps on the left.
    pub fn unitary(&self) -> Result<ComplexMatrix<T>> {
        self.validate()?;
        let n = self.registers;
        let mut total = ComplexMatrix::identity(1 << n);
        for step in &self.steps {
            for g in step {
                total = embed_positions(&g.unitary, &[g.qubits.0, g.qubits.1], n)?.matmul(&total);
            }
        }
        Ok(total)
    }
}

/// Alternating nearest-neighbour pairs: (0,1),(2,3),… then (1,2),(3,4),…
pub fn brick_wall<T: Real>(registers: usize, gates: Vec<Vec<ComplexMatrix<T>>>) -> Result<CircuitLayout<T>> {
    let steps = gates
        .into_iter()
        .enumerate()
        .map(|(s, us)| {
            let pairs: Vec<(usize, usize)> = (s % 2..registers.saturating_sub(1)).step_by(2).map(|a| (a, a + 1)).collect();
            if us.len() != pairs.len() {
                return Err(Error::MalformedCircuit(format!(
                    "step {s} has {} gates, brick wall needs {}",
                    us.len(),
                    pairs.len()
                )));
            }
            Ok(pairs.into_iter().zip(us).map(|(qubits, unitary)| Gate { qubits, unitary }).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CircuitLayout { registers, steps })
}

/// Network whose channel equals conjugation by the circuit unitary.
pub fn build_circuit_embedding<T: Real>(circuit: &CircuitLayout<T>) -> Result<Network<T>> {
    circuit.validate()?;
    let r = circuit.registers;
    let topology = Topology::new(vec![r; circuit.steps.len() + 1])?;
    let arity = r + 1;
    let unitaries = circuit
        .steps
        .iter()
        .map(|step| {
            (0..r)
                .map(|q| {
                    let relay = swap_positions(q, r, arity);
                    match step.iter().find(|g| g.qubits.0.min(g.qubits.1) == q) {
                        Some(g) => Ok(relay.matmul(&embed_positions(&g.unitary, &[g.qubits.0, g.qubits.1], arity)?)),
                        None => Ok(relay),
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Network::from_unitaries(topology, unitaries)
}
