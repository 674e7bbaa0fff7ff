use crate::error::{Error, Result};
use crate::linalg::random::SeededRng;
use crate::linalg::{expm_i_hermitian, pauli_string, ComplexMatrix};
use crate::network::{Network, Topology};
use crate::scalar::{cr, Real};
use crate::trainer::{cost, Dataset};

/// Pauli coefficients of every perceptron generator. Perceptron (l, j) is
/// e^{iK} with K = Σ_α x_α σ^α over all 4^{m_{l−1}+1} Pauli strings;
/// perceptrons are laid out layer-major, strings by base-4 index.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVector {
    topology: Topology,
    x: Vec<f64>,
}

impl ParamVector {
    pub fn len_for(topology: &Topology) -> usize {
        (1..=topology.depth()).map(|l| topology.width(l) << (2 * topology.arity(l))).sum()
    }

    pub fn new(topology: Topology, x: Vec<f64>) -> Result<Self> {
        let expected = Self::len_for(&topology);
        if x.len() != expected {
            return Err(Error::DimensionMismatch(format!("{} parameters given, topology needs {expected}", x.len())));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("parameters must be finite".into()));
        }
        Ok(Self { topology, x })
    }

    pub fn zeros(topology: Topology) -> Self {
        let n = Self::len_for(&topology);
        Self { topology, x: vec![0.0; n] }
    }

    /// Independent N(0, scale²) coefficients.
    pub fn random(topology: Topology, scale: f64, rng: &mut SeededRng) -> Self {
        let n = Self::len_for(&topology);
        let x = (0..n).map(|_| scale * rng.standard_normal::<f64>()).collect();
        Self { topology, x }
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Copy with x_α shifted by `delta`.
    pub fn shifted(&self, alpha: usize, delta: f64) -> Result<Self> {
        if alpha >= self.x.len() {
            return Err(Error::IndexOutOfRange(format!("parameter {alpha} of {}", self.x.len())));
        }
        let mut out = self.clone();
        out.x[alpha] += delta;
        Ok(out)
    }

    /// Generator K of perceptron number `index` in layer-major order.
    pub fn generator<T: Real>(&self, l: usize, j: usize) -> ComplexMatrix<T> {
        let arity = self.topology.arity(l);
        let offset = self.offset(l, j);
        let mut k = ComplexMatrix::zeros(1 << arity, 1 << arity);
        for (s, &coef) in self.x[offset..offset + (1 << (2 * arity))].iter().enumerate() {
            if coef != 0.0 {
                k.add_assign_scaled(&pauli_string(s, arity), cr(T::lit(coef)));
            }
        }
        k
    }

    fn offset(&self, l: usize, j: usize) -> usize {
        let before: usize = (1..l).map(|k| self.topology.width(k) << (2 * self.topology.arity(k))).sum();
        before + (j << (2 * self.topology.arity(l)))
    }

    pub fn to_network<T: Real>(&self) -> Result<Network<T>> {
        let unitaries = (1..=self.topology.depth())
            .map(|l| {
                (0..self.topology.width(l))
                    .map(|j| expm_i_hermitian(&self.generator::<T>(l, j), T::one()))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Network::from_unitaries(self.topology.clone(), unitaries)
    }
}

/// (C(x + probe·e_α) − C(x)) / probe with the exact cost.
pub fn fd_gradient<T: Real>(params: &ParamVector, data: &Dataset<T>, alpha: usize, probe: f64) -> Result<f64> {
    check_probe(probe)?;
    let base = cost(&params.to_network::<T>()?, data)?.as_f64();
    let moved = cost(&params.shifted(alpha, probe)?.to_network::<T>()?, data)?.as_f64();
    Ok((moved - base) / probe)
}

/// Every forward difference, sharing one evaluation of C(x).
pub fn fd_gradient_vector<T: Real>(params: &ParamVector, data: &Dataset<T>, probe: f64) -> Result<Vec<f64>> {
    check_probe(probe)?;
    let base = cost(&params.to_network::<T>()?, data)?.as_f64();
    (0..params.len())
        .map(|a| Ok((cost(&params.shifted(a, probe)?.to_network::<T>()?, data)?.as_f64() - base) / probe))
        .collect()
}

/// x + ∇C/(2λ) with the forward-difference gradient.
pub fn fd_ascent_step<T: Real>(params: &ParamVector, data: &Dataset<T>, lambda: f64, probe: f64) -> Result<ParamVector> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let grad = fd_gradient_vector(params, data, probe)?;
    let x = params.x.iter().zip(&grad).map(|(x, g)| x + g / (2.0 * lambda)).collect();
    ParamVector::new(params.topology.clone(), x)
}

fn check_probe(probe: f64) -> Result<()> {
    if !(probe > 0.0 && probe.is_finite()) {
        return Err(Error::InvalidArgument(format!("probe must be positive, got {probe}")));
    }
    Ok(())
}
