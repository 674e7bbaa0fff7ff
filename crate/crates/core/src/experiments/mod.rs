//! Unitary-learning tasks and the two sweeps run on them: test cost against
//! the number of training pairs, and good-pair cost against the number of
//! corrupted pairs.
//!
//! Every replicate owns the stream `split(master, r)`. Inside it, sub-stream
//! 0 draws the target and the pool, sub-stream `1 + n` draws the initial
//! network for a run on `n` pairs, and sub-stream `CORRUPTION_STREAM + k`
//! picks and redraws `k` corrupted pairs. The noise sweep initialises from
//! the `n = N` network, so its zero-noise point coincides with the
//! generalisation sweep at `n = N`.

mod estimate;

use std::io::Write;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::random::{haar_random_state, haar_random_unitary, split_seed, SeededRng};
use crate::linalg::ComplexMatrix;
use crate::network::{Network, Topology};
use crate::scalar::Real;
use crate::trainer::{cost, format_float, train, Dataset, TrainingConfig, TrainingPair};

pub use estimate::optimal_cost_estimate;

const TASK_STREAM: u64 = 0;
const CORRUPTION_STREAM: u64 = 1 << 32;

/// A Haar-random target unitary on `qubits` qubits and a pool of `pool_size`
/// pairs drawn from `seed`.
#[derive(Clone, Debug)]
pub struct TaskSpec<T> {
    pub qubits: usize,
    pub target: ComplexMatrix<T>,
    pub pool_size: usize,
    pub seed: u64,
}

impl<T: Real> TaskSpec<T> {
    /// Draws the target from `rng` and the state seed from the same stream.
    pub fn random(qubits: usize, pool_size: usize, rng: &mut SeededRng) -> Self {
        let target = haar_random_unitary(1 << qubits, rng);
        let seed = rng.next_u64();
        Self {
            qubits,
            target,
            pool_size,
            seed,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }
}

/// Pairs (|φ⟩, V|φ⟩) with Haar-random |φ⟩.
pub fn generate_unitary_task<T: Real>(spec: &TaskSpec<T>) -> Result<Dataset<T>> {
    if spec.pool_size == 0 {
        return Err(Error::EmptyDataset);
    }
    if spec.target.rows() != spec.dim() || !spec.target.is_unitary(T::tolerance(1e-10)) {
        return Err(Error::InvalidArgument("task target must be a unitary on the task qubits".into()));
    }
    let mut rng = SeededRng::new(spec.seed);
    let pairs = (0..spec.pool_size)
        .map(|_| {
            let input = haar_random_state(spec.dim(), &mut rng);
            let output = input.evolve(&spec.target)?;
            Ok(TrainingPair { input, output })
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(pairs)
}

/// Replaces `n` pairs, chosen uniformly without replacement, by independent
/// Haar-random inputs and outputs. Replacements are drawn in ascending index
/// order.
pub fn corrupt_pairs<T: Real>(data: &Dataset<T>, n: usize, rng: &mut SeededRng) -> Result<Dataset<T>> {
    if n > data.len() {
        return Err(Error::InvalidArgument(format!("cannot corrupt {n} of {} pairs", data.len())));
    }
    let mut chosen = rand::seq::index::sample(rng, data.len(), n).into_vec();
    chosen.sort_unstable();
    let mut pairs = data.pairs().to_vec();
    let mut mask = data.corrupted().to_vec();
    let din = pairs[0].input.dim();
    let dout = pairs[0].output.dim();
    for i in chosen {
        pairs[i] = TrainingPair {
            input: haar_random_state(din, rng),
            output: haar_random_state(dout, rng),
        };
        mask[i] = true;
    }
    Dataset::with_mask(pairs, mask)
}

/// Mean and spread of one point of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    /// Training pairs (generalisation) or corrupted pairs (noise).
    pub x: usize,
    pub mean_cost: f64,
    /// Sample standard deviation across replicates; 0 for a single replicate.
    pub std_cost: f64,
    pub estimate: Option<f64>,
    pub replicates: usize,
    pub master_seed: u64,
    /// Per-replicate test costs in replicate order.
    pub costs: Vec<f64>,
}

impl ExperimentRecord {
    fn from_costs(x: usize, costs: Vec<f64>, estimate: Option<f64>, master_seed: u64) -> Self {
        let n = costs.len() as f64;
        let mean = costs.iter().sum::<f64>() / n;
        let std = if costs.len() > 1 {
            (costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            x,
            mean_cost: mean,
            std_cost: std,
            estimate,
            replicates: costs.len(),
            master_seed,
            costs,
        }
    }
}

/// Shape of a sweep shared by both experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub widths: Vec<usize>,
    pub pool_size: usize,
    pub replicates: usize,
    pub master_seed: u64,
    pub training: TrainingConfig,
}

impl SweepConfig {
    fn topology(&self) -> Result<Topology> {
        let t = Topology::new(self.widths.clone())?;
        if t.input_width() != t.output_width() {
            return Err(Error::InvalidTopology(format!(
                "unitary tasks need equal input and output widths, got {:?}",
                self.widths
            )));
        }
        Ok(t)
    }

    fn validate(&self) -> Result<Topology> {
        self.training.validate()?;
        if self.pool_size == 0 {
            return Err(Error::EmptyDataset);
        }
        if self.replicates == 0 {
            return Err(Error::InvalidArgument("at least one replicate is required".into()));
        }
        self.topology()
    }

    fn replicate_task<T: Real>(&self, qubits: usize, replicate: usize) -> Result<(u64, Dataset<T>)> {
        let rep_seed = split_seed(self.master_seed, replicate as u64);
        let mut rng = SeededRng::new(split_seed(rep_seed, TASK_STREAM));
        let spec = TaskSpec::random(qubits, self.pool_size, &mut rng);
        Ok((rep_seed, generate_unitary_task(&spec)?))
    }

    fn run<T: Real>(&self, topology: &Topology, rep_seed: u64, n_train: usize, train_on: &Dataset<T>) -> Result<Network<T>> {
        let net_seed = split_seed(rep_seed, 1 + n_train as u64);
        let net = Network::random(topology.clone(), &mut SeededRng::new(net_seed));
        let mut config = self.training.clone();
        config.seed = net_seed;
        Ok(train(&net, train_on, &config)?.network)
    }
}

/// For each n: train on the first n pool pairs, report the cost over the
/// whole pool, averaged over replicates.
pub fn generalization_experiment<T: Real>(sweep: &SweepConfig, ns: &[usize]) -> Result<Vec<ExperimentRecord>> {
    let topology = sweep.validate()?;
    if let Some(&n) = ns.iter().find(|&&n| n == 0 || n > sweep.pool_size) {
        return Err(Error::InvalidArgument(format!("training size {n} outside 1..={}", sweep.pool_size)));
    }
    let qubits = topology.input_width();
    let jobs: Vec<(usize, usize)> = (0..sweep.replicates).flat_map(|r| ns.iter().map(move |&n| (r, n))).collect();
    let costs = jobs
        .par_iter()
        .map(|&(r, n)| {
            let (rep_seed, pool) = sweep.replicate_task::<T>(qubits, r)?;
            let trained = sweep.run(&topology, rep_seed, n, &pool.prefix(n)?)?;
            Ok(cost(&trained, &pool)?.as_f64())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ns
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let per_rep = (0..sweep.replicates).map(|r| costs[r * ns.len() + i]).collect();
            let estimate = optimal_cost_estimate(n, sweep.pool_size, 1 << qubits, false);
            ExperimentRecord::from_costs(n, per_rep, Some(estimate), sweep.master_seed)
        })
        .collect())
}

/// For each k: corrupt k pool pairs, train on the whole corrupted pool and
/// report the cost over the surviving good pairs. When every pair is
/// corrupted the original pairs stand in as the test set.
pub fn noise_experiment<T: Real>(sweep: &SweepConfig, noisy: &[usize]) -> Result<Vec<ExperimentRecord>> {
    let topology = sweep.validate()?;
    if let Some(&k) = noisy.iter().find(|&&k| k > sweep.pool_size) {
        return Err(Error::InvalidArgument(format!("cannot corrupt {k} of {} pairs", sweep.pool_size)));
    }
    let qubits = topology.input_width();
    let jobs: Vec<(usize, usize)> = (0..sweep.replicates).flat_map(|r| noisy.iter().map(move |&k| (r, k))).collect();
    let costs = jobs
        .par_iter()
        .map(|&(r, k)| {
            let (rep_seed, pool) = sweep.replicate_task::<T>(qubits, r)?;
            let mut rng = SeededRng::new(split_seed(rep_seed, CORRUPTION_STREAM + k as u64));
            let corrupted = corrupt_pairs(&pool, k, &mut rng)?;
            let trained = sweep.run(&topology, rep_seed, sweep.pool_size, &corrupted)?;
            let test = match corrupted.good_pairs() {
                Ok(good) => good,
                Err(Error::EmptyDataset) => pool,
                Err(e) => return Err(e),
            };
            Ok(cost(&trained, &test)?.as_f64())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(noisy
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let per_rep = (0..sweep.replicates).map(|r| costs[r * noisy.len() + i]).collect();
            ExperimentRecord::from_costs(k, per_rep, None, sweep.master_seed)
        })
        .collect())
}

/// Columns `n,mean_cost,std_cost,estimate,replicates,master_seed`.
pub fn write_generalization_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "mean_cost", "std_cost", "estimate", "replicates", "master_seed"])?;
    for r in records {
        w.write_record([
            r.x.to_string(),
            format_float(r.mean_cost),
            format_float(r.std_cost),
            r.estimate.map(format_float).unwrap_or_default(),
            r.replicates.to_string(),
            r.master_seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `n_noisy,mean_good_cost,std,replicates,master_seed`.
pub fn write_noise_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n_noisy", "mean_good_cost", "std", "replicates", "master_seed"])?;
    for r in records {
        w.write_record([
            r.x.to_string(),
            format_float(r.mean_cost),
            format_float(r.std_cost),
            r.replicates.to_string(),
            r.master_seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const RECORDS_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct RecordsDocument<'a> {
    schema_version: u32,
    kind: &'a str,
    records: &'a [ExperimentRecord],
}

/// Records as a JSON document tagged with `kind` and a schema version.
pub fn records_to_json(kind: &str, records: &[ExperimentRecord]) -> Result<String> {
    Ok(serde_json::to_string_pretty(&RecordsDocument {
        schema_version: RECORDS_SCHEMA_VERSION,
        kind,
        records,
    })?)
}
