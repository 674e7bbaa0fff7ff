//! Executes a resolved [`RunConfig`] and writes its artifacts.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use dqnn::experiments::{
    generalization_experiment, generate_unitary_task, noise_experiment, optimal_cost_estimate, records_to_json,
    write_generalization_csv, write_noise_csv, SweepConfig, TaskSpec,
};
use dqnn::linalg::{split_seed, SeededRng};
use dqnn::network::{Network, Topology};
use dqnn::qcircuit::{output_first, resource_count, subroutine2_feedforward, swap_test, DEFAULT_QUBIT_CAP};
use dqnn::trainer::{format_float, train, Dataset, TrainingConfig};
use dqnn::{Error, Network64};

use crate::config::{Format, Kind, RunConfig};

pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

// sub-streams of the master seed for `train` and `swaptest`
const TASK_STREAM: u64 = 0;
const INIT_STREAM: u64 = 1;
const SHOT_STREAM: u64 = 2;

/// Runs the subcommand and returns the one-line summary for standard output.
pub fn run(config: &RunConfig) -> Result<String> {
    let dir = config.out_dir();
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write(dir, "resolved-config.json", &to_json(config)?)?;
    match config.command {
        Kind::Train => run_train(config),
        Kind::Generalize => run_generalize(config),
        Kind::Noise => run_noise(config),
        Kind::Estimate => run_estimate(config),
        Kind::Swaptest => run_swaptest(config),
        Kind::Resources => run_resources(config),
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn to_json<S: Serialize>(value: &S) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    Ok(text)
}

fn csv_string(f: impl FnOnce(&mut Vec<u8>) -> dqnn::Result<()>) -> Result<String> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

fn seed(config: &RunConfig) -> u64 {
    config.params.seed.expect("seeded subcommand")
}

fn training_config(config: &RunConfig, seed: u64) -> TrainingConfig {
    let p = &config.params;
    let mut t = TrainingConfig::new(p.epsilon.unwrap(), p.eta.unwrap(), p.rounds.unwrap(), seed);
    t.record_gradient_norms = p.record_norms.unwrap_or(false);
    t
}

/// The loaded network if one was given, else a random one on the configured widths.
fn initial_network(config: &RunConfig, master: u64) -> Result<Network64> {
    let p = &config.params;
    match &p.network {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let net = Network64::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
            if let Some(w) = &p.widths {
                if w != net.topology().widths() {
                    return Err(Error::InvalidTopology(format!(
                        "--widths {w:?} disagrees with the loaded network {:?}",
                        net.topology().widths()
                    ))
                    .into());
                }
            }
            Ok(net)
        }
        None => {
            let topology = Topology::new(p.widths.clone().unwrap())?;
            Ok(Network::random(topology, &mut SeededRng::new(split_seed(master, INIT_STREAM))))
        }
    }
}

fn unitary_task(net: &Network64, pool: usize, master: u64) -> Result<Dataset<f64>> {
    let t = net.topology();
    if t.input_width() != t.output_width() {
        return Err(Error::InvalidTopology(format!("unitary tasks need equal end widths, got {:?}", t.widths())).into());
    }
    let mut rng = SeededRng::new(split_seed(master, TASK_STREAM));
    Ok(generate_unitary_task(&TaskSpec::random(t.input_width(), pool, &mut rng))?)
}

#[derive(Serialize)]
struct HistoryDocument<'a> {
    schema_version: u32,
    config: &'a TrainingConfig,
    costs: &'a [f64],
    perceptron_labels: &'a [(usize, usize)],
    gradient_norms: &'a [Vec<f64>],
    reunitarizations: usize,
}

fn run_train(config: &RunConfig) -> Result<String> {
    let master = seed(config);
    let net = initial_network(config, master)?;
    let data = unitary_task(&net, config.params.pool.unwrap(), master)?;
    let history = train(&net, &data, &training_config(config, split_seed(master, INIT_STREAM)))?;
    let dir = config.out_dir();
    match config.format() {
        Format::Csv => write(dir, "history.csv", &csv_string(|b| history.write_csv(b))?)?,
        Format::Json => write(
            dir,
            "history.json",
            &to_json(&HistoryDocument {
                schema_version: OUTPUT_SCHEMA_VERSION,
                config: &history.config,
                costs: &history.costs,
                perceptron_labels: &history.perceptron_labels,
                gradient_norms: &history.gradient_norms,
                reunitarizations: history.reunitarizations,
            })?,
        )?,
    }
    write(dir, "network.json", &(history.network.to_json()? + "\n"))?;
    Ok(format!(
        "train: final cost {} after {} rounds (initial {})",
        format_float(history.final_cost()),
        history.config.rounds,
        format_float(history.costs[0])
    ))
}

fn sweep(config: &RunConfig) -> SweepConfig {
    let p = &config.params;
    SweepConfig {
        widths: p.widths.clone().unwrap(),
        pool_size: p.pool.unwrap(),
        replicates: p.replicates.unwrap(),
        master_seed: seed(config),
        training: training_config(config, seed(config)),
    }
}

fn mean_list(records: &[dqnn::experiments::ExperimentRecord]) -> String {
    records.iter().map(|r| format!("{}:{:.4}", r.x, r.mean_cost)).collect::<Vec<_>>().join(" ")
}

fn run_generalize(config: &RunConfig) -> Result<String> {
    let ns = &config.params.n.as_ref().unwrap().0;
    let records = generalization_experiment::<f64>(&sweep(config), ns)?;
    let dir = config.out_dir();
    match config.format() {
        Format::Csv => write(dir, "generalization.csv", &csv_string(|b| write_generalization_csv(&records, b))?)?,
        Format::Json => write(dir, "generalization.json", &(records_to_json("generalization", &records)? + "\n"))?,
    }
    Ok(format!("generalize: mean test cost by n {}", mean_list(&records)))
}

fn run_noise(config: &RunConfig) -> Result<String> {
    let ks = &config.params.noisy.as_ref().unwrap().0;
    let records = noise_experiment::<f64>(&sweep(config), ks)?;
    let dir = config.out_dir();
    match config.format() {
        Format::Csv => write(dir, "noise.csv", &csv_string(|b| write_noise_csv(&records, b))?)?,
        Format::Json => write(dir, "noise.json", &(records_to_json("noise", &records)? + "\n"))?,
    }
    Ok(format!("noise: mean good-pair cost by corrupted count {}", mean_list(&records)))
}

#[derive(Serialize)]
struct EstimateRow {
    n: usize,
    #[serde(rename = "N")]
    big_n: usize,
    #[serde(rename = "D")]
    dim: usize,
    orthogonal: bool,
    estimate: f64,
}

fn run_estimate(config: &RunConfig) -> Result<String> {
    let p = &config.params;
    let (big_n, dim, orthogonal) = (p.pool.unwrap(), p.dim.unwrap(), p.orthogonal.unwrap());
    if big_n == 0 || dim == 0 {
        return Err(Error::InvalidArgument(format!("need N >= 1 and D >= 1, got N = {big_n}, D = {dim}")).into());
    }
    let mut rows = Vec::new();
    for &n in &p.n.as_ref().unwrap().0 {
        if n > big_n {
            return Err(Error::InvalidArgument(format!("n = {n} exceeds N = {big_n}")).into());
        }
        rows.push(EstimateRow {
            n,
            big_n,
            dim,
            orthogonal,
            estimate: optimal_cost_estimate(n, big_n, dim, orthogonal),
        });
    }
    let dir = config.out_dir();
    match config.format() {
        Format::Csv => {
            let mut text = String::from("n,N,D,orthogonal,estimate\n");
            for r in &rows {
                text += &format!("{},{},{},{},{}\n", r.n, r.big_n, r.dim, r.orthogonal, format_float(r.estimate));
            }
            write(dir, "estimate.csv", &text)?;
        }
        Format::Json => write(
            dir,
            "estimate.json",
            &to_json(&serde_json::json!({ "schema_version": OUTPUT_SCHEMA_VERSION, "rows": rows }))?,
        )?,
    }
    Ok(rows.iter().map(|r| format_float(r.estimate)).collect::<Vec<_>>().join("\n"))
}

#[derive(Serialize)]
struct SwapRow {
    pair: usize,
    shots: u64,
    zeros: u64,
    p0_exact: f64,
    p0_estimate: f64,
    fidelity_exact: f64,
    fidelity_estimate: f64,
}

fn run_swaptest(config: &RunConfig) -> Result<String> {
    let master = seed(config);
    let net = initial_network(config, master)?;
    let data = unitary_task(&net, config.params.pool.unwrap(), master)?;
    let shots = config.params.shots.unwrap();
    let sampler = SeededRng::new(split_seed(master, SHOT_STREAM));
    let mut rows = Vec::with_capacity(data.len());
    for (x, pair) in data.pairs().iter().enumerate() {
        let global = subroutine2_feedforward(&net, &pair.input, DEFAULT_QUBIT_CAP)?;
        let r = swap_test(&pair.output, &output_first(&net, &global)?, shots, &mut sampler.split(x as u64))?;
        rows.push(SwapRow {
            pair: x,
            shots,
            zeros: r.zeros,
            p0_exact: r.p0_exact,
            p0_estimate: r.p0_estimate,
            fidelity_exact: 2.0 * r.p0_exact - 1.0,
            fidelity_estimate: r.fidelity_raw,
        });
    }
    let n = rows.len() as f64;
    let estimate = rows.iter().map(|r| r.fidelity_estimate).sum::<f64>() / n;
    let exact = rows.iter().map(|r| r.fidelity_exact).sum::<f64>() / n;
    let dir = config.out_dir();
    match config.format() {
        Format::Csv => {
            let mut text = String::from("pair,shots,zeros,p0_exact,p0_estimate,fidelity_exact,fidelity_estimate\n");
            for r in &rows {
                text += &format!(
                    "{},{},{},{},{},{},{}\n",
                    r.pair,
                    r.shots,
                    r.zeros,
                    format_float(r.p0_exact),
                    format_float(r.p0_estimate),
                    format_float(r.fidelity_exact),
                    format_float(r.fidelity_estimate)
                );
            }
            write(dir, "swaptest.csv", &text)?;
        }
        Format::Json => write(
            dir,
            "swaptest.json",
            &to_json(&serde_json::json!({ "schema_version": OUTPUT_SCHEMA_VERSION, "rows": rows }))?,
        )?,
    }
    Ok(format!(
        "swaptest: estimated cost {} (exact {}) from {} pairs at {shots} shots",
        format_float(estimate),
        format_float(exact),
        rows.len()
    ))
}

fn run_resources(config: &RunConfig) -> Result<String> {
    let p = &config.params;
    let topology = Topology::new(p.widths.clone().unwrap())?;
    let count = resource_count(&topology, p.pool.unwrap() as u64, p.shots.unwrap());
    let dir = config.out_dir();
    match config.format() {
        Format::Csv => write(dir, "resources.txt", &count.to_string())?,
        Format::Json => write(
            dir,
            "resources.json",
            &to_json(&serde_json::json!({ "schema_version": OUTPUT_SCHEMA_VERSION, "resources": count }))?,
        )?,
    }
    Ok(format!(
        "resources: {} qubits (bound {}), {} gates and perceptrons, {} shots",
        count.qubits_required, count.qubit_bound, count.gates_and_perceptrons, count.total_shots
    ))
}
