//! Command-line and config-document parsing into a fully resolved [`RunConfig`].
//!
//! Precedence: command-line flag, then config document, then the subcommand's
//! default. Fields that do not apply to the chosen subcommand are rejected
//! wherever they come from.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "dqnn", version, about = "Train and evaluate dissipative quantum neural networks")]
pub struct Cli {
    /// JSON document supplying any of the subcommand's flags; flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train one network on a random unitary task.
    Train(Params),
    /// Test cost against the number of training pairs.
    Generalize(Params),
    /// Good-pair cost against the number of corrupted pairs.
    Noise(Params),
    /// Closed-form optimal test cost.
    Estimate(Params),
    /// Estimate a network's cost from sampled SWAP tests.
    Swaptest(Params),
    /// Qubit, gate and shot counts of the quantum algorithm.
    Resources(Params),
}

impl Command {
    pub fn params(&self) -> &Params {
        match self {
            Command::Train(p)
            | Command::Generalize(p)
            | Command::Noise(p)
            | Command::Estimate(p)
            | Command::Swaptest(p)
            | Command::Resources(p) => p,
        }
    }

    pub fn kind(&self) -> Kind {
        match self {
            Command::Train(_) => Kind::Train,
            Command::Generalize(_) => Kind::Generalize,
            Command::Noise(_) => Kind::Noise,
            Command::Estimate(_) => Kind::Estimate,
            Command::Swaptest(_) => Kind::Swaptest,
            Command::Resources(_) => Kind::Resources,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Train,
    Generalize,
    Noise,
    Estimate,
    Swaptest,
    Resources,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Ascending list of counts written `3`, `1,2,5`, `1-8` or `0-100:20`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "CountsRepr", into = "Vec<usize>")]
pub struct Counts(pub Vec<usize>);

#[derive(Deserialize)]
#[serde(untagged)]
enum CountsRepr {
    One(usize),
    List(Vec<usize>),
    Text(String),
}

impl From<CountsRepr> for Counts {
    fn from(r: CountsRepr) -> Self {
        match r {
            CountsRepr::One(n) => Counts(vec![n]),
            CountsRepr::List(v) => Counts(v),
            // unparsable text becomes an empty list, rejected during resolution
            CountsRepr::Text(s) => s.parse().unwrap_or(Counts(Vec::new())),
        }
    }
}

impl From<Counts> for Vec<usize> {
    fn from(c: Counts) -> Self {
        c.0
    }
}

impl FromStr for Counts {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("`{s}` is not a count list such as 3, 1,2,5, 1-8 or 0-100:20");
        let mut out = Vec::new();
        for item in s.split(',').map(str::trim) {
            let (range, step) = match item.split_once(':') {
                Some((r, st)) => (r, st.parse::<usize>().map_err(|_| bad())?),
                None => (item, 1),
            };
            if step == 0 {
                return Err(bad());
            }
            match range.split_once('-') {
                Some((a, b)) => {
                    let (a, b): (usize, usize) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                    if a > b {
                        return Err(bad());
                    }
                    out.extend((a..=b).step_by(step));
                }
                None => out.push(range.parse().map_err(|_| bad())?),
            }
        }
        Ok(Counts(out))
    }
}

impl fmt::Display for Counts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&items.join(","))
    }
}

/// Every tunable of every subcommand. Unset fields are `None`.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Master seed; required by every subcommand that draws randomness.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// Layer widths, input first, e.g. 3,3,3.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub widths: Option<Vec<usize>>,

    /// Pool size: number of training pairs drawn for the task.
    #[arg(long = "N", value_name = "N")]
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub pool: Option<usize>,

    /// Training-pair counts, e.g. 1-8.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Counts>,

    /// Corrupted-pair counts, e.g. 0-100:20.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noisy: Option<Counts>,

    /// Hilbert-space dimension of the task.
    #[arg(long = "D", value_name = "D")]
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,

    /// Use the estimate for mutually orthogonal training inputs.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orthogonal: Option<bool>,

    /// Step size ε.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,

    /// Learning rate η.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,

    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,

    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,

    /// Shots per SWAP test.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,

    /// Record ‖K‖ per perceptron at every round.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_norms: Option<bool>,

    /// Start from this serialized network instead of a random one.
    #[arg(long, value_name = "FILE")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl Params {
    fn set_fields(&self) -> Vec<&'static str> {
        let p = self;
        [
            ("seed", p.seed.is_some()),
            ("widths", p.widths.is_some()),
            ("N", p.pool.is_some()),
            ("n", p.n.is_some()),
            ("noisy", p.noisy.is_some()),
            ("D", p.dim.is_some()),
            ("orthogonal", p.orthogonal.is_some()),
            ("epsilon", p.epsilon.is_some()),
            ("eta", p.eta.is_some()),
            ("rounds", p.rounds.is_some()),
            ("replicates", p.replicates.is_some()),
            ("shots", p.shots.is_some()),
            ("record_norms", p.record_norms.is_some()),
            ("network", p.network.is_some()),
            ("out", p.out.is_some()),
            ("format", p.format.is_some()),
        ]
        .into_iter()
        .filter_map(|(name, set)| set.then_some(name))
        .collect()
    }

    /// Field-wise `self` if set, otherwise `other`.
    fn or(self, other: Params) -> Params {
        Params {
            seed: self.seed.or(other.seed),
            widths: self.widths.or(other.widths),
            pool: self.pool.or(other.pool),
            n: self.n.or(other.n),
            noisy: self.noisy.or(other.noisy),
            dim: self.dim.or(other.dim),
            orthogonal: self.orthogonal.or(other.orthogonal),
            epsilon: self.epsilon.or(other.epsilon),
            eta: self.eta.or(other.eta),
            rounds: self.rounds.or(other.rounds),
            replicates: self.replicates.or(other.replicates),
            shots: self.shots.or(other.shots),
            record_norms: self.record_norms.or(other.record_norms),
            network: self.network.or(other.network),
            out: self.out.or(other.out),
            format: self.format.or(other.format),
        }
    }
}

/// Bad flags, config documents or missing fields. Exit code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

/// A subcommand with every applicable field materialized.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub schema_version: u32,
    pub command: Kind,
    #[serde(flatten)]
    pub params: Params,
}

impl RunConfig {
    pub fn out_dir(&self) -> &Path {
        self.params.out.as_deref().expect("resolved configs always carry an output directory")
    }

    pub fn format(&self) -> Format {
        self.params.format.unwrap_or_default()
    }
}

fn allowed(kind: Kind) -> &'static [&'static str] {
    match kind {
        Kind::Train => &[
            "seed", "widths", "N", "epsilon", "eta", "rounds", "record_norms", "network", "out", "format",
        ],
        Kind::Generalize => &["seed", "widths", "N", "n", "epsilon", "eta", "rounds", "replicates", "out", "format"],
        Kind::Noise => &["seed", "widths", "N", "noisy", "epsilon", "eta", "rounds", "replicates", "out", "format"],
        Kind::Estimate => &["n", "N", "D", "orthogonal", "out", "format"],
        Kind::Swaptest => &["seed", "widths", "N", "shots", "network", "out", "format"],
        Kind::Resources => &["widths", "N", "shots", "out", "format"],
    }
}

fn defaults(kind: Kind) -> Params {
    let base = Params {
        out: Some(PathBuf::from("dqnn-out")),
        format: Some(Format::Csv),
        ..Params::default()
    };
    match kind {
        Kind::Train => Params {
            widths: Some(vec![2, 3, 2]),
            pool: Some(10),
            epsilon: Some(0.1),
            eta: Some(1.0),
            rounds: Some(100),
            record_norms: Some(false),
            ..base
        },
        Kind::Generalize => Params {
            widths: Some(vec![3, 3, 3]),
            pool: Some(10),
            n: Some(Counts((1..=8).collect())),
            epsilon: Some(0.1),
            eta: Some(2.0 / 3.0),
            rounds: Some(1000),
            replicates: Some(20),
            ..base
        },
        Kind::Noise => Params {
            widths: Some(vec![2, 3, 2]),
            pool: Some(100),
            noisy: Some(Counts((0..=100).step_by(10).collect())),
            epsilon: Some(0.1),
            eta: Some(1.0),
            rounds: Some(300),
            replicates: Some(5),
            ..base
        },
        Kind::Estimate => Params {
            orthogonal: Some(false),
            ..base
        },
        Kind::Swaptest => Params {
            widths: Some(vec![2, 2]),
            pool: Some(10),
            shots: Some(1000),
            ..base
        },
        Kind::Resources => Params {
            widths: Some(vec![2, 3, 2]),
            pool: Some(10),
            shots: Some(1000),
            ..base
        },
    }
}

/// Reads a config document; unknown keys are errors.
pub fn read_config_document(path: &Path) -> Result<Params, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("config: cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("config: {}: {e}", path.display())))
}

/// Merges flags over the document over defaults and checks that the result
/// is complete for `kind`.
pub fn resolve(kind: Kind, flags: Params, document: Params) -> Result<RunConfig, UsageError> {
    let ok = allowed(kind);
    for (source, p) in [("flag", &flags), ("config", &document)] {
        if let Some(field) = p.set_fields().into_iter().find(|f| !ok.contains(f)) {
            return Err(usage(format!("{source} field `{field}` does not apply to `{}`", kind_name(kind))));
        }
    }
    let explicit_widths = flags.widths.is_some() || document.widths.is_some();
    let mut params = flags.or(document).or(defaults(kind));
    // a loaded network brings its own widths
    if params.network.is_some() && !explicit_widths {
        params.widths = None;
    }
    if ok.contains(&"seed") && params.seed.is_none() {
        return Err(usage("missing required field `seed` (pass --seed or set it in the config)"));
    }
    for required in ok {
        let optional = *required == "network" || (*required == "widths" && params.network.is_some());
        if !optional && !params.set_fields().contains(required) {
            return Err(usage(format!("missing required field `{required}`")));
        }
    }
    for (field, counts) in [("n", &params.n), ("noisy", &params.noisy)] {
        if let Some(c) = counts {
            if c.0.is_empty() {
                return Err(usage(format!("field `{field}` must list at least one count")));
            }
        }
    }
    Ok(RunConfig {
        schema_version: CONFIG_SCHEMA_VERSION,
        command: kind,
        params,
    })
}

fn kind_name(kind: Kind) -> &'static str {
    match kind {
        Kind::Train => "train",
        Kind::Generalize => "generalize",
        Kind::Noise => "noise",
        Kind::Estimate => "estimate",
        Kind::Swaptest => "swaptest",
        Kind::Resources => "resources",
    }
}

/// Full parse: argv plus the optional `--config` document.
pub fn parse_config<I, S>(argv: I) -> anyhow::Result<RunConfig>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let document = match &cli.config {
        Some(path) => read_config_document(path)?,
        None => Params::default(),
    };
    Ok(resolve(cli.command.kind(), cli.command.params().clone(), document)?)
}
