//! Experiment configuration and ε sweeps.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::evaluate::evaluate_mse;
use crate::harness::ingest::{ingest_scores, ScoreMatrixFile, DEFAULT_TOP_K};
use crate::mechanisms::{MechanismKind, MechanismSpec};
use crate::rng::RngStream;
use crate::scenarios::{ScenarioSpec, Workload};

pub const DEFAULT_EPSILON_POINTS: usize = 12;
pub const DEFAULT_SWEEP_TRIALS: usize = 1000;
pub const DEFAULT_SEED: u64 = 0;
const STREAM_SWEEP: u64 = 0x5EE9;

/// `count` log-spaced values from 0.01 to 16.
pub fn default_epsilon_grid(count: usize) -> Vec<f64> {
    let (lo, hi): (f64, f64) = (0.01, 16.0);
    if count == 1 {
        return vec![lo];
    }
    (0..count)
        .map(|i| {
            let f = i as f64 / (count - 1) as f64;
            (lo.ln() + f * (hi.ln() - lo.ln())).exp()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown output format `{other}`"))),
        }
    }
}

/// A scenario given by name (`scenario1`, `increasing_corr:0.3`, …) or as
/// a full table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioRef {
    Named(String),
    Spec(ScenarioSpec),
}

impl ScenarioRef {
    pub fn resolve(&self) -> Result<ScenarioSpec> {
        match self {
            ScenarioRef::Named(name) => name.parse(),
            ScenarioRef::Spec(spec) => Ok(spec.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub scenario: Option<ScenarioRef>,
    /// Score matrix to ingest instead of a synthetic scenario.
    #[serde(default)]
    pub ingest: Option<PathBuf>,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    #[serde(default)]
    pub mechanisms: Vec<MechanismSpec>,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

fn default_top_k() -> usize {
    DEFAULT_TOP_K
}
fn default_trials() -> usize {
    DEFAULT_SWEEP_TRIALS
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: None,
            ingest: None,
            top_k: DEFAULT_TOP_K,
            mechanisms: Vec::new(),
            epsilons: Vec::new(),
            trials: DEFAULT_SWEEP_TRIALS,
            seed: DEFAULT_SEED,
            output: None,
            format: OutputFormat::Csv,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Epsilon grid, falling back to the default log grid when empty.
    pub fn epsilon_grid(&self) -> Vec<f64> {
        if self.epsilons.is_empty() {
            default_epsilon_grid(DEFAULT_EPSILON_POINTS)
        } else {
            self.epsilons.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mechanisms.is_empty() {
            return Err(Error::Config("at least one mechanism is required".into()));
        }
        if let Some(&e) = self.epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::param("epsilon", e, "must be positive and finite"));
        }
        if self.trials == 0 {
            return Err(Error::param("trials", 0.0, "must be positive"));
        }
        match (&self.scenario, &self.ingest) {
            (None, None) => Err(Error::Config("either scenario or ingest must be given".into())),
            (Some(_), Some(_)) => Err(Error::Config("scenario and ingest are mutually exclusive".into())),
            _ => Ok(()),
        }
    }

    /// The workload and its label.
    pub fn workload(&self) -> Result<(String, Workload)> {
        if let Some(path) = &self.ingest {
            let file = ScoreMatrixFile::from_path(path)?;
            let users = ingest_scores(&file, self.top_k)?;
            if users.is_empty() {
                return Err(Error::Config("ingested file holds no usable users".into()));
            }
            let label = format!("ingest:{}", path.display());
            return Ok((label, Workload::Users(users.into_iter().map(|u| u.problem).collect())));
        }
        let spec = self
            .scenario
            .as_ref()
            .ok_or_else(|| Error::Config("no scenario given".into()))?
            .resolve()?;
        let label = match &self.scenario {
            Some(ScenarioRef::Named(n)) => n.clone(),
            _ => spec.name(),
        };
        Ok((label, spec.generate(self.seed)?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scenario: String,
    pub mechanism: String,
    pub epsilon: f64,
    pub trials: usize,
    pub mse: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

fn kind_tag(kind: MechanismKind) -> u64 {
    MechanismKind::ALL.iter().position(|k| *k == kind).unwrap_or(0) as u64
}

/// Evaluate every (mechanism, ε) cell. Each cell draws from a stream
/// derived from the seed, the mechanism and ε, so cells are independent of
/// which other cells are present.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let (label, workload) = config.workload()?;
    let root = RngStream::new(config.seed, STREAM_SWEEP);
    let mut rows = Vec::new();
    for (m_idx, spec) in config.mechanisms.iter().enumerate() {
        for eps in config.epsilon_grid() {
            let spec = spec.clone().with_epsilon(eps);
            let stream = root.derive_path(&[kind_tag(spec.kind), m_idx as u64, eps.to_bits()]);
            let est = evaluate_mse(&workload, &spec, config.trials, &stream)?;
            log::debug!("{label} {} eps={eps}: mse {}", spec.kind, est.mean);
            rows.push(SweepRow {
                scenario: label.clone(),
                mechanism: spec.kind.name().to_string(),
                epsilon: eps,
                trials: config.trials,
                mse: est.mean,
                ci_low: est.ci_low,
                ci_high: est.ci_high,
                seed: config.seed,
            });
        }
    }
    Ok(rows)
}

pub fn write_rows<W: Write>(rows: &[SweepRow], format: OutputFormat, mut out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_HEADER)?;
            for r in rows {
                w.write_record(&[
                    r.scenario.clone(),
                    r.mechanism.clone(),
                    r.epsilon.to_string(),
                    r.trials.to_string(),
                    r.mse.to_string(),
                    r.ci_low.to_string(),
                    r.ci_high.to_string(),
                    r.seed.to_string(),
                ])?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, rows).map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

const CSV_HEADER: [&str; 8] = [
    "scenario",
    "mechanism",
    "epsilon",
    "trials",
    "mse",
    "ci_low",
    "ci_high",
    "seed",
];

pub fn read_rows_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != CSV_HEADER.len() {
            return Err(Error::Malformed {
                line,
                reason: "wrong number of fields".into(),
            });
        }
        let bad = |field: &str| Error::Malformed {
            line,
            reason: format!("cannot parse {field}"),
        };
        let float = |i: usize| record[i].parse::<f64>().map_err(|_| bad(CSV_HEADER[i]));
        rows.push(SweepRow {
            scenario: record[0].to_string(),
            mechanism: record[1].to_string(),
            epsilon: float(2)?,
            trials: record[3].parse().map_err(|_| bad("trials"))?,
            mse: float(4)?,
            ci_low: float(5)?,
            ci_high: float(6)?,
            seed: record[7].parse().map_err(|_| bad("seed"))?,
        });
    }
    Ok(rows)
}
