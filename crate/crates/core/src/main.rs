use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use dpselect::analysis::Counterexample;
use dpselect::bandit::{run_bandit, BanditConfig, Policy};
use dpselect::harness::{
    ingest_scores, run_sweep, write_rows, ExperimentConfig, OutputFormat, ScenarioRef, ScoreMatrixFile,
};
use dpselect::heuristics::{utility_bound_flags, CorrelationReport, DEFAULT_BUCKETS};
use dpselect::mechanisms::DEFAULT_BETA;
use dpselect::scenarios::{ScenarioSpec, Workload};
use dpselect::{make_problem, Error, MechanismKind, MechanismSpec, Result, RngStream, SelectionProblem};

const STREAM_SELECT: u64 = 0x5E1E;
const STREAM_VERIFY: u64 = 0xD9;

#[derive(Parser)]
#[command(
    name = "dpselect",
    version,
    about = "Private selection under heterogeneous sensitivities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Master seed.
    #[arg(long, env = "DPSELECT_SEED", global = true)]
    seed: Option<u64>,
    /// Monte Carlo trials.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Comma-separated privacy budgets.
    #[arg(long, value_delimiter = ',', global = true)]
    eps: Vec<f64>,
    /// Mechanism name; repeat for several.
    #[arg(long = "mechanism", global = true)]
    mechanisms: Vec<String>,
    /// Scenario name, e.g. scenario1, s5, increasing_corr:2.
    #[arg(long, global = true)]
    scenario: Option<String>,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one mechanism once on a problem.
    Select {
        #[command(flatten)]
        common: Common,
        /// Comma-separated scores; overrides the scenario.
        #[arg(long, value_delimiter = ',')]
        scores: Vec<f64>,
        /// Comma-separated sensitivities matching `--scores`.
        #[arg(long, value_delimiter = ',')]
        sensitivities: Vec<f64>,
    },
    /// MSE over an ε grid for each mechanism on one scenario or score file.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Score matrix to ingest instead of a scenario.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        top_k: Option<usize>,
    },
    /// Two-armed bandit with a distribution shift.
    Bandit {
        #[command(flatten)]
        common: Common,
        /// Write the first policy's per-step trajectory here as CSV.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Empirical privacy-loss ratio of a known counterexample.
    VerifyDp {
        #[command(flatten)]
        common: Common,
        /// laplace_rnmh, exponential_rnmh or exponential_rs.
        #[arg(long, default_value = "laplace_rnmh")]
        counterexample: String,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
    },
    /// Correlation heuristics and utility-bound flags for a problem.
    Correlate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        scores: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        sensitivities: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_BUCKETS)]
        buckets: usize,
        #[arg(long, default_value_t = DEFAULT_BETA)]
        beta: f64,
    },
    /// Summarize the per-user problems built from a score matrix.
    Ingest {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        top_k: Option<usize>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 3 } else { 2 })
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Select {
            common,
            scores,
            sensitivities,
        } => select(&common, scores, sensitivities),
        Command::Sweep { common, input, top_k } => sweep(&common, input, top_k),
        Command::Bandit { common, trajectory } => bandit(&common, trajectory),
        Command::VerifyDp {
            common,
            counterexample,
            k,
            gamma,
        } => verify_dp(&common, &counterexample, k, gamma),
        Command::Correlate {
            common,
            scores,
            sensitivities,
            buckets,
            beta,
        } => correlate(&common, scores, sensitivities, buckets, beta),
        Command::Ingest { common, input, top_k } => ingest(&common, &input, top_k),
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit<T: Serialize>(rows: &[T], format: OutputFormat, path: Option<&Path>) -> Result<()> {
    let mut out = open_out(path)?;
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, rows).map_err(io::Error::from)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn parse_kinds(names: &[String]) -> Result<Vec<MechanismKind>> {
    names.iter().map(|n| n.parse()).collect()
}

fn first_eps(common: &Common) -> f64 {
    common.eps.first().copied().unwrap_or(1.0)
}

fn scenario_problem(
    common: &Common,
    seed: u64,
    scores: Vec<f64>,
    sensitivities: Vec<f64>,
) -> Result<(String, SelectionProblem)> {
    if !scores.is_empty() || !sensitivities.is_empty() {
        return Ok(("inline".into(), make_problem(scores, sensitivities)?));
    }
    let name = common.scenario.clone().unwrap_or_else(|| "scenario1".into());
    let spec: ScenarioSpec = name.parse()?;
    let problem = match spec.generate(seed)? {
        Workload::Fixed(p) => p,
        Workload::Trials(set) => set.problem(0),
        Workload::Users(mut users) => users.swap_remove(0),
    };
    Ok((name, problem))
}

#[derive(Serialize)]
struct SelectRow {
    scenario: String,
    mechanism: String,
    epsilon: f64,
    seed: u64,
    chosen_index: usize,
    chosen_score: f64,
    optimal_index: usize,
    optimal_score: f64,
    branch: Option<String>,
}

fn select(common: &Common, scores: Vec<f64>, sensitivities: Vec<f64>) -> Result<()> {
    let seed = common.seed.unwrap_or(0);
    let (label, problem) = scenario_problem(common, seed, scores, sensitivities)?;
    let kinds = if common.mechanisms.is_empty() {
        vec![MechanismKind::RnmExp]
    } else {
        parse_kinds(&common.mechanisms)?
    };
    let eps = first_eps(common);
    let mut rows = Vec::new();
    for (i, kind) in kinds.into_iter().enumerate() {
        let mechanism = MechanismSpec::new(kind, eps).build()?;
        let mut rng = RngStream::new(seed, STREAM_SELECT).derive(i as u64);
        let outcome = mechanism.select(&problem, &mut rng)?;
        rows.push(SelectRow {
            scenario: label.clone(),
            mechanism: kind.name().into(),
            epsilon: eps,
            seed,
            chosen_index: outcome.chosen_index,
            chosen_score: problem.scores()[outcome.chosen_index],
            optimal_index: problem.optimal_index(),
            optimal_score: problem.best_score(),
            branch: outcome.branch.map(|b| format!("{b:?}").to_lowercase()),
        });
    }
    emit(&rows, common.format.unwrap_or_default(), common.out.as_deref())
}

fn sweep(common: &Common, input: Option<PathBuf>, top_k: Option<usize>) -> Result<()> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(trials) = common.trials {
        config.trials = trials;
    }
    if !common.eps.is_empty() {
        config.epsilons = common.eps.clone();
    }
    if !common.mechanisms.is_empty() {
        config.mechanisms = parse_kinds(&common.mechanisms)?
            .into_iter()
            .map(|k| MechanismSpec::new(k, 1.0))
            .collect();
    }
    if let Some(name) = &common.scenario {
        config.scenario = Some(ScenarioRef::Named(name.clone()));
        config.ingest = None;
    }
    if let Some(path) = input {
        config.ingest = Some(path);
        config.scenario = None;
    }
    if let Some(k) = top_k {
        config.top_k = k;
    }
    if let Some(out) = &common.out {
        config.output = Some(out.clone());
    }
    if let Some(format) = common.format {
        config.format = format;
    }
    let rows = run_sweep(&config)?;
    let out = open_out(config.output.as_deref())?;
    write_rows(&rows, config.format, out)
}

#[derive(Serialize)]
struct BanditRow {
    policy: String,
    seed: u64,
    horizon: usize,
    t_shift: usize,
    total_reward: f64,
    reward_after_shift: f64,
    pulls_arm0: u64,
    pulls_arm1: u64,
}

fn bandit(common: &Common, trajectory: Option<PathBuf>) -> Result<()> {
    let config: BanditConfig = match &common.config {
        Some(path) => toml::from_str(&std::fs::read_to_string(path)?)
            .map_err(|e| Error::Config(format!("invalid bandit config: {e}")))?,
        None => BanditConfig::default(),
    };
    config.validate()?;
    let names: Vec<String> = if common.mechanisms.is_empty() {
        ["ucb", "krr", "rnm", "rs_gamma", "gem", "mgem"]
            .map(String::from)
            .to_vec()
    } else {
        common.mechanisms.clone()
    };
    let policies = names
        .iter()
        .map(|n| Policy::parse(n, &config))
        .collect::<Result<Vec<_>>>()?;
    let seed = common.seed.unwrap_or(0);
    let reps = common.trials.unwrap_or(1) as u64;
    let mut rows = Vec::new();
    for (p_idx, policy) in policies.iter().enumerate() {
        for r in 0..reps {
            let tr = run_bandit(&config, policy, seed + r)?;
            if p_idx == 0 && r == 0 {
                if let Some(path) = &trajectory {
                    tr.write_csv(BufWriter::new(File::create(path)?))?;
                }
            }
            rows.push(BanditRow {
                policy: policy.name().into(),
                seed: seed + r,
                horizon: config.horizon,
                t_shift: config.t_shift,
                total_reward: tr.total_reward(),
                reward_after_shift: tr.reward_after(config.t_shift),
                pulls_arm0: tr.pulls[0],
                pulls_arm1: tr.pulls[1],
            });
        }
    }
    emit(&rows, common.format.unwrap_or_default(), common.out.as_deref())
}

#[derive(Serialize)]
struct VerifyRow {
    counterexample: String,
    epsilon: f64,
    trials: usize,
    count_d1: u64,
    count_d2: u64,
    empirical_ratio: f64,
    ci_low: f64,
    ci_high: f64,
    analytic_ratio: Option<f64>,
    analytic_in_ci: bool,
}

fn verify_dp(common: &Common, name: &str, k: usize, gamma: f64) -> Result<()> {
    let epsilon = first_eps(common);
    let ce = match name.to_ascii_lowercase().replace('-', "_").as_str() {
        "laplace_rnmh" => Counterexample::LaplaceRnmh { k, epsilon },
        "exponential_rnmh" => Counterexample::ExponentialRnmh { epsilon },
        "exponential_rs" | "exponential_random_stopping" => {
            Counterexample::ExponentialRandomStopping { k, gamma, epsilon }
        }
        other => return Err(Error::Config(format!("unknown counterexample `{other}`"))),
    };
    let trials = common.trials.unwrap_or(1_000_000);
    let report = ce.verify(trials, &RngStream::new(common.seed.unwrap_or(0), STREAM_VERIFY))?;
    let row = VerifyRow {
        counterexample: name.into(),
        epsilon,
        trials,
        count_d1: report.count_d1,
        count_d2: report.count_d2,
        empirical_ratio: report.empirical_ratio,
        ci_low: report.ci_low,
        ci_high: report.ci_high,
        analytic_ratio: report.analytic_ratio,
        analytic_in_ci: report.analytic_ratio.is_some_and(|a| report.ci_contains(a)),
    };
    emit(&[row], common.format.unwrap_or_default(), common.out.as_deref())
}

#[derive(Serialize)]
struct CorrelateRow {
    scenario: String,
    candidates: usize,
    pearson: f64,
    spearman: f64,
    weighted: f64,
    epsilon: f64,
    beta: f64,
    gem_worse_than_rnm: bool,
    gem_worse_than_random: bool,
}

fn correlate(common: &Common, scores: Vec<f64>, sensitivities: Vec<f64>, buckets: usize, beta: f64) -> Result<()> {
    let (label, problem) = scenario_problem(common, common.seed.unwrap_or(0), scores, sensitivities)?;
    let report = CorrelationReport::for_problem(&problem, buckets)?;
    let mut rows = Vec::new();
    let eps_list = if common.eps.is_empty() {
        vec![1.0]
    } else {
        common.eps.clone()
    };
    for epsilon in eps_list {
        let flags = utility_bound_flags(&problem, epsilon, beta)?;
        rows.push(CorrelateRow {
            scenario: label.clone(),
            candidates: problem.len(),
            pearson: report.pearson,
            spearman: report.spearman,
            weighted: report.weighted,
            epsilon,
            beta,
            gem_worse_than_rnm: flags.gem_worse_than_rnm,
            gem_worse_than_random: flags.gem_worse_than_random,
        });
    }
    emit(&rows, common.format.unwrap_or_default(), common.out.as_deref())
}

#[derive(Serialize)]
struct IngestRow {
    user_id: String,
    candidates: usize,
    top_item: String,
    top_score: f64,
    spearman: f64,
    weighted: f64,
}

fn ingest(common: &Common, input: &Path, top_k: Option<usize>) -> Result<()> {
    let file = ScoreMatrixFile::from_path(input)?;
    let users = ingest_scores(&file, top_k.unwrap_or(dpselect::harness::DEFAULT_TOP_K))?;
    let mut rows = Vec::with_capacity(users.len());
    for u in users {
        let report = CorrelationReport::for_problem(&u.problem, DEFAULT_BUCKETS)?;
        rows.push(IngestRow {
            user_id: u.user_id,
            candidates: u.problem.len(),
            top_item: u.item_ids[u.problem.optimal_index()].clone(),
            top_score: u.problem.best_score(),
            spearman: report.spearman,
            weighted: report.weighted,
        });
    }
    emit(&rows, common.format.unwrap_or_default(), common.out.as_deref())
}
