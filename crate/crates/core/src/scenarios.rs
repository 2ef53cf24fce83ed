//! Synthetic scenario generators and the quantile-based sensitivity pipeline.
//!
//! Trial-based scenarios draw `trials` score vectors from per-candidate
//! distributions, take each candidate's sensitivity as the width of its
//! 10–90 quantile band and clip every score into that band.

use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{make_problem, SelectionProblem};
use crate::rng::RngStream;
use crate::stats::{quantile_sorted, standard_normal, truncated_normal};

pub const DEFAULT_CANDIDATES: usize = 100;
pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_QUANTILE_LO: f64 = 0.1;
pub const DEFAULT_QUANTILE_HI: f64 = 0.9;
pub const POLARIZED_QUANTILE_LO: f64 = 0.05;
pub const POLARIZED_QUANTILE_HI: f64 = 0.95;
pub const DEFAULT_USERS: usize = 5000;
pub const STRONG_POLARIZATION_SIGMA: f64 = 0.5;
pub const WEAK_POLARIZATION_SIGMA: f64 = 3.0;

const SIGMA_LOC: f64 = 0.5;
const SIGMA_SCALE: f64 = 1.0;
const SIGMA_MIN: f64 = 0.01;
const SIGMA_MAX: f64 = 0.7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSet {
    pub raw_scores: Vec<Vec<f64>>,
    pub clipped_scores: Vec<Vec<f64>>,
    pub sensitivities: Vec<f64>,
    pub quantile_lo: f64,
    pub quantile_hi: f64,
}

impl TrialSet {
    pub fn trials(&self) -> usize {
        self.clipped_scores.len()
    }

    pub fn candidates(&self) -> usize {
        self.sensitivities.len()
    }

    /// The selection problem of trial `i`: clipped scores with the shared
    /// sensitivities.
    pub fn problem(&self, i: usize) -> SelectionProblem {
        make_problem(self.clipped_scores[i].clone(), self.sensitivities.clone())
            .expect("trial sets hold validated rows")
    }

    /// Per-candidate mean of the clipped scores.
    pub fn mean_scores(&self) -> Vec<f64> {
        let n = self.trials() as f64;
        let mut means = vec![0.0; self.candidates()];
        for row in &self.clipped_scores {
            for (m, x) in means.iter_mut().zip(row) {
                *m += x;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        means
    }
}

/// Per-candidate `q_lo`/`q_hi` quantiles of `raw_scores` (trial-major rows),
/// their widths as sensitivities and the clipped matrix.
pub fn estimate_sensitivities(raw_scores: Vec<Vec<f64>>, q_lo: f64, q_hi: f64) -> Result<TrialSet> {
    if raw_scores.len() < 2 {
        return Err(Error::Config("sensitivity estimation needs at least two trials".into()));
    }
    if !(0.0..=1.0).contains(&q_lo) || !(0.0..=1.0).contains(&q_hi) || q_lo > q_hi {
        return Err(Error::param("quantile_lo", q_lo, "need 0 <= q_lo <= q_hi <= 1"));
    }
    let k = raw_scores[0].len();
    if k == 0 {
        return Err(Error::Empty);
    }
    for row in &raw_scores {
        if row.len() != k {
            return Err(Error::LengthMismatch {
                scores: row.len(),
                sensitivities: k,
            });
        }
        if let Some((index, &value)) = row.iter().enumerate().find(|(_, x)| !x.is_finite()) {
            return Err(Error::InvalidScore { index, value });
        }
    }
    let mut lo = vec![0.0; k];
    let mut hi = vec![0.0; k];
    let mut column = Vec::with_capacity(raw_scores.len());
    for a in 0..k {
        column.clear();
        column.extend(raw_scores.iter().map(|row| row[a]));
        column.sort_by(f64::total_cmp);
        lo[a] = quantile_sorted(&column, q_lo);
        hi[a] = quantile_sorted(&column, q_hi);
    }
    let clipped_scores = raw_scores
        .iter()
        .map(|row| row.iter().enumerate().map(|(a, x)| x.clamp(lo[a], hi[a])).collect())
        .collect();
    let sensitivities = lo.iter().zip(&hi).map(|(l, h)| h - l).collect();
    Ok(TrialSet {
        raw_scores,
        clipped_scores,
        sensitivities,
        quantile_lo: q_lo,
        quantile_hi: q_hi,
    })
}

fn check_frac(frac_high: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&frac_high) {
        return Err(Error::param("frac_high", frac_high, "must lie in [0, 1]"));
    }
    Ok(())
}

fn high_count(n: usize, frac_high: f64) -> usize {
    ((frac_high * n as f64).ceil() as usize).min(n)
}

/// `⌈frac_high·n⌉` candidates at `(q_hi, d_hi)` followed by the rest at
/// `(q_lo, d_lo)`.
pub fn gen_bimodal(n: usize, frac_high: f64, q_hi: f64, q_lo: f64, d_hi: f64, d_lo: f64) -> Result<SelectionProblem> {
    check_frac(frac_high)?;
    let h = high_count(n, frac_high);
    let scores = (0..n).map(|i| if i < h { q_hi } else { q_lo }).collect();
    let sens = (0..n).map(|i| if i < h { d_hi } else { d_lo }).collect();
    make_problem(scores, sens)
}

/// Bimodal scores where each score group alternates between the two
/// sensitivities, starting with `d_first`.
pub fn gen_bimodal_balanced(
    n: usize,
    frac_high: f64,
    q_hi: f64,
    q_lo: f64,
    d_first: f64,
    d_second: f64,
) -> Result<SelectionProblem> {
    check_frac(frac_high)?;
    let h = high_count(n, frac_high);
    let scores = (0..n).map(|i| if i < h { q_hi } else { q_lo }).collect();
    let sens = (0..n)
        .map(|i| {
            let pos = if i < h { i } else { i - h };
            if pos % 2 == 0 {
                d_first
            } else {
                d_second
            }
        })
        .collect();
    make_problem(scores, sens)
}

/// High scores carry the large sensitivity.
pub fn scenario1() -> SelectionProblem {
    gen_bimodal(DEFAULT_CANDIDATES, 0.5, 1.0, -1.0, 1.8, 1.0).expect("valid constants")
}

/// High scores carry the small sensitivity.
pub fn scenario2() -> SelectionProblem {
    gen_bimodal(DEFAULT_CANDIDATES, 0.5, 1.0, -1.0, 1.0, 1.8).expect("valid constants")
}

/// Both score groups split evenly between the two sensitivities.
pub fn scenario3() -> SelectionProblem {
    gen_bimodal_balanced(DEFAULT_CANDIDATES, 0.5, 1.0, -1.0, 1.0, 1.8).expect("valid constants")
}

fn scenario_stream(seed: u64, tag: u64) -> (RngStream, RngStream) {
    let root = RngStream::new(seed, tag);
    (root.derive(0), root.derive(1))
}

fn sample_sigmas(k: usize, rng: &mut RngStream) -> Vec<f64> {
    (0..k)
        .map(|_| truncated_normal(SIGMA_LOC, SIGMA_SCALE, SIGMA_MIN, SIGMA_MAX, rng))
        .collect()
}

fn normal_rows(means: &[f64], sds: &[f64], trials: usize, rng: &mut RngStream) -> Vec<Vec<f64>> {
    (0..trials)
        .map(|_| {
            means
                .iter()
                .zip(sds)
                .map(|(m, s)| m + s * standard_normal(rng))
                .collect()
        })
        .collect()
}

fn default_pipeline(raw: Vec<Vec<f64>>) -> Result<TrialSet> {
    estimate_sensitivities(raw, DEFAULT_QUANTILE_LO, DEFAULT_QUANTILE_HI)
}

/// Candidate `a = 1..=k` scores `N(ln a, σ_a²)`, the `σ_a` drawn from a
/// normal truncated to `[0.01, 0.7]` and sorted ascending.
pub fn trialset_s4(candidates: usize, trials: usize, seed: u64) -> Result<TrialSet> {
    let (mut params, mut draws) = scenario_stream(seed, 4);
    let mut sigmas = sample_sigmas(candidates, &mut params);
    sigmas.sort_by(f64::total_cmp);
    let means: Vec<f64> = (1..=candidates).map(|a| (a as f64).ln()).collect();
    default_pipeline(normal_rows(&means, &sigmas, trials, &mut draws))
}

pub fn gen_trialset_s4(seed: u64) -> Result<TrialSet> {
    trialset_s4(DEFAULT_CANDIDATES, DEFAULT_TRIALS, seed)
}

/// Candidate `a = 1..=k` scores `N(0.1a, sd = 2.3 − 0.02a)`.
pub fn trialset_s5(candidates: usize, trials: usize, seed: u64) -> Result<TrialSet> {
    let (_, mut draws) = scenario_stream(seed, 5);
    let means: Vec<f64> = (1..=candidates).map(|a| 0.1 * a as f64).collect();
    let sds: Vec<f64> = (1..=candidates).map(|a| 2.3 - 0.02 * a as f64).collect();
    if sds.iter().any(|&s| s <= 0.0) {
        return Err(Error::param(
            "candidates",
            candidates as f64,
            "scenario 5 needs at most 114 candidates",
        ));
    }
    default_pipeline(normal_rows(&means, &sds, trials, &mut draws))
}

pub fn gen_trialset_s5(seed: u64) -> Result<TrialSet> {
    trialset_s5(DEFAULT_CANDIDATES, DEFAULT_TRIALS, seed)
}

/// Independent `μ_a ~ U[0,1]` and truncated-normal `σ_a`.
pub fn trialset_s6(candidates: usize, trials: usize, seed: u64) -> Result<TrialSet> {
    let (mut params, mut draws) = scenario_stream(seed, 6);
    let means: Vec<f64> = (0..candidates).map(|_| params.random::<f64>()).collect();
    let sigmas = sample_sigmas(candidates, &mut params);
    default_pipeline(normal_rows(&means, &sigmas, trials, &mut draws))
}

pub fn gen_trialset_s6(seed: u64) -> Result<TrialSet> {
    trialset_s6(DEFAULT_CANDIDATES, DEFAULT_TRIALS, seed)
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Spread of candidate `a` in the increasing-correlation family, an
/// increasing function of its latent `x_a` with range `(0.01, 0.7)`.
pub fn increasing_corr_sigma(x: f64) -> f64 {
    SIGMA_MIN + (SIGMA_MAX - SIGMA_MIN) * logistic(1.7 * x)
}

/// Each candidate holds fixed latents `x_a, z_a ~ N(0,1)`. Its mean score is
/// `(t·x_a + z_a)/5` and its spread [`increasing_corr_sigma`]`(x_a)`, so the
/// sign of `t` sets the sign of the score/sensitivity correlation. Every
/// trial row is shifted so that its minimum is 0.
pub fn trialset_increasing_corr(t: f64, candidates: usize, trials: usize, seed: u64) -> Result<TrialSet> {
    if !t.is_finite() {
        return Err(Error::param("t", t, "must be finite"));
    }
    let (mut params, mut draws) = scenario_stream(seed, 7);
    let xs: Vec<f64> = (0..candidates).map(|_| standard_normal(&mut params)).collect();
    let zs: Vec<f64> = (0..candidates).map(|_| standard_normal(&mut params)).collect();
    let means: Vec<f64> = xs.iter().zip(&zs).map(|(x, z)| (t * x + z) / 5.0).collect();
    let sds: Vec<f64> = xs.iter().map(|&x| increasing_corr_sigma(x)).collect();
    let mut rows = normal_rows(&means, &sds, trials, &mut draws);
    for row in &mut rows {
        let min = row.iter().copied().fold(f64::INFINITY, f64::min);
        row.iter_mut().for_each(|x| *x -= min);
    }
    default_pipeline(rows)
}

pub fn gen_trialset_increasing_corr(t: f64, seed: u64) -> Result<TrialSet> {
    trialset_increasing_corr(t, DEFAULT_CANDIDATES, DEFAULT_TRIALS, seed)
}

/// Group of user `u` in the polarized data: the first half is group 0.
pub fn polarized_group(u: usize, users: usize) -> usize {
    usize::from(u >= users / 2)
}

/// Base score of candidate `a` for `group`: `−8 + 8a/k` or `8 − 8a/k`.
pub fn polarized_base(group: usize, a: usize, candidates: usize) -> f64 {
    let step = 8.0 * a as f64 / candidates as f64;
    if group == 0 {
        -8.0 + step
    } else {
        8.0 - step
    }
}

/// Raw polarized score matrix (user-major).
pub fn polarized_scores(users: usize, candidates: usize, sigma: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    if users == 0 || !users.is_multiple_of(2) {
        return Err(Error::param("users", users as f64, "must be a positive even number"));
    }
    if candidates == 0 {
        return Err(Error::Empty);
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", sigma, "must be nonnegative and finite"));
    }
    let (_, mut draws) = scenario_stream(seed, 8);
    Ok((0..users)
        .map(|u| {
            let g = polarized_group(u, users);
            (0..candidates)
                .map(|a| polarized_base(g, a, candidates) + sigma * standard_normal(&mut draws))
                .collect()
        })
        .collect())
}

/// One selection problem per user. Candidate sensitivities are the widths
/// of the 5–95 quantile bands pooled over all users.
pub fn gen_polarized(users: usize, candidates: usize, sigma: f64, seed: u64) -> Result<Vec<SelectionProblem>> {
    let scores = polarized_scores(users, candidates, sigma, seed)?;
    let set = estimate_sensitivities(scores, POLARIZED_QUANTILE_LO, POLARIZED_QUANTILE_HI)?;
    set.raw_scores
        .into_iter()
        .map(|row| make_problem(row, set.sensitivities.clone()))
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BimodalLayout {
    #[default]
    Grouped,
    Balanced,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioKind {
    Bimodal {
        #[serde(default = "half")]
        frac_high: f64,
        #[serde(default = "one")]
        q_hi: f64,
        #[serde(default = "minus_one")]
        q_lo: f64,
        d_hi: f64,
        d_lo: f64,
        #[serde(default)]
        layout: BimodalLayout,
    },
    S4LognormalMeans,
    S5Linear,
    S6Uniform,
    IncreasingCorr {
        t: f64,
    },
    Polarized {
        #[serde(default = "default_users")]
        users: usize,
        sigma: f64,
    },
}

fn half() -> f64 {
    0.5
}
fn one() -> f64 {
    1.0
}
fn minus_one() -> f64 {
    -1.0
}
fn default_users() -> usize {
    DEFAULT_USERS
}
fn default_candidates() -> usize {
    DEFAULT_CANDIDATES
}
fn default_trials() -> usize {
    DEFAULT_TRIALS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    #[serde(flatten)]
    pub kind: ScenarioKind,
    #[serde(default = "default_candidates")]
    pub candidates: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

/// What a mechanism is evaluated on.
#[derive(Clone, Debug, PartialEq)]
pub enum Workload {
    /// One problem reused for every trial.
    Fixed(SelectionProblem),
    /// Trial `i` uses row `i mod N` of the clipped scores.
    Trials(TrialSet),
    /// One problem per user.
    Users(Vec<SelectionProblem>),
}

impl Workload {
    /// Number of distinct problems (1 for a fixed problem).
    pub fn len(&self) -> usize {
        match self {
            Workload::Fixed(_) => 1,
            Workload::Trials(t) => t.trials(),
            Workload::Users(u) => u.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind) -> Self {
        Self {
            kind,
            candidates: DEFAULT_CANDIDATES,
            trials: DEFAULT_TRIALS,
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            ScenarioKind::Bimodal { .. } => "bimodal".into(),
            ScenarioKind::S4LognormalMeans => "s4_lognormal_means".into(),
            ScenarioKind::S5Linear => "s5_linear".into(),
            ScenarioKind::S6Uniform => "s6_uniform".into(),
            ScenarioKind::IncreasingCorr { t } => format!("increasing_corr:{t}"),
            ScenarioKind::Polarized { sigma, .. } => format!("polarized:{sigma}"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.candidates < 2 {
            return Err(Error::param("candidates", self.candidates as f64, "must be at least 2"));
        }
        if self.trials < 1 {
            return Err(Error::param("trials", 0.0, "must be positive"));
        }
        Ok(())
    }

    pub fn generate(&self, seed: u64) -> Result<Workload> {
        self.validate()?;
        let (k, n) = (self.candidates, self.trials);
        Ok(match &self.kind {
            &ScenarioKind::Bimodal {
                frac_high,
                q_hi,
                q_lo,
                d_hi,
                d_lo,
                layout,
            } => Workload::Fixed(match layout {
                BimodalLayout::Grouped => gen_bimodal(k, frac_high, q_hi, q_lo, d_hi, d_lo)?,
                BimodalLayout::Balanced => gen_bimodal_balanced(k, frac_high, q_hi, q_lo, d_hi, d_lo)?,
            }),
            ScenarioKind::S4LognormalMeans => Workload::Trials(trialset_s4(k, n, seed)?),
            ScenarioKind::S5Linear => Workload::Trials(trialset_s5(k, n, seed)?),
            ScenarioKind::S6Uniform => Workload::Trials(trialset_s6(k, n, seed)?),
            &ScenarioKind::IncreasingCorr { t } => Workload::Trials(trialset_increasing_corr(t, k, n, seed)?),
            &ScenarioKind::Polarized { users, sigma } => Workload::Users(gen_polarized(users, k, sigma, seed)?),
        })
    }
}

impl FromStr for ScenarioSpec {
    type Err = Error;

    /// Accepts `scenario1` … `scenario8`, `s4`/`s5`/`s6` and
    /// `increasing_corr:<t>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let bimodal = |d_hi, d_lo, layout| ScenarioKind::Bimodal {
            frac_high: 0.5,
            q_hi: 1.0,
            q_lo: -1.0,
            d_hi,
            d_lo,
            layout,
        };
        let kind = match s.as_str() {
            "scenario1" | "1" => bimodal(1.8, 1.0, BimodalLayout::Grouped),
            "scenario2" | "2" => bimodal(1.0, 1.8, BimodalLayout::Grouped),
            "scenario3" | "3" => bimodal(1.0, 1.8, BimodalLayout::Balanced),
            "scenario4" | "4" | "s4" | "s4_lognormal_means" => ScenarioKind::S4LognormalMeans,
            "scenario5" | "5" | "s5" | "s5_linear" => ScenarioKind::S5Linear,
            "scenario6" | "6" | "s6" | "s6_uniform" => ScenarioKind::S6Uniform,
            "scenario7" | "7" => ScenarioKind::Polarized {
                users: DEFAULT_USERS,
                sigma: STRONG_POLARIZATION_SIGMA,
            },
            "scenario8" | "8" => ScenarioKind::Polarized {
                users: DEFAULT_USERS,
                sigma: WEAK_POLARIZATION_SIGMA,
            },
            other => {
                let t = other
                    .strip_prefix("increasing_corr:")
                    .and_then(|t| t.parse::<f64>().ok())
                    .ok_or_else(|| Error::Config(format!("unknown scenario `{s}`")))?;
                ScenarioKind::IncreasingCorr { t }
            }
        };
        Ok(ScenarioSpec::new(kind))
    }
}
