//! Two-candidate closed forms, the HG comparison metric, Monte Carlo checks
//! of the privacy-loss ratio on known counterexamples and the CDF of a
//! maximum of independent Laplace variables.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechanisms::{rnm_laplace, rnmh, LaplaceScaling, MechanismSpec};
use crate::noise::{exponential, StoppingRule};
use crate::problem::{make_problem, SelectionProblem};
use crate::rng::{for_each_trial, RngStream};
use crate::stats::{wilson_interval, Z_95};

/// Event counts below this make [`verify_dp_ratio`] widen its interval.
pub const MIN_EVENT_COUNT: u64 = 100;
const Z_WIDE: f64 = 3.290_526_731_491_926;

fn check_two(q1: f64, q2: f64, epsilon: f64) -> Result<()> {
    if !(q1 < q2) {
        return Err(Error::Config(format!("closed forms need q1 < q2, got {q1} and {q2}")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::param("epsilon", epsilon, "must be positive"));
    }
    Ok(())
}

/// Probability that RNM with exponential noise picks the lower of two
/// candidates: `½·exp(−ε(q2 − q1)/(2Δ))`.
pub fn closed_form_rnm_error(q1: f64, q2: f64, delta: f64, epsilon: f64) -> Result<f64> {
    check_two(q1, q2, epsilon)?;
    if !(delta > 0.0) {
        return Err(Error::param("delta", delta, "must be positive"));
    }
    Ok(0.5 * (-epsilon * (q2 - q1) / (2.0 * delta)).exp())
}

/// Probability that RNMH picks the lower candidate:
/// `1/(1 + Δ2/Δ1)·exp(−ε(q2 − q1)/(2Δ1))`.
pub fn closed_form_rnmh_error(q1: f64, q2: f64, d1: f64, d2: f64, epsilon: f64) -> Result<f64> {
    check_two(q1, q2, epsilon)?;
    if !(d1 >= 0.0) || !(d2 > 0.0) {
        return Err(Error::Config(format!("need d1 >= 0 and d2 > 0, got {d1} and {d2}")));
    }
    if d1 == 0.0 {
        return Ok(0.0);
    }
    Ok((-epsilon * (q2 - q1) / (2.0 * d1)).exp() / (1.0 + d2 / d1))
}

/// Monte Carlo miss rate `Pr[M ≠ a*]`.
pub fn miss_rate(spec: &MechanismSpec, problem: &SelectionProblem, trials: usize, rng: &RngStream) -> Result<f64> {
    if trials == 0 {
        return Err(Error::param("trials", 0.0, "must be positive"));
    }
    let mech = spec.build()?;
    let best = problem.optimal_index();
    let mut misses = 0u64;
    let mut failure = None;
    for_each_trial(rng, trials, |_, r| match mech.select(problem, r) {
        Ok(o) => misses += u64::from(o.chosen_index != best),
        Err(e) => failure = failure.take().or(Some(e)),
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(misses as f64 / trials as f64),
    }
}

/// `HG(A, B) = Pr[A ≠ a*] − Pr[B ≠ a*]`, positive when `B` misses less.
/// The two mechanisms run on independent child streams of `rng`.
pub fn hg(
    mech_a: &MechanismSpec,
    mech_b: &MechanismSpec,
    problem: &SelectionProblem,
    trials: usize,
    rng: &RngStream,
) -> Result<f64> {
    Ok(miss_rate(mech_a, problem, trials, &rng.derive(0))? - miss_rate(mech_b, problem, trials, &rng.derive(1))?)
}

/// CDF of the maximum of independent zero-mean Laplace variables with the
/// given scales.
pub fn laplace_max_cdf(scales: &[f64], x: f64) -> Result<f64> {
    if let Some((index, &value)) = scales.iter().enumerate().find(|(_, b)| !(**b > 0.0)) {
        return Err(Error::InvalidSensitivity { index, value });
    }
    Ok(scales
        .iter()
        .map(|&b| {
            if x > 0.0 {
                1.0 - 0.5 * (-x / b).exp()
            } else {
                0.5 * (x / b).exp()
            }
        })
        .product())
}

/// Random stopping with geometric stopping and exponential (instead of
/// Laplace) noise of mean `6Δ_a/ε`. Not differentially private.
pub fn rs_gamma_exponential<R: Rng + ?Sized>(
    problem: &SelectionProblem,
    epsilon: f64,
    gamma: f64,
    rng: &mut R,
) -> Result<usize> {
    if !(epsilon > 0.0) {
        return Err(Error::param("epsilon", epsilon, "must be positive"));
    }
    let rule = StoppingRule::geometric(gamma)?;
    let rounds = rule.sample(rng);
    let k = problem.len();
    let mut best = (f64::NEG_INFINITY, usize::MAX);
    for _ in 0..rounds {
        let a = rng.random_range(0..k);
        let noisy = problem.scores()[a] + exponential(6.0 * problem.sensitivities()[a] / epsilon, rng);
        if noisy > best.0 || (noisy == best.0 && a < best.1) {
            best = (noisy, a);
        }
    }
    Ok(best.1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DpRatioReport {
    /// `Pr[M(D1) = target] / Pr[M(D2) = target]`; infinite when the
    /// denominator event never occurred.
    pub empirical_ratio: f64,
    pub analytic_ratio: Option<f64>,
    pub trials: u64,
    pub count_d1: u64,
    pub count_d2: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Set when either event count is below [`MIN_EVENT_COUNT`]; the
    /// interval is then a 99.9% one.
    pub low_count: bool,
}

impl DpRatioReport {
    pub fn rate_d1(&self) -> f64 {
        self.count_d1 as f64 / self.trials as f64
    }

    pub fn rate_d2(&self) -> f64 {
        self.count_d2 as f64 / self.trials as f64
    }

    pub fn ci_contains(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

fn count_hits<F>(
    mechanism: &mut F,
    problem: &SelectionProblem,
    target: usize,
    trials: usize,
    rng: &RngStream,
) -> Result<u64>
where
    F: FnMut(&SelectionProblem, &mut RngStream) -> Result<usize>,
{
    let mut hits = 0u64;
    let mut failure = None;
    for_each_trial(rng, trials, |_, r| match mechanism(problem, r) {
        Ok(i) => hits += u64::from(i == target),
        Err(e) => failure = failure.take().or(Some(e)),
    });
    failure.map_or(Ok(hits), Err)
}

/// Estimate the ratio of the probabilities of outputting `target` on two
/// adjacent problems, with Wilson intervals for both rates combined by
/// interval arithmetic.
pub fn verify_dp_ratio<F>(
    mut mechanism: F,
    problem_d1: &SelectionProblem,
    problem_d2: &SelectionProblem,
    target_index: usize,
    trials: usize,
    rng: &RngStream,
) -> Result<DpRatioReport>
where
    F: FnMut(&SelectionProblem, &mut RngStream) -> Result<usize>,
{
    if problem_d1.len() != problem_d2.len() {
        return Err(Error::LengthMismatch {
            scores: problem_d1.len(),
            sensitivities: problem_d2.len(),
        });
    }
    if target_index >= problem_d1.len() {
        return Err(Error::param("target_index", target_index as f64, "out of range"));
    }
    if trials == 0 {
        return Err(Error::param("trials", 0.0, "must be positive"));
    }
    let c1 = count_hits(&mut mechanism, problem_d1, target_index, trials, &rng.derive(0))?;
    let c2 = count_hits(&mut mechanism, problem_d2, target_index, trials, &rng.derive(1))?;
    if c1 == 0 && c2 == 0 {
        return Err(Error::Config("target was never selected on either problem".into()));
    }
    let n = trials as u64;
    let low_count = c1 < MIN_EVENT_COUNT || c2 < MIN_EVENT_COUNT;
    let z = if low_count { Z_WIDE } else { Z_95 };
    let (l1, h1) = wilson_interval(c1, n, z);
    let (l2, h2) = wilson_interval(c2, n, z);
    let empirical_ratio = if c2 == 0 { f64::INFINITY } else { c1 as f64 / c2 as f64 };
    let ci_high = if l2 == 0.0 { f64::INFINITY } else { h1 / l2 };
    Ok(DpRatioReport {
        empirical_ratio,
        analytic_ratio: None,
        trials: n,
        count_d1: c1,
        count_d2: c2,
        ci_low: l1 / h2,
        ci_high,
        low_count,
    })
}

/// Adjacent problem pairs on which a heterogeneous-noise mechanism exceeds
/// its nominal privacy loss.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Counterexample {
    /// RNM with per-candidate Laplace noise `Δ_a/ε`. `D1` has all scores 0,
    /// `D2` raises candidates `2..k` to 1; candidate 1 has `Δ = 0`, the rest
    /// `Δ = 1`. The ratio for candidate 1 is `e^{(k−1)ε}`.
    LaplaceRnmh { k: usize, epsilon: f64 },
    /// RNMH with exponential noise on two candidates, `Δ = (0, 1)`, scores
    /// `(0, −½)` on `D1` and `(0, ½)` on `D2`. Candidate 1 is never chosen on
    /// `D2` and chosen with probability `1 − e^{−ε/4}` on `D1`.
    ExponentialRnmh { epsilon: f64 },
    /// [`rs_gamma_exponential`] with `Δ = (0, 1, …, 1)`, scores
    /// `(1, 0, …, 0)` on `D1` and all ones on `D2`.
    ExponentialRandomStopping { k: usize, gamma: f64, epsilon: f64 },
}

impl Counterexample {
    pub fn problems(&self) -> Result<(SelectionProblem, SelectionProblem)> {
        let tail_one = |k: usize, first: f64, rest: f64| -> (Vec<f64>, Vec<f64>) {
            let mut q = vec![rest; k];
            q[0] = first;
            let mut d = vec![1.0; k];
            d[0] = 0.0;
            (q, d)
        };
        match *self {
            Counterexample::LaplaceRnmh { k, .. } => {
                let (q1, d) = tail_one(k, 0.0, 0.0);
                let (q2, _) = tail_one(k, 0.0, 1.0);
                Ok((make_problem(q1, d.clone())?, make_problem(q2, d)?))
            }
            Counterexample::ExponentialRnmh { .. } => Ok((
                make_problem(vec![0.0, -0.5], vec![0.0, 1.0])?,
                make_problem(vec![0.0, 0.5], vec![0.0, 1.0])?,
            )),
            Counterexample::ExponentialRandomStopping { k, .. } => {
                let (q1, d) = tail_one(k, 1.0, 0.0);
                let (q2, _) = tail_one(k, 1.0, 1.0);
                Ok((make_problem(q1, d.clone())?, make_problem(q2, d)?))
            }
        }
    }

    /// Exact `Pr[M(D1) = 0]` and `Pr[M(D2) = 0]`.
    pub fn analytic_probabilities(&self) -> (f64, f64) {
        match *self {
            Counterexample::LaplaceRnmh { k, epsilon } => {
                let m = (k - 1) as i32;
                (0.5f64.powi(m), (0.5 * (-epsilon).exp()).powi(m))
            }
            Counterexample::ExponentialRnmh { epsilon } => (1.0 - (-epsilon / 4.0).exp(), 0.0),
            Counterexample::ExponentialRandomStopping { k, gamma, epsilon } => {
                let kf = k as f64;
                let p = 1.0 - (-epsilon / 6.0).exp();
                // E[a^K] for geometric K
                let pgf = |a: f64| gamma * a / (1.0 - (1.0 - gamma) * a);
                let others = (kf - 1.0) * p / kf;
                (pgf(1.0 / kf + others) - pgf(others), pgf(1.0 / kf))
            }
        }
    }

    pub fn analytic_ratio(&self) -> f64 {
        let (p1, p2) = self.analytic_probabilities();
        if p2 == 0.0 {
            f64::INFINITY
        } else {
            p1 / p2
        }
    }

    /// One run of the mechanism under test.
    pub fn select(&self, problem: &SelectionProblem, rng: &mut RngStream) -> Result<usize> {
        match *self {
            Counterexample::LaplaceRnmh { epsilon, .. } => {
                Ok(rnm_laplace(problem, epsilon, LaplaceScaling::PerCandidate, rng)?.chosen_index)
            }
            Counterexample::ExponentialRnmh { epsilon } => Ok(rnmh(problem, epsilon, rng)?.chosen_index),
            Counterexample::ExponentialRandomStopping { gamma, epsilon, .. } => {
                rs_gamma_exponential(problem, epsilon, gamma, rng)
            }
        }
    }

    pub fn verify(&self, trials: usize, rng: &RngStream) -> Result<DpRatioReport> {
        let (d1, d2) = self.problems()?;
        let mut report = verify_dp_ratio(|p, r| self.select(p, r), &d1, &d2, 0, trials, rng)?;
        report.analytic_ratio = Some(self.analytic_ratio());
        Ok(report)
    }
}
