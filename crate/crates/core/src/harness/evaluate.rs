//! Monte Carlo utility estimates of mechanisms on workloads.

use crate::error::{Error, Result};
use crate::mechanisms::{Mechanism, MechanismSpec};
use crate::problem::SelectionProblem;
use crate::rng::{for_each_trial, RngStream};
use crate::scenarios::Workload;
use crate::stats::{MeanAccumulator, MeanEstimate};

pub type MseEstimate = MeanEstimate;

fn problem_at(workload: &Workload, i: usize) -> std::borrow::Cow<'_, SelectionProblem> {
    use std::borrow::Cow;
    match workload {
        Workload::Fixed(p) => Cow::Borrowed(p),
        Workload::Trials(set) => Cow::Owned(set.problem(i % set.trials())),
        Workload::Users(users) => Cow::Borrowed(&users[i % users.len()]),
    }
}

/// Squared gap `(q_opt − q_selected)²` of every trial. Trial `i` runs on
/// problem `i mod len` of the workload.
pub fn squared_gaps(workload: &Workload, mechanism: &Mechanism, trials: usize, rng: &RngStream) -> Result<Vec<f64>> {
    if trials == 0 {
        return Err(Error::param("trials", 0.0, "must be positive"));
    }
    if workload.is_empty() {
        return Err(Error::Empty);
    }
    let mut gaps = Vec::with_capacity(trials);
    let mut failure = None;
    for_each_trial(rng, trials, |i, r| {
        if failure.is_some() {
            return;
        }
        let problem = problem_at(workload, i);
        match mechanism.select(&problem, r) {
            Ok(o) => {
                let q = problem.scores();
                let gap = q[problem.optimal_index()] - q[o.chosen_index];
                gaps.push(gap * gap);
            }
            Err(e) => failure = Some(e),
        }
    });
    failure.map_or(Ok(gaps), Err)
}

/// Mean squared gap to the best candidate, with a normal 95% interval.
pub fn evaluate_mse(workload: &Workload, spec: &MechanismSpec, trials: usize, rng: &RngStream) -> Result<MseEstimate> {
    let gaps = squared_gaps(workload, &spec.build()?, trials, rng)?;
    Ok(MeanEstimate::from_samples(&gaps))
}

/// MSE per problem of a multi-problem workload, `trials_each` runs each.
pub fn per_problem_mse(
    workload: &Workload,
    spec: &MechanismSpec,
    trials_each: usize,
    rng: &RngStream,
) -> Result<Vec<f64>> {
    let n = workload.len();
    let gaps = squared_gaps(workload, &spec.build()?, n * trials_each, rng)?;
    let mut acc = vec![MeanAccumulator::default(); n];
    for (i, g) in gaps.iter().enumerate() {
        acc[i % n].push(*g);
    }
    Ok(acc.iter().map(|a| a.finish().mean).collect())
}

fn mean_selected_score(
    problem: &SelectionProblem,
    spec: &MechanismSpec,
    trials: usize,
    rng: &RngStream,
) -> Result<f64> {
    let mech = spec.build()?;
    let mut total = 0.0;
    let mut failure = None;
    for_each_trial(rng, trials, |_, r| match mech.select(problem, r) {
        Ok(o) => total += problem.scores()[o.chosen_index],
        Err(e) => failure = failure.take().or(Some(e)),
    });
    failure.map_or(Ok(total / trials as f64), Err)
}

pub const DEFAULT_RATIO_TRIALS: usize = 50;

/// `ln(mean selected score of A / mean selected score of B)`. Problems with
/// a nonpositive score are refused; shift the scores first.
pub fn log_score_ratio(
    mech_a: &MechanismSpec,
    mech_b: &MechanismSpec,
    problem: &SelectionProblem,
    trials: usize,
    rng: &RngStream,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::param("trials", 0.0, "must be positive"));
    }
    if let Some((index, &value)) = problem.scores().iter().enumerate().find(|(_, q)| **q <= 0.0) {
        return Err(Error::Config(format!(
            "log score ratio needs positive scores, candidate {index} has {value}; shift the scores first"
        )));
    }
    let a = mean_selected_score(problem, mech_a, trials, &rng.derive(0))?;
    let b = mean_selected_score(problem, mech_b, trials, &rng.derive(1))?;
    Ok((a / b).ln())
}
