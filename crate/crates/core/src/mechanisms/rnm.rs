//! Report-noisy-max variants and k-ary randomized response.

use rand::Rng;

use crate::error::{Error, Result};
use crate::noise::{exponential, laplace};
use crate::problem::{argmax, SelectionOutcome, SelectionProblem};

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::param("epsilon", epsilon, "must be positive and finite"))
    }
}

/// Add `noise(a)` to every score and report the argmax.
fn noisy_max<R, F>(problem: &SelectionProblem, rng: &mut R, mut noise: F) -> SelectionOutcome
where
    R: Rng + ?Sized,
    F: FnMut(usize, &mut R) -> f64,
{
    let noised: Vec<f64> = problem
        .scores()
        .iter()
        .enumerate()
        .map(|(a, &q)| q + noise(a, rng))
        .collect();
    SelectionOutcome {
        chosen_index: argmax(&noised),
        noised_scores: Some(noised),
        ..SelectionOutcome::chosen(0)
    }
}

/// Report noisy max with exponential noise of mean `2Δ/ε`, `Δ` the global
/// sensitivity.
pub fn rnm<R: Rng + ?Sized>(problem: &SelectionProblem, epsilon: f64, rng: &mut R) -> Result<SelectionOutcome> {
    check_epsilon(epsilon)?;
    let delta = problem.global_sensitivity();
    if delta == 0.0 {
        return Ok(SelectionOutcome::chosen(problem.optimal_index()));
    }
    let mean = 2.0 * delta / epsilon;
    Ok(noisy_max(problem, rng, |_, rng| exponential(mean, rng)))
}

/// Noise scale used by [`rnm_laplace`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaplaceScaling {
    /// `Δ/ε` for every candidate.
    Global,
    /// `Δ_a/ε`; not differentially private in general.
    PerCandidate,
}

pub fn rnm_laplace<R: Rng + ?Sized>(
    problem: &SelectionProblem,
    epsilon: f64,
    scaling: LaplaceScaling,
    rng: &mut R,
) -> Result<SelectionOutcome> {
    check_epsilon(epsilon)?;
    let global = problem.global_sensitivity();
    let sens = problem.sensitivities();
    Ok(noisy_max(problem, rng, |a, rng| {
        let d = match scaling {
            LaplaceScaling::Global => global,
            LaplaceScaling::PerCandidate => sens[a],
        };
        laplace(d / epsilon, rng)
    }))
}

/// Report noisy max with candidate-wise exponential noise of mean `2Δ_a/ε`.
///
/// This is **not** differentially private; it is kept as an analysis baseline.
pub fn rnmh<R: Rng + ?Sized>(problem: &SelectionProblem, epsilon: f64, rng: &mut R) -> Result<SelectionOutcome> {
    check_epsilon(epsilon)?;
    let sens = problem.sensitivities();
    Ok(noisy_max(problem, rng, |a, rng| {
        exponential(2.0 * sens[a] / epsilon, rng)
    }))
}

/// Probability that kRR reports the optimal candidate.
pub fn krr_optimal_probability(k: usize, epsilon: f64) -> f64 {
    // e^ε / (e^ε + k - 1), written to stay finite for large ε
    1.0 / (1.0 + (k as f64 - 1.0) * (-epsilon).exp())
}

/// k-ary randomized response around the optimal candidate.
pub fn krr<R: Rng + ?Sized>(problem: &SelectionProblem, epsilon: f64, rng: &mut R) -> Result<SelectionOutcome> {
    if !(epsilon >= 0.0) {
        return Err(Error::param("epsilon", epsilon, "must be nonnegative"));
    }
    let k = problem.len();
    let best = problem.optimal_index();
    let u: f64 = rng.random();
    if k == 1 || u < krr_optimal_probability(k, epsilon) {
        return Ok(SelectionOutcome::chosen(best));
    }
    let j = rng.random_range(0..k - 1);
    Ok(SelectionOutcome::chosen(if j >= best { j + 1 } else { j }))
}
