//! Report noisy max with random stopping and candidate-wise Laplace noise.

use rand::Rng;

use crate::error::{Error, Result};
use crate::noise::{laplace, StoppingRule};
use crate::problem::{SelectionOutcome, SelectionProblem};

pub const DEFAULT_ITERATION_CAP: u64 = 10_000_000;

/// Random stopping with the default iteration cap.
pub fn rs_gamma<R: Rng + ?Sized>(
    problem: &SelectionProblem,
    epsilon: f64,
    stopping: &StoppingRule,
    rng: &mut R,
) -> Result<SelectionOutcome> {
    rs_gamma_with_cap(problem, epsilon, stopping, DEFAULT_ITERATION_CAP, rng)
}

/// Draw the number of rounds `K` from `stopping`, then `K` times pick a
/// candidate uniformly (with replacement), perturb its score with
/// `Laplace((2 + η)·Δ_a/ε)` and keep the best noisy score seen.
///
/// Geometric stopping corresponds to `η = 1`, i.e. scale `3Δ_a/ε`; the
/// logarithmic distribution (`η = 0`) uses `2Δ_a/ε`.
pub fn rs_gamma_with_cap<R: Rng + ?Sized>(
    problem: &SelectionProblem,
    epsilon: f64,
    stopping: &StoppingRule,
    cap: u64,
    rng: &mut R,
) -> Result<SelectionOutcome> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::param("epsilon", epsilon, "must be positive and finite"));
    }
    let rounds = stopping.sample(rng);
    if rounds > cap {
        return Err(Error::IterationCap { cap });
    }
    let factor = (2.0 + stopping.eta()) / epsilon;
    let k = problem.len();
    let (scores, sens) = (problem.scores(), problem.sensitivities());

    let mut best = (f64::NEG_INFINITY, usize::MAX);
    for _ in 0..rounds {
        let a = rng.random_range(0..k);
        let noisy = scores[a] + laplace(factor * sens[a], rng);
        if noisy > best.0 || (noisy == best.0 && a < best.1) {
            best = (noisy, a);
        }
    }
    Ok(SelectionOutcome {
        iterations: Some(rounds),
        ..SelectionOutcome::chosen(best.1)
    })
}
