//! Generalized exponential mechanism (GEM), its sign-flipped variant (mGEM)
//! and the correlation-dispatched combination of both.

use rand::Rng;
use serde::Serialize;

use super::DEFAULT_SENSITIVITY_FLOOR;
use crate::error::{Error, Result};
use crate::heuristics::{spearman, two_rr};
use crate::noise::exponential;
use crate::problem::{argmax, Branch, SelectionOutcome, SelectionProblem};

/// Scores after the GEM normalization; every entry is `≤ 0` and the maximum
/// is exactly `0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GemTransform {
    pub t: f64,
    pub transformed_scores: Vec<f64>,
}

/// `q'(a) = min_{a'} ((q_a - tΔ_a) - (q_{a'} - tΔ_{a'})) / (Δ_a + Δ_{a'})`,
/// sensitivities floored at the default floor.
pub fn gem_transform(problem: &SelectionProblem, t: f64) -> GemTransform {
    gem_transform_with_floor(problem, t, DEFAULT_SENSITIVITY_FLOOR)
}

pub fn gem_transform_with_floor(problem: &SelectionProblem, t: f64, floor: f64) -> GemTransform {
    let sens: Vec<f64> = problem.sensitivities().iter().map(|&d| d.max(floor)).collect();
    let shifted: Vec<f64> = problem.scores().iter().zip(&sens).map(|(&q, &d)| q - t * d).collect();
    let transformed_scores = shifted
        .iter()
        .zip(&sens)
        .map(|(&xa, &da)| {
            shifted
                .iter()
                .zip(&sens)
                .map(|(&xb, &db)| (xa - xb) / (da + db))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    GemTransform { t, transformed_scores }
}

/// The shift `2·ln(k/β)/ε` used by GEM (mGEM uses its negation).
pub fn gem_shift(k: usize, epsilon: f64, beta: f64) -> f64 {
    2.0 * (k as f64 / beta).ln() / epsilon
}

fn check(epsilon: f64, beta: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::param("epsilon", epsilon, "must be positive and finite"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::param("beta", beta, "must lie in (0, 1)"));
    }
    Ok(())
}

/// Transform with shift `t`, then report noisy max on the transformed scores
/// with sensitivity 1 (exponential noise of mean `2/ε`).
fn transformed_rnm<R: Rng + ?Sized>(
    problem: &SelectionProblem,
    epsilon: f64,
    t: f64,
    floor: f64,
    rng: &mut R,
) -> SelectionOutcome {
    if problem.all_sensitivities_zero() {
        return SelectionOutcome::chosen(problem.optimal_index());
    }
    let tr = gem_transform_with_floor(problem, t, floor);
    let mean = 2.0 / epsilon;
    let noised: Vec<f64> = tr
        .transformed_scores
        .iter()
        .map(|&s| s + exponential(mean, rng))
        .collect();
    SelectionOutcome {
        chosen_index: argmax(&noised),
        noised_scores: Some(noised),
        transformed_scores: Some(tr.transformed_scores),
        branch: None,
        iterations: None,
    }
}

pub fn gem<R: Rng + ?Sized>(
    problem: &SelectionProblem,
    epsilon: f64,
    beta: f64,
    rng: &mut R,
) -> Result<SelectionOutcome> {
    gem_with_floor(problem, epsilon, beta, DEFAULT_SENSITIVITY_FLOOR, rng)
}

pub(crate) fn gem_with_floor<R: Rng + ?Sized>(
    problem: &SelectionProblem,
    epsilon: f64,
    beta: f64,
    floor: f64,
    rng: &mut R,
) -> Result<SelectionOutcome> {
    check(epsilon, beta)?;
    let t = gem_shift(problem.len(), epsilon, beta);
    Ok(transformed_rnm(problem, epsilon, t, floor, rng))
}

/// GEM with the shift negated: penalizes low-sensitivity candidates.
pub fn mgem<R: Rng + ?Sized>(
    problem: &SelectionProblem,
    epsilon: f64,
    beta: f64,
    rng: &mut R,
) -> Result<SelectionOutcome> {
    mgem_with_floor(problem, epsilon, beta, DEFAULT_SENSITIVITY_FLOOR, rng)
}

pub(crate) fn mgem_with_floor<R: Rng + ?Sized>(
    problem: &SelectionProblem,
    epsilon: f64,
    beta: f64,
    floor: f64,
    rng: &mut R,
) -> Result<SelectionOutcome> {
    check(epsilon, beta)?;
    let t = -gem_shift(problem.len(), epsilon, beta);
    Ok(transformed_rnm(problem, epsilon, t, floor, rng))
}

/// Spend `corr_fraction·ε` on a randomized-response release of
/// `1{spearman(q, Δ) ≥ 0}`, then run mGEM (bit 1) or GEM (bit 0) with the rest.
pub fn combined_gem<R: Rng + ?Sized>(
    problem: &SelectionProblem,
    epsilon: f64,
    corr_fraction: f64,
    beta: f64,
    rng: &mut R,
) -> Result<SelectionOutcome> {
    combined_gem_with_floor(problem, epsilon, corr_fraction, beta, DEFAULT_SENSITIVITY_FLOOR, rng)
}

pub(crate) fn combined_gem_with_floor<R: Rng + ?Sized>(
    problem: &SelectionProblem,
    epsilon: f64,
    corr_fraction: f64,
    beta: f64,
    floor: f64,
    rng: &mut R,
) -> Result<SelectionOutcome> {
    check(epsilon, beta)?;
    if !(corr_fraction > 0.0 && corr_fraction < 1.0) {
        return Err(Error::param("corr_fraction", corr_fraction, "must lie in (0, 1)"));
    }
    let eps_corr = corr_fraction * epsilon;
    let eps_select = epsilon - eps_corr;
    let rho = if problem.len() >= 2 {
        spearman(problem.scores(), problem.sensitivities())?
    } else {
        0.0
    };
    let released = two_rr(rho >= 0.0, eps_corr, rng)?;
    let (branch, mut out) = if released {
        (Branch::Mgem, mgem_with_floor(problem, eps_select, beta, floor, rng)?)
    } else {
        (Branch::Gem, gem_with_floor(problem, eps_select, beta, floor, rng)?)
    };
    out.branch = Some(branch);
    Ok(out)
}
