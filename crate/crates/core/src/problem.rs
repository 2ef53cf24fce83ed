//! The selection-problem model shared by every mechanism.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scores `q_a` and candidate-wise sensitivities `Δ_a` of one selection instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectionProblem {
    scores: Vec<f64>,
    sensitivities: Vec<f64>,
    optimal_index: usize,
}

impl SelectionProblem {
    /// Validates the inputs and locates the optimal candidate (lowest index on ties).
    pub fn new(scores: Vec<f64>, sensitivities: Vec<f64>) -> Result<Self> {
        if scores.len() != sensitivities.len() {
            return Err(Error::LengthMismatch {
                scores: scores.len(),
                sensitivities: sensitivities.len(),
            });
        }
        if scores.is_empty() {
            return Err(Error::Empty);
        }
        if let Some((index, &value)) = scores.iter().enumerate().find(|(_, s)| !s.is_finite()) {
            return Err(Error::InvalidScore { index, value });
        }
        if let Some((index, &value)) = sensitivities
            .iter()
            .enumerate()
            .find(|(_, d)| !(d.is_finite() && **d >= 0.0))
        {
            return Err(Error::InvalidSensitivity { index, value });
        }
        let optimal_index = argmax(&scores);
        Ok(Self {
            scores,
            sensitivities,
            optimal_index,
        })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn sensitivities(&self) -> &[f64] {
        &self.sensitivities
    }

    pub fn optimal_index(&self) -> usize {
        self.optimal_index
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Global sensitivity `Δ = max_a Δ_a`.
    pub fn global_sensitivity(&self) -> f64 {
        self.sensitivities.iter().copied().fold(0.0, f64::max)
    }

    pub fn best_score(&self) -> f64 {
        self.scores[self.optimal_index]
    }

    pub fn worst_score(&self) -> f64 {
        self.scores.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True when every candidate has zero sensitivity; such scores do not
    /// depend on the data and can be released exactly.
    pub fn all_sensitivities_zero(&self) -> bool {
        self.sensitivities.iter().all(|&d| d == 0.0)
    }
}

/// Shorthand for [`SelectionProblem::new`].
pub fn make_problem(scores: Vec<f64>, sensitivities: Vec<f64>) -> Result<SelectionProblem> {
    SelectionProblem::new(scores, sensitivities)
}

/// Index of the largest value; the lowest index wins ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Pure-DP budget. `delta` is carried for completeness and is 0 for every
/// mechanism in this crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    epsilon: f64,
    delta: f64,
}

impl PrivacyBudget {
    pub fn pure(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 0.0)
    }

    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::param("epsilon", epsilon, "must be positive and finite"));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::param("delta", delta, "must lie in [0, 1]"));
        }
        Ok(Self { epsilon, delta })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Which half of combined GEM ran.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Gem,
    Mgem,
}

/// The chosen candidate plus whatever diagnostics the mechanism exposes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectionOutcome {
    pub chosen_index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noised_scores: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transformed_scores: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<Branch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u64>,
}

impl SelectionOutcome {
    pub fn chosen(chosen_index: usize) -> Self {
        Self {
            chosen_index,
            noised_scores: None,
            transformed_scores: None,
            branch: None,
            iterations: None,
        }
    }
}

/// Uniformly random candidate, ignoring the data entirely.
pub fn random_select<R: Rng + ?Sized>(problem: &SelectionProblem, rng: &mut R) -> SelectionOutcome {
    SelectionOutcome::chosen(rng.random_range(0..problem.len()))
}
