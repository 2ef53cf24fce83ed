//! Private selection mechanisms.
//!
//! Each mechanism is available as a free function taking its own
//! hyper-parameters, and through [`Mechanism`], a validated and prepared
//! [`MechanismSpec`] that the harness, the analysis tools and the bandit
//! simulation dispatch through.

mod gem;
mod random_stopping;
mod rnm;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::StoppingRule;
use crate::problem::{random_select, SelectionOutcome, SelectionProblem};

pub use gem::{combined_gem, gem, gem_shift, gem_transform, gem_transform_with_floor, mgem, GemTransform};
pub use random_stopping::{rs_gamma, rs_gamma_with_cap, DEFAULT_ITERATION_CAP};
pub use rnm::{krr, krr_optimal_probability, rnm, rnm_laplace, rnmh, LaplaceScaling};

/// Floor applied to sensitivities before they appear in a denominator.
pub const DEFAULT_SENSITIVITY_FLOOR: f64 = 1e-6;
pub const DEFAULT_BETA: f64 = 0.05;
pub const DEFAULT_GAMMA: f64 = 0.05;
pub const DEFAULT_ETA: f64 = 0.0;
pub const DEFAULT_CORR_FRACTION: f64 = 0.6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismKind {
    Random,
    Krr,
    #[serde(alias = "rnm")]
    RnmExp,
    RnmLaplace,
    Rnmh,
    RsGamma,
    RsGammaImproved,
    Gem,
    Mgem,
    CombinedGem,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 10] = [
        MechanismKind::Random,
        MechanismKind::Krr,
        MechanismKind::RnmExp,
        MechanismKind::RnmLaplace,
        MechanismKind::Rnmh,
        MechanismKind::RsGamma,
        MechanismKind::RsGammaImproved,
        MechanismKind::Gem,
        MechanismKind::Mgem,
        MechanismKind::CombinedGem,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::Random => "random",
            MechanismKind::Krr => "krr",
            MechanismKind::RnmExp => "rnm",
            MechanismKind::RnmLaplace => "rnm_laplace",
            MechanismKind::Rnmh => "rnmh",
            MechanismKind::RsGamma => "rs_gamma",
            MechanismKind::RsGammaImproved => "rs_gamma_improved",
            MechanismKind::Gem => "gem",
            MechanismKind::Mgem => "mgem",
            MechanismKind::CombinedGem => "combined_gem",
        }
    }

    /// Whether the mechanism reads candidate sensitivities.
    pub fn uses_sensitivities(self) -> bool {
        !matches!(self, MechanismKind::Random | MechanismKind::Krr)
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MechanismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        let kind = match norm.as_str() {
            "random" => MechanismKind::Random,
            "krr" => MechanismKind::Krr,
            "rnm" | "rnm_exp" => MechanismKind::RnmExp,
            "rnm_laplace" => MechanismKind::RnmLaplace,
            "rnmh" => MechanismKind::Rnmh,
            "rs_gamma" | "rs" => MechanismKind::RsGamma,
            "rs_gamma_improved" | "improved_rs_gamma" => MechanismKind::RsGammaImproved,
            "gem" => MechanismKind::Gem,
            "mgem" => MechanismKind::Mgem,
            "combined_gem" | "combined" => MechanismKind::CombinedGem,
            _ => return Err(Error::Config(format!("unknown mechanism '{s}'"))),
        };
        Ok(kind)
    }
}

/// A mechanism together with its hyper-parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MechanismSpec {
    pub kind: MechanismKind,
    /// Total budget; sweeps overwrite it per grid point.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// GEM/mGEM failure probability β in (0, 1).
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Random-stopping γ.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Truncated-negative-binomial η for improved random stopping.
    #[serde(default)]
    pub eta: f64,
    /// Share of ε spent on the correlation test in combined GEM.
    #[serde(default = "default_corr_fraction")]
    pub corr_fraction: f64,
    /// Laplace RNM: scale each candidate by its own sensitivity.
    #[serde(default)]
    pub laplace_per_candidate: bool,
    #[serde(default = "default_floor")]
    pub sensitivity_floor: f64,
    #[serde(default = "default_cap")]
    pub iteration_cap: u64,
}

fn default_epsilon() -> f64 {
    1.0
}
fn default_beta() -> f64 {
    DEFAULT_BETA
}
fn default_gamma() -> f64 {
    DEFAULT_GAMMA
}
fn default_corr_fraction() -> f64 {
    DEFAULT_CORR_FRACTION
}
fn default_floor() -> f64 {
    DEFAULT_SENSITIVITY_FLOOR
}
fn default_cap() -> u64 {
    DEFAULT_ITERATION_CAP
}

impl MechanismSpec {
    pub fn new(kind: MechanismKind, epsilon: f64) -> Self {
        Self {
            kind,
            epsilon,
            beta: DEFAULT_BETA,
            gamma: DEFAULT_GAMMA,
            eta: DEFAULT_ETA,
            corr_fraction: DEFAULT_CORR_FRACTION,
            laplace_per_candidate: false,
            sensitivity_floor: DEFAULT_SENSITIVITY_FLOOR,
            iteration_cap: DEFAULT_ITERATION_CAP,
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_corr_fraction(mut self, corr_fraction: f64) -> Self {
        self.corr_fraction = corr_fraction;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn per_candidate_laplace(mut self, yes: bool) -> Self {
        self.laplace_per_candidate = yes;
        self
    }

    /// Check parameters and precompute anything reusable across selections.
    pub fn build(&self) -> Result<Mechanism> {
        Mechanism::new(self.clone())
    }
}

/// A validated [`MechanismSpec`], ready to run.
#[derive(Clone, Debug)]
pub struct Mechanism {
    spec: MechanismSpec,
    stopping: Option<StoppingRule>,
}

impl Mechanism {
    pub fn new(spec: MechanismSpec) -> Result<Self> {
        let eps = spec.epsilon;
        let eps_ok = match spec.kind {
            MechanismKind::Random => true,
            MechanismKind::Krr => eps >= 0.0 && !eps.is_nan(),
            _ => eps > 0.0 && eps.is_finite(),
        };
        if !eps_ok {
            return Err(Error::param("epsilon", eps, "must be positive and finite"));
        }
        if !(spec.sensitivity_floor > 0.0) {
            return Err(Error::param(
                "sensitivity_floor",
                spec.sensitivity_floor,
                "must be positive",
            ));
        }
        if matches!(
            spec.kind,
            MechanismKind::Gem | MechanismKind::Mgem | MechanismKind::CombinedGem
        ) && !(spec.beta > 0.0 && spec.beta < 1.0)
        {
            return Err(Error::param("beta", spec.beta, "must lie in (0, 1)"));
        }
        if spec.kind == MechanismKind::CombinedGem && !(spec.corr_fraction > 0.0 && spec.corr_fraction < 1.0) {
            return Err(Error::param("corr_fraction", spec.corr_fraction, "must lie in (0, 1)"));
        }
        let stopping = match spec.kind {
            MechanismKind::RsGamma => Some(StoppingRule::geometric(spec.gamma)?),
            MechanismKind::RsGammaImproved => Some(StoppingRule::truncated_negative_binomial(spec.gamma, spec.eta)?),
            _ => None,
        };
        Ok(Self { spec, stopping })
    }

    pub fn spec(&self) -> &MechanismSpec {
        &self.spec
    }

    pub fn kind(&self) -> MechanismKind {
        self.spec.kind
    }

    /// Same mechanism at a different ε.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Mechanism> {
        let mut spec = self.spec.clone();
        spec.epsilon = epsilon;
        match (&self.stopping, spec.kind) {
            (Some(rule), _) if epsilon > 0.0 && epsilon.is_finite() => Ok(Mechanism {
                spec,
                stopping: Some(rule.clone()),
            }),
            _ => Mechanism::new(spec),
        }
    }

    pub fn select<R: Rng + ?Sized>(&self, problem: &SelectionProblem, rng: &mut R) -> Result<SelectionOutcome> {
        let s = &self.spec;
        if s.kind.uses_sensitivities() && problem.all_sensitivities_zero() {
            return Ok(SelectionOutcome::chosen(problem.optimal_index()));
        }
        match s.kind {
            MechanismKind::Random => Ok(random_select(problem, rng)),
            MechanismKind::Krr => krr(problem, s.epsilon, rng),
            MechanismKind::RnmExp => rnm(problem, s.epsilon, rng),
            MechanismKind::RnmLaplace => {
                let scaling = if s.laplace_per_candidate {
                    LaplaceScaling::PerCandidate
                } else {
                    LaplaceScaling::Global
                };
                rnm_laplace(problem, s.epsilon, scaling, rng)
            }
            MechanismKind::Rnmh => rnmh(problem, s.epsilon, rng),
            MechanismKind::RsGamma | MechanismKind::RsGammaImproved => {
                let rule = self.stopping.as_ref().expect("stopping rule prepared in new");
                rs_gamma_with_cap(problem, s.epsilon, rule, s.iteration_cap, rng)
            }
            MechanismKind::Gem => gem::gem_with_floor(problem, s.epsilon, s.beta, s.sensitivity_floor, rng),
            MechanismKind::Mgem => gem::mgem_with_floor(problem, s.epsilon, s.beta, s.sensitivity_floor, rng),
            MechanismKind::CombinedGem => {
                gem::combined_gem_with_floor(problem, s.epsilon, s.corr_fraction, s.beta, s.sensitivity_floor, rng)
            }
        }
    }
}
