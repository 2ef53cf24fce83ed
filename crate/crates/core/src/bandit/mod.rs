//! Two-armed bandit with a swap of the arms' reward distributions, played
//! by non-private UCB or by a private selection mechanism fed with private
//! running means and privately estimated reward bands.

mod counter;
mod quantile;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanisms::{Mechanism, MechanismKind, MechanismSpec};
use crate::problem::SelectionProblem;
use crate::rng::RngStream;
use crate::stats::standard_normal;

pub use counter::{private_counter_add, private_counter_query, PrivateCounter};
pub use quantile::{dp_quantile, quantile_breakpoints, quantile_log_weights};

pub const ARMS: usize = 2;
pub const QUANTILE_LO: f64 = 0.1;
pub const QUANTILE_HI: f64 = 0.9;
const STREAM_BANDIT: u64 = 0xBA4D;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BanditConfig {
    pub horizon: usize,
    pub t_shift: usize,
    pub means_before: [f64; ARMS],
    pub sds_before: [f64; ARMS],
    pub means_after: [f64; ARMS],
    pub sds_after: [f64; ARMS],
    pub window: usize,
    pub eps_mean: f64,
    pub eps_select: f64,
    pub eps_quantile: f64,
    pub krr_eps: f64,
    pub ucb_alpha: f64,
}

impl Default for BanditConfig {
    fn default() -> Self {
        Self {
            horizon: 5000,
            t_shift: 3000,
            means_before: [0.2, 0.8],
            sds_before: [0.1, 0.3],
            means_after: [0.8, 0.2],
            sds_after: [0.3, 0.1],
            window: 200,
            eps_mean: 1.0,
            eps_select: 1.0,
            eps_quantile: 1.0,
            krr_eps: 4.0,
            ucb_alpha: std::f64::consts::SQRT_2,
        }
    }
}

impl BanditConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon < ARMS {
            return Err(Error::param(
                "horizon",
                self.horizon as f64,
                "must cover the bootstrap rounds",
            ));
        }
        if self.t_shift == 0 || self.t_shift >= self.horizon {
            return Err(Error::param("t_shift", self.t_shift as f64, "must lie in (0, horizon)"));
        }
        if self.window == 0 {
            return Err(Error::param("window", 0.0, "must be positive"));
        }
        for (name, v) in [
            ("eps_mean", self.eps_mean),
            ("eps_select", self.eps_select),
            ("eps_quantile", self.eps_quantile),
            ("krr_eps", self.krr_eps),
        ] {
            if !(v > 0.0) {
                return Err(Error::param(name, v, "must be positive"));
            }
        }
        if !(self.ucb_alpha >= 0.0) {
            return Err(Error::param("ucb_alpha", self.ucb_alpha, "must be nonnegative"));
        }
        for &s in self.sds_before.iter().chain(&self.sds_after) {
            if !(s > 0.0) {
                return Err(Error::param("sd", s, "must be positive"));
            }
        }
        Ok(())
    }

    /// Reward distribution `(means, sds)` at 1-based step `t`.
    pub fn regime(&self, t: usize) -> ([f64; ARMS], [f64; ARMS]) {
        if t > self.t_shift {
            (self.means_after, self.sds_after)
        } else {
            (self.means_before, self.sds_before)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Policy {
    Ucb,
    Private(MechanismSpec),
}

impl Policy {
    /// Private policy with the configured selection budget (`krr_eps` for
    /// kRR, `eps_select` otherwise).
    pub fn private(kind: MechanismKind, config: &BanditConfig) -> Policy {
        let eps = if kind == MechanismKind::Krr {
            config.krr_eps
        } else {
            config.eps_select
        };
        Policy::Private(MechanismSpec::new(kind, eps))
    }

    /// `ucb` or any mechanism name.
    pub fn parse(name: &str, config: &BanditConfig) -> Result<Policy> {
        if name.trim().eq_ignore_ascii_case("ucb") {
            return Ok(Policy::Ucb);
        }
        Ok(Policy::private(name.parse()?, config))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Policy::Ucb => "ucb",
            Policy::Private(spec) => spec.kind.name(),
        }
    }
}

/// `sum/count + α·sqrt(ln T / count)`; an unplayed arm scores `+∞`.
pub fn ucb_score(sum_rewards: f64, count: u64, horizon: f64, alpha: f64) -> f64 {
    if count == 0 {
        return f64::INFINITY;
    }
    let n = count as f64;
    sum_rewards / n + alpha * (horizon.ln() / n).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BanditTrajectory {
    pub policy: String,
    pub actions: Vec<u8>,
    pub rewards: Vec<f64>,
    /// Mean estimates used by the policy after each step (exact for UCB).
    pub est_means: Vec<[f64; ARMS]>,
    /// Current private `(p10, p90)` per arm after each step.
    pub est_quantiles: Vec<[(f64, f64); ARMS]>,
    pub cumulative_reward: Vec<f64>,
    pub pulls: [u64; ARMS],
    pub quantile_rounds: [u64; ARMS],
}

impl BanditTrajectory {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn total_reward(&self) -> f64 {
        self.cumulative_reward.last().copied().unwrap_or(0.0)
    }

    /// Reward collected after step `t_shift`.
    pub fn reward_after(&self, t_shift: usize) -> f64 {
        let before = if t_shift == 0 {
            0.0
        } else {
            self.cumulative_reward[t_shift - 1]
        };
        self.total_reward() - before
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "step",
            "action",
            "reward",
            "est_mean_0",
            "est_mean_1",
            "p10_0",
            "p90_0",
            "p10_1",
            "p90_1",
            "cumulative_reward",
        ])?;
        for i in 0..self.len() {
            let [m0, m1] = self.est_means[i];
            let [(a0, b0), (a1, b1)] = self.est_quantiles[i];
            w.write_record(&[
                (i + 1).to_string(),
                self.actions[i].to_string(),
                self.rewards[i].to_string(),
                m0.to_string(),
                m1.to_string(),
                a0.to_string(),
                b0.to_string(),
                a1.to_string(),
                b1.to_string(),
                self.cumulative_reward[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

struct ArmState {
    pulls: u64,
    exact_sum: f64,
    counter: PrivateCounter,
    fresh: Vec<f64>,
    band: (f64, f64),
    rounds: u64,
}

/// Simulate one trajectory. Both arms' rewards are drawn at every step from
/// a stream shared by all policies, so policies run with the same seed face
/// the same reward sequence.
pub fn run_bandit(config: &BanditConfig, policy: &Policy, seed: u64) -> Result<BanditTrajectory> {
    config.validate()?;
    let mechanism: Option<Mechanism> = match policy {
        Policy::Ucb => None,
        Policy::Private(spec) if spec.kind == MechanismKind::Rnmh => {
            return Err(Error::Config("rnmh is not private and cannot drive the bandit".into()))
        }
        Policy::Private(spec) => Some(spec.build()?),
    };

    let root = RngStream::new(seed, STREAM_BANDIT);
    let mut reward_rng = root.derive(0);
    let mut select_rng = root.derive(1);
    let mut counter_rng = root.derive(2);
    let mut quantile_rng = root.derive(3);

    let mut arms: Vec<ArmState> = (0..ARMS)
        .map(|_| {
            Ok(ArmState {
                pulls: 0,
                exact_sum: 0.0,
                counter: PrivateCounter::new(config.eps_mean)?,
                fresh: Vec::with_capacity(config.window),
                band: (0.0, 1.0),
                rounds: 0,
            })
        })
        .collect::<Result<_>>()?;

    let t_max = config.horizon;
    let mut traj = BanditTrajectory {
        policy: policy.name().to_string(),
        actions: Vec::with_capacity(t_max),
        rewards: Vec::with_capacity(t_max),
        est_means: Vec::with_capacity(t_max),
        est_quantiles: Vec::with_capacity(t_max),
        cumulative_reward: Vec::with_capacity(t_max),
        pulls: [0; ARMS],
        quantile_rounds: [0; ARMS],
    };
    let private_mean = |a: &ArmState| {
        if a.pulls == 0 {
            0.0
        } else {
            a.counter.query() / a.pulls as f64
        }
    };

    let mut total = 0.0;
    for t in 1..=t_max {
        let (means, sds) = config.regime(t);
        let draws: Vec<f64> = (0..ARMS)
            .map(|a| (means[a] + sds[a] * standard_normal(&mut reward_rng)).clamp(0.0, 1.0))
            .collect();

        let action = if let Some(a) = arms.iter().position(|s| s.pulls == 0) {
            a
        } else {
            match &mechanism {
                None => {
                    let scores: Vec<f64> = arms
                        .iter()
                        .map(|s| ucb_score(s.exact_sum, s.pulls, t_max as f64, config.ucb_alpha))
                        .collect();
                    crate::problem::argmax(&scores)
                }
                Some(m) => {
                    let q: Vec<f64> = arms.iter().map(private_mean).collect();
                    let d: Vec<f64> = arms.iter().map(|s| (s.band.1 - s.band.0).abs()).collect();
                    m.select(&SelectionProblem::new(q, d)?, &mut select_rng)?.chosen_index
                }
            }
        };

        let reward = draws[action];
        let arm = &mut arms[action];
        arm.pulls += 1;
        arm.exact_sum += reward;
        arm.counter.add(reward, &mut counter_rng);
        arm.fresh.push(reward);
        if arm.fresh.len() == config.window {
            let eps = config.eps_quantile / 2.0;
            let lo = dp_quantile(&arm.fresh, QUANTILE_LO, eps, &mut quantile_rng)?;
            let hi = dp_quantile(&arm.fresh, QUANTILE_HI, eps, &mut quantile_rng)?;
            arm.band = (lo, hi);
            arm.rounds += 1;
            arm.fresh.clear();
        }
        debug_assert!(arm.rounds * config.window as u64 <= arm.pulls);

        total += reward;
        traj.actions.push(action as u8);
        traj.rewards.push(reward);
        traj.cumulative_reward.push(total);
        traj.est_means.push(match mechanism {
            None => [0, 1].map(|a| {
                if arms[a].pulls == 0 {
                    0.0
                } else {
                    arms[a].exact_sum / arms[a].pulls as f64
                }
            }),
            Some(_) => [0, 1].map(|a| private_mean(&arms[a])),
        });
        traj.est_quantiles.push([arms[0].band, arms[1].band]);
    }
    traj.pulls = [arms[0].pulls, arms[1].pulls];
    traj.quantile_rounds = [arms[0].rounds, arms[1].rounds];
    Ok(traj)
}

/// True 10th/90th percentiles of a normal reward clipped to `[0, 1]`.
pub fn clipped_normal_band(mean: f64, sd: f64) -> (f64, f64) {
    const Z90: f64 = 1.281_551_565_544_600_5;
    ((mean - Z90 * sd).clamp(0.0, 1.0), (mean + Z90 * sd).clamp(0.0, 1.0))
}
