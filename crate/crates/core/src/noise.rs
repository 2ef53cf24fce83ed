//! Seeded samplers for the noise and stopping distributions used by the
//! mechanisms.
//!
//! The exponential distribution is parameterized by its **mean** everywhere in
//! this crate. Report-noisy-max with sensitivity `Δ` and budget `ε` therefore
//! draws with `mean = 2Δ/ε` (rate `ε/2Δ`).

use std::sync::Arc;

use rand::distr::Open01;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Exponential sample with the given mean.
pub fn sample_exponential<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<f64> {
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::param("mean", mean, "must be positive and finite"));
    }
    Ok(exponential(mean, rng))
}

/// Laplace sample centred at 0 with the given scale.
pub fn sample_laplace<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::param("scale", scale, "must be positive and finite"));
    }
    Ok(laplace(scale, rng))
}

// Unchecked variants. A zero mean/scale yields exactly 0 and consumes one
// uniform, so the stream position stays aligned with the candidate index.
pub(crate) fn exponential<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    // 1 - U lies in (0, 1]
    let u = 1.0 - rng.random::<f64>();
    if mean == 0.0 {
        return 0.0;
    }
    -mean * u.ln()
}

pub(crate) fn laplace<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    if scale == 0.0 {
        return 0.0;
    }
    let v = u - 0.5;
    if v < 0.0 {
        scale * (1.0 + 2.0 * v).ln()
    } else {
        -scale * (1.0 - 2.0 * v).ln()
    }
}

/// How many candidates random stopping evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingKind {
    /// Stop after each draw with probability γ.
    Geometric,
    /// Truncated negative binomial on {1, 2, ...}; η = 0 is the logarithmic
    /// distribution.
    TruncatedNegativeBinomial,
}

/// Cumulative mass at which the inverse-CDF table stops growing eagerly.
const TABLE_MASS: f64 = 1.0 - 1e-12;
/// Hard cap on the support explored by the sampler.
pub const MAX_STOPPING_COUNT: u64 = 10_000_000;

/// Distribution of the number of rounds `K ≥ 1` in random stopping.
#[derive(Clone, Debug)]
pub struct StoppingRule {
    kind: StoppingKind,
    gamma: f64,
    eta: f64,
    // cdf[k-1] = P[K <= k]; only populated for the truncated negative binomial
    cdf: Arc<Vec<f64>>,
}

impl StoppingRule {
    /// Geometric stopping, `P[K = k] = γ(1-γ)^{k-1}`; `γ = 1` always stops
    /// after the first draw.
    pub fn geometric(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::param("gamma", gamma, "must lie in (0, 1]"));
        }
        Ok(Self {
            kind: StoppingKind::Geometric,
            gamma,
            eta: 1.0,
            cdf: Arc::new(Vec::new()),
        })
    }

    pub fn truncated_negative_binomial(gamma: f64, eta: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::param("gamma", gamma, "must lie in (0, 1)"));
        }
        if !(eta > -1.0 && eta.is_finite()) {
            return Err(Error::param("eta", eta, "must be greater than -1"));
        }
        let mut rule = Self {
            kind: StoppingKind::TruncatedNegativeBinomial,
            gamma,
            eta,
            cdf: Arc::new(Vec::new()),
        };
        let mut cdf = Vec::new();
        let mut acc = 0.0;
        let mut p = rule.first_mass();
        let mut k = 1u64;
        while acc < TABLE_MASS && k <= MAX_STOPPING_COUNT {
            acc += p;
            cdf.push(acc);
            p = rule.next_mass(p, k);
            k += 1;
        }
        rule.cdf = Arc::new(cdf);
        Ok(rule)
    }

    pub fn kind(&self) -> StoppingKind {
        self.kind
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// η of the negative binomial family; geometric stopping reports 1.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `P[K = 1]`.
    fn first_mass(&self) -> f64 {
        let (g, eta) = (self.gamma, self.eta);
        match self.kind {
            StoppingKind::Geometric => g,
            StoppingKind::TruncatedNegativeBinomial if eta == 0.0 => (1.0 - g) / (1.0 / g).ln(),
            StoppingKind::TruncatedNegativeBinomial => (1.0 - g) * eta / (g.powf(-eta) - 1.0),
        }
    }

    /// `P[K = k + 1]` from `P[K = k]`.
    fn next_mass(&self, pk: f64, k: u64) -> f64 {
        let kf = k as f64;
        match self.kind {
            StoppingKind::Geometric => pk * (1.0 - self.gamma),
            StoppingKind::TruncatedNegativeBinomial => pk * (1.0 - self.gamma) * (kf + self.eta) / (kf + 1.0),
        }
    }

    /// Probability mass at `k` (0 for `k = 0`).
    pub fn pmf(&self, k: u64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        match self.kind {
            StoppingKind::Geometric => self.gamma * (1.0 - self.gamma).powf((k - 1) as f64),
            StoppingKind::TruncatedNegativeBinomial => {
                let mut p = self.first_mass();
                for j in 1..k {
                    p = self.next_mass(p, j);
                }
                p
            }
        }
    }

    /// Closed-form `E[K]`.
    pub fn mean(&self) -> f64 {
        let (g, eta) = (self.gamma, self.eta);
        match self.kind {
            StoppingKind::Geometric => 1.0 / g,
            StoppingKind::TruncatedNegativeBinomial if eta == 0.0 => (1.0 / g - 1.0) / (1.0 / g).ln(),
            StoppingKind::TruncatedNegativeBinomial => eta * (1.0 - g) / (g * (1.0 - g.powf(eta))),
        }
    }

    /// Number of rounds `K ≥ 1`, by inversion of a single uniform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self.kind {
            StoppingKind::Geometric => {
                let u: f64 = rng.sample(Open01);
                if self.gamma >= 1.0 {
                    return 1;
                }
                let k = (u.ln() / (1.0 - self.gamma).ln()).ceil();
                if k < 1.0 {
                    1
                } else if k >= MAX_STOPPING_COUNT as f64 {
                    MAX_STOPPING_COUNT + 1
                } else {
                    k as u64
                }
            }
            StoppingKind::TruncatedNegativeBinomial => {
                let u: f64 = rng.random();
                let idx = self.cdf.partition_point(|&c| c <= u);
                if idx < self.cdf.len() {
                    return idx as u64 + 1;
                }
                // beyond the eager table: keep walking the pmf recursion
                let mut k = self.cdf.len() as u64;
                let mut acc = *self.cdf.last().unwrap_or(&0.0);
                let mut p = self.pmf(k.max(1));
                while acc <= u && k <= MAX_STOPPING_COUNT {
                    p = self.next_mass(p, k);
                    k += 1;
                    acc += p;
                    if p == 0.0 {
                        break;
                    }
                }
                k
            }
        }
    }
}

/// Free-function form of [`StoppingRule::sample`].
pub fn sample_stopping_count<R: Rng + ?Sized>(rule: &StoppingRule, rng: &mut R) -> u64 {
    rule.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    const N: usize = 1_000_000;

    #[test]
    fn exponential_support_mean_and_cdf() {
        let mut rng = RngStream::new(10, 0);
        let mut sum = 0.0;
        let mut below = 0usize;
        for _ in 0..N {
            let x = sample_exponential(2.0, &mut rng).unwrap();
            assert!(x >= 0.0);
            sum += x;
            if x <= 2.0 {
                below += 1;
            }
        }
        assert!((sum / N as f64 - 2.0).abs() < 0.01);
        let cdf = below as f64 / N as f64;
        assert!((cdf - (1.0 - (-1.0f64).exp())).abs() < 0.005, "{cdf}");
    }

    #[test]
    fn laplace_symmetry_tail_and_variance() {
        let mut rng = RngStream::new(11, 0);
        let (mut neg, mut tail) = (0usize, 0usize);
        for _ in 0..N {
            let x = sample_laplace(1.0, &mut rng).unwrap();
            if x < 0.0 {
                neg += 1;
            }
            if x < -1.0 {
                tail += 1;
            }
        }
        assert!((neg as f64 / N as f64 - 0.5).abs() < 0.003);
        let expect = 0.5 * (-1.0f64).exp();
        assert!((tail as f64 / N as f64 - expect).abs() < 0.003);

        let mut sq = 0.0;
        for _ in 0..N {
            let x = sample_laplace(3.0, &mut rng).unwrap();
            sq += x * x;
        }
        let var = sq / N as f64;
        assert!((var - 18.0).abs() < 0.02 * 18.0, "{var}");
    }

    #[test]
    fn samplers_reject_bad_parameters() {
        let mut rng = RngStream::new(1, 0);
        assert!(sample_exponential(0.0, &mut rng).is_err());
        assert!(sample_exponential(-1.0, &mut rng).is_err());
        assert!(sample_laplace(0.0, &mut rng).is_err());
        assert!(StoppingRule::geometric(0.0).is_err());
        assert!(StoppingRule::truncated_negative_binomial(1.0, 0.0).is_err());
        assert!(StoppingRule::truncated_negative_binomial(0.5, -1.0).is_err());
    }

    fn empirical_mean(rule: &StoppingRule, seed: u64) -> f64 {
        let mut rng = RngStream::new(seed, 0);
        let mut sum = 0u64;
        for _ in 0..N {
            let k = rule.sample(&mut rng);
            assert!(k >= 1);
            sum += k;
        }
        sum as f64 / N as f64
    }

    #[test]
    fn geometric_mean() {
        let rule = StoppingRule::geometric(0.5).unwrap();
        assert!((empirical_mean(&rule, 3) - 2.0).abs() < 0.04);
    }

    #[test]
    fn logarithmic_mean() {
        let rule = StoppingRule::truncated_negative_binomial(0.5, 0.0).unwrap();
        let expect = 1.0 / 2f64.ln();
        assert!((rule.mean() - expect).abs() < 1e-12);
        let m = empirical_mean(&rule, 4);
        assert!((m - expect).abs() < 0.02 * expect, "{m}");
    }

    #[test]
    fn eta_one_is_geometric() {
        let tnb = StoppingRule::truncated_negative_binomial(0.3, 1.0).unwrap();
        let geo = StoppingRule::geometric(0.3).unwrap();
        for k in 1..=30 {
            assert!((tnb.pmf(k) - geo.pmf(k)).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn pmf_normalizes() {
        for eta in [-0.5, 0.0, 0.5, 1.0] {
            let rule = StoppingRule::truncated_negative_binomial(0.2, eta).unwrap();
            let mut acc = 0.0;
            let mut k = 1;
            while acc <= 1.0 - 1e-10 {
                acc += rule.pmf(k);
                k += 1;
            }
            assert!((acc - 1.0).abs() < 1e-9, "eta={eta} acc={acc}");
        }
    }

    #[test]
    fn logarithmic_pmf_closed_form() {
        let g: f64 = 0.35;
        let rule = StoppingRule::truncated_negative_binomial(g, 0.0).unwrap();
        for k in 1..=50u64 {
            let closed = (1.0 - g).powi(k as i32) / (k as f64 * (1.0 / g).ln());
            assert!((rule.pmf(k) - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_one_stops_immediately() {
        let rule = StoppingRule::geometric(1.0).unwrap();
        let mut rng = RngStream::new(2, 2);
        assert!((0..1000).all(|_| rule.sample(&mut rng) == 1));
    }
}
