//! Small statistical helpers shared by the generators and the harness.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Empirical quantile of already sorted data with linear interpolation
/// between order statistics (position `p·(n−1)`).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    let p = p.clamp(0.0, 1.0);
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

pub fn quantile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

pub const Z_95: f64 = 1.959_963_984_540_054;

/// Mean with a normal-approximation 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: u64,
}

impl MeanEstimate {
    pub fn from_samples(values: &[f64]) -> Self {
        let mut acc = MeanAccumulator::default();
        for &v in values {
            acc.push(v);
        }
        acc.finish()
    }

    pub fn overlaps(&self, other: &MeanEstimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }

    /// True when this interval lies entirely below `other`'s.
    pub fn clearly_below(&self, other: &MeanEstimate) -> bool {
        self.ci_high < other.ci_low
    }
}

/// Welford running mean and variance.
#[derive(Clone, Copy, Debug, Default)]
pub struct MeanAccumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl MeanAccumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn finish(&self) -> MeanEstimate {
        let n = self.n;
        if n == 0 {
            return MeanEstimate {
                mean: f64::NAN,
                ci_low: f64::NAN,
                ci_high: f64::NAN,
                n,
            };
        }
        let half = if n > 1 {
            Z_95 * (self.m2 / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        MeanEstimate {
            mean: self.mean,
            ci_low: self.mean - half,
            ci_high: self.mean + half,
            n,
        }
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Normal(`loc`, `scale`) restricted to `[lo, hi]`, by rejection from the
/// parent distribution.
pub fn truncated_normal<R: Rng + ?Sized>(loc: f64, scale: f64, lo: f64, hi: f64, rng: &mut R) -> f64 {
    loop {
        let x = loc + scale * standard_normal(rng);
        if (lo..=hi).contains(&x) {
            return x;
        }
    }
}
