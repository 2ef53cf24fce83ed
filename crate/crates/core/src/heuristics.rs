//! Correlation measures between scores and sensitivities, randomized response
//! and the GEM utility-bound flags.
//!
//! Degenerate inputs (a zero-variance vector) yield a coefficient of 0.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechanisms::krr_optimal_probability;
use crate::problem::SelectionProblem;

pub const DEFAULT_BUCKETS: usize = 5;

fn check_pair(q: &[f64], d: &[f64]) -> Result<()> {
    if q.len() != d.len() {
        return Err(Error::LengthMismatch {
            scores: q.len(),
            sensitivities: d.len(),
        });
    }
    if q.len() < 2 {
        return Err(Error::Config("correlation needs at least two candidates".into()));
    }
    Ok(())
}

/// Weighted Pearson correlation; the unweighted coefficient is the special
/// case of unit weights.
fn weighted_pearson(q: &[f64], d: &[f64], w: &[f64]) -> f64 {
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return 0.0;
    }
    let mq = q.iter().zip(w).map(|(x, w)| w * x).sum::<f64>() / total;
    let md = d.iter().zip(w).map(|(x, w)| w * x).sum::<f64>() / total;
    let (mut sqd, mut sqq, mut sdd) = (0.0, 0.0, 0.0);
    for ((&x, &y), &wi) in q.iter().zip(d).zip(w) {
        let (a, b) = (x - mq, y - md);
        sqd += wi * a * b;
        sqq += wi * a * a;
        sdd += wi * b * b;
    }
    if sqq <= 0.0 || sdd <= 0.0 {
        return 0.0;
    }
    (sqd / (sqq.sqrt() * sdd.sqrt())).clamp(-1.0, 1.0)
}

pub fn pearson(q: &[f64], d: &[f64]) -> Result<f64> {
    check_pair(q, d)?;
    Ok(weighted_pearson(q, d, &vec![1.0; q.len()]))
}

/// 1-based ranks, ties sharing the average of the positions they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Spearman's rank coefficient: Pearson of the average ranks.
pub fn spearman(q: &[f64], d: &[f64]) -> Result<f64> {
    check_pair(q, d)?;
    Ok(weighted_pearson(
        &average_ranks(q),
        &average_ranks(d),
        &vec![1.0; q.len()],
    ))
}

/// Per-candidate weights for [`weighted_correlation`]: the score range is cut
/// into `buckets` equal intervals (half-open, the last one closed) and each
/// candidate's sensitivity is divided by the largest sensitivity in its
/// interval. A bucket whose maximum is 0 gives its members weight 1.
pub fn bucket_weights(q: &[f64], d: &[f64], buckets: usize) -> Vec<f64> {
    let lo = q.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    let bucket_of = |x: f64| -> usize {
        if range <= 0.0 {
            return 0;
        }
        let b = ((x - lo) / range * buckets as f64).floor() as usize;
        b.min(buckets - 1)
    };
    let mut max_in = vec![0.0f64; buckets];
    for (&x, &s) in q.iter().zip(d) {
        let b = bucket_of(x);
        max_in[b] = max_in[b].max(s);
    }
    q.iter()
        .zip(d)
        .map(|(&x, &s)| {
            let m = max_in[bucket_of(x)];
            if m > 0.0 {
                s / m
            } else {
                1.0
            }
        })
        .collect()
}

/// Pearson correlation of `(q, Δ)` with bucket-relative sensitivity weights.
pub fn weighted_correlation(q: &[f64], d: &[f64], buckets: usize) -> Result<f64> {
    check_pair(q, d)?;
    if buckets == 0 {
        return Err(Error::Config("bucket count must be positive".into()));
    }
    let w = bucket_weights(q, d, buckets);
    Ok(weighted_pearson(q, d, &w))
}

/// Randomized response on one bit: the truth with probability `e^ε/(e^ε+1)`.
pub fn two_rr<R: Rng + ?Sized>(bit: bool, epsilon: f64, rng: &mut R) -> Result<bool> {
    if !(epsilon >= 0.0) {
        return Err(Error::param("epsilon", epsilon, "must be nonnegative"));
    }
    let truthful = rng.random::<f64>() < krr_optimal_probability(2, epsilon);
    Ok(if truthful { bit } else { !bit })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub pearson: f64,
    pub spearman: f64,
    pub weighted: f64,
    pub bucket_count: usize,
}

impl CorrelationReport {
    pub fn compute(q: &[f64], d: &[f64], buckets: usize) -> Result<Self> {
        Ok(Self {
            pearson: pearson(q, d)?,
            spearman: spearman(q, d)?,
            weighted: weighted_correlation(q, d, buckets)?,
            bucket_count: buckets,
        })
    }

    pub fn for_problem(problem: &SelectionProblem, buckets: usize) -> Result<Self> {
        Self::compute(problem.scores(), problem.sensitivities(), buckets)
    }
}

/// Situations in which GEM's utility bound is weaker than RNM's or than
/// uniform selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct UtilityBoundFlags {
    pub gem_worse_than_rnm: bool,
    pub gem_worse_than_random: bool,
}

/// `Δ_* > max Δ / 2` and `Δ_* > (q_* - q_-) / (4 ln(k/β)/ε)`, with `Δ_*` the
/// sensitivity of the best candidate.
pub fn utility_bound_flags(problem: &SelectionProblem, epsilon: f64, beta: f64) -> Result<UtilityBoundFlags> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::param("epsilon", epsilon, "must be positive and finite"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::param("beta", beta, "must lie in (0, 1)"));
    }
    let d_star = problem.sensitivities()[problem.optimal_index()];
    let gap = problem.best_score() - problem.worst_score();
    let threshold = gap / (4.0 * (problem.len() as f64 / beta).ln() / epsilon);
    Ok(UtilityBoundFlags {
        gem_worse_than_rnm: d_star > problem.global_sensitivity() / 2.0,
        gem_worse_than_random: d_star > threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::make_problem;
    use crate::rng::RngStream;
    use proptest::prelude::*;
    use rand::Rng;

    // textbook two-pass Pearson, independent of weighted_pearson
    fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
        cov / (vx * vy).sqrt()
    }

    // rank by counting: rank = #less + (#equal + 1)/2
    fn rank_oracle(v: &[f64]) -> Vec<f64> {
        v.iter()
            .map(|&x| {
                let less = v.iter().filter(|&&y| y < x).count() as f64;
                let eq = v.iter().filter(|&&y| y == x).count() as f64;
                less + (eq + 1.0) / 2.0
            })
            .collect()
    }

    #[test]
    fn spearman_extremes() {
        let q = [1.0, 2.0, 5.0, 9.0];
        assert!((spearman(&q, &[0.1, 0.2, 0.3, 4.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&q, &[4.0, 0.3, 0.2, 0.1]).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_with_ties_matches_oracle() {
        let q = [1.0, 1.0, 2.0];
        let d = [3.0, 1.0, 2.0];
        let expect = pearson_oracle(&rank_oracle(&q), &rank_oracle(&d));
        assert!((spearman(&q, &d).unwrap() - expect).abs() < 1e-12);
        // ranks (1.5, 1.5, 3) vs (3, 1, 2): cov = 0, so the coefficient is 0
        assert!(expect.abs() < 1e-12);
    }

    #[test]
    fn pearson_basics() {
        let q = [0.5, -1.0, 2.0, 3.5];
        assert!((pearson(&q, &q).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = q.iter().map(|x| -x).collect();
        assert!((pearson(&q, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&q, &[1.0; 4]).unwrap(), 0.0);
        assert!(pearson(&[1.0], &[1.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn pearson_matches_textbook_formula() {
        let mut rng = RngStream::new(12, 0);
        for _ in 0..50 {
            let x: Vec<f64> = (0..30).map(|_| rng.random::<f64>() * 4.0 - 1.0).collect();
            let y: Vec<f64> = (0..30).map(|_| rng.random::<f64>()).collect();
            assert!((pearson(&x, &y).unwrap() - pearson_oracle(&x, &y)).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_equals_pearson_for_equal_sensitivities() {
        let q = [0.1, 0.9, 0.4, 0.35, 0.8];
        let d = [2.0; 5];
        assert_eq!(weighted_correlation(&q, &d, 5).unwrap(), pearson(&q, &d).unwrap());
    }

    #[test]
    fn weighted_single_bucket_matches_oracle() {
        let q = [0.0, 1.0, 2.0, 4.0];
        let d = [0.5, 1.0, 2.0, 0.25];
        let w: Vec<f64> = d.iter().map(|x| x / 2.0).collect();
        let sw: f64 = w.iter().sum();
        let mq = q.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / sw;
        let md = d.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / sw;
        let num: f64 = (0..4).map(|i| w[i] * (q[i] - mq) * (d[i] - md)).sum();
        let vq: f64 = (0..4).map(|i| w[i] * (q[i] - mq).powi(2)).sum();
        let vd: f64 = (0..4).map(|i| w[i] * (d[i] - md).powi(2)).sum();
        let expect = num / (vq.sqrt() * vd.sqrt());
        assert!((weighted_correlation(&q, &d, 1).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn lone_candidate_in_bucket_has_unit_weight() {
        // scores 0, 0.1, 0.2 share bucket 0; 10 sits alone in the last bucket
        let w = bucket_weights(&[0.0, 0.1, 0.2, 10.0], &[1.0, 2.0, 4.0, 0.3], 5);
        assert_eq!(w, vec![0.25, 0.5, 1.0, 1.0]);
    }

    #[test]
    fn two_rr_rates() {
        for (seed, eps) in [(0u64, 0.0f64), (1, 3f64.ln())] {
            let mut rng = RngStream::new(40 + seed, 0);
            let n = 1_000_000;
            let truth = (0..n).filter(|_| two_rr(true, eps, &mut rng).unwrap()).count();
            let expect = eps.exp() / (eps.exp() + 1.0);
            assert!((truth as f64 / n as f64 - expect).abs() < 0.003);
        }
        assert!(krr_optimal_probability(2, 20.0) >= 0.9999);
        assert!(two_rr(true, -1.0, &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn utility_flags() {
        let p = make_problem(vec![0.0, 1.0, 2.0], vec![0.7; 3]).unwrap();
        let f = utility_bound_flags(&p, 1.0, 0.05).unwrap();
        assert!(f.gem_worse_than_rnm);

        let p = make_problem(vec![0.0, 1.0, 2.0], vec![0.7, 0.7, 0.0]).unwrap();
        let f = utility_bound_flags(&p, 1.0, 0.05).unwrap();
        assert!(!f.gem_worse_than_rnm && !f.gem_worse_than_random);

        // threshold 10 / (4 ln 40) ≈ 0.678 < Δ_* = 3
        let p = make_problem(vec![0.0, 10.0], vec![1.0, 3.0]).unwrap();
        let threshold = 10.0 / (4.0 * 40f64.ln());
        assert!((threshold - 0.6777).abs() < 1e-3);
        assert!(utility_bound_flags(&p, 1.0, 0.05).unwrap().gem_worse_than_random);
    }

    proptest! {
        #[test]
        fn spearman_sign_flip_without_ties(
            q in prop::collection::vec(-100.0f64..100.0, 3..40),
            seed in any::<u64>(),
        ) {
            let mut rng = RngStream::new(seed, 0);
            // distinct d values via a random permutation of 0..n
            let mut d: Vec<f64> = (0..q.len()).map(|i| i as f64).collect();
            for i in (1..d.len()).rev() {
                let j = rng.random_range(0..=i);
                d.swap(i, j);
            }
            let neg: Vec<f64> = d.iter().map(|x| -x).collect();
            let a = spearman(&q, &d).unwrap();
            let b = spearman(&q, &neg).unwrap();
            prop_assert!((a + b).abs() < 1e-12);
        }

        #[test]
        fn spearman_invariant_under_monotone_maps(
            q in prop::collection::vec(-5.0f64..5.0, 3..40),
            d in prop::collection::vec(0.0f64..3.0, 40),
        ) {
            let d = &d[..q.len()];
            let base = spearman(&q, d).unwrap();
            let q2: Vec<f64> = q.iter().map(|x| x.exp()).collect();
            let d2: Vec<f64> = d.iter().map(|x| 3.0 * x + x.powi(3)).collect();
            prop_assert!((spearman(&q2, &d2).unwrap() - base).abs() < 1e-12);
        }

        #[test]
        fn coefficients_are_bounded(
            q in prop::collection::vec(-5.0f64..5.0, 2..30),
            d in prop::collection::vec(0.0f64..3.0, 30),
        ) {
            let d = &d[..q.len()];
            let r = CorrelationReport::compute(&q, d, 5).unwrap();
            for c in [r.pearson, r.spearman, r.weighted] {
                prop_assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&c));
            }
        }

        #[test]
        fn single_bucket_homogeneous_is_pearson(
            q in prop::collection::vec(-5.0f64..5.0, 2..30),
            d in prop::collection::vec(0.0f64..3.0, 30),
            s in 0.1f64..4.0,
        ) {
            let d = &d[..q.len()];
            // homogeneous Δ makes all weights 1 regardless of B
            let flat = vec![s; q.len()];
            prop_assert_eq!(weighted_correlation(&q, &flat, 1).unwrap(), pearson(&q, &flat).unwrap());
            let _ = d;
        }
    }
}
