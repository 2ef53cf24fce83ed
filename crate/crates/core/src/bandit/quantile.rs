//! Private quantiles of values in `[0, 1]` via the exponential mechanism.

use rand::Rng;

use crate::error::{Error, Result};

/// Log-weights `ε·u_i/2` of the `n + 1` gaps between consecutive order
/// statistics (padded with 0 and 1), where `u_i = −|i − q·n|`.
pub fn quantile_log_weights(n: usize, q: f64, epsilon: f64) -> Vec<f64> {
    let target = q * n as f64;
    (0..=n).map(|i| -epsilon * (i as f64 - target).abs() / 2.0).collect()
}

/// Sorted copy of `window` clipped to `[0, 1]`, framed by 0 and 1.
pub fn quantile_breakpoints(window: &[f64]) -> Vec<f64> {
    let mut pts = Vec::with_capacity(window.len() + 2);
    pts.push(0.0);
    pts.extend(window.iter().map(|x| x.clamp(0.0, 1.0)));
    pts[1..].sort_by(f64::total_cmp);
    pts.push(1.0);
    pts
}

/// Pick gap `i` with probability proportional to `exp(ε·u_i/2)` and return
/// a uniform point inside it.
pub fn dp_quantile<R: Rng + ?Sized>(window: &[f64], q: f64, epsilon: f64, rng: &mut R) -> Result<f64> {
    if window.is_empty() {
        return Err(Error::Empty);
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::param("q", q, "must lie in (0, 1)"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::param("epsilon", epsilon, "must be positive"));
    }
    let pts = quantile_breakpoints(window);
    let logw = quantile_log_weights(window.len(), q, epsilon);
    let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut chosen = weights.len() - 1;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            chosen = i;
            break;
        }
        u -= w;
    }
    let (lo, hi) = (pts[chosen], pts[chosen + 1]);
    Ok(lo + rng.random::<f64>() * (hi - lo))
}
