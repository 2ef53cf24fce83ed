//! Continual counting under differential privacy for streams of unknown
//! length.
//!
//! Items are grouped into epochs of doubling length (epoch `j` holds items
//! `2^j ..= 2^{j+1} − 1`, 1-based). Half of the budget releases one noisy
//! total per finished epoch, the other half runs a binary-tree counter
//! inside the current epoch.

use rand::Rng;

use crate::error::{Error, Result};
use crate::noise::laplace;

#[derive(Clone, Debug)]
pub struct PrivateCounter {
    epsilon: f64,
    count: u64,
    true_sum: f64,
    /// Sum of the noisy totals of finished epochs.
    closed_epochs: f64,
    epoch_sum: f64,
    epoch_levels: usize,
    /// Exact partial sums per tree level within the current epoch.
    alpha: Vec<f64>,
    /// Their noisy releases.
    noisy_alpha: Vec<f64>,
}

impl PrivateCounter {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::param("epsilon", epsilon, "must be positive"));
        }
        Ok(Self {
            epsilon,
            count: 0,
            true_sum: 0.0,
            closed_epochs: 0.0,
            epoch_sum: 0.0,
            epoch_levels: 1,
            alpha: vec![0.0],
            noisy_alpha: vec![0.0],
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Exact running sum, for diagnostics only.
    pub fn true_sum(&self) -> f64 {
        self.true_sum
    }

    fn epoch_start(&self) -> u64 {
        1u64 << (self.epoch_levels - 1)
    }

    /// Add `value` (clipped to `[0, 1]`).
    pub fn add<R: Rng + ?Sized>(&mut self, value: f64, rng: &mut R) {
        let value = value.clamp(0.0, 1.0);
        self.count += 1;
        self.true_sum += value;
        self.epoch_sum += value;

        let pos = self.count - self.epoch_start() + 1;
        let level = pos.trailing_zeros() as usize;
        let merged: f64 = self.alpha[..level].iter().sum::<f64>() + value;
        for l in 0..level {
            self.alpha[l] = 0.0;
            self.noisy_alpha[l] = 0.0;
        }
        self.alpha[level] = merged;
        let node_scale = self.epoch_levels as f64 / (self.epsilon / 2.0);
        self.noisy_alpha[level] = merged + laplace(node_scale, rng);

        if self.count + 1 == self.epoch_start() << 1 {
            self.closed_epochs += self.epoch_sum + laplace(2.0 / self.epsilon, rng);
            self.epoch_sum = 0.0;
            self.epoch_levels += 1;
            self.alpha = vec![0.0; self.epoch_levels];
            self.noisy_alpha = vec![0.0; self.epoch_levels];
        }
    }

    /// Noisy running sum of everything added so far.
    pub fn query(&self) -> f64 {
        if self.count < self.epoch_start() {
            return self.closed_epochs;
        }
        let pos = self.count - self.epoch_start() + 1;
        let within: f64 = (0..self.epoch_levels)
            .filter(|&l| pos >> l & 1 == 1)
            .map(|l| self.noisy_alpha[l])
            .sum();
        self.closed_epochs + within
    }
}

pub fn private_counter_add<R: Rng + ?Sized>(counter: &mut PrivateCounter, value: f64, rng: &mut R) {
    counter.add(value, rng);
}

pub fn private_counter_query(counter: &PrivateCounter) -> f64 {
    counter.query()
}
