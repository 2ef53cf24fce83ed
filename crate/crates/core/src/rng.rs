//! Seeded random streams.
//!
//! Every Monte Carlo loop in the crate draws from an [`RngStream`]: a ChaCha12
//! generator keyed by a master seed and positioned on a 64-bit stream id.
//! Independent sub-streams are obtained with [`RngStream::derive`], so a sweep
//! cell or a block of trials always sees the same numbers no matter in which
//! order (or on which thread) it runs.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// A reproducible random stream identified by `(master_seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    inner: ChaCha12Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            inner,
        }
    }

    /// Stream 0 of `master_seed`.
    pub fn from_seed(master_seed: u64) -> Self {
        Self::new(master_seed, 0)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream for child `child` of this stream. Does not consume
    /// anything from `self`.
    pub fn derive(&self, child: u64) -> RngStream {
        let id = splitmix64(self.stream_id ^ splitmix64(child.wrapping_add(0x5851_f42d_4c95_7f2d)));
        RngStream::new(self.master_seed, id)
    }

    /// Derive along a path of child ids, e.g. `[scenario, mechanism, eps]`.
    pub fn derive_path(&self, path: &[u64]) -> RngStream {
        path.iter().fold(self.clone(), |s, &c| s.derive(c))
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Trials are grouped into blocks of this size, each block drawing from its
/// own derived stream.
pub const TRIAL_BLOCK: usize = 4096;

/// Run `trials` iterations of `f`, feeding block `b` from `stream.derive(b)`.
///
/// The result only depends on `(stream, trials)`, never on evaluation order.
pub fn for_each_trial<F>(stream: &RngStream, trials: usize, mut f: F)
where
    F: FnMut(usize, &mut RngStream),
{
    let mut start = 0;
    let mut block = 0u64;
    while start < trials {
        let end = (start + TRIAL_BLOCK).min(trials);
        let mut rng = stream.derive(block);
        for i in start..end {
            f(i, &mut rng);
        }
        start = end;
        block += 1;
    }
}
