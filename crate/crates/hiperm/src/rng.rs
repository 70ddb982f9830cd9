//! Seedable deterministic randomness with splittable child streams.
//!
//! Every randomized component takes a [`RandomSource`]; parallel benchmark
//! trials each get their own split stream so results are independent of the
//! worker count.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Deterministic random stream. `split(i)` derives an independent child
/// stream from the parent seed and the index, without consuming state from
/// the parent, so splitting is reproducible regardless of draw order.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derive an independent child stream from this source's seed and `index`.
    pub fn split(&self, index: u64) -> Self {
        RandomSource::new(splitmix64(self.seed ^ splitmix64(index.wrapping_add(1))))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform integer in `0..bound`. Uses rejection sampling on the top
    /// multiple of `bound` so the result is exactly uniform.
    pub fn gen_range(&mut self, bound: usize) -> usize {
        assert!(bound >= 1);
        let bound = bound as u64;
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.next_u64();
            if v < zone {
                return (v % bound) as usize;
            }
        }
    }

    #[inline]
    pub fn gen_bool(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    /// Fisher-Yates shuffle of the whole slice.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.gen_range(i + 1);
            items.swap(i, j);
        }
    }

    /// Partial Fisher-Yates: after the call, `items[..m]` is a uniformly
    /// random size-`m` subset of the slice (in random order), and
    /// `items[m..]` holds the complement.
    pub fn sample_prefix<T>(&mut self, items: &mut [T], m: usize) {
        debug_assert!(m <= items.len());
        let len = items.len();
        for i in 0..m {
            let j = i + self.gen_range(len - i);
            items.swap(i, j);
        }
    }
}
