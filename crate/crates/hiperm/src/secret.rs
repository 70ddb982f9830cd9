//! The hidden pair `(z, π)` and its prefix score function.
//!
//! A query `x ∈ {0,1}^n` is scored by the length of the longest common
//! prefix of `x` and the target string `z` in the order imposed by the
//! target permutation `π`:
//!
//! ```text
//! score(x) = max { i in [0..n] | for all j <= i: z[π(j)] = x[π(j)] }
//! ```

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::rng::RandomSource;

/// The hidden secret: target string `z` plus target permutation `π`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Secret {
    z: BitString,
    pi: Permutation,
}

impl Secret {
    pub fn new(z: BitString, pi: Permutation) -> Result<Self> {
        z.check_len(pi.len())?;
        Ok(Secret { z, pi })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.pi.len()
    }

    pub fn z(&self) -> &BitString {
        &self.z
    }

    pub fn pi(&self) -> &Permutation {
        &self.pi
    }

    /// Prefix score of `x`: walks `j = 1..n` in `π`-order and stops at the
    /// first disagreement with `z`. Cost is `O(score + 1)`.
    pub fn score(&self, x: &BitString) -> Result<usize> {
        x.check_len(self.n())?;
        let images = self.pi.images();
        for (j, &p) in images.iter().enumerate() {
            if x.get(p as usize) != self.z.get(p as usize) {
                return Ok(j);
            }
        }
        Ok(self.n())
    }

    /// Recovers `π⁻¹(i)` through the oracle identity
    /// `π⁻¹(i) = score(z ⊕ e_i) + 1`. Test-surface helper.
    pub fn invert_position(&self, i: usize) -> Result<usize> {
        let n = self.n();
        if i < 1 || i > n {
            return Err(Error::Position { pos: i, n });
        }
        let mut probe = self.z.clone();
        probe.flip(i);
        Ok(self.score(&probe)? + 1)
    }

    /// Uniform secret: `z` uniform over `{0,1}^n`, `π` uniform over `S_n`,
    /// independent.
    pub fn gen_uniform(n: usize, rng: &mut RandomSource) -> Self {
        assert!(n >= 1);
        let mut bits = Vec::with_capacity(n);
        for _ in 0..n {
            bits.push(rng.gen_bool());
        }
        let z = BitString::from_bools(&bits);
        let pi = Permutation::uniform(n, rng);
        Secret { z, pi }
    }

    /// Hard-distribution secret: `π` uniform and `z` determined by
    /// `z[π(i)] = i mod 2`, so the bit at the first position in `π`-order
    /// is 1, the second 0, and so on.
    pub fn gen_hard(n: usize, rng: &mut RandomSource) -> Self {
        assert!(n >= 1);
        let pi = Permutation::uniform(n, rng);
        let mut z = BitString::zeros(n);
        for i in 1..=n {
            if i % 2 == 1 {
                z.set(pi.image(i), true);
            }
        }
        Secret { z, pi }
    }

    /// Two-line text format: `z` as a 0/1 string, then the images
    /// `π(1)..π(n)` space-separated.
    pub fn to_text(&self) -> String {
        let imgs: Vec<String> = self.pi.images().iter().map(|v| v.to_string()).collect();
        format!("{}\n{}\n", self.z.to_str01(), imgs.join(" "))
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let zline = lines
            .next()
            .ok_or_else(|| Error::Parse("secret file: missing target string line".into()))?;
        let pline = lines
            .next()
            .ok_or_else(|| Error::Parse("secret file: missing permutation line".into()))?;
        let z = BitString::from_str01(zline)?;
        let images = pline
            .split_whitespace()
            .map(|tok| {
                tok.parse::<u32>()
                    .map_err(|_| Error::Parse(format!("invalid permutation image {tok:?}")))
            })
            .collect::<Result<Vec<u32>>>()?;
        let pi = Permutation::from_images(images)?;
        if z.len() != pi.len() {
            return Err(Error::Parse(format!(
                "secret file: string length {} does not match permutation length {}",
                z.len(),
                pi.len()
            )));
        }
        Secret::new(z, pi)
    }
}
