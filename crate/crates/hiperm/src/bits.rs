//! Packed bit strings over positions `1..=n`.
//!
//! All public position arguments are 1-indexed; storage is word-packed so
//! that solver inner loops can flip large index sets and diff whole strings
//! at word granularity.

use crate::error::{Error, Result};
use std::fmt;

/// A fixed-length binary string `x ∈ {0,1}^n`, stored packed in `u64` words.
///
/// Bit `i` (1-indexed) lives at word `(i-1)/64`, bit `(i-1)%64`. Unused high
/// bits of the last word are kept zero so equality and XOR work wordwise.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    n: usize,
    words: Vec<u64>,
}

#[inline]
fn word_count(n: usize) -> usize {
    n.div_ceil(64)
}

impl BitString {
    /// The all-zero string of length `n`.
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "bit string length must be at least 1");
        BitString {
            n,
            words: vec![0; word_count(n)],
        }
    }

    /// The all-one string of length `n`.
    pub fn ones(n: usize) -> Self {
        let mut s = Self::zeros(n);
        for w in &mut s.words {
            *w = u64::MAX;
        }
        s.mask_tail();
        s
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut s = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                s.words[i / 64] |= 1u64 << (i % 64);
            }
        }
        s
    }

    /// Parse from a string of `'0'`/`'1'` characters.
    pub fn from_str01(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.is_empty() {
            return Err(Error::Parse("empty bit string".into()));
        }
        let mut s = Self::zeros(t.len());
        for (i, c) in t.chars().enumerate() {
            match c {
                '0' => {}
                '1' => s.words[i / 64] |= 1u64 << (i % 64),
                other => {
                    return Err(Error::Parse(format!(
                        "invalid bit character {other:?} at offset {i}"
                    )))
                }
            }
        }
        Ok(s)
    }

    pub fn to_str01(&self) -> String {
        (1..=self.n)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false // length is always >= 1
    }

    /// Bit at 1-indexed position `i`.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i >= 1 && i <= self.n);
        let b = i - 1;
        (self.words[b / 64] >> (b % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i >= 1 && i <= self.n);
        let b = i - 1;
        if value {
            self.words[b / 64] |= 1u64 << (b % 64);
        } else {
            self.words[b / 64] &= !(1u64 << (b % 64));
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i >= 1 && i <= self.n);
        let b = i - 1;
        self.words[b / 64] ^= 1u64 << (b % 64);
    }

    /// Flip every position in `set` (1-indexed positions as `u32`).
    pub fn flip_all(&mut self, set: &[u32]) {
        for &p in set {
            let b = (p - 1) as usize;
            self.words[b / 64] ^= 1u64 << (b % 64);
        }
    }

    /// XOR another string of the same length into `self`.
    pub fn xor_with(&mut self, other: &BitString) {
        debug_assert_eq!(self.n, other.n);
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w ^= *o;
        }
    }

    /// Flip every position NOT set in `mask` (complement flip). Used to
    /// create `y` from `x` by flipping all bits outside a blocked set.
    pub fn xor_complement(&mut self, mask: &BitString) {
        debug_assert_eq!(self.n, mask.n);
        for (w, m) in self.words.iter_mut().zip(&mask.words) {
            *w ^= !*m;
        }
        self.mask_tail();
    }

    /// 1-indexed positions where `self` and `other` differ.
    pub fn diff_positions(&self, other: &BitString) -> Vec<u32> {
        debug_assert_eq!(self.n, other.n);
        let mut out = Vec::new();
        for (wi, (a, b)) in self.words.iter().zip(&other.words).enumerate() {
            let mut d = a ^ b;
            while d != 0 {
                let bit = d.trailing_zeros() as usize;
                out.push((wi * 64 + bit + 1) as u32);
                d &= d - 1;
            }
        }
        out
    }

    /// Number of set bits.
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    fn mask_tail(&mut self) {
        let rem = self.n % 64;
        if rem != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << rem) - 1;
        }
    }

    /// Ensure both strings have the same length, or report a dimension error.
    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.n != n {
            Err(Error::Dimension {
                expected: n,
                got: self.n,
            })
        } else {
            Ok(())
        }
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({})", self.to_str01())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_str01())
    }
}
