//! Permutations of `[n] = {1, ..., n}`.

use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// A permutation `π` of `[n]`, stored as its image sequence:
/// `images[j-1] = π(j)`, with both indices and images 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    images: Vec<u32>,
}

impl Permutation {
    /// Build from 1-based images `π(1)..π(n)`, validating bijectivity.
    pub fn from_images(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(Error::Parse("permutation must be non-empty".into()));
        }
        let mut seen = vec![false; n];
        for &v in &images {
            if v == 0 || v as usize > n {
                return Err(Error::Parse(format!(
                    "permutation image {v} out of range 1..={n}"
                )));
            }
            if seen[(v - 1) as usize] {
                return Err(Error::Parse(format!("permutation repeats image {v}")));
            }
            seen[(v - 1) as usize] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (1..=n as u32).collect(),
        }
    }

    pub fn uniform(n: usize, rng: &mut RandomSource) -> Self {
        let mut images: Vec<u32> = (1..=n as u32).collect();
        rng.shuffle(&mut images);
        Permutation { images }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// `π(j)` for 1-based `j`.
    #[inline]
    pub fn image(&self, j: usize) -> usize {
        self.images[j - 1] as usize
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    /// The inverse map as a 1-based array: `result[i-1] = π⁻¹(i)`.
    pub fn inverse_images(&self) -> Vec<u32> {
        let mut inv = vec![0u32; self.images.len()];
        for (j, &i) in self.images.iter().enumerate() {
            inv[(i - 1) as usize] = (j + 1) as u32;
        }
        inv
    }
}
