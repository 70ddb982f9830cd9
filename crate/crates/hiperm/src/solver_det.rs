//! Deterministic reconstruction in `O(n log n)` queries.
//!
//! Positions are fixed in `π`-order. With the first `i - 1` positions of
//! the query already correct and the score normalized to exactly `i - 1`,
//! flipping a candidate subset `F` raises the score iff `π(i) ∈ F`, so
//! `π(i)` is found by binary search over the remaining candidates.

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::handle::{OracleHandle, ScoreSource, SolveResult};
use crate::perm::Permutation;
use crate::secret::Secret;

/// Identify `π(i)` among `cand` (sorted, exactly the unassigned positions).
///
/// On entry `x` scores exactly `*s >= i - 1` and agrees with the target on
/// `π(1)..π(i-1)`. When `*s > i - 1`, flipping every candidate breaks the
/// match at `π(i)` and nowhere earlier, which renormalizes the score to
/// `i - 1` without spending a query. Each halving queries `x` with the
/// first half of the window flipped: a score jump means `π(i)` was in the
/// flipped half.
///
/// Costs `ceil(log2 |cand|)` queries. `x` and `*s` stay valid for the
/// caller (score exactly `i - 1` on return).
pub fn bin_search<S: ScoreSource>(
    handle: &mut OracleHandle<S>,
    i: usize,
    cand: &[u32],
    x: &mut BitString,
    s: &mut usize,
) -> Result<u32> {
    debug_assert!(!cand.is_empty());
    if *s < i - 1 {
        return Err(Error::Inconsistent(format!(
            "score {} below resolved prefix {}",
            *s,
            i - 1
        )));
    }
    if *s > i - 1 {
        x.flip_all(cand);
        *s = i - 1;
    }
    let mut lo = 0usize;
    let mut len = cand.len();
    while len > 1 {
        let half = len.div_ceil(2);
        let mut y = x.clone();
        y.flip_all(&cand[lo..lo + half]);
        let fy = handle.query(&y)?;
        if fy >= i {
            len = half;
        } else if fy == i - 1 {
            lo += half;
            len -= half;
        } else {
            return Err(Error::Inconsistent(format!(
                "probe score {fy} below resolved prefix {}",
                i - 1
            )));
        }
    }
    Ok(cand[lo])
}

/// Resolve positions `images.len() + 1 ..= n` by repeated binary search.
///
/// Preconditions: `images` holds `π(1)..π(k)`, `unassigned` is the sorted
/// complement, `x` agrees with the target on the resolved prefix, and `*s`
/// is its known score. Spends one refresh query per position on top of the
/// binary searches; the final refresh returns `n` and certifies `x = z`.
pub(crate) fn extend_assignment<S: ScoreSource>(
    handle: &mut OracleHandle<S>,
    images: &mut Vec<u32>,
    unassigned: &mut Vec<u32>,
    x: &mut BitString,
    s: &mut usize,
) -> Result<()> {
    let n = handle.n();
    for i in images.len() + 1..=n {
        let p = bin_search(handle, i, unassigned, x, s)?;
        x.flip(p as usize);
        let refreshed = handle.query(x)?;
        if refreshed < i {
            return Err(Error::Inconsistent(format!(
                "score {refreshed} after fixing position {i}"
            )));
        }
        *s = refreshed;
        let at = unassigned.binary_search(&p).expect("candidate present");
        unassigned.remove(at);
        images.push(p);
    }
    if *s != n {
        return Err(Error::Inconsistent(format!(
            "final score {} with all positions fixed",
            *s
        )));
    }
    Ok(())
}

/// Deterministic solver: `1 + n + sum_{k=1..n} ceil(log2 k)` queries.
pub fn solve_det<S: ScoreSource>(handle: &mut OracleHandle<S>) -> Result<SolveResult> {
    let n = handle.n();
    let mut x = BitString::zeros(n);
    let mut s = handle.query(&x)?;
    let mut images = Vec::with_capacity(n);
    let mut unassigned: Vec<u32> = (1..=n as u32).collect();
    extend_assignment(handle, &mut images, &mut unassigned, &mut x, &mut s)?;
    let pi = Permutation::from_images(images)?;
    Ok(SolveResult {
        secret: Secret::new(x, pi)?,
        queries: handle.queries(),
        transcript: handle.take_transcript(),
    })
}

/// Query budget of [`solve_det`] for instance size `n`.
pub fn det_query_bound(n: usize) -> u64 {
    let halvings: u64 = (1..=n as u64)
        .map(|k| (64 - (k - 1).leading_zeros()) as u64) // ceil(log2 k)
        .sum();
    2 + n as u64 + halvings
}
