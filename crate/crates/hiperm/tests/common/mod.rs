//! Shared helpers: brute-force enumeration over all secrets (small n) and
//! an independent bipartite matcher.

// each test binary uses a different subset of these
#![allow(dead_code)]

use hiperm::{BitString, Permutation, RandomSource, Secret, Transcript};

/// Every secret of size `n` (all `2^n · n!` of them). Keep `n <= 6`.
pub fn all_secrets(n: usize) -> Vec<Secret> {
    assert!(n <= 6);
    let mut perms = Vec::new();
    let mut images: Vec<u32> = (1..=n as u32).collect();
    heap_permute(&mut images, n, &mut perms);
    let mut out = Vec::new();
    for imgs in &perms {
        for bits in 0..(1u32 << n) {
            let mut z = BitString::zeros(n);
            for i in 1..=n {
                if (bits >> (i - 1)) & 1 == 1 {
                    z.set(i, true);
                }
            }
            out.push(Secret::new(z, Permutation::from_images(imgs.clone()).unwrap()).unwrap());
        }
    }
    out
}

fn heap_permute(items: &mut Vec<u32>, k: usize, out: &mut Vec<Vec<u32>>) {
    if k == 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k.is_multiple_of(2) {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

/// Secrets consistent with every entry of the history.
pub fn consistent_secrets(h: &Transcript) -> Vec<Secret> {
    all_secrets(h.n())
        .into_iter()
        .filter(|sec| {
            h.entries()
                .iter()
                .all(|e| sec.score(&e.query).unwrap() == e.score)
        })
        .collect()
}

/// Random history with arbitrary (possibly inconsistent) scores.
pub fn random_history(n: usize, len: usize, rng: &mut RandomSource) -> Transcript {
    let mut t = Transcript::new(n);
    for _ in 0..len {
        let mut bits = Vec::with_capacity(n);
        for _ in 0..n {
            bits.push(rng.gen_bool());
        }
        let q = BitString::from_bools(&bits);
        let s = rng.gen_range(n + 1);
        t.push(q, s).unwrap();
    }
    t
}

/// Random history scored by a real secret (always feasible).
pub fn random_feasible_history(n: usize, len: usize, rng: &mut RandomSource) -> Transcript {
    let secret = Secret::gen_uniform(n, rng);
    let mut t = Transcript::new(n);
    for _ in 0..len {
        let mut bits = Vec::with_capacity(n);
        for _ in 0..n {
            bits.push(rng.gen_bool());
        }
        let q = BitString::from_bools(&bits);
        let s = secret.score(&q).unwrap();
        t.push(q, s).unwrap();
    }
    t
}

/// Augmenting-path bipartite matching: does a perfect matching of indices
/// `1..=n` into their candidate sets exist?
pub fn has_perfect_matching(candidates: &[Vec<u32>]) -> bool {
    let n = candidates.len();
    // matched[p-1] = index currently assigned position p
    let mut matched: Vec<Option<usize>> = vec![None; n];

    fn try_assign(
        j: usize,
        candidates: &[Vec<u32>],
        matched: &mut Vec<Option<usize>>,
        visited: &mut Vec<bool>,
    ) -> bool {
        for &p in &candidates[j] {
            let p = p as usize - 1;
            if visited[p] {
                continue;
            }
            visited[p] = true;
            if matched[p].is_none() || try_assign(matched[p].unwrap(), candidates, matched, visited)
            {
                matched[p] = Some(j);
                return true;
            }
        }
        false
    }

    for j in 0..n {
        let mut visited = vec![false; n];
        if !try_assign(j, candidates, &mut matched, &mut visited) {
            return false;
        }
    }
    true
}
