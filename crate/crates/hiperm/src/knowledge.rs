//! The consistency calculus for guessing histories.
//!
//! A history `H = (x^i, s^i)` is summarized, without loss of information, by
//! candidate sets `V_1..V_n` (the values still possible for each `π(j)`)
//! together with a best query `(x*, s*)`. The sets form a laminar family
//! with the order property: for `j < i`, `V_j ⊆ V_i` or `V_j ∩ V_i = ∅`.
//! That structure makes feasibility, exact counting of consistent secrets,
//! witness construction, and per-position value filtering all polynomial.

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::secret::Secret;
use crate::transcript::Transcript;
use num_bigint::BigUint;
use serde::Serialize;

/// View of one candidate set: explicitly tracked, or still the full `[n]`.
///
/// Sets with index above `s* + 1` are never touched by the update rules, so
/// they are kept implicit.
#[derive(Clone, Copy, Debug)]
pub enum CandidateSet<'a> {
    Explicit(&'a [u32]),
    Full(usize),
}

impl<'a> CandidateSet<'a> {
    pub fn len(&self) -> usize {
        match self {
            CandidateSet::Explicit(s) => s.len(),
            CandidateSet::Full(n) => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, p: u32) -> bool {
        match self {
            CandidateSet::Explicit(s) => s.binary_search(&p).is_ok(),
            CandidateSet::Full(n) => p >= 1 && p as usize <= *n,
        }
    }

    pub fn to_vec(&self) -> Vec<u32> {
        match self {
            CandidateSet::Explicit(s) => s.to_vec(),
            CandidateSet::Full(n) => (1..=*n as u32).collect(),
        }
    }
}

/// Candidate sets plus best query: the total knowledge of a history.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnowledgeState {
    n: usize,
    /// Explicit sets for indices `1..=sets.len()`, each sorted ascending;
    /// `sets.len() == min(s* + 1, n)` once a query has been recorded.
    sets: Vec<Vec<u32>>,
    best: Option<(BitString, usize)>,
}

/// Agreement mask of two strings, packed; bit set where they agree.
fn agreement_words(a: &BitString, b: &BitString) -> Vec<u64> {
    a.words()
        .iter()
        .zip(b.words())
        .map(|(x, y)| !(x ^ y))
        .collect()
}

#[inline]
fn mask_has(mask: &[u64], p: u32) -> bool {
    let b = (p - 1) as usize;
    (mask[b / 64] >> (b % 64)) & 1 == 1
}

impl KnowledgeState {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        KnowledgeState {
            n,
            sets: Vec::new(),
            best: None,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn best_query(&self) -> Option<(&BitString, usize)> {
        self.best.as_ref().map(|(x, s)| (x, *s))
    }

    pub fn candidate_set(&self, j: usize) -> CandidateSet<'_> {
        debug_assert!(j >= 1 && j <= self.n);
        if j <= self.sets.len() {
            CandidateSet::Explicit(&self.sets[j - 1])
        } else {
            CandidateSet::Full(self.n)
        }
    }

    fn materialize_to(&mut self, bound: usize) {
        while self.sets.len() < bound {
            self.sets.push((1..=self.n as u32).collect());
        }
    }

    /// Fold one `(query, score)` pair into the state (incremental Rules 1-3,
    /// with `I` the agreement set of the query and the current best query).
    pub fn update(&mut self, query: &BitString, score: usize) -> Result<()> {
        query.check_len(self.n)?;
        if score > self.n {
            return Err(Error::Parse(format!(
                "score {score} out of range 0..={}",
                self.n
            )));
        }
        let n = self.n;
        match self.best.take() {
            None => {
                self.materialize_to((score + 1).min(n));
                self.best = Some((query.clone(), score));
            }
            Some((xstar, sstar)) => {
                let agree = agreement_words(query, &xstar);
                let intersect = |set: &mut Vec<u32>| set.retain(|&p| mask_has(&agree, p));
                let subtract = |set: &mut Vec<u32>| set.retain(|&p| !mask_has(&agree, p));
                if score < sstar {
                    // Rule 1
                    for set in &mut self.sets[..score] {
                        intersect(set);
                    }
                    subtract(&mut self.sets[score]); // V_{s+1}; s+1 <= s* <= len
                    self.best = Some((xstar, sstar));
                } else if score == sstar {
                    // Rule 2
                    let hi = (sstar + 1).min(n);
                    for set in &mut self.sets[..hi] {
                        intersect(set);
                    }
                    self.best = Some((xstar, sstar));
                } else {
                    // Rule 3
                    for set in &mut self.sets[..sstar] {
                        intersect(set);
                    }
                    if sstar < n {
                        subtract(&mut self.sets[sstar]);
                    }
                    self.materialize_to((score + 1).min(n));
                    self.best = Some((query.clone(), score));
                }
            }
        }
        Ok(())
    }

    /// Build the state directly from the closure rules over all pairs of
    /// history entries, rather than by folding the incremental updates.
    /// The two constructions agree set-for-set; tests exploit that as a
    /// dual-route check.
    pub fn from_history(h: &Transcript) -> Self {
        let n = h.n();
        let entries = h.entries();
        if entries.is_empty() {
            return KnowledgeState::new(n);
        }
        let words = n.div_ceil(64);
        let tail_mask: u64 = if n.is_multiple_of(64) {
            u64::MAX
        } else {
            (1u64 << (n % 64)) - 1
        };

        // prefix_excl[s]: positions excluded from every V_j with j <= s.
        let mut prefix_excl = vec![vec![0u64; words]; n + 1];
        // at_excl[j]: positions excluded from V_j alone (rules 2 and 3).
        let mut at_excl = vec![vec![0u64; words]; n + 2];

        for (a, ea) in entries.iter().enumerate() {
            for eb in entries.iter().skip(a + 1) {
                let (lo, hi) = if ea.score <= eb.score {
                    (ea, eb)
                } else {
                    (eb, ea)
                };
                let s_lo = lo.score;
                // Rule 1: positions where the two queries differ are excluded
                // from V_j for all j <= min(score, score).
                if s_lo >= 1 {
                    for (w, (qa, qb)) in prefix_excl[s_lo]
                        .iter_mut()
                        .zip(lo.query.words().iter().zip(hi.query.words()))
                    {
                        *w |= qa ^ qb;
                    }
                }
                if s_lo == hi.score {
                    // Rule 2: differing positions excluded from V_{s+1}.
                    if s_lo < n {
                        for (w, (qa, qb)) in at_excl[s_lo + 1]
                            .iter_mut()
                            .zip(lo.query.words().iter().zip(hi.query.words()))
                        {
                            *w |= qa ^ qb;
                        }
                    }
                } else {
                    // Rule 3: agreeing positions excluded from V_{s_lo+1}.
                    for (i, (w, (qa, qb))) in at_excl[s_lo + 1]
                        .iter_mut()
                        .zip(lo.query.words().iter().zip(hi.query.words()))
                        .enumerate()
                    {
                        let mut agree = !(qa ^ qb);
                        if i == words - 1 {
                            agree &= tail_mask;
                        }
                        *w |= agree;
                    }
                }
            }
        }

        let sstar = entries.iter().map(|e| e.score).max().unwrap();
        let best = entries
            .iter()
            .find(|e| e.score == sstar)
            .map(|e| (e.query.clone(), sstar));
        let bound = (sstar + 1).min(n);

        // suffix-OR of prefix exclusions: V_j excludes prefix_excl[s] for s >= j
        let mut totals = vec![vec![0u64; words]; bound];
        let mut running = vec![0u64; words];
        for s in (1..=n).rev() {
            for (r, p) in running.iter_mut().zip(&prefix_excl[s]) {
                *r |= *p;
            }
            if s <= bound {
                for ((t, r), a) in totals[s - 1].iter_mut().zip(&running).zip(&at_excl[s]) {
                    *t = r | a;
                }
            }
        }
        let sets = totals
            .iter()
            .map(|total| (1..=n as u32).filter(|&p| !mask_has(total, p)).collect())
            .collect();

        KnowledgeState { n, sets, best }
    }

    /// Greedy Hall factors for the explicit sets: `|V_i| - #{j < i : V_j ⊆ V_i}`.
    ///
    /// Laminarity plus the order property reduce each subset test to a
    /// minimum-element membership test, so one pass over the set mass
    /// suffices.
    fn explicit_factors(&self) -> Vec<i64> {
        let mut factors = Vec::with_capacity(self.sets.len());
        // min_count[p] = number of earlier sets whose minimum element is p
        let mut min_count = vec![0u32; self.n + 1];
        let mut empties = 0i64;
        for set in &self.sets {
            let contained: i64 = set.iter().map(|&p| min_count[p as usize] as i64).sum();
            factors.push(set.len() as i64 - contained - empties);
            match set.first() {
                Some(&m) => min_count[m as usize] += 1,
                None => empties += 1,
            }
        }
        factors
    }

    /// True iff some secret is consistent: the greedy assignment never
    /// violates Hall's condition, i.e. every factor is at least one.
    /// Implicit full sets always have factor `n - i + 1 >= 1`.
    pub fn is_feasible(&self) -> bool {
        self.explicit_factors().iter().all(|&f| f >= 1)
    }

    /// Exact number of consistent pairs `(z, π)`: the product of the greedy
    /// factors times `2^(n - (s*+1))` free target bits (`1` when `s* = n`).
    pub fn count_consistent(&self) -> BigUint {
        let n = self.n;
        let factors = self.explicit_factors();
        if factors.iter().any(|&f| f <= 0) {
            return BigUint::from(0u32);
        }
        let mut count = BigUint::from(1u32);
        for f in factors {
            count *= f as u64;
        }
        for i in self.sets.len() + 1..=n {
            count *= (n - i + 1) as u64;
        }
        let free_bits = match &self.best {
            None => n,
            Some((_, sstar)) if *sstar < n => n - (sstar + 1),
            _ => 0,
        };
        count << free_bits
    }

    /// Construct one consistent secret.
    ///
    /// The permutation is fixed smallest-set-first: within a laminar family
    /// every remaining element of the current set lies in exactly the same
    /// collection of unassigned supersets, so taking the smallest unused
    /// element never blocks a completion. Bits follow the reconstruction
    /// rules: copy `x*` below `s*`, negate at `s* + 1`, zero elsewhere.
    pub fn witness(&self) -> Result<Secret> {
        let n = self.n;
        let mut order: Vec<usize> = (1..=n).collect();
        order.sort_by_key(|&j| (self.candidate_set(j).len(), j));

        let mut images = vec![0u32; n];
        let mut used = vec![false; n + 1];
        let mut cursor = 1usize; // for full sets: smallest unused value
        for j in order {
            let pick = match self.candidate_set(j) {
                CandidateSet::Explicit(set) => set
                    .iter()
                    .copied()
                    .find(|&p| !used[p as usize])
                    .ok_or_else(|| {
                        Error::Infeasible(format!("no remaining candidate for position {j}"))
                    })?,
                CandidateSet::Full(_) => {
                    while cursor <= n && used[cursor] {
                        cursor += 1;
                    }
                    if cursor > n {
                        return Err(Error::Infeasible(format!(
                            "no remaining candidate for position {j}"
                        )));
                    }
                    cursor as u32
                }
            };
            used[pick as usize] = true;
            images[j - 1] = pick;
        }
        let pi = Permutation::from_images(images).expect("greedy assignment is a bijection");

        let mut z = BitString::zeros(n);
        if let Some((xstar, sstar)) = &self.best {
            for j in 1..=(*sstar).min(n) {
                let p = pi.image(j);
                z.set(p, xstar.get(p));
            }
            if *sstar < n {
                let p = pi.image(sstar + 1);
                z.set(p, !xstar.get(p));
            }
        }
        Secret::new(z, pi)
    }

    /// Values `ℓ ∈ V_i` that some consistent secret actually assigns to
    /// `π(i)`: for each `ℓ`, test the reduced family with index `i` and
    /// value `ℓ` removed against the greedy Hall factors.
    pub fn feasible_values(&self, i: usize) -> Result<Vec<u32>> {
        let n = self.n;
        if i < 1 || i > n {
            return Err(Error::Position { pos: i, n });
        }
        let sets: Vec<Vec<u32>> = (1..=n).map(|j| self.candidate_set(j).to_vec()).collect();
        let candidates = &sets[i - 1];
        let mut out = Vec::new();
        'cand: for &ell in candidates {
            let mut min_count = vec![0u32; n + 1];
            let mut empties = 0i64;
            for (j, set) in sets.iter().enumerate() {
                if j + 1 == i {
                    continue;
                }
                let mut size = 0i64;
                let mut contained = 0i64;
                let mut min = None;
                for &p in set {
                    if p == ell {
                        continue;
                    }
                    size += 1;
                    contained += min_count[p as usize] as i64;
                    if min.is_none() {
                        min = Some(p);
                    }
                }
                if size - contained - empties < 1 {
                    continue 'cand;
                }
                match min {
                    Some(m) => min_count[m as usize] += 1,
                    None => empties += 1,
                }
            }
            out.push(ell);
        }
        Ok(out)
    }
}

/// Replay report for a transcript (see [`verify_transcript`]).
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    /// Feasibility after each prefix of the transcript.
    pub feasible_prefixes: Vec<bool>,
    /// Exact number of consistent secrets after the full transcript,
    /// in decimal.
    pub final_count: String,
    /// Whether exactly one secret is consistent.
    pub unique: bool,
    /// When a secret was supplied: whether it reproduces every score.
    pub replay_ok: Option<bool>,
}

/// Replay a transcript through the incremental updates, reporting
/// per-prefix feasibility, the exact final count, uniqueness, and (when a
/// secret is supplied) whether that secret reproduces every score.
pub fn verify_transcript(h: &Transcript, secret: Option<&Secret>) -> Result<VerifyReport> {
    let mut state = KnowledgeState::new(h.n());
    let mut feasible_prefixes = Vec::with_capacity(h.len());
    for e in h.entries() {
        state.update(&e.query, e.score)?;
        feasible_prefixes.push(state.is_feasible());
    }
    let count = state.count_consistent();
    let unique = count == BigUint::from(1u32);
    let replay_ok = match secret {
        None => None,
        Some(sec) => {
            if sec.n() != h.n() {
                Some(false)
            } else {
                let mut ok = true;
                for e in h.entries() {
                    if sec.score(&e.query)? != e.score {
                        ok = false;
                        break;
                    }
                }
                Some(ok)
            }
        }
    };
    Ok(VerifyReport {
        feasible_prefixes,
        final_count: count.to_string(),
        unique,
        replay_ok,
    })
}
