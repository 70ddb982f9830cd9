//! Adaptive adversary forcing `Ω(n log n)` queries from any deterministic
//! solver.
//!
//! The adversary commits to nothing initially. It reveals the permutation
//! two positions per "block": the first query of a block is scored one
//! past the committed prefix, and every later query is scored so that the
//! live candidate set for the next position keeps its larger half. A block
//! therefore survives about `log₂ n` queries before the adversary must pin
//! the two positions down and move on. Once half the positions are
//! committed the adversary completes a consistent secret and degrades to an
//! honest oracle so the game can finish and be replayed.

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::handle::{OracleHandle, ScoreSource, SolveResult};
use crate::knowledge::KnowledgeState;
use crate::secret::Secret;

pub struct AdversaryState {
    n: usize,
    /// Committed `(position, bit)` pairs for `π(1)..π(prefix)`.
    committed: Vec<(u32, bool)>,
    committed_mask: Vec<bool>,
    /// Current block, if one is open: its first query plus the live
    /// candidate sets for the next two positions (`v1 ⊆ v2` throughout).
    block: Option<Block>,
    /// Everything answered so far, as a feasibility check and as the source
    /// of the final witness secret.
    knowledge: KnowledgeState,
    finalized: Option<Secret>,
    /// Set when a resolution completes the commitment; the witness is only
    /// taken after the triggering answer has been folded into `knowledge`.
    pending_finalize: bool,
    answered: u64,
    cap: u64,
    max_score: usize,
    queries_to_half: Option<u64>,
}

struct Block {
    xstar: BitString,
    v1: Vec<u32>,
    v2: Vec<u32>,
}

impl AdversaryState {
    pub fn new(n: usize) -> Self {
        let log = if n <= 1 {
            1
        } else {
            (usize::BITS - (n - 1).leading_zeros()) as u64
        };
        AdversaryState {
            n,
            committed: Vec::new(),
            committed_mask: vec![false; n + 1],
            block: None,
            knowledge: KnowledgeState::new(n),
            finalized: None,
            pending_finalize: false,
            answered: 0,
            cap: 10 * n as u64 * log * log,
            max_score: 0,
            queries_to_half: None,
        }
    }

    /// Largest score answered so far.
    pub fn max_score(&self) -> usize {
        self.max_score
    }

    /// Queries consumed when a score of at least `n/2` was first answered.
    pub fn queries_to_half(&self) -> Option<u64> {
        self.queries_to_half
    }

    /// The completed secret, once the adversary has committed fully.
    pub fn committed_secret(&self) -> Option<&Secret> {
        self.finalized.as_ref()
    }

    pub fn knowledge(&self) -> &KnowledgeState {
        &self.knowledge
    }

    fn universe(&self) -> Vec<u32> {
        (1..=self.n as u32)
            .filter(|&p| !self.committed_mask[p as usize])
            .collect()
    }

    /// Complete the commitment with any secret consistent with the history
    /// and answer honestly from here on.
    fn finalize(&mut self) -> Result<()> {
        self.finalized = Some(self.knowledge.witness()?);
        self.block = None;
        Ok(())
    }

    /// Score of `x` along the committed prefix alone: index of the first
    /// committed position where `x` deviates, or `prefix` if none.
    fn committed_score(&self, x: &BitString) -> usize {
        for (j, &(p, bit)) in self.committed.iter().enumerate() {
            if x.get(p as usize) != bit {
                return j;
            }
        }
        self.committed.len()
    }

    fn resolve_block(&mut self) -> Result<()> {
        let block = self.block.take().expect("open block");
        let i1 = *block.v1.iter().min().expect("v1 non-empty");
        let i2 = *block
            .v2
            .iter()
            .filter(|&&p| p != i1)
            .min()
            .ok_or_else(|| Error::Inconsistent("block has no second candidate".into()))?;
        self.committed.push((i1, block.xstar.get(i1 as usize)));
        self.committed.push((i2, !block.xstar.get(i2 as usize)));
        self.committed_mask[i1 as usize] = true;
        self.committed_mask[i2 as usize] = true;
        if 2 * self.committed.len() >= self.n {
            self.pending_finalize = true;
        }
        Ok(())
    }

    fn answer(&mut self, x: &BitString) -> Result<usize> {
        if let Some(secret) = &self.finalized {
            return secret.score(x);
        }
        let prefix = self.committed.len();
        let committed = self.committed_score(x);
        if committed < prefix {
            // deviates inside the committed prefix: that score is already
            // determined, and no block set is affected
            return Ok(committed);
        }
        match &mut self.block {
            None => {
                let universe = self.universe();
                if universe.len() < 2 {
                    self.finalize()?;
                    return self.finalized.as_ref().unwrap().score(x);
                }
                self.block = Some(Block {
                    xstar: x.clone(),
                    v1: universe.clone(),
                    v2: universe,
                });
                if self.block.as_ref().unwrap().v1.len() <= 2 {
                    self.resolve_block()?;
                }
                Ok(prefix + 1)
            }
            Some(block) => {
                let agrees = |p: &u32| x.get(*p as usize) == block.xstar.get(*p as usize);
                let keep: usize = block.v1.iter().filter(|p| agrees(p)).count();
                let drop = block.v1.len() - keep;
                let relative = if keep > drop {
                    // score one: both live sets intersect with the
                    // agreement set
                    block.v1.retain(agrees);
                    block.v2.retain(agrees);
                    1
                } else {
                    // score zero: only the next set loses the agreements
                    block.v1.retain(|p| !agrees(p));
                    0
                };
                if block.v1.len() <= 2 {
                    self.resolve_block()?;
                }
                Ok(prefix + relative)
            }
        }
    }
}

impl ScoreSource for AdversaryState {
    fn n(&self) -> usize {
        self.n
    }

    fn score(&mut self, x: &BitString) -> Result<usize> {
        x.check_len(self.n)?;
        if self.answered >= self.cap {
            return Err(Error::Runaway(format!(
                "adversary answered {} queries without the game ending",
                self.answered
            )));
        }
        let s = self.answer(x)?;
        self.answered += 1;
        self.knowledge.update(x, s)?;
        if self.pending_finalize {
            self.pending_finalize = false;
            self.finalize()?;
        }
        debug_assert!(
            self.knowledge.is_feasible(),
            "adversary answered itself infeasible"
        );
        self.max_score = self.max_score.max(s);
        if self.queries_to_half.is_none() && 2 * s >= self.n {
            self.queries_to_half = Some(self.answered);
        }
        Ok(s)
    }
}

/// Run a deterministic solver against the adversary and report how many
/// queries it took to first receive a score of `n/2` (total queries if the
/// solver finished without ever reaching it).
pub fn forced_queries<F>(n: usize, solver: F) -> Result<u64>
where
    F: FnOnce(&mut OracleHandle<AdversaryState>) -> Result<SolveResult>,
{
    let mut handle = OracleHandle::new(AdversaryState::new(n));
    solver(&mut handle)?;
    let total = handle.queries();
    Ok(handle.source().queries_to_half().unwrap_or(total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::verify_transcript;
    use crate::solver_det::solve_det;

    #[test]
    fn first_query_scores_one() {
        let mut adv = AdversaryState::new(8);
        let s = adv.score(&BitString::zeros(8)).unwrap();
        assert_eq!(s, 1);
    }

    #[test]
    fn larger_half_is_kept() {
        let mut adv = AdversaryState::new(8);
        adv.score(&BitString::zeros(8)).unwrap();
        // agrees with x* on positions 4..8 (5 of 8): keep the agreeing side
        let x = BitString::from_str01("11100000").unwrap();
        let s = adv.score(&x).unwrap();
        assert_eq!(s, 1);
        let block = adv.block.as_ref().unwrap();
        assert_eq!(block.v1, vec![4, 5, 6, 7, 8]);
    }

    #[test]
    fn full_game_replays() {
        for n in [4, 16, 64] {
            let mut handle = OracleHandle::with_recording(AdversaryState::new(n));
            let out = solve_det(&mut handle).unwrap();
            let t = out.transcript.unwrap();
            let committed = handle.source().committed_secret().unwrap().clone();
            let report = verify_transcript(&t, Some(&committed)).unwrap();
            assert_eq!(report.replay_ok, Some(true), "n={n}");
            assert!(report.feasible_prefixes.iter().all(|&b| b), "n={n}");
            assert_eq!(out.secret, committed, "n={n}");
        }
    }

    #[test]
    fn forces_superlinear_queries() {
        let f256 = forced_queries(256, solve_det).unwrap();
        let f1024 = forced_queries(1024, solve_det).unwrap();
        assert!(f256 as f64 >= 0.2 * 256.0 * 8.0, "forced(256) = {f256}");
        assert!(f1024 as f64 / f256 as f64 > 4.0, "{f1024}/{f256}");
    }
}
