//! Query access for solvers: a scoring source behind a counting,
//! optionally recording handle.

use crate::bits::BitString;
use crate::error::Result;
use crate::secret::Secret;
use crate::transcript::Transcript;

/// Anything that can score queries: an honest oracle holding a secret, or
/// an adaptive adversary making answers up as it goes.
pub trait ScoreSource {
    fn n(&self) -> usize;
    fn score(&mut self, x: &BitString) -> Result<usize>;
}

/// Honest oracle over a fixed secret.
///
/// Keeps the previous query and its disagreement set with `z` in `π`-order
/// as a bitmask; a new query is scored by toggling the mask at the changed
/// positions and scanning for the first set bit. Solvers issue long runs of
/// near-identical queries, so this turns the `O(score)` walk into
/// `O(diff + score/64)` word operations. `Secret::score` stays as the
/// independent reference implementation.
pub struct HonestOracle {
    secret: Secret,
    inv: Vec<u32>,
    last: Option<(BitString, Vec<u64>)>,
}

impl HonestOracle {
    pub fn new(secret: Secret) -> Self {
        let inv = secret.pi().inverse_images();
        HonestOracle {
            secret,
            inv,
            last: None,
        }
    }

    pub fn secret(&self) -> &Secret {
        &self.secret
    }

    fn disagreement_words(&self, x: &BitString) -> Vec<u64> {
        let n = self.secret.n();
        let mut d = vec![0u64; n.div_ceil(64)];
        for p in 1..=n {
            if x.get(p) != self.secret.z().get(p) {
                let j = (self.inv[p - 1] - 1) as usize;
                d[j / 64] |= 1 << (j % 64);
            }
        }
        d
    }
}

impl ScoreSource for HonestOracle {
    fn n(&self) -> usize {
        self.secret.n()
    }

    fn score(&mut self, x: &BitString) -> Result<usize> {
        x.check_len(self.secret.n())?;
        match self.last.take() {
            None => {
                let d = self.disagreement_words(x);
                let s = first_set(&d, self.secret.n());
                self.last = Some((x.clone(), d));
                Ok(s)
            }
            Some((mut prev, mut d)) => {
                for p in prev.diff_positions(x) {
                    let j = (self.inv[p as usize - 1] - 1) as usize;
                    d[j / 64] ^= 1 << (j % 64);
                }
                let s = first_set(&d, self.secret.n());
                prev.clone_from(x);
                self.last = Some((prev, d));
                Ok(s)
            }
        }
    }
}

/// Index of the first set bit, or `n` if none: the prefix score.
fn first_set(d: &[u64], n: usize) -> usize {
    for (w, &word) in d.iter().enumerate() {
        if word != 0 {
            return w * 64 + word.trailing_zeros() as usize;
        }
    }
    n
}

/// Wraps a [`ScoreSource`], counting queries and optionally recording the
/// transcript.
pub struct OracleHandle<S> {
    source: S,
    queries: u64,
    transcript: Option<Transcript>,
}

impl<S: ScoreSource> OracleHandle<S> {
    pub fn new(source: S) -> Self {
        OracleHandle {
            source,
            queries: 0,
            transcript: None,
        }
    }

    pub fn with_recording(source: S) -> Self {
        let n = source.n();
        OracleHandle {
            source,
            queries: 0,
            transcript: Some(Transcript::new(n)),
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.source.n()
    }

    #[inline]
    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn query(&mut self, x: &BitString) -> Result<usize> {
        let s = self.source.score(x)?;
        self.queries += 1;
        if let Some(t) = &mut self.transcript {
            t.push(x.clone(), s)?;
        }
        Ok(s)
    }

    pub fn take_transcript(&mut self) -> Option<Transcript> {
        self.transcript.take()
    }

    pub fn source(&self) -> &S {
        &self.source
    }

    pub fn into_source(self) -> S {
        self.source
    }
}

/// Outcome of a solver run: the reconstructed secret, the number of queries
/// spent, and the transcript when recording was on.
#[derive(Debug)]
pub struct SolveResult {
    pub secret: Secret,
    pub queries: u64,
    pub transcript: Option<Transcript>,
}
