//! Guessing histories: ordered `(query, score)` pairs, with JSON Lines I/O.

use crate::bits::BitString;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// One recorded query and the score it received.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub query: BitString,
    pub score: usize,
}

/// The guessing history `H = (x^i, s^i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    n: usize,
    entries: Vec<Entry>,
}

#[derive(Serialize, Deserialize)]
struct Line {
    q: String,
    s: usize,
}

impl Transcript {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        Transcript {
            n,
            entries: Vec::new(),
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn push(&mut self, query: BitString, score: usize) -> Result<()> {
        query.check_len(self.n)?;
        if score > self.n {
            return Err(Error::Parse(format!(
                "score {score} out of range 0..={}",
                self.n
            )));
        }
        self.entries.push(Entry { query, score });
        Ok(())
    }

    /// Write as JSON Lines: one `{"q": "...", "s": k}` object per query.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for e in &self.entries {
            let line = Line {
                q: e.query.to_str01(),
                s: e.score,
            };
            serde_json::to_writer(&mut w, &line)
                .map_err(|e| Error::Parse(format!("transcript encode: {e}")))?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Read JSON Lines. `expect_n` pins the instance size for empty files
    /// and is validated against every entry when given.
    pub fn read_jsonl<R: BufRead>(r: R, expect_n: Option<usize>) -> Result<Self> {
        let mut entries = Vec::new();
        let mut n = expect_n;
        for (idx, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Line = serde_json::from_str(&line)
                .map_err(|e| Error::Parse(format!("transcript line {}: {e}", idx + 1)))?;
            let q = BitString::from_str01(&parsed.q)
                .map_err(|e| Error::Parse(format!("transcript line {}: {e}", idx + 1)))?;
            match n {
                None => n = Some(q.len()),
                Some(expected) if q.len() != expected => {
                    return Err(Error::Parse(format!(
                        "transcript line {}: query length {} does not match n={expected}",
                        idx + 1,
                        q.len()
                    )))
                }
                _ => {}
            }
            if parsed.s > q.len() {
                return Err(Error::Parse(format!(
                    "transcript line {}: score {} out of range",
                    idx + 1,
                    parsed.s
                )));
            }
            entries.push(Entry {
                query: q,
                score: parsed.s,
            });
        }
        let n = n.ok_or_else(|| {
            Error::Parse("empty transcript requires an explicit instance size".into())
        })?;
        Ok(Transcript { n, entries })
    }
}
