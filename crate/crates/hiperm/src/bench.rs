//! Seeded benchmark trials and aggregation.
//!
//! Every trial derives its randomness by splitting the master seed with the
//! trial's global index, so results are a pure function of (master seed,
//! flags) and independent of how many worker threads run the trials.

use crate::adversary::AdversaryState;
use crate::error::{Error, Result};
use crate::handle::{HonestOracle, OracleHandle};
use crate::rng::RandomSource;
use crate::secret::Secret;
use crate::solver_det::solve_det;
use crate::solver_rand::{solve_rand, LevelConfig};
use rayon::prelude::*;
use std::io::Write;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Det,
    Rand,
    AdversaryDet,
}

impl Algo {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algo::Det => "det",
            Algo::Rand => "rand",
            Algo::AdversaryDet => "adversary-det",
        }
    }
}

impl std::str::FromStr for Algo {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "det" => Ok(Algo::Det),
            "rand" => Ok(Algo::Rand),
            "adversary-det" => Ok(Algo::AdversaryDet),
            other => Err(Error::Parse(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecretDist {
    Uniform,
    Hard,
}

impl std::str::FromStr for SecretDist {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(SecretDist::Uniform),
            "hard" => Ok(SecretDist::Hard),
            other => Err(Error::Parse(format!("unknown distribution {other:?}"))),
        }
    }
}

impl SecretDist {
    pub fn sample(&self, n: usize, rng: &mut RandomSource) -> Secret {
        match self {
            SecretDist::Uniform => Secret::gen_uniform(n, rng),
            SecretDist::Hard => Secret::gen_hard(n, rng),
        }
    }
}

/// One benchmark run of one solver on one instance.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub n: usize,
    pub algo: Algo,
    pub seed: u64,
    pub queries: u64,
    pub wall_ns: u64,
    pub success: bool,
    pub d: u32,
    pub q_frac: f64,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub ns: Vec<usize>,
    pub algo: Algo,
    pub trials: usize,
    pub master_seed: u64,
    pub dist: SecretDist,
    pub d: u32,
    pub q_frac: Option<f64>,
    pub jobs: usize,
    /// When false, `wall_ns` is reported as 0 so CSV output is byte-stable.
    pub record_wall: bool,
}

fn run_trial(cfg: &BenchConfig, n: usize, global_index: u64) -> TrialRecord {
    let trial_rng = RandomSource::new(cfg.master_seed).split(global_index);
    let seed = trial_rng.seed();
    let mut secret_rng = trial_rng.split(0);
    let solver_rng = trial_rng.split(1);
    let start = Instant::now();
    let (queries, success) = match cfg.algo {
        Algo::Det => {
            let secret = cfg.dist.sample(n, &mut secret_rng);
            let mut handle = OracleHandle::new(HonestOracle::new(secret.clone()));
            match solve_det(&mut handle) {
                Ok(res) => (res.queries, res.secret == secret),
                Err(_) => (handle.queries(), false),
            }
        }
        Algo::Rand => {
            let secret = cfg.dist.sample(n, &mut secret_rng);
            let level_cfg = match cfg.q_frac {
                Some(f) => LevelConfig::with_q_frac(n, cfg.d, f),
                None => LevelConfig::new(n, cfg.d),
            };
            let mut handle = OracleHandle::new(HonestOracle::new(secret.clone()));
            match solve_rand(&mut handle, &level_cfg, solver_rng) {
                Ok((res, _)) => (res.queries, res.secret == secret),
                Err(_) => (handle.queries(), false),
            }
        }
        Algo::AdversaryDet => {
            let mut handle = OracleHandle::new(AdversaryState::new(n));
            match solve_det(&mut handle) {
                Ok(res) => {
                    let adv = handle.source();
                    let forced = adv.queries_to_half().unwrap_or(handle.queries());
                    let success = adv
                        .committed_secret()
                        .map(|c| *c == res.secret)
                        .unwrap_or(false);
                    (forced, success)
                }
                Err(_) => (handle.queries(), false),
            }
        }
    };
    let wall_ns = if cfg.record_wall {
        start.elapsed().as_nanos() as u64
    } else {
        0
    };
    let q_frac = match cfg.algo {
        Algo::Rand => cfg
            .q_frac
            .unwrap_or_else(|| LevelConfig::new(n, cfg.d).q_frac),
        _ => 0.0,
    };
    TrialRecord {
        n,
        algo: cfg.algo,
        seed,
        queries,
        wall_ns,
        success,
        d: cfg.d,
        q_frac,
    }
}

/// Run all trials of the given configuration, parallel over trials.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<TrialRecord>> {
    let mut work = Vec::new();
    let mut global = 0u64;
    for &n in &cfg.ns {
        for _ in 0..cfg.trials {
            work.push((n, global));
            global += 1;
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Parse(format!("thread pool: {e}")))?;
    let records = pool.install(|| {
        work.par_iter()
            .map(|&(n, g)| run_trial(cfg, n, g))
            .collect()
    });
    Ok(records)
}

/// Format with 6 significant digits (fixed notation).
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    let decimals = (5 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

/// Write trial records as CSV with the fixed schema.
pub fn write_trials_csv<W: Write>(records: &[TrialRecord], mut w: W) -> Result<()> {
    writeln!(w, "n,algo,seed,queries,wall_ns,success,d,q_frac")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.n,
            r.algo.as_str(),
            r.seed,
            r.queries,
            r.wall_ns,
            r.success,
            r.d,
            fmt_sig(r.q_frac)
        )?;
    }
    Ok(())
}

/// Aggregated view of the trial records, one row per (n, algo) group, with
/// the query means normalized by `n·log₂n` and `n·log₂log₂n`.
#[derive(Debug, Clone)]
pub struct ScalingRow {
    pub n: usize,
    pub algo: Algo,
    pub trials: usize,
    pub mean_queries: f64,
    pub stddev: f64,
    pub per_nlogn: f64,
    pub per_nloglogn: f64,
}

pub fn scaling_table(records: &[TrialRecord]) -> Vec<ScalingRow> {
    let mut groups: Vec<(usize, Algo)> = Vec::new();
    for r in records {
        if !groups.contains(&(r.n, r.algo)) {
            groups.push((r.n, r.algo));
        }
    }
    groups
        .into_iter()
        .map(|(n, algo)| {
            let qs: Vec<u64> = records
                .iter()
                .filter(|r| r.n == n && r.algo == algo)
                .map(|r| r.queries)
                .collect();
            let trials = qs.len();
            let sum: u64 = qs.iter().sum();
            let mean = sum as f64 / trials as f64;
            let var = qs.iter().map(|&q| (q as f64 - mean).powi(2)).sum::<f64>()
                / (trials.max(2) - 1) as f64;
            let logn = (n as f64).log2();
            let loglogn = logn.log2();
            ScalingRow {
                n,
                algo,
                trials,
                mean_queries: mean,
                stddev: var.sqrt(),
                per_nlogn: mean / (n as f64 * logn),
                per_nloglogn: if loglogn > 0.0 {
                    mean / (n as f64 * loglogn)
                } else {
                    0.0
                },
            }
        })
        .collect()
}

pub fn write_scaling_csv<W: Write>(rows: &[ScalingRow], mut w: W) -> Result<()> {
    writeln!(
        w,
        "n,algo,trials,mean_queries,stddev,per_nlogn,per_nloglogn"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.n,
            r.algo.as_str(),
            r.trials,
            fmt_sig(r.mean_queries),
            fmt_sig(r.stddev),
            fmt_sig(r.per_nlogn),
            fmt_sig(r.per_nloglogn)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_cfg() -> BenchConfig {
        BenchConfig {
            ns: vec![16, 32],
            algo: Algo::Det,
            trials: 4,
            master_seed: 7,
            dist: SecretDist::Uniform,
            d: 2,
            q_frac: None,
            jobs: 2,
            record_wall: false,
        }
    }

    #[test]
    fn jobs_do_not_change_output() {
        let mut cfg = base_cfg();
        let a = run_bench(&cfg).unwrap();
        cfg.jobs = 8;
        let b = run_bench(&cfg).unwrap();
        let mut ca = Vec::new();
        let mut cb = Vec::new();
        write_trials_csv(&a, &mut ca).unwrap();
        write_trials_csv(&b, &mut cb).unwrap();
        assert_eq!(ca, cb);
        assert!(a.iter().all(|r| r.success));
    }

    #[test]
    fn all_algos_run() {
        for algo in [Algo::Det, Algo::Rand, Algo::AdversaryDet] {
            let cfg = BenchConfig { algo, ..base_cfg() };
            let recs = run_bench(&cfg).unwrap();
            assert_eq!(recs.len(), 8);
            assert!(recs.iter().all(|r| r.success), "{algo:?}");
        }
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(0.125), "0.125000");
        assert_eq!(fmt_sig(1234567.0), "1234567");
        assert_eq!(fmt_sig(3.0), "3.00000");
    }

    #[test]
    fn scaling_rows_group_by_n() {
        let cfg = base_cfg();
        let recs = run_bench(&cfg).unwrap();
        let rows = scaling_table(&recs);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].trials, 4);
        assert!(rows[0].mean_queries > 0.0);
    }
}
