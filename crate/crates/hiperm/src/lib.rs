//! Reconstruction of a hidden (bit string, permutation) pair from prefix
//! scores: knowledge tracking, exact counting, deterministic and
//! randomized solvers, an adaptive lower-bound adversary, and benchmarks.

pub mod adversary;
pub mod bench;
pub mod bits;
pub mod error;
pub mod handle;
pub mod knowledge;
pub mod perm;
pub mod rng;
pub mod secret;
pub mod solver_det;
pub mod solver_rand;
pub mod transcript;

pub use adversary::{forced_queries, AdversaryState};
pub use bench::{
    fmt_sig, run_bench, scaling_table, write_scaling_csv, write_trials_csv, Algo, BenchConfig,
    ScalingRow, SecretDist, TrialRecord,
};
pub use bits::BitString;
pub use error::{Error, Result};
pub use handle::{HonestOracle, OracleHandle, ScoreSource, SolveResult};
pub use knowledge::{verify_transcript, CandidateSet, KnowledgeState, VerifyReport};
pub use perm::Permutation;
pub use rng::RandomSource;
pub use secret::Secret;
pub use solver_det::{bin_search, det_query_bound, solve_det};
pub use solver_rand::{
    rand_bin_search, reduction_step, size_reduction, solve_rand, solve_rand_instrumented,
    LevelConfig, RandStats,
};
pub use transcript::{Entry, Transcript};
