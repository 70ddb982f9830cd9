use clap::{Args, Parser, Subcommand};
use hiperm::{
    forced_queries, run_bench, scaling_table, solve_det, solve_rand, verify_transcript,
    write_scaling_csv, write_trials_csv, Algo, BenchConfig, Error, HonestOracle, KnowledgeState,
    LevelConfig, OracleHandle, RandomSource, Result, Secret, SecretDist, SolveResult, Transcript,
};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hiperm", about = "Hidden permutation reconstruction toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solve against a generated or supplied secret
    Solve(SolveArgs),
    /// Run seeded benchmark trials and write CSV artifacts
    Bench(BenchArgs),
    /// Replay a transcript: feasibility, exact count, optional secret check
    Verify(VerifyArgs),
    /// Exact number of secrets consistent with a transcript
    Count(CountArgs),
    /// Play the deterministic solver against the forcing adversary
    Adversary(AdversaryArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// det or rand
    #[arg(long)]
    algo: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Two-line secret file (bit string, permutation images)
    #[arg(long)]
    secret_file: Option<PathBuf>,
    /// uniform or hard
    #[arg(long, default_value = "uniform")]
    secret_dist: String,
    /// Write the full transcript as JSON Lines
    #[arg(long)]
    transcript_out: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    d: u32,
    /// Fraction of positions left to the deterministic finish (rand only)
    #[arg(long)]
    q_frac: Option<f64>,
}

#[derive(Args)]
struct BenchArgs {
    /// det, rand, or adversary-det
    #[arg(long)]
    algo: String,
    /// Comma-separated instance sizes
    #[arg(long)]
    n_list: String,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    master_seed: u64,
    #[arg(long, default_value = "uniform")]
    secret_dist: String,
    #[arg(long, default_value_t = 4)]
    d: u32,
    #[arg(long)]
    q_frac: Option<f64>,
    /// Worker threads; falls back to HIPERM_JOBS, then all cores
    #[arg(long)]
    jobs: Option<usize>,
    /// Trial CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Scaling table CSV path
    #[arg(long)]
    scaling_out: Option<PathBuf>,
    /// Report wall_ns as 0 so output is byte-stable across machines
    #[arg(long, default_value_t = false)]
    no_wall: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    transcript: PathBuf,
    #[arg(long)]
    secret: Option<PathBuf>,
    /// Instance size, required when the transcript is empty
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct CountArgs {
    #[arg(long)]
    transcript: PathBuf,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct AdversaryArgs {
    #[arg(long)]
    n: usize,
}

fn resolve_jobs(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("HIPERM_JOBS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .filter(|&j| j >= 1)
    .unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|p| p.get())
            .unwrap_or(1)
    })
}

fn cmd_solve(args: SolveArgs) -> Result<bool> {
    let rng = RandomSource::new(args.seed);
    let secret = match &args.secret_file {
        Some(path) => Secret::from_text(&std::fs::read_to_string(path)?)?,
        None => {
            let n = args
                .n
                .ok_or_else(|| Error::Parse("--n required without --secret-file".into()))?;
            let dist: SecretDist = args.secret_dist.parse()?;
            dist.sample(n, &mut rng.split(0))
        }
    };
    let n = secret.n();
    let mut handle = OracleHandle::with_recording(HonestOracle::new(secret.clone()));
    let result: SolveResult = match args.algo.as_str() {
        "det" => solve_det(&mut handle)?,
        "rand" => {
            let cfg = match args.q_frac {
                Some(f) => LevelConfig::with_q_frac(n, args.d, f),
                None => LevelConfig::new(n, args.d),
            };
            solve_rand(&mut handle, &cfg, rng.split(1))?.0
        }
        other => return Err(Error::Parse(format!("unknown algorithm {other:?}"))),
    };
    if let Some(path) = &args.transcript_out {
        let t = result.transcript.as_ref().expect("recording enabled");
        t.write_jsonl(BufWriter::new(File::create(path)?))?;
    }
    println!("queries: {}", result.queries);
    print!("{}", result.secret.to_text());
    Ok(result.secret == secret)
}

fn cmd_bench(args: BenchArgs) -> Result<bool> {
    let ns = args
        .n_list
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("invalid instance size {tok:?}")))
        })
        .collect::<Result<Vec<usize>>>()?;
    if ns.is_empty() {
        return Err(Error::Parse("--n-list must not be empty".into()));
    }
    let cfg = BenchConfig {
        ns,
        algo: args.algo.parse::<Algo>()?,
        trials: args.trials,
        master_seed: args.master_seed,
        dist: args.secret_dist.parse()?,
        d: args.d,
        q_frac: args.q_frac,
        jobs: resolve_jobs(args.jobs),
        record_wall: !args.no_wall,
    };
    let records = run_bench(&cfg)?;
    match &args.out {
        Some(path) => write_trials_csv(&records, BufWriter::new(File::create(path)?))?,
        None => write_trials_csv(&records, std::io::stdout().lock())?,
    }
    if let Some(path) = &args.scaling_out {
        let rows = scaling_table(&records);
        write_scaling_csv(&rows, BufWriter::new(File::create(path)?))?;
    }
    Ok(records.iter().all(|r| r.success))
}

fn read_transcript(path: &PathBuf, n: Option<usize>) -> Result<Transcript> {
    Transcript::read_jsonl(BufReader::new(File::open(path)?), n)
}

fn cmd_verify(args: VerifyArgs) -> Result<bool> {
    let transcript = read_transcript(&args.transcript, args.n)?;
    let secret = match &args.secret {
        Some(path) => Some(Secret::from_text(&std::fs::read_to_string(path)?)?),
        None => None,
    };
    let report = verify_transcript(&transcript, secret.as_ref())?;
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &report)
        .map_err(|e| Error::Parse(format!("report encode: {e}")))?;
    writeln!(out)?;
    Ok(report.feasible_prefixes.iter().all(|&b| b) && report.replay_ok != Some(false))
}

fn cmd_count(args: CountArgs) -> Result<bool> {
    let transcript = read_transcript(&args.transcript, args.n)?;
    let mut state = KnowledgeState::new(transcript.n());
    for e in transcript.entries() {
        state.update(&e.query, e.score)?;
    }
    println!("{}", state.count_consistent());
    Ok(true)
}

fn cmd_adversary(args: AdversaryArgs) -> Result<bool> {
    let n = args.n;
    let mut committed: Option<Secret> = None;
    let forced = forced_queries(n, |handle| {
        let res = solve_det(handle)?;
        committed = handle.source().committed_secret().cloned();
        Ok(res)
    })?;
    println!("forced queries: {forced}");
    match committed {
        Some(secret) => {
            print!("{}", secret.to_text());
            Ok(true)
        }
        None => Ok(false),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Count(args) => cmd_count(args),
        Command::Adversary(args) => cmd_adversary(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse(_)
                | Error::Io(_)
                | Error::Dimension { .. }
                | Error::Position { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
