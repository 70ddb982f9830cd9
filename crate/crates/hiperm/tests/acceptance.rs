//! Release gate: one test per acceptance criterion, each printing a
//! single PASS/FAIL line (visible under `--nocapture`).

mod common;

use common::*;
use hiperm::*;
use num_bigint::BigUint;

fn report(num: u32, name: &str, failures: Vec<String>) {
    let verdict = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!("criterion {num} ({name}): {verdict}");
    assert!(failures.is_empty(), "criterion {num}: {failures:?}");
}

fn bench(
    algo: Algo,
    ns: &[usize],
    trials: usize,
    seed: u64,
    dist: SecretDist,
    d: u32,
) -> Vec<TrialRecord> {
    run_bench(&BenchConfig {
        ns: ns.to_vec(),
        algo,
        trials,
        master_seed: seed,
        dist,
        d,
        q_frac: None,
        jobs: 1,
        record_wall: false,
    })
    .unwrap()
}

fn mean_queries(records: &[TrialRecord], n: usize) -> f64 {
    let rs: Vec<&TrialRecord> = records.iter().filter(|r| r.n == n).collect();
    rs.iter().map(|r| r.queries as f64).sum::<f64>() / rs.len() as f64
}

#[test]
fn criterion_1_exact_recovery() {
    let ns = [16usize, 64, 256, 1024];
    let mut failures = Vec::new();
    for algo in [Algo::Det, Algo::Rand] {
        for dist in [SecretDist::Uniform, SecretDist::Hard] {
            let records = bench(algo, &ns, 500, 0xACC1, dist, 4);
            for r in &records {
                if !r.success {
                    failures.push(format!(
                        "{} failed on {dist:?} secret, n={}, seed={}",
                        r.algo.as_str(),
                        r.n,
                        r.seed
                    ));
                }
            }
        }
    }
    report(1, "exact recovery", failures);
}

#[test]
fn criterion_2_deterministic_bound() {
    let ns = [256usize, 1024, 4096];
    let records = bench(Algo::Det, &ns, 50, 0xACC2, SecretDist::Uniform, 4);
    let mut failures = Vec::new();
    for r in &records {
        let n = r.n;
        let hard = (n * (n.ilog2() as usize + 2) + 2) as u64;
        if r.queries > hard {
            failures.push(format!(
                "n={n} seed={} queries {} > {hard}",
                r.seed, r.queries
            ));
        }
    }
    let ratios: Vec<f64> = ns
        .iter()
        .map(|&n| mean_queries(&records, n) / (n as f64 * (n as f64).log2()))
        .collect();
    let (lo, hi) = (
        ratios.iter().cloned().fold(f64::INFINITY, f64::min),
        ratios.iter().cloned().fold(0.0, f64::max),
    );
    if (hi - lo) / lo >= 0.20 {
        failures.push(format!("mean/(n log n) spread too wide: {ratios:?}"));
    }
    report(2, "deterministic n log n bound", failures);
}

#[test]
fn criterion_3_randomized_advantage() {
    let ns = [4096usize, 16384];
    let det = bench(Algo::Det, &ns, 50, 0xACC3, SecretDist::Uniform, 2);
    let rand = bench(Algo::Rand, &ns, 50, 0xACC3, SecretDist::Uniform, 2);
    let mut failures = Vec::new();
    for &n in &ns {
        let (md, mr) = (mean_queries(&det, n), mean_queries(&rand, n));
        if mr >= md {
            failures.push(format!(
                "n={n}: rand mean {mr:.0} not below det mean {md:.0}"
            ));
        }
    }
    let ratio = |n: usize| mean_queries(&rand, n) / (n as f64 * (n as f64).log2().log2());
    let (r0, r1) = (ratio(4096), ratio(16384));
    if r1 > 1.10 * r0 {
        failures.push(format!("mean/(n log log n) grew: {r0:.3} -> {r1:.3}"));
    }
    report(3, "randomized advantage", failures);
}

#[test]
fn criterion_4_knowledge_oracle_equivalence() {
    let mut rng = RandomSource::new(0xACC4);
    let mut failures = Vec::new();
    for n in [3usize, 4, 5] {
        for _ in 0..200 {
            let len = rng.gen_range(7);
            let h = random_history(n, len, &mut rng);
            let mut st = KnowledgeState::new(n);
            for e in h.entries() {
                st.update(&e.query, e.score).unwrap();
            }
            let secrets = consistent_secrets(&h);
            if st.is_feasible() != !secrets.is_empty() {
                failures.push(format!("is_feasible mismatch, n={n} history={h:?}"));
            }
            if st.count_consistent() != BigUint::from(secrets.len()) {
                failures.push(format!("count mismatch, n={n} history={h:?}"));
            }
            for i in 1..=n {
                let mut truth: Vec<u32> =
                    secrets.iter().map(|sec| sec.pi().image(i) as u32).collect();
                truth.sort_unstable();
                truth.dedup();
                if st.feasible_values(i).unwrap() != truth {
                    failures.push(format!("feasible_values mismatch, n={n} i={i}"));
                }
            }
            if st.is_feasible() {
                let w = st.witness().unwrap();
                for e in h.entries() {
                    if w.score(&e.query).unwrap() != e.score {
                        failures.push(format!("witness does not replay, n={n} history={h:?}"));
                    }
                }
            }
            if failures.len() > 5 {
                break;
            }
        }
    }
    report(4, "knowledge oracle equivalence", failures);
}

#[test]
fn criterion_5_rand_bin_search() {
    let n = 16usize;
    let mut rng = RandomSource::new(0xACC5);
    let secret = Secret::gen_uniform(n, &mut rng);
    let mut x = secret.z().clone();
    x.flip(secret.pi().image(1));
    let p1 = secret.pi().image(1) as u32;
    let mut failures = Vec::new();

    // exact halving counts for power-of-two sizes
    for v_size in [2usize, 4, 8, 16] {
        for target in (0..).map(|e| 1usize << e).take_while(|&t| t <= v_size) {
            let mut v = vec![p1];
            for p in 1..=n as u32 {
                if p != p1 && v.len() < v_size {
                    v.push(p);
                }
            }
            let mut handle = OracleHandle::new(HonestOracle::new(secret.clone()));
            let out = rand_bin_search(&mut handle, &x, 1, v, target, &mut rng).unwrap();
            let want = (v_size.ilog2() - target.ilog2()) as u64;
            if handle.queries() != want {
                failures.push(format!(
                    "v={v_size} target={target}: {} queries, expected {want}",
                    handle.queries()
                ));
            }
            if out.len() > target || !out.contains(&p1) {
                failures.push(format!(
                    "v={v_size} target={target}: bad survivor set {out:?}"
                ));
            }
        }
    }

    // uniformity of the surviving set at v=16, target=4
    let runs = 20000usize;
    let mut counts = vec![0u32; n + 1];
    for seed in 0..runs as u64 {
        let v: Vec<u32> = (1..=n as u32).collect();
        let mut handle = OracleHandle::new(HonestOracle::new(secret.clone()));
        let out = rand_bin_search(&mut handle, &x, 1, v, 4, &mut RandomSource::new(seed)).unwrap();
        if out.len() != 4 || !out.contains(&p1) {
            failures.push(format!("seed {seed}: bad survivor set {out:?}"));
        }
        for &p in &out {
            counts[p as usize] += 1;
        }
    }
    let p = 3.0 / 15.0;
    let sigma = (runs as f64 * p * (1.0 - p)).sqrt();
    for q in 1..=n as u32 {
        if q == p1 {
            continue;
        }
        let dev = (counts[q as usize] as f64 - runs as f64 * p).abs();
        if dev > 3.0 * sigma {
            failures.push(format!(
                "element {q} appeared {} times, expected {:.0} ± {:.0}",
                counts[q as usize],
                runs as f64 * p,
                3.0 * sigma
            ));
        }
    }
    report(5, "rand_bin_search query count and uniformity", failures);
}

#[test]
fn criterion_6_reduction_step_linearity() {
    let n = 1024usize;
    let (m, set_size) = (3usize, 24usize);
    let mut rng = RandomSource::new(0xACC6);
    let mut failures = Vec::new();
    let mut means = Vec::new();
    for k in [8usize, 16, 32] {
        let mut total = 0u64;
        for _ in 0..100 {
            let secret = Secret::gen_uniform(n, &mut rng);
            // pool of decoy positions, excluding π(1..k+1)
            let mut pool: Vec<u32> = (1..=n as u32)
                .filter(|&p| (1..=k + 1).all(|j| secret.pi().image(j) as u32 != p))
                .collect();
            rng.shuffle(&mut pool);
            let mut sets = Vec::with_capacity(k);
            let mut blocked = BitString::zeros(n);
            for j in 1..=k {
                let mut v = vec![secret.pi().image(j) as u32];
                v.extend(pool.drain(..set_size - 1));
                for &p in &v {
                    blocked.set(p as usize, true);
                }
                sets.push(v);
            }
            let mut x = secret.z().clone();
            x.flip(secret.pi().image(k + 1));
            let j_all: Vec<usize> = (1..=k).collect();
            let mut handle = OracleHandle::new(HonestOracle::new(secret.clone()));
            reduction_step(
                &mut handle,
                &x,
                &mut sets,
                &mut blocked,
                k,
                &j_all,
                m,
                1,
                &mut rng,
                Some(&secret),
            )
            .unwrap();
            for j in 1..=k {
                if sets[j - 1].len() > m {
                    failures.push(format!("k={k}: |V_{j}| = {} > {m}", sets[j - 1].len()));
                }
                if !sets[j - 1].contains(&(secret.pi().image(j) as u32)) {
                    failures.push(format!("k={k}: π({j}) lost"));
                }
            }
            total += handle.queries();
        }
        means.push(total as f64 / 100.0 / k as f64);
    }
    let (lo, hi) = (
        means.iter().cloned().fold(f64::INFINITY, f64::min),
        means.iter().cloned().fold(0.0, f64::max),
    );
    if hi > 2.0 * lo {
        failures.push(format!("queries/k not within factor 2: {means:?}"));
    }
    report(6, "reduction_step linearity", failures);
}

#[test]
#[ignore = "slow suite: ~20 CPU-minutes at n = 65536"]
fn criterion_7_failure_rates() {
    let n = 65536usize;
    let cfg = LevelConfig::new(n, 4);
    let t = cfg.t();
    let mut calls = vec![0u64; t];
    let mut fails = vec![0u64; t];
    let mut failures = Vec::new();
    for seed in 0..20u64 {
        let mut rng = RandomSource::new(0xACC7 + seed);
        let secret = Secret::gen_uniform(n, &mut rng);
        let mut handle = OracleHandle::new(HonestOracle::new(secret.clone()));
        let (out, stats) =
            solve_rand_instrumented(&mut handle, &cfg, rng.split(1), &secret).unwrap();
        if out.secret != secret {
            failures.push(format!("seed {seed}: wrong secret"));
        }
        for l in 0..t {
            calls[l] += stats.advance_calls[l];
            fails[l] += stats.failures[l];
        }
    }
    for l in 0..t {
        if calls[l] == 0 {
            continue;
        }
        let alpha = cfg.alphas[l] as f64;
        let p0 = (n as f64 / (n - cfg.q) as f64 / (alpha.powi(cfg.d as i32 - 1) - 1.0)).min(1.0);
        let bound = p0 + 3.0 * (p0 * (1.0 - p0) / calls[l] as f64).sqrt();
        let freq = fails[l] as f64 / calls[l] as f64;
        if freq > bound {
            failures.push(format!(
                "level {}: failure frequency {freq:.5} > {bound:.5} ({} / {})",
                l + 1,
                fails[l],
                calls[l]
            ));
        }
    }
    report(7, "advance failure rates", failures);
}

#[test]
fn criterion_8_adversary_forcing() {
    let mut failures = Vec::new();
    let mut forced = Vec::new();
    for n in [256usize, 1024] {
        let mut handle = OracleHandle::with_recording(AdversaryState::new(n));
        let out = solve_det(&mut handle).unwrap();
        let f = handle.source().queries_to_half().unwrap_or(out.queries);
        let floor = 0.2 * n as f64 * (n as f64).log2();
        if (f as f64) < floor {
            failures.push(format!("n={n}: forced {f} < {floor:.0}"));
        }
        let committed = handle.source().committed_secret().unwrap().clone();
        if committed != out.secret {
            failures.push(format!(
                "n={n}: solver did not recover the committed secret"
            ));
        }
        for e in out.transcript.as_ref().unwrap().entries() {
            if committed.score(&e.query).unwrap() != e.score {
                failures.push(format!("n={n}: committed secret does not replay"));
                break;
            }
        }
        forced.push(f as f64);
    }
    if forced[1] / forced[0] <= 4.0 {
        failures.push(format!(
            "forced(1024)/forced(256) = {:.2} not above 4",
            forced[1] / forced[0]
        ));
    }
    report(8, "adversary forcing", failures);
}

#[test]
fn criterion_9_invariants_and_determinism() {
    let mut failures = Vec::new();
    // instrumented invariant checkpoints (the solver panics on violation)
    for n in [64usize, 256] {
        let cfg = LevelConfig::new(n, 4);
        for seed in 0..100u64 {
            let mut rng = RandomSource::new(0xACC9 + seed);
            let secret = Secret::gen_uniform(n, &mut rng);
            let mut handle = OracleHandle::new(HonestOracle::new(secret.clone()));
            let (out, _) =
                solve_rand_instrumented(&mut handle, &cfg, rng.split(1), &secret).unwrap();
            if out.secret != secret {
                failures.push(format!("n={n} seed={seed}: wrong secret"));
            }
        }
    }
    // byte-identical CSV independent of the parallelism degree
    let mut csvs = Vec::new();
    for jobs in [1usize, 8] {
        let records = run_bench(&BenchConfig {
            ns: vec![32, 64],
            algo: Algo::Rand,
            trials: 10,
            master_seed: 0xACC9,
            dist: SecretDist::Uniform,
            d: 2,
            q_frac: None,
            jobs,
            record_wall: false,
        })
        .unwrap();
        let mut buf = Vec::new();
        write_trials_csv(&records, &mut buf).unwrap();
        csvs.push(buf);
    }
    if csvs[0] != csvs[1] {
        failures.push("CSV differs between --jobs 1 and --jobs 8".into());
    }
    report(9, "instrumented invariants and determinism", failures);
}
