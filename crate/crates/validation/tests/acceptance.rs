//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! values behind each verdict. Exits non-zero when any criterion fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vlftbc_cli::{simulate_cmd, SimulateArgs};
use vlftbc_core::bounds::{exact_if_degraded, linear_grid, lower_bound, upper_bound};
use vlftbc_core::info::{compute_bj, compute_c, compute_cj, compute_tj, min_mutual_information};
use vlftbc_core::oracle::{random_instances, run_suite, SLACK};
use vlftbc_core::ordering::{classify, OrderingReport, Verdict};
use vlftbc_core::random::{random_broadcast, random_degraded, RandomChannelSpec};
use vlftbc_core::sim::control::binary_acceptance;
use vlftbc_core::sim::{estimate, geometric_stats, SchemeConfig};
use vlftbc_core::{binary_entropy, summarize, BroadcastChannel, ChannelMatrix, InfoSummary};

const TOL: f64 = 1e-6;

struct Verdicts {
    results: Vec<(usize, bool)>,
}

impl Verdicts {
    fn record(&mut self, id: usize, title: &str, passed: bool, details: &[String]) {
        println!("criterion {id:>2}: {}  {title}", if passed { "PASS" } else { "FAIL" });
        for d in details {
            println!("               {d}");
        }
        self.results.push((id, passed));
    }
}

fn bsc_pair(p1: f64, p2: f64) -> BroadcastChannel {
    BroadcastChannel::new(vec![ChannelMatrix::bsc(p1).unwrap(), ChannelMatrix::bsc(p2).unwrap()]).unwrap()
}

fn single(w: ChannelMatrix) -> BroadcastChannel {
    BroadcastChannel::new(vec![w]).unwrap()
}

fn bundled() -> Vec<(String, BroadcastChannel)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../cli/examples");
    ["bsc_pair.json", "identical_pair.json", "cascade_joint.json", "asym3.json"]
        .iter()
        .map(|name| {
            let file = vlftbc_cli::ChannelFile::load(&dir.join(name)).unwrap();
            (name.to_string(), file.to_channel().unwrap())
        })
        .collect()
}

fn criterion_1(v: &mut Verdicts) {
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    for p in [0.05, 0.1, 0.2] {
        let bc = single(ChannelMatrix::bsc(p).unwrap());
        let start = Instant::now();
        let c = compute_cj(&bc, 0, TOL).unwrap().value;
        slowest = slowest.max(start.elapsed());
        worst = worst.max((c - (std::f64::consts::LN_2 - binary_entropy(p).unwrap())).abs());
    }
    let passed = worst <= 1e-6 && slowest < Duration::from_secs(1);
    v.record(
        1,
        "capacity of BSC(p), p in {0.05, 0.1, 0.2}",
        passed,
        &[format!("max |C_j - (ln 2 - h(p))| = {worst:.3e} (limit 1e-6), slowest {slowest:?} (limit 1 s)")],
    );
}

fn criterion_2(v: &mut Verdicts) {
    let mut worst = 0.0f64;
    let mut exact = true;
    for p in [0.05, 0.1, 0.2] {
        let bc = single(ChannelMatrix::bsc(p).unwrap());
        let b = compute_bj(&bc, 0).unwrap().value.to_f64();
        worst = worst.max((b - (1.0 - 2.0 * p) * ((1.0 - p) / p).ln()).abs());
        exact &= compute_tj(&bc, 0).unwrap().to_f64() == (1.0 - p) / p;
    }
    v.record(
        2,
        "divergence and likelihood-ratio closed forms on BSC(p)",
        worst <= 1e-9 && exact,
        &[format!("max |B_j - (1-2p) ln((1-p)/p)| = {worst:.3e} (limit 1e-9); T_j == (1-p)/p exactly: {exact}")],
    );
}

fn criterion_3(v: &mut Verdicts) {
    let bc = bsc_pair(0.1, 0.2);
    let c = compute_c(&bc, TOL).unwrap().value;
    let closed = std::f64::consts::LN_2 - binary_entropy(0.2).unwrap();
    let grid = (0..=4096)
        .map(|k| {
            let q = f64::from(k) / 4096.0;
            min_mutual_information(&bc, &[1.0 - q, q])
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let (d_closed, d_grid) = ((c - closed).abs(), (c - grid).abs());
    v.record(
        3,
        "max-min capacity of BSC(0.1) & BSC(0.2)",
        d_closed <= 1e-5 && d_grid <= 1e-5,
        &[format!(
            "C = {c:.9}, |C - (ln 2 - h(0.2))| = {d_closed:.3e}, |C - grid max| = {d_grid:.3e} (limit 1e-5)"
        )],
    );
}

fn chain_holds(r: &OrderingReport) -> bool {
    let physical_ok = r.physically_degraded != Verdict::Yes || r.stochastically_degraded.verdict == Verdict::Yes;
    let stochastic_ok = r.stochastically_degraded.verdict != Verdict::Yes || r.less_capable.verdict != Verdict::No;
    physical_ok && stochastic_ok
}

fn random_channels(seed: u64, count: usize) -> Vec<BroadcastChannel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let k = rng.random_range(1..=3);
            let outputs: Vec<usize> = (0..k).map(|_| rng.random_range(2..=3)).collect();
            let inputs = rng.random_range(2..=3);
            if i % 4 == 3 {
                let physical = rng.random_bool(0.5);
                random_degraded(&mut rng, inputs, &outputs, physical).unwrap()
            } else {
                let spec = RandomChannelSpec {
                    inputs,
                    outputs,
                    floor: 0.02,
                    with_joint: rng.random_bool(0.5),
                };
                random_broadcast(&mut rng, &spec).unwrap()
            }
        })
        .collect()
}

fn criterion_4(v: &mut Verdicts) {
    let mut details = Vec::new();
    let forward = classify(&bsc_pair(0.2, 0.1)).unwrap();
    let witness = forward.stochastically_degraded.witnesses[0].clone();
    let crossover = witness.as_ref().map(|w| w.get(0, 1));
    let forward_ok = forward.stochastically_degraded.verdict == Verdict::Yes
        && witness
            .as_ref()
            .is_some_and(|w| (w.get(0, 1) - 0.125).abs() <= 1e-6 && (w.get(1, 0) - 0.125).abs() <= 1e-6);
    details.push(format!(
        "BSC(0.2)/BSC(0.1): {:?}, witness crossover {crossover:?} (target 0.125 +- 1e-6)",
        forward.stochastically_degraded.verdict
    ));
    let reversed = classify(&bsc_pair(0.1, 0.2)).unwrap();
    let reversed_ok = reversed.stochastically_degraded.verdict == Verdict::No;
    details.push(format!("BSC(0.1)/BSC(0.2): {:?}", reversed.stochastically_degraded.verdict));
    let channels = bundled();
    let cascade = channels.iter().find(|(n, _)| n == "cascade_joint.json").unwrap();
    let cascade_verdict = classify(&cascade.1).unwrap().physically_degraded;
    details.push(format!("cascade joint physically degraded: {cascade_verdict:?}"));

    let mut chain_failures = 0;
    let mut tested = 0;
    for bc in channels.iter().map(|(_, bc)| bc.clone()).chain(random_channels(4, 100)) {
        tested += 1;
        chain_failures += usize::from(!chain_holds(&classify(&bc).unwrap()));
    }
    details.push(format!("implication chain violations: {chain_failures} of {tested} channels"));
    let passed = forward_ok && reversed_ok && cascade_verdict == Verdict::Yes && chain_failures == 0;
    v.record(4, "degradation classifier", passed, &details);
}

fn criterion_5(v: &mut Verdicts) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut order_violations = 0;
    let mut points = 0;
    for _ in 0..100 {
        let k = rng.random_range(1..=3);
        let spec = RandomChannelSpec {
            inputs: rng.random_range(2..=3),
            outputs: (0..k).map(|_| rng.random_range(2..=3)).collect(),
            floor: 0.02,
            with_joint: rng.random_bool(0.5),
        };
        let bc = random_broadcast(&mut rng, &spec).unwrap();
        let info = summarize(&bc, TOL).unwrap();
        for r in linear_grid(0.0, 0.99 * info.c, 11) {
            points += 1;
            order_violations += usize::from(lower_bound(&info, r).unwrap() > upper_bound(&info, r).unwrap());
        }
    }

    let mut degraded: Vec<BroadcastChannel> = bundled()
        .into_iter()
        .map(|(_, bc)| bc)
        .filter(|bc| classify(bc).unwrap().is_degraded())
        .collect();
    let bundled_degraded = degraded.len();
    for _ in 0..30 {
        let k = rng.random_range(2..=3);
        let outputs: Vec<usize> = (0..k).map(|_| rng.random_range(2..=3)).collect();
        let inputs = rng.random_range(2..=3);
        let physical = rng.random_bool(0.5);
        degraded.push(random_degraded(&mut rng, inputs, &outputs, physical).unwrap());
    }
    let mut certified = 0;
    let mut worst_gap = 0.0f64;
    for bc in &degraded {
        let info = summarize(bc, TOL).unwrap();
        let ordering = classify(bc).unwrap();
        if !ordering.is_degraded() {
            continue;
        }
        certified += 1;
        for r in linear_grid(0.0, 0.999 * info.c.min(info.cj[0]), 11) {
            let lower = lower_bound(&info, r).unwrap();
            let upper = upper_bound(&info, r).unwrap();
            let exact = exact_if_degraded(&info, &ordering, r).unwrap().unwrap_or(f64::NAN);
            worst_gap = worst_gap.max((lower - upper).abs()).max((exact - upper).abs());
        }
    }
    let passed = order_violations == 0 && certified == degraded.len() && worst_gap <= 2e-5;
    v.record(
        5,
        "bound ordering and tightness on degraded channels",
        passed,
        &[
            format!("lower > upper at {order_violations} of {points} (channel, rate) points on 100 random channels"),
            format!(
                "{certified} of {} degraded channels certified ({bundled_degraded} bundled); max |lower - upper| = {worst_gap:.3e} (limit 2e-5)",
                degraded.len()
            ),
        ],
    );
}

fn criterion_6(v: &mut Verdicts) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 1_000_000u64;
    let mut details = Vec::new();
    let mut passed = true;
    for (q, l) in [(0.5, 10usize), (0.9, 7), (0.1, 100)] {
        let (mean, var) = geometric_stats(q, l).unwrap();
        // block-repeat process: each block is repeated with probability q
        let (mut s1, mut s2, mut s4) = (0.0f64, 0.0f64, 0.0f64);
        let samples: Vec<f64> = (0..n)
            .map(|_| {
                let mut blocks = 1u64;
                while rng.random_bool(q) {
                    blocks += 1;
                }
                (blocks * l as u64) as f64
            })
            .collect();
        for &t in &samples {
            s1 += t;
        }
        let m = s1 / n as f64;
        for &t in &samples {
            let d = t - m;
            s2 += d * d;
            s4 += d * d * d * d;
        }
        let sample_var = s2 / (n - 1) as f64;
        let mean_se = (sample_var / n as f64).sqrt();
        let var_se = ((s4 / n as f64 - sample_var * sample_var) / n as f64).sqrt();
        let z_mean = (m - mean) / mean_se;
        let z_var = (sample_var - var) / var_se;
        passed &= z_mean.abs() <= 3.0 && z_var.abs() <= 3.0;
        details.push(format!(
            "q = {q}, L = {l}: closed form ({mean}, {var:.4}), sampled ({m:.4}, {sample_var:.4}), z = ({z_mean:.2}, {z_var:.2})"
        ));
    }
    v.record(6, "geometric stopping moments vs 1e6-sample Monte Carlo", passed, &details);
}

fn desk_channel() -> (BroadcastChannel, InfoSummary) {
    let bc = bsc_pair(0.1, 0.1);
    let info = summarize(&bc, TOL).unwrap();
    (bc, info)
}

/// `E[max(G_1, G_2)]` in blocks for two independent geometric block counts
/// with per-block acceptance `a`.
fn expected_max_blocks(a: f64) -> f64 {
    let q = 1.0 - a;
    2.0 / (1.0 - q) - 1.0 / (1.0 - q * q)
}

const DIAGNOSTIC_MESSAGES: u64 = 256;
const DIAGNOSTIC_TRIALS: usize = 2000;

fn criterion_7(v: &mut Verdicts) {
    let (bc, info) = desk_channel();
    let rate = 0.5 * info.c;
    let start = Instant::now();
    let mut passed = true;
    let mut details = Vec::new();
    for l in [150usize, 300] {
        let cfg = SchemeConfig {
            rate,
            block_len: l,
            delta: 0.3,
            trials: 10_000,
            seed: 7,
            ..SchemeConfig::default()
        };
        match estimate(&bc, &info, &cfg) {
            Ok(r) => {
                let dev = (r.mean_tau_max - l as f64).abs();
                let limit = 5.0 * (l as f64).sqrt();
                passed &= dev <= limit;
                details.push(format!(
                    "L = {l}: mean_tau_max = {:.2}, |mean - L| = {dev:.2} (limit {limit:.2})",
                    r.mean_tau_max
                ));
            }
            Err(e) => {
                passed = false;
                details.push(format!("L = {l}: simulation not run: {e}"));
            }
        }
        let diag = SchemeConfig {
            messages: Some(DIAGNOSTIC_MESSAGES),
            trials: DIAGNOSTIC_TRIALS,
            ..cfg
        };
        let r = estimate(&bc, &info, &diag).unwrap();
        let a = binary_acceptance(0.1, 0.1, r.config.control_len, 0.3);
        details.push(format!(
            "L = {l}, diagnostic with M = {DIAGNOSTIC_MESSAGES}, {DIAGNOSTIC_TRIALS} trials: mean_tau_max = {:.1} ({:.2} L); \
             control acceptance per block = {a:.4} (l = {}), so E[max tau] = {:.2} L before any message error",
            r.mean_tau_max,
            r.mean_tau_max / l as f64,
            r.config.control_len,
            expected_max_blocks(a)
        ));
    }
    let elapsed = start.elapsed();
    passed &= elapsed < Duration::from_secs(120);
    details.push(format!("elapsed {elapsed:?} (limit 120 s)"));
    v.record(7, "expected maximum stopping time at desk scale", passed, &details);
}

fn criterion_8(v: &mut Verdicts) {
    let (bc, info) = desk_channel();
    let rate = 0.5 * info.c;
    let ladder = [100usize, 200, 400];
    let mut details = Vec::new();
    let mut results = Vec::new();
    for &l in &ladder {
        let cfg = SchemeConfig {
            rate,
            block_len: l,
            delta: 0.3,
            trials: 10_000,
            seed: 8,
            ..SchemeConfig::default()
        };
        match estimate(&bc, &info, &cfg) {
            Ok(r) => results.push(Some(r)),
            Err(e) => {
                details.push(format!("L = {l}: simulation not run: {e}"));
                results.push(None);
            }
        }
    }
    let mut passed = results.iter().all(Option::is_some);
    if passed {
        let r: Vec<_> = results.into_iter().flatten().collect();
        let decreasing = r.windows(2).all(|w| w[1].pe_hat.estimate < w[0].pe_hat.estimate);
        let separated = r[2].pe_hat.ci_high < r[0].pe_hat.ci_low;
        let upper = upper_bound(&info, rate).unwrap();
        let exponent_ok = r
            .iter()
            .all(|x| x.empirical_exponent.is_some_and(|e| e > 0.0 && e <= upper + 0.2));
        passed = decreasing && separated && exponent_ok;
        for (l, x) in ladder.iter().zip(&r) {
            details.push(format!(
                "L = {l}: pe_hat = {:.3e} [{:.3e}, {:.3e}], exponent {:?} (upper bound {upper:.4} + 0.2)",
                x.pe_hat.estimate, x.pe_hat.ci_low, x.pe_hat.ci_high, x.empirical_exponent
            ));
        }
    }
    for &l in &ladder {
        let diag = SchemeConfig {
            rate,
            block_len: l,
            delta: 0.3,
            messages: Some(DIAGNOSTIC_MESSAGES),
            trials: DIAGNOSTIC_TRIALS,
            seed: 8,
            ..SchemeConfig::default()
        };
        let r = estimate(&bc, &info, &diag).unwrap();
        let control_len = r.config.control_len;
        let deny_accept = binary_acceptance(0.1, 0.9, control_len, 0.3);
        details.push(format!(
            "L = {l}, diagnostic with M = {DIAGNOSTIC_MESSAGES}: {} errors in {DIAGNOSTIC_TRIALS} sessions, \
             message errors {}, deny-accept probability {deny_accept:.2e} (l = {control_len})",
            r.pe_hat.successes, r.receivers[0].tally.message_errors
        ));
    }
    v.record(8, "error probability trend and empirical exponent", passed, &details);
}

fn criterion_9(v: &mut Verdicts) {
    let start = Instant::now();
    let instances = random_instances(9, 100).unwrap();
    let report = run_suite(&instances, 10_000, 9).unwrap();
    let elapsed = start.elapsed();
    let worst = report
        .checks
        .iter()
        .filter_map(|c| c.worst_slack.map(|s| (s, c.name.as_str())))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    let slack_ok = report.checks.iter().all(|c| c.worst_slack.is_none_or(|s| s >= -SLACK));
    let passed = report.passed && slack_ok && elapsed < Duration::from_secs(60);
    let mut details: Vec<String> = report
        .checks
        .iter()
        .map(|c| {
            format!(
                "{}: {} checked, worst slack {:?}",
                c.name,
                c.checked,
                c.worst_slack.map(|s| format!("{s:.3e}"))
            )
        })
        .collect();
    details.push(format!("overall worst slack {worst:?}; elapsed {elapsed:?} (limit 60 s)"));
    v.record(9, "converse oracle suite on 100 seeded instances", passed, &details);
}

fn criterion_10(v: &mut Verdicts) {
    let channel = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../cli/examples/bsc_pair.json");
    let args = || SimulateArgs {
        channel: channel.clone(),
        rate: 0.1,
        block_len: 40,
        delta: 0.3,
        trials: 3000,
        seed: 10,
        max_blocks: 100,
        fixed_codebook: false,
        gamma: None,
        epsilon: None,
        messages: None,
        sessions_out: None,
        tol: TOL,
    };
    let run_with = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| simulate_cmd(&args())).unwrap().stdout
    };
    let one_a = run_with(1);
    let one_b = run_with(1);
    let eight = run_with(8);
    let passed = one_a == one_b && one_a == eight;
    v.record(
        10,
        "byte-identical simulate output across runs and worker counts",
        passed,
        &[format!(
            "{} bytes; run 1 == run 2: {}; 1 worker == 8 workers: {}",
            one_a.len(),
            one_a == one_b,
            one_a == eight
        )],
    );
}

fn main() {
    let mut v = Verdicts { results: Vec::new() };
    criterion_1(&mut v);
    criterion_2(&mut v);
    criterion_3(&mut v);
    criterion_4(&mut v);
    criterion_5(&mut v);
    criterion_6(&mut v);
    criterion_7(&mut v);
    criterion_8(&mut v);
    criterion_9(&mut v);
    criterion_10(&mut v);
    let failed: Vec<usize> = v.results.iter().filter(|(_, p)| !p).map(|(id, _)| *id).collect();
    println!(
        "acceptance: {} of {} criteria passed{}",
        v.results.len() - failed.len(),
        v.results.len(),
        if failed.is_empty() { String::new() } else { format!("; failed: {failed:?}") }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
