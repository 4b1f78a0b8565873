use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use vlftbc_core::sim::control::{binary_acceptance, estimate_control_errors};
use vlftbc_core::sim::{build_codebook, geometric_stats, simulate, MlDecoder, SchemeConfig, Z95};
use vlftbc_core::{summarize, BroadcastChannel, ChannelMatrix, Distribution};

fn bsc_pair(p1: f64, p2: f64) -> BroadcastChannel {
    BroadcastChannel::new(vec![ChannelMatrix::bsc(p1).unwrap(), ChannelMatrix::bsc(p2).unwrap()]).unwrap()
}

fn kl_bernoulli(a: f64, b: f64) -> f64 {
    a * (a / b).ln() + (1.0 - a) * ((1.0 - a) / (1.0 - b)).ln()
}

#[test]
fn stopping_times_are_block_multiples_and_deterministic() {
    let bc = bsc_pair(0.1, 0.2);
    let info = summarize(&bc, 1e-6).unwrap();
    let cfg = SchemeConfig {
        rate: 0.3 * info.c,
        block_len: 30,
        trials: 400,
        seed: 17,
        ..SchemeConfig::default()
    };
    let (result, records) = simulate(&bc, &info, &cfg).unwrap();
    for r in &records {
        assert!(r.blocks >= 1);
        for &t in &r.tau {
            assert!(t > 0 && t % cfg.block_len == 0);
        }
        assert_eq!(r.tau.iter().max().copied().unwrap(), r.blocks * cfg.block_len);
    }
    let (again, again_records) = simulate(&bc, &info, &cfg).unwrap();
    assert_eq!(result, again);
    assert_eq!(records, again_records);

    // union bound holds exactly on the recorded sessions
    let any = records.iter().filter(|r| r.correct.iter().any(|c| !c)).count();
    let per: usize = (0..2).map(|j| records.iter().filter(|r| !r.correct[j]).count()).sum();
    assert!(any <= per);
    let sum: f64 = result.receivers.iter().map(|r| r.pe_hat.estimate).sum();
    assert!(result.pe_hat.estimate <= sum + 2.0 / cfg.trials as f64);
}

#[test]
fn identical_branches_have_matching_error_rates() {
    let bc = bsc_pair(0.2, 0.2);
    let info = summarize(&bc, 1e-6).unwrap();
    let cfg = SchemeConfig {
        rate: 0.6 * info.c,
        block_len: 24,
        trials: 4000,
        seed: 5,
        ..SchemeConfig::default()
    };
    let (result, _) = simulate(&bc, &info, &cfg).unwrap();
    let (a, b) = (&result.receivers[0].pe_hat, &result.receivers[1].pe_hat);
    let se = (a.estimate * (1.0 - a.estimate) / a.trials as f64 + b.estimate * (1.0 - b.estimate) / b.trials as f64).sqrt();
    assert!((a.estimate - b.estimate).abs() <= Z95 * se.max(1.0 / a.trials as f64) * 1.5);
    assert!((result.receivers[0].mean_tau - result.receivers[1].mean_tau).abs() < 0.1 * result.receivers[0].mean_tau);
}

#[test]
fn identical_rows_decoder_is_uninformed() {
    let flat = ChannelMatrix::constant(2, Distribution::new(vec![0.3, 0.7]).unwrap()).unwrap();
    let decoder = MlDecoder::new(&flat);
    let bc = bsc_pair(0.1, 0.1);
    let info = summarize(&bc, 1e-6).unwrap();
    let m = 4;
    let cfg = SchemeConfig {
        rate: 0.1,
        block_len: 20,
        messages: Some(m),
        gamma: Some(0.5),
        ..SchemeConfig::default()
    }
    .resolve(&info)
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let trials = 20_000;
    let mut errors = 0;
    for _ in 0..trials {
        let codebook = build_codebook(&info.pstar, &cfg, &mut rng).unwrap();
        let w = rng.random_range(0..m as usize);
        let outputs: Vec<u8> = (0..cfg.message_len).map(|_| u8::from(rng.random_bool(0.7))).collect();
        errors += u32::from(decoder.decode(&outputs, &codebook) != w);
    }
    let rate = f64::from(errors) / f64::from(trials);
    let expected = 1.0 - 1.0 / m as f64;
    let se = (expected * (1.0 - expected) / f64::from(trials)).sqrt();
    assert!((rate - expected).abs() < 4.0 * se, "{rate} vs {expected}");
}

/// With two far-apart messages the message mode almost never fails, so every
/// block of receiver `j` repeats with the same probability and `tau_j / L` is
/// geometric.
#[test]
fn block_counts_are_geometric() {
    let bc = bsc_pair(0.1, 0.15);
    let info = summarize(&bc, 1e-6).unwrap();
    let cfg = SchemeConfig {
        rate: 0.05,
        block_len: 60,
        gamma: Some(0.5),
        messages: Some(2),
        trials: 10_000,
        seed: 21,
        ..SchemeConfig::default()
    };
    let (result, records) = simulate(&bc, &info, &cfg).unwrap();
    assert_eq!(result.truncated_sessions, 0);
    let l = cfg.block_len;
    let control_len = result.config.control_len;
    for j in 0..2 {
        let p = bc.branch(j).get(result.config.x_c, 1);
        let q_exact = 1.0 - binary_acceptance(p, p, control_len, cfg.delta);
        let blocks: Vec<usize> = records.iter().map(|r| r.tau[j] / l).collect();
        let n = blocks.len() as f64;
        let mean = blocks.iter().sum::<usize>() as f64 / n;
        let q = 1.0 - 1.0 / mean;
        // bins 1..=k with at least 5 expected entries, then the tail
        let mut bins = Vec::new();
        let mut k = 1;
        while n * (1.0 - q) * q.powi(k as i32 - 1) >= 5.0 {
            let observed = blocks.iter().filter(|&&b| b == k).count() as f64;
            bins.push((observed, n * (1.0 - q) * q.powi(k as i32 - 1)));
            k += 1;
        }
        let tail_expected = n * q.powi(k as i32 - 1);
        let tail_observed = blocks.iter().filter(|&&b| b >= k).count() as f64;
        bins.push((tail_observed, tail_expected));
        let chi2: f64 = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
        let df = (bins.len() - 2) as f64;
        let p_value = 1.0 - ChiSquared::new(df).unwrap().cdf(chi2);
        assert!(p_value > 0.01, "branch {j}: chi2 = {chi2}, df = {df}");

        let (mean_tau, var_tau) = geometric_stats(q_exact, l).unwrap();
        let se = (var_tau / n).sqrt();
        let stats = &result.receivers[j];
        assert!((stats.mean_tau - mean_tau).abs() < 4.0 * se, "{} vs {mean_tau}", stats.mean_tau);
        assert!((stats.q_hat - q_exact).abs() < 0.02);
    }
}

#[test]
fn repeat_probability_falls_with_block_length() {
    let bc = bsc_pair(0.1, 0.1);
    let info = summarize(&bc, 1e-6).unwrap();
    let mut previous = [1.0f64; 2];
    for l in [40, 80, 160] {
        let cfg = SchemeConfig {
            rate: 0.1 * info.c,
            block_len: l,
            trials: 3000,
            seed: 8,
            ..SchemeConfig::default()
        };
        let (result, _) = simulate(&bc, &info, &cfg).unwrap();
        for (j, r) in result.receivers.iter().enumerate() {
            assert!(r.q_hat < previous[j], "L = {l}: q_hat {} not below {}", r.q_hat, previous[j]);
            previous[j] = r.q_hat;
        }
    }
}

/// Deny-accept rates of a fixed typicality band. The exponent tends to the
/// divergence from the band to the deny law (the I-projection), which lies
/// below `D(x_c || x_e)`; it approaches `D(x_c || x_e)` only as the band
/// narrows around the confirm law.
#[test]
fn deny_acceptance_exponent() {
    let (c1, e1) = (0.4, 0.55);
    let delta = 0.25;
    let divergence = kl_bernoulli(c1, e1);
    // band on the fraction of ones: [0.3, 0.5]; the deny law sits above it
    let projection = kl_bernoulli((1.0 + delta) * c1, e1);
    let confirm = [1.0 - c1, c1];
    let deny = [1.0 - e1, e1];

    let mut previous_gap = f64::INFINITY;
    for (i, l) in [200usize, 400, 800].into_iter().enumerate() {
        let exact = binary_acceptance(c1, e1, l, delta);
        let rate = -exact.ln() / l as f64;
        assert!(rate < divergence);
        assert!(rate > projection);
        assert!(rate - projection < previous_gap);
        previous_gap = rate - projection;

        let mc = estimate_control_errors(&confirm, &deny, l, delta, 200_000, 40 + i as u64).unwrap();
        let p = mc.deny_accepted;
        assert!(p.ci_low <= exact && exact <= p.ci_high, "l = {l}: {exact} outside [{}, {}]", p.ci_low, p.ci_high);
    }

    let mut previous = 0.0;
    for l in [200usize, 400, 800, 1600, 3200] {
        let narrowing = delta * (200.0 / l as f64).sqrt();
        let rate = -binary_acceptance(c1, e1, l, narrowing).ln() / l as f64;
        assert!(rate > previous && rate < divergence);
        previous = rate;
    }
    assert!(divergence - previous < 0.5 * (divergence - projection));
}

#[test]
fn geometric_moments_match_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for (q, l) in [(0.5, 10), (0.9, 7), (0.1, 100)] {
        let (mean, var) = geometric_stats(q, l).unwrap();
        let n = 200_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += vlftbc_core::sim::sample_block_repeat(&mut rng, q, l).unwrap() as f64;
        }
        let se = (var / n as f64).sqrt();
        assert!((sum / n as f64 - mean).abs() < 4.0 * se);
    }
}
