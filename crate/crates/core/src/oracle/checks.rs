use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::enumerate::{history_symbols, PosteriorState};
use crate::error::{Error, Result};
use crate::info::{clip_below, InfoSummary};
use crate::probability::{binary_entropy, ExtReal};

/// Allowed violation of every inequality.
pub const SLACK: f64 = 1e-9;
/// Allowed deviation in the posterior martingale identity.
pub const MARTINGALE_TOLERANCE: f64 = 1e-12;

/// The tightest observation of a check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub instance: Option<u64>,
    pub branch: Option<usize>,
    pub n: Option<usize>,
    pub history: Vec<usize>,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub checked: u64,
    pub skipped: u64,
    /// Smallest `bound - value` seen.
    pub worst_slack: Option<f64>,
    /// Largest `value` seen.
    pub max_observed: Option<f64>,
    pub witness: Option<Witness>,
    #[serde(skip)]
    tolerance: f64,
}

impl CheckReport {
    pub fn new(name: &str) -> Self {
        Self::with_tolerance(name, SLACK)
    }

    pub fn with_tolerance(name: &str, tolerance: f64) -> Self {
        CheckReport {
            name: name.to_string(),
            passed: true,
            checked: 0,
            skipped: 0,
            worst_slack: None,
            max_observed: None,
            witness: None,
            tolerance,
        }
    }

    /// Records one instance of `value <= bound`.
    pub fn record(&mut self, value: f64, bound: f64, witness: impl FnOnce() -> Witness) {
        self.checked += 1;
        let slack = bound - value;
        if self.max_observed.is_none_or(|m| value > m) {
            self.max_observed = Some(value);
        }
        if self.worst_slack.is_none_or(|w| slack < w) {
            self.worst_slack = Some(slack);
            let mut w = witness();
            w.value = value;
            w.bound = bound;
            self.witness = Some(w);
        }
        if !(slack >= -self.tolerance) {
            self.passed = false;
        }
    }

    pub fn skip(&mut self) {
        self.skipped += 1;
    }

    /// Folds `other` into `self`, tagging its witness with `instance`.
    pub fn merge(&mut self, other: &CheckReport, instance: Option<u64>) {
        self.checked += other.checked;
        self.skipped += other.skipped;
        self.passed &= other.passed;
        if let Some(m) = other.max_observed {
            if self.max_observed.is_none_or(|s| m > s) {
                self.max_observed = Some(m);
            }
        }
        if let Some(s) = other.worst_slack {
            if self.worst_slack.is_none_or(|w| s < w) {
                self.worst_slack = Some(s);
                self.witness = other.witness.clone().map(|mut w| {
                    if w.instance.is_none() {
                        w.instance = instance;
                    }
                    w
                });
            }
        }
    }
}

fn witness(branch: usize, n: usize, h: usize, outputs: usize) -> impl FnOnce() -> Witness {
    move || Witness {
        instance: None,
        branch: Some(branch),
        n: Some(n),
        history: history_symbols(h, outputs, n),
        value: 0.0,
        bound: 0.0,
    }
}

/// Visits every realizable `(branch, n, history)` with its one-step children
/// `(conditional probability, child entropy)`.
fn for_each_step(states: &[PosteriorState], mut f: impl FnMut(usize, usize, usize, f64, &[(f64, f64)], usize)) {
    for pair in states.windows(2) {
        let (now, next) = (&pair[0], &pair[1]);
        for (j, (t, tn)) in now.branches.iter().zip(&next.branches).enumerate() {
            let mut children = Vec::with_capacity(t.outputs);
            for h in 0..t.histories() {
                let ph = t.prob[h];
                if ph <= 0.0 {
                    continue;
                }
                children.clear();
                for y in 0..t.outputs {
                    let c = t.child(h, y);
                    if tn.prob[c] > 0.0 {
                        children.push((tn.prob[c] / ph, tn.entropy[c]));
                    }
                }
                f(j, now.n, h, t.entropy[h], &children, t.outputs);
            }
        }
    }
}

/// Expected one-step entropy drop is at most `C_j`.
pub fn check_lemma4(states: &[PosteriorState], info: &InfoSummary) -> CheckReport {
    let mut report = CheckReport::new("lemma4_entropy_drop");
    for_each_step(states, |j, n, h, ent, children, outputs| {
        let drop = ent - children.iter().map(|(p, e)| p * e).sum::<f64>();
        report.record(drop, info.cj_upper[j], witness(j, n, h, outputs));
    });
    report
}

/// `ln H(parent) - ln H(child)`, or `None` when a log is undefined.
fn log_drops(ent: f64, children: &[(f64, f64)]) -> Option<Vec<(f64, f64)>> {
    if ent <= 0.0 || children.iter().any(|&(_, e)| e <= 0.0) {
        return None;
    }
    Some(children.iter().map(|&(p, e)| (p, ent.ln() - e.ln())).collect())
}

/// Expected one-step log-entropy drop is at most `B_j`.
pub fn check_lemma6(states: &[PosteriorState], info: &InfoSummary) -> CheckReport {
    let mut report = CheckReport::new("lemma6_log_entropy_drop");
    for_each_step(states, |j, n, h, ent, children, outputs| match log_drops(ent, children) {
        None => report.skip(),
        Some(d) => {
            let mean = d.iter().map(|(p, x)| p * x).sum::<f64>();
            report.record(mean, info.bj[j].to_f64(), witness(j, n, h, outputs));
        }
    });
    report
}

/// Every single log-entropy drop is at most `ln T_j`.
pub fn check_lemma7(states: &[PosteriorState], info: &InfoSummary) -> CheckReport {
    let mut report = CheckReport::new("lemma7_pointwise_log_drop");
    for_each_step(states, |j, n, h, ent, children, outputs| match log_drops(ent, children) {
        None => report.skip(),
        Some(d) => {
            let bound = info.tj[j].ln().to_f64();
            for (_, x) in d {
                report.record(x, bound, witness(j, n, h, outputs));
            }
        }
    });
    report
}

/// Expected clipped log-entropy drop `E[(drop)_a]` is at most `phi(a)`.
pub fn check_lemma8(states: &[PosteriorState], info: &InfoSummary, a: f64) -> CheckReport {
    let mut report = CheckReport::new("lemma8_clipped_log_drop");
    let bound = match info.varphi(a) {
        ExtReal::Finite(v) => v,
        ExtReal::Infinite => f64::INFINITY,
    };
    for_each_step(states, |j, n, h, ent, children, outputs| match log_drops(ent, children) {
        None => report.skip(),
        Some(d) => {
            let mean = d.iter().map(|(p, x)| p * clip_below(*x, a)).sum::<f64>();
            report.record(mean, bound, witness(j, n, h, outputs));
        }
    });
    report
}

/// Posterior martingale `sum_y P(y|h) p(.|h y) = p(.|h)` and normalization.
pub fn check_martingale(states: &[PosteriorState]) -> CheckReport {
    let mut report = CheckReport::with_tolerance("posterior_martingale", MARTINGALE_TOLERANCE);
    for s in states {
        for (j, t) in s.branches.iter().enumerate() {
            let total: f64 = t.prob.iter().sum();
            report.record((total - 1.0).abs(), 0.0, witness(j, s.n, 0, t.outputs));
        }
    }
    for pair in states.windows(2) {
        let (now, next) = (&pair[0], &pair[1]);
        for (j, (t, tn)) in now.branches.iter().zip(&next.branches).enumerate() {
            for h in 0..t.histories() {
                let ph = t.prob[h];
                if ph <= 0.0 {
                    continue;
                }
                let mut mixed = vec![0.0; t.messages];
                for y in 0..t.outputs {
                    let c = t.child(h, y);
                    let w = tn.prob[c] / ph;
                    for (m, p) in mixed.iter_mut().zip(tn.posterior_of(c)) {
                        *m += w * p;
                    }
                }
                let dev = mixed
                    .iter()
                    .zip(t.posterior_of(h))
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                report.record(dev, 0.0, witness(j, now.n, h, t.outputs));
            }
        }
    }
    report
}

/// Random instances of the log-sum inequality
/// `sum_l p_l ln(sum_i f_i / sum_i b_il) <= max_i sum_l p_l ln(f_i / b_il)`
/// with `L, N <= 6` and rational entries; configurations with a zero
/// denominator or zero numerator are skipped.
pub fn check_logsum<R: Rng + ?Sized>(trials: u64, rng: &mut R) -> CheckReport {
    let mut report = CheckReport::new("lemma5_log_sum");
    let rational = |rng: &mut R| rng.random_range(0..=20u32) as f64 / 20.0;
    for trial in 0..trials {
        let l_len = rng.random_range(1..=6usize);
        let n_len = rng.random_range(1..=6usize);
        let p: Vec<f64> = (0..l_len).map(|_| rational(rng)).collect();
        let f: Vec<f64> = (0..n_len).map(|_| rational(rng)).collect();
        let beta: Vec<Vec<f64>> = (0..n_len).map(|_| (0..l_len).map(|_| rational(rng)).collect()).collect();
        if f.contains(&0.0) || beta.iter().flatten().any(|&v| v == 0.0) {
            report.skip();
            continue;
        }
        let fsum: f64 = f.iter().sum();
        let lhs: f64 = (0..l_len)
            .map(|l| p[l] * (fsum / (0..n_len).map(|i| beta[i][l]).sum::<f64>()).ln())
            .sum();
        let rhs = (0..n_len)
            .map(|i| (0..l_len).map(|l| p[l] * (f[i] / beta[i][l]).ln()).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        report.record(lhs, rhs, || Witness {
            instance: Some(trial),
            branch: None,
            n: None,
            history: Vec::new(),
            value: 0.0,
            bound: 0.0,
        });
    }
    report
}

/// A stopping rule measurable with respect to one branch's output history.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingRule {
    /// Stop at time `n`.
    Fixed(usize),
    /// Stop once the largest posterior reaches `threshold`, or at the horizon.
    Confidence { threshold: f64 },
    /// Stop at each history independently with probability `prob`, decided
    /// by a seeded hash of `(n, history)`.
    Random { seed: u64, prob: f64 },
}

impl StoppingRule {
    fn stops(&self, n: usize, h: usize, posterior: &[f64]) -> bool {
        match *self {
            StoppingRule::Fixed(t) => n >= t,
            StoppingRule::Confidence { threshold } => posterior.iter().cloned().fold(0.0, f64::max) >= threshold,
            StoppingRule::Random { seed, prob } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((n as u64) << 48) | h as u64);
                rng.random::<f64>() < prob
            }
        }
    }
}

/// `E[H(W | Y_j^tau)] <= h(P_e) + P_e ln(M - 1)` for the MAP decision at the
/// stopping time `tau` (forced at the last enumerated time), per branch.
pub fn check_fano_stopping(states: &[PosteriorState], rule: &StoppingRule, messages: usize) -> Result<CheckReport> {
    let horizon = states.len().checked_sub(1).ok_or_else(|| Error::Config("no posterior states".into()))?;
    if let StoppingRule::Fixed(t) = rule {
        if *t > horizon {
            return Err(Error::Config(format!("stopping time {t} beyond the horizon {horizon}")));
        }
    }
    let mut report = CheckReport::new("fano_at_stopping");
    if messages < 2 {
        report.skip();
        return Ok(report);
    }
    for j in 0..states[0].branches.len() {
        let mut alive = vec![true];
        let mut mean_entropy = 0.0;
        let mut error = 0.0;
        for s in states {
            let t = &s.branches[j];
            let mut next_alive = vec![false; t.histories() * t.outputs];
            for h in 0..t.histories() {
                if !alive[h] || t.prob[h] <= 0.0 {
                    continue;
                }
                let post = t.posterior_of(h);
                if s.n == horizon || rule.stops(s.n, h, post) {
                    mean_entropy += t.prob[h] * t.entropy[h];
                    error += t.prob[h] * (1.0 - post.iter().cloned().fold(0.0, f64::max));
                } else {
                    for y in 0..t.outputs {
                        next_alive[t.child(h, y)] = true;
                    }
                }
            }
            alive = next_alive;
        }
        let pe = error.clamp(0.0, 1.0);
        let bound = binary_entropy(pe)? + pe * ((messages - 1) as f64).ln();
        report.record(mean_entropy, bound, || Witness {
            instance: None,
            branch: Some(j),
            n: None,
            history: Vec::new(),
            value: 0.0,
            bound: 0.0,
        });
    }
    Ok(report)
}
