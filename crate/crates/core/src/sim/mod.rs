//! Monte Carlo simulation of the two-phase variable-length feedback scheme.
//!
//! Each block of length `L` carries a random-coded message segment of length
//! `round(gamma L)` followed by a control segment that repeats either the
//! confirm symbol `x_c` or the deny symbol `x_e`. Receivers stop at the first
//! confirmed block, and the session ends when the last receiver stops.

mod codebook;
mod config;
pub mod control;
mod decode;
mod sampler;
mod session;
mod stats;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use codebook::{build_codebook, Codebook};
pub use config::{ResolvedConfig, SchemeConfig, DEFAULT_DELTA, DEFAULT_MAX_BLOCKS, MAX_MESSAGES};
pub use decode::{decode_control, decode_message, typical, MlDecoder};
pub use sampler::{multinomial, OutputSampler};
pub use session::{run_session, BlockTally, SessionContext, SessionOutcome};
pub use stats::{geometric_stats, sample_block_repeat, wilson_interval, Moments, Proportion, Z95};

use crate::error::Result;
use crate::info::InfoSummary;
use crate::probability::BroadcastChannel;

/// Stream index reserved for the shared codebook.
const CODEBOOK_STREAM: u64 = u64::MAX;

/// Random generator for trial `index`: one ChaCha stream per trial, so results
/// do not depend on how trials are scheduled.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReceiverStats {
    /// Final estimate wrong or session truncated.
    pub pe_hat: Proportion,
    pub mean_tau: f64,
    pub var_tau: f64,
    /// Fraction of listening blocks that did not end in a stop.
    pub q_hat: f64,
    /// Message-mode error rate over listening blocks.
    pub p1e: f64,
    /// Deny symbol sent but accepted.
    pub p2ec: Option<f64>,
    /// Confirm symbol sent but rejected.
    pub p2ce: Option<f64>,
    /// `p1e (1 - p2ec) + (1 - p1e) p2ce`, which treats the control symbol as
    /// driven by this receiver's decision alone.
    pub q_factorized: Option<f64>,
    pub tally: BlockTally,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub config: ResolvedConfig,
    /// Probability that some receiver ends with a wrong estimate.
    pub pe_hat: Proportion,
    pub receivers: Vec<ReceiverStats>,
    pub mean_tau_max: f64,
    pub var_tau_max: f64,
    pub tau_max_std_error: f64,
    /// `-ln(pe_hat) / mean_tau_max`; absent when no error was observed.
    pub empirical_exponent: Option<f64>,
    pub truncated_sessions: u64,
    pub mean_blocks: f64,
}

/// One row of the per-session log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionRecord {
    pub trial: u64,
    pub message: usize,
    pub tau: Vec<usize>,
    pub correct: Vec<bool>,
    pub blocks: usize,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn aggregate(cfg: ResolvedConfig, outcomes: &[SessionOutcome], k: usize) -> SimResult {
    let trials = outcomes.len() as u64;
    let mut errors = 0;
    let mut truncated = 0;
    let mut tau_max = Moments::default();
    let mut blocks = Moments::default();
    let mut per_tau = vec![Moments::default(); k];
    let mut per_err = vec![0u64; k];
    let mut tallies = vec![BlockTally::default(); k];
    for o in outcomes {
        errors += u64::from(o.any_error());
        truncated += u64::from(o.truncated);
        tau_max.push(o.tau_max() as f64);
        blocks.push(o.blocks as f64);
        for j in 0..k {
            per_tau[j].push(o.tau[j] as f64);
            per_err[j] += u64::from(!o.correct(j));
            tallies[j].add(&o.tallies[j]);
        }
    }
    let receivers = (0..k)
        .map(|j| {
            let t = &tallies[j];
            let p1e = ratio(t.message_errors, t.active_blocks).unwrap_or(0.0);
            let p2ec = ratio(t.deny_accepted, t.deny_sent);
            let p2ce = ratio(t.confirm_rejected, t.confirm_sent);
            let q_factorized = match (p2ec, p2ce) {
                (Some(a), Some(b)) => Some(p1e * (1.0 - a) + (1.0 - p1e) * b),
                (None, Some(b)) if t.message_errors == 0 => Some(b),
                _ => None,
            };
            ReceiverStats {
                pe_hat: Proportion::new(per_err[j], trials),
                mean_tau: per_tau[j].mean(),
                var_tau: per_tau[j].variance(),
                q_hat: ratio(t.repeats, t.active_blocks).unwrap_or(0.0),
                p1e,
                p2ec,
                p2ce,
                q_factorized,
                tally: t.clone(),
            }
        })
        .collect();
    let pe_hat = Proportion::new(errors, trials);
    let empirical_exponent = (errors > 0).then(|| -pe_hat.estimate.ln() / tau_max.mean());
    SimResult {
        config: cfg,
        pe_hat,
        receivers,
        mean_tau_max: tau_max.mean(),
        var_tau_max: tau_max.variance(),
        tau_max_std_error: tau_max.std_error(),
        empirical_exponent,
        truncated_sessions: truncated,
        mean_blocks: blocks.mean(),
    }
}

/// Runs `cfg.trials` independent sessions and returns the aggregate plus the
/// per-session log (in trial order).
pub fn simulate(bc: &BroadcastChannel, info: &InfoSummary, cfg: &SchemeConfig) -> Result<(SimResult, Vec<SessionRecord>)> {
    let resolved = cfg.resolve(info)?;
    let ctx = SessionContext::new(bc, resolved.x_c)?;
    let shared = if resolved.fixed_codebook {
        Some(build_codebook(&info.pstar, &resolved, &mut trial_rng(resolved.seed, CODEBOOK_STREAM))?)
    } else {
        None
    };
    let outcomes = (0..resolved.trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<SessionOutcome> {
            let mut rng = trial_rng(resolved.seed, trial);
            let owned;
            let codebook = match &shared {
                Some(c) => c,
                None => {
                    owned = build_codebook(&info.pstar, &resolved, &mut rng)?;
                    &owned
                }
            };
            let message = rng.random_range(0..resolved.messages);
            Ok(run_session(&ctx, codebook, &resolved, message, &mut rng))
        })
        .collect::<Result<Vec<_>>>()?;
    let k = bc.num_branches();
    let records = outcomes
        .iter()
        .enumerate()
        .map(|(i, o)| SessionRecord {
            trial: i as u64,
            message: o.message,
            tau: o.tau.clone(),
            correct: (0..k).map(|j| o.correct(j)).collect(),
            blocks: o.blocks,
        })
        .collect();
    Ok((aggregate(resolved, &outcomes, k), records))
}

pub fn estimate(bc: &BroadcastChannel, info: &InfoSummary, cfg: &SchemeConfig) -> Result<SimResult> {
    simulate(bc, info, cfg).map(|(r, _)| r)
}
