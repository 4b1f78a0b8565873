use rand::Rng;
use serde::Serialize;

use super::codebook::Codebook;
use super::config::ResolvedConfig;
use super::decode::{decode_control, MlDecoder};
use super::sampler::OutputSampler;
use crate::probability::BroadcastChannel;

/// Per-receiver block tallies used to estimate the repeat probability and
/// its components.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BlockTally {
    /// Blocks in which the receiver was still listening.
    pub active_blocks: u64,
    /// ... and its message estimate was wrong.
    pub message_errors: u64,
    /// ... and the deny symbol was sent.
    pub deny_sent: u64,
    /// ... deny sent but decoded as confirm.
    pub deny_accepted: u64,
    /// ... confirm sent.
    pub confirm_sent: u64,
    /// ... confirm sent but decoded as deny.
    pub confirm_rejected: u64,
    /// ... and the receiver did not stop.
    pub repeats: u64,
}

impl BlockTally {
    pub fn add(&mut self, other: &BlockTally) {
        self.active_blocks += other.active_blocks;
        self.message_errors += other.message_errors;
        self.deny_sent += other.deny_sent;
        self.deny_accepted += other.deny_accepted;
        self.confirm_sent += other.confirm_sent;
        self.confirm_rejected += other.confirm_rejected;
        self.repeats += other.repeats;
    }
}

/// Outcome of one feedback session.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionOutcome {
    pub message: usize,
    /// Stopping time of each receiver, a multiple of `L`.
    pub tau: Vec<usize>,
    /// Final estimate of each receiver (`None` when truncated).
    pub estimates: Vec<Option<usize>>,
    pub blocks: usize,
    pub truncated: bool,
    pub tallies: Vec<BlockTally>,
}

impl SessionOutcome {
    pub fn correct(&self, j: usize) -> bool {
        self.estimates[j] == Some(self.message)
    }

    pub fn any_error(&self) -> bool {
        (0..self.tau.len()).any(|j| !self.correct(j))
    }

    pub fn tau_max(&self) -> usize {
        self.tau.iter().copied().max().unwrap_or(0)
    }
}

/// Channel-dependent state shared by all sessions.
#[derive(Debug, Clone)]
pub struct SessionContext {
    pub sampler: OutputSampler,
    pub decoders: Vec<MlDecoder>,
    /// `P_j(.|x_c)` for each branch.
    pub confirm_rows: Vec<Vec<f64>>,
}

impl SessionContext {
    pub fn new(bc: &BroadcastChannel, x_c: usize) -> crate::error::Result<Self> {
        Ok(SessionContext {
            sampler: OutputSampler::new(bc)?,
            decoders: bc.branches().iter().map(MlDecoder::new).collect(),
            confirm_rows: bc.branches().iter().map(|w| w.row(x_c).probs().to_vec()).collect(),
        })
    }
}

/// Runs blocks of message mode followed by control mode until every receiver
/// has accepted a confirm, or `max_blocks` is reached.
///
/// In each block the encoder inspects (through feedback) the estimates of the
/// receivers that are still listening and sends the confirm symbol only if all
/// of them are correct. A receiver stops at the end of the first block whose
/// control segment passes its typicality test and keeps that block's estimate.
pub fn run_session<R: Rng + ?Sized>(
    ctx: &SessionContext,
    codebook: &Codebook,
    cfg: &ResolvedConfig,
    message: usize,
    rng: &mut R,
) -> SessionOutcome {
    let k = ctx.decoders.len();
    let n = codebook.message_len();
    let mut active = vec![true; k];
    let mut tau = vec![0usize; k];
    let mut estimates = vec![None; k];
    let mut tallies = vec![BlockTally::default(); k];
    let mut received: Vec<Vec<u8>> = vec![vec![0u8; n]; k];
    let mut counts: Vec<Vec<u64>> = ctx.confirm_rows.iter().map(|r| vec![0u64; r.len()]).collect();
    let confirm_rows: Vec<&[f64]> = ctx.confirm_rows.iter().map(|r| r.as_slice()).collect();
    let mut ys = vec![0usize; k];
    let word = codebook.word(message);

    let mut blocks = 0;
    while blocks < cfg.max_blocks && active.iter().any(|&a| a) {
        blocks += 1;
        for (t, &x) in word.iter().enumerate() {
            ctx.sampler.sample_into(rng, x as usize, &mut ys);
            for (j, &y) in ys.iter().enumerate() {
                received[j][t] = y as u8;
            }
        }
        let block_estimates: Vec<Option<usize>> = (0..k)
            .map(|j| active[j].then(|| ctx.decoders[j].decode(&received[j], codebook)))
            .collect();
        let all_correct = block_estimates.iter().flatten().all(|&w| w == message);
        let x = if all_correct { codebook.x_c } else { codebook.x_e };
        ctx.sampler.counts(rng, x, codebook.control_len, &mut counts);
        let accepted = decode_control(&counts, codebook.control_len, &confirm_rows, cfg.delta);
        for j in 0..k {
            let Some(est) = block_estimates[j] else { continue };
            let tally = &mut tallies[j];
            tally.active_blocks += 1;
            tally.message_errors += u64::from(est != message);
            if all_correct {
                tally.confirm_sent += 1;
                tally.confirm_rejected += u64::from(!accepted[j]);
            } else {
                tally.deny_sent += 1;
                tally.deny_accepted += u64::from(accepted[j]);
            }
            if accepted[j] {
                active[j] = false;
                tau[j] = blocks * cfg.block_len;
                estimates[j] = Some(est);
            } else {
                tally.repeats += 1;
            }
        }
    }
    let truncated = active.iter().any(|&a| a);
    for j in 0..k {
        if active[j] {
            tau[j] = cfg.max_blocks * cfg.block_len;
        }
    }
    SessionOutcome {
        message,
        tau,
        estimates,
        blocks,
        truncated,
        tallies,
    }
}
