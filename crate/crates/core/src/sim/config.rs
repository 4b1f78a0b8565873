use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::InfoSummary;
use crate::probability::ExtReal;

/// Largest message set the explicit maximum-likelihood decoder accepts.
pub const MAX_MESSAGES: u64 = 1 << 16;
pub const DEFAULT_DELTA: f64 = 0.3;
pub const DEFAULT_MAX_BLOCKS: usize = 100;

/// User-facing parameters of the two-phase block scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    /// Target rate in nats per channel use.
    pub rate: f64,
    /// Block length `L`.
    pub block_len: usize,
    /// Message-mode fraction; derived as `R / (C - epsilon)` when absent.
    pub gamma: Option<f64>,
    /// Relative half-width of the typicality band.
    pub delta: f64,
    /// Capacity backoff; defaults to `(C - R) / 2`.
    pub epsilon: Option<f64>,
    /// Message count; defaults to `ceil(e^{RL})`.
    pub messages: Option<u64>,
    pub trials: usize,
    pub seed: u64,
    pub max_blocks: usize,
    /// Use one codebook for all sessions instead of a fresh draw per session.
    pub fixed_codebook: bool,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            rate: 0.0,
            block_len: 100,
            gamma: None,
            delta: DEFAULT_DELTA,
            epsilon: None,
            messages: None,
            trials: 1000,
            seed: 0,
            max_blocks: DEFAULT_MAX_BLOCKS,
            fixed_codebook: false,
        }
    }
}

/// Fully determined scheme parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub rate: f64,
    pub block_len: usize,
    pub gamma: f64,
    pub epsilon: Option<f64>,
    /// `max(1, round(gamma L))`, at most `L - 1`.
    pub message_len: usize,
    /// `L - message_len`.
    pub control_len: usize,
    pub delta: f64,
    pub messages: usize,
    pub trials: usize,
    pub seed: u64,
    pub max_blocks: usize,
    pub fixed_codebook: bool,
    pub x_c: usize,
    pub x_e: usize,
}

impl SchemeConfig {
    pub fn resolve(&self, info: &InfoSummary) -> Result<ResolvedConfig> {
        if self.block_len < 2 {
            return Err(Error::Config(format!("block length must be at least 2, got {}", self.block_len)));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.max_blocks == 0 {
            return Err(Error::Config("max_blocks must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.rate >= 0.0 && self.rate < info.c) {
            return Err(Error::RateOutOfRange {
                rate: self.rate,
                limit: info.c,
            });
        }
        if info.b == ExtReal::Finite(0.0) {
            return Err(Error::Hypothesis("no input pair separates the control symbols (B = 0)".into()));
        }
        let (gamma, epsilon) = match self.gamma {
            Some(g) => {
                if !(g > 0.0 && g < 1.0) {
                    return Err(Error::Config(format!("gamma must lie in (0, 1), got {g}")));
                }
                (g, self.epsilon)
            }
            None => {
                let eps = self.epsilon.unwrap_or((info.c - self.rate) / 2.0);
                if !(eps >= 0.0 && eps < info.c - self.rate) {
                    return Err(Error::Config(format!(
                        "epsilon must lie in [0, C - R) = [0, {}), got {eps}",
                        info.c - self.rate
                    )));
                }
                (self.rate / (info.c - eps), Some(eps))
            }
        };
        let l = self.block_len;
        let message_len = ((gamma * l as f64).round() as usize).clamp(1, l - 1);
        let messages = match self.messages {
            Some(m) => m,
            None => {
                let m = (self.rate * l as f64).exp().ceil();
                if m > MAX_MESSAGES as f64 {
                    return Err(Error::Size(format!(
                        "ceil(e^(RL)) = {m:.3e} messages exceeds the decoder limit {MAX_MESSAGES}; \
                         lower R or L, or override the message count"
                    )));
                }
                (m as u64).max(2)
            }
        };
        if messages < 2 {
            return Err(Error::Config(format!("at least 2 messages are required, got {messages}")));
        }
        if messages > MAX_MESSAGES {
            return Err(Error::Size(format!("{messages} messages exceeds the decoder limit {MAX_MESSAGES}")));
        }
        let (x_c, x_e) = info.control_pair();
        Ok(ResolvedConfig {
            rate: self.rate,
            block_len: l,
            gamma,
            epsilon,
            message_len,
            control_len: l - message_len,
            delta: self.delta,
            messages: messages as usize,
            trials: self.trials,
            seed: self.seed,
            max_blocks: self.max_blocks,
            fixed_codebook: self.fixed_codebook,
            x_c,
            x_e,
        })
    }
}
