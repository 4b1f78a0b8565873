use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::Rng;

use super::config::ResolvedConfig;
use crate::error::{Error, Result};
use crate::probability::Distribution;

/// Random message codebook plus the two constant control words.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    /// `messages * message_len` input symbols, codeword-major.
    words: Vec<u8>,
    messages: usize,
    message_len: usize,
    pub control_len: usize,
    pub x_c: usize,
    pub x_e: usize,
}

impl Codebook {
    pub fn messages(&self) -> usize {
        self.messages
    }

    pub fn message_len(&self) -> usize {
        self.message_len
    }

    pub fn word(&self, w: usize) -> &[u8] {
        &self.words[w * self.message_len..(w + 1) * self.message_len]
    }
}

/// Draws every message-word letter i.i.d. from `input` (the max-min capacity
/// achieving law).
pub fn build_codebook<R: Rng + ?Sized>(input: &Distribution, cfg: &ResolvedConfig, rng: &mut R) -> Result<Codebook> {
    if input.len() > u8::MAX as usize + 1 {
        return Err(Error::Unsupported(format!("input alphabets above 256 symbols ({})", input.len())));
    }
    if cfg.x_c == cfg.x_e {
        return Err(Error::Hypothesis("control symbols coincide".into()));
    }
    let sampler = WeightedIndex::new(input.probs()).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let total = cfg.messages * cfg.message_len;
    let words = (0..total).map(|_| sampler.sample(rng) as u8).collect();
    Ok(Codebook {
        words,
        messages: cfg.messages,
        message_len: cfg.message_len,
        control_len: cfg.control_len,
        x_c: cfg.x_c,
        x_e: cfg.x_e,
    })
}
