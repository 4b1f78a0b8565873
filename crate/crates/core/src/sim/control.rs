//! Error rates of the control-mode typicality test in isolation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::decode::typical;
use super::sampler::multinomial;
use super::stats::Proportion;
use crate::error::{Error, Result};

/// Monte Carlo estimates of the two control error probabilities for one
/// branch: accepting while the deny row is sent, and rejecting while the
/// confirm row is sent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlErrorRates {
    pub control_len: usize,
    pub deny_accepted: Proportion,
    pub confirm_rejected: Proportion,
}

pub fn estimate_control_errors(
    confirm: &[f64],
    deny: &[f64],
    control_len: usize,
    delta: f64,
    samples: u64,
    seed: u64,
) -> Result<ControlErrorRates> {
    if confirm.len() != deny.len() {
        return Err(Error::Dimension("control rows have different lengths".into()));
    }
    if control_len == 0 || samples == 0 {
        return Err(Error::Config("control length and sample count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; confirm.len()];
    let mut accepted_deny = 0;
    let mut rejected_confirm = 0;
    for _ in 0..samples {
        multinomial(&mut rng, deny, control_len as u64, &mut counts);
        accepted_deny += u64::from(typical(&counts, control_len, confirm, delta));
        multinomial(&mut rng, confirm, control_len as u64, &mut counts);
        rejected_confirm += u64::from(!typical(&counts, control_len, confirm, delta));
    }
    Ok(ControlErrorRates {
        control_len,
        deny_accepted: Proportion::new(accepted_deny, samples),
        confirm_rejected: Proportion::new(rejected_confirm, samples),
    })
}

/// Exact probability that `l` binary draws with success probability `p1`
/// pass the typicality test around `(1 - c1, c1)`.
pub fn binary_acceptance(c1: f64, p1: f64, control_len: usize, delta: f64) -> f64 {
    let l = control_len;
    let row = [1.0 - c1, c1];
    let ln_p = p1.ln();
    let ln_q = (1.0 - p1).ln();
    let mut ln_fact = vec![0.0f64; l + 1];
    for i in 1..=l {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    (0..=l)
        .filter(|&k| typical(&[(l - k) as u64, k as u64], l, &row, delta))
        .map(|k| {
            let mut lp = ln_fact[l] - ln_fact[k] - ln_fact[l - k];
            if k > 0 {
                lp += k as f64 * ln_p;
            }
            if k < l {
                lp += (l - k) as f64 * ln_q;
            }
            lp.exp()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_acceptance_against_monte_carlo() {
        let exact = binary_acceptance(0.1, 0.1, 1000, 0.5);
        assert!(exact >= 0.99, "{exact}");
        let mc = estimate_control_errors(&[0.9, 0.1], &[0.1, 0.9], 1000, 0.5, 20_000, 1).unwrap();
        let rej = mc.confirm_rejected;
        assert!(rej.ci_low <= 1.0 - exact + 1e-3 && 1.0 - exact <= rej.ci_high + 1e-3);
        assert_eq!(mc.deny_accepted.successes, 0);
    }
}
