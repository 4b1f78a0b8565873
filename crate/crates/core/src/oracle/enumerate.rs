use serde::Serialize;

use super::policy::Policy;
use crate::error::{Error, Result};
use crate::probability::{entropy_raw, unflatten, BroadcastChannel, JointLaw};

/// Largest `M * prod_j |Y_j|^n_max` accepted by the enumerator.
pub const MAX_STATES: usize = 1_000_000;

/// Exact message posteriors given one branch's output history.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchTable {
    pub outputs: usize,
    pub messages: usize,
    /// `P(Y_j^n = h)`, histories in base `outputs` with the oldest symbol most
    /// significant.
    pub prob: Vec<f64>,
    /// `P(W = i | Y_j^n = h)` at `h * messages + i`.
    pub posterior: Vec<f64>,
    /// `H(W | Y_j^n = h)`.
    pub entropy: Vec<f64>,
}

impl BranchTable {
    pub fn histories(&self) -> usize {
        self.prob.len()
    }

    pub fn posterior_of(&self, h: usize) -> &[f64] {
        &self.posterior[h * self.messages..(h + 1) * self.messages]
    }

    /// Index of the history `h` extended by output `y`.
    pub fn child(&self, h: usize, y: usize) -> usize {
        h * self.outputs + y
    }
}

/// Posterior tables of every branch at time `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorState {
    pub n: usize,
    pub branches: Vec<BranchTable>,
}

/// Decodes a base-`radix` history index into its symbols, oldest first.
pub fn history_symbols(mut index: usize, radix: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = index % radix;
        index /= radix;
    }
    out
}

/// Rejects enumerations with more than [`MAX_STATES`] `(message, history)`
/// pairs at the horizon.
pub fn check_state_budget(messages: usize, joint_outputs: usize, n_max: usize) -> Result<()> {
    if messages == 0 {
        return Err(Error::Config("at least one message is required".into()));
    }
    let mut states = messages as f64;
    for _ in 0..n_max {
        states *= joint_outputs as f64;
        if states > MAX_STATES as f64 {
            return Err(Error::Size(format!(
                "{messages} messages x {joint_outputs}^{n_max} joint histories exceeds {MAX_STATES} states"
            )));
        }
    }
    Ok(())
}

/// Exact forward enumeration of `(W, Y_1^n, ..., Y_K^n)` for `n = 0..=n_max`
/// with `W` uniform on `M` messages.
pub fn enumerate_posteriors(bc: &BroadcastChannel, policy: &dyn Policy, messages: usize, n_max: usize) -> Result<Vec<PosteriorState>> {
    let dims = bc.output_sizes();
    let joint_outputs: usize = dims.iter().product();
    check_state_budget(messages, joint_outputs, n_max)?;
    let product;
    let joint: &JointLaw = match bc.joint() {
        Some(j) => j,
        None => {
            product = JointLaw::product(bc.branches())?;
            &product
        }
    };
    let k = dims.len();
    // component of each joint symbol on each branch
    let mut components = vec![vec![0usize; joint_outputs]; k];
    let mut ys = vec![0; k];
    for y in 0..joint_outputs {
        unflatten(y, &dims, &mut ys);
        for j in 0..k {
            components[j][y] = ys[j];
        }
    }

    // level arrays: P(W = w, joint history = h) at w * count + h
    let mut level = vec![1.0 / messages as f64; messages];
    let mut count = 1usize;
    // projection of each joint history onto each branch history
    let mut projections: Vec<Vec<usize>> = vec![vec![0]; k];
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        out.push(branch_tables(n, &level, count, messages, &projections, &dims));
        if n == n_max {
            break;
        }
        let next_count = count * joint_outputs;
        let mut next = vec![0.0; messages * next_count];
        for w in 0..messages {
            for h in 0..count {
                let p = level[w * count + h];
                if p == 0.0 {
                    continue;
                }
                let x = policy.input(w, &history_symbols(h, joint_outputs, n));
                let slice = joint.slice(x);
                let base = w * next_count + h * joint_outputs;
                for (y, &py) in slice.iter().enumerate() {
                    next[base + y] = p * py;
                }
            }
        }
        for (j, proj) in projections.iter_mut().enumerate() {
            let mut np = vec![0usize; next_count];
            for h in 0..count {
                for y in 0..joint_outputs {
                    np[h * joint_outputs + y] = proj[h] * dims[j] + components[j][y];
                }
            }
            *proj = np;
        }
        level = next;
        count = next_count;
    }
    Ok(out)
}

fn branch_tables(n: usize, level: &[f64], count: usize, messages: usize, projections: &[Vec<usize>], dims: &[usize]) -> PosteriorState {
    let branches = dims
        .iter()
        .zip(projections)
        .map(|(&outputs, proj)| {
            let histories = outputs.pow(n as u32);
            let mut joint = vec![0.0; histories * messages];
            for w in 0..messages {
                for h in 0..count {
                    joint[proj[h] * messages + w] += level[w * count + h];
                }
            }
            let mut prob = vec![0.0; histories];
            let mut posterior = vec![0.0; histories * messages];
            let mut entropy = vec![0.0; histories];
            for h in 0..histories {
                let row = &joint[h * messages..(h + 1) * messages];
                let total: f64 = row.iter().sum();
                prob[h] = total;
                if total > 0.0 {
                    let post = &mut posterior[h * messages..(h + 1) * messages];
                    for (p, r) in post.iter_mut().zip(row) {
                        *p = r / total;
                    }
                    entropy[h] = entropy_raw(post);
                }
            }
            BranchTable {
                outputs,
                messages,
                prob,
                posterior,
                entropy,
            }
        })
        .collect();
    PosteriorState { n, branches }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::policy::Repetition;
    use crate::probability::{binary_entropy, ChannelMatrix, Distribution};

    #[test]
    fn initial_state_is_uniform() {
        let bc = BroadcastChannel::new(vec![ChannelMatrix::bsc(0.1).unwrap()]).unwrap();
        let states = enumerate_posteriors(&bc, &Repetition { inputs: 2 }, 4, 0).unwrap();
        assert_eq!(states.len(), 1);
        let t = &states[0].branches[0];
        assert_eq!(t.posterior_of(0), &[0.25; 4]);
        assert!((t.entropy[0] - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn flat_channel_keeps_posterior_uniform() {
        let flat = ChannelMatrix::constant(2, Distribution::new(vec![0.4, 0.6]).unwrap()).unwrap();
        let bc = BroadcastChannel::new(vec![flat]).unwrap();
        let states = enumerate_posteriors(&bc, &Repetition { inputs: 2 }, 3, 3).unwrap();
        for s in &states {
            let t = &s.branches[0];
            for h in 0..t.histories() {
                for p in t.posterior_of(h) {
                    assert!((p - 1.0 / 3.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn one_step_bayes_update() {
        let bc = BroadcastChannel::new(vec![ChannelMatrix::bsc(0.1).unwrap()]).unwrap();
        let states = enumerate_posteriors(&bc, &Repetition { inputs: 2 }, 2, 1).unwrap();
        let t = &states[1].branches[0];
        // y = 0 matches codeword of message 0
        assert!((t.posterior_of(0)[0] - 0.9).abs() < 1e-12);
        assert!((t.posterior_of(0)[1] - 0.1).abs() < 1e-12);
        assert!((t.entropy[0] - binary_entropy(0.1).unwrap()).abs() < 1e-12);
        assert!((t.prob[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn size_limit() {
        let bc = BroadcastChannel::new(vec![ChannelMatrix::bsc(0.1).unwrap(), ChannelMatrix::bsc(0.2).unwrap()]).unwrap();
        assert!(matches!(
            enumerate_posteriors(&bc, &Repetition { inputs: 2 }, 4, 12),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn history_decoding() {
        assert_eq!(history_symbols(5, 2, 3), vec![1, 0, 1]);
        assert_eq!(history_symbols(0, 3, 0), Vec::<usize>::new());
    }
}
