//! Exhaustive verification of the converse inequalities on small instances.
//!
//! For a channel, a deterministic feedback encoder and a uniform message, the
//! exact posterior of the message given each branch's output history is
//! enumerated up to a horizon, and every inequality is checked on every
//! realizable history.

mod checks;
mod enumerate;
mod policy;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use checks::{
    check_fano_stopping, check_lemma4, check_lemma6, check_lemma7, check_lemma8, check_logsum, check_martingale,
    CheckReport, StoppingRule, Witness, MARTINGALE_TOLERANCE, SLACK,
};
pub use enumerate::{check_state_budget, enumerate_posteriors, history_symbols, BranchTable, PosteriorState, MAX_STATES};
pub use policy::{FeedbackEcho, Policy, PolicyKind, RandomTable, Repetition};

use crate::error::Result;
use crate::info::{summarize, InfoSummary};
use crate::probability::BroadcastChannel;
use crate::random::{random_broadcast, RandomChannelSpec};

/// Clipping levels used for the clipped-drop check.
pub const CLIP_LEVELS: [f64; 3] = [0.0, 0.5, 2.0];
/// Accuracy of the capacities; the checks compare against certified upper
/// bounds, so this only affects how tight they are.
const INFO_TOL: f64 = 1e-7;

/// A channel with an encoder, message count, horizon and stopping rules.
pub struct Instance {
    pub id: u64,
    pub channel: BroadcastChannel,
    pub policy: Box<dyn Policy>,
    pub messages: usize,
    pub n_max: usize,
    pub stopping: Vec<StoppingRule>,
}

impl std::fmt::Debug for Instance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Instance")
            .field("id", &self.id)
            .field("policy", &self.policy.describe())
            .field("messages", &self.messages)
            .field("n_max", &self.n_max)
            .finish()
    }
}

fn instance_rng(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn random_policy<R: Rng + ?Sized>(rng: &mut R, bc: &BroadcastChannel, messages: usize, n_max: usize) -> Box<dyn Policy> {
    let inputs = bc.input_size();
    match rng.random_range(0..3) {
        0 => Box::new(Repetition { inputs }),
        1 => Box::new(FeedbackEcho { inputs }),
        _ => {
            let joint: usize = bc.output_sizes().iter().product();
            Box::new(RandomTable::new(rng, inputs, messages, joint, n_max))
        }
    }
}

fn stopping_rules<R: Rng + ?Sized>(rng: &mut R, n_max: usize) -> Vec<StoppingRule> {
    vec![
        StoppingRule::Fixed(n_max),
        StoppingRule::Fixed(rng.random_range(0..=n_max)),
        StoppingRule::Confidence {
            threshold: rng.random_range(0.5..0.95),
        },
        StoppingRule::Random {
            seed: rng.random(),
            prob: rng.random_range(0.2..0.8),
        },
    ]
}

/// Seeded random instance: `|X|, |Y_j|` in {2, 3}, `K` in {1, 2}, `M` in
/// 2..=4, horizon in 1..=3, strictly positive channel entries.
pub fn random_instance(seed: u64, id: u64) -> Result<Instance> {
    random_instance_shaped(seed, id, &InstanceShape::default())
}

/// Overrides for the message count and horizon of generated instances.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InstanceShape {
    pub messages: Option<usize>,
    pub n_max: Option<usize>,
}

pub fn random_instance_shaped(seed: u64, id: u64, shape: &InstanceShape) -> Result<Instance> {
    let mut rng = instance_rng(seed, id);
    let inputs = rng.random_range(2..=3);
    let k = rng.random_range(1..=2);
    let outputs = (0..k).map(|_| rng.random_range(2..=3)).collect();
    let spec = RandomChannelSpec {
        inputs,
        outputs,
        floor: if rng.random_bool(0.5) { 0.0 } else { 0.05 },
        with_joint: rng.random_bool(0.5),
    };
    let channel = random_broadcast(&mut rng, &spec)?;
    let messages = rng.random_range(2..=4);
    let n_max = rng.random_range(1..=3);
    let messages = shape.messages.unwrap_or(messages);
    let n_max = shape.n_max.unwrap_or(n_max);
    check_state_budget(messages, channel.output_sizes().iter().product(), n_max)?;
    let policy = random_policy(&mut rng, &channel, messages, n_max);
    let stopping = stopping_rules(&mut rng, n_max);
    Ok(Instance {
        id,
        channel,
        policy,
        messages,
        n_max,
        stopping,
    })
}

/// Instances on a fixed channel: one per policy kind.
pub fn channel_instances(bc: &BroadcastChannel, messages: usize, n_max: usize, seed: u64) -> Result<Vec<Instance>> {
    let inputs = bc.input_size();
    let joint: usize = bc.output_sizes().iter().product();
    check_state_budget(messages, joint, n_max)?;
    Ok((0..3u64)
        .map(|id| {
            let mut rng = instance_rng(seed, id);
            let policy: Box<dyn Policy> = match id {
                0 => Box::new(Repetition { inputs }),
                1 => Box::new(FeedbackEcho { inputs }),
                _ => Box::new(RandomTable::new(&mut rng, inputs, messages, joint, n_max)),
            };
            Instance {
                id,
                channel: bc.clone(),
                policy,
                messages,
                n_max,
                stopping: stopping_rules(&mut rng, n_max),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceReport {
    pub id: u64,
    pub checks: Vec<CheckReport>,
}

/// Runs every posterior-based check on one instance.
pub fn run_instance(instance: &Instance) -> Result<InstanceReport> {
    let info = summarize(&instance.channel, INFO_TOL)?;
    run_instance_with(instance, &info)
}

pub fn run_instance_with(instance: &Instance, info: &InfoSummary) -> Result<InstanceReport> {
    let states = enumerate_posteriors(&instance.channel, instance.policy.as_ref(), instance.messages, instance.n_max)?;
    let mut checks = vec![
        check_lemma4(&states, info),
        check_lemma6(&states, info),
        check_lemma7(&states, info),
    ];
    let mut clipped = CheckReport::new("lemma8_clipped_log_drop");
    for a in CLIP_LEVELS {
        clipped.merge(&check_lemma8(&states, info, a), None);
    }
    // the pointwise bound implies the clipped one
    let mut consistency = CheckReport::new("lemma7_implies_lemma8");
    let violated = checks[2].passed && !clipped.passed;
    consistency.record(f64::from(u8::from(violated)), 0.0, || Witness {
        instance: Some(instance.id),
        branch: None,
        n: None,
        history: Vec::new(),
        value: 0.0,
        bound: 0.0,
    });
    checks.push(clipped);
    checks.push(consistency);
    let mut fano = CheckReport::new("fano_at_stopping");
    for rule in &instance.stopping {
        fano.merge(&check_fano_stopping(&states, rule, instance.messages)?, None);
    }
    checks.push(fano);
    checks.push(check_martingale(&states));
    Ok(InstanceReport { id: instance.id, checks })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub instances: u64,
    pub logsum_trials: u64,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Runs all instances (in parallel), the log-sum check, and merges the
/// results in instance order.
pub fn run_suite(instances: &[Instance], logsum_trials: u64, seed: u64) -> Result<VerifyReport> {
    let reports = instances
        .par_iter()
        .map(run_instance)
        .collect::<Result<Vec<_>>>()?;
    let mut merged: Vec<CheckReport> = Vec::new();
    for r in &reports {
        for c in &r.checks {
            match merged.iter_mut().find(|m| m.name == c.name) {
                Some(m) => m.merge(c, Some(r.id)),
                None => {
                    let mut fresh = CheckReport::with_tolerance(&c.name, tolerance_for(&c.name));
                    fresh.merge(c, Some(r.id));
                    merged.push(fresh);
                }
            }
        }
    }
    let mut rng = instance_rng(seed, u64::MAX);
    merged.push(check_logsum(logsum_trials, &mut rng));
    Ok(VerifyReport {
        seed,
        instances: instances.len() as u64,
        logsum_trials,
        passed: merged.iter().all(|c| c.passed),
        checks: merged,
    })
}

fn tolerance_for(name: &str) -> f64 {
    if name == "posterior_martingale" {
        MARTINGALE_TOLERANCE
    } else {
        SLACK
    }
}

/// `count` seeded random instances with ids `0..count`.
pub fn random_instances(seed: u64, count: u64) -> Result<Vec<Instance>> {
    random_instances_shaped(seed, count, &InstanceShape::default())
}

pub fn random_instances_shaped(seed: u64, count: u64, shape: &InstanceShape) -> Result<Vec<Instance>> {
    (0..count).map(|id| random_instance_shaped(seed, id, shape)).collect()
}
