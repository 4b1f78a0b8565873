use rand::Rng;
use serde::Serialize;

/// A deterministic feedback encoder: the input at time `n + 1` as a function
/// of the message and the first `n` joint outputs (each a flattened tuple
/// index in `0..joint_outputs`).
pub trait Policy: Send + Sync {
    fn input(&self, message: usize, history: &[usize]) -> usize;

    fn describe(&self) -> PolicyKind;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Repetition,
    FeedbackEcho,
    RandomTable,
}

/// Sends `message mod |X|` at every time, ignoring feedback.
#[derive(Debug, Clone)]
pub struct Repetition {
    pub inputs: usize,
}

impl Policy for Repetition {
    fn input(&self, message: usize, _history: &[usize]) -> usize {
        message % self.inputs
    }

    fn describe(&self) -> PolicyKind {
        PolicyKind::Repetition
    }
}

/// Shifts the message by the sum of all past joint outputs.
#[derive(Debug, Clone)]
pub struct FeedbackEcho {
    pub inputs: usize,
}

impl Policy for FeedbackEcho {
    fn input(&self, message: usize, history: &[usize]) -> usize {
        (message + history.iter().sum::<usize>()) % self.inputs
    }

    fn describe(&self) -> PolicyKind {
        PolicyKind::FeedbackEcho
    }
}

/// An explicit random map over every `(message, history)` up to a horizon.
#[derive(Debug, Clone)]
pub struct RandomTable {
    joint_outputs: usize,
    /// `offsets[n]` = number of histories shorter than `n`.
    offsets: Vec<usize>,
    per_message: usize,
    table: Vec<u8>,
}

impl RandomTable {
    pub fn new<R: Rng + ?Sized>(rng: &mut R, inputs: usize, messages: usize, joint_outputs: usize, horizon: usize) -> Self {
        let mut offsets = Vec::with_capacity(horizon + 1);
        let mut total = 0;
        let mut level = 1;
        for _ in 0..=horizon {
            offsets.push(total);
            total += level;
            level *= joint_outputs;
        }
        let table = (0..messages * total).map(|_| rng.random_range(0..inputs) as u8).collect();
        RandomTable {
            joint_outputs,
            offsets,
            per_message: total,
            table,
        }
    }
}

impl Policy for RandomTable {
    fn input(&self, message: usize, history: &[usize]) -> usize {
        let index = history.iter().fold(0, |acc, &y| acc * self.joint_outputs + y);
        self.table[message * self.per_message + self.offsets[history.len()] + index] as usize
    }

    fn describe(&self) -> PolicyKind {
        PolicyKind::RandomTable
    }
}
