//! Information quantities, channel orderings, reliability-function bounds and
//! a Monte Carlo simulator for common-message broadcast channels with
//! variable-length feedback and termination.
//!
//! All information quantities are in nats.

pub mod bounds;
pub mod error;
pub mod info;
pub mod lp;
pub mod oracle;
pub mod ordering;
pub mod probability;
pub mod random;
pub mod sim;

pub use error::{Error, Result};
pub use info::{summarize, CapacityEstimate, InfoSummary, MaxMinCapacity, PairValue};
pub use probability::{
    binary_entropy, entropy, kl_divergence, marginalize_joint, mutual_information, Alphabet, BroadcastChannel,
    ChannelMatrix, Distribution, ExtReal, JointLaw,
};
