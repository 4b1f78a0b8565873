//! Seeded generators for random distributions and channels.
//!
//! Used by the verification suite and by tests that quantify over channels.

use rand::Rng;
use rand_distr::Exp1;

use crate::error::Result;
use crate::probability::{BroadcastChannel, ChannelMatrix, Distribution, JointLaw};

/// Uniform draw from the simplex, each entry floored at `floor` before
/// renormalizing (a positive floor yields strictly positive laws).
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, n: usize, floor: f64) -> Distribution {
    let w: Vec<f64> = (0..n)
        .map(|_| {
            let e: f64 = rng.sample(Exp1);
            e + floor
        })
        .collect();
    Distribution::from_weights(&w).expect("exponential weights are positive")
}

pub fn random_channel_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    inputs: usize,
    outputs: usize,
    floor: f64,
) -> ChannelMatrix {
    let rows = (0..inputs)
        .map(|_| random_distribution(rng, outputs, floor))
        .collect();
    ChannelMatrix::from_distributions(rows).expect("rows share a length")
}

/// Shape of a randomly generated broadcast channel.
#[derive(Debug, Clone)]
pub struct RandomChannelSpec {
    pub inputs: usize,
    pub outputs: Vec<usize>,
    /// Entry floor before normalization; zero allows near-zero entries.
    pub floor: f64,
    /// Draw a correlated joint law (branches are its marginals) instead of
    /// independent branch matrices.
    pub with_joint: bool,
}

pub fn random_broadcast<R: Rng + ?Sized>(rng: &mut R, spec: &RandomChannelSpec) -> Result<BroadcastChannel> {
    if spec.with_joint {
        let slice: usize = spec.outputs.iter().product();
        let mut data = Vec::with_capacity(spec.inputs * slice);
        for _ in 0..spec.inputs {
            data.extend_from_slice(random_distribution(rng, slice, spec.floor).probs());
        }
        let mut shape = vec![spec.inputs];
        shape.extend(&spec.outputs);
        BroadcastChannel::from_joint(JointLaw::new(&shape, data)?)
    } else {
        let branches = spec
            .outputs
            .iter()
            .map(|&o| random_channel_matrix(rng, spec.inputs, o, spec.floor))
            .collect();
        BroadcastChannel::new(branches)
    }
}

/// A degraded chain `X -> Y_K -> ... -> Y_1`: the last branch is a random
/// matrix and each earlier branch is the next one followed by a random
/// post-processing channel, so branch 0 is degraded with respect to every
/// other branch. `outputs[j]` is the alphabet size of branch `j`. With
/// `physical` the joint law of the cascade is attached.
pub fn random_degraded<R: Rng + ?Sized>(
    rng: &mut R,
    inputs: usize,
    outputs: &[usize],
    physical: bool,
) -> Result<BroadcastChannel> {
    let k = outputs.len();
    if k == 0 {
        return BroadcastChannel::new(Vec::new());
    }
    let mut branches = vec![random_channel_matrix(rng, inputs, outputs[k - 1], 0.05)];
    // posts[j] maps Y_{j+1} to Y_j
    let mut posts = Vec::with_capacity(k - 1);
    for j in (0..k - 1).rev() {
        let post = random_channel_matrix(rng, outputs[j + 1], outputs[j], 0.05);
        let next = branches[0].compose(&post)?;
        branches.insert(0, next);
        posts.insert(0, post);
    }
    if !physical {
        return BroadcastChannel::new(branches);
    }
    let slice: usize = outputs.iter().product();
    let mut data = Vec::with_capacity(inputs * slice);
    let mut ys = vec![0usize; k];
    for x in 0..inputs {
        for flat in 0..slice {
            crate::probability::unflatten(flat, outputs, &mut ys);
            let mut p = branches[k - 1].get(x, ys[k - 1]);
            for (j, post) in posts.iter().enumerate() {
                p *= post.get(ys[j + 1], ys[j]);
            }
            data.push(p);
        }
    }
    let mut shape = vec![inputs];
    shape.extend(outputs);
    BroadcastChannel::with_joint(branches, JointLaw::new(&shape, data)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_objects_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let d = random_distribution(&mut rng, 4, 0.0);
            assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let bc = random_broadcast(
                &mut rng,
                &RandomChannelSpec {
                    inputs: 3,
                    outputs: vec![2, 3],
                    floor: 0.01,
                    with_joint: true,
                },
            )
            .unwrap();
            assert!(bc.all_entries_positive());
            let deg = random_degraded(&mut rng, 2, &[2, 2, 3], true).unwrap();
            assert!(deg.joint().is_some());
        }
    }
}
