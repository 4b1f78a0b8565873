use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::Rng;
use rand_distr::Binomial;

use crate::error::{Error, Result};
use crate::probability::{unflatten, BroadcastChannel};

/// Draws channel outputs for all branches at once, from the joint law when
/// the channel has one and independently per branch otherwise.
#[derive(Debug, Clone)]
pub struct OutputSampler {
    mode: Mode,
    dims: Vec<usize>,
}

#[derive(Debug, Clone)]
enum Mode {
    /// `per_input[x]` samples a flattened output tuple.
    Joint { per_input: Vec<WeightedIndex<f64>>, slices: Vec<Vec<f64>> },
    /// `per_branch[j][x]` samples the output of branch `j`.
    Independent { per_branch: Vec<Vec<WeightedIndex<f64>>>, rows: Vec<Vec<Vec<f64>>> },
}

fn weighted(w: &[f64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(w).map_err(|e| Error::InvalidDistribution(e.to_string()))
}

/// Multinomial counts over `probs` for `n` draws via sequential binomials.
pub fn multinomial<R: Rng + ?Sized>(rng: &mut R, probs: &[f64], n: u64, out: &mut [u64]) {
    let mut left = n;
    let mut mass = 1.0;
    let last = probs.len() - 1;
    for (i, (&p, slot)) in probs.iter().zip(out.iter_mut()).enumerate() {
        if left == 0 || i == last {
            *slot = if i == last { left } else { 0 };
            left -= *slot;
            continue;
        }
        let ratio = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(left, ratio).expect("probability in [0, 1]").sample(rng);
        *slot = draw;
        left -= draw;
        mass -= p;
    }
}

impl OutputSampler {
    pub fn new(bc: &BroadcastChannel) -> Result<Self> {
        let dims = bc.output_sizes();
        if dims.iter().any(|&d| d > u8::MAX as usize + 1) {
            return Err(Error::Unsupported("output alphabets above 256 symbols".into()));
        }
        let mode = match bc.joint() {
            Some(joint) => {
                let slices: Vec<Vec<f64>> = (0..bc.input_size()).map(|x| joint.slice(x).to_vec()).collect();
                Mode::Joint {
                    per_input: slices.iter().map(|s| weighted(s)).collect::<Result<_>>()?,
                    slices,
                }
            }
            None => {
                let rows: Vec<Vec<Vec<f64>>> = bc.branches().iter().map(|w| w.to_rows()).collect();
                Mode::Independent {
                    per_branch: rows
                        .iter()
                        .map(|b| b.iter().map(|r| weighted(r)).collect::<Result<Vec<_>>>())
                        .collect::<Result<_>>()?,
                    rows,
                }
            }
        };
        Ok(OutputSampler { mode, dims })
    }

    pub fn branches(&self) -> usize {
        self.dims.len()
    }

    /// Appends one output symbol per branch for input `x`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, x: usize, ys: &mut [usize]) {
        match &self.mode {
            Mode::Joint { per_input, .. } => unflatten(per_input[x].sample(rng), &self.dims, ys),
            Mode::Independent { per_branch, .. } => {
                for (y, b) in ys.iter_mut().zip(per_branch) {
                    *y = b[x].sample(rng);
                }
            }
        }
    }

    /// Per-branch output counts for `n` uses with constant input `x`.
    pub fn counts<R: Rng + ?Sized>(&self, rng: &mut R, x: usize, n: usize, out: &mut [Vec<u64>]) {
        for c in out.iter_mut() {
            c.iter_mut().for_each(|v| *v = 0);
        }
        match &self.mode {
            Mode::Joint { slices, .. } => {
                let mut cells = vec![0u64; slices[x].len()];
                multinomial(rng, &slices[x], n as u64, &mut cells);
                let mut ys = vec![0usize; self.dims.len()];
                for (flat, &c) in cells.iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    unflatten(flat, &self.dims, &mut ys);
                    for (j, &y) in ys.iter().enumerate() {
                        out[j][y] += c;
                    }
                }
            }
            Mode::Independent { rows, .. } => {
                for (j, b) in rows.iter().enumerate() {
                    multinomial(rng, &b[x], n as u64, &mut out[j]);
                }
            }
        }
    }
}
