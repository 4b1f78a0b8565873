use super::codebook::Codebook;
use crate::probability::ChannelMatrix;

/// Scores closer than this count as ties and go to the smaller index.
const TIE_TOLERANCE: f64 = 1e-9;

/// Maximum-likelihood message decoder for one branch.
#[derive(Debug, Clone)]
pub struct MlDecoder {
    /// `log_w[x * outputs + y] = ln W(y|x)`.
    log_w: Vec<f64>,
    inputs: usize,
    outputs: usize,
}

impl MlDecoder {
    pub fn new(w: &ChannelMatrix) -> Self {
        let mut log_w = Vec::with_capacity(w.inputs() * w.outputs());
        for x in 0..w.inputs() {
            for y in 0..w.outputs() {
                log_w.push(w.get(x, y).ln());
            }
        }
        MlDecoder {
            log_w,
            inputs: w.inputs(),
            outputs: w.outputs(),
        }
    }

    /// `argmax_w prod_t W(y_t | c_w(t))`, ties to the smallest index.
    pub fn decode(&self, outputs: &[u8], codebook: &Codebook) -> usize {
        debug_assert_eq!(outputs.len(), codebook.message_len());
        // per-position score column indexed by input symbol
        let mut columns = vec![0.0; outputs.len() * self.inputs];
        for (t, &y) in outputs.iter().enumerate() {
            for x in 0..self.inputs {
                columns[t * self.inputs + x] = self.log_w[x * self.outputs + y as usize];
            }
        }
        let score = |w: usize| -> f64 {
            codebook
                .word(w)
                .iter()
                .enumerate()
                .map(|(t, &x)| columns[t * self.inputs + x as usize])
                .sum()
        };
        let mut best = 0;
        let mut best_score = score(0);
        for w in 1..codebook.messages() {
            let s = score(w);
            if s > best_score + TIE_TOLERANCE {
                best = w;
                best_score = s;
            }
        }
        best
    }
}

/// One maximum-likelihood decision per receiver.
pub fn decode_message(outputs: &[Vec<u8>], codebook: &Codebook, decoders: &[MlDecoder]) -> Vec<usize> {
    outputs.iter().zip(decoders).map(|(y, d)| d.decode(y, codebook)).collect()
}

/// Frequency typicality test: accept the confirm symbol iff every letter's
/// empirical frequency lies in `[(1-delta) P(y|x_c), (1+delta) P(y|x_c)]`.
pub fn typical(counts: &[u64], control_len: usize, row: &[f64], delta: f64) -> bool {
    let l = control_len as f64;
    counts.iter().zip(row).all(|(&c, &p)| {
        let f = c as f64 / l;
        (1.0 - delta) * p <= f && f <= (1.0 + delta) * p
    })
}

/// Control decision per receiver: `true` for confirm.
pub fn decode_control(counts: &[Vec<u64>], control_len: usize, confirm_rows: &[&[f64]], delta: f64) -> Vec<bool> {
    counts
        .iter()
        .zip(confirm_rows)
        .map(|(c, row)| typical(c, control_len, row, delta))
        .collect()
}
