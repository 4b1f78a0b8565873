//! Finite-alphabet probability types and elementary information functionals.
//!
//! All logarithms are natural, so every quantity is in nats. Symbols of an
//! alphabet of size `n` are the indices `0..n`.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest deviation of a row sum from one that construction silently repairs.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-9;

/// A sum this close to one is left alone: rescaling would only trade one
/// rounding error for another and break exact round trips of input files.
fn summation_noise(sum: f64, terms: usize) -> bool {
    (sum - 1.0).abs() <= terms as f64 * f64::EPSILON
}

/// Entrywise tolerance between a joint law's marginal and the declared branch.
pub const MARGINAL_TOLERANCE: f64 = 1e-9;

/// A non-negative extended real: either a finite value or `+inf`.
///
/// Divergences and likelihood ratios become infinite when absolute
/// continuity fails; keeping that as a variant makes `B_max < inf` a plain
/// predicate instead of a float comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinite => None,
        }
    }

    /// The value as an `f64`, mapping the infinite variant to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::Infinite => f64::INFINITY,
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v.is_infinite() && v > 0.0 {
            ExtReal::Infinite
        } else {
            ExtReal::Finite(v)
        }
    }

    pub fn ln(self) -> Self {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v.ln()),
            ExtReal::Infinite => ExtReal::Infinite,
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::Infinite) => Some(Ordering::Less),
            (ExtReal::Infinite, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::Infinite, ExtReal::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => serializer.serialize_f64(*v),
            ExtReal::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ExtVisitor;

        impl Visitor<'_> for ExtVisitor {
            type Value = ExtReal;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtReal, E> {
                match v {
                    "inf" | "Infinity" | "infinity" => Ok(ExtReal::Infinite),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        deserializer.deserialize_any(ExtVisitor)
    }
}

/// Number of symbols in a finite alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet(usize);

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Domain("alphabet size must be at least 1".into()));
        }
        Ok(Alphabet(size))
    }

    pub fn size(self) -> usize {
        self.0
    }
}

/// A probability mass function over `0..len`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates and renormalizes. Entries must be finite and non-negative and
    /// sum to one within [`RENORMALIZE_TOLERANCE`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty probability vector".into()));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "entry {i} is {p}, expected a finite non-negative number"
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > RENORMALIZE_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {sum}, expected 1"
            )));
        }
        let probs = if summation_noise(sum, probs.len()) {
            probs
        } else {
            probs.into_iter().map(|p| p / sum).collect()
        };
        Ok(Distribution { probs })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Alphabet::new(n)?;
        Ok(Distribution {
            probs: vec![1.0 / n as f64; n],
        })
    }

    /// Point mass on `symbol`.
    pub fn point(n: usize, symbol: usize) -> Result<Self> {
        if symbol >= n {
            return Err(Error::Domain(format!("symbol {symbol} outside alphabet of size {n}")));
        }
        let mut probs = vec![0.0; n];
        probs[symbol] = 1.0;
        Ok(Distribution { probs })
    }

    /// Bernoulli law `[1 - p, p]`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("Bernoulli parameter {p} outside [0, 1]")));
        }
        Ok(Distribution {
            probs: vec![1.0 - p, p],
        })
    }

    /// Projects an arbitrary non-negative weight vector onto the simplex by
    /// dividing by its sum.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution("weights must be non-negative with positive sum".into()));
        }
        Ok(Distribution {
            probs: weights.iter().map(|w| w / sum).collect(),
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    /// `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, lambda: f64, other: &Distribution) -> Result<Self> {
        check_len(self.len(), other.len())?;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Domain(format!("mixing weight {lambda} outside [0, 1]")));
        }
        Ok(Distribution {
            probs: self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
                .collect(),
        })
    }
}

impl<'de> Deserialize<'de> for Distribution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let probs = Vec::<f64>::deserialize(deserializer)?;
        Distribution::new(probs).map_err(de::Error::custom)
    }
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(format!("lengths {a} and {b} differ")));
    }
    Ok(())
}

/// Row-stochastic matrix `W(y|x)`: one output distribution per input symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct ChannelMatrix {
    rows: Vec<Distribution>,
    outputs: usize,
}

impl TryFrom<Vec<Vec<f64>>> for ChannelMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        ChannelMatrix::new(rows)
    }
}

impl From<ChannelMatrix> for Vec<Vec<f64>> {
    fn from(m: ChannelMatrix) -> Self {
        m.rows.into_iter().map(|r| r.probs).collect()
    }
}

impl ChannelMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Dimension("channel matrix has no rows".into()));
        }
        let outputs = rows[0].len();
        let mut out = Vec::with_capacity(rows.len());
        for (x, row) in rows.into_iter().enumerate() {
            if row.len() != outputs {
                return Err(Error::Dimension(format!(
                    "row {x} has {} entries, row 0 has {outputs}",
                    row.len()
                )));
            }
            let d = Distribution::new(row)
                .map_err(|e| Error::InvalidDistribution(format!("row {x}: {e}")))?;
            out.push(d);
        }
        Ok(ChannelMatrix { rows: out, outputs })
    }

    pub fn from_distributions(rows: Vec<Distribution>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Dimension("channel matrix has no rows".into()));
        }
        let outputs = rows[0].len();
        if rows.iter().any(|r| r.len() != outputs) {
            return Err(Error::Dimension("rows have different lengths".into()));
        }
        Ok(ChannelMatrix { rows, outputs })
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("crossover {p} outside [0, 1]")));
        }
        ChannelMatrix::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Noiseless channel on `n` symbols.
    pub fn identity(n: usize) -> Result<Self> {
        Alphabet::new(n)?;
        let rows = (0..n)
            .map(|x| Distribution::point(n, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(ChannelMatrix { rows, outputs: n })
    }

    /// Channel whose every row equals `row`: output independent of input.
    pub fn constant(inputs: usize, row: Distribution) -> Result<Self> {
        Alphabet::new(inputs)?;
        let outputs = row.len();
        Ok(ChannelMatrix {
            rows: vec![row; inputs],
            outputs,
        })
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn row(&self, x: usize) -> &Distribution {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.rows[x].probs[y]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.probs.clone()).collect()
    }

    /// Output law `sum_x px(x) W(.|x)`.
    pub fn output_distribution(&self, px: &Distribution) -> Result<Distribution> {
        check_len(px.len(), self.inputs())?;
        Ok(Distribution {
            probs: output_law(px.probs(), self),
        })
    }

    /// Matrix product `self * next`: feed this channel's output into `next`.
    pub fn compose(&self, next: &ChannelMatrix) -> Result<ChannelMatrix> {
        if self.outputs != next.inputs() {
            return Err(Error::Dimension(format!(
                "cannot compose {}-output channel with {}-input channel",
                self.outputs,
                next.inputs()
            )));
        }
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut out = vec![0.0; next.outputs];
                for (y, &p) in r.probs.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    for (z, o) in out.iter_mut().enumerate() {
                        *o += p * next.get(y, z);
                    }
                }
                Distribution::new(out)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ChannelMatrix {
            rows,
            outputs: next.outputs,
        })
    }

    /// Largest entrywise absolute difference to another matrix of the same shape.
    pub fn max_abs_diff(&self, other: &ChannelMatrix) -> Result<f64> {
        check_len(self.inputs(), other.inputs())?;
        check_len(self.outputs, other.outputs)?;
        let mut worst = 0.0f64;
        for (a, b) in self.rows.iter().zip(&other.rows) {
            for (p, q) in a.probs.iter().zip(&b.probs) {
                worst = worst.max((p - q).abs());
            }
        }
        Ok(worst)
    }

    pub fn all_entries_positive(&self) -> bool {
        self.rows.iter().all(|r| r.probs.iter().all(|&p| p > 0.0))
    }
}

pub(crate) fn output_law(px: &[f64], w: &ChannelMatrix) -> Vec<f64> {
    let mut q = vec![0.0; w.outputs()];
    for (x, &p) in px.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (y, qy) in q.iter_mut().enumerate() {
            *qy += p * w.get(x, y);
        }
    }
    q
}

/// Dense conditional tensor `P(y_1, ..., y_K | x)`.
///
/// `data` is row-major over `(x, y_1, ..., y_K)` with `y_K` varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointLaw {
    inputs: usize,
    outputs: Vec<usize>,
    data: Vec<f64>,
}

impl JointLaw {
    /// `shape` is `[|X|, |Y_1|, ..., |Y_K|]`.
    pub fn new(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        if shape.len() < 2 {
            return Err(Error::Dimension(
                "joint shape needs an input size and at least one output size".into(),
            ));
        }
        if shape.contains(&0) {
            return Err(Error::Dimension("joint shape has a zero dimension".into()));
        }
        let inputs = shape[0];
        let outputs = shape[1..].to_vec();
        let slice: usize = outputs.iter().product();
        if data.len() != inputs * slice {
            return Err(Error::Dimension(format!(
                "joint data has {} entries, shape {:?} needs {}",
                data.len(),
                shape,
                inputs * slice
            )));
        }
        let mut data = data;
        for x in 0..inputs {
            let part = &mut data[x * slice..(x + 1) * slice];
            if part.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "joint slice for input {x} has a negative or non-finite entry"
                )));
            }
            let sum: f64 = part.iter().sum();
            if (sum - 1.0).abs() > RENORMALIZE_TOLERANCE {
                return Err(Error::InvalidDistribution(format!(
                    "joint slice for input {x} sums to {sum}"
                )));
            }
            if !summation_noise(sum, part.len()) {
                part.iter_mut().for_each(|p| *p /= sum);
            }
        }
        Ok(JointLaw {
            inputs,
            outputs,
            data,
        })
    }

    /// Conditionally independent outputs given the input.
    pub fn product(branches: &[ChannelMatrix]) -> Result<Self> {
        let first = branches
            .first()
            .ok_or_else(|| Error::Dimension("no branches".into()))?;
        let inputs = first.inputs();
        if branches.iter().any(|b| b.inputs() != inputs) {
            return Err(Error::Dimension("branches disagree on input size".into()));
        }
        let outputs: Vec<usize> = branches.iter().map(|b| b.outputs()).collect();
        let slice: usize = outputs.iter().product();
        let mut data = Vec::with_capacity(inputs * slice);
        let mut ys = vec![0usize; outputs.len()];
        for x in 0..inputs {
            for flat in 0..slice {
                unflatten(flat, &outputs, &mut ys);
                data.push(
                    branches
                        .iter()
                        .zip(&ys)
                        .map(|(b, &y)| b.get(x, y))
                        .product(),
                );
            }
        }
        let mut shape = vec![inputs];
        shape.extend(&outputs);
        JointLaw::new(&shape, data)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn shape(&self) -> Vec<usize> {
        let mut s = vec![self.inputs];
        s.extend(&self.outputs);
        s
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Number of joint output tuples.
    pub fn slice_len(&self) -> usize {
        self.outputs.iter().product()
    }

    /// `P(. | x)` over flattened output tuples.
    pub fn slice(&self, x: usize) -> &[f64] {
        let n = self.slice_len();
        &self.data[x * n..(x + 1) * n]
    }

    /// Marginal `P(y_j | x)` as a channel matrix.
    pub fn marginal(&self, j: usize) -> Result<ChannelMatrix> {
        if j >= self.outputs.len() {
            return Err(Error::Domain(format!(
                "branch {j} out of range for {} branches",
                self.outputs.len()
            )));
        }
        let mut ys = vec![0usize; self.outputs.len()];
        let rows = (0..self.inputs)
            .map(|x| {
                let mut row = vec![0.0; self.outputs[j]];
                for (flat, &p) in self.slice(x).iter().enumerate() {
                    unflatten(flat, &self.outputs, &mut ys);
                    row[ys[j]] += p;
                }
                Distribution::new(row)
            })
            .collect::<Result<Vec<_>>>()?;
        ChannelMatrix::from_distributions(rows)
    }

    /// Pairwise marginal `P(y_a, y_b | x)` laid out as `[x][y_a][y_b]`.
    pub fn pair_marginal(&self, a: usize, b: usize) -> Vec<Vec<Vec<f64>>> {
        let mut ys = vec![0usize; self.outputs.len()];
        (0..self.inputs)
            .map(|x| {
                let mut t = vec![vec![0.0; self.outputs[b]]; self.outputs[a]];
                for (flat, &p) in self.slice(x).iter().enumerate() {
                    unflatten(flat, &self.outputs, &mut ys);
                    t[ys[a]][ys[b]] += p;
                }
                t
            })
            .collect()
    }
}

/// Decodes a flat index into per-coordinate symbols (last coordinate fastest).
pub fn unflatten(mut flat: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = flat % dims[k];
        flat /= dims[k];
    }
}

/// Inverse of [`unflatten`].
pub fn flatten(symbols: &[usize], dims: &[usize]) -> usize {
    symbols
        .iter()
        .zip(dims)
        .fold(0, |acc, (&s, &d)| acc * d + s)
}

/// A `K`-receiver discrete memoryless broadcast channel.
#[derive(Debug, Clone, PartialEq)]
pub struct BroadcastChannel {
    input: Alphabet,
    branches: Vec<ChannelMatrix>,
    joint: Option<JointLaw>,
}

impl BroadcastChannel {
    pub fn new(branches: Vec<ChannelMatrix>) -> Result<Self> {
        let first = branches
            .first()
            .ok_or_else(|| Error::Dimension("a broadcast channel needs at least one branch".into()))?;
        let inputs = first.inputs();
        for (j, b) in branches.iter().enumerate() {
            if b.inputs() != inputs {
                return Err(Error::Dimension(format!(
                    "branch {j} has {} rows, branch 0 has {inputs}",
                    b.inputs()
                )));
            }
        }
        Ok(BroadcastChannel {
            input: Alphabet::new(inputs)?,
            branches,
            joint: None,
        })
    }

    /// Attaches a joint law; its marginals must reproduce the branches.
    pub fn with_joint(branches: Vec<ChannelMatrix>, joint: JointLaw) -> Result<Self> {
        let mut bc = BroadcastChannel::new(branches)?;
        if joint.inputs() != bc.input_size() || joint.outputs().len() != bc.num_branches() {
            return Err(Error::Dimension(format!(
                "joint shape {:?} does not match {} inputs and {} branches",
                joint.shape(),
                bc.input_size(),
                bc.num_branches()
            )));
        }
        for (j, b) in bc.branches.iter().enumerate() {
            if joint.outputs()[j] != b.outputs() {
                return Err(Error::Dimension(format!(
                    "joint output size {} for branch {j} differs from matrix width {}",
                    joint.outputs()[j],
                    b.outputs()
                )));
            }
            let m = joint.marginal(j)?;
            let diff = m.max_abs_diff(b)?;
            if diff > MARGINAL_TOLERANCE {
                return Err(Error::InvalidDistribution(format!(
                    "joint marginal for branch {j} deviates from the branch matrix by {diff:e}"
                )));
            }
        }
        bc.joint = Some(joint);
        Ok(bc)
    }

    /// Builds the branches as marginals of `joint`.
    pub fn from_joint(joint: JointLaw) -> Result<Self> {
        let branches = (0..joint.outputs().len())
            .map(|j| joint.marginal(j))
            .collect::<Result<Vec<_>>>()?;
        BroadcastChannel::with_joint(branches, joint)
    }

    pub fn input(&self) -> Alphabet {
        self.input
    }

    pub fn input_size(&self) -> usize {
        self.input.size()
    }

    pub fn num_branches(&self) -> usize {
        self.branches.len()
    }

    pub fn branch(&self, j: usize) -> &ChannelMatrix {
        &self.branches[j]
    }

    pub fn branches(&self) -> &[ChannelMatrix] {
        &self.branches
    }

    pub fn joint(&self) -> Option<&JointLaw> {
        self.joint.as_ref()
    }

    pub fn output_sizes(&self) -> Vec<usize> {
        self.branches.iter().map(|b| b.outputs()).collect()
    }

    /// True when every entry of every branch matrix is strictly positive.
    pub fn all_entries_positive(&self) -> bool {
        self.branches.iter().all(|b| b.all_entries_positive())
    }
}

/// `D(p || q)` in nats, with `0 ln(0/q) = 0`.
pub fn kl_divergence(p: &Distribution, q: &Distribution) -> Result<ExtReal> {
    check_len(p.len(), q.len())?;
    Ok(ExtReal::from_f64(kl_raw(p.probs(), q.probs())))
}

/// Unchecked divergence; `f64::INFINITY` on an absolute-continuity failure.
pub(crate) fn kl_raw(p: &[f64], q: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            d += a * (a / b).ln();
        }
    }
    // rounding can push a zero divergence slightly negative
    d.max(0.0)
}

/// Shannon entropy in nats.
pub fn entropy(p: &Distribution) -> f64 {
    entropy_raw(p.probs())
}

pub(crate) fn entropy_raw(p: &[f64]) -> f64 {
    let h: f64 = p
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.ln())
        .sum();
    h.max(0.0)
}

/// `h(x) = -x ln x - (1-x) ln(1-x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("binary entropy argument {x} outside [0, 1]")));
    }
    Ok(entropy_raw(&[x, 1.0 - x]))
}

/// `I(X;Y)` for input law `px` through channel `w`.
pub fn mutual_information(px: &Distribution, w: &ChannelMatrix) -> Result<f64> {
    check_len(px.len(), w.inputs())?;
    Ok(mi_raw(px.probs(), w))
}

pub(crate) fn mi_raw(px: &[f64], w: &ChannelMatrix) -> f64 {
    let q = output_law(px, w);
    let mut total = 0.0;
    for (x, &p) in px.iter().enumerate() {
        if p > 0.0 {
            total += p * kl_raw(w.row(x).probs(), &q);
        }
    }
    total.max(0.0)
}

/// Marginal of the joint law onto branch `j`.
pub fn marginalize_joint(bc: &BroadcastChannel, j: usize) -> Result<ChannelMatrix> {
    let joint = bc
        .joint()
        .ok_or_else(|| Error::Unsupported("channel has no joint law to marginalize".into()))?;
    joint.marginal(j)
}
