//! Divergence, likelihood-ratio and capacity quantities of a broadcast channel.
//!
//! * `B_j`  largest divergence between two rows of branch `j`,
//! * `B`    largest (over input pairs) of the smallest divergence across branches,
//! * `T_j`  largest likelihood ratio of branch `j`,
//! * `C_j`  capacity of branch `j`,
//! * `C`    max-min capacity `max_P min_j I(P, W_j)`,
//! * `Cbar` `min_j C_j`.
//!
//! Capacities are certified: every solver returns an achieved value (a lower
//! bound attained by the returned input law) together with an upper bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{self, LpSolution};
use crate::probability::{kl_raw, mi_raw, output_law, BroadcastChannel, ChannelMatrix, Distribution, ExtReal};

/// Default accuracy for capacity computations, in nats.
pub const DEFAULT_TOL: f64 = 1e-6;

const MAX_BA_ITERATIONS: usize = 1_000_000;
const MAX_BA_STEP: f64 = 1e6;
/// Floor on the log multiplier so that no input weight underflows to zero.
const MIN_LOG_WEIGHT: f64 = -600.0;
const MAX_CUTTING_PLANE_ITERATIONS: usize = 2_000;
const SUPERGRADIENT_ITERATIONS: usize = 400;

/// A maximum over ordered input pairs together with the first maximizer in
/// lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairValue {
    pub value: ExtReal,
    pub pair: (usize, usize),
}

/// A certified capacity: `value <= capacity <= upper`, and `value` is the
/// mutual information achieved by `input`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityEstimate {
    pub value: f64,
    pub upper: f64,
    pub input: Distribution,
    pub iterations: usize,
}

impl CapacityEstimate {
    pub fn gap(&self) -> f64 {
        self.upper - self.value
    }
}

fn divergence_between_rows(w: &ChannelMatrix, x: usize, x2: usize) -> ExtReal {
    ExtReal::from_f64(kl_raw(w.row(x).probs(), w.row(x2).probs()))
}

fn check_branch(bc: &BroadcastChannel, j: usize) -> Result<()> {
    if j >= bc.num_branches() {
        return Err(Error::Domain(format!(
            "branch index {j} out of range for {} branches",
            bc.num_branches()
        )));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// `B_j = max_{x,x'} D(W_j(.|x) || W_j(.|x'))` by exhaustive scan.
pub fn compute_bj(bc: &BroadcastChannel, j: usize) -> Result<PairValue> {
    check_branch(bc, j)?;
    let w = bc.branch(j);
    let n = bc.input_size();
    let mut best = PairValue {
        value: ExtReal::Finite(0.0),
        pair: (0, 0),
    };
    for x in 0..n {
        for x2 in 0..n {
            let d = divergence_between_rows(w, x, x2);
            if d > best.value {
                best = PairValue { value: d, pair: (x, x2) };
            }
        }
    }
    Ok(best)
}

/// `B = max_{x,x'} min_j D(W_j(.|x) || W_j(.|x'))`; the attaining pair is the
/// control pair `(x_c, x_e)` of the feedback scheme.
pub fn compute_b(bc: &BroadcastChannel) -> PairValue {
    let n = bc.input_size();
    let mut best = PairValue {
        value: ExtReal::Finite(0.0),
        pair: (0, 0),
    };
    for x in 0..n {
        for x2 in 0..n {
            let d = bc
                .branches()
                .iter()
                .map(|w| divergence_between_rows(w, x, x2))
                .fold(ExtReal::Infinite, ExtReal::min);
            if d > best.value {
                best = PairValue { value: d, pair: (x, x2) };
            }
        }
    }
    best
}

/// `T_j = max_{x,x',y} W_j(y|x) / W_j(y|x')`, skipping `0/0`.
pub fn compute_tj(bc: &BroadcastChannel, j: usize) -> Result<ExtReal> {
    check_branch(bc, j)?;
    let w = bc.branch(j);
    let n = bc.input_size();
    let mut best = ExtReal::Finite(1.0);
    for y in 0..w.outputs() {
        for x in 0..n {
            let num = w.get(x, y);
            if num == 0.0 {
                continue;
            }
            for x2 in 0..n {
                let den = w.get(x2, y);
                let ratio = if den == 0.0 {
                    ExtReal::Infinite
                } else {
                    ExtReal::Finite(num / den)
                };
                best = best.max(ratio);
            }
        }
    }
    Ok(best)
}

/// Blahut-Arimoto iteration for a single channel matrix.
///
/// Stops once the bracket `ln sum_x p(x) e^{d_x} <= C <= max_x d_x`
/// (with `d_x = D(W(.|x) || pW)`) is narrower than `tol`.
pub fn blahut_arimoto(w: &ChannelMatrix, tol: f64) -> Result<CapacityEstimate> {
    check_tol(tol)?;
    weighted_blahut_arimoto(std::slice::from_ref(w), &[1.0], tol)
}

/// Blahut-Arimoto on the stacked channel `x -> (j, y)` with branch `j`
/// selected with probability `weights[j]` independently of the input. Its
/// capacity is `max_P sum_j weights[j] I(P, W_j)`.
///
/// The update `p <- p e^{mu d}` uses an adaptive exponent `mu >= 1`. A step
/// with `mu > 1` is kept only when it does not lower the objective;
/// otherwise the plain step (`mu = 1`, always monotone) is taken. Nearly
/// useless channels, where the plain iteration crawls, converge in a few
/// hundred steps this way.
fn weighted_blahut_arimoto(branches: &[ChannelMatrix], weights: &[f64], tol: f64) -> Result<CapacityEstimate> {
    let n = branches[0].inputs();
    let divergences = |p: &[f64]| {
        let mut d = vec![0.0; n];
        for (w, &lam) in branches.iter().zip(weights) {
            if lam == 0.0 {
                continue;
            }
            let q = output_law(p, w);
            for (x, dx) in d.iter_mut().enumerate() {
                *dx += lam * kl_raw(w.row(x).probs(), &q);
            }
        }
        let objective: f64 = p.iter().zip(&d).map(|(pi, di)| pi * di).sum();
        (d, objective)
    };
    let step = |p: &[f64], d: &[f64], dmax: f64, mu: f64| {
        let mut next: Vec<f64> = p
            .iter()
            .zip(d)
            .map(|(pi, di)| pi * (mu * (di - dmax)).max(MIN_LOG_WEIGHT).exp())
            .collect();
        let z: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= z);
        next
    };
    let mut p = vec![1.0 / n as f64; n];
    let (mut d, mut objective) = divergences(&p);
    let mut mu = 1.0;
    let mut lower = 0.0;
    let mut upper = f64::INFINITY;
    for it in 1..=MAX_BA_ITERATIONS {
        // shift by the max for a stable log-sum-exp
        let dmax = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = p.iter().zip(&d).map(|(pi, di)| pi * (di - dmax).exp()).sum();
        lower = dmax + z.ln();
        upper = dmax;
        if upper - lower < tol {
            let input = Distribution::from_weights(&p)?;
            let value = branches
                .iter()
                .zip(weights)
                .filter(|(_, &l)| l > 0.0)
                .map(|(w, &l)| l * mi_raw(input.probs(), w))
                .sum::<f64>()
                .min(upper);
            return Ok(CapacityEstimate {
                value,
                upper,
                input,
                iterations: it,
            });
        }
        let mut next = step(&p, &d, dmax, mu);
        let (mut next_d, mut next_objective) = divergences(&next);
        if mu > 1.0 && next_objective < objective {
            mu = (mu / 4.0).max(1.0);
            next = step(&p, &d, dmax, 1.0);
            (next_d, next_objective) = divergences(&next);
        } else {
            mu = (mu * 2.0).min(MAX_BA_STEP);
        }
        p = next;
        d = next_d;
        objective = next_objective;
    }
    Err(Error::Convergence {
        iterations: MAX_BA_ITERATIONS,
        lower,
        upper,
    })
}

/// `C_j = max_P I(P, W_j)` by Blahut-Arimoto.
pub fn compute_cj(bc: &BroadcastChannel, j: usize, tol: f64) -> Result<CapacityEstimate> {
    check_branch(bc, j)?;
    blahut_arimoto(bc.branch(j), tol)
}

/// Smallest branch mutual information `g(P) = min_j I(P, W_j)`.
pub fn min_mutual_information(bc: &BroadcastChannel, px: &[f64]) -> f64 {
    bc.branches()
        .iter()
        .map(|w| mi_raw(px, w))
        .fold(f64::INFINITY, f64::min)
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Gradient of `P -> I(P, W)` up to an additive constant: `D(W(.|x) || PW)`,
/// evaluated at a slightly smoothed `P` so that it stays finite.
pub(crate) fn mi_gradient(px: &[f64], w: &ChannelMatrix) -> Vec<f64> {
    let n = px.len();
    let eta = 1e-9;
    let smoothed: Vec<f64> = px.iter().map(|p| (1.0 - eta) * p + eta / n as f64).collect();
    let q = output_law(&smoothed, w);
    (0..n).map(|x| kl_raw(w.row(x).probs(), &q)).collect()
}

/// Projected supergradient ascent on the concave `g(P) = min_j I(P, W_j)`.
///
/// The supergradient is the gradient of an active (minimizing) branch,
/// averaged over ties; steps shrink like `c / sqrt(t)`. Returns the best
/// iterate seen.
pub fn supergradient_ascent(bc: &BroadcastChannel, iterations: usize) -> Distribution {
    let n = bc.input_size();
    let mut p = vec![1.0 / n as f64; n];
    let mut best = p.clone();
    let mut best_val = min_mutual_information(bc, &p);
    for t in 1..=iterations {
        let vals: Vec<f64> = bc.branches().iter().map(|w| mi_raw(&p, w)).collect();
        let g = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut grad = vec![0.0; n];
        let mut active = 0usize;
        for (w, &v) in bc.branches().iter().zip(&vals) {
            if v <= g + 1e-12 {
                active += 1;
                for (gx, dx) in grad.iter_mut().zip(mi_gradient(&p, w)) {
                    *gx += dx;
                }
            }
        }
        let mean = grad.iter().sum::<f64>() / n as f64;
        let norm = grad
            .iter()
            .map(|gx| (gx / active as f64 - mean / active as f64).powi(2))
            .sum::<f64>()
            .sqrt();
        if norm < 1e-15 {
            break;
        }
        let step = 0.5 / (t as f64).sqrt() / norm;
        let moved: Vec<f64> = p
            .iter()
            .zip(&grad)
            .map(|(pi, gx)| pi + step * gx / active as f64)
            .collect();
        p = project_to_simplex(&moved);
        let val = min_mutual_information(bc, &p);
        if val > best_val {
            best_val = val;
            best = p.clone();
        }
    }
    Distribution::from_weights(&best).expect("projection yields a distribution")
}

/// Certified max-min capacity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxMinCapacity {
    /// `min_j I(pstar, W_j)`, a lower bound on `C`.
    pub value: f64,
    /// Upper bound on `C` from the dual weights.
    pub upper: f64,
    pub pstar: Distribution,
    pub iterations: usize,
}

struct Cut {
    input: Vec<f64>,
    infos: Vec<f64>,
}

impl Cut {
    fn new(bc: &BroadcastChannel, input: Vec<f64>) -> Self {
        let infos = bc.branches().iter().map(|w| mi_raw(&input, w)).collect();
        Cut { input, infos }
    }

    fn min_info(&self) -> f64 {
        self.infos.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Branch weights minimizing the piecewise-linear model
/// `lambda -> max_k sum_j lambda_j I(P_k, W_j)`.
fn dual_weights(cuts: &[Cut], k: usize) -> Result<Vec<f64>> {
    // variables: lambda (k), t, one slack per cut
    let m = cuts.len();
    let nvars = k + 1 + m;
    let mut a = Vec::with_capacity(m + 1);
    let mut b = Vec::with_capacity(m + 1);
    for (i, cut) in cuts.iter().enumerate() {
        let mut row = vec![0.0; nvars];
        for j in 0..k {
            row[j] = -cut.infos[j];
        }
        row[k] = 1.0;
        row[k + 1 + i] = -1.0;
        a.push(row);
        b.push(0.0);
    }
    let mut simplex_row = vec![0.0; nvars];
    simplex_row[..k].iter_mut().for_each(|v| *v = 1.0);
    a.push(simplex_row);
    b.push(1.0);
    let mut c = vec![0.0; nvars];
    c[k] = -1.0;
    match lp::maximize(&c, &a, &b)? {
        LpSolution::Optimal { x, .. } => Ok(x[..k].to_vec()),
        other => Err(Error::Invariant(format!("dual weight LP failed: {other:?}"))),
    }
}

/// Mixture weights over the cut points maximizing the linear minorant
/// `mu -> min_j sum_k mu_k I(P_k, W_j)`. By concavity of each `I(., W_j)`
/// the mixed input does at least as well.
fn primal_mixture(cuts: &[Cut], k: usize) -> Result<Vec<f64>> {
    // variables: mu (m), s, one slack per branch
    let m = cuts.len();
    let nvars = m + 1 + k;
    let mut a = Vec::with_capacity(k + 1);
    let mut b = Vec::with_capacity(k + 1);
    for j in 0..k {
        let mut row = vec![0.0; nvars];
        for (i, cut) in cuts.iter().enumerate() {
            row[i] = cut.infos[j];
        }
        row[m] = -1.0;
        row[m + 1 + j] = -1.0;
        a.push(row);
        b.push(0.0);
    }
    let mut simplex_row = vec![0.0; nvars];
    simplex_row[..m].iter_mut().for_each(|v| *v = 1.0);
    a.push(simplex_row);
    b.push(1.0);
    let mut c = vec![0.0; nvars];
    c[m] = 1.0;
    match lp::maximize(&c, &a, &b)? {
        LpSolution::Optimal { x, .. } => Ok(x[..m].to_vec()),
        other => Err(Error::Invariant(format!("mixture LP failed: {other:?}"))),
    }
}

/// `C = max_P min_j I(P, W_j)`.
///
/// A projected supergradient ascent supplies a warm start; a cutting-plane
/// loop then tightens a two-sided certificate. Upper bounds come from the
/// weak dual `C <= max_P sum_j lambda_j I(P, W_j)` (solved by Blahut-Arimoto
/// on the stacked channel), lower bounds from concave mixtures of the
/// collected inputs. Stops when the bracket is narrower than `tol`.
pub fn compute_c(bc: &BroadcastChannel, tol: f64) -> Result<MaxMinCapacity> {
    check_tol(tol)?;
    let k = bc.num_branches();
    let inner_tol = tol / 4.0;
    let per_branch = bc
        .branches()
        .iter()
        .map(|w| blahut_arimoto(w, inner_tol))
        .collect::<Result<Vec<_>>>()?;
    let mut upper = per_branch.iter().map(|e| e.upper).fold(f64::INFINITY, f64::min);

    let n = bc.input_size();
    let mut cuts = vec![Cut::new(bc, vec![1.0 / n as f64; n])];
    for est in &per_branch {
        cuts.push(Cut::new(bc, est.input.probs().to_vec()));
    }
    if k > 1 {
        cuts.push(Cut::new(bc, supergradient_ascent(bc, SUPERGRADIENT_ITERATIONS).probs().to_vec()));
    }
    let best_of = |cuts: &[Cut]| {
        cuts.iter()
            .enumerate()
            .max_by(|a, b| a.1.min_info().total_cmp(&b.1.min_info()))
            .map(|(i, c)| (i, c.min_info()))
            .expect("at least one cut")
    };
    let (mut best_idx, mut lower) = best_of(&cuts);

    let mut iterations = 0;
    while upper - lower >= tol {
        if iterations >= MAX_CUTTING_PLANE_ITERATIONS {
            return Err(Error::Convergence {
                iterations,
                lower,
                upper,
            });
        }
        iterations += 1;
        let lambda = dual_weights(&cuts, k)?;
        let est = weighted_blahut_arimoto(bc.branches(), &lambda, inner_tol)?;
        upper = upper.min(est.upper);
        cuts.push(Cut::new(bc, est.input.probs().to_vec()));

        let mu = primal_mixture(&cuts, k)?;
        let mut mixed = vec![0.0; n];
        for (weight, cut) in mu.iter().zip(&cuts) {
            for (m, p) in mixed.iter_mut().zip(&cut.input) {
                *m += weight * p;
            }
        }
        let total: f64 = mixed.iter().sum();
        mixed.iter_mut().for_each(|m| *m /= total);
        cuts.push(Cut::new(bc, mixed));
        (best_idx, lower) = best_of(&cuts);
    }
    Ok(MaxMinCapacity {
        value: lower,
        upper: upper.max(lower),
        pstar: Distribution::from_weights(&cuts[best_idx].input)?,
        iterations,
    })
}

/// `Cbar = min_j C_j`.
pub fn compute_cbar(bc: &BroadcastChannel, tol: f64) -> Result<f64> {
    let mut best = f64::INFINITY;
    for j in 0..bc.num_branches() {
        best = best.min(compute_cj(bc, j, tol)?.value);
    }
    Ok(best)
}

/// `(x)_a = x * 1{x >= a}`.
pub fn clip_below(x: f64, a: f64) -> f64 {
    if x >= a {
        x
    } else {
        0.0
    }
}

/// `phi(a) = max_j (ln T_j)_a` from precomputed likelihood ratios.
pub fn varphi(tj: &[ExtReal], a: f64) -> ExtReal {
    let mut best = ExtReal::Finite(0.0);
    for t in tj {
        match t.ln() {
            ExtReal::Infinite => return ExtReal::Infinite,
            ExtReal::Finite(v) => best = best.max(ExtReal::Finite(clip_below(v, a))),
        }
    }
    best
}

pub fn compute_varphi(bc: &BroadcastChannel, a: f64) -> Result<ExtReal> {
    let tj = (0..bc.num_branches())
        .map(|j| compute_tj(bc, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(varphi(&tj, a))
}

/// Every divergence, likelihood-ratio and capacity quantity of a channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfoSummary {
    #[serde(rename = "B")]
    pub b: ExtReal,
    #[serde(rename = "argmax_pair_B")]
    pub b_pair: (usize, usize),
    #[serde(rename = "Bj")]
    pub bj: Vec<ExtReal>,
    #[serde(rename = "Bj_pairs")]
    pub bj_pairs: Vec<(usize, usize)>,
    #[serde(rename = "Bmax")]
    pub bmax: ExtReal,
    #[serde(rename = "Tj")]
    pub tj: Vec<ExtReal>,
    #[serde(rename = "Cj")]
    pub cj: Vec<f64>,
    #[serde(rename = "Cj_upper")]
    pub cj_upper: Vec<f64>,
    #[serde(rename = "Cj_inputs")]
    pub cj_inputs: Vec<Distribution>,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "C_upper")]
    pub c_upper: f64,
    pub pstar: Distribution,
    #[serde(rename = "Cbar")]
    pub cbar: f64,
    pub tol: f64,
}

impl InfoSummary {
    pub fn num_branches(&self) -> usize {
        self.bj.len()
    }

    /// The hypothesis `B_max < inf` under which the exponent bounds hold.
    pub fn bmax_finite(&self) -> bool {
        self.bmax.is_finite()
    }

    pub fn varphi(&self, a: f64) -> ExtReal {
        varphi(&self.tj, a)
    }

    /// The control pair `(x_c, x_e)`.
    pub fn control_pair(&self) -> (usize, usize) {
        self.b_pair
    }

    fn check_invariants(&self, bc: &BroadcastChannel) -> Result<()> {
        let min_bj = self.bj.iter().cloned().fold(ExtReal::Infinite, ExtReal::min);
        if !(ExtReal::Finite(0.0) <= self.b && self.b <= min_bj && min_bj <= self.bmax) {
            return Err(Error::Invariant(format!(
                "expected 0 <= B <= min_j B_j <= B_max, got B={} min={} max={}",
                self.b, min_bj, self.bmax
            )));
        }
        if !(self.c >= 0.0 && self.c <= self.cbar) {
            return Err(Error::Invariant(format!("expected 0 <= C <= Cbar, got {} and {}", self.c, self.cbar)));
        }
        for (j, (b, t)) in self.bj.iter().zip(&self.tj).enumerate() {
            if let (ExtReal::Finite(bv), ExtReal::Finite(tv)) = (b, t) {
                if *bv > tv.ln() + 1e-12 * (1.0 + tv.ln().abs()) {
                    return Err(Error::Invariant(format!("B_{j} = {bv} exceeds ln T_{j} = {}", tv.ln())));
                }
            }
        }
        if self.bmax.is_finite() != absolutely_continuous(bc) {
            return Err(Error::Invariant("B_max finiteness disagrees with the support structure".into()));
        }
        Ok(())
    }
}

/// True when, in every branch, each output letter has either zero or positive
/// probability under all inputs simultaneously (all rows mutually absolutely
/// continuous). Reduces to "all entries positive" when no output column is dead.
pub fn absolutely_continuous(bc: &BroadcastChannel) -> bool {
    bc.branches().iter().all(|w| {
        (0..w.outputs()).all(|y| {
            let positive = (0..w.inputs()).filter(|&x| w.get(x, y) > 0.0).count();
            positive == 0 || positive == w.inputs()
        })
    })
}

/// Computes all quantities and checks their mutual consistency.
pub fn summarize(bc: &BroadcastChannel, tol: f64) -> Result<InfoSummary> {
    check_tol(tol)?;
    let k = bc.num_branches();
    let bj_pairs = (0..k).map(|j| compute_bj(bc, j)).collect::<Result<Vec<_>>>()?;
    let b = compute_b(bc);
    let tj = (0..k).map(|j| compute_tj(bc, j)).collect::<Result<Vec<_>>>()?;
    let maxmin = compute_c(bc, tol)?;

    let mut cj = Vec::with_capacity(k);
    let mut cj_upper = Vec::with_capacity(k);
    let mut cj_inputs = Vec::with_capacity(k);
    for j in 0..k {
        let est = compute_cj(bc, j, tol)?;
        // I(pstar, W_j) is also an achieved lower bound on C_j; keep the better
        // one so that C <= C_j holds exactly in floating point.
        let at_pstar = mi_raw(maxmin.pstar.probs(), bc.branch(j));
        if at_pstar > est.value {
            cj.push(at_pstar);
            cj_inputs.push(maxmin.pstar.clone());
        } else {
            cj.push(est.value);
            cj_inputs.push(est.input);
        }
        cj_upper.push(est.upper.max(cj[j]));
    }
    let cbar = cj.iter().cloned().fold(f64::INFINITY, f64::min);
    let bj: Vec<ExtReal> = bj_pairs.iter().map(|p| p.value).collect();
    let bmax = bj.iter().cloned().fold(ExtReal::Finite(0.0), ExtReal::max);
    let summary = InfoSummary {
        b: b.value,
        b_pair: b.pair,
        bj,
        bj_pairs: bj_pairs.iter().map(|p| p.pair).collect(),
        bmax,
        tj,
        cj,
        cj_upper,
        cj_inputs,
        c: maxmin.value.min(cbar),
        c_upper: maxmin.upper,
        pstar: maxmin.pstar,
        cbar,
        tol,
    };
    summary.check_invariants(bc)?;
    Ok(summary)
}
