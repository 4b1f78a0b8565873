//! Ordering classes of broadcast channels.
//!
//! Branch 0 plays the role of the weak receiver `Y_1`. The classes are nested:
//! physically degraded implies stochastically degraded implies less capable.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::info::{mi_gradient, project_to_simplex};
use crate::lp;
use crate::probability::{kl_raw, mi_raw, BroadcastChannel, ChannelMatrix, Distribution};
use crate::random::random_distribution;

/// Tolerance on `P(y_1 | x, y_j)` constancy for the physical check.
pub const MARKOV_TOLERANCE: f64 = 1e-9;
/// Phase-one objectives at or below this are feasible.
pub const FEASIBLE_OBJECTIVE: f64 = 1e-9;
/// Phase-one objectives at or above this are infeasible; values in between
/// are reported as indeterminate.
pub const INFEASIBLE_OBJECTIVE: f64 = 1e-6;
/// Maximum entrywise error of `branch_j * W_j` against branch 0.
pub const WITNESS_TOLERANCE: f64 = 1e-7;
pub const DEFAULT_RESTARTS: usize = 16;
pub const DEFAULT_GAP_TOL: f64 = 1e-6;

const COARSE_GRID: usize = 32;
const FINE_GRID: usize = 1024;
const DESCENT_ITERATIONS: usize = 300;
const CERTIFICATE_BUDGET: usize = 400_000;
const SEARCH_SEED: u64 = 0x0123_4567_89ab_cdef;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    /// The physical check needs the joint law.
    NotApplicable,
    /// Numerically marginal feasibility.
    Indeterminate,
    /// No counterexample found, but the universal claim is not certified.
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StochasticReport {
    pub verdict: Verdict,
    /// One entry per strong branch `j >= 1`: the post-processing channel from
    /// `Y_j` to `Y_1` when one was found.
    pub witnesses: Vec<Option<ChannelMatrix>>,
    /// Phase-one objective per strong branch.
    pub phase_one_objectives: Vec<f64>,
    /// `max |branch_j * W_j - branch_0|` per strong branch with a witness.
    pub residuals: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LessCapableBasis {
    SingleBranch,
    ImpliedByDegradation,
    /// Binary input: grid plus Lipschitz bound shows `gap >= -tol` everywhere.
    LipschitzCertificate,
    Counterexample,
    NoCounterexampleFound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchDiagnostics {
    pub grid_points: usize,
    pub restarts: usize,
    pub descent_iterations: usize,
    pub certificate_intervals: usize,
    pub lipschitz_constant: Option<f64>,
    /// Smallest gap found and where.
    pub min_gap: f64,
    pub argmin: Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LessCapableReport {
    pub verdict: Verdict,
    pub basis: LessCapableBasis,
    pub counterexample: Option<Distribution>,
    pub counterexample_gap: Option<f64>,
    pub diagnostics: Option<SearchDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingReport {
    pub physically_degraded: Verdict,
    pub stochastically_degraded: StochasticReport,
    pub less_capable: LessCapableReport,
}

impl OrderingReport {
    pub fn is_degraded(&self) -> bool {
        self.physically_degraded == Verdict::Yes || self.stochastically_degraded.verdict == Verdict::Yes
    }

    pub fn is_less_capable(&self) -> bool {
        self.less_capable.verdict == Verdict::Yes
    }
}

/// Checks the Markov chains `X - Y_j - Y_1` under the joint law.
pub fn check_physically_degraded(bc: &BroadcastChannel) -> Verdict {
    let Some(joint) = bc.joint() else {
        return Verdict::NotApplicable;
    };
    for j in 1..bc.num_branches() {
        let pair = joint.pair_marginal(0, j);
        let strong = bc.branch(j);
        for yj in 0..strong.outputs() {
            let support: Vec<usize> = (0..bc.input_size()).filter(|&x| strong.get(x, yj) > 0.0).collect();
            if support.len() < 2 {
                continue;
            }
            for y1 in 0..bc.branch(0).outputs() {
                let cond = |x: usize| pair[x][y1][yj] / strong.get(x, yj);
                let reference = cond(support[0]);
                if support[1..].iter().any(|&x| (cond(x) - reference).abs() > MARKOV_TOLERANCE) {
                    return Verdict::No;
                }
            }
        }
    }
    Verdict::Yes
}

/// Solves `branch_j * W = branch_0` over row-stochastic `W` by phase-one simplex.
fn degradation_witness(weak: &ChannelMatrix, strong: &ChannelMatrix) -> Result<(f64, Option<(ChannelMatrix, f64)>)> {
    let na = strong.outputs();
    let nb = weak.outputs();
    let nx = weak.inputs();
    let var = |a: usize, b: usize| a * nb + b;
    let mut rows = Vec::with_capacity(na + nx * nb);
    let mut rhs = Vec::with_capacity(na + nx * nb);
    for a in 0..na {
        let mut r = vec![0.0; na * nb];
        for b in 0..nb {
            r[var(a, b)] = 1.0;
        }
        rows.push(r);
        rhs.push(1.0);
    }
    for x in 0..nx {
        for b in 0..nb {
            let mut r = vec![0.0; na * nb];
            for a in 0..na {
                r[var(a, b)] = strong.get(x, a);
            }
            rows.push(r);
            rhs.push(weak.get(x, b));
        }
    }
    let sol = lp::phase_one(&rows, &rhs)?;
    if sol.objective > FEASIBLE_OBJECTIVE {
        return Ok((sol.objective, None));
    }
    let w = ChannelMatrix::new((0..na).map(|a| sol.x[a * nb..(a + 1) * nb].to_vec()).collect::<Vec<_>>());
    let w = match w {
        Ok(w) => w,
        // rows off by more than the renormalization tolerance
        Err(_) => {
            let rows = (0..na)
                .map(|a| Distribution::from_weights(&sol.x[a * nb..(a + 1) * nb]))
                .collect::<Result<Vec<_>>>()?;
            ChannelMatrix::from_distributions(rows)?
        }
    };
    let residual = strong.compose(&w)?.max_abs_diff(weak)?;
    Ok((sol.objective, Some((w, residual))))
}

/// Decides whether every strong branch can be post-processed into branch 0.
pub fn check_stochastically_degraded(bc: &BroadcastChannel) -> Result<StochasticReport> {
    let weak = bc.branch(0);
    let mut report = StochasticReport {
        verdict: Verdict::Yes,
        witnesses: Vec::new(),
        phase_one_objectives: Vec::new(),
        residuals: Vec::new(),
    };
    let mut any_indeterminate = false;
    let mut any_infeasible = false;
    for j in 1..bc.num_branches() {
        let (objective, found) = degradation_witness(weak, bc.branch(j))?;
        report.phase_one_objectives.push(objective);
        match found {
            Some((w, residual)) if residual <= WITNESS_TOLERANCE => {
                report.witnesses.push(Some(w));
                report.residuals.push(Some(residual));
            }
            Some((_, residual)) => {
                any_indeterminate = true;
                report.witnesses.push(None);
                report.residuals.push(Some(residual));
            }
            None => {
                if objective >= INFEASIBLE_OBJECTIVE {
                    any_infeasible = true;
                } else {
                    any_indeterminate = true;
                }
                report.witnesses.push(None);
                report.residuals.push(None);
            }
        }
    }
    report.verdict = if any_infeasible {
        Verdict::No
    } else if any_indeterminate {
        Verdict::Indeterminate
    } else {
        Verdict::Yes
    };
    Ok(report)
}

/// `gap(P) = min_{j>=1} I(P, W_j) - I(P, W_0)`.
pub fn less_capable_gap(bc: &BroadcastChannel, px: &[f64]) -> f64 {
    let weak = mi_raw(px, bc.branch(0));
    let strong = bc.branches()[1..]
        .iter()
        .map(|w| mi_raw(px, w))
        .fold(f64::INFINITY, f64::min);
    strong - weak
}

/// Lattice points of the simplex with denominator `res`.
fn simplex_grid(n: usize, res: usize) -> Vec<Vec<f64>> {
    fn rec(n: usize, left: usize, res: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() == n - 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / res as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(n, left - c, res, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, res, res, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Projected subgradient descent on the gap from `start`.
fn descend(bc: &BroadcastChannel, start: Vec<f64>, best: &mut (f64, Vec<f64>)) {
    let mut p = start;
    for t in 1..=DESCENT_ITERATIONS {
        let strong: Vec<f64> = bc.branches()[1..].iter().map(|w| mi_raw(&p, w)).collect();
        let jmin = strong
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i + 1)
            .expect("at least two branches");
        let gs = mi_gradient(&p, bc.branch(jmin));
        let gw = mi_gradient(&p, bc.branch(0));
        let grad: Vec<f64> = gs.iter().zip(&gw).map(|(a, b)| a - b).collect();
        let mean = grad.iter().sum::<f64>() / grad.len() as f64;
        let norm = grad.iter().map(|g| (g - mean).powi(2)).sum::<f64>().sqrt();
        if norm < 1e-14 {
            break;
        }
        let step = 0.3 / (t as f64).sqrt() / norm;
        let moved: Vec<f64> = p.iter().zip(&grad).map(|(pi, g)| pi - step * g).collect();
        p = project_to_simplex(&moved);
        let gap = less_capable_gap(bc, &p);
        if gap < best.0 {
            *best = (gap, p.clone());
        }
    }
}

/// Bound on `|d gap / dq|` along `P = (1-q, q)`: the derivative of
/// `I(P, W)` is `D(W_1 || PW) - D(W_0 || PW)`, and convexity of divergence
/// bounds each term by the divergence between the two rows.
fn binary_lipschitz(bc: &BroadcastChannel) -> Option<f64> {
    let row_bound = |w: &ChannelMatrix| kl_raw(w.row(0).probs(), w.row(1).probs()).max(kl_raw(w.row(1).probs(), w.row(0).probs()));
    let weak = row_bound(bc.branch(0));
    let strong = bc.branches()[1..].iter().map(row_bound).fold(0.0, f64::max);
    let l = weak + strong;
    l.is_finite().then_some(l)
}

/// Adaptive Lipschitz certificate that `gap(q) >= -tol` on `[0, 1]`.
/// Returns the number of intervals examined, or `None` when the bound could
/// not be closed within the budget.
fn certify_binary(bc: &BroadcastChannel, lipschitz: f64, tol: f64) -> Option<usize> {
    let g = |q: f64| less_capable_gap(bc, &[1.0 - q, q]);
    let mut stack: Vec<(f64, f64, f64, f64)> = (0..FINE_GRID)
        .map(|i| {
            let a = i as f64 / FINE_GRID as f64;
            let b = (i + 1) as f64 / FINE_GRID as f64;
            (a, b, g(a), g(b))
        })
        .collect();
    let mut examined = 0;
    while let Some((a, b, ga, gb)) = stack.pop() {
        examined += 1;
        if examined > CERTIFICATE_BUDGET || ga < -tol || gb < -tol {
            return None;
        }
        if 0.5 * (ga + gb - lipschitz * (b - a)) >= -tol {
            continue;
        }
        let m = 0.5 * (a + b);
        let gm = g(m);
        stack.push((a, m, ga, gm));
        stack.push((m, b, gm, gb));
    }
    Some(examined)
}

/// Searches for an input law with `I(X;Y_1) > I(X;Y_j)` for some `j`.
///
/// A counterexample (`gap < -tol`) is a sound refutation. Confirmation comes
/// only from degradation, from the trivial single-branch case, or for binary
/// inputs from a Lipschitz-certified grid.
pub fn check_less_capable(bc: &BroadcastChannel, restarts: usize, tol: f64) -> Result<LessCapableReport> {
    let degraded = check_stochastically_degraded(bc)?.verdict == Verdict::Yes;
    less_capable_given(bc, restarts, tol, degraded)
}

fn less_capable_given(bc: &BroadcastChannel, restarts: usize, tol: f64, degraded: bool) -> Result<LessCapableReport> {
    if restarts == 0 {
        return Err(Error::Domain("at least one restart is required".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if bc.num_branches() == 1 {
        return Ok(LessCapableReport {
            verdict: Verdict::Yes,
            basis: LessCapableBasis::SingleBranch,
            counterexample: None,
            counterexample_gap: None,
            diagnostics: None,
        });
    }
    if degraded {
        return Ok(LessCapableReport {
            verdict: Verdict::Yes,
            basis: LessCapableBasis::ImpliedByDegradation,
            counterexample: None,
            counterexample_gap: None,
            diagnostics: None,
        });
    }

    let n = bc.input_size();
    let mut best = (f64::INFINITY, vec![1.0 / n as f64; n]);
    let mut grid_points = 0;
    let grid = match n {
        2 => simplex_grid(2, FINE_GRID),
        3 => simplex_grid(3, COARSE_GRID),
        _ => Vec::new(),
    };
    for p in grid {
        grid_points += 1;
        let gap = less_capable_gap(bc, &p);
        if gap < best.0 {
            best = (gap, p);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEARCH_SEED);
    let mut starts = vec![best.1.clone(), vec![1.0 / n as f64; n]];
    while starts.len() < restarts + 1 {
        starts.push(random_distribution(&mut rng, n, 0.0).probs().to_vec());
    }
    starts.truncate(restarts.max(1) + 1);
    for start in starts {
        descend(bc, start, &mut best);
    }

    let mut diagnostics = SearchDiagnostics {
        grid_points,
        restarts,
        descent_iterations: DESCENT_ITERATIONS,
        certificate_intervals: 0,
        lipschitz_constant: None,
        min_gap: best.0,
        argmin: Distribution::from_weights(&best.1)?,
    };
    if best.0 < -tol {
        return Ok(LessCapableReport {
            verdict: Verdict::No,
            basis: LessCapableBasis::Counterexample,
            counterexample: Some(diagnostics.argmin.clone()),
            counterexample_gap: Some(best.0),
            diagnostics: Some(diagnostics),
        });
    }
    if n == 2 {
        diagnostics.lipschitz_constant = binary_lipschitz(bc);
        if let Some(l) = diagnostics.lipschitz_constant {
            if let Some(examined) = certify_binary(bc, l, tol) {
                diagnostics.certificate_intervals = examined;
                return Ok(LessCapableReport {
                    verdict: Verdict::Yes,
                    basis: LessCapableBasis::LipschitzCertificate,
                    counterexample: None,
                    counterexample_gap: None,
                    diagnostics: Some(diagnostics),
                });
            }
        }
    }
    Ok(LessCapableReport {
        verdict: Verdict::Undetermined,
        basis: LessCapableBasis::NoCounterexampleFound,
        counterexample: None,
        counterexample_gap: None,
        diagnostics: Some(diagnostics),
    })
}

/// Runs all three classifiers and checks that they respect the inclusion chain.
pub fn classify(bc: &BroadcastChannel) -> Result<OrderingReport> {
    classify_with(bc, DEFAULT_RESTARTS, DEFAULT_GAP_TOL)
}

pub fn classify_with(bc: &BroadcastChannel, restarts: usize, tol: f64) -> Result<OrderingReport> {
    let physical = check_physically_degraded(bc);
    let stochastic = check_stochastically_degraded(bc)?;
    let less_capable = less_capable_given(bc, restarts, tol, stochastic.verdict == Verdict::Yes)?;
    if physical == Verdict::Yes && stochastic.verdict != Verdict::Yes {
        return Err(Error::Invariant(format!(
            "physically degraded but stochastic check returned {:?}",
            stochastic.verdict
        )));
    }
    if stochastic.verdict == Verdict::Yes && less_capable.verdict == Verdict::No {
        return Err(Error::Invariant("degraded channel refuted as less capable".into()));
    }
    Ok(OrderingReport {
        physically_degraded: physical,
        stochastically_degraded: stochastic,
        less_capable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::JointLaw;

    fn bsc(p: f64) -> ChannelMatrix {
        ChannelMatrix::bsc(p).unwrap()
    }

    fn cascade() -> BroadcastChannel {
        // X -> Y_2 = BSC(0.1) -> Y_1 = BSC(0.125); shape [x, y1, y2]
        let mut data = Vec::new();
        for x in 0..2 {
            for y1 in 0..2 {
                for y2 in 0..2 {
                    data.push(bsc(0.1).get(x, y2) * bsc(0.125).get(y2, y1));
                }
            }
        }
        BroadcastChannel::from_joint(JointLaw::new(&[2, 2, 2], data).unwrap()).unwrap()
    }

    #[test]
    fn physical_examples() {
        assert_eq!(check_physically_degraded(&cascade()), Verdict::Yes);
        let w = vec![bsc(0.2), bsc(0.1)];
        let product = BroadcastChannel::with_joint(w.clone(), JointLaw::product(&w).unwrap()).unwrap();
        assert_eq!(check_physically_degraded(&product), Verdict::No);
        let single = BroadcastChannel::from_joint(JointLaw::product(&[bsc(0.3)]).unwrap()).unwrap();
        assert_eq!(check_physically_degraded(&single), Verdict::Yes);
        let no_joint = BroadcastChannel::new(w).unwrap();
        assert_eq!(check_physically_degraded(&no_joint), Verdict::NotApplicable);
    }

    #[test]
    fn stochastic_examples() {
        let bc = BroadcastChannel::new(vec![bsc(0.2), bsc(0.1)]).unwrap();
        let r = check_stochastically_degraded(&bc).unwrap();
        assert_eq!(r.verdict, Verdict::Yes);
        let w = r.witnesses[0].as_ref().unwrap();
        assert!((w.get(0, 1) - 0.125).abs() < 1e-9 && (w.get(1, 0) - 0.125).abs() < 1e-9);

        let rev = BroadcastChannel::new(vec![bsc(0.1), bsc(0.2)]).unwrap();
        let r = check_stochastically_degraded(&rev).unwrap();
        assert_eq!(r.verdict, Verdict::No);
        assert!(r.witnesses[0].is_none());

        let same = BroadcastChannel::new(vec![bsc(0.1), bsc(0.1)]).unwrap();
        let r = check_stochastically_degraded(&same).unwrap();
        assert_eq!(r.verdict, Verdict::Yes);
        let w = r.witnesses[0].as_ref().unwrap();
        assert!(w.max_abs_diff(&ChannelMatrix::identity(2).unwrap()).unwrap() < 1e-9);
    }

    #[test]
    fn less_capable_examples() {
        let bc = BroadcastChannel::new(vec![bsc(0.2), bsc(0.1)]).unwrap();
        let r = check_less_capable(&bc, 4, 1e-6).unwrap();
        assert_eq!((r.verdict, r.basis), (Verdict::Yes, LessCapableBasis::ImpliedByDegradation));

        let flat = ChannelMatrix::constant(2, Distribution::uniform(2).unwrap()).unwrap();
        let bc = BroadcastChannel::new(vec![ChannelMatrix::identity(2).unwrap(), flat]).unwrap();
        let r = check_less_capable(&bc, 4, 1e-6).unwrap();
        assert_eq!(r.verdict, Verdict::No);
        let p = r.counterexample.unwrap();
        assert!(less_capable_gap(&bc, p.probs()) < -0.5e-6);
        assert!((r.counterexample_gap.unwrap() + std::f64::consts::LN_2).abs() < 1e-9);

        let same = BroadcastChannel::new(vec![bsc(0.3), bsc(0.3)]).unwrap();
        assert_eq!(check_less_capable(&same, 1, 1e-6).unwrap().verdict, Verdict::Yes);
        assert!(check_less_capable(&same, 0, 1e-6).is_err());
    }

    #[test]
    fn less_capable_certificate_without_degradation() {
        // BSC(0.3) cannot be obtained by garbling this asymmetric channel, yet
        // it never carries more information.
        let strong = ChannelMatrix::new(vec![vec![0.99, 0.01], vec![0.45, 0.55]]).unwrap();
        let bc = BroadcastChannel::new(vec![bsc(0.3), strong]).unwrap();
        assert_eq!(check_stochastically_degraded(&bc).unwrap().verdict, Verdict::No);
        let r = check_less_capable(&bc, 4, 1e-6).unwrap();
        assert_eq!((r.verdict, r.basis), (Verdict::Yes, LessCapableBasis::LipschitzCertificate));
        let d = r.diagnostics.unwrap();
        assert!(d.certificate_intervals >= FINE_GRID);
        assert!(d.min_gap >= -1e-6);
    }

    #[test]
    fn full_classification_of_cascade() {
        let r = classify(&cascade()).unwrap();
        assert_eq!(r.physically_degraded, Verdict::Yes);
        assert_eq!(r.stochastically_degraded.verdict, Verdict::Yes);
        assert_eq!(r.less_capable.verdict, Verdict::Yes);
        assert!(r.is_degraded());
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(simplex_grid(2, 4).len(), 5);
        assert_eq!(simplex_grid(3, 32).len(), 33 * 34 / 2);
        for p in simplex_grid(3, 5) {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
