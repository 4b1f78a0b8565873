//! Reliability-function and capacity bounds.
//!
//! For every rate `R < C` the exponent satisfies `E(R) >= B (1 - R/C)`, and
//! for `R < Cbar` it satisfies `E(R) <= min_j B_j (1 - R/C_j)`. When the
//! channel is certified degraded both collapse to `B_1 (1 - R/C_1)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::info::InfoSummary;
use crate::ordering::OrderingReport;

fn check_hypothesis(info: &InfoSummary) -> Result<()> {
    if !info.bmax_finite() {
        return Err(Error::Hypothesis("the bounds require B_max < inf".into()));
    }
    Ok(())
}

fn check_rate(rate: f64, limit: f64) -> Result<()> {
    if !(rate >= 0.0 && rate < limit) {
        return Err(Error::RateOutOfRange { rate, limit });
    }
    Ok(())
}

/// `B (1 - R/C)` for `0 <= R < C`.
pub fn lower_bound(info: &InfoSummary, rate: f64) -> Result<f64> {
    check_hypothesis(info)?;
    check_rate(rate, info.c)?;
    Ok(info.b.to_f64() * (1.0 - rate / info.c))
}

/// `min_j B_j (1 - R/C_j)` for `0 <= R < Cbar`.
pub fn upper_bound(info: &InfoSummary, rate: f64) -> Result<f64> {
    check_hypothesis(info)?;
    check_rate(rate, info.cbar)?;
    Ok(info
        .bj
        .iter()
        .zip(&info.cj)
        .map(|(b, c)| b.to_f64() * (1.0 - rate / c))
        .fold(f64::INFINITY, f64::min))
}

/// `B_1 (1 - R/C_1)` when the ordering report certifies degradation.
pub fn exact_if_degraded(info: &InfoSummary, ordering: &OrderingReport, rate: f64) -> Result<Option<f64>> {
    if !ordering.is_degraded() {
        return Ok(None);
    }
    check_hypothesis(info)?;
    check_rate(rate, info.cj[0])?;
    Ok(Some(info.bj[0].to_f64() * (1.0 - rate / info.cj[0])))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityBounds {
    pub low: f64,
    pub high: f64,
    /// `C_1` when the channel is certified less capable.
    pub exact: Option<f64>,
}

pub fn capacity_bounds(info: &InfoSummary, ordering: &OrderingReport) -> CapacityBounds {
    CapacityBounds {
        low: info.c,
        high: info.cbar,
        exact: ordering.is_less_capable().then(|| info.cj[0]),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    #[serde(rename = "R")]
    pub rate: f64,
    pub lower_e: Option<f64>,
    pub upper_e: Option<f64>,
    pub exact: Option<f64>,
    pub valid_lower: bool,
    pub valid_upper: bool,
}

/// Evaluates the bounds on each rate of `grid`. Rates outside a bound's
/// validity range leave that column empty and clear its flag.
pub fn rate_sweep(info: &InfoSummary, ordering: &OrderingReport, grid: &[f64]) -> Result<Vec<RatePoint>> {
    check_hypothesis(info)?;
    let mut out = Vec::with_capacity(grid.len());
    for &rate in grid {
        let lower = lower_bound(info, rate).ok();
        let upper = upper_bound(info, rate).ok();
        let exact = exact_if_degraded(info, ordering, rate).ok().flatten();
        if let (Some(l), Some(u)) = (lower, upper) {
            if l > u + 1e-9 {
                return Err(Error::Invariant(format!("lower bound {l} exceeds upper bound {u} at R = {rate}")));
            }
        }
        out.push(RatePoint {
            rate,
            lower_e: lower,
            upper_e: upper,
            exact,
            valid_lower: lower.is_some(),
            valid_upper: upper.is_some(),
        });
    }
    Ok(out)
}

/// `points` evenly spaced rates on `[rmin, rmax]` (just `rmin` when `points == 1`).
pub fn linear_grid(rmin: f64, rmax: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![rmin],
        _ => (0..points)
            .map(|i| rmin + (rmax - rmin) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}
