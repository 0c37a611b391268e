//! Single-parameter probes: negativity crossings and partial-sum traces.

use num_complex::Complex64;

use super::row::physical;
use super::spec::GridPoint;
use crate::cavity::{correlations, MSeries, ModeCutoffs, XSlice};
use crate::error::{Error, Result};
use crate::quad::bisect;
use crate::series::{try_partial_sum_trace, Spacing, TraceRow};

/// Signed `|M| − (X_AA + X_BB)/2` of the cavity; fails if any series does
/// not converge.
pub fn cavity_margin(p: &GridPoint, lambda: f64, cut: &ModeCutoffs) -> Result<f64> {
    let (det, cav) = physical(p, lambda)?;
    let c = correlations(&det, &cav, cut)?;
    Ok(c.m_ab.norm() - 0.5 * (c.x_aa + c.x_bb))
}

/// First point along the increasing `grid` where `f` turns from positive to
/// non-positive, refined by bisection to `tol`. `None` if it never does.
pub fn first_sudden_death<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    grid: &[f64],
    tol: f64,
) -> Result<Option<f64>> {
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParams(
            "crossing grid must have >= 2 increasing points".into(),
        ));
    }
    let mut prev = f(grid[0])?;
    for w in grid.windows(2) {
        let cur = f(w[1])?;
        if prev > 0.0 && cur <= 0.0 {
            return bisect(&mut f, w[0], w[1], tol).map(Some);
        }
        prev = cur;
    }
    Ok(None)
}

/// Trace of the `M_AB` partial sums over the first `n_max` radial modes.
pub fn m_trace(
    p: &GridPoint,
    lambda: f64,
    n_max: usize,
    n_points: usize,
    spacing: Spacing,
) -> Result<Vec<TraceRow>> {
    let (det, cav) = physical(p, lambda)?;
    let mut s = MSeries::new(&det, &cav, n_max);
    try_partial_sum_trace(|n| s.term(n), n_max, n_points, spacing)
}

/// Trace of the (absolutely convergent) `X_AA` partial sums.
pub fn x_aa_trace(
    p: &GridPoint,
    lambda: f64,
    n_max: usize,
    n_points: usize,
    spacing: Spacing,
) -> Result<Vec<TraceRow>> {
    let (det, cav) = physical(p, lambda)?;
    let mut s = XSlice::new(&det, &cav, 0, 0.0, 0.0, n_max);
    try_partial_sum_trace(
        |n| s.term(n).map(|t| Complex64::new(t, 0.0)),
        n_max,
        n_points,
        spacing,
    )
}

/// Default trace length: twice the terms the production sum needed.
pub fn default_trace_length(p: &GridPoint, lambda: f64, cut: &ModeCutoffs) -> Result<usize> {
    let (det, cav) = physical(p, lambda)?;
    let used = match crate::cavity::m_ab(&det, &cav, cut) {
        Ok((_, d)) => d.terms_used,
        Err(e) => e.diagnostics().map(|d| d.terms_used).ok_or(e)?,
    };
    Ok((2 * used).max(64))
}
