//! Summation of the mode series: a window (Cauchy) rule for absolutely
//! convergent sums and an envelope-midpoint rule for the oscillating ones.
//!
//! Every series is summed sequentially in ascending index order with
//! compensated accumulation, so results do not depend on threading.

use std::collections::VecDeque;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative margin by which an extremum must beat its neighbours.
pub const EXTREMUM_MARGIN: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SumMode {
    Absolute,
    Oscillatory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumConfig {
    pub tol: f64,
    pub n_max: usize,
    /// No convergence is declared before this many terms.
    pub n_min: usize,
    /// Trailing window length of the Cauchy rule.
    pub window: usize,
    pub mode: SumMode,
    /// Record every partial sum and relative change.
    pub keep_trace: bool,
}

impl SumConfig {
    pub fn absolute(tol: f64, n_max: usize) -> Self {
        Self {
            tol,
            n_max,
            n_min: 16,
            window: 8,
            mode: SumMode::Absolute,
            keep_trace: false,
        }
    }

    pub fn oscillatory(tol: f64, n_max: usize) -> Self {
        Self {
            mode: SumMode::Oscillatory,
            ..Self::absolute(tol, n_max)
        }
    }

    pub fn with_trace(mut self, keep: bool) -> Self {
        self.keep_trace = keep;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.n_min == 0 || self.n_min >= self.n_max {
            return Err(Error::InvalidParams(format!(
                "need 1 <= n_min < n_max, got {} and {}",
                self.n_min, self.n_max
            )));
        }
        if self.window == 0 {
            return Err(Error::InvalidParams("window must be >= 1".into()));
        }
        Ok(())
    }
}

/// Local extrema of one real trace of the partial sums.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Extrema {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    /// `(values[k] + values[k+1]) / 2`
    pub midpoints: Vec<f64>,
}

impl Extrema {
    fn push(&mut self, n: usize, v: f64) {
        if let Some(&last) = self.values.last() {
            self.midpoints.push(0.5 * (last + v));
        }
        self.indices.push(n);
        self.values.push(v);
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Mean over all midpoints, kept for comparison with the last-pair rule.
    pub fn midpoint_mean(&self) -> Option<f64> {
        (!self.midpoints.is_empty())
            .then(|| self.midpoints.iter().sum::<f64>() / self.midpoints.len() as f64)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SumDiagnostics {
    /// `S_n` for `n = 1..=terms_used` when the trace was kept.
    pub partial_sums: Vec<Complex64>,
    /// `|t_n| / |S_n|`, same indexing as `partial_sums`.
    pub rel_changes: Vec<f64>,
    pub extrema_re: Extrema,
    pub extrema_im: Extrema,
    pub terms_used: usize,
    pub converged: bool,
    /// 2 when some trace was settled by the trailing mean of its midpoints,
    /// 1 otherwise.
    pub envelope_level: u8,
    /// Converged through the plain window rule without any oscillating trace.
    pub cauchy_fallback: bool,
    pub estimate: Complex64,
}

impl SumDiagnostics {
    /// Indices flagged as extrema in either trace, ascending.
    pub fn extrema_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .extrema_re
            .indices
            .iter()
            .chain(&self.extrema_im.indices)
            .copied()
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn midpoint_mean(&self) -> Option<Complex64> {
        match (
            self.extrema_re.midpoint_mean(),
            self.extrema_im.midpoint_mean(),
        ) {
            (None, None) => None,
            (re, im) => Some(Complex64::new(
                re.unwrap_or(self.estimate.re),
                im.unwrap_or(self.estimate.im),
            )),
        }
    }

    pub fn summary(&self) -> DiagSummary {
        DiagSummary {
            terms_used: self.terms_used,
            converged: self.converged,
            cauchy_fallback: self.cauchy_fallback,
            envelope_level: self.envelope_level,
            extrema: self.extrema_indices().len(),
            estimate: self.estimate,
            midpoint_mean: self.midpoint_mean(),
        }
    }

    /// Rows of a kept trace, one per evaluated term.
    pub fn rows(&self) -> Vec<TraceRow> {
        build_rows(
            &self.partial_sums,
            &self.rel_changes,
            &self.extrema_re,
            &self.extrema_im,
            None,
        )
    }
}

/// Compact, serializable view of a [`SumDiagnostics`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagSummary {
    pub terms_used: usize,
    pub converged: bool,
    pub cauchy_fallback: bool,
    pub envelope_level: u8,
    pub extrema: usize,
    pub estimate: Complex64,
    pub midpoint_mean: Option<Complex64>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    c: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Extremum detector on a real sequence.
#[derive(Debug, Default)]
struct Detector {
    prev: f64,
    cur: f64,
    ext: Extrema,
}

impl Detector {
    /// Feeds element `n` (1-based); decides whether element `n − 1` was an
    /// extremum. Element 0 is taken as `first`.
    fn push(&mut self, n: usize, s: f64, margin: f64) -> bool {
        let mut found = false;
        if n >= 2 {
            let c = self.cur;
            let is_max = c - self.prev > margin && c - s > margin;
            let is_min = self.prev - c > margin && s - c > margin;
            if is_max || is_min {
                self.ext.push(n - 1, c);
                found = true;
            }
        }
        self.prev = self.cur;
        self.cur = s;
        found
    }

    fn recent(&self, n: usize) -> bool {
        self.ext.indices.last().is_some_and(|&i| 2 * i >= n)
    }

    /// Last two midpoints agree within `bound`.
    fn settled(&self, bound: f64) -> bool {
        let m = &self.ext.midpoints;
        m.len() >= 2 && (m[m.len() - 1] - m[m.len() - 2]).abs() <= bound
    }
}

/// One real trace of the partial sums. Near the cavity wall the mode
/// oscillation beats against the unit index step, so the midpoints
/// themselves swing slowly; their mean over the latest half of the
/// midpoints averages out whole beat periods.
#[derive(Debug, Default)]
struct Trace {
    sums: Detector,
    /// Prefix sums of the midpoints, starting at 0.
    mid_prefix: Vec<f64>,
}

impl Trace {
    /// Feeds `S_n`. `S_0 = 0`.
    fn push(&mut self, n: usize, s: f64, scale: f64) {
        if self.mid_prefix.is_empty() {
            self.mid_prefix.push(0.0);
        }
        if self.sums.push(n, s, EXTREMUM_MARGIN * scale) {
            if let Some(&v) = self.sums.ext.midpoints.last() {
                let last = *self.mid_prefix.last().expect("seeded");
                self.mid_prefix.push(last + v);
            }
        }
    }

    fn oscillating(&self, n: usize) -> bool {
        self.sums.recent(n) && !self.sums.ext.midpoints.is_empty()
    }

    /// Mean of midpoints `k/2 + 1 ..= k`.
    fn half_mean(&self, k: usize) -> f64 {
        let lo = k / 2;
        (self.mid_prefix[k] - self.mid_prefix[lo]) / (k - lo) as f64
    }

    /// Estimate and envelope level for an oscillating trace, if settled.
    /// Past the gate only the trailing mean is used: two neighbouring
    /// midpoints of a beating trace agree by accident too often.
    fn settled(&self, bound: f64, second_level: bool) -> Option<(f64, u8)> {
        if !second_level {
            return self.sums.settled(bound).then(|| (self.last_midpoint(), 1));
        }
        let k = self.sums.ext.midpoints.len();
        if k < 16 {
            return None;
        }
        let (now, before) = (self.half_mean(k), self.half_mean(3 * k / 4));
        ((now - before).abs() <= bound).then_some((now, 2))
    }

    fn last_midpoint(&self) -> f64 {
        *self
            .sums
            .ext
            .midpoints
            .last()
            .expect("oscillating trace has a midpoint")
    }
}

struct Engine {
    cfg: SumConfig,
    re: Neumaier,
    im: Neumaier,
    tr_re: Trace,
    tr_im: Trace,
    window: VecDeque<(f64, f64)>,
    diag: SumDiagnostics,
}

impl Engine {
    fn new(cfg: SumConfig) -> Self {
        Self {
            cfg,
            re: Neumaier::default(),
            im: Neumaier::default(),
            tr_re: Trace::default(),
            tr_im: Trace::default(),
            window: VecDeque::with_capacity(cfg.window + 1),
            diag: SumDiagnostics::default(),
        }
    }

    fn push(&mut self, n: usize, t: Complex64) -> Complex64 {
        self.re.add(t.re);
        self.im.add(t.im);
        let s = Complex64::new(self.re.value(), self.im.value());
        let scale = Complex64::new(self.tr_re.sums.cur, self.tr_im.sums.cur).norm();
        self.tr_re.push(n, s.re, scale);
        self.tr_im.push(n, s.im, scale);
        self.window.push_back((t.re.abs(), t.im.abs()));
        if self.window.len() > self.cfg.window {
            self.window.pop_front();
        }
        if self.cfg.keep_trace {
            self.diag.partial_sums.push(s);
            self.diag.rel_changes.push(rel_change(t, s));
        }
        self.diag.terms_used = n;
        s
    }

    fn window_max(&self) -> (f64, f64) {
        self.window
            .iter()
            .fold((0.0f64, 0.0f64), |(a, b), &(x, y)| (a.max(x), b.max(y)))
    }

    fn finish(mut self, estimate: Complex64, converged: bool) -> SumDiagnostics {
        self.diag.extrema_re = self.tr_re.sums.ext;
        self.diag.extrema_im = self.tr_im.sums.ext;
        self.diag.estimate = estimate;
        self.diag.converged = converged;
        self.diag.envelope_level = 1;
        self.diag
    }
}

fn rel_change(t: Complex64, s: Complex64) -> f64 {
    let (a, b) = (t.norm(), s.norm());
    if a == 0.0 {
        0.0
    } else {
        a / b
    }
}

fn not_converged(diagnostics: SumDiagnostics) -> Error {
    Error::NotConverged {
        quantity: "series".into(),
        diagnostics: Box::new(diagnostics),
    }
}

fn check_mode(cfg: &SumConfig, want: SumMode) -> Result<()> {
    cfg.validate()?;
    if cfg.mode != want {
        return Err(Error::InvalidParams(format!(
            "summation mode {:?} passed to the {:?} summer",
            cfg.mode, want
        )));
    }
    Ok(())
}

/// Real series with the window rule: stop at the first `n >= n_min` where
/// every term in the trailing window is below `tol·|S_n|`.
pub fn sum_absolute<F: FnMut(usize) -> f64>(
    mut term: F,
    cfg: &SumConfig,
) -> Result<(f64, SumDiagnostics)> {
    try_sum_absolute(|n| Ok(term(n)), cfg)
}

pub fn try_sum_absolute<F: FnMut(usize) -> Result<f64>>(
    mut term: F,
    cfg: &SumConfig,
) -> Result<(f64, SumDiagnostics)> {
    check_mode(cfg, SumMode::Absolute)?;
    let mut eng = Engine::new(*cfg);
    let mut s = Complex64::default();
    for n in 1..=cfg.n_max {
        s = eng.push(n, Complex64::new(term(n)?, 0.0));
        if n >= cfg.n_min && eng.window.len() == cfg.window {
            let (w, _) = eng.window_max();
            if w == 0.0 || w < cfg.tol * s.re.abs() {
                let d = eng.finish(s, true);
                return Ok((s.re, d));
            }
        }
    }
    Err(not_converged(eng.finish(s, false)))
}

/// Complex series with the envelope-midpoint rule.
///
/// Each of the real and imaginary traces is either oscillating (it had an
/// extremum in the second half of the terms so far) or not. An oscillating
/// trace is estimated by the midpoint of its last two extrema and is settled
/// once its last two midpoints agree within `tol·|estimate|`. Beyond
/// `n_max / 4` terms the estimate switches to the mean of the latest half of
/// the midpoints, settled once it agrees with the same mean taken at three
/// quarters of the midpoints so far. Any other trace uses `S_n`
/// and the window rule. When both are settled at `n_c`, the estimate is
/// checked again at `2 n_c` and accepted if it moved by less than
/// `tol·|estimate|`.
pub fn sum_oscillatory<F: FnMut(usize) -> Complex64>(
    mut term: F,
    cfg: &SumConfig,
) -> Result<(Complex64, SumDiagnostics)> {
    try_sum_oscillatory(|n| Ok(term(n)), cfg)
}

pub fn try_sum_oscillatory<F: FnMut(usize) -> Result<Complex64>>(
    mut term: F,
    cfg: &SumConfig,
) -> Result<(Complex64, SumDiagnostics)> {
    check_mode(cfg, SumMode::Oscillatory)?;
    let mut eng = Engine::new(*cfg);
    let mut est = Complex64::default();
    let mut checkpoint: Option<(usize, Complex64)> = None;
    for n in 1..=cfg.n_max {
        let s = eng.push(n, term(n)?);
        let osc_re = eng.tr_re.oscillating(n);
        let osc_im = eng.tr_im.oscillating(n);
        let raw = Complex64::new(
            if osc_re {
                eng.tr_re.last_midpoint()
            } else {
                s.re
            },
            if osc_im {
                eng.tr_im.last_midpoint()
            } else {
                s.im
            },
        );
        if n < cfg.n_min {
            est = raw;
            continue;
        }
        let bound = cfg.tol * raw.norm();
        let (w_re, w_im) = eng.window_max();
        let window_full = eng.window.len() == cfg.window;
        let second_level = 4 * n > cfg.n_max;
        let settle = |osc: bool, tr: &Trace, w: f64, plain: f64| {
            if osc {
                tr.settled(bound, second_level)
            } else {
                (window_full && w <= bound).then_some((plain, 1))
            }
        };
        let (re, im) = (
            settle(osc_re, &eng.tr_re, w_re, s.re),
            settle(osc_im, &eng.tr_im, w_im, s.im),
        );
        let both = re.zip(im);
        est = both.map_or(raw, |((r, _), (i, _))| Complex64::new(r, i));
        match checkpoint {
            None if both.is_some() => checkpoint = Some((n, est)),
            Some((nc, prev)) if n == 2 * nc => {
                if let Some(((_, lr), (_, li))) = both.filter(|_| (est - prev).norm() <= bound) {
                    let mut d = eng.finish(est, true);
                    d.cauchy_fallback = !osc_re && !osc_im;
                    d.envelope_level = lr.max(li);
                    return Ok((est, d));
                }
                checkpoint = both.is_some().then_some((n, est));
            }
            _ => {}
        }
    }
    let d = eng.finish(est, false);
    if d.extrema_re.len() < 2 && d.extrema_im.len() < 2 {
        Err(Error::InsufficientOscillation {
            quantity: "series".into(),
            diagnostics: Box::new(d),
        })
    } else {
        Err(not_converged(d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

/// One sampled row of a partial-sum trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub n: usize,
    pub partial_sum: Complex64,
    pub rel_change: f64,
    pub is_extremum: bool,
    /// Latest midpoint estimate available at `n` (per trace; NaN before the second extremum).
    pub midpoint: Complex64,
}

/// Sampled trace of the first `n_max` partial sums. Extrema are detected on
/// the full sequence; `n_points` rows are kept. No convergence decision is made.
pub fn partial_sum_trace<F: FnMut(usize) -> Complex64>(
    mut term: F,
    n_max: usize,
    n_points: usize,
    spacing: Spacing,
) -> Result<Vec<TraceRow>> {
    try_partial_sum_trace(|n| Ok(term(n)), n_max, n_points, spacing)
}

pub fn try_partial_sum_trace<F: FnMut(usize) -> Result<Complex64>>(
    mut term: F,
    n_max: usize,
    n_points: usize,
    spacing: Spacing,
) -> Result<Vec<TraceRow>> {
    if n_points < 2 || n_max < 2 {
        return Err(Error::InvalidParams(
            "partial_sum_trace needs n_points >= 2 and n_max >= 2".into(),
        ));
    }
    let cfg = SumConfig {
        tol: 1.0,
        n_max,
        n_min: 1,
        window: 1,
        mode: SumMode::Oscillatory,
        keep_trace: true,
    };
    let mut eng = Engine::new(cfg);
    for n in 1..=n_max {
        eng.push(n, term(n)?);
    }
    // One more virtual step cannot be taken, so S_{n_max} is never an extremum.
    let d = eng.finish(Complex64::default(), false);
    let keep = sample_indices(n_max, n_points, spacing);
    Ok(build_rows(
        &d.partial_sums,
        &d.rel_changes,
        &d.extrema_re,
        &d.extrema_im,
        Some(&keep),
    ))
}

fn sample_indices(n_max: usize, n_points: usize, spacing: Spacing) -> Vec<usize> {
    let k = n_points.min(n_max);
    let mut v: Vec<usize> = (0..k)
        .map(|i| {
            let f = i as f64 / (k - 1) as f64;
            let x = match spacing {
                Spacing::Linear => 1.0 + f * (n_max - 1) as f64,
                Spacing::Log => (f * (n_max as f64).ln()).exp(),
            };
            (x.round() as usize).clamp(1, n_max)
        })
        .collect();
    v.dedup();
    v
}

fn build_rows(
    sums: &[Complex64],
    rel: &[f64],
    ere: &Extrema,
    eim: &Extrema,
    keep: Option<&[usize]>,
) -> Vec<TraceRow> {
    let mut rows = Vec::new();
    let (mut i_re, mut i_im) = (0usize, 0usize);
    let mut keep_it = keep.map(|k| k.iter().peekable());
    for (idx, (&s, &r)) in sums.iter().zip(rel).enumerate() {
        let n = idx + 1;
        while i_re < ere.len() && ere.indices[i_re] <= n {
            i_re += 1;
        }
        while i_im < eim.len() && eim.indices[i_im] <= n {
            i_im += 1;
        }
        if let Some(it) = keep_it.as_mut() {
            if it.peek() != Some(&&n) {
                continue;
            }
            it.next();
        }
        let ext = ere.indices.binary_search(&n).is_ok() || eim.indices.binary_search(&n).is_ok();
        // i_* extrema lie at indices <= n, giving i_* - 1 midpoints.
        let mid = |i: usize, e: &Extrema| if i >= 2 { e.midpoints[i - 2] } else { f64::NAN };
        rows.push(TraceRow {
            n,
            partial_sum: s,
            rel_change: r,
            is_extremum: ext,
            midpoint: Complex64::new(mid(i_re, ere), mid(i_im, eim)),
        });
    }
    rows
}

pub const TRACE_CSV_HEADER: &str =
    "n,partial_sum_re,partial_sum_im,rel_change,is_extremum,midpoint_estimate_re,midpoint_estimate_im";

pub fn write_trace_csv<W: Write>(mut w: W, rows: &[TraceRow]) -> Result<()> {
    writeln!(w, "{TRACE_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e}",
            r.n,
            r.partial_sum.re,
            r.partial_sum.im,
            r.rel_change,
            u8::from(r.is_extremum),
            r.midpoint.re,
            r.midpoint.im
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{LN_2, PI};

    fn alt_harmonic(k: usize) -> Complex64 {
        let s = if k % 2 == 1 { 1.0 } else { -1.0 };
        Complex64::new(s / k as f64, 0.0)
    }

    #[test]
    fn geometric_absolute() {
        let cfg = SumConfig::absolute(1e-12, 1000);
        let (s, d) = sum_absolute(|k| 0.5f64.powi(k as i32), &cfg).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(d.converged);
    }

    #[test]
    fn basel_absolute() {
        // ζ(2) oracle: a long high-cap sum plus the integral tail 1/N.
        let n = 1_000_000usize;
        let oracle: f64 = (1..=n)
            .rev()
            .map(|k| 1.0 / (k as f64 * k as f64))
            .sum::<f64>()
            + 1.0 / n as f64;
        assert!((oracle - PI * PI / 6.0).abs() < 1e-12);
        let cfg = SumConfig::absolute(1e-6, 1_000_000);
        let (s, d) = sum_absolute(|k| 1.0 / (k as f64).powi(2), &cfg).unwrap();
        // The window rule stops at k ~ 1/√tol, leaving a tail of order 1/k.
        let tail = 1.0 / d.terms_used as f64;
        assert!(
            (s + tail - oracle).abs() < 1e-6,
            "{s} after {} terms",
            d.terms_used
        );
        assert!((s - oracle).abs() < 2.0 * tail);
    }

    #[test]
    fn all_zero_converges_at_n_min() {
        let cfg = SumConfig::absolute(1e-3, 100);
        let (s, d) = sum_absolute(|_| 0.0, &cfg).unwrap();
        assert_eq!(s, 0.0);
        assert_eq!(d.terms_used, cfg.n_min);
    }

    #[test]
    fn absolute_not_converged_carries_diagnostics() {
        let cfg = SumConfig::absolute(1e-3, 50);
        let err = sum_absolute(|_| 1.0, &cfg).unwrap_err();
        let d = err.diagnostics().unwrap();
        assert_eq!(d.terms_used, 50);
        assert!(!d.converged);
    }

    #[test]
    fn mode_mismatch_rejected() {
        let cfg = SumConfig::oscillatory(1e-3, 50);
        assert!(sum_absolute(|_| 0.0, &cfg).is_err());
        let bad = SumConfig {
            n_min: 60,
            ..SumConfig::absolute(1e-3, 50)
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn alternating_harmonic_midpoint() {
        let cfg = SumConfig::oscillatory(1e-3, 1000).with_trace(true);
        let (s, d) = sum_oscillatory(alt_harmonic, &cfg).unwrap();
        assert!((s.re - LN_2).abs() < 1e-4, "{s}");
        assert!(d.terms_used <= 1000);
        assert!(!d.cauchy_fallback);
        assert_eq!(d.partial_sums.len(), d.terms_used);
        assert_eq!(d.rel_changes.len(), d.terms_used);
    }

    #[test]
    fn two_value_oscillation_is_exact() {
        let c = 0.37;
        let cfg = SumConfig::oscillatory(1e-3, 1000);
        let term = |k: usize| Complex64::new(if k % 2 == 1 { c } else { -c }, 0.0);
        let (s, d) = sum_oscillatory(term, &cfg).unwrap();
        assert_eq!(s.re, c / 2.0);
        assert!(d.extrema_re.midpoints.iter().all(|&m| m == c / 2.0));
    }

    #[test]
    fn monotone_falls_back_to_cauchy() {
        let cfg = SumConfig::oscillatory(1e-3, 1000);
        let (s, d) = sum_oscillatory(|k| Complex64::new(0.5f64.powi(k as i32), 0.0), &cfg).unwrap();
        assert!((s.re - 1.0).abs() < 1e-9);
        assert!(d.cauchy_fallback);
    }

    #[test]
    fn insufficient_oscillation_error() {
        let cfg = SumConfig::oscillatory(1e-3, 100);
        let err = sum_oscillatory(|_| Complex64::new(1.0, 0.0), &cfg).unwrap_err();
        assert!(matches!(err, Error::InsufficientOscillation { .. }));
    }

    #[test]
    fn oscillating_non_convergent_reports_not_converged() {
        // growing amplitude: the envelope never settles
        let cfg = SumConfig::oscillatory(1e-3, 500);
        let err = sum_oscillatory(|k| Complex64::new(k as f64 * (k as f64).cos(), 0.0), &cfg)
            .unwrap_err();
        assert!(matches!(err, Error::NotConverged { .. }));
    }

    #[test]
    fn beating_series_match_polylog() {
        // Σ e^{iπηk}/√k = Li_{1/2}(e^{iπη}); for η near 1 the partial sums
        // alternate under a slow beat, like the mode sums near the wall.
        // Reference values from mpmath.polylog at 30 digits.
        let cases = [
            (
                0.7,
                Complex64::new(-0.548_778_438_938_188_2, 0.371_414_958_666_637_03),
            ),
            (
                0.87,
                Complex64::new(-0.594_887_974_128_388_7, 0.156_247_928_179_911),
            ),
            (
                0.95,
                Complex64::new(-0.603_432_035_432_031, 0.059_763_575_823_213_58),
            ),
        ];
        for (eta, want) in cases {
            let th = std::f64::consts::PI * eta;
            let term = |k: usize| Complex64::from_polar(1.0 / (k as f64).sqrt(), th * k as f64);
            let (got, d) = sum_oscillatory(term, &SumConfig::oscillatory(1e-3, 200_000)).unwrap();
            let err = (got - want).norm() / want.norm();
            assert!(
                err < 1e-2,
                "η={eta}: {got} vs {want}, level {}",
                d.envelope_level
            );
        }
    }

    #[test]
    fn geometric_trace_rel_changes_decrease() {
        let rows = partial_sum_trace(
            |k| Complex64::new(0.5f64.powi(k as i32), 0.0),
            40,
            10,
            Spacing::Linear,
        )
        .unwrap();
        assert_eq!(rows.len(), 10);
        assert!(rows.windows(2).all(|w| w[1].rel_change < w[0].rel_change));
    }

    #[test]
    fn alternating_trace_extrema_alternate() {
        let rows = partial_sum_trace(alt_harmonic, 2000, 30, Spacing::Log).unwrap();
        let ext: Vec<&TraceRow> = rows.iter().filter(|r| r.is_extremum).collect();
        assert!(ext.len() > 5);
        // every interior index is an extremum; odd ones maxima, even ones minima
        for r in &ext {
            let prev = if r.n == 1 {
                0.0
            } else {
                r.partial_sum.re - alt_harmonic(r.n).re
            };
            if r.n % 2 == 1 {
                assert!(r.partial_sum.re > prev);
            } else {
                assert!(r.partial_sum.re < prev);
            }
        }
        assert!(rows.iter().all(|r| r.n == 2000 || r.is_extremum));
    }

    #[test]
    fn csv_layout() {
        let rows = partial_sum_trace(alt_harmonic, 10, 3, Spacing::Linear).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(TRACE_CSV_HEADER));
        assert_eq!(lines.count(), 3);
        assert!(!text.contains('\r'));
    }

    proptest! {
        #[test]
        fn geometric_within_ten_tol(r in 0.05f64..0.9, tol_exp in 3i32..12) {
            let tol = 10f64.powi(-tol_exp);
            let cfg = SumConfig::absolute(tol, 100_000);
            let (s, _) = sum_absolute(|k| r.powi(k as i32), &cfg).unwrap();
            let exact = r / (1.0 - r);
            prop_assert!((s - exact).abs() < 10.0 * tol * exact);
        }

        #[test]
        fn extrema_are_genuine(seed in 0u64..1000) {
            let term = |k: usize| {
                let x = (k as f64 * 0.37 + seed as f64).sin();
                Complex64::new(x / (k as f64).sqrt(), (0.5 * x).cos() / k as f64)
            };
            let cfg = SumConfig::oscillatory(1e-9, 300).with_trace(true);
            let d = match sum_oscillatory(term, &cfg) {
                Ok((_, d)) => d,
                Err(e) => e.diagnostics().unwrap().clone(),
            };
            prop_assert_eq!(d.partial_sums.len(), d.terms_used);
            for (ext, pick) in [(&d.extrema_re, 0), (&d.extrema_im, 1)] {
                prop_assert!(ext.indices.windows(2).all(|w| w[0] < w[1]));
                prop_assert_eq!(ext.midpoints.len(), ext.len().saturating_sub(1));
                let val = |n: usize| if n == 0 { 0.0 } else if pick == 0 { d.partial_sums[n - 1].re } else { d.partial_sums[n - 1].im };
                for &i in &ext.indices {
                    let (a, b, c) = (val(i - 1), val(i), val(i + 1));
                    prop_assert!((b > a && b > c) || (b < a && b < c));
                }
            }
        }
    }
}
