//! Response functions of two detectors in the cylindrical cavity.
//!
//! Detector A sits on the axis and detector B at radius `rho0`. The
//! production path evaluates the mode sums in closed form; the oracle path
//! integrates the Hankel-function Wightman sum in the time domain.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{graded_breakpoints, GaussLegendre};
use crate::series::{
    try_sum_absolute, try_sum_oscillatory, DiagSummary, SumConfig, SumDiagnostics,
};
use crate::specfun::{gauss_cosh, hankel2_0, ik0_scaled, jn, mode_column, ModeColumn};

/// Warning threshold for `x_aa + x_bb`.
pub const PERTURBATIVE_LIMIT: f64 = 0.1;

/// Coupling used when none is given.
pub const DEFAULT_LAMBDA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    /// Energy gap Ω.
    pub omega: f64,
    /// Switching width σ.
    pub sigma: f64,
    /// Coupling λ.
    pub lambda: f64,
}

impl DetectorParams {
    pub fn new(omega: f64, sigma: f64, lambda: f64) -> Result<Self> {
        let p = Self {
            omega,
            sigma,
            lambda,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "omega must be finite and >= 0, got {}",
                self.omega
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "sigma must be finite and > 0, got {}",
                self.sigma
            )));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "lambda must be finite and > 0, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityConfig {
    pub radius: f64,
    /// Radial position of detector B.
    pub rho0: f64,
}

impl CavityConfig {
    pub fn new(radius: f64, rho0: f64) -> Result<Self> {
        let c = Self { radius, rho0 };
        c.validate()?;
        Ok(c)
    }

    /// `rho0 = radius` is accepted so the wall limit can be evaluated.
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "radius must be finite and > 0, got {}",
                self.radius
            )));
        }
        if !(self.rho0 >= 0.0 && self.rho0 <= self.radius) {
            return Err(Error::InvalidParams(format!(
                "need 0 <= rho0 <= R, got rho0={} R={}",
                self.rho0, self.radius
            )));
        }
        Ok(())
    }

    pub fn eta(&self) -> f64 {
        self.rho0 / self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeCutoffs {
    pub n_max_x: usize,
    pub m_max: u32,
    pub n_max_m: usize,
    /// Tolerance of the oscillating M series.
    pub tol: f64,
    /// Tolerance of the X series and of the azimuthal sum.
    pub tol_x: f64,
}

impl Default for ModeCutoffs {
    fn default() -> Self {
        Self {
            n_max_x: 2000,
            m_max: 2000,
            n_max_m: 200_000,
            tol: 1e-3,
            tol_x: 1e-12,
        }
    }
}

impl ModeCutoffs {
    pub fn validate(&self) -> Result<()> {
        if self.n_max_x <= 16 || self.n_max_m <= 16 {
            return Err(Error::InvalidParams(
                "n_max_x and n_max_m must exceed 16".into(),
            ));
        }
        for (name, t) in [("tol", self.tol), ("tol_x", self.tol_x)] {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must lie in (0, 1), got {t}"
                )));
            }
        }
        Ok(())
    }

    fn x_config(&self) -> SumConfig {
        SumConfig::absolute(self.tol_x, self.n_max_x)
    }

    fn m_config(&self) -> SumConfig {
        SumConfig::oscillatory(self.tol, self.n_max_m)
    }
}

/// Per-entry convergence records of a [`CorrelationSet`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorrelationDiagnostics {
    pub x_aa: Option<DiagSummary>,
    pub x_bb: Option<DiagSummary>,
    pub x_ab: Option<DiagSummary>,
    pub m_ab: Option<DiagSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSet {
    pub x_aa: f64,
    pub x_bb: f64,
    pub x_ab: f64,
    pub m_ab: Complex64,
    /// Convergence of `x_aa, x_bb, x_ab, m_ab`.
    pub converged: [bool; 4],
    pub diagnostics: CorrelationDiagnostics,
}

impl CorrelationSet {
    pub fn new(x_aa: f64, x_bb: f64, x_ab: f64, m_ab: Complex64) -> Self {
        Self {
            x_aa,
            x_bb,
            x_ab,
            m_ab,
            converged: [true; 4],
            diagnostics: CorrelationDiagnostics::default(),
        }
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    /// Four-character `0/1` string for `x_aa, x_bb, x_ab, m_ab`.
    pub fn converged_flags(&self) -> String {
        self.converged
            .iter()
            .map(|&c| if c { '1' } else { '0' })
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.x_aa.is_finite()
            && self.x_bb.is_finite()
            && self.x_ab.is_finite()
            && self.m_ab.is_finite()
    }
}

/// `J_m(ξη)` with the exact limits at the axis and at the wall.
fn radial(m: u32, xi: f64, eta: f64) -> f64 {
    if eta == 0.0 {
        if m == 0 {
            1.0
        } else {
            0.0
        }
    } else if eta == 1.0 {
        0.0
    } else {
        jn(m, xi * eta)
    }
}

/// Lazily extended view of one cached zero column.
struct Cursor {
    m: u32,
    cap: usize,
    col: Option<Arc<ModeColumn>>,
}

impl Cursor {
    fn new(m: u32, cap: usize) -> Self {
        Self { m, cap, col: None }
    }

    /// `(ξ_mn, J_{m+1}(ξ_mn)²)`, 1-based `n`.
    fn get(&mut self, n: usize) -> Result<(f64, f64)> {
        if self.col.as_ref().is_none_or(|c| c.len() < n) {
            let want = (2 * n).max(64).min(self.cap.max(n));
            self.col = Some(mode_column(self.m, want)?);
        }
        let c = self.col.as_ref().unwrap();
        Ok((c.zeros[n - 1], c.norms[n - 1]))
    }
}

fn x_prefactor(det: &DetectorParams, cav: &CavityConfig) -> f64 {
    det.lambda * det.lambda * det.sigma * det.sigma / (2.0 * PI * cav.radius * cav.radius)
}

fn m_prefactor(det: &DetectorParams, cav: &CavityConfig) -> f64 {
    let os = det.omega * det.sigma;
    det.lambda * det.lambda * det.sigma * det.sigma / (4.0 * PI * cav.radius * cav.radius)
        * (-os * os).exp()
}

/// Terms of one azimuthal slice of an X series,
/// `pre·G(σΩ, σξ/R)·J_m(ξη_i)J_m(ξη_j)/J_{m+1}²(ξ)`.
pub struct XSlice {
    pre: f64,
    a: f64,
    s_over_r: f64,
    eta_i: f64,
    eta_j: f64,
    m: u32,
    cursor: Cursor,
}

impl XSlice {
    pub fn new(
        det: &DetectorParams,
        cav: &CavityConfig,
        m: u32,
        eta_i: f64,
        eta_j: f64,
        cap: usize,
    ) -> Self {
        Self {
            pre: x_prefactor(det, cav),
            a: det.omega * det.sigma,
            s_over_r: det.sigma / cav.radius,
            eta_i,
            eta_j,
            m,
            cursor: Cursor::new(m, cap),
        }
    }

    pub fn term(&mut self, n: usize) -> Result<f64> {
        let (xi, norm) = self.cursor.get(n)?;
        let g = gauss_cosh(self.a, self.s_over_r * xi);
        if g == 0.0 {
            return Ok(0.0);
        }
        let ri = radial(self.m, xi, self.eta_i);
        let rj = if self.eta_j == self.eta_i {
            ri
        } else {
            radial(self.m, xi, self.eta_j)
        };
        Ok(self.pre * g * ri * rj / norm)
    }
}

/// Terms of the M_AB series,
/// `pre·J_0(ξη)/J_1²(ξ)·(−e^{−x}K_0(x) + iπ e^{−x}I_0(x))`, `x = ξ²σ²/2R²`.
pub struct MSeries {
    pre: f64,
    s_over_r: f64,
    eta: f64,
    cursor: Cursor,
}

impl MSeries {
    pub fn new(det: &DetectorParams, cav: &CavityConfig, cap: usize) -> Self {
        Self {
            pre: m_prefactor(det, cav),
            s_over_r: det.sigma / cav.radius,
            eta: cav.eta(),
            cursor: Cursor::new(0, cap),
        }
    }

    pub fn term(&mut self, n: usize) -> Result<Complex64> {
        let (xi, norm) = self.cursor.get(n)?;
        let r = radial(0, xi, self.eta);
        if r == 0.0 {
            return Ok(Complex64::default());
        }
        let q = self.s_over_r * xi;
        let (ie, ke) = ik0_scaled(0.5 * q * q);
        Ok(Complex64::new(-ke, PI * ie) * (self.pre * r / norm))
    }
}

fn check(det: &DetectorParams, cav: &CavityConfig, cut: &ModeCutoffs) -> Result<()> {
    det.validate()?;
    cav.validate()?;
    cut.validate()
}

/// `X_AA`; independent of `rho0`.
pub fn x_aa(
    det: &DetectorParams,
    cav: &CavityConfig,
    cut: &ModeCutoffs,
) -> Result<(f64, SumDiagnostics)> {
    check(det, cav, cut)?;
    let mut s = XSlice::new(det, cav, 0, 0.0, 0.0, cut.n_max_x);
    try_sum_absolute(|n| s.term(n), &cut.x_config()).map_err(|e| e.relabel("x_aa"))
}

/// `X_AB`, real.
pub fn x_ab(
    det: &DetectorParams,
    cav: &CavityConfig,
    cut: &ModeCutoffs,
) -> Result<(f64, SumDiagnostics)> {
    check(det, cav, cut)?;
    let mut s = XSlice::new(det, cav, 0, 0.0, cav.eta(), cut.n_max_x);
    try_sum_absolute(|n| s.term(n), &cut.x_config()).map_err(|e| e.relabel("x_ab"))
}

/// `X_BB`, folded onto `m >= 0` with weight `2 − δ_{m0}`.
///
/// The returned diagnostics describe the azimuthal sum: one "term" per
/// m-slice, each slice itself summed with the window rule. The sum stops
/// once a slice adds no more than `tol_x` of the running total.
pub fn x_bb(
    det: &DetectorParams,
    cav: &CavityConfig,
    cut: &ModeCutoffs,
) -> Result<(f64, SumDiagnostics)> {
    check(det, cav, cut)?;
    let eta = cav.eta();
    let cfg = cut.x_config();
    let mut total = 0.0;
    let mut diag = SumDiagnostics::default();
    for m in 0..=cut.m_max {
        // J_m(0) = δ_{m0} and J_m(ξ) = 0 at the wall: these slices vanish exactly.
        let slice = if m > 0 && (eta == 0.0 || eta == 1.0) {
            0.0
        } else {
            let mut s = XSlice::new(det, cav, m, eta, eta, cut.n_max_x);
            try_sum_absolute(|n| s.term(n), &cfg)
                .map_err(|e| e.relabel("x_bb"))?
                .0
        };
        let weighted = if m == 0 { slice } else { 2.0 * slice };
        total += weighted;
        diag.terms_used = m as usize + 1;
        diag.partial_sums.push(Complex64::new(total, 0.0));
        diag.rel_changes.push(if weighted == 0.0 {
            0.0
        } else {
            (weighted / total).abs()
        });
        if m > 0 && weighted.abs() <= cut.tol_x * total.abs() {
            diag.converged = true;
            diag.estimate = Complex64::new(total, 0.0);
            return Ok((total, diag));
        }
    }
    diag.estimate = Complex64::new(total, 0.0);
    Err(Error::NotConverged {
        quantity: "x_bb".into(),
        diagnostics: Box::new(diag),
    })
}

/// `M_AB` via the envelope-midpoint rule.
pub fn m_ab(
    det: &DetectorParams,
    cav: &CavityConfig,
    cut: &ModeCutoffs,
) -> Result<(Complex64, SumDiagnostics)> {
    check(det, cav, cut)?;
    let mut s = MSeries::new(det, cav, cut.n_max_m);
    try_sum_oscillatory(|n| s.term(n), &cut.m_config()).map_err(|e| e.relabel("m_ab"))
}

/// All four entries. Fails on the first unconverged series.
pub fn correlations(
    det: &DetectorParams,
    cav: &CavityConfig,
    cut: &ModeCutoffs,
) -> Result<CorrelationSet> {
    let (aa, daa) = x_aa(det, cav, cut)?;
    let (bb, dbb) = x_bb(det, cav, cut)?;
    let (ab, dab) = x_ab(det, cav, cut)?;
    let (m, dm) = m_ab(det, cav, cut)?;
    let set = CorrelationSet {
        x_aa: aa,
        x_bb: bb,
        x_ab: ab,
        m_ab: m,
        converged: [true; 4],
        diagnostics: CorrelationDiagnostics {
            x_aa: Some(daa.summary()),
            x_bb: Some(dbb.summary()),
            x_ab: Some(dab.summary()),
            m_ab: Some(dm.summary()),
        },
    };
    warn_if_nonperturbative(&set);
    Ok(set)
}

/// Like [`correlations`] but an unconverged series yields NaN and a cleared
/// flag instead of an error. Parameter and zero-table errors still propagate.
pub fn correlations_lenient(
    det: &DetectorParams,
    cav: &CavityConfig,
    cut: &ModeCutoffs,
) -> Result<CorrelationSet> {
    fn soft<T>(r: Result<(T, SumDiagnostics)>, nan: T) -> Result<(T, bool, Option<DiagSummary>)> {
        match r {
            Ok((v, d)) => Ok((v, true, Some(d.summary()))),
            Err(e) => match e.diagnostics() {
                Some(d) => Ok((nan, false, Some(d.summary()))),
                None => Err(e),
            },
        }
    }
    let (aa, caa, daa) = soft(x_aa(det, cav, cut), f64::NAN)?;
    let (bb, cbb, dbb) = soft(x_bb(det, cav, cut), f64::NAN)?;
    let (ab, cab, dab) = soft(x_ab(det, cav, cut), f64::NAN)?;
    let (m, cm, dm) = soft(m_ab(det, cav, cut), Complex64::new(f64::NAN, f64::NAN))?;
    let set = CorrelationSet {
        x_aa: aa,
        x_bb: bb,
        x_ab: ab,
        m_ab: m,
        converged: [caa, cbb, cab, cm],
        diagnostics: CorrelationDiagnostics {
            x_aa: daa,
            x_bb: dbb,
            x_ab: dab,
            m_ab: dm,
        },
    };
    warn_if_nonperturbative(&set);
    Ok(set)
}

fn warn_if_nonperturbative(set: &CorrelationSet) {
    if set.x_aa + set.x_bb > PERTURBATIVE_LIMIT {
        log::warn!(
            "x_aa + x_bb = {:.3e} exceeds {PERTURBATIVE_LIMIT}; second-order state may be unreliable",
            set.x_aa + set.x_bb
        );
    }
}

// ---------------------------------------------------------------------------
// Oracle path

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Detector {
    A,
    B,
}

impl Detector {
    fn eta(self, cav: &CavityConfig) -> f64 {
        match self {
            Detector::A => 0.0,
            Detector::B => cav.eta(),
        }
    }
}

/// Finite mode set shared by the oracle and the matched closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    /// Radial modes per azimuthal order.
    pub n_modes: usize,
    /// Highest azimuthal order `|m|`.
    pub m_modes: u32,
}

impl Truncation {
    pub fn new(n_modes: usize, m_modes: u32) -> Self {
        Self { n_modes, m_modes }
    }
}

/// `(k_mn = ξ_mn/R, weight·J_m(ξη_i)J_m(ξη_j)/J_{m+1}²(ξ))` for every
/// mode of the truncation; modes with a vanishing coefficient are dropped.
fn mode_list(eta_i: f64, eta_j: f64, radius: f64, trunc: &Truncation) -> Result<Vec<(f64, f64)>> {
    let m_top = if eta_i == 0.0 || eta_j == 0.0 || eta_i == 1.0 || eta_j == 1.0 {
        0
    } else {
        trunc.m_modes
    };
    let mut out = Vec::new();
    for m in 0..=m_top {
        let col = mode_column(m, trunc.n_modes)?;
        let w = if m == 0 { 1.0 } else { 2.0 };
        for (&xi, &norm) in col.zeros.iter().zip(&col.norms).take(trunc.n_modes) {
            let c = w * radial(m, xi, eta_i) * radial(m, xi, eta_j) / norm;
            if c != 0.0 {
                out.push((xi / radius, c));
            }
        }
    }
    Ok(out)
}

fn wightman_from_modes(tau: f64, modes: &[(f64, f64)], radius: f64) -> Complex64 {
    let t = tau.abs();
    let s: Complex64 = modes.iter().map(|&(k, c)| hankel2_0(k * t) * c).sum();
    let w = Complex64::new(0.0, -1.0 / (4.0 * PI * radius * radius)) * s;
    if tau > 0.0 {
        w
    } else {
        w.conj()
    }
}

/// Truncated mode-sum Wightman function between radii `rho_i` and `rho_j`
/// at proper-time difference `tau_minus`. Oracle use only.
pub fn wightman_cavity(
    tau_minus: f64,
    rho_i: f64,
    rho_j: f64,
    cav: &CavityConfig,
    trunc: &Truncation,
) -> Result<Complex64> {
    cav.validate()?;
    if tau_minus == 0.0 || !tau_minus.is_finite() {
        return Err(Error::Domain(format!(
            "wightman_cavity: tau_minus must be finite and nonzero, got {tau_minus}"
        )));
    }
    for r in [rho_i, rho_j] {
        if !(r >= 0.0 && r <= cav.radius) {
            return Err(Error::Domain(format!(
                "wightman_cavity: radius {r} outside [0, R]"
            )));
        }
    }
    let modes = mode_list(rho_i / cav.radius, rho_j / cav.radius, cav.radius, trunc)?;
    Ok(wightman_from_modes(tau_minus, &modes, cav.radius))
}

/// `∫_0^{T} e^{−τ²/4σ²} f(τ) dτ` on a mesh graded towards the logarithmic
/// singularity at 0, with panels resolving oscillations up to `k_max`.
fn windowed_integral<F: FnMut(f64) -> Complex64>(
    sigma: f64,
    k_max: f64,
    upper: f64,
    mut f: F,
) -> Complex64 {
    let h = (sigma / 4.0).min(PI / k_max.max(1e-300));
    let gl = GaussLegendre::standard();
    let inv = 1.0 / (4.0 * sigma * sigma);
    graded_breakpoints(upper, h, 40)
        .windows(2)
        .map(|w| gl.integrate_complex(w[0], w[1], |t| f(t) * (-t * t * inv).exp()))
        .sum()
}

/// Window half-width, in units of σ, of the oracle time integrals.
pub const ORACLE_WINDOW: f64 = 10.0;

/// `X_ij` by direct time-domain quadrature of the truncated Wightman sum.
pub fn oracle_x(
    i: Detector,
    j: Detector,
    det: &DetectorParams,
    cav: &CavityConfig,
    trunc: &Truncation,
) -> Result<f64> {
    oracle_x_window(i, j, det, cav, trunc, ORACLE_WINDOW)
}

/// [`oracle_x`] over `|τ| <= window·σ`.
pub fn oracle_x_window(
    i: Detector,
    j: Detector,
    det: &DetectorParams,
    cav: &CavityConfig,
    trunc: &Truncation,
    window: f64,
) -> Result<f64> {
    det.validate()?;
    cav.validate()?;
    let modes = mode_list(i.eta(cav), j.eta(cav), cav.radius, trunc)?;
    if modes.is_empty() {
        return Ok(0.0);
    }
    let k_max = modes
        .iter()
        .fold(0.0f64, |a, &(k, _)| a.max(k))
        .max(det.omega);
    let om = det.omega;
    // W(−τ) = W(τ)*, so the full line is twice the real part of the half line.
    let half = windowed_integral(det.sigma, k_max, window * det.sigma, |t| {
        Complex64::from_polar(1.0, -om * t) * wightman_from_modes(t, &modes, cav.radius)
    });
    let v = PI.sqrt() * det.sigma * det.lambda * det.lambda * 2.0 * half.re;
    if !v.is_finite() {
        return Err(Error::Quadrature(format!(
            "oracle_x({i:?},{j:?}) produced {v}"
        )));
    }
    Ok(v)
}

/// `M_AB` by direct half-line quadrature of the truncated Wightman sum.
pub fn oracle_m(det: &DetectorParams, cav: &CavityConfig, trunc: &Truncation) -> Result<Complex64> {
    det.validate()?;
    cav.validate()?;
    let modes = mode_list(0.0, cav.eta(), cav.radius, trunc)?;
    if modes.is_empty() {
        return Ok(Complex64::default());
    }
    let k_max = modes.iter().fold(0.0f64, |a, &(k, _)| a.max(k));
    let integral = windowed_integral(det.sigma, k_max, ORACLE_WINDOW * det.sigma, |t| {
        wightman_from_modes(t, &modes, cav.radius)
    });
    let os = det.omega * det.sigma;
    let v = integral * (-PI.sqrt() * det.sigma * det.lambda * det.lambda * (-os * os).exp());
    if !v.is_finite() {
        return Err(Error::Quadrature(format!("oracle_m produced {v}")));
    }
    Ok(v)
}

/// Closed-form `X_ij` summed over exactly the modes of `trunc`.
pub fn x_truncated(
    i: Detector,
    j: Detector,
    det: &DetectorParams,
    cav: &CavityConfig,
    trunc: &Truncation,
) -> Result<f64> {
    det.validate()?;
    cav.validate()?;
    let modes = mode_list(i.eta(cav), j.eta(cav), cav.radius, trunc)?;
    let (a, pre) = (det.omega * det.sigma, x_prefactor(det, cav));
    Ok(modes
        .iter()
        .map(|&(k, c)| pre * c * gauss_cosh(a, det.sigma * k))
        .sum())
}

/// Closed-form `M_AB` summed over the first `trunc.n_modes` modes.
pub fn m_truncated(
    det: &DetectorParams,
    cav: &CavityConfig,
    trunc: &Truncation,
) -> Result<Complex64> {
    det.validate()?;
    cav.validate()?;
    let mut s = MSeries::new(det, cav, trunc.n_modes);
    let mut acc = Complex64::default();
    for n in 1..=trunc.n_modes {
        acc += s.term(n)?;
    }
    Ok(acc)
}

/// Left side of the per-mode identity,
/// `∫_0^∞ e^{−τ²/4σ²} H_0^{(2)}(kτ) dτ`, by quadrature.
pub fn int1_quadrature(k: f64, sigma: f64) -> Complex64 {
    windowed_integral(sigma, k, 2.0 * ORACLE_WINDOW * sigma, |t| hankel2_0(k * t))
}

/// Right side of the per-mode identity,
/// `(σ/√π) e^{−x}[π I_0(x) + i K_0(x)]` with `x = k²σ²/2`.
pub fn int1_closed(k: f64, sigma: f64) -> Complex64 {
    let q = k * sigma;
    let (ie, ke) = ik0_scaled(0.5 * q * q);
    Complex64::new(PI * ie, ke) * (sigma / PI.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel_zeros;
    use proptest::prelude::*;

    fn det(os: f64) -> DetectorParams {
        DetectorParams::new(os, 1.0, 0.1).unwrap()
    }

    fn cav(s_over_r: f64, rho0_sigma: f64) -> CavityConfig {
        CavityConfig::new(1.0 / s_over_r, rho0_sigma).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn validation() {
        assert!(DetectorParams::new(-1.0, 1.0, 0.1).is_err());
        assert!(DetectorParams::new(1.0, 0.0, 0.1).is_err());
        assert!(DetectorParams::new(1.0, 1.0, 0.0).is_err());
        assert!(CavityConfig::new(1.0, 1.5).is_err());
        assert!(CavityConfig::new(0.0, 0.0).is_err());
        let bad = ModeCutoffs {
            tol: 1.0,
            ..Default::default()
        };
        assert!(x_aa(&det(1.0), &cav(0.1, 1.0), &bad).is_err());
    }

    #[test]
    fn x_aa_gaussian_suppression() {
        let (v, _) = x_aa(&det(30.0), &cav(0.005, 1.0), &ModeCutoffs::default()).unwrap();
        assert!(v < 1e-50, "{v}");
    }

    #[test]
    fn x_aa_independent_of_rho0() {
        let cut = ModeCutoffs::default();
        let a = x_aa(&det(1.0), &cav(0.1, 1.0), &cut).unwrap().0;
        let b = x_aa(&det(1.0), &cav(0.1, 7.0), &cut).unwrap().0;
        assert_eq!(a, b);
    }

    #[test]
    fn axis_degeneracy_is_exact() {
        let cut = ModeCutoffs::default();
        let c = cav(0.05, 0.0);
        let aa = x_aa(&det(1.0), &c, &cut).unwrap().0;
        assert_eq!(x_bb(&det(1.0), &c, &cut).unwrap().0, aa);
        assert_eq!(x_ab(&det(1.0), &c, &cut).unwrap().0, aa);
    }

    #[test]
    fn x_bb_far_off_axis_converges() {
        // needs close to 300 azimuthal orders
        let c = CavityConfig::new(1.0 / 0.011744, 74.055).unwrap();
        let (v, d) = x_bb(&det(0.978), &c, &ModeCutoffs::default()).unwrap();
        assert!(d.terms_used > 200, "{}", d.terms_used);
        let aa = x_aa(&det(0.978), &c, &ModeCutoffs::default()).unwrap().0;
        assert!(v > 0.9 * aa && v < aa, "{v} {aa}");
    }

    #[test]
    fn wall_limits() {
        let cut = ModeCutoffs::default();
        let d = det(1.0);
        let r = 10.0;
        let wall = CavityConfig::new(r, r).unwrap();
        assert_eq!(x_ab(&d, &wall, &cut).unwrap().0, 0.0);
        assert_eq!(m_ab(&d, &wall, &cut).unwrap().0, Complex64::default());
        let near = CavityConfig::new(r, 0.999 * r).unwrap();
        let mid = CavityConfig::new(r, 0.5 * r).unwrap();
        let bb_near = x_bb(&d, &near, &cut).unwrap().0;
        let bb_mid = x_bb(&d, &mid, &cut).unwrap().0;
        assert!(bb_near < bb_mid);
        let ab_near = x_ab(&d, &near, &cut).unwrap().0;
        let ab_mid = x_ab(&d, &mid, &cut).unwrap().0;
        assert!(ab_near.abs() < 1e-3 * ab_mid.abs().max(x_aa(&d, &mid, &cut).unwrap().0));
    }

    #[test]
    fn lambda_squared_scaling() {
        let cut = ModeCutoffs::default();
        let c = cav(0.1, 1.0);
        let a = correlations(&DetectorParams::new(1.0, 1.0, 0.1).unwrap(), &c, &cut).unwrap();
        let b = correlations(&DetectorParams::new(1.0, 1.0, 0.2).unwrap(), &c, &cut).unwrap();
        assert_eq!(b.x_aa, 4.0 * a.x_aa);
        assert_eq!(b.x_bb, 4.0 * a.x_bb);
        assert_eq!(b.x_ab, 4.0 * a.x_ab);
        assert_eq!(b.m_ab, a.m_ab * 4.0);
    }

    #[test]
    fn x_aa_matches_oracle() {
        let t = Truncation::new(200, 0);
        let (d, c) = (det(1.0), cav(0.1, 1.0));
        let closed = x_truncated(Detector::A, Detector::A, &d, &c, &t).unwrap();
        let oracle = oracle_x(Detector::A, Detector::A, &d, &c, &t).unwrap();
        assert!(rel(closed, oracle) < 1e-6, "{closed} vs {oracle}");
        // the full series is already converged well inside 200 modes
        let full = x_aa(&d, &c, &ModeCutoffs::default()).unwrap().0;
        assert!(rel(full, closed) < 1e-12);
    }

    #[test]
    fn x_bb_matches_oracle() {
        let t = Truncation::new(200, 12);
        let (d, c) = (det(1.0), cav(0.1, 2.0));
        let closed = x_truncated(Detector::B, Detector::B, &d, &c, &t).unwrap();
        let oracle = oracle_x(Detector::B, Detector::B, &d, &c, &t).unwrap();
        assert!(rel(closed, oracle) < 1e-3, "{closed} vs {oracle}");
    }

    #[test]
    fn x_ab_matches_oracle_and_is_symmetric() {
        let t = Truncation::new(200, 0);
        let (d, c) = (det(1.0), cav(0.025, 2.0));
        let closed = x_truncated(Detector::A, Detector::B, &d, &c, &t).unwrap();
        let ab = oracle_x(Detector::A, Detector::B, &d, &c, &t).unwrap();
        let ba = oracle_x(Detector::B, Detector::A, &d, &c, &t).unwrap();
        assert!(rel(closed, ab) < 1e-3, "{closed} vs {ab}");
        assert!((ab - ba).abs() <= 1e-12 * ab.abs());
    }

    #[test]
    fn oracle_window_doubling() {
        let t = Truncation::new(100, 0);
        let (d, c) = (det(1.0), cav(0.1, 1.0));
        let w10 = oracle_x_window(Detector::A, Detector::B, &d, &c, &t, 10.0).unwrap();
        let w20 = oracle_x_window(Detector::A, Detector::B, &d, &c, &t, 20.0).unwrap();
        assert!(rel(w10, w20) < 1e-10, "{w10} vs {w20}");
    }

    #[test]
    fn m_ab_matches_oracle() {
        let t = Truncation::new(200, 0);
        let (d, c) = (det(1.0), cav(0.1, 1.0));
        let closed = m_truncated(&d, &c, &t).unwrap();
        let oracle = oracle_m(&d, &c, &t).unwrap();
        assert!(
            (closed - oracle).norm() < 1e-4 * closed.norm(),
            "{closed} vs {oracle}"
        );
    }

    #[test]
    fn int1_identity_first_mode() {
        let xi = bessel_zeros(0, 1).unwrap()[0];
        let k = xi / 10.0;
        let (q, c) = (int1_quadrature(k, 1.0), int1_closed(k, 1.0));
        assert!((q - c).norm() < 1e-8 * c.norm(), "{q} vs {c}");
    }

    #[test]
    fn wightman_properties() {
        let c = CavityConfig::new(10.0, 2.0).unwrap();
        let t = Truncation::new(50, 5);
        for &tau in &[0.3, 1.7, 4.0] {
            let p = wightman_cavity(tau, 2.0, 2.0, &c, &t).unwrap();
            let m = wightman_cavity(-tau, 2.0, 2.0, &c, &t).unwrap();
            assert_eq!(m, p.conj());
            assert_eq!(
                wightman_cavity(tau, 0.0, 10.0, &c, &t).unwrap(),
                Complex64::default()
            );
        }
        assert!(wightman_cavity(0.0, 0.0, 1.0, &c, &t).is_err());
    }

    #[test]
    fn wightman_cutoff_doubling_in_damped_context() {
        // Inside the Gaussian-windowed X integral, modes past N = 200 are
        // suppressed, so doubling the cutoff leaves the value unchanged.
        let (d, c) = (det(1.0), cav(0.1, 1.0));
        let a = oracle_x(Detector::A, Detector::A, &d, &c, &Truncation::new(200, 0)).unwrap();
        let b = oracle_x(Detector::A, Detector::A, &d, &c, &Truncation::new(400, 0)).unwrap();
        assert!(rel(a, b) < 1e-6, "{a} vs {b}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn cauchy_schwarz_and_positivity(os in 0.05f64..3.0, rho in 0.1f64..5.0, sr in 0.005f64..0.1) {
            prop_assume!(rho * sr < 1.0);
            let cut = ModeCutoffs::default();
            let (d, c) = (det(os), cav(sr, rho));
            let aa = x_aa(&d, &c, &cut).unwrap().0;
            let bb = x_bb(&d, &c, &cut).unwrap().0;
            let ab = x_ab(&d, &c, &cut).unwrap().0;
            prop_assert!(aa > 0.0 && bb > 0.0);
            prop_assert!(ab * ab <= aa * bb + 1e-12);
        }
    }
}
