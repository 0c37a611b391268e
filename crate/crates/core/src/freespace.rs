//! Free-space baseline for two static detectors at distance `d`.
//!
//! The Minkowski kernel `W(τ) = −1/(4π²((τ − iε)² − d²))` is handled three
//! ways:
//! - production X: the τ contour is moved to `Im τ = −β`, away from the
//!   poles, where the Gaussian window is real and non-oscillating;
//! - production M and the X cross-check: principal value plus `iπδ`;
//! - oracle: finite ε, Richardson-extrapolated to ε → 0.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::{CorrelationSet, DetectorParams, DEFAULT_LAMBDA};
use crate::error::{Error, Result};
use crate::quad::{bisect, GaussLegendre};

/// ε/σ levels of the extrapolation oracle.
pub const EPSILON_LEVELS: [f64; 3] = [1e-3, 5e-4, 2.5e-4];

/// Half-width of the time window in units of σ.
const WINDOW: f64 = 14.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeSpaceParams {
    pub omega: f64,
    pub sigma: f64,
    pub lambda: f64,
    /// Detector separation.
    pub d: f64,
}

impl FreeSpaceParams {
    pub fn new(omega: f64, sigma: f64, lambda: f64, d: f64) -> Result<Self> {
        let p = Self {
            omega,
            sigma,
            lambda,
            d,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        DetectorParams {
            omega: self.omega,
            sigma: self.sigma,
            lambda: self.lambda,
        }
        .validate()?;
        if !(self.d >= 0.0 && self.d.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "separation must be finite and >= 0, got {}",
                self.d
            )));
        }
        Ok(())
    }

    fn coupling(&self) -> f64 {
        PI.sqrt() * self.sigma * self.lambda * self.lambda
    }

    /// `e^{−τ²/4σ² − iΩτ}` at complex `τ`.
    fn window(&self, z: Complex64) -> Complex64 {
        (-z * z / (4.0 * self.sigma * self.sigma) - Complex64::i() * self.omega * z).exp()
    }

    fn window_dt(&self, z: Complex64) -> Complex64 {
        self.window(z) * (-z / (2.0 * self.sigma * self.sigma) - Complex64::i() * self.omega)
    }

    fn gauss(&self, t: f64) -> f64 {
        (-t * t / (4.0 * self.sigma * self.sigma)).exp()
    }
}

fn panels<F: FnMut(f64) -> Complex64>(a: f64, b: f64, h: f64, mut f: F) -> Complex64 {
    if b <= a {
        return Complex64::default();
    }
    let n = ((b - a) / h).ceil().max(1.0) as usize;
    let step = (b - a) / n as f64;
    let gl = GaussLegendre::standard();
    (0..n)
        .map(|k| gl.integrate_complex(a + k as f64 * step, a + (k + 1) as f64 * step, &mut f))
        .sum()
}

/// Panels starting at width `h0` next to `a` and growing geometrically to `h_max`.
fn graded_panels<F: FnMut(f64) -> Complex64>(
    a: f64,
    b: f64,
    h0: f64,
    h_max: f64,
    mut f: F,
) -> Complex64 {
    let gl = GaussLegendre::standard();
    let mut acc = Complex64::default();
    let (mut x, mut h) = (a, h0.min(h_max));
    while x < b {
        let next = (x + h).min(b);
        acc += gl.integrate_complex(x, next, &mut f);
        x = next;
        h = (1.5 * h).min(h_max);
    }
    acc
}

fn panel_width(p: &FreeSpaceParams) -> f64 {
    let h = 0.25 * p.sigma;
    if p.omega > 0.0 {
        h.min(1.0 / p.omega)
    } else {
        h
    }
}

// ---------------------------------------------------------------------------
// Production

/// Local `X_AA = X_BB`, independent of `d`.
pub fn free_x_local(det: &DetectorParams) -> Result<f64> {
    let p = FreeSpaceParams::new(det.omega, det.sigma, det.lambda, 0.0)?;
    Ok(x_contour(&p))
}

/// `X_AB`; equals the local value at `d = 0`.
pub fn free_x_ab(p: &FreeSpaceParams) -> Result<f64> {
    p.validate()?;
    Ok(x_contour(p))
}

/// `√πσλ² ∫ e^{−τ²/4σ²−iΩτ} W(τ) dτ` along `τ = t − iβ`. The poles sit at
/// `±d + iε`, so lowering the contour crosses none; with `β = 2σ²Ω` the
/// window becomes `e^{−σ²Ω²} e^{−t²/4σ²}`.
fn x_contour(p: &FreeSpaceParams) -> f64 {
    let s = p.sigma;
    let beta = (2.0 * s * s * p.omega).max(s);
    let d2 = p.d * p.d;
    let t_max = WINDOW * s;
    let integral = panels(-t_max, t_max, 0.25 * s, |t| {
        let z = Complex64::new(t, -beta);
        p.window(z) / (z * z - d2)
    });
    // the integrand at −t is the conjugate of that at t, so the result is real
    p.coupling() * (-1.0 / (4.0 * PI * PI)) * integral.re
}

/// `M_AB` for `d > 0` (the nonlocal term diverges as `d → 0`).
pub fn free_m_ab(p: &FreeSpaceParams) -> Result<Complex64> {
    p.validate()?;
    if p.d <= 0.0 {
        return Err(Error::InvalidParams(
            "free-space M_AB diverges at d = 0".into(),
        ));
    }
    let d = p.d;
    let s = p.sigma;
    let t_max = WINDOW * s + 2.0 * d;
    let h = 0.25 * s;
    let g = |t: f64| p.gauss(t);
    // PV ∫_0^∞ g/(τ−d) = ∫_0^d [g(d+u) − g(d−u)]/u du + ∫_{2d}^∞ g/(τ−d) dτ
    let near = panels(0.0, d, h, |u| {
        Complex64::new((g(d + u) - g(d - u)) / u, 0.0)
    });
    let far = graded_panels(2.0 * d, t_max, d, h, |t| {
        Complex64::new(g(t) / (t - d), 0.0)
    });
    let regular = graded_panels(0.0, t_max, d, h, |t| Complex64::new(g(t) / (t + d), 0.0));
    let bracket = (near + far - regular) / (2.0 * d) + Complex64::new(0.0, PI * g(d) / (2.0 * d));
    let os = p.omega * s;
    Ok(bracket * (p.lambda * p.lambda * s * (-os * os).exp() / (4.0 * PI.powf(1.5))))
}

/// Production correlation set; needs `d > 0`.
pub fn free_corrs(p: &FreeSpaceParams) -> Result<CorrelationSet> {
    p.validate()?;
    let m = free_m_ab(p)?;
    let local = x_contour(&FreeSpaceParams { d: 0.0, ..*p });
    let ab = x_contour(p);
    let set = CorrelationSet::new(local, local, ab, m);
    if !set.is_finite() {
        return Err(Error::Quadrature(format!(
            "free-space quadrature produced non-finite values at d = {}",
            p.d
        )));
    }
    Ok(set)
}

// ---------------------------------------------------------------------------
// Principal value + δ on the real line (cross-check for X)

/// `PV ∫_R h(τ)/(τ − q) dτ` by symmetric subtraction around the pole.
fn pv_line<H: Fn(f64) -> Complex64>(h: H, q: f64, p: &FreeSpaceParams) -> Complex64 {
    let u_max = q.abs() + WINDOW * p.sigma;
    panels(0.0, u_max, panel_width(p), |u| (h(q + u) - h(q - u)) / u)
}

/// `X_AB` (or the local `X` at `d = 0`) from the principal-value split.
pub fn free_x_pv_delta(p: &FreeSpaceParams) -> Result<f64> {
    p.validate()?;
    let f = |t: f64| p.window(Complex64::new(t, 0.0));
    let bracket = if p.d == 0.0 {
        let df = |t: f64| p.window_dt(Complex64::new(t, 0.0));
        pv_line(df, 0.0, p) + Complex64::i() * PI * df(0.0)
    } else {
        let d = p.d;
        (pv_line(f, d, p) - pv_line(f, -d, p) + Complex64::i() * PI * (f(d) - f(-d))) / (2.0 * d)
    };
    Ok(p.coupling() * (-1.0 / (4.0 * PI * PI)) * bracket.re)
}

// ---------------------------------------------------------------------------
// ε-shift oracle

/// `∫_{lo}^{hi} h(τ)/(τ − q − iε) dτ`, with `τ = q + ε sinh s` near the pole.
fn eps_integral<H: Fn(f64) -> Complex64>(
    h: &H,
    q: f64,
    eps: f64,
    lo: f64,
    hi: f64,
    width: f64,
) -> Complex64 {
    let near = 0.5 * width.max(eps);
    let (a, b) = ((q - 4.0 * near).max(lo), (q + 4.0 * near).min(hi));
    let direct = |t: f64| h(t) / Complex64::new(t - q, -eps);
    let mut acc = Complex64::default();
    if a < b {
        let (sa, sb) = (((a - q) / eps).asinh(), ((b - q) / eps).asinh());
        acc += panels(sa, sb, 0.125, |s| {
            let (sh, ch) = (s.sinh(), s.cosh());
            h(q + eps * sh) * ch / Complex64::new(sh, -1.0)
        });
        acc += graded_panels(b, hi, near, width, direct);
        // mirror the graded mesh on the left side
        acc += graded_panels(-a, -lo, near, width, |t| direct(-t));
    } else {
        acc += panels(lo, hi, width, direct);
    }
    acc
}

fn richardson(v: [f64; 3]) -> f64 {
    let r1 = 2.0 * v[1] - v[0];
    let r2 = 2.0 * v[2] - v[1];
    (4.0 * r2 - r1) / 3.0
}

fn richardson_c(v: [Complex64; 3]) -> Complex64 {
    Complex64::new(richardson(v.map(|z| z.re)), richardson(v.map(|z| z.im)))
}

fn x_eps(p: &FreeSpaceParams, eps: f64) -> f64 {
    let t = WINDOW * p.sigma + p.d;
    let w = panel_width(p);
    let bracket = if p.d == 0.0 {
        let df = |t: f64| p.window_dt(Complex64::new(t, 0.0));
        eps_integral(&df, 0.0, eps, -t, t, w)
    } else {
        let f = |t: f64| p.window(Complex64::new(t, 0.0));
        (eps_integral(&f, p.d, eps, -t, t, w) - eps_integral(&f, -p.d, eps, -t, t, w)) / (2.0 * p.d)
    };
    p.coupling() * (-1.0 / (4.0 * PI * PI)) * bracket.re
}

fn m_eps(p: &FreeSpaceParams, eps: f64) -> Complex64 {
    let t = WINDOW * p.sigma + 2.0 * p.d;
    let w = 0.25 * p.sigma;
    let g = |t: f64| Complex64::new(p.gauss(t), 0.0);
    let d = p.d;
    let pole = eps_integral(&g, d, eps, 0.0, t, w.min(d));
    let other = graded_panels(0.0, t, d.min(w), w, |t| g(t) / Complex64::new(t + d, -eps));
    let w_int = (pole - other) * (-1.0 / (4.0 * PI * PI * 2.0 * d));
    let os = p.omega * p.sigma;
    w_int * (-p.coupling() * (-os * os).exp())
}

/// Oracle correlation set from ε-regularised quadrature extrapolated to ε → 0.
pub fn free_corrs_epsilon(p: &FreeSpaceParams) -> Result<CorrelationSet> {
    p.validate()?;
    if p.d <= 0.0 {
        return Err(Error::InvalidParams(
            "free-space M_AB diverges at d = 0".into(),
        ));
    }
    let eps = EPSILON_LEVELS.map(|e| e * p.sigma);
    let local = FreeSpaceParams { d: 0.0, ..*p };
    let x_local = richardson(eps.map(|e| x_eps(&local, e)));
    let x_ab = richardson(eps.map(|e| x_eps(p, e)));
    let m = richardson_c(eps.map(|e| m_eps(p, e)));
    Ok(CorrelationSet::new(x_local, x_local, x_ab, m))
}

// ---------------------------------------------------------------------------
// Negativity boundary

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryFlag {
    Crossing,
    /// Negativity positive on the whole grid.
    AlwaysPositive,
    /// Negativity zero on the whole grid.
    NeverPositive,
}

impl BoundaryFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryFlag::Crossing => "crossing",
            BoundaryFlag::AlwaysPositive => "always_positive",
            BoundaryFlag::NeverPositive => "never_positive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub omega_sigma: f64,
    /// NaN unless `flag` is `Crossing`.
    pub d_over_sigma: f64,
    pub flag: BoundaryFlag,
}

/// Bisection resolution of the boundary in units of σ.
pub const BOUNDARY_TOL: f64 = 1e-6;

/// Signed `|M| − (X_AA + X_BB)/2` at `σ = 1`.
pub fn free_negativity_margin(omega_sigma: f64, d_over_sigma: f64) -> Result<f64> {
    let c = free_corrs(&FreeSpaceParams::new(
        omega_sigma,
        1.0,
        DEFAULT_LAMBDA,
        d_over_sigma,
    )?)?;
    Ok(c.m_ab.norm() - 0.5 * (c.x_aa + c.x_bb))
}

/// Locates the first zero of the perturbative negativity along `d_grid` for
/// every Ωσ, refined by bisection. Grids must be strictly increasing.
pub fn free_negativity_boundary(
    omega_sigma_grid: &[f64],
    d_grid: &[f64],
) -> Result<Vec<BoundaryPoint>> {
    for (name, g) in [("omega_sigma", omega_sigma_grid), ("d", d_grid)] {
        if g.is_empty() || g.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParams(format!(
                "{name} grid must be nonempty and strictly increasing"
            )));
        }
    }
    if d_grid[0] <= 0.0 {
        return Err(Error::InvalidParams("d grid must be positive".into()));
    }
    omega_sigma_grid
        .iter()
        .map(|&os| {
            let margins = d_grid
                .iter()
                .map(|&d| free_negativity_margin(os, d))
                .collect::<Result<Vec<_>>>()?;
            let nan = f64::NAN;
            if let Some(i) =
                (1..d_grid.len()).find(|&i| (margins[i - 1] > 0.0) != (margins[i] > 0.0))
            {
                let d = bisect(
                    |d| free_negativity_margin(os, d),
                    d_grid[i - 1],
                    d_grid[i],
                    BOUNDARY_TOL,
                )?;
                return Ok(BoundaryPoint {
                    omega_sigma: os,
                    d_over_sigma: d,
                    flag: BoundaryFlag::Crossing,
                });
            }
            let flag = if margins[0] > 0.0 {
                BoundaryFlag::AlwaysPositive
            } else {
                BoundaryFlag::NeverPositive
            };
            Ok(BoundaryPoint {
                omega_sigma: os,
                d_over_sigma: nan,
                flag,
            })
        })
        .collect()
}

pub const BOUNDARY_CSV_HEADER: &str = "omega_sigma,d_over_sigma_boundary,flag";

pub fn write_boundary_csv<W: Write>(mut w: W, points: &[BoundaryPoint]) -> Result<()> {
    writeln!(w, "{BOUNDARY_CSV_HEADER}")?;
    for p in points {
        writeln!(
            w,
            "{:.16e},{:.16e},{}",
            p.omega_sigma,
            p.d_over_sigma,
            p.flag.as_str()
        )?;
    }
    Ok(())
}
