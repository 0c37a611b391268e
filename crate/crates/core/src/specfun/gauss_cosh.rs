//! `G(a, b) = ∫_{-∞}^{∞} exp[-(a + b cosh s)²] ds`.

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;

/// Exponent beyond which `exp(-t)` underflows in double precision.
pub const UNDERFLOW_EXPONENT: f64 = 745.0;

const MAX_PANEL: f64 = 0.125;

pub fn gauss_cosh_integral(a: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) || !b.is_finite() || !a.is_finite() {
        return Err(Error::Domain(format!(
            "gauss_cosh_integral: need finite a and b > 0, got a={a}, b={b}"
        )));
    }
    Ok(gauss_cosh(a, b))
}

pub(crate) fn gauss_cosh(a: f64, b: f64) -> f64 {
    let cut = UNDERFLOW_EXPONENT.sqrt();
    if a + b > cut {
        return 0.0;
    }
    let s_max = ((cut - a) / b).max(1.0).acosh();
    // Near s = 0 the integrand is a Gaussian of width ~ 1/√(2b(a+b)).
    let width = 1.0 / (2.0 * b * (a + b).abs().max(b)).sqrt();
    let h = MAX_PANEL.min(2.0 * width);
    let panels = (s_max / h).ceil().max(1.0) as usize;
    let f = |s: f64| {
        let u = a + b * s.cosh();
        (-u * u).exp()
    };
    2.0 * GaussLegendre::standard().composite(0.0, s_max, panels, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }

    fn oracle(a: f64, b: f64) -> f64 {
        let f = move |s: f64| {
            let u = a + b * s.cosh();
            (-u * u).exp()
        };
        let (lo, hi) = (0.0, 30.0f64.min(((60.0 - a).max(1.0) / b).acosh() + 1.0));
        // Seed panels narrower than the peak at s = 0, then refine adaptively.
        let pieces = 400;
        let h = (hi - lo) / pieces as f64;
        let mut total = 0.0;
        for k in 0..pieces {
            let (a0, b0) = (lo + k as f64 * h, lo + (k + 1) as f64 * h);
            let (fa, fb, fm) = (f(a0), f(b0), f(0.5 * (a0 + b0)));
            let whole = (b0 - a0) / 6.0 * (fa + 4.0 * fm + fb);
            total += simpson(&f, a0, b0, fa, fm, fb, whole, 1e-13 * whole.abs(), 14);
        }
        2.0 * total
    }

    #[test]
    fn matches_adaptive_simpson() {
        for &(a, b) in &[
            (0.0, 1.0),
            (1.0, 0.01),
            (1.0, 0.12),
            (0.05, 0.0024),
            (3.0, 0.5),
            (0.0, 20.0),
            (5.0, 2.0),
            (1.0, 1e-4),
        ] {
            let got = gauss_cosh_integral(a, b).unwrap();
            let want = oracle(a, b);
            assert!(
                (got - want).abs() < 1e-10 * want,
                "G({a}, {b}) = {got}, oracle {want}"
            );
        }
    }

    #[test]
    fn underflow_is_exact_zero() {
        assert_eq!(gauss_cosh_integral(30.0, 10.0).unwrap(), 0.0);
    }

    #[test]
    fn domain() {
        assert!(gauss_cosh_integral(1.0, 0.0).is_err());
        assert!(gauss_cosh_integral(1.0, -1.0).is_err());
    }

    #[test]
    fn decreasing_in_both_arguments() {
        let grid = [0.0, 0.1, 0.5, 1.0, 2.0, 4.0];
        for &b in &[0.01, 0.3, 2.0] {
            for w in grid.windows(2) {
                assert!(gauss_cosh(w[1], b) < gauss_cosh(w[0], b));
            }
        }
        for &a in &grid {
            let bs = [0.01, 0.1, 0.5, 1.0, 3.0];
            for w in bs.windows(2) {
                assert!(gauss_cosh(a, w[1]) < gauss_cosh(a, w[0]));
            }
        }
    }
}
