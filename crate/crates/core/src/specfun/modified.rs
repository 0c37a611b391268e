//! Exponentially scaled modified Bessel functions of order zero.

use std::f64::consts::PI;

use super::bessel::EULER_GAMMA;
use crate::error::{Error, Result};

const I0_SERIES_MAX: f64 = 25.0;
const K0_SERIES_MAX: f64 = 2.0;

/// `(e^{-x} I_0(x), e^{-x} K_0(x))` for `x > 0`.
///
/// The second value decays like `e^{-2x}` and underflows to zero past
/// `x ≈ 370`; the first stays of order `1/√(2πx)`.
pub fn scaled_bessel_ik0(x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "scaled_bessel_ik0: argument must be finite and > 0, got {x}"
        )));
    }
    Ok(ik0_scaled(x))
}

pub(crate) fn ik0_scaled(x: f64) -> (f64, f64) {
    let i0e = i0_scaled(x);
    let k0e = if x < K0_SERIES_MAX {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut harmonic = 0.0;
        let mut sum = 0.0;
        for k in 1..100 {
            let kf = k as f64;
            term *= q / (kf * kf);
            harmonic += 1.0 / kf;
            sum += term * harmonic;
            if term * harmonic < 1e-17 * sum {
                break;
            }
        }
        let k0 = -((0.5 * x).ln() + EULER_GAMMA) * i0_series(x) + sum;
        k0 * (-x).exp()
    } else {
        (PI / (2.0 * x)).sqrt() * (-2.0 * x).exp() / steed_cf2(x)
    };
    (i0e, k0e)
}

fn i0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        let kf = k as f64;
        term *= q / (kf * kf);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

fn i0_scaled(x: f64) -> f64 {
    if x <= I0_SERIES_MAX {
        return i0_series(x) * (-x).exp();
    }
    // e^{-x} I_0(x) ~ (2πx)^{-1/2} Σ [(2k-1)!!]² / (k! (8x)^k)
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        let next = term * odd * odd / (k as f64 * 8.0 * x);
        if next > term {
            break;
        }
        term = next;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

/// Steed's second continued fraction for order zero; `K_0(x) = √(π/2x) e^{-x} / s`.
fn steed_cf2(x: f64) -> f64 {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..10_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    // I_0(x) = (1/π) ∫_0^π e^{x cos t} dt; the trapezoid rule is spectrally
    // accurate for this periodic integrand.
    fn i0_oracle_scaled(x: f64) -> f64 {
        let n = 4000;
        let h = PI / n as f64;
        let mut s = 0.5 * (1.0 + (-2.0 * x).exp());
        for k in 1..n {
            s += (x * (k as f64 * h).cos() - x).exp();
        }
        s * h / PI
    }

    // K_0(x) = ∫_0^∞ e^{-x cosh t} dt, trapezoid on a truncated line.
    fn k0_oracle(x: f64) -> f64 {
        let h: f64 = 1e-3;
        let mut s = 0.5 * (-x).exp();
        let mut t = h;
        loop {
            let v = (-x * t.cosh()).exp();
            s += v;
            if v < 1e-300 || t > 60.0 {
                break;
            }
            t += h;
        }
        s * h
    }

    #[test]
    fn matches_integral_oracles() {
        for &x in &[
            0.01, 0.3, 1.0, 1.99, 2.0, 2.5, 7.0, 19.0, 24.9, 25.1, 40.0, 120.0,
        ] {
            let (ie, ke) = ik0_scaled(x);
            let io = i0_oracle_scaled(x);
            assert!((ie - io).abs() < 1e-10 * io, "I0 x={x}: {ie} vs {io}");
            let ko = k0_oracle(x) * (-x).exp();
            assert!((ke - ko).abs() < 1e-10 * ko, "K0 x={x}: {ke} vs {ko}");
        }
    }

    #[test]
    fn value_at_one() {
        let (ie, ke) = scaled_bessel_ik0(1.0).unwrap();
        // mpmath: besseli(0,1), besselk(0,1)
        assert!((ie - 1.266_065_877_752_008_4 * (-1.0f64).exp()).abs() < 1e-15);
        assert!((ke - 0.421_024_438_240_708_33 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn large_argument_asymptotics() {
        let x = 1e6;
        let (ie, _) = scaled_bessel_ik0(x).unwrap();
        assert!((ie * (2.0 * PI * x).sqrt() - 1.0).abs() < 1e-3);
        let (ie, ke) = scaled_bessel_ik0(1e8).unwrap();
        assert!(ie.is_finite() && ie > 0.0);
        assert!(ke.is_finite() && ke >= 0.0);
    }

    #[test]
    fn k0_scaled_strictly_decreasing() {
        let mut prev = f64::INFINITY;
        let mut x = 0.1;
        while x <= 100.0 {
            let (_, ke) = ik0_scaled(x);
            assert!(ke < prev, "x = {x}");
            prev = ke;
            x += 0.1;
        }
    }

    #[test]
    fn domain() {
        assert!(scaled_bessel_ik0(0.0).is_err());
        assert!(scaled_bessel_ik0(-1.0).is_err());
    }
}
