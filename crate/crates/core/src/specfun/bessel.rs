//! Integer-order Bessel functions of the first kind, plus `Y_0` and the
//! order-zero Hankel functions used by the time-domain oracle.
//!
//! Three regimes:
//! - `x <= SERIES_MAX`: ascending power series.
//! - large `x` relative to `m²`: Hankel asymptotic expansion, accepted only
//!   when its smallest term drops below round-off.
//! - everything in between: Miller backward recurrence normalised with
//!   `J_0 + 2 Σ J_2k = 1`.

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_MAX: f64 = 6.0;
const ASYMPTOTIC_MIN: f64 = 25.0;

/// `J_m(x)` for integer order `m >= 0` and `x >= 0`.
pub fn bessel_j(m: u32, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "bessel_j: argument must be finite and >= 0, got {x}"
        )));
    }
    Ok(jn(m, x))
}

/// Unchecked `J_m(x)`; `x` must be finite and non-negative.
pub fn jn(m: u32, x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_MAX {
        return series_j(m, x);
    }
    if x >= ASYMPTOTIC_MIN && x >= 0.5 * (m as f64) * (m as f64) {
        if let Some((j, _)) = hankel_asymptotic(m, x) {
            return j;
        }
    }
    miller(m, x).0
}

/// `(J_0(x), Y_0(x))` for `x > 0`.
pub fn bessel_jy0(x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "bessel_jy0: argument must be finite and > 0, got {x}"
        )));
    }
    Ok(jy0(x))
}

pub(crate) fn jy0(x: f64) -> (f64, f64) {
    if x <= SERIES_MAX {
        let j0 = series_j(0, x);
        // Y_0 = (2/π)[(ln(x/2) + γ) J_0 + Σ_{k≥1} (-1)^{k+1} H_k (x²/4)^k / (k!)²]
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut harmonic = 0.0;
        let mut sum = 0.0;
        for k in 1..200 {
            let kf = k as f64;
            term *= -q / (kf * kf);
            harmonic += 1.0 / kf;
            let add = -term * harmonic;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        let y0 = FRAC_2_PI * (((0.5 * x).ln() + EULER_GAMMA) * j0 + sum);
        return (j0, y0);
    }
    if x >= ASYMPTOTIC_MIN {
        if let Some(pair) = hankel_asymptotic(0, x) {
            return pair;
        }
    }
    let (j0, neumann) = miller(0, x);
    // Neumann series: Y_0 = (2/π)[(ln(x/2)+γ) J_0 − 2 Σ_{k≥1} (−1)^k J_{2k}/k]
    (
        j0,
        FRAC_2_PI * (((0.5 * x).ln() + EULER_GAMMA) * j0 - 2.0 * neumann),
    )
}

/// `H_0^{(2)}(x) = J_0(x) − i Y_0(x)` for real `x > 0`.
pub fn hankel2_0(x: f64) -> Complex64 {
    let (j, y) = jy0(x);
    Complex64::new(j, -y)
}

/// `H_0^{(1)}(x) = J_0(x) + i Y_0(x)` for real `x > 0`.
pub fn hankel1_0(x: f64) -> Complex64 {
    let (j, y) = jy0(x);
    Complex64::new(j, y)
}

fn series_j(m: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut lead = 1.0;
    for k in 1..=m {
        lead *= half / k as f64;
        if lead == 0.0 {
            return 0.0;
        }
    }
    let q = half * half;
    let mut term = lead;
    let mut sum = lead;
    let mf = m as f64;
    for k in 1..400 {
        let kf = k as f64;
        term *= -q / (kf * (kf + mf));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Hankel expansion. Returns `(J_m, Y_m)` or `None` when the asymptotic
/// series cannot reach round-off at this `x`.
fn hankel_asymptotic(m: u32, x: f64) -> Option<(f64, f64)> {
    let mu = 4.0 * (m as f64) * (m as f64);
    let eight_x = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    let mut k = 1usize;
    let mut reached = false;
    loop {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * eight_x);
        let mag = term.abs();
        if mag > last {
            break;
        }
        if !k.is_multiple_of(2) {
            // odd k feeds Q with sign (−1)^{(k−1)/2}
            if (k / 2).is_multiple_of(2) {
                q += term;
            } else {
                q -= term;
            }
        } else if (k / 2) % 2 == 1 {
            p -= term;
        } else {
            p += term;
        }
        if mag < 1e-17 || term == 0.0 {
            reached = true;
            break;
        }
        last = mag;
        k += 1;
        if k > 200 {
            break;
        }
    }
    if !reached {
        return None;
    }
    let chi = x - (0.5 * m as f64 + 0.25) * PI;
    let (s, c) = chi.sin_cos();
    let amp = (FRAC_2_PI / x).sqrt();
    Some((amp * (p * c - q * s), amp * (p * s + q * c)))
}

/// Miller backward recurrence. Returns `(J_m(x), Σ_{k≥1} (−1)^k J_{2k}(x)/k)`;
/// the second value feeds the Neumann series for `Y_0`.
fn miller(m: u32, x: f64) -> (f64, f64) {
    let top = (m as f64).max(x);
    let mut start = (top + 20.0 + 12.0 * x.cbrt()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let two_over_x = 2.0 / x;
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k
    let mut norm = 0.0;
    let mut neumann = 0.0;
    let mut target = 0.0;
    for k in (1..=start).rev() {
        // J_{k-1} = (2k/x) J_k − J_{k+1}
        let prev = k as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        let order = k - 1;
        if order == m as usize {
            target = cur;
        }
        if order > 0 && order % 2 == 0 {
            norm += 2.0 * cur;
            let half = (order / 2) as f64;
            neumann += if (order / 2) % 2 == 0 {
                cur / half
            } else {
                -cur / half
            };
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            neumann *= 1e-250;
            target *= 1e-250;
        }
    }
    norm += cur;
    (target / norm, neumann / norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from 30-digit mpmath evaluations.
    const REFERENCE: &[(u32, f64, f64)] = &[
        (0, 1.0, 0.765_197_686_557_966_6),
        (0, 10.0, -0.245_935_764_451_348_34),
        (1, 10.0, 0.043_472_746_168_861_44),
        (0, 30.0, -0.086_367_983_581_040_21),
        (5, 7.5, 0.283_473_905_162_550_46),
        (30, 10.0, 1.551_096_078_257_467e-12),
        (30, 40.0, -0.104_085_949_765_649_73),
        (40, 33.0, 0.004_058_987_686_471_918),
        (17, 300.0, -0.043_672_933_120_952_49),
        (2, 1000.0, -0.024_777_229_528_605_996),
        (0, 10000.0, -0.007_096_160_353_388_801_5),
    ];

    #[test]
    fn trivial_values_at_origin() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        for m in 1..10 {
            assert_eq!(bessel_j(m, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn negative_argument_is_domain_error() {
        assert!(matches!(bessel_j(0, -1.0), Err(Error::Domain(_))));
        assert!(bessel_j(1, f64::NAN).is_err());
    }

    #[test]
    fn first_zero_of_j0() {
        assert!(jn(0, 2.404_825_557_695_773).abs() < 1e-12);
    }

    #[test]
    fn matches_reference_table() {
        for &(m, x, want) in REFERENCE {
            let got = jn(m, x);
            assert!(
                (got - want).abs() < 1e-13,
                "J_{m}({x}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn regimes_agree_at_boundaries() {
        for m in [0u32, 1, 3, 7] {
            for x in [SERIES_MAX, ASYMPTOTIC_MIN, 60.0] {
                let a = if x <= SERIES_MAX {
                    series_j(m, x)
                } else {
                    hankel_asymptotic(m, x).map_or(f64::NAN, |v| v.0)
                };
                let b = miller(m, x).0;
                if a.is_finite() {
                    assert!((a - b).abs() < 1e-14, "m={m} x={x}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn wronskian_like_recurrence_holds() {
        // J_{m-1} + J_{m+1} = (2m/x) J_m across all regimes
        for m in 1..40u32 {
            for &x in &[0.3, 5.0, 9.0, 17.0, 33.0, 120.0, 900.0, 4000.0] {
                let lhs = jn(m - 1, x) + jn(m + 1, x);
                let rhs = 2.0 * m as f64 / x * jn(m, x);
                assert!(
                    (lhs - rhs).abs() < 5e-13 * (1.0 + 2.0 * m as f64 / x),
                    "m={m} x={x}"
                );
            }
        }
    }

    #[test]
    fn y0_reference_values() {
        for &(x, want) in &[
            (0.5, -0.444_518_733_506_706_6),
            (3.0, 0.376_850_010_012_790_4),
            (10.0, 0.055_671_167_283_599_4),
            (50.0, -0.098_064_995_470_077_1),
        ] {
            let (_, y) = jy0(x);
            assert!((y - want).abs() < 1e-13, "Y0({x}) = {y}, want {want}");
        }
    }

    #[test]
    fn hankel_pair_is_conjugate() {
        for &x in &[0.1, 2.0, 15.0, 300.0] {
            assert_eq!(hankel1_0(x), hankel2_0(x).conj());
        }
    }
}
