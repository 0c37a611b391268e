//! Entropy helpers. Natural logarithm throughout.

use crate::error::{Error, Result};

/// Width of the band outside `[0, 1]` that is clamped instead of rejected.
pub const CLAMP_BAND: f64 = 1e-12;

/// `x ln x` with `0 ln 0 = 0`.
pub fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `H(x) = -x ln x - (1-x) ln(1-x)` in nats.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(-CLAMP_BAND..=1.0 + CLAMP_BAND).contains(&x) {
        return Err(Error::Domain(format!(
            "binary_entropy: argument {x} outside [0, 1]"
        )));
    }
    let x = x.clamp(0.0, 1.0);
    Ok(-xlogx(x) - xlogx(1.0 - x))
}
