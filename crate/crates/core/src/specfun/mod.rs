//! Special functions used by the mode sums.

mod bessel;
mod entropy;
mod gauss_cosh;
mod modified;
mod zeros;

pub use bessel::{bessel_j, bessel_jy0, hankel1_0, hankel2_0, jn, EULER_GAMMA};
pub use entropy::{binary_entropy, xlogx, CLAMP_BAND};
pub use gauss_cosh::{gauss_cosh_integral, UNDERFLOW_EXPONENT};
pub use modified::scaled_bessel_ik0;
pub use zeros::{bessel_zeros, mode_column, BesselZeroTable, ModeColumn, ZERO_RESIDUAL};

pub(crate) use gauss_cosh::gauss_cosh;
pub(crate) use modified::ik0_scaled;
