//! Correlations harvested by two static Unruh–DeWitt detectors in a
//! Dirichlet cylindrical cavity: mode-sum response functions, negativity,
//! mutual information and discord, plus a free-space baseline.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod error;
pub mod freespace;
pub mod measures;
pub mod quad;
pub mod series;
pub mod specfun;
pub mod sweep;

pub use error::{Error, Result};
