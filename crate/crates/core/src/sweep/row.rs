//! One output row per grid point and its fixed CSV schema.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::spec::GridPoint;
use crate::cavity::{
    correlations_lenient, CavityConfig, CorrelationSet, DetectorParams, ModeCutoffs,
};
use crate::error::{Error, Result};
use crate::measures::discord;

pub const CSV_HEADER: &str =
    "omega_sigma,rho0_sigma,sigma_R,lambda,x_aa,x_bb,x_ab,m_ab_re,m_ab_im,\
neg_exact,neg_pert,mutual_info,classical_j,discord,s1,s2,converged_flags";

const FLOAT_COLUMNS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub omega_sigma: f64,
    pub rho0_sigma: f64,
    #[serde(rename = "sigma_R")]
    pub sigma_r: f64,
    pub lambda: f64,
    pub x_aa: f64,
    pub x_bb: f64,
    pub x_ab: f64,
    pub m_ab_re: f64,
    pub m_ab_im: f64,
    pub neg_exact: f64,
    pub neg_pert: f64,
    pub mutual_info: f64,
    pub classical_j: f64,
    pub discord: f64,
    pub s1: f64,
    pub s2: f64,
    /// `0/1` per entry `x_aa, x_bb, x_ab, m_ab`.
    pub converged_flags: String,
}

impl Row {
    fn floats(&self) -> [f64; FLOAT_COLUMNS] {
        [
            self.omega_sigma,
            self.rho0_sigma,
            self.sigma_r,
            self.lambda,
            self.x_aa,
            self.x_bb,
            self.x_ab,
            self.m_ab_re,
            self.m_ab_im,
            self.neg_exact,
            self.neg_pert,
            self.mutual_info,
            self.classical_j,
            self.discord,
            self.s1,
            self.s2,
        ]
    }

    /// 17 significant digits, no trailing newline.
    pub fn to_csv(&self) -> String {
        let mut s: String = self.floats().iter().map(|v| format!("{v:.16e},")).collect();
        s.push_str(&self.converged_flags);
        s
    }

    pub fn from_csv(line: &str) -> Result<Self> {
        let bad = || Error::InvalidParams(format!("malformed row {line:?}"));
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != FLOAT_COLUMNS + 1 {
            return Err(bad());
        }
        let mut v = [0.0; FLOAT_COLUMNS];
        for (slot, c) in v.iter_mut().zip(&cols) {
            *slot = c.parse().map_err(|_| bad())?;
        }
        let flags = cols[FLOAT_COLUMNS];
        if flags.len() != 4 || !flags.chars().all(|c| c == '0' || c == '1') {
            return Err(bad());
        }
        Ok(Row {
            omega_sigma: v[0],
            rho0_sigma: v[1],
            sigma_r: v[2],
            lambda: v[3],
            x_aa: v[4],
            x_bb: v[5],
            x_ab: v[6],
            m_ab_re: v[7],
            m_ab_im: v[8],
            neg_exact: v[9],
            neg_pert: v[10],
            mutual_info: v[11],
            classical_j: v[12],
            discord: v[13],
            s1: v[14],
            s2: v[15],
            converged_flags: flags.to_string(),
        })
    }

    pub fn all_converged(&self) -> bool {
        self.converged_flags == "1111"
    }

    pub fn m_ab(&self) -> Complex64 {
        Complex64::new(self.m_ab_re, self.m_ab_im)
    }

    /// `|M| − (X_AA + X_BB)/2`; positive iff the perturbative negativity is.
    pub fn negativity_margin(&self) -> f64 {
        self.m_ab().norm() - 0.5 * (self.x_aa + self.x_bb)
    }

    pub fn from_set(p: &GridPoint, lambda: f64, c: &CorrelationSet) -> Self {
        let nan = f64::NAN;
        let m = if c.is_finite() {
            match discord(c) {
                Ok(m) => Some(m),
                Err(e) => {
                    log::warn!("measures undefined at {p:?}: {e}");
                    None
                }
            }
        } else {
            None
        };
        let pick = |f: fn(&crate::measures::CorrelationMeasures) -> f64| m.as_ref().map_or(nan, f);
        Row {
            omega_sigma: p.omega_sigma,
            rho0_sigma: p.rho0_sigma,
            sigma_r: p.sigma_r,
            lambda,
            x_aa: c.x_aa,
            x_bb: c.x_bb,
            x_ab: c.x_ab,
            m_ab_re: c.m_ab.re,
            m_ab_im: c.m_ab.im,
            neg_exact: pick(|m| m.negativity_exact),
            neg_pert: pick(|m| m.negativity_pert),
            mutual_info: pick(|m| m.mutual_info),
            classical_j: pick(|m| m.classical_j),
            discord: pick(|m| m.discord),
            s1: pick(|m| m.s1),
            s2: pick(|m| m.s2),
            converged_flags: c.converged_flags(),
        }
    }
}

/// Detector and cavity in units of σ = 1.
pub fn physical(p: &GridPoint, lambda: f64) -> Result<(DetectorParams, CavityConfig)> {
    p.validate()?;
    Ok((
        DetectorParams::new(p.omega_sigma, 1.0, lambda)?,
        CavityConfig::new(1.0 / p.sigma_r, p.rho0_sigma)?,
    ))
}

/// Correlations at one point; unconverged series become NaN with a cleared flag.
pub fn evaluate_set(p: &GridPoint, lambda: f64, cut: &ModeCutoffs) -> Result<CorrelationSet> {
    let (det, cav) = physical(p, lambda)?;
    correlations_lenient(&det, &cav, cut)
}

pub fn evaluate(p: &GridPoint, lambda: f64, cut: &ModeCutoffs) -> Result<Row> {
    Ok(Row::from_set(p, lambda, &evaluate_set(p, lambda, cut)?))
}
