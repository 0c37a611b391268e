//! Grid specification, axis syntax and the flat `key=value` config format.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cavity::{ModeCutoffs, DEFAULT_LAMBDA};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisSpacing {
    Lin,
    Log,
    List,
}

/// Sampled values of one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub values: Vec<f64>,
    pub spacing: AxisSpacing,
}

impl Axis {
    pub fn single(v: f64) -> Self {
        Self {
            values: vec![v],
            spacing: AxisSpacing::List,
        }
    }

    /// `min:max:n:log|lin`, a single number, or a comma-separated list.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let num = |t: &str| -> Result<f64> {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParams(format!("axis {s:?}: bad number {t:?}")))
        };
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 4 {
                return Err(Error::InvalidParams(format!(
                    "axis {s:?}: expected min:max:n:log|lin"
                )));
            }
            let (lo, hi) = (num(parts[0])?, num(parts[1])?);
            let n: usize = parts[2]
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParams(format!("axis {s:?}: bad count")))?;
            let spacing = match parts[3].trim() {
                "lin" => AxisSpacing::Lin,
                "log" => AxisSpacing::Log,
                other => {
                    return Err(Error::InvalidParams(format!(
                        "axis {s:?}: unknown spacing {other:?}"
                    )))
                }
            };
            return Self::range(lo, hi, n, spacing);
        }
        let values = s.split(',').map(num).collect::<Result<Vec<_>>>()?;
        Self::from_values(values)
    }

    pub fn range(lo: f64, hi: f64, n: usize, spacing: AxisSpacing) -> Result<Self> {
        if n == 0 || !lo.is_finite() || !hi.is_finite() || hi < lo || (n > 1 && hi == lo) {
            return Err(Error::InvalidParams(format!(
                "empty or inverted axis range {lo}:{hi}:{n}"
            )));
        }
        if spacing == AxisSpacing::Log && lo <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "log axis needs a positive lower end, got {lo}"
            )));
        }
        let values = (0..n)
            .map(|i| {
                if n == 1 {
                    return lo;
                }
                if i == n - 1 {
                    return hi;
                }
                let f = i as f64 / (n - 1) as f64;
                match spacing {
                    AxisSpacing::Log => (lo.ln() + f * (hi.ln() - lo.ln())).exp(),
                    _ => lo + f * (hi - lo),
                }
            })
            .collect();
        Ok(Self { values, spacing })
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(
                "axis list must be nonempty and finite".into(),
            ));
        }
        Ok(Self {
            values,
            spacing: AxisSpacing::List,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_increasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] < w[1])
    }

    /// Contours interpolate in `ln` on log axes.
    pub fn is_log(&self) -> bool {
        self.spacing == AxisSpacing::Log
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    XTerms,
    Negativity,
    MutualInfo,
    Discord,
    FreespaceBoundary,
}

impl Output {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "x_terms" => Output::XTerms,
            "negativity" => Output::Negativity,
            "mutual_info" => Output::MutualInfo,
            "discord" => Output::Discord,
            "freespace_boundary" => Output::FreespaceBoundary,
            other => return Err(Error::InvalidParams(format!("unknown output {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidParams(format!("unknown format {other:?}"))),
        }
    }
}

/// One evaluation point in dimensionless units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub omega_sigma: f64,
    pub rho0_sigma: f64,
    pub sigma_r: f64,
}

impl GridPoint {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_sigma >= 0.0 && self.omega_sigma.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "omega_sigma must be finite and >= 0, got {}",
                self.omega_sigma
            )));
        }
        if !(self.rho0_sigma >= 0.0 && self.rho0_sigma.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "rho0_sigma must be finite and >= 0, got {}",
                self.rho0_sigma
            )));
        }
        if !(self.sigma_r > 0.0 && self.sigma_r.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "sigma_R must be finite and > 0, got {}",
                self.sigma_r
            )));
        }
        if !self.inside_cavity() {
            return Err(Error::InvalidParams(format!(
                "rho0_sigma * sigma_R = {} must be < 1",
                self.rho0_sigma * self.sigma_r
            )));
        }
        Ok(())
    }

    pub fn inside_cavity(&self) -> bool {
        self.rho0_sigma * self.sigma_r < 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub omega_sigma: Axis,
    pub rho0_sigma: Axis,
    pub sigma_r: Axis,
    pub lambda: f64,
    pub outputs: Vec<Output>,
    pub cutoffs: ModeCutoffs,
    pub format: Format,
    /// Not part of the spec hash.
    #[serde(skip)]
    pub out_path: Option<PathBuf>,
}

/// Keys accepted in config files and as flag overrides.
pub const CONFIG_KEYS: [&str; 12] = [
    "omega_sigma",
    "rho0_sigma",
    "sigma_r",
    "lambda",
    "tol",
    "tol_x",
    "nmax_x",
    "nmax_m",
    "mmax",
    "outputs",
    "format",
    "out",
];

/// Parses `key = value` lines; `#` starts a comment. Keys are case-insensitive
/// and `-` is read as `_`.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::InvalidParams(format!(
                "config line {}: expected key=value, got {raw:?}",
                i + 1
            ))
        })?;
        let key = k.trim().to_ascii_lowercase().replace('-', "_");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::InvalidParams(format!(
                "config line {}: unknown key {key:?}",
                i + 1
            )));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

impl SweepSpec {
    /// Builds a spec from config pairs. Missing axes default to the broad
    /// density ranges; missing `sigma_r` is an error.
    pub fn from_pairs(map: &BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| map.get(k).map(String::as_str);
        let float = |k: &str| -> Result<Option<f64>> {
            get(k)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| Error::InvalidParams(format!("{k}: bad number {v:?}")))
                })
                .transpose()
        };
        let count = |k: &str| -> Result<Option<usize>> {
            get(k)
                .map(|v| {
                    v.parse::<usize>()
                        .map_err(|_| Error::InvalidParams(format!("{k}: bad integer {v:?}")))
                })
                .transpose()
        };
        let axis = |k: &str, default: Result<Axis>| get(k).map(Axis::parse).unwrap_or(default);
        let mut cutoffs = ModeCutoffs::default();
        if let Some(v) = float("tol")? {
            cutoffs.tol = v;
        }
        if let Some(v) = float("tol_x")? {
            cutoffs.tol_x = v;
        }
        if let Some(v) = count("nmax_x")? {
            cutoffs.n_max_x = v;
        }
        if let Some(v) = count("nmax_m")? {
            cutoffs.n_max_m = v;
        }
        if let Some(v) = count("mmax")? {
            cutoffs.m_max =
                u32::try_from(v).map_err(|_| Error::InvalidParams("mmax too large".into()))?;
        }
        let outputs = match get("outputs") {
            Some(s) => {
                let mut v = s
                    .split(',')
                    .map(Output::parse)
                    .collect::<Result<Vec<_>>>()?;
                v.sort();
                v.dedup();
                v
            }
            None => vec![
                Output::XTerms,
                Output::Negativity,
                Output::MutualInfo,
                Output::Discord,
            ],
        };
        let spec = SweepSpec {
            omega_sigma: axis("omega_sigma", Axis::range(0.05, 3.0, 30, AxisSpacing::Log))?,
            rho0_sigma: axis("rho0_sigma", Axis::range(0.1, 5.0, 30, AxisSpacing::Log))?,
            sigma_r: get("sigma_r")
                .map(Axis::parse)
                .ok_or_else(|| Error::InvalidParams("sigma_r is required".into()))??,
            lambda: float("lambda")?.unwrap_or(DEFAULT_LAMBDA),
            outputs,
            cutoffs,
            format: get("format")
                .map(Format::parse)
                .transpose()?
                .unwrap_or(Format::Csv),
            out_path: get("out").map(PathBuf::from),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.cutoffs.validate()?;
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "lambda must be finite and > 0, got {}",
                self.lambda
            )));
        }
        for (name, a) in [
            ("omega_sigma", &self.omega_sigma),
            ("rho0_sigma", &self.rho0_sigma),
            ("sigma_r", &self.sigma_r),
        ] {
            if a.is_empty() {
                return Err(Error::InvalidParams(format!("{name} axis is empty")));
            }
        }
        let varying = [&self.omega_sigma, &self.rho0_sigma, &self.sigma_r]
            .iter()
            .filter(|a| a.len() > 1)
            .count();
        if varying > 2 {
            return Err(Error::InvalidParams("at most two axes may vary".into()));
        }
        for &s in &self.sigma_r.values {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "sigma_R must be > 0, got {s}"
                )));
            }
        }
        if self.grid()?.is_empty() {
            return Err(Error::InvalidParams(
                "no grid point satisfies rho0_sigma * sigma_R < 1".into(),
            ));
        }
        Ok(())
    }

    /// Points in output order: `sigma_r` outermost, then `omega_sigma`, with
    /// `rho0_sigma` fastest. Points outside the cavity are dropped.
    pub fn grid(&self) -> Result<Vec<GridPoint>> {
        let mut out = Vec::new();
        for &sigma_r in &self.sigma_r.values {
            for &omega_sigma in &self.omega_sigma.values {
                for &rho0_sigma in &self.rho0_sigma.values {
                    let p = GridPoint {
                        omega_sigma,
                        rho0_sigma,
                        sigma_r,
                    };
                    if p.inside_cavity() {
                        p.validate()?;
                        out.push(p);
                    }
                }
            }
        }
        Ok(out)
    }

    /// SHA-256 of the canonical JSON form, hex-encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("spec serializes");
        hex::encode(Sha256::digest(&json))
    }
}
