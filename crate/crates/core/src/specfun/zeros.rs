//! Zeros of `J_m`, with a process-wide cache of zeros and normalisation
//! weights `J_{m+1}(ξ_mn)²`.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::sync::{Arc, OnceLock, RwLock};

use super::bessel::jn;
use crate::error::{Error, Result};

/// Residual bound every accepted zero satisfies.
pub const ZERO_RESIDUAL: f64 = 1e-12;

/// Zeros of one order together with their normalisation weights.
#[derive(Debug, Clone)]
pub struct ModeColumn {
    pub m: u32,
    pub zeros: Vec<f64>,
    /// `J_{m+1}(ξ_mn)²`
    pub norms: Vec<f64>,
}

impl ModeColumn {
    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    fn extend_to(&mut self, n: usize) -> Result<()> {
        while self.zeros.len() < n {
            let xi = next_zero(self.m, &self.zeros)?;
            let j = jn(self.m + 1, xi);
            self.zeros.push(xi);
            self.norms.push(j * j);
        }
        Ok(())
    }
}

type Cache = RwLock<HashMap<u32, Arc<ModeColumn>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Cached column of order `m` holding at least `n` zeros.
pub fn mode_column(m: u32, n: usize) -> Result<Arc<ModeColumn>> {
    if let Some(col) = cache().read().expect("zero cache poisoned").get(&m) {
        if col.len() >= n {
            return Ok(Arc::clone(col));
        }
    }
    let mut guard = cache().write().expect("zero cache poisoned");
    let entry = guard.entry(m).or_insert_with(|| {
        Arc::new(ModeColumn {
            m,
            zeros: Vec::new(),
            norms: Vec::new(),
        })
    });
    if entry.len() < n {
        let mut col = (**entry).clone();
        col.extend_to(n)?;
        *entry = Arc::new(col);
    }
    Ok(Arc::clone(entry))
}

/// First `n_max` zeros of `J_m`, ascending.
pub fn bessel_zeros(m: u32, n_max: usize) -> Result<Vec<f64>> {
    if n_max == 0 {
        return Err(Error::InvalidParams(
            "bessel_zeros: n_max must be >= 1".into(),
        ));
    }
    Ok(mode_column(m, n_max)?.zeros[..n_max].to_vec())
}

fn mcmahon(m: u32, n: usize) -> f64 {
    let mu = 4.0 * (m as f64) * (m as f64);
    let beta = (n as f64 + 0.5 * m as f64 - 0.25) * PI;
    let b8 = 8.0 * beta;
    beta - (mu - 1.0) / b8
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8.powi(3))
        - 32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * b8.powi(5))
}

fn derivative(m: u32, x: f64) -> f64 {
    if m == 0 {
        -jn(1, x)
    } else {
        jn(m - 1, x) - m as f64 / x * jn(m, x)
    }
}

fn next_zero(m: u32, known: &[f64]) -> Result<f64> {
    let n = known.len() + 1;
    // J_m is positive just right of the origin, so it has sign (-1)^{n-1} before the n-th zero.
    let before = if n % 2 == 1 { 1.0 } else { -1.0 };
    let prev = known.last().copied();
    let prev_gap = if known.len() >= 2 {
        known[known.len() - 1] - known[known.len() - 2]
    } else {
        f64::INFINITY
    };
    let plausible = |z: f64| match prev {
        None => z > m as f64,
        Some(p) => z - p > 3.0 && z - p <= prev_gap.max(PI) + 1e-9,
    };

    let seed = mcmahon(m, n);
    if seed.is_finite() && seed > 0.5 {
        let (lo, hi) = (seed - 0.5, seed + 0.5);
        let (flo, fhi) = (jn(m, lo.max(0.0)), jn(m, hi));
        if flo * before > 0.0 && fhi * before < 0.0 && prev.is_none_or(|p| lo > p) {
            let z = refine(m, lo, hi, flo)?;
            if plausible(z) {
                return Ok(z);
            }
        }
    }

    // Scan: consecutive zeros are more than 3 apart, so 0.5 steps cannot skip one.
    let mut lo = prev.map_or((m as f64).max(0.5), |p| p + 1.0);
    let mut flo = jn(m, lo);
    for _ in 0..1_000_000 {
        let hi = lo + 0.5;
        let fhi = jn(m, hi);
        if flo * fhi <= 0.0 {
            let z = refine(m, lo, hi, flo)?;
            return Ok(z);
        }
        lo = hi;
        flo = fhi;
    }
    Err(Error::ZeroTable(format!(
        "no sign change found for zero {n} of J_{m}"
    )))
}

/// Safeguarded Newton inside a sign-change bracket.
fn refine(m: u32, mut lo: f64, mut hi: f64, flo: f64) -> Result<f64> {
    let sign_lo = flo.signum();
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = jn(m, x);
        if f == 0.0 {
            break;
        }
        if f.signum() == sign_lo {
            lo = x;
        } else {
            hi = x;
        }
        let step = f / derivative(m, x);
        let mut next = x - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - x).abs() <= 4.0 * f64::EPSILON * x;
        x = next;
        if done || hi - lo <= 4.0 * f64::EPSILON * x {
            break;
        }
    }
    let r = jn(m, x).abs();
    if r >= ZERO_RESIDUAL {
        return Err(Error::ZeroTable(format!(
            "zero of J_{m} near {x} has residual {r:e}"
        )));
    }
    Ok(x)
}

/// Zeros indexed by order, each column ascending from `n = 1`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BesselZeroTable {
    pub columns: BTreeMap<u32, Vec<f64>>,
}

impl BesselZeroTable {
    /// Table of orders `0..=m_max`, `n_max` zeros each.
    pub fn compute(m_max: u32, n_max: usize) -> Result<Self> {
        let mut columns = BTreeMap::new();
        for m in 0..=m_max {
            columns.insert(m, bessel_zeros(m, n_max)?);
        }
        Ok(Self { columns })
    }

    pub fn get(&self, m: u32, n: usize) -> Option<f64> {
        n.checked_sub(1)
            .and_then(|i| self.columns.get(&m)?.get(i).copied())
    }

    /// Residual, ordering and interlacing checks.
    pub fn verify(&self) -> Result<()> {
        for (&m, zs) in &self.columns {
            for (i, &z) in zs.iter().enumerate() {
                let r = jn(m, z).abs();
                if !(r < ZERO_RESIDUAL) {
                    return Err(Error::ZeroTable(format!("J_{m}(ξ_{m},{}) = {r:e}", i + 1)));
                }
            }
            if m == 0 && zs.first().is_some_and(|&z| z <= 2.0) {
                return Err(Error::ZeroTable("spurious small root of J_0".into()));
            }
            if zs.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::ZeroTable(format!(
                    "zeros of J_{m} not strictly increasing"
                )));
            }
            if let Some(next) = self.columns.get(&(m + 1)) {
                for (i, &z) in next.iter().enumerate() {
                    let below = zs.get(i).is_none_or(|&a| a < z);
                    let above = zs.get(i + 1).is_none_or(|&b| z < b);
                    if !(below && above) {
                        return Err(Error::ZeroTable(format!(
                            "interlacing fails at m={m}, n={}",
                            i + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Rows `m n xi`, 17 significant digits.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for (&m, zs) in &self.columns {
            for (i, z) in zs.iter().enumerate() {
                writeln!(w, "{m} {} {:.16e}", i + 1, z)?;
            }
        }
        Ok(())
    }

    /// Parses rows written by [`write`](Self::write) and re-verifies them.
    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut raw: BTreeMap<u32, BTreeMap<usize, f64>> = BTreeMap::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || {
                Error::ZeroTable(format!(
                    "line {}: expected `m n xi`, got {line:?}",
                    lineno + 1
                ))
            };
            let mut it = line.split_whitespace();
            let m: u32 = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let n: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let xi: f64 = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            if it.next().is_some() || n == 0 {
                return Err(bad());
            }
            raw.entry(m).or_default().insert(n, xi);
        }
        let mut columns = BTreeMap::new();
        for (m, rows) in raw {
            if rows.keys().enumerate().any(|(i, &n)| n != i + 1) {
                return Err(Error::ZeroTable(format!(
                    "order {m}: indices must run 1..N without gaps"
                )));
            }
            columns.insert(m, rows.into_values().collect());
        }
        let table = Self { columns };
        table.verify()?;
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_zeros() {
        let z = bessel_zeros(0, 2).unwrap();
        assert!((z[0] - 2.404_825_557_695_773).abs() < 1e-14);
        assert!((z[1] - 5.520_078_110_286_311).abs() < 1e-14);
        let z1 = bessel_zeros(1, 1).unwrap()[0];
        assert!((z1 - 3.831_705_970_207_512).abs() < 1e-14);
        assert!(z[0] < z1 && z1 < z[1]);
    }

    #[test]
    fn n_max_zero_rejected() {
        assert!(bessel_zeros(0, 0).is_err());
    }

    #[test]
    fn high_order_and_high_index() {
        // mpmath besseljzero(200, 1), besseljzero(0, 100000)
        let z = bessel_zeros(200, 1).unwrap()[0];
        assert!((z - 211.029_166_510_554_7).abs() < 1e-9, "{z}");
        let z = bessel_zeros(0, 100_000).unwrap()[99_999];
        assert!((z - 314_158.479_961_213_8).abs() < 1e-6, "{z}");
    }

    #[test]
    fn table_verifies_and_round_trips() {
        let t = BesselZeroTable::compute(12, 60).unwrap();
        t.verify().unwrap();
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        let back = BesselZeroTable::read(buf.as_slice()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn corrupted_row_rejected_on_load() {
        let text = "0 1 2.4048255576957728\n0 2 5.6\n";
        assert!(BesselZeroTable::read(text.as_bytes()).is_err());
        assert!(BesselZeroTable::read("0 1 x\n".as_bytes()).is_err());
    }
}
