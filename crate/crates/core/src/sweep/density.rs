//! Two-axis density grids with the cavity zero-negativity contour and the
//! free-space boundary overlay.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::contour::{write_contour_csv, zero_contour, Contour, ContourAxis};
use super::row::Row;
use super::runner::{manifest_path, run_sweep, sibling, RunOptions, RunOutcome};
use super::spec::SweepSpec;
use crate::error::{Error, Result};
use crate::freespace::{free_negativity_boundary, write_boundary_csv, BoundaryPoint};

#[derive(Debug, Clone)]
pub struct DensityOutcome {
    pub run: RunOutcome,
    /// One contour per `sigma_R` value.
    pub contours: Vec<(f64, Contour)>,
    pub free_boundary: Vec<BoundaryPoint>,
    pub contour_path: PathBuf,
    pub boundary_path: PathBuf,
}

impl DensityOutcome {
    pub fn contour_empty(&self) -> bool {
        self.contours.iter().all(|(_, c)| c.segments.is_empty())
    }
}

pub fn contour_path(out: &Path) -> PathBuf {
    sibling(out, ".contour.csv")
}

pub fn boundary_path(out: &Path) -> PathBuf {
    sibling(out, ".freespace.csv")
}

fn check_axes(spec: &SweepSpec) -> Result<()> {
    for (name, a) in [
        ("omega_sigma", &spec.omega_sigma),
        ("rho0_sigma", &spec.rho0_sigma),
    ] {
        if a.len() < 2 || !a.is_increasing() {
            return Err(Error::InvalidParams(format!(
                "density needs an increasing {name} axis with >= 2 points"
            )));
        }
    }
    if spec.rho0_sigma.values[0] <= 0.0 {
        return Err(Error::InvalidParams("density needs rho0_sigma > 0".into()));
    }
    Ok(())
}

/// Margin `|M| − (X_AA + X_BB)/2` on the full `omega × rho0` grid of one
/// `sigma_R`; cells outside the cavity or unconverged are NaN.
pub fn margin_field(spec: &SweepSpec, rows: &[Row], sigma_r: f64) -> Vec<f64> {
    let mut it = rows.iter().filter(|r| r.sigma_r == sigma_r).peekable();
    let mut z = Vec::with_capacity(spec.omega_sigma.len() * spec.rho0_sigma.len());
    for &os in &spec.omega_sigma.values {
        for &r0 in &spec.rho0_sigma.values {
            let v = match it.peek() {
                Some(r) if r.omega_sigma == os && r.rho0_sigma == r0 => {
                    let r = it.next().expect("peeked");
                    if r.all_converged() {
                        r.negativity_margin()
                    } else {
                        f64::NAN
                    }
                }
                _ => f64::NAN,
            };
            z.push(v);
        }
    }
    z
}

pub fn run_density(spec: &SweepSpec, out: &Path, opts: &RunOptions) -> Result<DensityOutcome> {
    check_axes(spec)?;
    let run = run_sweep(spec, out, opts)?;
    let (cpath, bpath) = (contour_path(out), boundary_path(out));
    if !run.complete() {
        return Ok(DensityOutcome {
            run,
            contours: Vec::new(),
            free_boundary: Vec::new(),
            contour_path: cpath,
            boundary_path: bpath,
        });
    }
    let x = ContourAxis {
        values: &spec.rho0_sigma.values,
        log: spec.rho0_sigma.is_log(),
    };
    let y = ContourAxis {
        values: &spec.omega_sigma.values,
        log: spec.omega_sigma.is_log(),
    };
    let contours: Vec<(f64, Contour)> = spec
        .sigma_r
        .values
        .iter()
        .map(|&s| (s, zero_contour(x, y, &margin_field(spec, &run.rows, s))))
        .collect();
    let mut w = BufWriter::new(File::create(&cpath)?);
    for (k, (s, c)) in contours.iter().enumerate() {
        write_contour_csv(&mut w, *s, &c.segments, k == 0)?;
        if c.skipped_cells > 0 {
            log::warn!(
                "sigma_R = {s}: {} cells with unconverged or excluded corners",
                c.skipped_cells
            );
        }
    }
    w.flush()?;

    let free_boundary =
        free_negativity_boundary(&spec.omega_sigma.values, &spec.rho0_sigma.values)?;
    let mut w = BufWriter::new(File::create(&bpath)?);
    write_boundary_csv(&mut w, &free_boundary)?;
    w.flush()?;

    let mut outcome = DensityOutcome {
        run,
        contours,
        free_boundary,
        contour_path: cpath,
        boundary_path: bpath,
    };
    outcome.run.manifest.contour = Some(
        if outcome.contour_empty() {
            "empty"
        } else {
            "ok"
        }
        .to_string(),
    );
    outcome.run.manifest.write(&manifest_path(out))?;
    Ok(outcome)
}
