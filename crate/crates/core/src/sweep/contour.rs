//! Zero contour of a scalar field on a rectilinear grid (marching squares).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Contour {
    pub segments: Vec<Segment>,
    /// Cells with a NaN corner; they contribute no segments.
    pub skipped_cells: usize,
}

/// Grid axis; log axes are interpolated in `ln x`.
#[derive(Debug, Clone, Copy)]
pub struct ContourAxis<'a> {
    pub values: &'a [f64],
    pub log: bool,
}

impl ContourAxis<'_> {
    fn lerp(&self, i: usize, t: f64) -> f64 {
        let (a, b) = (self.values[i], self.values[i + 1]);
        if self.log {
            (a.ln() + t * (b.ln() - a.ln())).exp()
        } else {
            a + t * (b - a)
        }
    }
}

/// `z` is row-major with `x` fastest: `z[j * nx + i]` sits at `(x_i, y_j)`.
/// The region `z > 0` is separated from `z <= 0`.
pub fn zero_contour(x: ContourAxis, y: ContourAxis, z: &[f64]) -> Contour {
    let (nx, ny) = (x.values.len(), y.values.len());
    assert_eq!(z.len(), nx * ny, "field size must match the grid");
    let mut out = Contour::default();
    if nx < 2 || ny < 2 {
        return out;
    }
    let at = |i: usize, j: usize| z[j * nx + i];
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            // corners counter-clockwise from (i, j)
            let c = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            if c.iter().any(|v| v.is_nan()) {
                out.skipped_cells += 1;
                continue;
            }
            let pos = c.map(|v| v > 0.0);
            if pos.iter().all(|&p| p) || pos.iter().all(|&p| !p) {
                continue;
            }
            let t = |a: f64, b: f64| if a == b { 0.5 } else { a / (a - b) };
            // crossing on edge k, which joins corner k to corner k+1
            let point = |k: usize| -> Option<(f64, f64)> {
                let (a, b) = (c[k], c[(k + 1) % 4]);
                if pos[k] == pos[(k + 1) % 4] {
                    return None;
                }
                let s = t(a, b);
                Some(match k {
                    0 => (x.lerp(i, s), y.values[j]),
                    1 => (x.values[i + 1], y.lerp(j, s)),
                    2 => (x.lerp(i, 1.0 - s), y.values[j + 1]),
                    _ => (x.values[i], y.lerp(j, 1.0 - s)),
                })
            };
            let seg = |a: (f64, f64), b: (f64, f64)| Segment {
                x0: a.0,
                y0: a.1,
                x1: b.0,
                y1: b.1,
            };
            let edges: Vec<(usize, (f64, f64))> =
                (0..4).filter_map(|k| point(k).map(|p| (k, p))).collect();
            if edges.len() == 2 {
                out.segments.push(seg(edges[0].1, edges[1].1));
                continue;
            }
            // saddle: the mean decides whether corners 0 and 2 are joined
            let p: Vec<(f64, f64)> = edges.iter().map(|e| e.1).collect();
            let centre_pos = c.iter().sum::<f64>() / 4.0 > 0.0;
            if centre_pos == pos[0] {
                out.segments.push(seg(p[0], p[1]));
                out.segments.push(seg(p[2], p[3]));
            } else {
                out.segments.push(seg(p[3], p[0]));
                out.segments.push(seg(p[1], p[2]));
            }
        }
    }
    out
}

pub const CONTOUR_CSV_HEADER: &str =
    "sigma_R,rho0_sigma_start,omega_sigma_start,rho0_sigma_end,omega_sigma_end";

pub fn write_contour_csv<W: Write>(
    mut w: W,
    sigma_r: f64,
    segments: &[Segment],
    header: bool,
) -> Result<()> {
    if header {
        writeln!(w, "{CONTOUR_CSV_HEADER}")?;
    }
    for s in segments {
        writeln!(
            w,
            "{sigma_r:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            s.x0, s.y0, s.x1, s.y1
        )?;
    }
    Ok(())
}
