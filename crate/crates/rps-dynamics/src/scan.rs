//! Parameter sweeps and basin-of-attraction rasters, with CSV and PPM output.
//!
//! A bifurcation sweep evaluates the head/tail/count structure along a λ grid
//! at fixed α. A basin raster discretizes the simplex into a triangular grid
//! of cells, iterates the full map from each cell center, and labels the cell
//! by the first periodic orbit it approaches. Both computations are
//! embarrassingly parallel and keep deterministic output order.

use std::fs::File;
use std::io::{BufWriter, Write as IoWrite};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::attractor::{enumerate_attractor, head_tail_count, AttractorReport};
use crate::dynamics::{step_t, GameParams, Strategy};
use crate::error::{Error, Result};

/// Head/tail/count values along a λ grid at fixed α.
#[derive(Debug, Clone, Serialize)]
pub struct BifurcationScan {
    pub alpha: f64,
    pub lambdas: Vec<f64>,
    pub heads: Vec<u32>,
    pub tails: Vec<u32>,
    pub counts: Vec<u32>,
    pub boundary_flags: Vec<bool>,
}

/// An inclusive, evenly spaced grid from `lo` to `hi` with `points` entries.
pub fn lambda_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![lo];
    }
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

/// Evaluates the attractor counting structure at every λ on the grid.
pub fn bifurcation_sweep(alpha: f64, lambdas: &[f64]) -> Result<BifurcationScan> {
    let rows = lambdas
        .par_iter()
        .map(|&l| {
            let g = GameParams::from_alpha(alpha, l)?;
            Ok(head_tail_count(&g))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BifurcationScan {
        alpha,
        lambdas: lambdas.to_vec(),
        heads: rows.iter().map(|ht| ht.head).collect(),
        tails: rows.iter().map(|ht| ht.tail).collect(),
        counts: rows.iter().map(|ht| ht.count).collect(),
        boundary_flags: rows.iter().map(|ht| ht.boundary).collect(),
    })
}

/// Outcome of iterating the map from one raster cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CellLabel {
    /// Converged to the period-3k orbit with this branch index k.
    Orbit(u32),
    /// Budget exhausted before reaching any orbit.
    Unresolved,
    /// The trajectory entered the indifference set Γ.
    GammaHit,
}

/// A triangular-grid labeling of the simplex by basin of attraction.
///
/// Cells are upward triangles indexed by `(i, j)` with `i + j <= resolution-1`,
/// stored row-major in `i` then `j`; the cell center is
/// `((i+1/3)/R, (j+1/3)/R, (R-1-i-j+1/3)/R)`.
#[derive(Debug, Clone, Serialize)]
pub struct BasinRaster {
    pub alpha: f64,
    pub lambda: f64,
    pub resolution: u32,
    pub iter_budget: u32,
    pub conv_tol: f64,
    pub report: AttractorReport,
    pub cells: Vec<CellLabel>,
}

/// Per-label cell totals for a raster.
#[derive(Debug, Clone, Serialize)]
pub struct RasterSummary {
    pub total: usize,
    /// `(k, period, cells)` per periodic orbit, ascending k.
    pub orbit_cells: Vec<(u32, u32, usize)>,
    pub unresolved: usize,
    pub gamma: usize,
}

impl BasinRaster {
    pub fn num_cells(resolution: u32) -> usize {
        let r = resolution as usize;
        r * (r + 1) / 2
    }

    pub fn cell_index(&self, i: u32, j: u32) -> usize {
        debug_assert!(i + j < self.resolution);
        let r = self.resolution as usize;
        let i = i as usize;
        i * (2 * r - i + 1) / 2 + j as usize
    }

    pub fn label(&self, i: u32, j: u32) -> CellLabel {
        self.cells[self.cell_index(i, j)]
    }

    pub fn cell_center(resolution: u32, i: u32, j: u32) -> Strategy {
        let r = resolution as f64;
        let k = (resolution - 1 - i - j) as f64;
        Strategy::renormalized([
            (i as f64 + 1.0 / 3.0) / r,
            (j as f64 + 1.0 / 3.0) / r,
            (k + 1.0 / 3.0) / r,
        ])
    }

    pub fn summary(&self) -> RasterSummary {
        let mut orbit_cells: Vec<(u32, u32, usize)> = self
            .report
            .orbits
            .iter()
            .map(|o| (o.k, o.period, 0usize))
            .collect();
        let mut unresolved = 0;
        let mut gamma = 0;
        for cell in &self.cells {
            match cell {
                CellLabel::Orbit(k) => {
                    if let Some(row) = orbit_cells.iter_mut().find(|row| row.0 == *k) {
                        row.2 += 1;
                    }
                }
                CellLabel::Unresolved => unresolved += 1,
                CellLabel::GammaHit => gamma += 1,
            }
        }
        RasterSummary {
            total: self.cells.len(),
            orbit_cells,
            unresolved,
            gamma,
        }
    }
}

fn solve_cell(
    g: &GameParams,
    report: &AttractorReport,
    conv_tol: f64,
    iter_budget: u32,
    start: Strategy,
) -> CellLabel {
    let near_orbit = |x: &Strategy| -> Option<u32> {
        report
            .orbits
            .iter()
            .find(|o| o.dist_to(x) < conv_tol)
            .map(|o| o.k)
    };
    let mut x = start;
    for _ in 0..iter_budget {
        if let Some(k) = near_orbit(&x) {
            return CellLabel::Orbit(k);
        }
        match step_t(g, &x) {
            Ok(y) => x = y,
            Err(_) => return CellLabel::GammaHit,
        }
    }
    match near_orbit(&x) {
        Some(k) => CellLabel::Orbit(k),
        None => CellLabel::Unresolved,
    }
}

/// Labels every cell of the triangular grid by iterating the full map from
/// its center until it comes within `conv_tol` of a periodic orbit.
pub fn basin_raster(
    g: &GameParams,
    resolution: u32,
    iter_budget: u32,
    conv_tol: f64,
) -> Result<BasinRaster> {
    if resolution == 0 {
        return Err(Error::InvalidParams("resolution must be at least 1".into()));
    }
    if !conv_tol.is_finite() || conv_tol <= 0.0 {
        return Err(Error::InvalidParams("conv_tol must be positive".into()));
    }
    let report = enumerate_attractor(g)?;
    let mut coords = Vec::with_capacity(BasinRaster::num_cells(resolution));
    for i in 0..resolution {
        for j in 0..resolution - i {
            coords.push((i, j));
        }
    }
    let cells: Vec<CellLabel> = coords
        .par_iter()
        .map(|&(i, j)| {
            let center = BasinRaster::cell_center(resolution, i, j);
            solve_cell(g, &report, conv_tol, iter_budget, center)
        })
        .collect();
    Ok(BasinRaster {
        alpha: g.alpha(),
        lambda: g.lambda(),
        resolution,
        iter_budget,
        conv_tol,
        report,
        cells,
    })
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Renders a sweep as CSV with header `alpha,lambda,head,tail,count,boundary`.
/// Floats carry 17 significant digits so they round-trip exactly.
pub fn render_bifurcation_csv(scan: &BifurcationScan) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    out.push_str("alpha,lambda,head,tail,count,boundary\n");
    for idx in 0..scan.lambdas.len() {
        writeln!(
            out,
            "{:.16e},{:.16e},{},{},{},{}",
            scan.alpha,
            scan.lambdas[idx],
            scan.heads[idx],
            scan.tails[idx],
            scan.counts[idx],
            scan.boundary_flags[idx],
        )
        .expect("writing to a string cannot fail");
    }
    out
}

/// Writes [`render_bifurcation_csv`] output to a file.
pub fn write_bifurcation_csv(scan: &BifurcationScan, path: &Path) -> Result<()> {
    std::fs::write(path, render_bifurcation_csv(scan)).map_err(|e| io_err(path, e))
}

/// Writes a raster as CSV with header `i,j,x1,x2,x3,label,period`.
///
/// `label` is the orbit index k for converged cells, `0` for unresolved
/// cells and `-1` for trajectories that hit Γ; `period` is `3k` or `0`.
pub fn write_raster_csv(raster: &BasinRaster, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    (|| -> std::io::Result<()> {
        writeln!(w, "i,j,x1,x2,x3,label,period")?;
        for i in 0..raster.resolution {
            for j in 0..raster.resolution - i {
                let c = BasinRaster::cell_center(raster.resolution, i, j).coords();
                let (label, period) = match raster.label(i, j) {
                    CellLabel::Orbit(k) => (k as i64, 3 * k as i64),
                    CellLabel::Unresolved => (0, 0),
                    CellLabel::GammaHit => (-1, 0),
                };
                writeln!(
                    w,
                    "{},{},{:.16e},{:.16e},{:.16e},{},{}",
                    i, j, c[0], c[1], c[2], label, period,
                )?;
            }
        }
        w.flush()
    })()
    .map_err(|e| io_err(path, e))
}

const ORBIT_PALETTE: [[u8; 3]; 8] = [
    [230, 25, 75],
    [60, 180, 75],
    [0, 130, 200],
    [255, 225, 25],
    [145, 30, 180],
    [70, 240, 240],
    [245, 130, 48],
    [240, 50, 230],
];
const OUTSIDE_COLOR: [u8; 3] = [255, 255, 255];
const UNRESOLVED_COLOR: [u8; 3] = [40, 40, 40];
const GAMMA_COLOR: [u8; 3] = [0, 0, 0];

/// Renders a raster as a binary PPM image.
///
/// The simplex maps to a triangle with the third vertex at the top center,
/// the first at the bottom left and the second at the bottom right. The
/// canvas is `resolution` pixels wide and `ceil(resolution * sqrt(3)/2)`
/// pixels tall; pixels outside the triangle are white, unresolved cells dark
/// gray, Γ hits black, and orbit cells take the palette color `k % 8`.
pub fn write_ppm(raster: &BasinRaster, path: &Path) -> Result<()> {
    let r = raster.resolution;
    let width = r as usize;
    let height = (r as f64 * 3f64.sqrt() / 2.0).ceil() as usize;
    let mut pixels = Vec::with_capacity(width * height * 3);
    for py in 0..height {
        for px in 0..width {
            let cx = (px as f64 + 0.5) / width as f64;
            let cy = (py as f64 + 0.5) / height as f64;
            let x3 = 1.0 - cy;
            let x2 = cx - x3 / 2.0;
            let x1 = 1.0 - x2 - x3;
            let color = if x1 < 0.0 || x2 < 0.0 || x3 < 0.0 {
                OUTSIDE_COLOR
            } else {
                let i = ((x1 * r as f64).floor() as i64).clamp(0, r as i64 - 1) as u32;
                let j_max = r as i64 - 1 - i as i64;
                let j = ((x2 * r as f64).floor() as i64).clamp(0, j_max) as u32;
                match raster.label(i, j) {
                    CellLabel::Orbit(k) => ORBIT_PALETTE[(k % 8) as usize],
                    CellLabel::Unresolved => UNRESOLVED_COLOR,
                    CellLabel::GammaHit => GAMMA_COLOR,
                }
            };
            pixels.extend_from_slice(&color);
        }
    }
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    (|| -> std::io::Result<()> {
        write!(w, "P6\n{width} {height}\n255\n")?;
        w.write_all(&pixels)?;
        w.flush()
    })()
    .map_err(|e| io_err(path, e))
}
