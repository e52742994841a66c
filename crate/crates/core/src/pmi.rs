//! Grid checks of the PMI/NMI property and of positive quadrant dependence.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::{e_map, grid, midpoints, CopulaModel};
use crate::error::{Error, Result};
use crate::families::{archimedean, ArchimedeanGenerator};

/// Default grid size on `(0,1/2)²`.
pub const DEFAULT_GRID: usize = 200;

/// Maximum number of violations kept in a report.
pub const MAX_LISTED: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Volume,
    Kernel,
    Density,
    Pqd,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Volume => "volume",
            Criterion::Kernel => "kernel",
            Criterion::Density => "density",
            Criterion::Pqd => "pqd",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Pmi,
    Nmi,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Pmi => 1.0,
            Direction::Nmi => -1.0,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Pmi => "pmi",
            Direction::Nmi => "nmi",
        })
    }
}

/// A failed inequality: a point (density, pqd), a cell given by its two
/// opposite corners (volume), or a pair of points along `v` (kernel).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub points: Vec<(f64, f64)>,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmiReport {
    pub criterion: Criterion,
    pub grid_size: usize,
    pub direction: Direction,
    pub tol: f64,
    pub passed: bool,
    pub min_slack: f64,
    /// Total number of violations; `violations` lists at most [`MAX_LISTED`].
    pub violation_count: usize,
    pub violations: Vec<Violation>,
}

impl PmiReport {
    fn from_rows(
        criterion: Criterion,
        grid_size: usize,
        direction: Direction,
        tol: f64,
        rows: Vec<Vec<Violation>>,
    ) -> Self {
        let mut min_slack = f64::INFINITY;
        let mut violations = Vec::new();
        let mut violation_count = 0;
        for v in rows.into_iter().flatten() {
            min_slack = min_slack.min(v.slack);
            if v.slack < -tol {
                violation_count += 1;
                if violations.len() < MAX_LISTED {
                    violations.push(v);
                }
            }
        }
        PmiReport {
            criterion,
            grid_size,
            direction,
            tol,
            passed: violation_count == 0,
            min_slack,
            violation_count,
            violations,
        }
    }
}

/// Slack tolerance suited to the accuracy of the copula's CDF.
pub fn default_tolerance(c: &CopulaModel) -> f64 {
    if c.accuracy() > 1e-13 {
        1e-7
    } else {
        1e-9
    }
}

/// `E_C`-volumes of all cells of an `m × m` grid on `(0,1/2)²`.
pub fn check_pmi_volume(c: &CopulaModel, m: usize, tol: f64, dir: Direction) -> PmiReport {
    let pts = grid(0.0, 0.5, m + 1);
    let e: Vec<Vec<f64>> = pts
        .par_iter()
        .map(|&u| pts.iter().map(|&v| e_map(c, u, v)).collect())
        .collect();
    let s = dir.sign();
    let rows = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let vol = e[i + 1][j + 1] - e[i][j + 1] - e[i + 1][j] + e[i][j];
                    Violation {
                        points: vec![(pts[i], pts[j]), (pts[i + 1], pts[j + 1])],
                        slack: s * vol,
                    }
                })
                .collect()
        })
        .collect();
    PmiReport::from_rows(Criterion::Volume, m, dir, tol, rows)
}

fn kernel_map(c: &CopulaModel, u: f64, v: f64) -> f64 {
    let k = |x: f64, y: f64| c.kernel(x, y).expect("kernel checked");
    k(u, v) - k(1.0 - u, v) + k(u, 1.0 - v) - k(1.0 - u, 1.0 - v)
}

/// Monotonicity of `v ↦ K(u,[0,v]) - K(1-u,[0,v]) + K(u,[0,1-v]) - K(1-u,[0,1-v])`
/// for the given `u`, comparing consecutive entries of `v_points`.
pub fn check_pmi_kernel_at(
    c: &CopulaModel,
    u_points: &[f64],
    v_points: &[f64],
    tol: f64,
    dir: Direction,
) -> Result<PmiReport> {
    if !c.has_kernel() {
        return Err(Error::NoKernel);
    }
    let s = dir.sign();
    let rows = u_points
        .par_iter()
        .map(|&u| {
            let f: Vec<f64> = v_points.iter().map(|&v| kernel_map(c, u, v)).collect();
            (0..v_points.len().saturating_sub(1))
                .map(|j| Violation {
                    points: vec![(u, v_points[j]), (u, v_points[j + 1])],
                    slack: s * (f[j + 1] - f[j]),
                })
                .collect()
        })
        .collect();
    Ok(PmiReport::from_rows(
        Criterion::Kernel,
        u_points.len().max(v_points.len()),
        dir,
        tol,
        rows,
    ))
}

/// Kernel criterion with `u` on the `m` cell midpoints of `(0,1/2)` and `v`
/// on the interior cell boundaries, so atoms on the diagonals never sit
/// exactly on a `v` grid point.
pub fn check_pmi_kernel(c: &CopulaModel, m: usize, tol: f64, dir: Direction) -> Result<PmiReport> {
    let us = midpoints(0.0, 0.5, m);
    let vs: Vec<f64> = (1..m).map(|j| 0.5 * j as f64 / m as f64).collect();
    let mut rep = check_pmi_kernel_at(c, &us, &vs, tol, dir)?;
    rep.grid_size = m;
    Ok(rep)
}

/// `c(u,v) - c(1-u,v) - c(u,1-v) + c(1-u,1-v) >= 0` on midpoints of `(0,1/2)²`.
pub fn check_pmi_density(
    c: &CopulaModel,
    m: usize,
    tol: f64,
    dir: Direction,
) -> Result<PmiReport> {
    if !c.has_density() {
        return Err(Error::NoDensity);
    }
    let pts = midpoints(0.0, 0.5, m);
    let s = dir.sign();
    let rows = pts
        .par_iter()
        .map(|&u| {
            pts.iter()
                .map(|&v| {
                    let d = |x: f64, y: f64| c.density(x, y).expect("density checked");
                    let val = d(u, v) - d(1.0 - u, v) - d(u, 1.0 - v) + d(1.0 - u, 1.0 - v);
                    Violation {
                        points: vec![(u, v)],
                        slack: s * val,
                    }
                })
                .collect()
        })
        .collect();
    Ok(PmiReport::from_rows(Criterion::Density, m, dir, tol, rows))
}

/// `C >= Π` (or `C <= Π` for the negative direction) on midpoints of `(0,1)²`.
pub fn check_pqd(c: &CopulaModel, m: usize, tol: f64, dir: Direction) -> PmiReport {
    let pts = midpoints(0.0, 1.0, m);
    let s = dir.sign();
    let rows = pts
        .par_iter()
        .map(|&u| {
            pts.iter()
                .map(|&v| Violation {
                    points: vec![(u, v)],
                    slack: s * (c.cdf(u, v) - u * v),
                })
                .collect()
        })
        .collect();
    PmiReport::from_rows(Criterion::Pqd, m, dir, tol, rows)
}

/// Runs one criterion; kernel and density report their missing-capability errors.
pub fn check(
    c: &CopulaModel,
    criterion: Criterion,
    m: usize,
    tol: f64,
    dir: Direction,
) -> Result<PmiReport> {
    match criterion {
        Criterion::Volume => Ok(check_pmi_volume(c, m, tol, dir)),
        Criterion::Kernel => check_pmi_kernel(c, m, tol, dir),
        Criterion::Density => check_pmi_density(c, m, tol, dir),
        Criterion::Pqd => Ok(check_pqd(c, m, tol, dir)),
    }
}

/// Every criterion the copula supports.
pub fn check_all(c: &CopulaModel, m: usize, tol: f64, dir: Direction) -> Vec<PmiReport> {
    [
        Criterion::Volume,
        Criterion::Kernel,
        Criterion::Density,
        Criterion::Pqd,
    ]
    .into_iter()
    .filter_map(|cr| check(c, cr, m, tol, dir).ok())
    .collect()
}

/// Volume-criterion verdict (the defining one).
pub fn is_pmi(c: &CopulaModel, m: usize, tol: f64) -> bool {
    check_pmi_volume(c, m, tol, Direction::Pmi).passed
}

pub fn is_nmi(c: &CopulaModel, m: usize, tol: f64) -> bool {
    check_pmi_volume(c, m, tol, Direction::Nmi).passed
}

/// Outcome of comparing PQD and PMI verdicts for one Archimedean copula.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRecord {
    pub generator: String,
    pub param: Option<f64>,
    pub pqd: bool,
    pub pmi: bool,
    pub nqd: bool,
    pub nmi: bool,
}

impl ProbeRecord {
    pub fn agrees(&self) -> bool {
        self.pqd == self.pmi && self.nqd == self.nmi
    }
}

/// Diagnostic sweep comparing PQD with PMI (and NQD with NMI) over
/// Archimedean generators; never asserts either way.
pub fn archimedean_probe(gens: Vec<ArchimedeanGenerator>, m: usize, tol: f64) -> Vec<ProbeRecord> {
    gens.into_iter()
        .filter_map(|g| {
            let name = g.name().to_string();
            let param = g.param();
            let c = archimedean(g).ok()?;
            Some(ProbeRecord {
                generator: name,
                param,
                pqd: check_pqd(&c, m, tol, Direction::Pmi).passed,
                pmi: is_pmi(&c, m, tol),
                nqd: check_pqd(&c, m, tol, Direction::Nmi).passed,
                nmi: is_nmi(&c, m, tol),
            })
        })
        .collect()
}
