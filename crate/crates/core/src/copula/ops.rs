use rand::{Rng, RngCore};

use super::{grid, midpoints, reflect, Copula, CopulaModel, Family, Mixture, ReflectionTag};
use crate::error::{Error, Result};

/// `E_C(u,v) = C(u,v) + C(1-u,v) + C(u,1-v) + C(1-u,1-v) - 1`.
pub fn e_map(c: &CopulaModel, u: f64, v: f64) -> f64 {
    c.cdf(u, v) + c.cdf(1.0 - u, v) + c.cdf(u, 1.0 - v) + c.cdf(1.0 - u, 1.0 - v) - 1.0
}

/// `E_C`-volume of `[a,b] × [c,d]`.
pub fn ec_volume(c: &CopulaModel, a: f64, b: f64, cc: f64, d: f64) -> f64 {
    e_map(c, b, d) - e_map(c, a, d) - e_map(c, b, cc) + e_map(c, a, cc)
}

/// Arithmetic mean of the eight images of `c` under the reflection group.
pub fn gamma_average(c: &CopulaModel) -> CopulaModel {
    let parts = ReflectionTag::ALL
        .into_iter()
        .map(|g| (0.125, reflect(c, g)))
        .collect();
    CopulaModel::new(
        Mixture::new(Family::GammaAverage, c.params(), parts).expect("uniform weights"),
    )
}

/// Largest deviation `|g(C) - C|` over all group elements on an `m × m` grid.
pub fn max_reflection_gap(c: &CopulaModel, m: usize) -> f64 {
    let pts = grid(0.0, 1.0, m);
    let mut gap = 0.0_f64;
    for g in ReflectionTag::ALL.into_iter().skip(1) {
        let r = reflect(c, g);
        for &u in &pts {
            for &v in &pts {
                gap = gap.max((r.cdf(u, v) - c.cdf(u, v)).abs());
            }
        }
    }
    gap
}

pub fn is_invariant(c: &CopulaModel, m: usize, tol: f64) -> bool {
    max_reflection_gap(c, m) <= tol
}

fn symmetry_gap(c: &CopulaModel, m: usize) -> f64 {
    let pts = grid(0.0, 1.0, m);
    let mut gap = 0.0_f64;
    for (i, &u) in pts.iter().enumerate() {
        for &v in &pts[i + 1..] {
            gap = gap.max((c.cdf(u, v) - c.cdf(v, u)).abs());
        }
    }
    gap
}

fn default_tol(c: &CopulaModel) -> f64 {
    (10.0 * c.accuracy()).max(1e-12)
}

#[derive(Debug, Clone)]
struct Theta {
    // copies placed in the quadrants with offsets (0,0), (1,0), (0,1), (1,1)
    parts: [CopulaModel; 4],
}

const OFFSETS: [(f64, f64); 4] = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];

fn quadrant(x: f64) -> usize {
    usize::from(x >= 0.5)
}

impl Copula for Theta {
    fn family(&self) -> Family {
        Family::Theta
    }
    fn params(&self) -> Vec<f64> {
        self.parts[0].params()
    }
    fn cdf(&self, u: f64, v: f64) -> f64 {
        self.parts
            .iter()
            .zip(OFFSETS)
            .map(|(g, (ou, ov))| 0.25 * g.cdf(2.0 * u - ou, 2.0 * v - ov))
            .sum()
    }
    fn density(&self, u: f64, v: f64) -> Option<f64> {
        let (qu, qv) = (quadrant(u), quadrant(v));
        self.parts[qu + 2 * qv].density(2.0 * u - qu as f64, 2.0 * v - qv as f64)
    }
    fn kernel(&self, u: f64, v: f64) -> Option<f64> {
        let qu = quadrant(u);
        let x = 2.0 * u - qu as f64;
        let lo = self.parts[qu].kernel(x, 2.0 * v)?;
        let hi = self.parts[qu + 2].kernel(x, 2.0 * v - 1.0)?;
        Some(0.5 * (lo + hi))
    }
    fn kernel_v(&self, u: f64, v: f64) -> Option<f64> {
        let qv = quadrant(v);
        let y = 2.0 * v - qv as f64;
        let left = self.parts[2 * qv].kernel_v(2.0 * u, y)?;
        let right = self.parts[1 + 2 * qv].kernel_v(2.0 * u - 1.0, y)?;
        Some(0.5 * (left + right))
    }
    fn has_sampler(&self) -> bool {
        self.parts[0].can_sample()
    }
    fn sample_pair(&self, rng: &mut dyn RngCore) -> Option<(f64, f64)> {
        let q = rng.random_range(0..4);
        let (x, y) = self.parts[q].sample_pair(rng)?;
        let (ou, ov) = OFFSETS[q];
        Some((0.5 * (ou + x), 0.5 * (ov + y)))
    }
    fn accuracy(&self) -> f64 {
        self.parts[0].accuracy()
    }
}

/// Maps a symmetric copula to the invariant copula that places quarter-mass
/// copies of `C`, `ν₁(C)`, `ν₂(C)` and `ν(C)` in the four quadrants.
pub fn theta_transform(c: &CopulaModel) -> Result<CopulaModel> {
    let gap = symmetry_gap(c, 64);
    if gap > default_tol(c) {
        return Err(Error::NotSymmetric(gap));
    }
    Ok(CopulaModel::new(Theta {
        parts: [
            c.clone(),
            reflect(c, ReflectionTag::Nu1),
            reflect(c, ReflectionTag::Nu2),
            reflect(c, ReflectionTag::Nu),
        ],
    }))
}

#[derive(Debug, Clone)]
struct ThetaInverse {
    base: CopulaModel,
}

impl Copula for ThetaInverse {
    fn family(&self) -> Family {
        Family::ThetaInverse
    }
    fn params(&self) -> Vec<f64> {
        self.base.params()
    }
    fn cdf(&self, u: f64, v: f64) -> f64 {
        4.0 * self.base.cdf(0.5 * u, 0.5 * v)
    }
    fn density(&self, u: f64, v: f64) -> Option<f64> {
        self.base.density(0.5 * u, 0.5 * v)
    }
    fn kernel(&self, u: f64, v: f64) -> Option<f64> {
        Some(2.0 * self.base.kernel(0.5 * u, 0.5 * v)?)
    }
    fn kernel_v(&self, u: f64, v: f64) -> Option<f64> {
        Some(2.0 * self.base.kernel_v(0.5 * u, 0.5 * v)?)
    }
    fn has_sampler(&self) -> bool {
        self.base.can_sample()
    }
    fn sample_pair(&self, rng: &mut dyn RngCore) -> Option<(f64, f64)> {
        loop {
            let (x, y) = self.base.sample_pair(rng)?;
            if x < 0.5 && y < 0.5 {
                return Some((2.0 * x, 2.0 * y));
            }
        }
    }
    fn accuracy(&self) -> f64 {
        4.0 * self.base.accuracy()
    }
}

/// Inverse of [`theta_transform`] on invariant copulas: `4 A(u/2, v/2)`.
pub fn theta_inverse(a: &CopulaModel) -> Result<CopulaModel> {
    let gap = max_reflection_gap(a, 64);
    if gap > default_tol(a) {
        return Err(Error::NotInvariant(gap));
    }
    Ok(CopulaModel::new(ThetaInverse { base: a.clone() }))
}

/// `A ⪯ B`, i.e. `A <= B + tol` on an `m × m` grid of `[0,1/2]²`.
pub fn precede(a: &CopulaModel, b: &CopulaModel, m: usize, tol: f64) -> Result<bool> {
    for c in [a, b] {
        let gap = max_reflection_gap(c, 64);
        if gap > default_tol(c) {
            return Err(Error::NotInvariant(gap));
        }
    }
    let pts = grid(0.0, 0.5, m);
    Ok(pts
        .iter()
        .all(|&u| pts.iter().all(|&v| a.cdf(u, v) <= b.cdf(u, v) + tol)))
}

/// Numerical check of the copula axioms on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub grid_size: usize,
    /// Largest `|C(u,0)|`, `|C(0,v)|`.
    pub grounded: f64,
    /// Largest `|C(u,1) - u|`, `|C(1,v) - v|`.
    pub margins: f64,
    /// Smallest C-volume among the grid cells.
    pub min_volume: f64,
    /// Smallest increment of `v ↦ K(u,[0,v])`, if a kernel is present.
    pub kernel_min_increment: Option<f64>,
    /// Largest `|K(u,0)| + |K(u,1) - 1|`, if a kernel is present.
    pub kernel_boundary: Option<f64>,
}

impl AxiomReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.grounded <= tol
            && self.margins <= tol
            && self.min_volume >= -tol
            && self.kernel_min_increment.is_none_or(|k| k >= -tol)
            && self.kernel_boundary.is_none_or(|k| k <= tol)
    }
}

pub fn check_axioms(c: &CopulaModel, m: usize) -> AxiomReport {
    let pts = grid(0.0, 1.0, m + 1);
    let vals: Vec<Vec<f64>> = pts
        .iter()
        .map(|&u| pts.iter().map(|&v| c.cdf(u, v)).collect())
        .collect();
    let mut grounded = 0.0_f64;
    let mut margins = 0.0_f64;
    for (i, &t) in pts.iter().enumerate() {
        grounded = grounded.max(vals[i][0].abs()).max(vals[0][i].abs());
        margins = margins
            .max((vals[i][m] - t).abs())
            .max((vals[m][i] - t).abs());
    }
    let mut min_volume = f64::INFINITY;
    for i in 0..m {
        for j in 0..m {
            let vol = vals[i + 1][j + 1] - vals[i][j + 1] - vals[i + 1][j] + vals[i][j];
            min_volume = min_volume.min(vol);
        }
    }
    let (kernel_min_increment, kernel_boundary) = if c.has_kernel() {
        let mut inc = f64::INFINITY;
        let mut bnd = 0.0_f64;
        for u in midpoints(0.0, 1.0, m) {
            let ks: Vec<f64> = pts.iter().map(|&v| c.kernel(u, v).unwrap()).collect();
            for w in ks.windows(2) {
                inc = inc.min(w[1] - w[0]);
            }
            bnd = bnd.max(ks[0].abs() + (ks[m] - 1.0).abs());
        }
        (Some(inc), Some(bnd))
    } else {
        (None, None)
    };
    AxiomReport {
        grid_size: m,
        grounded,
        margins,
        min_volume,
        kernel_min_increment,
        kernel_boundary,
    }
}
