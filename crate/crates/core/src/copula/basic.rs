use rand::{Rng, RngCore};
use rand_distr::Open01;

use super::{Copula, CopulaModel, Family};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Independence;

impl Copula for Independence {
    fn family(&self) -> Family {
        Family::Independence
    }
    fn cdf(&self, u: f64, v: f64) -> f64 {
        u * v
    }
    fn density(&self, _u: f64, _v: f64) -> Option<f64> {
        Some(1.0)
    }
    fn kernel(&self, _u: f64, v: f64) -> Option<f64> {
        Some(v)
    }
    fn kernel_v(&self, u: f64, _v: f64) -> Option<f64> {
        Some(u)
    }
    fn has_sampler(&self) -> bool {
        true
    }
    fn sample_pair(&self, rng: &mut dyn RngCore) -> Option<(f64, f64)> {
        Some((rng.sample(Open01), rng.sample(Open01)))
    }
}

#[derive(Debug, Clone, Copy)]
struct Upper;

impl Copula for Upper {
    fn family(&self) -> Family {
        Family::Upper
    }
    fn cdf(&self, u: f64, v: f64) -> f64 {
        u.min(v)
    }
    fn kernel(&self, u: f64, v: f64) -> Option<f64> {
        Some(if v >= u { 1.0 } else { 0.0 })
    }
    fn kernel_v(&self, u: f64, v: f64) -> Option<f64> {
        Some(if u >= v { 1.0 } else { 0.0 })
    }
    fn has_sampler(&self) -> bool {
        true
    }
    fn sample_pair(&self, rng: &mut dyn RngCore) -> Option<(f64, f64)> {
        let u: f64 = rng.sample(Open01);
        Some((u, u))
    }
}

#[derive(Debug, Clone, Copy)]
struct Lower;

impl Copula for Lower {
    fn family(&self) -> Family {
        Family::Lower
    }
    fn cdf(&self, u: f64, v: f64) -> f64 {
        (u + v - 1.0).max(0.0)
    }
    fn kernel(&self, u: f64, v: f64) -> Option<f64> {
        Some(if v >= 1.0 - u { 1.0 } else { 0.0 })
    }
    fn kernel_v(&self, u: f64, v: f64) -> Option<f64> {
        Some(if u >= 1.0 - v { 1.0 } else { 0.0 })
    }
    fn has_sampler(&self) -> bool {
        true
    }
    fn sample_pair(&self, rng: &mut dyn RngCore) -> Option<(f64, f64)> {
        let u: f64 = rng.sample(Open01);
        Some((u, 1.0 - u))
    }
}

/// The invariant copula whose mass sits uniformly on the diamond with
/// vertices (1/2,0), (1,1/2), (1/2,1), (0,1/2).
#[derive(Debug, Clone, Copy)]
struct VCopula;

fn diamond_points(u: f64) -> (f64, f64) {
    let a = (u - 0.5).abs();
    (a, 1.0 - a)
}

impl Copula for VCopula {
    fn family(&self) -> Family {
        Family::V
    }
    fn cdf(&self, u: f64, v: f64) -> f64 {
        if (u - v).abs() > 0.5 {
            u.min(v)
        } else if (u + v - 1.0).abs() > 0.5 {
            (u + v - 1.0).max(0.0)
        } else {
            0.5 * u + 0.5 * v - 0.25
        }
    }
    fn kernel(&self, u: f64, v: f64) -> Option<f64> {
        let (a, b) = diamond_points(u);
        let mut k = 0.0;
        if v >= a {
            k += 0.5;
        }
        if v >= b {
            k += 0.5;
        }
        Some(k)
    }
    fn kernel_v(&self, u: f64, v: f64) -> Option<f64> {
        self.kernel(v, u)
    }
    fn has_sampler(&self) -> bool {
        true
    }
    fn sample_pair(&self, rng: &mut dyn RngCore) -> Option<(f64, f64)> {
        let u: f64 = rng.sample(Open01);
        let (a, b) = diamond_points(u);
        let v = if rng.random::<bool>() { a } else { b };
        Some((u, v))
    }
}

/// Convex combination of copulas.
#[derive(Debug, Clone)]
pub struct Mixture {
    family: Family,
    params: Vec<f64>,
    components: Vec<(f64, CopulaModel)>,
}

impl Mixture {
    /// Weights must be nonnegative and sum to one; zero-weight components are dropped.
    pub fn new(
        family: Family,
        params: Vec<f64>,
        components: Vec<(f64, CopulaModel)>,
    ) -> Result<Self> {
        let total: f64 = components.iter().map(|(w, _)| *w).sum();
        if components.iter().any(|(w, _)| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::ParamOutOfRange(format!(
                "mixture weights must be nonnegative and sum to 1 (sum = {total})"
            )));
        }
        let components = components.into_iter().filter(|(w, _)| *w > 0.0).collect();
        Ok(Mixture {
            family,
            params,
            components,
        })
    }

    pub fn components(&self) -> &[(f64, CopulaModel)] {
        &self.components
    }

    fn weighted(&self, f: impl Fn(&CopulaModel) -> Option<f64>) -> Option<f64> {
        let mut s = 0.0;
        for (w, c) in &self.components {
            s += w * f(c)?;
        }
        Some(s)
    }
}

impl Copula for Mixture {
    fn family(&self) -> Family {
        self.family
    }
    fn params(&self) -> Vec<f64> {
        self.params.clone()
    }
    fn cdf(&self, u: f64, v: f64) -> f64 {
        self.components.iter().map(|(w, c)| w * c.cdf(u, v)).sum()
    }
    fn density(&self, u: f64, v: f64) -> Option<f64> {
        self.weighted(|c| c.density(u, v))
    }
    fn kernel(&self, u: f64, v: f64) -> Option<f64> {
        self.weighted(|c| c.kernel(u, v))
    }
    fn kernel_v(&self, u: f64, v: f64) -> Option<f64> {
        self.weighted(|c| c.kernel_v(u, v))
    }
    fn has_sampler(&self) -> bool {
        self.components.iter().all(|(_, c)| c.can_sample())
    }
    fn sample_pair(&self, rng: &mut dyn RngCore) -> Option<(f64, f64)> {
        let x: f64 = rng.random();
        let mut acc = 0.0;
        for (w, c) in &self.components {
            acc += w;
            if x < acc {
                return c.sample_pair(rng);
            }
        }
        self.components.last()?.1.sample_pair(rng)
    }
    fn accuracy(&self) -> f64 {
        self.components
            .iter()
            .map(|(_, c)| c.accuracy())
            .fold(1e-14, f64::max)
    }
}

/// The independence copula Π.
pub fn independence() -> CopulaModel {
    CopulaModel::new(Independence)
}

/// The upper Fréchet–Hoeffding bound M.
pub fn upper() -> CopulaModel {
    CopulaModel::new(Upper)
}

/// The lower Fréchet–Hoeffding bound W.
pub fn lower() -> CopulaModel {
    CopulaModel::new(Lower)
}

/// `M_Γ = (M + W) / 2`.
pub fn m_gamma() -> CopulaModel {
    let m = Mixture::new(Family::MGamma, vec![], vec![(0.5, upper()), (0.5, lower())])
        .expect("valid weights");
    CopulaModel::new(m)
}

/// The diamond copula V.
pub fn v_copula() -> CopulaModel {
    CopulaModel::new(VCopula)
}

/// `A_α = α M_Γ + (1 - α) Π`.
pub fn invariant_mix(alpha: f64) -> Result<CopulaModel> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::ParamOutOfRange(format!(
            "mixing weight must lie in [0,1], got {alpha}"
        )));
    }
    let m = Mixture::new(
        Family::InvariantMix,
        vec![alpha],
        vec![(alpha, m_gamma()), (1.0 - alpha, independence())],
    )?;
    Ok(CopulaModel::new(m))
}
