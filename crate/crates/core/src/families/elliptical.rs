use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::copula::{Copula, CopulaModel, Family};
use crate::error::{Error, Result};
use crate::special::{bivariate_normal_cdf, normal_cdf, normal_quantile};

#[derive(Debug, Clone, Copy)]
struct Gaussian {
    rho: f64,
    s: f64,
}

fn open_unit(p: f64) -> f64 {
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

impl Copula for Gaussian {
    fn family(&self) -> Family {
        Family::Gaussian
    }
    fn params(&self) -> Vec<f64> {
        vec![self.rho]
    }
    fn cdf(&self, u: f64, v: f64) -> f64 {
        bivariate_normal_cdf(normal_quantile(u), normal_quantile(v), self.rho)
    }
    fn density(&self, u: f64, v: f64) -> Option<f64> {
        let x = normal_quantile(u);
        let y = normal_quantile(v);
        let r = self.rho;
        let q = (r * r * (x * x + y * y) - 2.0 * r * x * y) / (2.0 * self.s * self.s);
        Some((-q).exp() / self.s)
    }
    fn kernel(&self, u: f64, v: f64) -> Option<f64> {
        let x = normal_quantile(u);
        let y = normal_quantile(v);
        Some(normal_cdf((y - self.rho * x) / self.s))
    }
    fn kernel_v(&self, u: f64, v: f64) -> Option<f64> {
        self.kernel(v, u)
    }
    fn has_sampler(&self) -> bool {
        true
    }
    fn sample_pair(&self, rng: &mut dyn RngCore) -> Option<(f64, f64)> {
        let z1: f64 = StandardNormal.sample(rng);
        let z2: f64 = StandardNormal.sample(rng);
        let y = self.rho * z1 + self.s * z2;
        Some((open_unit(normal_cdf(z1)), open_unit(normal_cdf(y))))
    }
    fn accuracy(&self) -> f64 {
        1e-11
    }
}

/// Gaussian copula with correlation `rho`.
pub fn gaussian(rho: f64) -> Result<CopulaModel> {
    if !(rho > -1.0 && rho < 1.0) {
        return Err(Error::ParamOutOfRange(format!(
            "gaussian correlation must lie in (-1,1), got {rho}"
        )));
    }
    Ok(CopulaModel::new(Gaussian {
        rho,
        s: (1.0 - rho * rho).sqrt(),
    }))
}
