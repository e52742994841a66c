use rand::{Rng, RngCore};
use rand_distr::Open01;

use crate::copula::{Copula, CopulaModel, Family};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Frank {
    delta: f64,
    // e^{-δ} - 1
    d: f64,
}

impl Frank {
    fn em(&self, t: f64) -> f64 {
        (-self.delta * t).exp_m1()
    }

    fn partial(&self, x: f64, y: f64) -> f64 {
        let a = self.em(x);
        let b = self.em(y);
        (-self.delta * x).exp() * b / (self.d + a * b)
    }
}

impl Copula for Frank {
    fn family(&self) -> Family {
        Family::Frank
    }
    fn params(&self) -> Vec<f64> {
        vec![self.delta]
    }
    fn cdf(&self, u: f64, v: f64) -> f64 {
        -(self.em(u) * self.em(v) / self.d).ln_1p() / self.delta
    }
    fn density(&self, u: f64, v: f64) -> Option<f64> {
        let a = self.em(u);
        let b = self.em(v);
        let den = self.d + a * b;
        Some(-self.delta * self.d * (-self.delta * (u + v)).exp() / (den * den))
    }
    fn kernel(&self, u: f64, v: f64) -> Option<f64> {
        Some(self.partial(u, v))
    }
    fn kernel_v(&self, u: f64, v: f64) -> Option<f64> {
        Some(self.partial(v, u))
    }
    fn has_sampler(&self) -> bool {
        true
    }
    fn sample_pair(&self, rng: &mut dyn RngCore) -> Option<(f64, f64)> {
        let u: f64 = rng.sample(Open01);
        let w: f64 = rng.sample(Open01);
        let e = (-self.delta * u).exp();
        let b = w * self.d / (e * (1.0 - w) + w);
        let v = -b.ln_1p() / self.delta;
        Some((u, v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)))
    }
}

/// Frank copula; `|delta| < 1e-8` is rejected rather than mapped to Π.
pub fn frank(delta: f64) -> Result<CopulaModel> {
    if !delta.is_finite() || delta.abs() < 1e-8 || delta.abs() > 700.0 {
        return Err(Error::ParamOutOfRange(format!(
            "frank parameter must satisfy 1e-8 <= |delta| <= 700, got {delta}"
        )));
    }
    Ok(CopulaModel::new(Frank {
        delta,
        d: (-delta).exp_m1(),
    }))
}
