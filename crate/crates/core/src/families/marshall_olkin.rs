use crate::copula::{independence, Copula, CopulaModel, Family};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct MarshallOlkin {
    alpha: f64,
    beta: f64,
}

impl Copula for MarshallOlkin {
    fn family(&self) -> Family {
        Family::MarshallOlkin
    }
    fn params(&self) -> Vec<f64> {
        vec![self.alpha, self.beta]
    }
    fn cdf(&self, u: f64, v: f64) -> f64 {
        if u.powf(self.alpha) >= v.powf(self.beta) {
            u.powf(1.0 - self.alpha) * v
        } else {
            u * v.powf(1.0 - self.beta)
        }
    }
    // the conditional law of V given U = u has an atom at u^{α/β}
    fn kernel(&self, u: f64, v: f64) -> Option<f64> {
        let (a, b) = (self.alpha, self.beta);
        if v < u.powf(a / b) {
            Some((1.0 - a) * u.powf(-a) * v)
        } else {
            Some(v.powf(1.0 - b))
        }
    }
    fn kernel_v(&self, u: f64, v: f64) -> Option<f64> {
        let (a, b) = (self.alpha, self.beta);
        if u >= v.powf(b / a) {
            Some(u.powf(1.0 - a))
        } else {
            Some((1.0 - b) * u * v.powf(-b))
        }
    }
}

/// Marshall–Olkin copula; either parameter zero gives Π.
pub fn marshall_olkin(alpha: f64, beta: f64) -> Result<CopulaModel> {
    if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
        return Err(Error::ParamOutOfRange(format!(
            "marshall-olkin parameters must lie in [0,1], got ({alpha}, {beta})"
        )));
    }
    if alpha == 0.0 || beta == 0.0 {
        return Ok(independence());
    }
    Ok(CopulaModel::new(MarshallOlkin { alpha, beta }))
}
