//! Copula abstraction, the reflection group, and the invariant base copulas.

mod basic;
mod ops;
mod reflect;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Open01;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use basic::{independence, invariant_mix, lower, m_gamma, upper, v_copula, Mixture};
pub use ops::{
    check_axioms, e_map, ec_volume, gamma_average, is_invariant, max_reflection_gap, precede,
    theta_inverse, theta_transform, AxiomReport,
};
pub use reflect::{reflect, ReflectionTag};

/// Family tag carried by every model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Independence,
    Upper,
    Lower,
    MGamma,
    V,
    InvariantMix,
    Gaussian,
    Frank,
    Fgm,
    Frechet,
    MarshallOlkin,
    ExtremeValue,
    Archimedean,
    Reflected,
    GammaAverage,
    Theta,
    ThetaInverse,
    Mixture,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Independence => "independence",
            Family::Upper => "upper",
            Family::Lower => "lower",
            Family::MGamma => "m-gamma",
            Family::V => "v",
            Family::InvariantMix => "invariant-mix",
            Family::Gaussian => "gaussian",
            Family::Frank => "frank",
            Family::Fgm => "fgm",
            Family::Frechet => "frechet",
            Family::MarshallOlkin => "marshall-olkin",
            Family::ExtremeValue => "extreme-value",
            Family::Archimedean => "archimedean",
            Family::Reflected => "reflected",
            Family::GammaAverage => "gamma-average",
            Family::Theta => "theta",
            Family::ThetaInverse => "theta-inverse",
            Family::Mixture => "mixture",
        };
        f.write_str(s)
    }
}

/// Which optional pieces a model provides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capabilities {
    pub density: bool,
    pub kernel: bool,
    pub kernel_v: bool,
    pub sampler: bool,
}

/// A bivariate copula.
///
/// `cdf` is only called on the open square; boundary values are fixed by
/// [`CopulaModel`]. `kernel(u, v)` is the right-continuous conditional
/// distribution function `P(V <= v | U = u)` and `kernel_v(u, v)` is
/// `P(U <= u | V = v)`.
pub trait Copula: Send + Sync + fmt::Debug {
    fn family(&self) -> Family;

    fn params(&self) -> Vec<f64> {
        Vec::new()
    }

    fn cdf(&self, u: f64, v: f64) -> f64;

    fn density(&self, _u: f64, _v: f64) -> Option<f64> {
        None
    }

    fn kernel(&self, _u: f64, _v: f64) -> Option<f64> {
        None
    }

    fn kernel_v(&self, _u: f64, _v: f64) -> Option<f64> {
        None
    }

    fn has_sampler(&self) -> bool {
        false
    }

    fn sample_pair(&self, _rng: &mut dyn RngCore) -> Option<(f64, f64)> {
        None
    }

    /// Absolute accuracy of `cdf`; closed forms are exact up to rounding.
    fn accuracy(&self) -> f64 {
        1e-14
    }

    /// Base model and group element when this copula is a reflection wrapper.
    fn reflection_parts(&self) -> Option<(CopulaModel, ReflectionTag)> {
        None
    }
}

/// Shared, immutable handle to a copula.
#[derive(Clone)]
pub struct CopulaModel(Arc<dyn Copula>);

impl fmt::Debug for CopulaModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

const PROBE: (f64, f64) = (0.3, 0.6);

impl CopulaModel {
    pub fn new<C: Copula + 'static>(c: C) -> Self {
        CopulaModel(Arc::new(c))
    }

    pub fn inner(&self) -> &dyn Copula {
        self.0.as_ref()
    }

    pub fn family(&self) -> Family {
        self.0.family()
    }

    pub fn params(&self) -> Vec<f64> {
        self.0.params()
    }

    pub fn label(&self) -> String {
        let p = self.params();
        if p.is_empty() {
            self.family().to_string()
        } else {
            let ps: Vec<String> = p.iter().map(|x| format!("{x}")).collect();
            format!("{}({})", self.family(), ps.join(","))
        }
    }

    pub fn accuracy(&self) -> f64 {
        self.0.accuracy()
    }

    /// CDF with exact boundary values and Fréchet-bound clamping.
    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return v.min(1.0);
        }
        if v >= 1.0 {
            return u;
        }
        let lo = (u + v - 1.0).max(0.0);
        let hi = u.min(v);
        self.0.cdf(u, v).clamp(lo, hi)
    }

    pub fn density(&self, u: f64, v: f64) -> Option<f64> {
        self.0.density(u, v)
    }

    pub fn kernel(&self, u: f64, v: f64) -> Option<f64> {
        if v <= 0.0 {
            return self.0.kernel(u, 0.5).map(|_| 0.0);
        }
        if v >= 1.0 {
            return self.0.kernel(u, 0.5).map(|_| 1.0);
        }
        self.0.kernel(u, v).map(|k| k.clamp(0.0, 1.0))
    }

    pub fn kernel_v(&self, u: f64, v: f64) -> Option<f64> {
        if u <= 0.0 {
            return self.0.kernel_v(0.5, v).map(|_| 0.0);
        }
        if u >= 1.0 {
            return self.0.kernel_v(0.5, v).map(|_| 1.0);
        }
        self.0.kernel_v(u, v).map(|k| k.clamp(0.0, 1.0))
    }

    pub fn capabilities(&self) -> Capabilities {
        Capabilities {
            density: self.0.density(PROBE.0, PROBE.1).is_some(),
            kernel: self.0.kernel(PROBE.0, PROBE.1).is_some(),
            kernel_v: self.0.kernel_v(PROBE.0, PROBE.1).is_some(),
            sampler: self.0.has_sampler(),
        }
    }

    pub fn has_kernel(&self) -> bool {
        self.0.kernel(PROBE.0, PROBE.1).is_some()
    }

    pub fn has_density(&self) -> bool {
        self.0.density(PROBE.0, PROBE.1).is_some()
    }

    pub fn can_sample(&self) -> bool {
        self.0.has_sampler() || self.has_kernel()
    }

    /// Draws one pair, using the native sampler when available and
    /// conditional inversion of the kernel otherwise.
    pub fn sample_pair(&self, rng: &mut dyn RngCore) -> Option<(f64, f64)> {
        if self.0.has_sampler() {
            return self.0.sample_pair(rng);
        }
        if !self.has_kernel() {
            return None;
        }
        let u: f64 = rng.sample(Open01);
        let w: f64 = rng.sample(Open01);
        Some((u, self.invert_kernel(u, w)))
    }

    /// Smallest `v` with `kernel(u, v) >= w`, by bisection.
    pub fn invert_kernel(&self, u: f64, w: f64) -> f64 {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..200 {
            if hi - lo <= 1e-12 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let k = self.kernel(u, mid).unwrap_or(f64::NAN);
            if k >= w {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// C-volume of `[a,b] × [c,d]`.
    pub fn volume(&self, a: f64, b: f64, c: f64, d: f64) -> f64 {
        self.cdf(b, d) - self.cdf(a, d) - self.cdf(b, c) + self.cdf(a, c)
    }
}

/// Draws `n` i.i.d. pairs from `c` using a stream derived from `seed`.
pub fn sample(c: &CopulaModel, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    if !c.can_sample() {
        return Err(Error::NoSamplingPath);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(c, n, &mut rng)
}

pub fn sample_with(c: &CopulaModel, n: usize, rng: &mut dyn RngCore) -> Result<Vec<(f64, f64)>> {
    (0..n)
        .map(|_| c.sample_pair(rng).ok_or(Error::NoSamplingPath))
        .collect()
}

/// Evenly spaced grid `0, 1/(m-1), ..., 1` scaled to `[lo, hi]`.
pub fn grid(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    assert!(m >= 2);
    (0..m)
        .map(|i| {
            if i == m - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (m - 1) as f64
            }
        })
        .collect()
}

/// Cell midpoints of an `m`-cell partition of `[lo, hi]`.
pub fn midpoints(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / m as f64)
        .collect()
}
