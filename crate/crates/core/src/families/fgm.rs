use std::fmt;
use std::sync::Arc;

use crate::copula::{grid, Copula, CopulaModel, Family};
use crate::error::{Error, Result};

type Func = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A perturbation function with boundary zeros and its derivative.
#[derive(Clone)]
pub struct FgmFunction {
    f: Func,
    df: Func,
}

impl fmt::Debug for FgmFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FgmFunction")
    }
}

impl FgmFunction {
    /// Derivative by central differences.
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let f: Func = Arc::new(f);
        let g = f.clone();
        let df: Func = Arc::new(move |t: f64| {
            let h = 1e-6;
            let (a, b) = ((t - h).max(0.0), (t + h).min(1.0));
            (g(b) - g(a)) / (b - a)
        });
        FgmFunction { f, df }
    }

    pub fn with_derivative(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        FgmFunction {
            f: Arc::new(f),
            df: Arc::new(df),
        }
    }

    /// `scale · t(1 - t)`.
    pub fn quadratic(scale: f64) -> Self {
        Self::with_derivative(
            move |t| scale * t * (1.0 - t),
            move |t| scale * (1.0 - 2.0 * t),
        )
    }

    /// `t(1 - t)(1 - 2t)`.
    pub fn cubic() -> Self {
        Self::with_derivative(
            |t| t * (1.0 - t) * (1.0 - 2.0 * t),
            |t| 1.0 - 6.0 * t + 6.0 * t * t,
        )
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn deriv(&self, t: f64) -> f64 {
        (self.df)(t)
    }
}

#[derive(Debug, Clone)]
struct Fgm {
    f: FgmFunction,
    g: FgmFunction,
    params: Vec<f64>,
}

impl Copula for Fgm {
    fn family(&self) -> Family {
        Family::Fgm
    }
    fn params(&self) -> Vec<f64> {
        self.params.clone()
    }
    fn cdf(&self, u: f64, v: f64) -> f64 {
        u * v + self.f.eval(u) * self.g.eval(v)
    }
    fn density(&self, u: f64, v: f64) -> Option<f64> {
        Some(1.0 + self.f.deriv(u) * self.g.deriv(v))
    }
    fn kernel(&self, u: f64, v: f64) -> Option<f64> {
        Some(v + self.f.deriv(u) * self.g.eval(v))
    }
    fn kernel_v(&self, u: f64, v: f64) -> Option<f64> {
        Some(u + self.f.eval(u) * self.g.deriv(v))
    }
}

/// `C(u,v) = uv + f(u) g(v)`.
pub fn fgm_generalized(f: FgmFunction, g: FgmFunction) -> Result<CopulaModel> {
    build(f, g, Vec::new())
}

fn build(f: FgmFunction, g: FgmFunction, params: Vec<f64>) -> Result<CopulaModel> {
    for (name, h) in [("f", &f), ("g", &g)] {
        let (a, b) = (h.eval(0.0), h.eval(1.0));
        if a.abs() > 1e-12 || b.abs() > 1e-12 {
            return Err(Error::InvalidGenerators(format!(
                "{name} must vanish at 0 and 1, got {name}(0) = {a}, {name}(1) = {b}"
            )));
        }
    }
    let pts = grid(0.0, 1.0, 200);
    let dg: Vec<f64> = pts.iter().map(|&v| g.deriv(v)).collect();
    for &u in &pts {
        let du = f.deriv(u);
        for (&v, &d) in pts.iter().zip(&dg) {
            if du * d < -1.0 - 1e-12 {
                return Err(Error::InvalidGenerators(format!(
                    "f'(u) g'(v) = {} < -1 at ({u}, {v})",
                    du * d
                )));
            }
        }
    }
    Ok(CopulaModel::new(Fgm { f, g, params }))
}

/// Classical FGM copula `uv (1 + α (1-u)(1-v))`, `α ∈ [-1,1]`.
pub fn fgm(alpha: f64) -> Result<CopulaModel> {
    if !(-1.0..=1.0).contains(&alpha) {
        return Err(Error::ParamOutOfRange(format!(
            "fgm parameter must lie in [-1,1], got {alpha}"
        )));
    }
    build(
        FgmFunction::quadratic(alpha),
        FgmFunction::quadratic(1.0),
        vec![alpha],
    )
}

/// `f(u) = u(1-u)(1-2u)`, `g(v) = v(1-v)`.
pub fn fgm_cubic() -> CopulaModel {
    fgm_generalized(FgmFunction::cubic(), FgmFunction::quadratic(1.0)).expect("valid generators")
}
