use crate::copula::{Copula, CopulaModel, Family};
use crate::error::{Error, Result};

/// Pickands dependence function `A : [0,1] → [1/2, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum PickandsFunction {
    /// Piecewise linear through the given `(t, A(t))` knots.
    Knots(Vec<(f64, f64)>),
    /// `(t^θ + (1-t)^θ)^{1/θ}`, `θ >= 1`.
    Gumbel(f64),
}

impl PickandsFunction {
    /// `A ≡ 1`.
    pub fn independence() -> Self {
        PickandsFunction::Knots(vec![(0.0, 1.0), (1.0, 1.0)])
    }

    /// `A(t) = max(1-t, t)`.
    pub fn comonotone() -> Self {
        PickandsFunction::Knots(vec![(0.0, 1.0), (0.5, 0.5), (1.0, 1.0)])
    }

    /// Piecewise-linear function with kinks at 0.2, 0.5 and 0.8 that yields
    /// an extreme-value copula failing the kernel criterion.
    pub fn counterexample() -> Self {
        PickandsFunction::Knots(vec![
            (0.0, 1.0),
            (0.2, 0.8),
            (0.5, 0.65),
            (0.8, 0.8),
            (1.0, 1.0),
        ])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PickandsFunction::Gumbel(theta) => {
                if !(*theta >= 1.0) || !theta.is_finite() {
                    return Err(Error::InvalidPickands(format!(
                        "gumbel parameter must be >= 1, got {theta}"
                    )));
                }
            }
            PickandsFunction::Knots(k) => {
                if k.len() < 2 || k[0].0 != 0.0 || k[k.len() - 1].0 != 1.0 {
                    return Err(Error::InvalidPickands(
                        "knots must start at t = 0 and end at t = 1".into(),
                    ));
                }
                if k.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::InvalidPickands(
                        "knot abscissae must be strictly increasing".into(),
                    ));
                }
                for &(t, a) in k {
                    if a > 1.0 + 1e-12 || a < t.max(1.0 - t) - 1e-12 {
                        return Err(Error::InvalidPickands(format!(
                            "A({t}) = {a} violates max(1-t, t) <= A(t) <= 1"
                        )));
                    }
                }
                if (k[0].1 - 1.0).abs() > 1e-12 || (k[k.len() - 1].1 - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidPickands("A(0) = A(1) = 1 is required".into()));
                }
                let slopes: Vec<f64> = k
                    .windows(2)
                    .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
                    .collect();
                if slopes.windows(2).any(|s| s[1] < s[0] - 1e-12) {
                    return Err(Error::InvalidPickands("A must be convex".into()));
                }
            }
        }
        Ok(())
    }

    fn segment(k: &[(f64, f64)], t: f64) -> usize {
        // index i with k[i].0 <= t < k[i+1].0, last segment closed
        let i = k.partition_point(|p| p.0 <= t);
        i.saturating_sub(1).min(k.len() - 2)
    }

    fn slope(k: &[(f64, f64)], i: usize) -> f64 {
        (k[i + 1].1 - k[i].1) / (k[i + 1].0 - k[i].0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            PickandsFunction::Gumbel(th) => (t.powf(*th) + (1.0 - t).powf(*th)).powf(1.0 / th),
            PickandsFunction::Knots(k) => {
                let i = Self::segment(k, t);
                k[i].1 + Self::slope(k, i) * (t - k[i].0)
            }
        }
    }

    /// Right derivative; the left derivative at `t = 1`.
    pub fn right_derivative(&self, t: f64) -> f64 {
        match self {
            PickandsFunction::Gumbel(_) => self.smooth_derivative(t),
            PickandsFunction::Knots(k) => Self::slope(k, Self::segment(k, t)),
        }
    }

    /// Left derivative; the right derivative at `t = 0`.
    pub fn left_derivative(&self, t: f64) -> f64 {
        match self {
            PickandsFunction::Gumbel(_) => self.smooth_derivative(t),
            PickandsFunction::Knots(k) => {
                let i = k.partition_point(|p| p.0 < t);
                Self::slope(k, i.saturating_sub(1).min(k.len() - 2))
            }
        }
    }

    fn smooth_derivative(&self, t: f64) -> f64 {
        match self {
            PickandsFunction::Gumbel(th) => {
                let s = t.powf(*th) + (1.0 - t).powf(*th);
                s.powf(1.0 / th - 1.0) * (t.powf(th - 1.0) - (1.0 - t).powf(th - 1.0))
            }
            PickandsFunction::Knots(_) => unreachable!(),
        }
    }
}

#[derive(Debug, Clone)]
struct ExtremeValue {
    a: PickandsFunction,
}

impl ExtremeValue {
    // (C, h) with h = log u / log(uv)
    fn parts(&self, u: f64, v: f64) -> (f64, f64) {
        let lu = u.ln();
        let l = lu + v.ln();
        let h = lu / l;
        ((self.a.eval(h) * l).exp(), h)
    }
}

impl Copula for ExtremeValue {
    fn family(&self) -> Family {
        Family::ExtremeValue
    }
    fn params(&self) -> Vec<f64> {
        match &self.a {
            PickandsFunction::Gumbel(th) => vec![*th],
            PickandsFunction::Knots(k) => k.iter().flat_map(|&(t, a)| [t, a]).collect(),
        }
    }
    fn cdf(&self, u: f64, v: f64) -> f64 {
        self.parts(u, v).0
    }
    fn kernel(&self, u: f64, v: f64) -> Option<f64> {
        let (c, h) = self.parts(u, v);
        Some(c / u * (self.a.eval(h) + (1.0 - h) * self.a.right_derivative(h)))
    }
    fn kernel_v(&self, u: f64, v: f64) -> Option<f64> {
        let (c, h) = self.parts(u, v);
        Some(c / v * (self.a.eval(h) - h * self.a.left_derivative(h)))
    }
}

/// Extreme-value copula `(uv)^{A(log u / log(uv))}`.
pub fn evc(a: PickandsFunction) -> Result<CopulaModel> {
    a.validate()?;
    Ok(CopulaModel::new(ExtremeValue { a }))
}
