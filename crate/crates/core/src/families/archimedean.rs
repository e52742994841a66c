use std::fmt;
use std::sync::Arc;

use crate::copula::{grid, Copula, CopulaModel, Family};
use crate::error::{Error, Result};

type Func = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Generator `φ` of an Archimedean copula together with its pseudo-inverse.
#[derive(Clone)]
pub enum ArchimedeanGenerator {
    /// `-log t`
    Independence,
    /// `(t^{-θ} - 1) / θ`, `θ > 0`
    Clayton(f64),
    /// `(-log t)^θ`, `θ >= 1`
    Gumbel(f64),
    /// `-log((e^{-δt} - 1) / (e^{-δ} - 1))`, `δ != 0`
    Frank(f64),
    /// `log((1 - θ(1-t)) / t)`, `θ ∈ [-1, 1)`
    AliMikhailHaq(f64),
    /// `-log(1 - (1-t)^θ)`, `θ >= 1`
    Joe(f64),
    /// `1 - t`, generating the lower Fréchet bound
    Lower,
    /// User-supplied `φ`, `ψ` and optionally `φ'`.
    Custom {
        phi: Func,
        psi: Func,
        dphi: Option<Func>,
    },
}

impl fmt::Debug for ArchimedeanGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArchimedeanGenerator::Custom { .. } => f.write_str("Custom"),
            other => write!(f, "{}({:?})", other.name(), other.param()),
        }
    }
}

impl ArchimedeanGenerator {
    pub fn custom(
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        psi: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ArchimedeanGenerator::Custom {
            phi: Arc::new(phi),
            psi: Arc::new(psi),
            dphi: None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ArchimedeanGenerator::Independence => "independence",
            ArchimedeanGenerator::Clayton(_) => "clayton",
            ArchimedeanGenerator::Gumbel(_) => "gumbel",
            ArchimedeanGenerator::Frank(_) => "frank",
            ArchimedeanGenerator::AliMikhailHaq(_) => "amh",
            ArchimedeanGenerator::Joe(_) => "joe",
            ArchimedeanGenerator::Lower => "lower",
            ArchimedeanGenerator::Custom { .. } => "custom",
        }
    }

    pub fn param(&self) -> Option<f64> {
        match self {
            ArchimedeanGenerator::Clayton(t)
            | ArchimedeanGenerator::Gumbel(t)
            | ArchimedeanGenerator::Frank(t)
            | ArchimedeanGenerator::AliMikhailHaq(t)
            | ArchimedeanGenerator::Joe(t) => Some(*t),
            _ => None,
        }
    }

    pub fn phi(&self, t: f64) -> f64 {
        use ArchimedeanGenerator::*;
        match self {
            Independence => -t.ln(),
            Clayton(th) => (t.powf(-th) - 1.0) / th,
            Gumbel(th) => (-t.ln()).powf(*th),
            Frank(d) => -((-d * t).exp_m1() / (-d).exp_m1()).ln(),
            AliMikhailHaq(th) => ((1.0 - th * (1.0 - t)) / t).ln(),
            Joe(th) => -(-(1.0 - t).powf(*th)).ln_1p(),
            Lower => 1.0 - t,
            Custom { phi, .. } => phi(t),
        }
    }

    pub fn psi(&self, x: f64) -> f64 {
        use ArchimedeanGenerator::*;
        if x <= 0.0 {
            return 1.0;
        }
        match self {
            Independence => (-x).exp(),
            Clayton(th) => (1.0 + th * x).powf(-1.0 / th),
            Gumbel(th) => (-x.powf(1.0 / th)).exp(),
            Frank(d) => -((-x).exp() * (-d).exp_m1()).ln_1p() / d,
            AliMikhailHaq(th) => (1.0 - th) / (x.exp() - th),
            Joe(th) => 1.0 - (-(-x).exp_m1()).powf(1.0 / th),
            Lower => (1.0 - x).max(0.0),
            Custom { psi, .. } => {
                if x >= self.phi(0.0) {
                    0.0
                } else {
                    psi(x)
                }
            }
        }
    }

    pub fn dphi(&self, t: f64) -> f64 {
        use ArchimedeanGenerator::*;
        match self {
            Independence => -1.0 / t,
            Clayton(th) => -t.powf(-th - 1.0),
            Gumbel(th) => -th * (-t.ln()).powf(th - 1.0) / t,
            Frank(d) => d * (-d * t).exp() / (-d * t).exp_m1(),
            AliMikhailHaq(th) => th / (1.0 - th * (1.0 - t)) - 1.0 / t,
            Joe(th) => -th * (1.0 - t).powf(th - 1.0) / (1.0 - (1.0 - t).powf(*th)),
            Lower => -1.0,
            Custom { dphi: Some(d), .. } => d(t),
            Custom { phi, .. } => {
                let h = 1e-6 * t.max(1e-3);
                let (a, b) = ((t - h).max(0.0), (t + h).min(1.0));
                (phi(b) - phi(a)) / (b - a)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        use ArchimedeanGenerator::*;
        let bad = |msg: String| Err(Error::InvalidGenerator(msg));
        match self {
            Clayton(th) if !(*th > 0.0 && th.is_finite()) => {
                return bad(format!("clayton parameter must be > 0, got {th}"))
            }
            Gumbel(th) | Joe(th) if !(*th >= 1.0 && th.is_finite()) => {
                return bad(format!("{} parameter must be >= 1, got {th}", self.name()))
            }
            Frank(d) if !(d.abs() >= 1e-8 && d.abs() <= 700.0) => {
                return bad(format!("frank parameter must satisfy |delta| >= 1e-8, got {d}"))
            }
            AliMikhailHaq(th) if !(*th >= -1.0 && *th < 1.0) => {
                return bad(format!("amh parameter must lie in [-1,1), got {th}"))
            }
            _ => {}
        }
        if self.phi(1.0).abs() > 1e-12 {
            return bad(format!("phi(1) = {} != 0", self.phi(1.0)));
        }
        let pts = grid(0.005, 1.0, 200);
        let vals: Vec<f64> = pts.iter().map(|&t| self.phi(t)).collect();
        for w in vals.windows(2) {
            if !(w[1] < w[0]) {
                return bad("phi must be strictly decreasing".into());
            }
        }
        for i in 1..vals.len() - 1 {
            // equally spaced grid: second difference
            if vals[i - 1] - 2.0 * vals[i] + vals[i + 1] < -1e-9 * vals[i - 1].abs().max(1.0) {
                return bad(format!("phi is not convex near t = {}", pts[i]));
            }
        }
        for (&t, &p) in pts.iter().zip(&vals) {
            let back = self.psi(p);
            if (back - t).abs() > 1e-9 {
                return bad(format!("psi(phi({t})) = {back}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Archimedean {
    gen: ArchimedeanGenerator,
    phi0: f64,
}

impl Archimedean {
    fn partial(&self, x: f64, y: f64) -> f64 {
        let s = self.gen.phi(x) + self.gen.phi(y);
        if s > self.phi0 {
            return 0.0;
        }
        let c = self.gen.psi(s);
        let r = self.gen.dphi(x) / self.gen.dphi(c);
        if r.is_finite() {
            r
        } else {
            0.0
        }
    }
}

impl Copula for Archimedean {
    fn family(&self) -> Family {
        Family::Archimedean
    }
    fn params(&self) -> Vec<f64> {
        self.gen.param().into_iter().collect()
    }
    fn cdf(&self, u: f64, v: f64) -> f64 {
        self.gen.psi(self.gen.phi(u) + self.gen.phi(v))
    }
    fn kernel(&self, u: f64, v: f64) -> Option<f64> {
        Some(self.partial(u, v))
    }
    fn kernel_v(&self, u: f64, v: f64) -> Option<f64> {
        Some(self.partial(v, u))
    }
}

/// `C(u,v) = ψ(φ(u) + φ(v))`.
pub fn archimedean(gen: ArchimedeanGenerator) -> Result<CopulaModel> {
    gen.validate()?;
    let phi0 = gen.phi(0.0);
    let phi0 = if phi0.is_nan() { f64::INFINITY } else { phi0 };
    Ok(CopulaModel::new(Archimedean { gen, phi0 }))
}
