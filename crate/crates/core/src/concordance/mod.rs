//! Measures of concordance induced by invariant copulas.

mod descriptor;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use descriptor::{
    descriptor_lower, descriptor_mgamma, descriptor_mix, descriptor_pi, descriptor_pi_with_order,
    descriptor_upper, descriptor_v, MeasureComponent, MeasureDescriptor, Node, DEFAULT_ORDER,
};

use crate::copula::{
    e_map, independence, invariant_mix, m_gamma, max_reflection_gap, precede, upper, v_copula,
    CopulaModel,
};
use crate::error::{Error, Result};
use crate::geometry::{
    lower_bound_pieces, product_integral, upper_bound_pieces, v_copula_pieces, PiecewiseLinear,
    Rect,
};

/// The invariant copulas for which measures are provided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "alpha")]
pub enum SpecTag {
    /// Π, giving Spearman's rho.
    Pi,
    /// `(M + W)/2`, giving Gini's gamma.
    MGamma,
    V,
    /// `α M_Γ + (1 - α) Π`.
    Mix(f64),
}

impl fmt::Display for SpecTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecTag::Pi => f.write_str("pi"),
            SpecTag::MGamma => f.write_str("m-gamma"),
            SpecTag::V => f.write_str("v"),
            SpecTag::Mix(a) => write!(f, "mix({a})"),
        }
    }
}

/// An invariant copula `A` with its measure and normalizer `α(A)`.
#[derive(Debug, Clone)]
pub struct ConcordanceSpec {
    pub tag: SpecTag,
    pub copula: CopulaModel,
    pub alpha: f64,
    pub measure: MeasureDescriptor,
}

impl ConcordanceSpec {
    pub fn new(tag: SpecTag) -> Result<Self> {
        let (copula, measure) = match tag {
            SpecTag::Pi => (independence(), descriptor_pi()),
            SpecTag::MGamma => (m_gamma(), descriptor_mgamma()),
            SpecTag::V => (v_copula(), descriptor_v()),
            SpecTag::Mix(a) => (invariant_mix(a)?, descriptor_mix(a)),
        };
        let alpha = normalizer(&measure)?;
        Ok(ConcordanceSpec {
            tag,
            copula,
            alpha,
            measure,
        })
    }

    pub fn pi() -> Self {
        Self::new(SpecTag::Pi).expect("Π spec")
    }

    pub fn m_gamma() -> Self {
        Self::new(SpecTag::MGamma).expect("M_Γ spec")
    }

    pub fn v() -> Self {
        Self::new(SpecTag::V).expect("V spec")
    }

    /// Exact integral of `A` over a rectangle.
    pub fn cell_integral(&self, r: &Rect) -> f64 {
        match self.tag {
            SpecTag::Pi => product_integral(r),
            SpecTag::MGamma => mgamma_integral(r),
            SpecTag::V => v_pieces().integrate_over(r),
            SpecTag::Mix(a) => a * mgamma_integral(r) + (1.0 - a) * product_integral(r),
        }
    }

    /// Mean of `A` over a rectangle.
    pub fn cell_average(&self, r: &Rect) -> f64 {
        self.cell_integral(r) / r.area()
    }

    /// `A(u, v)`.
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        self.copula.cdf(u, v)
    }
}

fn mgamma_integral(r: &Rect) -> f64 {
    use std::sync::OnceLock;
    static PIECES: OnceLock<(PiecewiseLinear, PiecewiseLinear)> = OnceLock::new();
    let (m, w) = PIECES.get_or_init(|| (upper_bound_pieces(), lower_bound_pieces()));
    0.5 * (m.integrate_over(r) + w.integrate_over(r))
}

fn v_pieces() -> &'static PiecewiseLinear {
    use std::sync::OnceLock;
    static PIECES: OnceLock<PiecewiseLinear> = OnceLock::new();
    PIECES.get_or_init(v_copula_pieces)
}

fn normalizer(measure: &MeasureDescriptor) -> Result<f64> {
    let m = biconvex(&upper(), measure)?;
    let a = 1.0 / (m - 0.25);
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::NotInvariant(m));
    }
    Ok(a)
}

/// `[C, D] = ∫ C dμ_D`.
pub fn biconvex(c: &CopulaModel, d: &MeasureDescriptor) -> Result<f64> {
    let value = d.integrate(|u, v| c.cdf(u, v));
    if !value.is_finite() {
        return Err(Error::QuadratureFailure {
            tol: 0.0,
            err: f64::INFINITY,
        });
    }
    Ok(value)
}

/// [`biconvex`] with an error estimate from a coarser rule on the same
/// components; fails if the two disagree by more than `tol`.
pub fn biconvex_checked(c: &CopulaModel, d: &MeasureDescriptor, tol: f64) -> Result<f64> {
    let fine = biconvex(c, d)?;
    let coarse_order = (d.order * 3 / 4).max(2);
    let coarse = MeasureDescriptor::new(d.components.clone(), coarse_order);
    let err = (fine - biconvex(c, &coarse)?).abs();
    if err > tol {
        return Err(Error::QuadratureFailure { tol, err });
    }
    Ok(fine)
}

/// `α(A) = ([M, A] - 1/4)⁻¹` for an invariant copula `A` with measure `d`.
pub fn alpha(a: &CopulaModel, d: &MeasureDescriptor) -> Result<f64> {
    let gap = max_reflection_gap(a, 33);
    if gap > (10.0 * a.accuracy()).max(1e-12) {
        return Err(Error::NotInvariant(gap));
    }
    normalizer(d)
}

/// `κ_A(C) = α(A) ([C, A] - 1/4)`.
pub fn kappa(c: &CopulaModel, spec: &ConcordanceSpec) -> Result<f64> {
    Ok(spec.alpha * (biconvex(c, &spec.measure)? - 0.25))
}

/// `κ_A(C) = α(A) ∫_{(0,1/2)²} E_C dμ_A`, an integration path independent of [`kappa`].
pub fn kappa_via_e_map(c: &CopulaModel, spec: &ConcordanceSpec) -> f64 {
    spec.alpha * spec.measure.integrate_lower_left(|u, v| e_map(c, u, v))
}

/// Mixture weights `(w_Π, w_{M_Γ})` with `κ_{A_α} = w_Π κ_Π + w_{M_Γ} κ_{M_Γ}`.
pub fn interpolation_weights(alpha_mix: f64) -> (f64, f64) {
    let d = 2.0 + alpha_mix;
    (2.0 * (1.0 - alpha_mix) / d, 3.0 * alpha_mix / d)
}

/// `κ_{A_α}(C)` evaluated both directly and as the weighted mean of
/// Spearman's rho and Gini's gamma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterpolatedKappa {
    pub direct: f64,
    pub weighted: f64,
}

pub fn kappa_interpolated(c: &CopulaModel, alpha_mix: f64) -> Result<InterpolatedKappa> {
    if !(0.0..=1.0).contains(&alpha_mix) {
        return Err(Error::ParamOutOfRange(format!(
            "mixing weight must lie in [0,1], got {alpha_mix}"
        )));
    }
    let direct = kappa(c, &ConcordanceSpec::new(SpecTag::Mix(alpha_mix))?)?;
    let (wp, wg) = interpolation_weights(alpha_mix);
    let weighted =
        wp * kappa(c, &ConcordanceSpec::pi())? + wg * kappa(c, &ConcordanceSpec::m_gamma())?;
    Ok(InterpolatedKappa { direct, weighted })
}

/// `α(A) κ_B(C) - α(B) κ_A(C)`; nonnegative for PMI copulas when `A ⪯ B`.
pub fn comparison_slack(
    c: &CopulaModel,
    a: &ConcordanceSpec,
    b: &ConcordanceSpec,
) -> Result<f64> {
    if !precede(&a.copula, &b.copula, 200, 1e-12)? {
        return Err(Error::OrderViolated);
    }
    Ok(a.alpha * kappa(c, b)? - b.alpha * kappa(c, a)?)
}
