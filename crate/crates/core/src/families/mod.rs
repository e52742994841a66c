//! Parametric copula families.

mod archimedean;
mod elliptical;
mod evc;
mod fgm;
mod frank;
mod marshall_olkin;

pub use archimedean::{archimedean, ArchimedeanGenerator};
pub use elliptical::gaussian;
pub use evc::{evc, PickandsFunction};
pub use fgm::{fgm, fgm_cubic, fgm_generalized, FgmFunction};
pub use frank::frank;
pub use marshall_olkin::marshall_olkin;

pub use crate::copula::{independence, lower, sample, upper};

use crate::copula::{CopulaModel, Family, Mixture};
use crate::error::{Error, Result};

/// `α M + (1 - α - β) Π + β W`.
pub fn frechet(alpha: f64, beta: f64) -> Result<CopulaModel> {
    if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) || alpha + beta > 1.0 + 1e-15
    {
        return Err(Error::ParamOutOfRange(format!(
            "frechet needs alpha, beta in [0,1] with alpha + beta <= 1, got ({alpha}, {beta})"
        )));
    }
    let rest = (1.0 - alpha - beta).max(0.0);
    let m = Mixture::new(
        Family::Frechet,
        vec![alpha, beta],
        vec![(alpha, upper()), (rest, independence()), (beta, lower())],
    )?;
    Ok(CopulaModel::new(m))
}
