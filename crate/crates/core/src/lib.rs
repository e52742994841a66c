//! Copula-based concordance measures and tests for positive and negative
//! measure-inducing dependence.

pub mod concordance;
pub mod copula;
pub mod empirical;
pub mod error;
pub mod families;
pub mod geometry;
pub mod inference;
pub mod pmi;
pub mod quadrature;
pub mod simlab;
pub mod special;

pub use copula::{Copula, CopulaModel, Family, ReflectionTag};
pub use error::{Error, Result};
