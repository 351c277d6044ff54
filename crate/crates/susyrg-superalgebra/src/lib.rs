//! Exact super-calculus on a handful of lattice sites.
//!
//! Elements of the Grassmann algebra generated by ψ, ψ̄ with polynomial
//! coefficients in φ, φ̄ are stored term by term with fermions in a fixed
//! generator order. Coefficients are either exact rationals or floats.
//!
//! Sign convention: E(ψ̄(x)ψ(y)) = +C(x − y), so that E(ψ(x)ψ̄(y)) = −C(x − y)
//! and E(Φ(x)Φ̄(y)) = 0.

mod element;
mod functional;
mod gaussian;
mod normalization;
mod ops;
mod scalar;

pub use element::{phi_phibar, super_pair, Element, Kind, Monomial, Var, MAX_SITES, SPECIES};
pub use functional::fermionic_derivative_functional;
pub use gaussian::{susy_integral_check, SiteSet, SusyCheck};
pub use normalization::{Condition, Patch, RelevantCoefficients};
pub use scalar::{determinant, permanent, ratio, Rational, Scalar};

use susyrg_core::Site;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AlgebraError {
    #[error("site sets hold at most {} points, got {0}", MAX_SITES)]
    TooManySites(usize),
    #[error("generator at site {site} outside a set of {len} sites")]
    SiteOutOfRange { site: usize, len: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("covariance is not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("covariance is not positive definite: leading minor of order {order} is {minor:e}")]
    NotPositiveDefinite { order: usize, minor: f64 },
    #[error("covariance table does not reach displacement {0:?}")]
    OutsideTable(Site),
    #[error("element is not supersymmetric")]
    NotSupersymmetric,
    #[error("exponent has a constant term")]
    ConstantInExponent,
    #[error("lattice derivative at site {site} needs its neighbor in direction {direction}")]
    MissingNeighbor { site: usize, direction: usize },
    #[error("expectation leaves fields of another species")]
    SpeciesRemain,
}

/// (D e, ½(QL + LQ) e).
pub fn operator_identity_d<C: Scalar>(e: &Element<C>) -> (Element<C>, Element<C>) {
    (e.dilation(), e.dilation_from_q())
}
