//! Heights, local Weil functions, proximity and truncated counting functions.

mod divisor;
mod point;
mod weil;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use thiserror::Error;

pub use divisor::{normalize_form, DivisorSpec, FormValue, P1Entry};
pub use point::{parse_theta_poly, AlgebraicPoint, ProjPoint};
pub use weil::{eval_linear, proximity, proximity_algebraic, weil_hyperplane, weil_point, P1Target, WeilValue};


use crate::exactnum::{FormalLogSum, NumError};
use crate::placeval::PlaceError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FunError {
    #[error("point lies on the divisor")]
    OnDivisor,
    #[error("point equals the proximity target")]
    EqualsPoint,
    #[error("all coordinates are zero")]
    ZeroPoint,
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("integer overflow")]
    Overflow,
    #[error("invalid divisor: {0}")]
    InvalidDivisor(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Place(#[from] PlaceError),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// `h(b/c) = log max(|b|, |c|)` as a single integer term.
pub fn height_rational(x: &BigRational) -> Result<FormalLogSum, FunError> {
    let m = x.numer().abs().max(x.denom().clone());
    Ok(FormalLogSum::log_of(m.to_u128().ok_or(FunError::Overflow)?))
}

/// `log max_j |x_j|`.
pub fn height_projective(x: &ProjPoint) -> FormalLogSum {
    x.height()
}
