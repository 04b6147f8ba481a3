//! Place-wise absolute values on the rationals and on algebraic targets.

mod irreducible;
mod padic;
mod poly;
mod roots;
mod target;

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

pub use irreducible::{is_irreducible, KRONECKER_BUDGET};
pub use padic::{lift_root, val_diff_at, val_diff_root, PadicApprox, MAX_PRECISION, START_PRECISION};
pub use poly::{IntPoly, RatPoly};
pub use roots::{isolate_roots, isolate_roots_refined, log_mahler_measure, RootDisk};
pub use target::{parse_rational, AlgebraicTarget, ArchDist, Embedding, ARCH_REL_TOLERANCE};

use crate::exactnum::is_probable_prime;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlaceError {
    #[error("valuation of zero")]
    ZeroInput,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("minimal polynomial has no simple root at the seed modulo p")]
    NoSimpleRoot,
    #[error("required p-adic precision exceeds the cap")]
    PrecisionOverflow,
    #[error("point equals the target")]
    EqualsTarget,
    #[error("root isolation could not reach the required precision")]
    PrecisionInsufficient,
    #[error("irreducibility could not be decided within the search budget")]
    IrreducibilityUndecided,
    #[error("embedding does not match the requested place")]
    EmbeddingMismatch,
    #[error("invalid target: {0}")]
    InvalidTarget(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// A place of the rationals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Infinity,
    Prime(u64),
}

impl Place {
    pub fn prime(p: u64) -> Result<Place, PlaceError> {
        if is_probable_prime(p as u128) {
            Ok(Place::Prime(p))
        } else {
            Err(PlaceError::NotPrime(p))
        }
    }

    pub fn is_archimedean(&self) -> bool {
        matches!(self, Place::Infinity)
    }

    /// `log p`, or 0 at infinity.
    pub fn log_base(&self) -> f64 {
        match self {
            Place::Infinity => 0.0,
            Place::Prime(p) => (*p as f64).ln(),
        }
    }
}

impl FromStr for Place {
    type Err = PlaceError;

    fn from_str(s: &str) -> Result<Self, PlaceError> {
        match s.trim() {
            "inf" | "infty" | "oo" | "∞" => Ok(Place::Infinity),
            t => Place::prime(t.parse().map_err(|_| PlaceError::Parse(format!("bad place {t:?}")))?),
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinity => write!(f, "inf"),
            Place::Prime(p) => write!(f, "{p}"),
        }
    }
}

/// `v_p(n)` for a nonzero integer.
pub fn vp_int(n: &BigInt, p: u64) -> u32 {
    debug_assert!(!n.is_zero());
    let mut v = 0;
    let mut m = n.clone();
    let pb = BigInt::from(p);
    loop {
        let (q, r) = num_integer::Integer::div_rem(&m, &pb);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

/// `v_p(n)` for a nonzero machine integer.
#[inline]
pub fn vp_i128(mut n: i128, p: u64) -> u32 {
    debug_assert!(n != 0);
    let p = p as i128;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// `v_p(x)` for a nonzero rational.
pub fn vp(x: &BigRational, p: u64) -> Result<i64, PlaceError> {
    if x.is_zero() {
        return Err(PlaceError::ZeroInput);
    }
    Place::prime(p)?;
    Ok(vp_int(x.numer(), p) as i64 - vp_int(x.denom(), p) as i64)
}

/// `log |n|` for a nonzero integer of any size.
pub fn ln_abs_int(n: &BigInt) -> f64 {
    if let Some(f) = n.to_f64().filter(|f| f.is_finite()) {
        return f.abs().ln();
    }
    let bits = n.bits();
    let shift = bits.saturating_sub(64);
    let top = (n.magnitude() >> shift).to_f64().unwrap_or(f64::MAX);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `log |x|` for a nonzero rational of any size.
pub fn ln_abs_rational(x: &BigRational) -> f64 {
    if x.numer().sign() == Sign::NoSign {
        return f64::NEG_INFINITY;
    }
    ln_abs_int(x.numer()) - ln_abs_int(x.denom())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(vp(&q(8, 9), 2).unwrap(), 3);
        assert_eq!(vp(&q(8, 9), 3).unwrap(), -2);
        assert_eq!(vp(&q(1, 1), 5).unwrap(), 0);
        assert_eq!(vp(&q(0, 1), 5), Err(PlaceError::ZeroInput));
        assert_eq!(vp(&q(3, 1), 4), Err(PlaceError::NotPrime(4)));
    }

    #[test]
    fn places_parse() {
        assert_eq!("inf".parse::<Place>().unwrap(), Place::Infinity);
        assert_eq!("7".parse::<Place>().unwrap(), Place::Prime(7));
        assert!("8".parse::<Place>().is_err());
        assert_eq!(Place::Prime(7).to_string(), "7");
    }

    #[test]
    fn big_logs() {
        let n = num_traits::pow(BigInt::from(10), 400);
        assert!((ln_abs_int(&n) - 400.0 * 10f64.ln()).abs() < 1e-9);
        let x = BigRational::new(BigInt::from(1), n);
        assert!((ln_abs_rational(&x) + 400.0 * 10f64.ln()).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn product_formula(n in -1_000_000i64..1_000_000, d in 1i64..1_000_000) {
            prop_assume!(n != 0);
            let x = q(n, d);
            let mut total = ln_abs_rational(&x);
            for m in [x.numer().clone(), x.denom().clone()] {
                let m = m.to_i128().unwrap();
                for p in crate::exactnum::factorize(m).unwrap().primes() {
                    total -= vp(&x, p as u64).unwrap() as f64 * (p as f64).ln();
                }
            }
            prop_assert!(total.abs() < 1e-9);
        }

        #[test]
        fn valuation_is_additive(a in 1i64..100_000, b in 1i64..100_000, c in 1i64..100_000) {
            for p in [2u64, 3, 5, 7] {
                let lhs = vp(&q(a * b, c), p).unwrap();
                prop_assert_eq!(lhs, vp(&q(a, 1), p).unwrap() + vp(&q(b, 1), p).unwrap() - vp(&q(c, 1), p).unwrap());
            }
        }
    }
}
