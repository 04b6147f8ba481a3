//! Hensel lifting of simple roots and valuations of `alpha - x` at a prime.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::IntPoly;
use super::{vp_int, PlaceError};

/// Starting precision for valuation queries.
pub const START_PRECISION: u32 = 8;
/// Largest precision the lifting will reach.
pub const MAX_PRECISION: u32 = 4096;

/// A root of the minimal polynomial modulo `p^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicApprox {
    pub residue: BigInt,
    pub modulus: BigInt,
    pub precision: u32,
}

pub(crate) fn check_simple_root(f: &IntPoly, p: u64, seed: &BigInt) -> Result<(), PlaceError> {
    let pb = BigInt::from(p);
    if !f.eval_mod(seed, &pb).is_zero() || f.derivative().eval_mod(seed, &pb).is_zero() {
        return Err(PlaceError::NoSimpleRoot);
    }
    Ok(())
}

fn inverse_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

/// Lifts `seed` to the unique root of `f` modulo `p^k` congruent to it.
pub fn lift_root(f: &IntPoly, p: u64, seed: &BigInt, k: u32) -> Result<PadicApprox, PlaceError> {
    if k == 0 || k > MAX_PRECISION {
        return Err(PlaceError::PrecisionOverflow);
    }
    check_simple_root(f, p, seed)?;
    let pb = BigInt::from(p);
    let df = f.derivative();
    let mut r = seed.mod_floor(&pb);
    let mut prec = 1u32;
    while prec < k {
        prec = (2 * prec).min(k);
        let m = num_traits::pow(pb.clone(), prec as usize);
        let inv = inverse_mod(&df.eval_mod(&r, &m), &m).ok_or(PlaceError::NoSimpleRoot)?;
        r = (&r - f.eval_mod(&r, &m) * inv).mod_floor(&m);
    }
    let modulus = num_traits::pow(pb, k as usize);
    debug_assert!(f.eval_mod(&r, &modulus).is_zero());
    Ok(PadicApprox { residue: r, modulus, precision: k })
}

/// `v_p(alpha - x)` for the p-adic root of `f` selected by `seed`, computed at
/// precision `k` only. `None` when the valuation is at least `k`.
pub fn val_diff_at(f: &IntPoly, p: u64, seed: &BigInt, x: &BigRational, k: u32) -> Result<Option<i64>, PlaceError> {
    // The root is a p-adic integer, so a non-integral x dominates the difference.
    let vden = vp_int(x.denom(), p) as i64;
    if vden > 0 {
        return Ok(Some(-vden));
    }
    let approx = lift_root(f, p, seed, k)?;
    let m = &approx.modulus;
    let inv = inverse_mod(x.denom(), m).expect("denominator is a unit");
    let xm = (x.numer() * inv).mod_floor(m);
    let diff = (&approx.residue - xm).mod_floor(m);
    if diff.is_zero() {
        return Ok(None);
    }
    Ok(Some(vp_int(&diff, p) as i64))
}

/// `v_p(alpha - x)`, doubling the precision from [`START_PRECISION`] until the
/// valuation is strictly below it.
pub fn val_diff_root(f: &IntPoly, p: u64, seed: &BigInt, x: &BigRational) -> Result<i64, PlaceError> {
    if f.eval_rational(x).is_zero() {
        return Err(PlaceError::EqualsTarget);
    }
    let mut k = START_PRECISION;
    loop {
        if let Some(v) = val_diff_at(f, p, seed, x, k)? {
            return Ok(v);
        }
        if k >= MAX_PRECISION {
            return Err(PlaceError::PrecisionOverflow);
        }
        k = (2 * k).min(MAX_PRECISION);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqrt2() -> IntPoly {
        IntPoly::from_i64s(&[-2, 0, 1])
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn worked_lifts() {
        let f = sqrt2();
        let a = lift_root(&f, 7, &3.into(), 2).unwrap();
        assert_eq!((a.residue, a.modulus), (BigInt::from(10), BigInt::from(49)));
        let a = lift_root(&f, 7, &3.into(), 1).unwrap();
        assert_eq!(a.residue, BigInt::from(3));
        let a = lift_root(&f, 7, &3.into(), 3).unwrap();
        assert_eq!(a.residue, BigInt::from(108));
        assert_eq!(lift_root(&f, 2, &0.into(), 4), Err(PlaceError::NoSimpleRoot));
        assert_eq!(lift_root(&f, 2, &1.into(), 4), Err(PlaceError::NoSimpleRoot));
        assert_eq!(lift_root(&f, 7, &3.into(), MAX_PRECISION + 1), Err(PlaceError::PrecisionOverflow));
    }

    #[test]
    fn higher_precision_refines_lower_digits() {
        let f = sqrt2();
        let hi = lift_root(&f, 7, &4.into(), 64).unwrap();
        for k in 1..64 {
            let lo = lift_root(&f, 7, &4.into(), k).unwrap();
            assert_eq!(hi.residue.mod_floor(&lo.modulus), lo.residue);
        }
    }

    #[test]
    fn worked_valuations() {
        let f = sqrt2();
        let s = BigInt::from(3);
        assert_eq!(val_diff_root(&f, 7, &s, &q(3, 1)).unwrap(), 1);
        assert_eq!(val_diff_root(&f, 7, &s, &q(1, 1)).unwrap(), 0);
        assert_eq!(val_diff_root(&f, 7, &s, &q(10, 1)).unwrap(), 2);
        assert_eq!(val_diff_root(&f, 7, &s, &q(108, 1)).unwrap(), 3);
        assert_eq!(val_diff_root(&f, 7, &s, &q(1, 49)).unwrap(), -2);
        // x = 108 + 7^9 * 5 agrees with the root to high order only if the lift does
        let deep = lift_root(&f, 7, &s, 20).unwrap().residue;
        let v = val_diff_root(&f, 7, &s, &BigRational::from_integer(deep)).unwrap();
        assert!(v >= 20);
    }

    #[test]
    fn rational_root_target() {
        // 2t - 1, root 1/2, seed 4 mod 7
        let f = IntPoly::from_i64s(&[-1, 2]);
        assert_eq!(val_diff_root(&f, 7, &4.into(), &q(1, 2)), Err(PlaceError::EqualsTarget));
        assert_eq!(val_diff_root(&f, 7, &4.into(), &q(4, 1)).unwrap(), 1);
    }
}
