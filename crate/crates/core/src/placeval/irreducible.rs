//! Irreducibility over the rationals for small-degree integer polynomials.
//!
//! Rational roots are found with the rational root theorem. Degrees 2 and 3
//! are decided by that alone; higher degrees fall back to Kronecker's method,
//! which interpolates candidate factors through divisors of sampled values.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::{IntPoly, RatPoly};
use super::PlaceError;
use crate::exactnum::factorize_u128;

/// Upper limit on candidate interpolations tried by Kronecker's method.
pub const KRONECKER_BUDGET: u64 = 2_000_000;

pub fn is_irreducible(f: &IntPoly) -> Result<bool, PlaceError> {
    let d = f.degree();
    if f.is_zero() || d == 0 {
        return Ok(false);
    }
    if !f.content().is_one() {
        return Ok(false);
    }
    if d == 1 {
        return Ok(true);
    }
    if has_rational_root(f)? {
        return Ok(false);
    }
    if d <= 3 {
        return Ok(true);
    }
    for k in 2..=d / 2 {
        if has_factor_of_degree(f, k)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn divisors(n: &BigInt) -> Result<Vec<BigInt>, PlaceError> {
    let m = n.abs().to_u128().ok_or(PlaceError::IrreducibilityUndecided)?;
    let fac = factorize_u128(m).map_err(|_| PlaceError::IrreducibilityUndecided)?;
    let mut out = vec![BigInt::one()];
    for &(p, e) in fac.entries() {
        let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
        for d in &out {
            let mut pk = BigInt::one();
            for _ in 0..=e {
                next.push(d * &pk);
                pk *= BigInt::from(p);
            }
        }
        out = next;
    }
    out.sort();
    Ok(out)
}

fn has_rational_root(f: &IntPoly) -> Result<bool, PlaceError> {
    let c0 = f.constant();
    if c0.is_zero() {
        return Ok(true);
    }
    let nums = divisors(&c0)?;
    let dens = divisors(&f.leading())?;
    for u in &nums {
        for w in &dens {
            for s in [u.clone(), -u.clone()] {
                if f.eval_homog(&s, w).is_zero() {
                    return Ok(true);
                }
            }
        }
    }
    Ok(false)
}

/// Integer sample points with small nonzero values, used for interpolation.
fn sample_points(f: &IntPoly, count: usize) -> Vec<(BigInt, BigInt)> {
    let mut pts: Vec<(BigInt, BigInt)> = (-30i64..=30)
        .map(BigInt::from)
        .map(|x| {
            let v = f.eval_int(&x);
            (x, v)
        })
        .filter(|(_, v)| !v.is_zero())
        .collect();
    pts.sort_by(|a, b| a.1.abs().cmp(&b.1.abs()).then_with(|| a.0.abs().cmp(&b.0.abs())).then(a.0.cmp(&b.0)));
    pts.truncate(count);
    pts
}

fn has_factor_of_degree(f: &IntPoly, k: usize) -> Result<bool, PlaceError> {
    let pts = sample_points(f, k + 1);
    if pts.len() < k + 1 {
        return Err(PlaceError::IrreducibilityUndecided);
    }
    let choices: Vec<Vec<BigInt>> = pts
        .iter()
        .enumerate()
        .map(|(i, (_, v))| {
            let ds = divisors(v)?;
            // the first value fixes the overall sign of the candidate factor
            Ok(if i == 0 { ds } else { ds.iter().flat_map(|d| [d.clone(), -d.clone()]).collect() })
        })
        .collect::<Result<_, PlaceError>>()?;
    let total = choices.iter().try_fold(1u64, |acc, c| acc.checked_mul(c.len() as u64));
    if total.is_none_or(|t| t > KRONECKER_BUDGET) {
        return Err(PlaceError::IrreducibilityUndecided);
    }
    let xs: Vec<BigRational> = pts.iter().map(|(x, _)| BigRational::from_integer(x.clone())).collect();
    let basis = lagrange_basis(&xs);
    let target = f.to_rat();
    let mut idx = vec![0usize; choices.len()];
    loop {
        let mut g = RatPoly::zero();
        for (i, b) in basis.iter().enumerate() {
            g = g.add(&b.scale(&BigRational::from_integer(choices[i][idx[i]].clone())));
        }
        if g.degree() == k && g.coeffs().iter().all(|c| c.is_integer()) && target.rem(&g).is_zero() {
            return Ok(true);
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Ok(false);
            }
            idx[pos] += 1;
            if idx[pos] < choices[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

fn lagrange_basis(xs: &[BigRational]) -> Vec<RatPoly> {
    (0..xs.len())
        .map(|i| {
            let mut num = RatPoly::constant(BigRational::one());
            let mut den = BigRational::one();
            for (j, xj) in xs.iter().enumerate() {
                if i != j {
                    num = num.mul(&RatPoly::new(vec![-xj.clone(), BigRational::one()]));
                    den *= &xs[i] - xj;
                }
            }
            num.scale(&(BigRational::one() / den))
        })
        .collect()
}
