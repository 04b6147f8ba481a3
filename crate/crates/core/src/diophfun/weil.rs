use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::point::{big_ln, AlgebraicPoint, ProjPoint};
use super::FunError;
use crate::exactnum::logplus;
use crate::placeval::{ln_abs_rational, vp, vp_i128, AlgebraicTarget, Place, RatPoly};

/// A local Weil function value. At a prime the value is `coeff * log p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeilValue {
    pub place: Place,
    pub value: f64,
    pub coeff: Option<u64>,
}

impl WeilValue {
    pub fn at_prime(p: u64, coeff: u64) -> Self {
        WeilValue { place: Place::Prime(p), value: coeff as f64 * (p as f64).ln(), coeff: Some(coeff) }
    }

    /// An archimedean value, clamped at 0.
    pub fn archimedean(raw: f64) -> Self {
        WeilValue { place: Place::Infinity, value: raw.max(0.0), coeff: None }
    }
}

/// A point of P^1 used as a target for Weil functions.
#[derive(Clone, Debug)]
pub enum P1Target {
    Zero,
    One,
    Infinity,
    Rational(BigRational),
    Algebraic(AlgebraicTarget),
}

impl P1Target {
    /// Rational targets as `(u, w)` with `u / w` in lowest terms, infinity as `(1, 0)`.
    pub fn as_fraction(&self) -> Option<(BigInt, BigInt)> {
        match self {
            P1Target::Zero => Some((0.into(), 1.into())),
            P1Target::One => Some((1.into(), 1.into())),
            P1Target::Infinity => Some((1.into(), 0.into())),
            P1Target::Rational(r) => Some((r.numer().clone(), r.denom().clone())),
            P1Target::Algebraic(t) => t.as_rational().map(|r| (r.numer().clone(), r.denom().clone())),
        }
    }
}

impl std::str::FromStr for P1Target {
    type Err = FunError;

    /// `0`, `1`, `inf`, a rational `u/w`, or an algebraic target `poly:[...];embed:...`.
    fn from_str(s: &str) -> Result<Self, FunError> {
        match s.trim() {
            "0" => Ok(P1Target::Zero),
            "1" => Ok(P1Target::One),
            "inf" | "oo" | "∞" => Ok(P1Target::Infinity),
            t => {
                let target: AlgebraicTarget = t.parse()?;
                Ok(match target.as_rational() {
                    Some(r) if r.is_zero() => P1Target::Zero,
                    Some(r) if r == BigRational::from_integer(1.into()) => P1Target::One,
                    Some(r) => P1Target::Rational(r),
                    None => P1Target::Algebraic(target),
                })
            }
        }
    }
}

impl std::fmt::Display for P1Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            P1Target::Zero => write!(f, "0"),
            P1Target::One => write!(f, "1"),
            P1Target::Infinity => write!(f, "inf"),
            P1Target::Rational(r) => write!(f, "{r}"),
            P1Target::Algebraic(t) => write!(f, "{t}"),
        }
    }
}

/// `lambda_v(target, x) = log+|x|_v + log+|alpha|_v - log|x - alpha|_v`, and
/// `log+|x|_v` for the point at infinity.
pub fn weil_point(target: &P1Target, x: &BigRational, v: Place) -> Result<WeilValue, FunError> {
    if let Some((u, w)) = target.as_fraction() {
        // identical to the binary-form normalization log(max(|b|,|c|) max(|u|,|w|) / |w b - u c|)
        let (b, c) = (x.numer(), x.denom());
        let form = &w * b - &u * c;
        if form.is_zero() {
            return Err(FunError::OnDivisor);
        }
        return Ok(match v {
            Place::Prime(p) => WeilValue::at_prime(p, crate::placeval::vp_int(&form, p) as u64),
            Place::Infinity => {
                let raw = big_ln(&b.abs().max(c.abs())) + big_ln(&u.abs().max(w.abs())) - big_ln(&form);
                WeilValue::archimedean(raw)
            }
        });
    }
    let P1Target::Algebraic(t) = target else { unreachable!() };
    if !t.supports(v) {
        return Err(FunError::Place(crate::placeval::PlaceError::EmbeddingMismatch));
    }
    match v {
        Place::Prime(p) => {
            let vx = vp(x, p).unwrap_or(0);
            let coeff = (-vx).max(0) + t.val_diff(x, p).map_err(map_equal)?;
            Ok(WeilValue::at_prime(p, coeff.max(0) as u64))
        }
        Place::Infinity => {
            let raw = ln_abs_rational(x).max(0.0) + t.log_plus_abs(v)? + t.minus_log_dist(x, v).map_err(map_equal)?;
            Ok(WeilValue::archimedean(raw))
        }
    }
}

fn map_equal(e: crate::placeval::PlaceError) -> FunError {
    match e {
        crate::placeval::PlaceError::EqualsTarget => FunError::OnDivisor,
        other => FunError::Place(other),
    }
}

/// Evaluates a linear form with integer coefficients, checking for overflow.
pub fn eval_linear(coeffs: &[i128], x: &ProjPoint) -> Result<i128, FunError> {
    if coeffs.len() != x.coords().len() {
        return Err(FunError::DimensionMismatch);
    }
    coeffs
        .iter()
        .zip(x.coords())
        .try_fold(0i128, |acc, (&a, &b)| acc.checked_add(a.checked_mul(b)?))
        .ok_or(FunError::Overflow)
}

/// `lambda_v(H, x) = log(max_j |x_j|_v max_j |l_j|_v / |l(x)|_v)` for a primitive form `l`.
pub fn weil_hyperplane(form: &[i128], x: &ProjPoint, v: Place) -> Result<WeilValue, FunError> {
    let val = eval_linear(form, x)?;
    if val == 0 {
        return Err(FunError::OnDivisor);
    }
    Ok(match v {
        Place::Prime(p) => WeilValue::at_prime(p, vp_i128(val, p) as u64),
        Place::Infinity => {
            let lmax = form.iter().map(|c| c.unsigned_abs()).max().unwrap_or(1) as f64;
            WeilValue::archimedean((x.max_abs() as f64).ln() + lmax.ln() - (val.unsigned_abs() as f64).ln())
        }
    })
}

/// `log+ (1 / d_v(P, x))` with the v-adic chordal distance.
pub fn proximity(point: &ProjPoint, x: &ProjPoint, v: Place) -> Result<f64, FunError> {
    let (a, b) = (point.coords(), x.coords());
    if a.len() != b.len() {
        return Err(FunError::DimensionMismatch);
    }
    let mut crosses = Vec::with_capacity(a.len() * (a.len() - 1) / 2);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let c = a[i]
                .checked_mul(b[j])
                .zip(a[j].checked_mul(b[i]))
                .and_then(|(s, t)| s.checked_sub(t))
                .ok_or(FunError::Overflow)?;
            crosses.push(c);
        }
    }
    if crosses.iter().all(|&c| c == 0) {
        return Err(FunError::EqualsPoint);
    }
    Ok(match v {
        Place::Prime(p) => {
            let m = crosses.iter().filter(|&&c| c != 0).map(|&c| vp_i128(c, p)).min().unwrap_or(0);
            m as f64 * (p as f64).ln()
        }
        Place::Infinity => {
            let num = (point.max_abs() as f64).ln() + (x.max_abs() as f64).ln();
            let den = crosses.iter().map(|c| c.unsigned_abs()).max().unwrap_or(1) as f64;
            (num - den.ln()).max(0.0)
        }
    })
}

/// Proximity to a point with algebraic coordinates.
pub fn proximity_algebraic(point: &AlgebraicPoint, x: &ProjPoint, v: Place) -> Result<f64, FunError> {
    if let Some(r) = point.as_rational() {
        return proximity(&r, x, v);
    }
    let a = point.coords();
    let b = x.coords();
    if a.len() != b.len() {
        return Err(FunError::DimensionMismatch);
    }
    let mut crosses = Vec::new();
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let bj = RatPoly::constant(BigRational::from_integer(b[j].into()));
            let bi = RatPoly::constant(BigRational::from_integer(b[i].into()));
            crosses.push(a[i].mul(&bj).sub(&a[j].mul(&bi)));
        }
    }
    match v {
        Place::Prime(p) => {
            let mut min_cross: Option<i64> = None;
            for c in &crosses {
                if let Some(val) = point.valuation(c, p)? {
                    min_cross = Some(min_cross.map_or(val, |m| m.min(val)));
                }
            }
            let min_cross = min_cross.ok_or(FunError::EqualsPoint)?;
            let mut min_coord: Option<i64> = None;
            for c in a {
                if let Some(val) = point.valuation(c, p)? {
                    min_coord = Some(min_coord.map_or(val, |m| m.min(val)));
                }
            }
            let min_coord = min_coord.unwrap_or(0);
            Ok((min_cross - min_coord).max(0) as f64 * (p as f64).ln())
        }
        Place::Infinity => {
            let m = point.theta().minpoly().to_rat();
            if crosses.iter().all(|c| c.rem(&m).is_zero()) {
                return Err(FunError::EqualsPoint);
            }
            let pmax = a
                .iter()
                .map(|c| point.eval_complex(c).map(|z| z.norm()))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .fold(0.0, f64::max);
            let cmax = crosses
                .iter()
                .map(|c| point.eval_complex(c).map(|z| z.norm()))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .fold(0.0, f64::max);
            let xmax = x.max_abs().to_f64().unwrap_or(f64::INFINITY);
            Ok(logplus(pmax * xmax / cmax))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn pt(s: &str) -> ProjPoint {
        s.parse().unwrap()
    }

    #[test]
    fn target_parsing() {
        assert!(matches!("1".parse::<P1Target>(), Ok(P1Target::One)));
        assert!(matches!("2/2".parse::<P1Target>(), Ok(P1Target::One)));
        assert!(matches!("inf".parse::<P1Target>(), Ok(P1Target::Infinity)));
        let t: P1Target = "3/2".parse().unwrap();
        assert_eq!(t.to_string(), "3/2");
        let t: P1Target = "poly:[-2,0,1];embed:padic:7:3".parse().unwrap();
        assert!(matches!(t, P1Target::Algebraic(_)));
        assert_eq!(t.to_string().parse::<P1Target>().unwrap().to_string(), t.to_string());
        assert!("x".parse::<P1Target>().is_err());
    }

    #[test]
    fn weil_point_examples() {
        let x = q(8, 9);
        let l = weil_point(&P1Target::One, &x, Place::Infinity).unwrap();
        assert!((l.value - 9f64.ln()).abs() < 1e-12);
        let l = weil_point(&P1Target::Zero, &x, Place::Prime(2)).unwrap();
        assert_eq!(l.coeff, Some(3));
        let l = weil_point(&P1Target::Infinity, &x, Place::Prime(3)).unwrap();
        assert_eq!(l.coeff, Some(2));
        assert_eq!(weil_point(&P1Target::One, &q(1, 1), Place::Infinity).unwrap_err(), FunError::OnDivisor);
    }

    #[test]
    fn weil_point_algebraic_matches_rational_form() {
        let t: AlgebraicTarget = "3/2".parse().unwrap();
        for &(n, d) in &[(8, 9), (1, 2), (7, 4), (-5, 3), (14, 1)] {
            let x = q(n, d);
            for v in [Place::Infinity, Place::Prime(2), Place::Prime(3), Place::Prime(7)] {
                let a = weil_point(&P1Target::Algebraic(t.clone()), &x, v).unwrap();
                let b = weil_point(&P1Target::Rational(q(3, 2)), &x, v).unwrap();
                assert!((a.value - b.value).abs() < 1e-12, "x={x} v={v}");
            }
        }
        // sqrt2 at 7 with seed 3: x = 3 gives one factor of 7
        let s: AlgebraicTarget = "poly:[-2,0,1];embed:padic:7:3".parse().unwrap();
        let l = weil_point(&P1Target::Algebraic(s), &q(3, 1), Place::Prime(7)).unwrap();
        assert_eq!(l.coeff, Some(1));
    }

    #[test]
    fn hyperplane_examples() {
        let x = pt("[1,3,2]");
        assert_eq!(weil_hyperplane(&[0, 1, 0], &x, Place::Prime(3)).unwrap().coeff, Some(1));
        assert_eq!(weil_hyperplane(&[1, 0, 0], &x, Place::Prime(5)).unwrap().coeff, Some(0));
        let l = weil_hyperplane(&[1, 1, 0], &pt("[1,2,1]"), Place::Infinity).unwrap();
        assert_eq!(l.value, 0.0);
        assert_eq!(weil_hyperplane(&[1, -1, 0], &pt("[1,1,5]"), Place::Infinity), Err(FunError::OnDivisor));
    }

    #[test]
    fn proximity_examples() {
        let l = proximity(&pt("[1,1]"), &pt("[8,9]"), Place::Infinity).unwrap();
        assert!((l - 9f64.ln()).abs() < 1e-12);
        assert_eq!(proximity(&pt("[1,0,0]"), &pt("[0,1,0]"), Place::Infinity).unwrap(), 0.0);
        assert_eq!(proximity(&pt("[1,0,0]"), &pt("[0,1,0]"), Place::Prime(5)).unwrap(), 0.0);
        let l = proximity(&pt("[1,2,1]"), &pt("[1,3,2]"), Place::Infinity).unwrap();
        assert!((l - 6f64.ln()).abs() < 1e-12);
        assert_eq!(proximity(&pt("[1,2,1]"), &pt("[2,4,2]"), Place::Infinity), Err(FunError::EqualsPoint));
        // [1:1] vs [1:8]: cross 7
        let l = proximity(&pt("[1,1]"), &pt("[1,8]"), Place::Prime(7)).unwrap();
        assert!((l - 7f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn algebraic_proximity_agrees_on_rational_points() {
        let theta: AlgebraicTarget = "poly:[-2,0,1];embed:arch:1".parse().unwrap();
        let p = AlgebraicPoint::rational(&pt("[1,2,1]"), theta);
        let x = pt("[1,3,2]");
        let a = proximity_algebraic(&p, &x, Place::Infinity).unwrap();
        assert!((a - 6f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn algebraic_proximity_near_sqrt2() {
        use super::super::point::parse_theta_poly;
        let theta: AlgebraicTarget = "poly:[-2,0,1];embed:arch:1".parse().unwrap();
        let p = AlgebraicPoint::new(theta, vec![parse_theta_poly("1").unwrap(), parse_theta_poly("[0,1]").unwrap()])
            .unwrap();
        // [1 : sqrt2] against [70 : 99]: cross = 99 - 70 sqrt2
        let l = proximity_algebraic(&p, &pt("[70,99]"), Place::Infinity).unwrap();
        let expect = (std::f64::consts::SQRT_2 * 99.0 / (99.0 - 70.0 * std::f64::consts::SQRT_2)).ln();
        assert!((l - expect).abs() < 1e-6);
        let theta7: AlgebraicTarget = "poly:[-2,0,1];embed:padic:7:3".parse().unwrap();
        let p7 = AlgebraicPoint::new(theta7, vec![parse_theta_poly("1").unwrap(), parse_theta_poly("[0,1]").unwrap()])
            .unwrap();
        // theta - 10 has valuation 2 at 7
        let l = proximity_algebraic(&p7, &pt("[1,10]"), Place::Prime(7)).unwrap();
        assert!((l - 2.0 * 7f64.ln()).abs() < 1e-12);
    }
}
