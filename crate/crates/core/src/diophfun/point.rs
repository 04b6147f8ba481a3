use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::FunError;
use crate::exactnum::FormalLogSum;
use crate::placeval::{lift_root, AlgebraicTarget, Embedding, IntPoly, RatPoly, MAX_PRECISION, START_PRECISION};

/// A rational point of projective space with coprime integer coordinates,
/// first nonzero coordinate positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjPoint {
    coords: Vec<i128>,
}

impl ProjPoint {
    pub fn new(mut coords: Vec<i128>) -> Result<Self, FunError> {
        if coords.len() < 2 {
            return Err(FunError::DimensionMismatch);
        }
        let g = coords.iter().fold(0i128, |g, &c| g.gcd(&c));
        if g == 0 {
            return Err(FunError::ZeroPoint);
        }
        let first = coords.iter().find(|&&c| c != 0).copied().unwrap_or(1);
        let g = if first < 0 { -g } else { g };
        for c in coords.iter_mut() {
            *c /= g;
        }
        Ok(ProjPoint { coords })
    }

    /// Builds from coordinates already known to be normalized.
    pub(crate) fn from_normalized(coords: Vec<i128>) -> Self {
        debug_assert_eq!(ProjPoint::new(coords.clone()).map(|p| p.coords), Ok(coords.clone()));
        ProjPoint { coords }
    }

    /// `[b : c]` for `x = b / c` in lowest terms.
    pub fn from_rational(x: &BigRational) -> Result<Self, FunError> {
        let b = x.numer().to_i128().ok_or(FunError::Overflow)?;
        let c = x.denom().to_i128().ok_or(FunError::Overflow)?;
        ProjPoint::new(vec![b, c])
    }

    pub fn coords(&self) -> &[i128] {
        &self.coords
    }

    /// Projective dimension n.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn max_abs(&self) -> u128 {
        self.coords.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    /// `log max_j |x_j|`, kept as a single integer term.
    pub fn height(&self) -> FormalLogSum {
        FormalLogSum::log_of(self.max_abs())
    }

    /// For a point of P^1, `b / c` or `None` at infinity.
    pub fn as_rational(&self) -> Option<BigRational> {
        (self.dim() == 1 && self.coords[1] != 0)
            .then(|| BigRational::new(self.coords[0].into(), self.coords[1].into()))
    }
}

impl FromStr for ProjPoint {
    type Err = FunError;

    /// `[x0,x1,...]` or `x0:x1:...`.
    fn from_str(s: &str) -> Result<Self, FunError> {
        let t = s.trim();
        let body = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')).unwrap_or(t);
        let sep = if body.contains(':') { ':' } else { ',' };
        let coords = body
            .split(sep)
            .map(|c| c.trim().parse::<i128>().map_err(|_| FunError::Parse(format!("bad coordinate {c:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        ProjPoint::new(coords)
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ":")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// A point of projective space whose coordinates are polynomials in a fixed
/// algebraic number `theta`, reduced modulo its minimal polynomial.
#[derive(Clone, Debug)]
pub struct AlgebraicPoint {
    theta: AlgebraicTarget,
    coords: Vec<RatPoly>,
}

impl AlgebraicPoint {
    pub fn new(theta: AlgebraicTarget, coords: Vec<RatPoly>) -> Result<Self, FunError> {
        if coords.len() < 2 {
            return Err(FunError::DimensionMismatch);
        }
        let m = theta.minpoly().to_rat();
        let coords: Vec<RatPoly> = coords.iter().map(|c| c.rem(&m)).collect();
        if coords.iter().all(|c| c.is_zero()) {
            return Err(FunError::ZeroPoint);
        }
        Ok(AlgebraicPoint { theta, coords })
    }

    pub fn rational(p: &ProjPoint, theta: AlgebraicTarget) -> Self {
        let coords = p
            .coords()
            .iter()
            .map(|&c| RatPoly::constant(BigRational::from_integer(c.into())))
            .collect();
        AlgebraicPoint { theta, coords }
    }

    pub fn theta(&self) -> &AlgebraicTarget {
        &self.theta
    }

    pub fn coords(&self) -> &[RatPoly] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// All coordinates rational: the point as a [`ProjPoint`].
    pub fn as_rational(&self) -> Option<ProjPoint> {
        if self.coords.iter().any(|c| c.degree() > 0) {
            return None;
        }
        let vals: Vec<BigRational> = self
            .coords
            .iter()
            .map(|c| c.coeffs().first().cloned().unwrap_or_else(BigRational::zero))
            .collect();
        let lcm = vals.iter().fold(BigInt::one(), |l, v| l.lcm(v.denom()));
        let ints = vals
            .iter()
            .map(|v| (v * BigRational::from_integer(lcm.clone())).to_integer().to_i128())
            .collect::<Option<Vec<_>>>()?;
        ProjPoint::new(ints).ok()
    }

    /// Complex value of a polynomial in theta under the archimedean embedding.
    pub(crate) fn eval_complex(&self, g: &RatPoly) -> Result<Complex64, FunError> {
        let z = match self.theta.embedding() {
            Embedding::Rational => {
                Complex64::new(self.theta.as_rational().and_then(|r| r.to_f64()).unwrap_or(0.0), 0.0)
            }
            Embedding::Archimedean(_) => self.theta.arch_root().ok_or(FunError::Unsupported("root isolation".into()))?.center,
            Embedding::Padic { .. } => return Err(FunError::Unsupported("theta has no archimedean embedding".into())),
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for c in g.coeffs().iter().rev() {
            acc = acc * z + c.to_f64().unwrap_or(f64::NAN);
        }
        Ok(acc)
    }

    /// `v_p(g(theta))` under the p-adic embedding of theta; `None` when `g(theta) = 0`.
    pub(crate) fn valuation(&self, g: &RatPoly, p: u64) -> Result<Option<i64>, FunError> {
        if g.is_zero() {
            return Ok(None);
        }
        let m = self.theta.minpoly().to_rat();
        if g.rem(&m).is_zero() {
            return Ok(None);
        }
        let den = g.coeffs().iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let big = IntPoly::new(g.coeffs().iter().map(|c| (c * BigRational::from_integer(den.clone())).to_integer()).collect());
        let vden = crate::placeval::vp_int(&den, p) as i64;
        if let Some(r) = self.theta.as_rational() {
            let val = RatPoly::new(big.to_rat().coeffs().to_vec()).eval(&r);
            return Ok(Some(crate::placeval::vp(&val, p)? - vden));
        }
        let Embedding::Padic { p: q, seed } = self.theta.embedding() else {
            return Err(FunError::Unsupported("theta has no p-adic embedding".into()));
        };
        if *q != p {
            return Err(FunError::Unsupported(format!("theta is embedded at {q}, not {p}")));
        }
        let mut k = START_PRECISION;
        loop {
            let a = lift_root(self.theta.minpoly(), p, seed, k)?;
            let v = big.eval_mod(&a.residue, &a.modulus);
            if !v.is_zero() {
                return Ok(Some(crate::placeval::vp_int(&v, p) as i64 - vden));
            }
            if k >= MAX_PRECISION {
                return Err(FunError::Place(crate::placeval::PlaceError::PrecisionOverflow));
            }
            k = (2 * k).min(MAX_PRECISION);
        }
    }
}

/// Parses one coordinate of an algebraic point: a rational, or `[c0,c1,...]`
/// with rational entries meaning `c0 + c1 t + ...`.
pub fn parse_theta_poly(s: &str) -> Result<RatPoly, FunError> {
    let s = s.trim();
    let parts: Vec<&str> = match s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        Some(body) => body.split(',').collect(),
        None => vec![s],
    };
    let coeffs = parts
        .iter()
        .map(|c| crate::placeval::parse_rational(c).map_err(FunError::Place))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RatPoly::new(coeffs))
}

pub(crate) fn i128_abs_ln(x: i128) -> f64 {
    (x.unsigned_abs() as f64).ln()
}

pub(crate) fn big_ln(x: &BigInt) -> f64 {
    crate::placeval::ln_abs_int(&x.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization() {
        let p = ProjPoint::new(vec![-2, 4, 6]).unwrap();
        assert_eq!(p.coords(), &[1, -2, -3]);
        assert_eq!(ProjPoint::new(vec![0, 0]), Err(FunError::ZeroPoint));
        assert_eq!(ProjPoint::new(vec![0, -5]).unwrap().coords(), &[0, 1]);
        assert_eq!("[4,6,9]".parse::<ProjPoint>().unwrap().coords(), &[4, 6, 9]);
        assert_eq!("1:3:2".parse::<ProjPoint>().unwrap().to_string(), "[1:3:2]");
    }

    #[test]
    fn heights() {
        let h = |s: &str| s.parse::<ProjPoint>().unwrap().height().eval();
        assert!((h("[1,3,2]") - 3f64.ln()).abs() < 1e-15);
        assert_eq!(h("[1,0]"), 0.0);
        assert!((h("[4,6,9]") - 9f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn algebraic_point_valuations() {
        let theta: AlgebraicTarget = "poly:[-2,0,1];embed:padic:7:3".parse().unwrap();
        let p = AlgebraicPoint::new(
            theta,
            vec![parse_theta_poly("1").unwrap(), parse_theta_poly("[-3,1]").unwrap()],
        )
        .unwrap();
        // theta - 3 has 7-adic valuation 1
        assert_eq!(p.valuation(&p.coords()[1], 7).unwrap(), Some(1));
        assert_eq!(p.valuation(&parse_theta_poly("[-2,0,1]").unwrap(), 7).unwrap(), None);
        assert_eq!(p.valuation(&parse_theta_poly("1/7").unwrap(), 7).unwrap(), Some(-1));
    }
}
