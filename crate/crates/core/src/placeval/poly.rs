//! Dense univariate polynomials over the integers and the rationals.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::PlaceError;

/// Integer polynomial, coefficients from the constant term up, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// `w t - u`, the minimal polynomial of `u / w`.
    pub fn linear(u: &BigInt, w: &BigInt) -> Self {
        Self::new(vec![-u.clone(), w.clone()]).primitive()
    }

    /// Parses `[c0,c1,...,cd]`.
    pub fn parse(text: &str) -> Result<Self, PlaceError> {
        let body = text
            .trim()
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| PlaceError::Parse(format!("expected [c0,...,cd], got {text:?}")))?;
        let coeffs = body
            .split(',')
            .map(|s| s.trim().parse::<BigInt>().map_err(|_| PlaceError::Parse(format!("bad coefficient {s:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(coeffs))
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn constant(&self) -> BigInt {
        self.coeffs.first().cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Divided by its content, leading coefficient positive.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut g = self.content();
        if self.leading().is_negative() {
            g = -g;
        }
        IntPoly::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    pub fn derivative(&self) -> Self {
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigInt::from(k))
                .collect(),
        )
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or_else(BigInt::zero)
    }

    pub fn eval_int(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        let (b, c) = (x.numer(), x.denom());
        let d = self.degree() as u32;
        BigRational::new(self.eval_homog(b, c), num_traits::pow(c.clone(), d as usize))
    }

    /// The binary form `F(b, c) = sum f_k b^k c^(d-k)`.
    pub fn eval_homog(&self, b: &BigInt, c: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        let mut cpow = BigInt::one();
        for coeff in self.coeffs.iter().rev() {
            acc = acc * b + coeff * &cpow;
            cpow *= c;
        }
        acc
    }

    /// `f(r) mod m`, reduced into `[0, m)`.
    pub fn eval_mod(&self, r: &BigInt, m: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = (acc * r + c).mod_floor(m);
        }
        acc
    }

    /// Coefficients as doubles; `None` when one is not exactly representable.
    pub fn to_f64_exact(&self) -> Option<Vec<f64>> {
        self.coeffs
            .iter()
            .map(|c| {
                let f = c.to_f64()?;
                (f.abs() < 9.007_199_254_740_992e15).then_some(f)
            })
            .collect()
    }

    pub fn to_rat(&self) -> RatPoly {
        RatPoly::new(self.coeffs.iter().map(|c| BigRational::from_integer(c.clone())).collect())
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Horner evaluation at a complex point together with `sum |f_k| |z|^k`.
pub(crate) fn horner_complex(coeffs: &[f64], z: Complex64) -> (Complex64, f64) {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    let r = z.norm();
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
        mag = mag * r + c.abs();
    }
    (acc, mag)
}

/// Rational polynomial, same layout as [`IntPoly`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatPoly {
    coeffs: Vec<BigRational>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn zero() -> Self {
        RatPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> BigRational {
        self.coeffs.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = BigRational::zero();
        Self::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) + other.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Quotient and remainder; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let mut rem = self.coeffs.clone();
        let dd = divisor.degree();
        let lead = divisor.leading();
        if rem.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let q = &rem[k + dd] / &lead;
            if !q.is_zero() {
                for (j, d) in divisor.coeffs.iter().enumerate() {
                    rem[k + j] -= &q * d;
                }
            }
            quot[k] = q;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    pub fn rem(&self, divisor: &Self) -> Self {
        self.div_rem(divisor).1
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let lead = self.leading();
        Self::new(self.coeffs.iter().map(|c| c / &lead).collect())
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Scaled to a primitive integer polynomial with positive leading coefficient.
    pub fn to_primitive_int(&self) -> IntPoly {
        let lcm = self.coeffs.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        IntPoly::new(self.coeffs.iter().map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer()).collect())
            .primitive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn evaluation_forms_agree() {
        let f = IntPoly::from_i64s(&[-2, 0, 1]);
        assert_eq!(f.eval_int(&3.into()), BigInt::from(7));
        assert_eq!(f.eval_rational(&q(3, 2)), q(1, 4));
        // F(b,c) = b^2 - 2c^2
        assert_eq!(f.eval_homog(&3.into(), &2.into()), BigInt::from(1));
        assert_eq!(f.eval_mod(&10.into(), &49.into()), BigInt::zero());
        assert_eq!(f.derivative(), IntPoly::from_i64s(&[0, 2]));
    }

    #[test]
    fn primitive_and_parse() {
        let f = IntPoly::parse("[4, 0, -2]").unwrap();
        assert_eq!(f.primitive(), IntPoly::from_i64s(&[-2, 0, 1]));
        assert_eq!(f.to_string(), "[4,0,-2]");
        assert!(IntPoly::parse("4,0").is_err());
        assert_eq!(IntPoly::linear(&BigInt::from(-3), &BigInt::from(6)), IntPoly::from_i64s(&[1, 2]));
    }

    #[test]
    fn rational_division_and_gcd() {
        // (t^2 - 2)(t + 1) / (t + 1)
        let a = IntPoly::from_i64s(&[-2, -2, 1, 1]).to_rat();
        let b = IntPoly::from_i64s(&[1, 1]).to_rat();
        let (quo, rem) = a.div_rem(&b);
        assert!(rem.is_zero());
        assert_eq!(quo, IntPoly::from_i64s(&[-2, 0, 1]).to_rat());
        let g = a.gcd(&a.derivative());
        assert_eq!(g.degree(), 0);
        let sq = a.mul(&b);
        assert_eq!(sq.gcd(&sq.derivative()), b);
        assert_eq!(sq.eval(&q(-1, 1)), q(0, 1));
        assert_eq!(a.scale(&q(1, 3)).to_primitive_int(), IntPoly::from_i64s(&[-2, -2, 1, 1]));
    }
}
