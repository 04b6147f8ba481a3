use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::irreducible::is_irreducible;
use super::padic::{check_simple_root, lift_root, val_diff_root, PadicApprox};
use super::poly::IntPoly;
use super::roots::{isolate_roots, log_mahler_measure, RootDisk};
use super::{ln_abs_rational, vp, Place, PlaceError};

/// Relative error allowed in archimedean distances.
pub const ARCH_REL_TOLERANCE: f64 = 1e-12;

/// How a target is placed inside a completion of the rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Embedding {
    /// Index into the roots ordered by real part, then imaginary part.
    Archimedean(usize),
    /// The p-adic root congruent to `seed` modulo `p`.
    Padic { p: u64, seed: BigInt },
    /// Rational targets sit in every completion.
    Rational,
}

/// A nonzero algebraic number given by its minimal polynomial and an embedding.
#[derive(Clone, Debug)]
pub struct AlgebraicTarget {
    minpoly: IntPoly,
    embedding: Embedding,
    height: f64,
    roots: Option<Vec<RootDisk>>,
}

impl PartialEq for AlgebraicTarget {
    fn eq(&self, other: &Self) -> bool {
        self.minpoly == other.minpoly && self.embedding == other.embedding
    }
}

/// `|alpha - x|` at the archimedean place, as a logarithm with a relative error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArchDist {
    pub ln_value: f64,
    pub rel_err: f64,
}

impl ArchDist {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }

    /// Interval guaranteed to contain the true distance.
    pub fn bracket(&self) -> (f64, f64) {
        let v = self.value();
        (v * (1.0 - self.rel_err), v * (1.0 + self.rel_err))
    }
}

impl AlgebraicTarget {
    pub fn new(minpoly: IntPoly, embedding: Embedding) -> Result<Self, PlaceError> {
        if minpoly.degree() == 0 {
            return Err(PlaceError::InvalidTarget("minimal polynomial must have degree at least 1".into()));
        }
        if minpoly.constant().is_zero() {
            return Err(PlaceError::InvalidTarget("target must be nonzero".into()));
        }
        if minpoly.content() != BigInt::from(1) {
            return Err(PlaceError::InvalidTarget("minimal polynomial must have content 1".into()));
        }
        if !is_irreducible(&minpoly)? {
            return Err(PlaceError::InvalidTarget(format!("{minpoly} is reducible")));
        }
        let minpoly = minpoly.primitive();
        let degree = minpoly.degree();
        let embedding = match embedding {
            Embedding::Rational if degree == 1 => Embedding::Rational,
            Embedding::Rational => {
                return Err(PlaceError::InvalidTarget("an embedding is required for degree > 1".into()))
            }
            _ if degree == 1 => Embedding::Rational,
            Embedding::Archimedean(k) if k < degree => Embedding::Archimedean(k),
            Embedding::Archimedean(k) => {
                return Err(PlaceError::InvalidTarget(format!("root index {k} out of range for degree {degree}")))
            }
            Embedding::Padic { p, seed } => {
                Place::prime(p)?;
                check_simple_root(&minpoly, p, &seed)?;
                let pb = BigInt::from(p);
                Embedding::Padic { p, seed: ((seed % &pb) + &pb) % &pb }
            }
        };
        let roots = match &embedding {
            Embedding::Rational => None,
            _ => isolate_roots(&minpoly).ok(),
        };
        let height = if degree == 1 {
            let c = minpoly.coeffs();
            super::ln_abs_int(&c[0].abs().max(c[1].abs()))
        } else {
            let (lm, _) = log_mahler_measure(&minpoly)?;
            lm / degree as f64
        };
        if matches!(embedding, Embedding::Archimedean(_)) && roots.is_none() {
            return Err(PlaceError::PrecisionInsufficient);
        }
        Ok(AlgebraicTarget { minpoly, embedding, height, roots })
    }

    pub fn rational(x: &BigRational) -> Result<Self, PlaceError> {
        Self::new(IntPoly::linear(x.numer(), x.denom()), Embedding::Rational)
    }

    pub fn minpoly(&self) -> &IntPoly {
        &self.minpoly
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn degree(&self) -> usize {
        self.minpoly.degree()
    }

    /// Absolute logarithmic height.
    pub fn height(&self) -> f64 {
        self.height
    }

    /// The value itself when the target is rational.
    pub fn as_rational(&self) -> Option<BigRational> {
        (self.degree() == 1).then(|| {
            let c = self.minpoly.coeffs();
            BigRational::new(-c[0].clone(), c[1].clone())
        })
    }

    /// Isolating disk of the selected complex root.
    pub fn arch_root(&self) -> Option<RootDisk> {
        match (&self.embedding, &self.roots) {
            (Embedding::Archimedean(k), Some(r)) => Some(r[*k]),
            _ => None,
        }
    }

    /// Whether this target can be evaluated at `v`.
    pub fn supports(&self, v: Place) -> bool {
        match (&self.embedding, v) {
            (Embedding::Rational, _) => true,
            (Embedding::Archimedean(_), Place::Infinity) => true,
            (Embedding::Padic { p, .. }, Place::Prime(q)) => *p == q,
            _ => false,
        }
    }

    pub fn hensel_lift(&self, k: u32) -> Result<PadicApprox, PlaceError> {
        match &self.embedding {
            Embedding::Padic { p, seed } => lift_root(&self.minpoly, *p, seed, k),
            _ => Err(PlaceError::EmbeddingMismatch),
        }
    }

    /// `v_p(alpha - x)` at the prime of a p-adic embedding, or at any prime for rational targets.
    pub fn val_diff(&self, x: &BigRational, p: u64) -> Result<i64, PlaceError> {
        if let Some(a) = self.as_rational() {
            if &a == x {
                return Err(PlaceError::EqualsTarget);
            }
            return vp(&(a - x), p);
        }
        match &self.embedding {
            Embedding::Padic { p: q, seed } if *q == p => val_diff_root(&self.minpoly, p, seed, x),
            _ => Err(PlaceError::EmbeddingMismatch),
        }
    }

    /// Certified `|alpha - x|` at the archimedean place.
    ///
    /// Two routes are compared and the one with the smaller error bound kept:
    /// the direct difference from the isolating disk, and the quotient
    /// `|f(x)| / (|a_d| prod_{j != i} |x - z_j|)` with `f(x)` exact, which stays
    /// accurate when `x` is very close to the root.
    pub fn arch_dist(&self, x: &BigRational) -> Result<ArchDist, PlaceError> {
        if let Some(a) = self.as_rational() {
            if &a == x {
                return Err(PlaceError::EqualsTarget);
            }
            let ln_value = ln_abs_rational(&(a - x));
            return Ok(ArchDist { ln_value, rel_err: 4.0 * f64::EPSILON });
        }
        let Embedding::Archimedean(idx) = self.embedding else {
            return Err(PlaceError::EmbeddingMismatch);
        };
        let roots = self.roots.as_ref().ok_or(PlaceError::PrecisionInsufficient)?;
        let fx = self.minpoly.eval_rational(x);
        if fx.is_zero() {
            return Err(PlaceError::EqualsTarget);
        }
        let xf = ln_to_f64(x);
        let xc = Complex64::new(xf, 0.0);
        let u = f64::EPSILON;
        // route 1: direct
        let disk = roots[idx];
        let direct = (disk.center - xc).norm();
        let direct_err = disk.radius + u * (disk.center.norm() + xf.abs());
        let route1 = (direct > direct_err)
            .then(|| ArchDist { ln_value: direct.ln(), rel_err: 2.0 * direct_err / (direct - direct_err) });
        // route 2: quotient with exact f(x)
        let mut ln_den = super::ln_abs_int(&self.minpoly.leading());
        let mut rel = 4.0 * u * self.degree() as f64;
        let mut ok = true;
        for (j, other) in roots.iter().enumerate() {
            if j == idx {
                continue;
            }
            let dist = (other.center - xc).norm();
            let err = other.radius + u * (other.center.norm() + xf.abs());
            if dist <= err {
                ok = false;
                break;
            }
            ln_den += dist.ln();
            rel += err / (dist - err);
        }
        let route2 = ok.then(|| ArchDist { ln_value: ln_abs_rational(&fx) - ln_den, rel_err: 2.0 * rel });
        let best = match (route1, route2) {
            (Some(a), Some(b)) => Some(if b.rel_err < a.rel_err { b } else { a }),
            (a, b) => a.or(b),
        };
        match best {
            Some(d) if d.rel_err < ARCH_REL_TOLERANCE => Ok(d),
            _ => Err(PlaceError::PrecisionInsufficient),
        }
    }

    /// `-log |alpha - x|_v`, signed.
    pub fn minus_log_dist(&self, x: &BigRational, v: Place) -> Result<f64, PlaceError> {
        match v {
            Place::Infinity => {
                if !self.supports(v) {
                    return Err(PlaceError::EmbeddingMismatch);
                }
                Ok(-self.arch_dist(x)?.ln_value)
            }
            Place::Prime(p) => Ok(self.val_diff(x, p)? as f64 * (p as f64).ln()),
        }
    }

    /// `log max(1, |alpha|_v)`.
    pub fn log_plus_abs(&self, v: Place) -> Result<f64, PlaceError> {
        if let Some(a) = self.as_rational() {
            return Ok(match v {
                Place::Infinity => ln_abs_rational(&a).max(0.0),
                Place::Prime(p) => (-vp(&a, p)?).max(0) as f64 * (p as f64).ln(),
            });
        }
        match (&self.embedding, v) {
            (Embedding::Archimedean(_), Place::Infinity) => {
                let disk = self.arch_root().ok_or(PlaceError::PrecisionInsufficient)?;
                Ok(disk.center.norm().ln().max(0.0))
            }
            // simple roots modulo p are p-adic integers
            (Embedding::Padic { p, .. }, Place::Prime(q)) if *p == q => Ok(0.0),
            _ => Err(PlaceError::EmbeddingMismatch),
        }
    }
}

fn ln_to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or_else(|| {
        let l = ln_abs_rational(x).exp();
        if x.is_negative() {
            -l
        } else {
            l
        }
    })
}

impl FromStr for AlgebraicTarget {
    type Err = PlaceError;

    /// `poly:[c0,...,cd];embed:arch:<k>`, `poly:[...];embed:padic:<p>:<seed>`,
    /// or a plain rational such as `3/2`.
    fn from_str(s: &str) -> Result<Self, PlaceError> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("poly:") {
            let (poly_txt, embed_txt) = match rest.split_once(';') {
                Some((a, b)) => (a, Some(b.trim())),
                None => (rest, None),
            };
            let poly = IntPoly::parse(poly_txt)?;
            let embedding = match embed_txt {
                None => Embedding::Rational,
                Some(e) => {
                    let e = e
                        .strip_prefix("embed:")
                        .ok_or_else(|| PlaceError::Parse(format!("expected embed:..., got {e:?}")))?;
                    let parts: Vec<&str> = e.split(':').collect();
                    match parts.as_slice() {
                        ["arch", k] => Embedding::Archimedean(
                            k.parse().map_err(|_| PlaceError::Parse(format!("bad root index {k:?}")))?,
                        ),
                        ["padic", p, seed] => Embedding::Padic {
                            p: p.parse().map_err(|_| PlaceError::Parse(format!("bad prime {p:?}")))?,
                            seed: seed.parse().map_err(|_| PlaceError::Parse(format!("bad seed {seed:?}")))?,
                        },
                        _ => return Err(PlaceError::Parse(format!("unknown embedding {e:?}"))),
                    }
                }
            };
            return AlgebraicTarget::new(poly, embedding);
        }
        let x = parse_rational(s)?;
        AlgebraicTarget::rational(&x)
    }
}

/// Parses `n` or `n/d`.
pub fn parse_rational(s: &str) -> Result<BigRational, PlaceError> {
    let bad = || PlaceError::Parse(format!("bad rational {s:?}"));
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

impl fmt::Display for AlgebraicTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.embedding {
            Embedding::Rational => write!(f, "{}", self.as_rational().expect("degree one")),
            Embedding::Archimedean(k) => write!(f, "poly:{};embed:arch:{k}", self.minpoly),
            Embedding::Padic { p, seed } => write!(f, "poly:{};embed:padic:{p}:{seed}", self.minpoly),
        }
    }
}
