//! Linear dependence of divisor classes given in coordinates, and the
//! monomial rational map built from an integer relation.
//!
//! Classes are integer vectors in a lattice of user-declared rank. Torsion is
//! not modeled: a torsion class must be entered as the zero vector, and any
//! relation found is then only valid modulo torsion.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exec::Exec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassError {
    #[error("the classes are linearly independent")]
    NoRelation,
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("relation has coefficients of one sign only")]
    OneSidedRelation,
    #[error("empty input")]
    Empty,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A primitive integer relation with first nonzero coefficient positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    coeffs: Vec<BigInt>,
}

impl Relation {
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// `sum c_i v_i = 0`, checked in exact integer arithmetic.
    pub fn verify(&self, vectors: &[Vec<i64>]) -> bool {
        if vectors.len() != self.coeffs.len() || self.coeffs.iter().all(Zero::is_zero) {
            return false;
        }
        let rho = vectors.first().map_or(0, Vec::len);
        (0..rho).all(|k| {
            self.coeffs
                .iter()
                .zip(vectors)
                .map(|(c, v)| c * BigInt::from(v[k]))
                .sum::<BigInt>()
                .is_zero()
        })
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `m > rank Pic^0 + rank_num`: a relation is then guaranteed.
pub fn guarantee_check(m: usize, rank_pic0: usize, rank_num: usize) -> bool {
    m > rank_pic0 + rank_num
}

/// Reduced row echelon form in place; returns the pivot column of each nonzero row.
fn rref(a: &mut [Vec<BigRational>]) -> Vec<usize> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        let top = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let factor = row[c].clone();
                for (dst, src) in row.iter_mut().zip(&top) {
                    *dst -= &factor * src;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// An integer relation among the given class vectors: the kernel vector
/// attached to the first free column of the reduced echelon form, made
/// primitive with first nonzero entry positive.
pub fn integer_kernel(vectors: &[Vec<i64>]) -> Result<Relation, ClassError> {
    let m = vectors.len();
    if m == 0 {
        return Err(ClassError::Empty);
    }
    let rho = vectors[0].len();
    if vectors.iter().any(|v| v.len() != rho) {
        return Err(ClassError::DimensionMismatch);
    }
    // rho x m matrix whose columns are the class vectors
    let mut a: Vec<Vec<BigRational>> = (0..rho)
        .map(|k| vectors.iter().map(|v| BigRational::from_integer(v[k].into())).collect())
        .collect();
    let pivots = rref(&mut a);
    let free = (0..m).find(|c| !pivots.contains(c)).ok_or(ClassError::NoRelation)?;
    let mut x = vec![BigRational::zero(); m];
    x[free] = BigRational::one();
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = -a[row][free].clone();
    }
    let den = x.iter().fold(BigInt::one(), |l, q| l.lcm(q.denom()));
    let mut coeffs: Vec<BigInt> = x.iter().map(|q| (q * BigRational::from_integer(den.clone())).to_integer()).collect();
    let g = coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    let first_negative = coeffs.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative());
    for c in coeffs.iter_mut() {
        *c = &*c / &g;
        if first_negative {
            *c = -&*c;
        }
    }
    let rel = Relation { coeffs };
    assert!(rel.verify(vectors), "kernel vector failed exact verification");
    Ok(rel)
}

/// Solves many instances; results are in input order for every executor.
pub fn solve_batch(instances: &[Vec<Vec<i64>>], exec: Exec) -> Vec<Result<Relation, ClassError>> {
    exec.map(instances, |v| integer_kernel(v))
}

/// `f = prod_i form_i^{c_i}` split into numerator and denominator, as
/// `(form index, exponent)` lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialMap {
    pub numerator: Vec<(usize, u32)>,
    pub denominator: Vec<(usize, u32)>,
}

impl MonomialMap {
    pub fn new(numerator: Vec<(usize, u32)>, denominator: Vec<(usize, u32)>) -> Result<Self, ClassError> {
        let bad = |msg: &str| ClassError::Parse { line: 0, msg: msg.into() };
        if numerator.is_empty() || denominator.is_empty() {
            return Err(ClassError::OneSidedRelation);
        }
        if numerator.iter().chain(&denominator).any(|&(_, e)| e == 0) {
            return Err(bad("exponents must be positive"));
        }
        let mut seen: Vec<usize> = numerator.iter().chain(&denominator).map(|&(i, _)| i).collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(bad("a form appears twice"));
        }
        Ok(MonomialMap { numerator, denominator })
    }

    pub fn numerator_degree(&self) -> u64 {
        self.numerator.iter().map(|&(_, e)| e as u64).sum()
    }

    pub fn denominator_degree(&self) -> u64 {
        self.denominator.iter().map(|&(_, e)| e as u64).sum()
    }

    /// Largest exponent.
    pub fn max_exponent(&self) -> u32 {
        self.numerator.iter().chain(&self.denominator).map(|&(_, e)| e).max().unwrap_or(0)
    }

    /// Largest form index used.
    pub fn max_index(&self) -> usize {
        self.numerator.iter().chain(&self.denominator).map(|&(i, _)| i).max().unwrap_or(0)
    }

    /// Formula with the given form names, e.g. `x0^2/(x1*x2)`.
    pub fn formula(&self, names: &[String]) -> String {
        let side = |s: &[(usize, u32)]| {
            let parts: Vec<String> = s
                .iter()
                .map(|&(i, e)| if e == 1 { names[i].clone() } else { format!("{}^{e}", names[i]) })
                .collect();
            if parts.len() > 1 {
                format!("({})", parts.join("*"))
            } else {
                parts.join("*")
            }
        };
        let num = side(&self.numerator);
        let num = num.strip_prefix('(').and_then(|n| n.strip_suffix(')')).map(str::to_string).unwrap_or(num);
        format!("{num}/{}", side(&self.denominator))
    }
}

impl fmt::Display for MonomialMap {
    /// `i:e,j:e/k:e`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |s: &[(usize, u32)]| s.iter().map(|(i, e)| format!("{i}:{e}")).collect::<Vec<_>>().join(",");
        write!(f, "{}/{}", side(&self.numerator), side(&self.denominator))
    }
}

impl FromStr for MonomialMap {
    type Err = ClassError;

    fn from_str(s: &str) -> Result<Self, ClassError> {
        let bad = |msg: String| ClassError::Parse { line: 0, msg };
        let (num, den) = s.split_once('/').ok_or_else(|| bad(format!("expected numerator/denominator in {s:?}")))?;
        let side = |t: &str| -> Result<Vec<(usize, u32)>, ClassError> {
            t.split(',')
                .filter(|p| !p.trim().is_empty())
                .map(|p| {
                    let (i, e) = p.trim().split_once(':').unwrap_or((p.trim(), "1"));
                    Ok((
                        i.trim().parse().map_err(|_| bad(format!("bad index {i:?}")))?,
                        e.trim().parse().map_err(|_| bad(format!("bad exponent {e:?}")))?,
                    ))
                })
                .collect()
        };
        MonomialMap::new(side(num)?, side(den)?)
    }
}

/// The map `prod form_i^{c_i}` of a relation among the classes of `forms`.
pub fn relation_to_map(rel: &Relation, forms: &[Vec<i128>]) -> Result<MonomialMap, ClassError> {
    if rel.coeffs.len() != forms.len() {
        return Err(ClassError::DimensionMismatch);
    }
    let exp = |c: &BigInt| -> Result<u32, ClassError> {
        u32::try_from(c.abs()).map_err(|_| ClassError::Parse { line: 0, msg: format!("exponent {c} too large") })
    };
    let mut num = Vec::new();
    let mut den = Vec::new();
    for (i, c) in rel.coeffs.iter().enumerate() {
        if c.is_positive() {
            num.push((i, exp(c)?));
        } else if c.is_negative() {
            den.push((i, exp(c)?));
        }
    }
    MonomialMap::new(num, den)
}

/// A class file: the declared rank and one class vector per divisor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassFile {
    pub rho: usize,
    pub vectors: Vec<Vec<i64>>,
}

impl FromStr for ClassFile {
    type Err = ClassError;

    /// First line `rho=<int>`, then one space-separated integer vector per line.
    fn from_str(s: &str) -> Result<Self, ClassError> {
        let mut rho = None;
        let mut vectors = Vec::new();
        for (idx, line) in s.lines().enumerate() {
            let line_no = idx + 1;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let bad = |msg: String| ClassError::Parse { line: line_no, msg };
            match rho {
                None => {
                    let v = t.strip_prefix("rho=").ok_or_else(|| bad("expected rho=<int>".into()))?;
                    rho = Some(v.trim().parse::<usize>().map_err(|_| bad(format!("bad rank {v:?}")))?);
                }
                Some(r) => {
                    let v = t
                        .split_whitespace()
                        .map(|x| x.parse::<i64>().map_err(|_| bad(format!("bad entry {x:?}"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    if v.len() != r {
                        return Err(bad(format!("expected {r} entries, found {}", v.len())));
                    }
                    vectors.push(v);
                }
            }
        }
        let rho = rho.ok_or(ClassError::Parse { line: 1, msg: "missing rho=<int>".into() })?;
        if vectors.is_empty() {
            return Err(ClassError::Empty);
        }
        Ok(ClassFile { rho, vectors })
    }
}
