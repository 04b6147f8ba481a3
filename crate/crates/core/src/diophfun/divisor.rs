use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use super::point::{big_ln, i128_abs_ln, ProjPoint};
use super::weil::{eval_linear, WeilValue};
use super::FunError;
use crate::exactnum::{factorize, factorize_u128, FormalLogSum};
use crate::placeval::{is_irreducible, vp_i128, vp_int, IntPoly, Place};

/// One prime divisor of P^1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum P1Entry {
    /// The point `u / w` (`w = 0` for infinity), gcd 1, `w >= 0`, `u = 1` when `w = 0`.
    Point { u: i128, w: i128 },
    /// The Galois orbit of the roots of an irreducible integer polynomial of degree at least 2.
    Orbit(IntPoly),
}

impl P1Entry {
    pub fn point(u: i128, w: i128) -> Result<Self, FunError> {
        let g = u.gcd(&w);
        if g == 0 {
            return Err(FunError::ZeroPoint);
        }
        let (mut u, mut w) = (u / g, w / g);
        if w < 0 || (w == 0 && u < 0) {
            u = -u;
            w = -w;
        }
        Ok(P1Entry::Point { u, w })
    }

    pub const ZERO: P1Entry = P1Entry::Point { u: 0, w: 1 };
    pub const ONE: P1Entry = P1Entry::Point { u: 1, w: 1 };
    pub const INFINITY: P1Entry = P1Entry::Point { u: 1, w: 0 };

    pub fn degree(&self) -> usize {
        match self {
            P1Entry::Point { .. } => 1,
            P1Entry::Orbit(f) => f.degree(),
        }
    }

    /// Value of the defining binary form at `[b : c]`.
    pub fn form_value(&self, b: i128, c: i128) -> Result<FormValue, FunError> {
        match self {
            P1Entry::Point { u, w } => w
                .checked_mul(b)
                .zip(u.checked_mul(c))
                .and_then(|(s, t)| s.checked_sub(t))
                .map(FormValue::Small)
                .ok_or(FunError::Overflow),
            P1Entry::Orbit(f) => Ok(FormValue::from_big(f.eval_homog(&b.into(), &c.into()))),
        }
    }

    fn log_max_coeff(&self) -> f64 {
        match self {
            P1Entry::Point { u, w } => i128_abs_ln((*u).abs().max((*w).abs())),
            P1Entry::Orbit(f) => big_ln(&f.max_abs_coeff()),
        }
    }
}

/// A form value, kept as a machine integer whenever it fits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FormValue {
    Small(i128),
    Big(BigInt),
}

impl FormValue {
    fn from_big(v: BigInt) -> Self {
        match v.to_i128() {
            Some(s) => FormValue::Small(s),
            None => FormValue::Big(v),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FormValue::Small(s) => *s == 0,
            FormValue::Big(b) => b.is_zero(),
        }
    }

    pub fn ln_abs(&self) -> f64 {
        match self {
            FormValue::Small(s) => i128_abs_ln(*s),
            FormValue::Big(b) => big_ln(b),
        }
    }

    pub fn vp(&self, p: u64) -> u32 {
        match self {
            FormValue::Small(s) => vp_i128(*s, p),
            FormValue::Big(b) => vp_int(b, p),
        }
    }

    /// Distinct primes dividing the value.
    pub fn primes(&self) -> Result<Vec<u128>, FunError> {
        let f = match self {
            FormValue::Small(s) => factorize(*s)?,
            FormValue::Big(b) => factorize_u128(b.abs().to_u128().ok_or(FunError::Overflow)?)?,
        };
        Ok(f.primes().collect())
    }
}

/// A divisor on P^1 (points and orbits) or on P^n (hyperplanes), with multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DivisorSpec {
    P1(Vec<(P1Entry, u32)>),
    Hyperplanes { n: usize, forms: Vec<(Vec<i128>, u32)> },
}

/// Normalizes a linear form: primitive, first nonzero coefficient positive.
pub fn normalize_form(coeffs: &[i128]) -> Result<Vec<i128>, FunError> {
    ProjPoint::new(coeffs.to_vec()).map(|p| p.coords().to_vec())
}

impl DivisorSpec {
    pub fn p1(entries: Vec<(P1Entry, u32)>) -> Result<Self, FunError> {
        for (i, (e, m)) in entries.iter().enumerate() {
            if *m == 0 {
                return Err(FunError::InvalidDivisor("multiplicity must be at least 1".into()));
            }
            if let P1Entry::Orbit(f) = e {
                if f.degree() < 2 || !is_irreducible(f)? || f.leading().is_negative() {
                    return Err(FunError::InvalidDivisor(format!("{f} is not a normalized irreducible polynomial of degree >= 2")));
                }
            }
            if entries[..i].iter().any(|(o, _)| o == e) {
                return Err(FunError::InvalidDivisor("entries must be distinct".into()));
            }
        }
        Ok(DivisorSpec::P1(entries))
    }

    pub fn hyperplanes(forms: Vec<(Vec<i128>, u32)>) -> Result<Self, FunError> {
        let n = forms.first().map(|(f, _)| f.len()).ok_or(FunError::InvalidDivisor("empty divisor".into()))?;
        let mut out: Vec<(Vec<i128>, u32)> = Vec::with_capacity(forms.len());
        for (f, m) in forms {
            if f.len() != n {
                return Err(FunError::DimensionMismatch);
            }
            if m == 0 {
                return Err(FunError::InvalidDivisor("multiplicity must be at least 1".into()));
            }
            let f = normalize_form(&f)?;
            if out.iter().any(|(o, _)| *o == f) {
                return Err(FunError::InvalidDivisor("entries must be distinct".into()));
            }
            out.push((f, m));
        }
        Ok(DivisorSpec::Hyperplanes { n: n - 1, forms: out })
    }

    /// `[0] + [1] + [inf]` on P^1.
    pub fn zero_one_infinity() -> Self {
        DivisorSpec::P1(vec![(P1Entry::ZERO, 1), (P1Entry::ONE, 1), (P1Entry::INFINITY, 1)])
    }

    pub fn dim(&self) -> usize {
        match self {
            DivisorSpec::P1(_) => 1,
            DivisorSpec::Hyperplanes { n, .. } => *n,
        }
    }

    /// Total degree `sum m_i deg(D_i)`.
    pub fn degree(&self) -> u64 {
        match self {
            DivisorSpec::P1(e) => e.iter().map(|(e, m)| e.degree() as u64 * *m as u64).sum(),
            DivisorSpec::Hyperplanes { forms, .. } => forms.iter().map(|(_, m)| *m as u64).sum(),
        }
    }

    /// `(form value, multiplicity, log max |coeff|, degree)` per component; errors when x lies on the support.
    fn components(&self, x: &ProjPoint) -> Result<Vec<(FormValue, u32, f64, usize)>, FunError> {
        if x.dim() != self.dim() {
            return Err(FunError::DimensionMismatch);
        }
        let out = match self {
            DivisorSpec::P1(entries) => {
                let (b, c) = (x.coords()[0], x.coords()[1]);
                entries
                    .iter()
                    .map(|(e, m)| Ok((e.form_value(b, c)?, *m, e.log_max_coeff(), e.degree())))
                    .collect::<Result<Vec<_>, FunError>>()?
            }
            DivisorSpec::Hyperplanes { forms, .. } => forms
                .iter()
                .map(|(f, m)| {
                    let lmax = f.iter().map(|c| c.unsigned_abs()).max().unwrap_or(1);
                    Ok((FormValue::Small(eval_linear(f, x)?), *m, (lmax as f64).ln(), 1))
                })
                .collect::<Result<Vec<_>, FunError>>()?,
        };
        if out.iter().any(|(v, ..)| v.is_zero()) {
            return Err(FunError::OnDivisor);
        }
        Ok(out)
    }

    /// Whether `x` lies on the support.
    pub fn contains(&self, x: &ProjPoint) -> Result<bool, FunError> {
        match self.components(x) {
            Ok(_) => Ok(false),
            Err(FunError::OnDivisor) => Ok(true),
            Err(e) => Err(e),
        }
    }

    /// `lambda_v(D, x) = sum m_i lambda_v(D_i, x)`; exact at primes.
    pub fn weil(&self, x: &ProjPoint, v: Place) -> Result<WeilValue, FunError> {
        let comps = self.components(x)?;
        Ok(match v {
            Place::Prime(p) => WeilValue::at_prime(p, comps.iter().map(|(val, m, ..)| *m as u64 * val.vp(p) as u64).sum()),
            Place::Infinity => {
                let hx = (x.max_abs() as f64).ln();
                let total = comps
                    .iter()
                    .map(|(val, m, lc, d)| *m as f64 * (*d as f64 * hx + lc - val.ln_abs()).max(0.0))
                    .sum();
                WeilValue { place: Place::Infinity, value: total, coeff: None }
            }
        })
    }

    /// Primes at which some component value is divisible by p, ascending.
    pub fn counting_support(&self, x: &ProjPoint) -> Result<Vec<u128>, FunError> {
        let comps = self.components(x)?;
        let mut primes = Vec::new();
        for (val, ..) in &comps {
            primes.extend(val.primes()?);
        }
        primes.sort_unstable();
        primes.dedup();
        Ok(primes)
    }

    /// `N^(1)(D, x) = sum_p min(lambda_p(D, x), log p)`. Every local value is an
    /// integer multiple of `log p`, so the truncation keeps exactly the primes
    /// where it is positive.
    pub fn truncated_counting(&self, x: &ProjPoint) -> Result<FormalLogSum, FunError> {
        Ok(FormalLogSum::from_primes(self.counting_support(x)?))
    }

    /// `h(O(D), x) - sum_v lambda_v(D, x)` over infinity and the finitely many
    /// primes where some local value is nonzero.
    pub fn height_weil_residual(&self, x: &ProjPoint) -> Result<f64, FunError> {
        let h = self.degree() as f64 * (x.max_abs() as f64).ln();
        let mut total = self.weil(x, Place::Infinity)?.value;
        for p in self.counting_support(x)? {
            total += self.weil(x, Place::Prime(p as u64))?.value;
        }
        Ok(h - total)
    }
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            '+' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn split_multiplicity(term: &str) -> Result<(u32, &str), FunError> {
    let term = term.trim();
    match term.split_once('*') {
        Some((m, rest)) if !m.contains('[') => {
            let m = m.trim().parse().map_err(|_| FunError::Parse(format!("bad multiplicity {m:?}")))?;
            Ok((m, rest.trim()))
        }
        _ => Ok((1, term)),
    }
}

impl FromStr for DivisorSpec {
    type Err = FunError;

    /// `p1:[0]+[1]+[inf]`, `p1:2*[3/2]+[poly:[-2,0,1]]`, or `pn:hyp:[1,0,0]+hyp:[0,1,0]`.
    fn from_str(s: &str) -> Result<Self, FunError> {
        let s = s.trim();
        if let Some(body) = s.strip_prefix("p1:") {
            let mut entries = Vec::new();
            for term in split_top_level(body) {
                let (m, t) = split_multiplicity(term)?;
                let inner = t
                    .strip_prefix('[')
                    .and_then(|r| r.strip_suffix(']'))
                    .ok_or_else(|| FunError::Parse(format!("expected [..], got {t:?}")))?
                    .trim();
                let entry = match inner {
                    "inf" | "infty" | "oo" | "∞" => P1Entry::INFINITY,
                    _ if inner.starts_with("poly:") => {
                        let f = IntPoly::parse(&inner[5..]).map_err(FunError::Place)?.primitive();
                        if f.degree() == 1 {
                            let c = f.coeffs();
                            P1Entry::point(
                                (-c[0].clone()).to_i128().ok_or(FunError::Overflow)?,
                                c[1].to_i128().ok_or(FunError::Overflow)?,
                            )?
                        } else {
                            P1Entry::Orbit(f)
                        }
                    }
                    _ => {
                        let r = crate::placeval::parse_rational(inner).map_err(FunError::Place)?;
                        P1Entry::point(
                            r.numer().to_i128().ok_or(FunError::Overflow)?,
                            r.denom().to_i128().ok_or(FunError::Overflow)?,
                        )?
                    }
                };
                entries.push((entry, m));
            }
            return DivisorSpec::p1(entries);
        }
        if let Some(body) = s.strip_prefix("pn:") {
            let mut forms = Vec::new();
            for term in split_top_level(body) {
                let (m, t) = split_multiplicity(term)?;
                let t = t.strip_prefix("hyp:").ok_or_else(|| FunError::Parse(format!("expected hyp:[..], got {t:?}")))?;
                let coords = t
                    .trim()
                    .strip_prefix('[')
                    .and_then(|r| r.strip_suffix(']'))
                    .ok_or_else(|| FunError::Parse(format!("expected [..], got {t:?}")))?
                    .split(',')
                    .map(|c| c.trim().parse::<i128>().map_err(|_| FunError::Parse(format!("bad coefficient {c:?}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                forms.push((coords, m));
            }
            return DivisorSpec::hyperplanes(forms);
        }
        Err(FunError::Parse(format!("divisor must start with p1: or pn:, got {s:?}")))
    }
}

impl fmt::Display for DivisorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mult = |f: &mut fmt::Formatter<'_>, m: u32| if m > 1 { write!(f, "{m}*") } else { Ok(()) };
        match self {
            DivisorSpec::P1(entries) => {
                write!(f, "p1:")?;
                for (i, (e, m)) in entries.iter().enumerate() {
                    if i > 0 {
                        write!(f, "+")?;
                    }
                    mult(f, *m)?;
                    match e {
                        P1Entry::Point { w: 0, .. } => write!(f, "[inf]")?,
                        P1Entry::Point { u, w: 1 } => write!(f, "[{u}]")?,
                        P1Entry::Point { u, w } => write!(f, "[{u}/{w}]")?,
                        P1Entry::Orbit(p) => write!(f, "[poly:{p}]")?,
                    }
                }
                Ok(())
            }
            DivisorSpec::Hyperplanes { forms, .. } => {
                write!(f, "pn:")?;
                for (i, (c, m)) in forms.iter().enumerate() {
                    if i > 0 {
                        write!(f, "+")?;
                    }
                    mult(f, *m)?;
                    let body: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                    write!(f, "hyp:[{}]", body.join(","))?;
                }
                Ok(())
            }
        }
    }
}
