//! Bound expressions with explicit effective constants, closed-form fitting of
//! those constants, and crossover search between bound shapes.
//!
//! Everything is evaluated in `f64`. Overflow saturates to `+inf`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use thiserror::Error;

use crate::exactnum::{logstar, logstar_iter};
use crate::placeval::{ln_abs_rational, Place};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("the product of powers equals 1")]
    ProductIsOne,
    #[error("empty sample")]
    EmptySample,
    #[error("no crossover below 1e300")]
    NoCrossoverInRange,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Thm1,
    Thm1Bis,
    CoroAbc,
    StewartYu,
    StewartYuP,
    Coromain,
    EgLemma,
    LwConj,
    LwLemma,
}

impl Variant {
    pub const ALL: [Variant; 9] = [
        Variant::Thm1,
        Variant::Thm1Bis,
        Variant::CoroAbc,
        Variant::StewartYu,
        Variant::StewartYuP,
        Variant::Coromain,
        Variant::EgLemma,
        Variant::LwConj,
        Variant::LwLemma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Thm1 => "thm1",
            Variant::Thm1Bis => "thm1bis",
            Variant::CoroAbc => "coro-abc",
            Variant::StewartYu => "sy",
            Variant::StewartYuP => "sy-p",
            Variant::Coromain => "coromain",
            Variant::EgLemma => "eg",
            Variant::LwConj => "lw",
            Variant::LwLemma => "lw-lemma",
        }
    }

    /// Lower-bound variants: the fitted constant is the largest one that still holds.
    pub fn is_lower_bound(self) -> bool {
        self == Variant::LwConj
    }

    /// Variants where the constant scales a positive quantity, so `lhs <= 0` holds for every constant.
    fn is_multiplicative(self) -> bool {
        matches!(self, Variant::Thm1 | Variant::Thm1Bis | Variant::StewartYuP | Variant::EgLemma)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = BoundError;

    fn from_str(s: &str) -> Result<Self, BoundError> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s.trim())
            .ok_or_else(|| BoundError::BadParams(format!("unknown variant {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundParams {
    pub epsilon: f64,
    pub kappa: f64,
    pub place: Place,
    pub variant: Variant,
}

impl BoundParams {
    /// The Lang-Waldschmidt conjecture also makes sense at `epsilon = 0`; every other variant needs `epsilon > 0`.
    pub fn new(variant: Variant, epsilon: f64, kappa: f64, place: Place) -> Result<Self, BoundError> {
        let eps_ok = if variant == Variant::LwConj { epsilon >= 0.0 } else { epsilon > 0.0 };
        if !eps_ok || !epsilon.is_finite() {
            return Err(BoundError::BadParams(format!("epsilon = {epsilon}")));
        }
        if kappa.is_nan() {
            return Err(BoundError::BadParams("kappa is NaN".into()));
        }
        Ok(BoundParams { epsilon, kappa, place, variant })
    }
}

fn check_eps(eps: f64) -> Result<(), BoundError> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(BoundError::BadParams(format!("epsilon = {eps}")))
    }
}

fn check_nonneg(name: &str, x: f64) -> Result<(), BoundError> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(BoundError::BadParams(format!("{name} = {x}")))
    }
}

/// `(1+eps) log* t / log*_2 t * log*_3 t`.
pub fn thm1_exponent(t: f64, eps: f64) -> f64 {
    thm1_exponent_from_log(t.ln(), eps)
}

/// [`thm1_exponent`] given `log t`.
pub fn thm1_exponent_from_log(ln_t: f64, eps: f64) -> f64 {
    let l1 = ln_t.max(1.0);
    let l2 = logstar(l1);
    (1.0 + eps) * l1 / l2 * logstar(l2)
}

/// `(1+eps) N / log* N * log*_2 N`.
pub fn thm1bis_exponent(n1: f64, eps: f64) -> f64 {
    (1.0 + eps) * n1 / logstar(n1) * logstar_iter(n1, 2)
}

/// `log*(h) exp((1+eps) log* R / log*_2 R * log*_3 R + kappa)`.
pub fn thm1_rhs(h: f64, rad: f64, eps: f64, kappa: f64) -> Result<f64, BoundError> {
    check_eps(eps)?;
    if !(rad >= 1.0) {
        return Err(BoundError::BadParams(format!("R = {rad}")));
    }
    Ok(logstar(h) * (thm1_exponent(rad, eps) + kappa).exp())
}

/// `log*(h) exp((1+eps) N / log* N * log*_2 N + kappa)`.
pub fn thm1bis_rhs(h: f64, n1: f64, eps: f64, kappa: f64) -> Result<f64, BoundError> {
    check_eps(eps)?;
    check_nonneg("N", n1)?;
    Ok(logstar(h) * (thm1bis_exponent(n1, eps) + kappa).exp())
}

/// `R^((1+eps) log*_3 R / log*_2 R)`.
pub fn coro_abc_power(rad: f64, eps: f64) -> f64 {
    rad.powf((1.0 + eps) * logstar_iter(rad, 3) / logstar_iter(rad, 2))
}

/// Logarithm of the bound on c: `log a + kappa R^((1+eps) log*_3 R / log*_2 R)`.
pub fn coro_abc_log_rhs(a: f64, rad: f64, eps: f64, kappa: f64) -> Result<f64, BoundError> {
    check_eps(eps)?;
    if !(a >= 1.0 && rad >= 1.0) {
        return Err(BoundError::BadParams(format!("a = {a}, R = {rad}")));
    }
    Ok(a.ln() + kappa * coro_abc_power(rad, eps))
}

/// `a exp(kappa R^((1+eps) log*_3 R / log*_2 R))`.
pub fn coro_abc_rhs(a: f64, rad: f64, eps: f64, kappa: f64) -> Result<f64, BoundError> {
    coro_abc_log_rhs(a, rad, eps, kappa).map(f64::exp)
}

/// The second form, valid when `a < c^(1-eta)`: logarithm of `exp(kappa R^(...) / eta)`.
pub fn coro_abc_eta_log_rhs(eta: f64, rad: f64, eps: f64, kappa: f64) -> Result<f64, BoundError> {
    check_eps(eps)?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(BoundError::BadParams(format!("eta = {eta}")));
    }
    Ok(kappa * coro_abc_power(rad, eps) / eta)
}

/// `R^(1/3) (log R)^3`.
pub fn stewart_yu_shape(rad: f64) -> f64 {
    rad.cbrt() * rad.ln().powi(3)
}

/// Logarithm of `exp(kappa R^(1/3) (log R)^3)`.
pub fn stewart_yu_log_rhs(rad: f64, kappa: f64) -> Result<f64, BoundError> {
    if !(rad >= 2.0) {
        return Err(BoundError::BadParams(format!("R = {rad}")));
    }
    Ok(kappa * stewart_yu_shape(rad))
}

pub fn stewart_yu_rhs(rad: f64, kappa: f64) -> Result<f64, BoundError> {
    stewart_yu_log_rhs(rad, kappa).map(f64::exp)
}

/// Logarithm of `exp(p' R^(kappa log*_3 R / log*_2 R))`.
pub fn stewart_yu_p_log_rhs(p_min: f64, rad: f64, kappa: f64) -> Result<f64, BoundError> {
    if !(p_min >= 1.0 && rad >= 1.0) {
        return Err(BoundError::BadParams(format!("p' = {p_min}, R = {rad}")));
    }
    Ok(p_min * rad.powf(kappa * logstar_iter(rad, 3) / logstar_iter(rad, 2)))
}

/// `exp(p' R^(kappa log*_3 R / log*_2 R))` with `p'` the least of the largest prime factors of a, b, c.
pub fn stewart_yu_p_rhs(a: u128, b: u128, c: u128, kappa: f64) -> Result<f64, BoundError> {
    let (p_min, rad) = sy_p_inputs(a, b, c)?;
    stewart_yu_p_log_rhs(p_min, rad, kappa).map(f64::exp)
}

/// `(p', rad(abc))` for a coprime triple.
pub fn sy_p_inputs(a: u128, b: u128, c: u128) -> Result<(f64, f64), BoundError> {
    use crate::exactnum::{factorize_u128, largest_prime_factor};
    let bad = |e: crate::exactnum::NumError| BoundError::BadParams(e.to_string());
    let p_min = [a, b, c].iter().map(|&n| largest_prime_factor(n).map_err(bad)).collect::<Result<Vec<_>, _>>()?;
    let rad: f64 = [a, b, c]
        .iter()
        .map(|&n| factorize_u128(n).map(|f| f.radical() as f64).map_err(bad))
        .product::<Result<f64, _>>()?;
    Ok((*p_min.iter().min().unwrap_or(&1) as f64, rad))
}

/// `exp(eps N) + (log* h_D)^(1+eps)`.
pub fn coromain_rhs(n1: f64, h_d: f64, eps: f64) -> Result<f64, BoundError> {
    check_eps(eps)?;
    check_nonneg("N", n1)?;
    check_nonneg("h", h_d)?;
    Ok((eps * n1).exp() + logstar(h_d).powf(1.0 + eps))
}

/// `n (log* n) (16 e d)^(3n) (log* h(x)) prod h(q_j)` without the constant.
pub fn eg_shape(n: u32, d: u32, gen_heights: &[f64], hx: f64) -> Result<f64, BoundError> {
    if n == 0 || d == 0 || gen_heights.len() != n as usize || gen_heights.iter().any(|h| !(*h > 0.0)) {
        return Err(BoundError::BadParams(format!("n = {n}, d = {d}, heights = {gen_heights:?}")));
    }
    let n_f = n as f64;
    let base = 16.0 * std::f64::consts::E * d as f64;
    Ok(n_f * logstar(n_f) * base.powf(3.0 * n_f) * logstar(hx) * gen_heights.iter().product::<f64>())
}

/// `kappa_0 n (log* n) (16 e d)^(3n) (log* h(x)) prod h(q_j)`.
pub fn eg_rhs(n: u32, d: u32, gen_heights: &[f64], hx: f64, kappa0: f64) -> Result<f64, BoundError> {
    check_nonneg("kappa_0", kappa0)?;
    Ok(kappa0 * eg_shape(n, d, gen_heights, hx)?)
}

fn check_lw(a: &[u64], b: &[i64]) -> Result<(), BoundError> {
    if a.is_empty() || a.len() != b.len() || a.iter().any(|&x| x == 0) || b.iter().any(|&x| x == 0) {
        return Err(BoundError::BadParams(format!("a = {a:?}, b = {b:?}")));
    }
    Ok(())
}

/// `max |b_j| / |b_1 ... b_n a_1 ... a_n|^(1+eps)`, the conjectured bound without the constant.
pub fn lw_shape(a: &[u64], b: &[i64], eps: f64) -> Result<f64, BoundError> {
    check_lw(a, b)?;
    if !(eps >= 0.0) {
        return Err(BoundError::BadParams(format!("epsilon = {eps}")));
    }
    let bmax = b.iter().map(|x| x.unsigned_abs()).max().unwrap_or(1) as f64;
    let log_prod: f64 = a.iter().map(|&x| (x as f64).ln()).sum::<f64>() + b.iter().map(|&x| (x.unsigned_abs() as f64).ln()).sum::<f64>();
    Ok(bmax * (-(1.0 + eps) * log_prod).exp())
}

/// `C max |b_j| / |b_1 ... b_n a_1 ... a_n|^(1+eps)`.
pub fn lw_rhs(a: &[u64], b: &[i64], eps: f64, c: f64) -> Result<f64, BoundError> {
    Ok(c * lw_shape(a, b, eps)?)
}

/// `|a_1^b_1 ... a_n^b_n - 1|`, computed exactly before rounding.
pub fn lw_lhs(a: &[u64], b: &[i64]) -> Result<f64, BoundError> {
    check_lw(a, b)?;
    let mut prod = BigRational::one();
    for (&ai, &bi) in a.iter().zip(b) {
        let p = num_traits::pow(BigInt::from(ai), bi.unsigned_abs() as usize);
        let p = BigRational::from_integer(p);
        prod = if bi > 0 { prod * p } else { prod / p };
    }
    let diff = (prod - BigRational::one()).abs();
    if diff == BigRational::from_integer(0.into()) {
        return Err(BoundError::ProductIsOne);
    }
    Ok(diff.to_f64().filter(|f| f.is_finite() && *f > 0.0).unwrap_or_else(|| ln_abs_rational(&diff).exp()))
}

/// `(1+eps) N + eps h + C`.
pub fn lw_lemma_rhs(n1: f64, hx: f64, eps: f64, c: f64) -> Result<f64, BoundError> {
    check_eps(eps)?;
    check_nonneg("N", n1)?;
    check_nonneg("h", hx)?;
    Ok((1.0 + eps) * n1 + eps * hx + c)
}

/// The per-record inputs that determine a bound's shape.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// `h(x)` and `rad(bc)`.
    Thm1 { h: f64, rad: f64 },
    /// `h(x)` and `N^(1)([0]+[inf], x)`.
    Thm1Bis { h: f64, n1: f64 },
    /// The left side is `log c`.
    CoroAbc { a: f64, rad: f64 },
    /// The left side is `log c`.
    StewartYu { rad: f64 },
    /// The left side is `log c`.
    StewartYuP { p_min: f64, rad: f64 },
    Coromain { n1: f64, h_d: f64 },
    EgLemma { n: u32, d: u32, gen_heights: Vec<f64>, hx: f64 },
    /// The left side is `|prod a_j^b_j - 1|`.
    LwConj { a: Vec<u64>, b: Vec<i64> },
    LwLemma { n1: f64, hx: f64 },
}

impl Shape {
    pub fn variant(&self) -> Variant {
        match self {
            Shape::Thm1 { .. } => Variant::Thm1,
            Shape::Thm1Bis { .. } => Variant::Thm1Bis,
            Shape::CoroAbc { .. } => Variant::CoroAbc,
            Shape::StewartYu { .. } => Variant::StewartYu,
            Shape::StewartYuP { .. } => Variant::StewartYuP,
            Shape::Coromain { .. } => Variant::Coromain,
            Shape::EgLemma { .. } => Variant::EgLemma,
            Shape::LwConj { .. } => Variant::LwConj,
            Shape::LwLemma { .. } => Variant::LwLemma,
        }
    }

    /// The right-hand side at constant `kappa`, in the same units as the record's left side.
    pub fn rhs(&self, eps: f64, kappa: f64) -> Result<f64, BoundError> {
        match self {
            Shape::Thm1 { h, rad } => thm1_rhs(*h, *rad, eps, kappa),
            Shape::Thm1Bis { h, n1 } => thm1bis_rhs(*h, *n1, eps, kappa),
            Shape::CoroAbc { a, rad } => coro_abc_log_rhs(*a, *rad, eps, kappa),
            Shape::StewartYu { rad } => stewart_yu_log_rhs(*rad, kappa),
            Shape::StewartYuP { p_min, rad } => stewart_yu_p_log_rhs(*p_min, *rad, kappa),
            Shape::Coromain { n1, h_d } => Ok(coromain_rhs(*n1, *h_d, eps)? + kappa),
            Shape::EgLemma { n, d, gen_heights, hx } => eg_rhs(*n, *d, gen_heights, *hx, kappa),
            Shape::LwConj { a, b } => lw_rhs(a, b, eps, kappa),
            Shape::LwLemma { n1, hx } => lw_lemma_rhs(*n1, *hx, eps, kappa),
        }
    }

    /// The constant at which the bound is an equality for this record, or
    /// `None` when every constant works (or none does).
    pub fn invert(&self, lhs: f64, eps: f64) -> Result<Option<f64>, BoundError> {
        if self.variant().is_multiplicative() && lhs <= 0.0 {
            return Ok(None);
        }
        let k = match self {
            Shape::Thm1 { h, rad } => {
                thm1_rhs(*h, *rad, eps, 0.0)?;
                lhs.ln() - logstar(*h).ln() - thm1_exponent(*rad, eps)
            }
            Shape::Thm1Bis { h, n1 } => {
                thm1bis_rhs(*h, *n1, eps, 0.0)?;
                lhs.ln() - logstar(*h).ln() - thm1bis_exponent(*n1, eps)
            }
            Shape::CoroAbc { a, rad } => {
                coro_abc_log_rhs(*a, *rad, eps, 0.0)?;
                (lhs - a.ln()) / coro_abc_power(*rad, eps)
            }
            Shape::StewartYu { rad } => {
                stewart_yu_log_rhs(*rad, 0.0)?;
                lhs / stewart_yu_shape(*rad)
            }
            Shape::StewartYuP { p_min, rad } => {
                stewart_yu_p_log_rhs(*p_min, *rad, 0.0)?;
                let t = logstar_iter(*rad, 3) / logstar_iter(*rad, 2) * rad.ln();
                if t <= 0.0 {
                    // R = 1 leaves the bound at p' for every kappa
                    return Ok(None);
                }
                (lhs / p_min).ln() / t
            }
            Shape::Coromain { n1, h_d } => lhs - coromain_rhs(*n1, *h_d, eps)?,
            Shape::EgLemma { n, d, gen_heights, hx } => lhs / eg_shape(*n, *d, gen_heights, *hx)?,
            Shape::LwConj { a, b } => lhs / lw_shape(a, b, eps)?,
            Shape::LwLemma { n1, hx } => lhs - lw_lemma_rhs(*n1, *hx, eps, 0.0)?,
        };
        Ok(k.is_finite().then_some(k))
    }
}

/// `lhs <= rhs` up to a relative tolerance of 1e-9 (reversed for lower-bound variants).
pub fn holds(variant: Variant, lhs: f64, rhs: f64) -> bool {
    let tol = 1e-9 * rhs.abs().max(1.0);
    if variant.is_lower_bound() {
        lhs >= rhs - tol
    } else {
        lhs <= rhs + tol
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    /// The extremal constant: least for upper bounds, greatest for lower bounds.
    /// `-inf` when every record is vacuous.
    pub kappa_min: f64,
    /// Index of the record attaining it.
    pub argmax_record: Option<usize>,
    pub sample_size: usize,
}

impl FitResult {
    pub fn vacuous(sample_size: usize) -> Self {
        FitResult { kappa_min: f64::NEG_INFINITY, argmax_record: None, sample_size }
    }

    /// Combines two partial fits; ties keep the smaller record index.
    pub fn merge(self, other: FitResult, lower: bool) -> FitResult {
        let sample_size = self.sample_size + other.sample_size;
        let better = match (self.argmax_record, other.argmax_record) {
            (None, _) => false,
            (_, None) => true,
            (Some(i), Some(j)) => {
                let (a, b) = if lower { (-self.kappa_min, -other.kappa_min) } else { (self.kappa_min, other.kappa_min) };
                a > b || (a == b && i < j)
            }
        };
        let best = if better { self } else { other };
        FitResult { sample_size, ..best }
    }

    /// Folds in one inverted record.
    pub fn push(&mut self, index: usize, kappa: Option<f64>, lower: bool) {
        self.sample_size += 1;
        if let Some(k) = kappa {
            let better = match self.argmax_record {
                None => true,
                Some(_) if lower => k < self.kappa_min,
                Some(_) => k > self.kappa_min,
            };
            if better {
                self.kappa_min = k;
                self.argmax_record = Some(index);
            }
        }
    }
}

/// The extremal constant over `(lhs, shape)` records of one variant.
pub fn fit_kappa(records: &[(f64, Shape)], variant: Variant, eps: f64) -> Result<FitResult, BoundError> {
    if records.is_empty() {
        return Err(BoundError::EmptySample);
    }
    let lower = variant.is_lower_bound();
    let mut fit = if lower {
        FitResult { kappa_min: f64::INFINITY, argmax_record: None, sample_size: 0 }
    } else {
        FitResult::vacuous(0)
    };
    for (i, (lhs, shape)) in records.iter().enumerate() {
        if shape.variant() != variant {
            return Err(BoundError::BadParams(format!("record {i} is not a {variant} record")));
        }
        fit.push(i, shape.invert(*lhs, eps)?, lower);
    }
    Ok(fit)
}

/// A bound shape as a function of `log R`, used by [`crossover`].
pub type LogShape<'a> = &'a dyn Fn(f64) -> f64;

/// Grid ratio of the crossover search.
pub const CROSSOVER_FACTOR: f64 = 1.1;
/// Upper end of the crossover search, `log(1e300)`.
pub const CROSSOVER_LOG_MAX: f64 = 300.0 * std::f64::consts::LN_10;

/// Least `R` on the grid `2 * 1.1^k` with `A(R) < B(R)`, `A(10R) < B(10R)` and
/// `A(100R) < B(100R)`. Shapes take `log R`.
pub fn crossover(a: LogShape<'_>, b: LogShape<'_>) -> Result<f64, BoundError> {
    let below = |l: f64| a(l) < b(l);
    let step = CROSSOVER_FACTOR.ln();
    let l10 = std::f64::consts::LN_10;
    let mut k = 0u32;
    loop {
        let l = 2f64.ln() + k as f64 * step;
        if l + 2.0 * l10 > CROSSOVER_LOG_MAX {
            return Err(BoundError::NoCrossoverInRange);
        }
        if below(l) && below(l + l10) && below(l + 2.0 * l10) {
            return Ok(l.exp());
        }
        k += 1;
    }
}

/// Logarithm of the exponent of a c-bound as a function of `log R`, for the
/// variants whose bound on c depends on R alone. Sy-p uses `p' = 1`.
pub fn log_exponent_shape(variant: Variant, eps: f64, kappa: f64) -> Result<impl Fn(f64) -> f64, BoundError> {
    if !(kappa > 0.0) {
        return Err(BoundError::BadParams(format!("kappa = {kappa}")));
    }
    let lk = kappa.ln();
    let f: Box<dyn Fn(f64) -> f64> = match variant {
        Variant::CoroAbc => {
            check_eps(eps)?;
            Box::new(move |l: f64| lk + (1.0 + eps) * log_iter_from_log(l, 3) / log_iter_from_log(l, 2) * l)
        }
        Variant::StewartYu => Box::new(move |l: f64| lk + l / 3.0 + 3.0 * l.ln()),
        Variant::StewartYuP => Box::new(move |l: f64| kappa * log_iter_from_log(l, 3) / log_iter_from_log(l, 2) * l),
        v => return Err(BoundError::BadParams(format!("{v} has no shape in R alone"))),
    };
    Ok(f)
}

/// `log*_r R` given `log R`, valid for `R` beyond the f64 range.
fn log_iter_from_log(l: f64, r: u32) -> f64 {
    if l <= 1.0 {
        return 1.0;
    }
    if r <= 1 {
        l
    } else {
        logstar_iter(l, r - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn thm1_examples() {
        let l9 = 9f64.ln();
        assert!(close(thm1_rhs(l9, 6.0, 1.0, 0.0).unwrap(), 36.0, 1e-12));
        assert!(close(thm1_rhs(0.0, 1.0, 1.0, 0.0).unwrap(), 1f64.exp().powi(2), 1e-12));
        assert!(close(thm1_rhs(l9, 6.0, 1.0, 1.0).unwrap(), 36.0 * 1f64.exp(), 1e-12));
        assert!(thm1_rhs(l9, 0.5, 1.0, 0.0).is_err());
        assert!(thm1_rhs(l9, 6.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn thm1bis_examples() {
        let (l9, l6) = (9f64.ln(), 6f64.ln());
        assert!(close(thm1bis_rhs(l9, l6, 1.0, 0.0).unwrap(), 36.0, 1e-12));
        assert!(close(thm1bis_rhs(123.0, 0.0, 1.0, 0.0).unwrap(), 123f64.ln(), 1e-12));
        // 6^1.5
        assert!(close(thm1bis_rhs(l9, l6, 0.5, 0.0).unwrap(), 14.696938456699067, 1e-12));
    }

    #[test]
    fn coro_abc_examples() {
        assert!(close(coro_abc_log_rhs(1.0, 6.0, 1.0, 1.0).unwrap(), 36.0, 1e-12));
        assert_eq!(coro_abc_rhs(1.0, 1.0, 1.0, 0.0).unwrap(), 1.0);
        let l30 = 30f64.ln();
        let expected = 5f64.ln() + 30f64.powf(2.0 / l30.ln());
        assert!(close(coro_abc_log_rhs(5.0, 30.0, 1.0, 1.0).unwrap(), expected, 1e-12));
        assert!((coro_abc_log_rhs(5.0, 30.0, 1.0, 1.0).unwrap() - 5f64.ln() - 259.0).abs() < 1.0);
        assert!(close(coro_abc_eta_log_rhs(0.5, 6.0, 1.0, 1.0).unwrap(), 72.0, 1e-12));
    }

    #[test]
    fn stewart_yu_examples() {
        let l6 = 6f64.ln();
        assert!(close(stewart_yu_log_rhs(6.0, 1.0).unwrap(), 6f64.cbrt() * l6 * l6 * l6, 1e-12));
        assert!((stewart_yu_log_rhs(6.0, 1.0).unwrap() - 10.4526).abs() < 1e-4);
        assert!(close(stewart_yu_p_rhs(1, 8, 9, 1.0).unwrap(), 6f64.exp(), 1e-12));
        assert_eq!(stewart_yu_rhs(std::f64::consts::E, 0.0).unwrap(), 1.0);
        assert!(stewart_yu_rhs(1.0, 1.0).is_err());
        assert_eq!(sy_p_inputs(5, 27, 32).unwrap(), (2.0, 30.0));
    }

    #[test]
    fn coromain_examples() {
        let (l6, l9) = (6f64.ln(), 9f64.ln());
        assert!((coromain_rhs(l6, 2.0 * l9, 1.0).unwrap() - 8.191).abs() < 1e-3);
        assert_eq!(coromain_rhs(0.0, 0.0, 1.0).unwrap(), 2.0);
        assert!((coromain_rhs(l6, 2.0 * l9, 0.5).unwrap() - 4.250).abs() < 1e-3);
    }

    #[test]
    fn eg_examples() {
        let l2 = 2f64.ln();
        let base = (16.0 * std::f64::consts::E).powi(3);
        assert!((base - 82_270.0).abs() < 1.0);
        assert!(close(eg_rhs(1, 1, &[l2], 8f64.ln(), 1.0).unwrap(), base * l2, 1e-12));
        assert!((eg_rhs(1, 1, &[l2], 8f64.ln(), 1.0).unwrap() - 57_025.0).abs() < 1.0);
        assert_eq!(eg_rhs(1, 1, &[l2], 1.0, 0.0).unwrap(), 0.0);
        let v = eg_rhs(2, 2, &[l2, 3f64.ln()], std::f64::consts::E, 1.0).unwrap();
        let expected = 2.0 * 1.0 * (32.0 * std::f64::consts::E).powi(6) * l2 * 3f64.ln();
        assert!(close(v, expected, 1e-12));
        assert!(eg_rhs(0, 1, &[], 1.0, 1.0).is_err());
    }

    #[test]
    fn lw_examples() {
        assert!(close(lw_rhs(&[2, 3], &[3, -2], 0.0, 1.0).unwrap(), 1.0 / 12.0, 1e-12));
        assert!(close(lw_lhs(&[2, 3], &[3, -2]).unwrap(), 1.0 / 9.0, 1e-15));
        assert!(close(lw_rhs(&[2], &[1], 0.0, 1.0).unwrap(), 0.5, 1e-12));
        assert_eq!(lw_lhs(&[2], &[1]).unwrap(), 1.0);
        assert_eq!(lw_lhs(&[4, 2], &[1, -2]), Err(BoundError::ProductIsOne));
        let (l6, l9) = (6f64.ln(), 9f64.ln());
        assert!((lw_lemma_rhs(l6, l9, 1.0, 0.0).unwrap() - 5.781).abs() < 1e-3);
        assert!(holds(Variant::LwConj, 1.0 / 9.0, 1.0 / 12.0));
    }

    #[test]
    fn fit_examples() {
        let (l6, l9) = (6f64.ln(), 9f64.ln());
        let rec = (l9, Shape::Thm1Bis { h: l9, n1: l6 });
        let f = fit_kappa(&[rec.clone()], Variant::Thm1Bis, 1.0).unwrap();
        assert!((f.kappa_min - (l9.ln() - 2.0 * l6)).abs() < 1e-12);
        assert!((f.kappa_min + 2.796).abs() < 1e-3);
        let g = fit_kappa(&[rec.clone(), rec.clone()], Variant::Thm1Bis, 1.0).unwrap();
        assert_eq!((g.kappa_min, g.argmax_record), (f.kappa_min, Some(0)));
        let v = fit_kappa(&[(0.0, Shape::Thm1Bis { h: l9, n1: l6 })], Variant::Thm1Bis, 1.0).unwrap();
        assert_eq!(v.kappa_min, f64::NEG_INFINITY);
        assert_eq!(fit_kappa(&[], Variant::Thm1Bis, 1.0), Err(BoundError::EmptySample));
        assert!(fit_kappa(&[rec], Variant::Thm1, 1.0).is_err());
    }

    #[test]
    fn lw_fit_takes_min() {
        let recs: Vec<(f64, Shape)> = [(&[2u64, 3][..], &[3i64, -2][..]), (&[2][..], &[1][..])]
            .iter()
            .map(|(a, b)| (lw_lhs(a, b).unwrap(), Shape::LwConj { a: a.to_vec(), b: b.to_vec() }))
            .collect();
        let f = fit_kappa(&recs, Variant::LwConj, 1.0).unwrap();
        // 1/9 * 36^2 / 3 = 48 and 1 * 2^2 / 1 = 4
        assert!(close(f.kappa_min, 4.0, 1e-12));
        assert_eq!(f.argmax_record, Some(1));
    }

    #[test]
    fn crossover_examples() {
        let one = |_: f64| 1.0;
        let two = |_: f64| 2.0;
        assert!(close(crossover(&one, &two).unwrap(), 2.0, 1e-12));
        assert_eq!(crossover(&one, &one), Err(BoundError::NoCrossoverInRange));
        let a = log_exponent_shape(Variant::CoroAbc, 1.0, 1.0).unwrap();
        let b = log_exponent_shape(Variant::StewartYu, 1.0, 1.0).unwrap();
        let r0 = crossover(&a, &b).unwrap();
        for m in [1.0, 10.0, 100.0] {
            let l = (r0 * m).ln();
            let ea = 2.0 * log_iter_from_log(l, 3) / log_iter_from_log(l, 2) * l;
            let eb = l / 3.0 + 3.0 * l.ln();
            assert!(ea < eb);
        }
        assert!(r0 > 10.0 && r0 < 1000.0, "{r0}");
        assert!(log_exponent_shape(Variant::Thm1, 1.0, 1.0).is_err());
    }

    #[test]
    fn shape_ratio_decreases_on_window() {
        // the subexponential exponent over the Stewart-Yu exponent falls between 10^2 and 10^5
        let a = log_exponent_shape(Variant::CoroAbc, 1.0, 1.0).unwrap();
        let b = log_exponent_shape(Variant::StewartYu, 1.0, 1.0).unwrap();
        let d = |k: i32| {
            let l = k as f64 * std::f64::consts::LN_10;
            a(l) - b(l)
        };
        for k in 2..5 {
            assert!(d(k + 1) < d(k));
        }
    }

    #[test]
    fn variant_names() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("thm2".parse::<Variant>().is_err());
        assert!(BoundParams::new(Variant::Thm1, 0.0, 0.0, Place::Infinity).is_err());
        assert!(BoundParams::new(Variant::LwConj, 0.0, 1.0, Place::Infinity).is_ok());
    }

    proptest! {
        #[test]
        fn monotone_in_kappa_and_eps(h in 0.0f64..50.0, n1 in 0.0f64..10.0, eps in 0.05f64..2.0, k in -5.0f64..5.0) {
            let shapes = [
                Shape::Thm1 { h, rad: n1.exp() + 1.0 },
                Shape::Thm1Bis { h, n1 },
                Shape::CoroAbc { a: 1.0 + h, rad: 2.0 + n1 },
                Shape::Coromain { n1, h_d: h },
                Shape::LwLemma { n1, hx: h },
            ];
            for s in &shapes {
                prop_assert!(s.rhs(eps, k + 0.01).unwrap() > s.rhs(eps, k).unwrap());
            }
            // epsilon: positive exponents only
            for s in &shapes[..2] {
                prop_assert!(s.rhs(eps + 0.01, k).unwrap() >= s.rhs(eps, k).unwrap());
            }
            let cm = Shape::Coromain { n1: n1 + 0.1, h_d: h + 3.0 };
            prop_assert!(cm.rhs(eps + 0.01, 0.0).unwrap() > cm.rhs(eps, 0.0).unwrap());
        }

        #[test]
        fn inversion_is_consistent(lhs in 0.01f64..100.0, h in 0.0f64..50.0, n1 in 0.0f64..10.0, eps in 0.05f64..2.0) {
            let shapes = [
                Shape::Thm1 { h, rad: n1.exp() + 1.0 },
                Shape::Thm1Bis { h, n1 },
                Shape::CoroAbc { a: 1.0, rad: 2.0 + n1 },
                Shape::StewartYu { rad: 2.0 + n1 },
                Shape::StewartYuP { p_min: 1.0, rad: 2.0 + n1 },
                Shape::Coromain { n1, h_d: h },
                Shape::EgLemma { n: 1, d: 1, gen_heights: vec![1.0 + h], hx: n1 },
                Shape::LwLemma { n1, hx: h },
            ];
            for s in &shapes {
                let k = s.invert(lhs, eps).unwrap().unwrap();
                let rhs = s.rhs(eps, k).unwrap();
                prop_assert!(close(rhs, lhs, 1e-9), "{:?} {} {}", s, rhs, lhs);
                prop_assert!(holds(s.variant(), lhs, rhs));
                let lowered = if s.variant() == Variant::EgLemma { k * (1.0 - 1e-6) } else { k - 1e-6 * k.abs().max(1.0) };
                prop_assert!(!holds(s.variant(), lhs, s.rhs(eps, lowered).unwrap()));
            }
        }
    }
}
