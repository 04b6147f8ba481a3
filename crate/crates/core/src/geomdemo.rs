//! Rational maps given by ratios of products of linear forms on P^n, the
//! exclusion locus Z, and the inequalities (a)-(d) and the main inequality
//! checked point by point over height sweeps.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::bounds::{holds, thm1bis_rhs, Shape, Variant};
use crate::diophfun::{
    eval_linear, parse_theta_poly, proximity, proximity_algebraic, weil_point, AlgebraicPoint, DivisorSpec, FunError,
    P1Entry, P1Target, ProjPoint,
};
use crate::divclass::{ClassError, MonomialMap};
use crate::exactnum::{factorize, FormalLogSum};
use crate::exec::Exec;
use crate::placeval::{AlgebraicTarget, Embedding, IntPoly, Place, PlaceError, RatPoly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DemoError {
    #[error("point lies on the indeterminacy locus of the map")]
    IndeterminacyLocus,
    #[error("point lies on the exclusion locus Z")]
    OnZ,
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Fun(#[from] FunError),
    #[error(transparent)]
    Place(#[from] PlaceError),
    #[error(transparent)]
    Class(#[from] ClassError),
}

/// The point P, with rational or algebraic coordinates.
#[derive(Clone, Debug)]
pub enum DemoPoint {
    Rational(ProjPoint),
    Algebraic(AlgebraicPoint),
}

impl DemoPoint {
    fn dim(&self) -> usize {
        match self {
            DemoPoint::Rational(p) => p.dim(),
            DemoPoint::Algebraic(p) => p.dim(),
        }
    }
}

impl fmt::Display for DemoPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DemoPoint::Rational(p) => write!(f, "{p}"),
            DemoPoint::Algebraic(p) => {
                let parts: Vec<String> = p
                    .coords()
                    .iter()
                    .map(|c| {
                        let cs: Vec<String> = c.coeffs().iter().map(|q| q.to_string()).collect();
                        format!("[{}]", cs.join(","))
                    })
                    .collect();
                write!(f, "{} over {}", parts.join(":"), p.theta())
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct DemoInstance {
    n: usize,
    forms: Vec<Vec<i128>>,
    map: MonomialMap,
    point: DemoPoint,
    divisor: DivisorSpec,
    /// The orbit divisor A of alpha = f(P) on P^1.
    orbit: P1Entry,
    m: u32,
}

/// `b / c` as `[b : c]` in lowest terms with `c >= 0`.
fn p1_point(num: BigInt, den: BigInt) -> Result<ProjPoint, DemoError> {
    let g = num.gcd(&den);
    let (mut b, mut c) = (num / &g, den / &g);
    if c.is_negative() || (c.is_zero() && b.is_negative()) {
        b = -b;
        c = -c;
    }
    let b = b.to_i128().ok_or(FunError::Overflow)?;
    let c = c.to_i128().ok_or(FunError::Overflow)?;
    Ok(ProjPoint::new(vec![b, c])?)
}

/// Inverse of `a` modulo the irreducible `m`.
fn inverse_mod(a: &RatPoly, m: &RatPoly) -> Option<RatPoly> {
    let (mut r0, mut r1) = (m.clone(), a.rem(m));
    let (mut s0, mut s1) = (RatPoly::zero(), RatPoly::constant(BigRational::one()));
    while !r1.is_zero() {
        let (q, r) = r0.div_rem(&r1);
        let s = s0.sub(&q.mul(&s1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    if r0.degree() != 0 || r0.is_zero() {
        return None;
    }
    Some(s0.scale(&r0.leading().recip()).rem(m))
}

/// Characteristic polynomial of multiplication by `beta` on `Q[t] / m`.
fn charpoly(beta: &RatPoly, m: &RatPoly) -> RatPoly {
    let d = m.degree();
    let coeff = |p: &RatPoly, i: usize| p.coeffs().get(i).cloned().unwrap_or_else(BigRational::zero);
    let mut basis = RatPoly::constant(BigRational::one());
    let t = RatPoly::new(vec![BigRational::zero(), BigRational::one()]);
    let mut a = vec![vec![BigRational::zero(); d]; d];
    for col in 0..d {
        let img = beta.mul(&basis).rem(m);
        for (row, r) in a.iter_mut().enumerate() {
            r[col] = coeff(&img, row);
        }
        basis = basis.mul(&t).rem(m);
    }
    let matmul = |x: &Vec<Vec<BigRational>>, y: &Vec<Vec<BigRational>>| -> Vec<Vec<BigRational>> {
        (0..d)
            .map(|i| (0..d).map(|j| (0..d).map(|k| &x[i][k] * &y[k][j]).sum()).collect())
            .collect()
    };
    // Faddeev-LeVerrier
    let mut c = vec![BigRational::zero(); d + 1];
    c[d] = BigRational::one();
    let mut mk = vec![vec![BigRational::zero(); d]; d];
    for k in 1..=d {
        let mut next = matmul(&a, &mk);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &c[d - k + 1];
        }
        mk = next;
        let am = matmul(&a, &mk);
        let tr: BigRational = (0..d).map(|i| am[i][i].clone()).sum();
        c[d - k] = -tr / BigRational::from_integer(BigInt::from(k));
    }
    RatPoly::new(c)
}

/// Minimal polynomial over Q of `beta` in `Q[t] / m`, primitive with positive leading coefficient.
pub fn minimal_polynomial(beta: &RatPoly, m: &RatPoly) -> IntPoly {
    let cp = charpoly(beta, m);
    let g = cp.gcd(&cp.derivative());
    let (q, _) = cp.div_rem(&g);
    let p = q.to_primitive_int();
    if p.leading().is_negative() {
        IntPoly::new(p.coeffs().iter().map(|c| -c).collect())
    } else {
        p
    }
}

impl DemoInstance {
    pub fn new(n: usize, forms: Vec<Vec<i128>>, map: MonomialMap, point: DemoPoint) -> Result<Self, DemoError> {
        let bad = |m: String| DemoError::InvalidInstance(m);
        if forms.len() < 2 {
            return Err(bad("at least two forms are required".into()));
        }
        if forms.iter().any(|f| f.len() != n + 1) || point.dim() != n {
            return Err(bad(format!("forms and P must have {} coordinates", n + 1)));
        }
        let divisor = DivisorSpec::hyperplanes(forms.iter().map(|f| (f.clone(), 1)).collect())
            .map_err(|e| bad(format!("forms: {e}")))?;
        let DivisorSpec::Hyperplanes { forms, .. } = &divisor else { unreachable!() };
        let forms = forms.iter().map(|(f, _)| f.clone()).collect::<Vec<_>>();
        if map.max_index() >= forms.len() {
            return Err(bad(format!("map uses form {} but only {} are given", map.max_index(), forms.len())));
        }
        if map.numerator_degree() != map.denominator_degree() {
            return Err(bad("numerator and denominator degrees differ".into()));
        }
        let orbit = match &point {
            DemoPoint::Rational(p) => {
                let mut num = BigInt::one();
                let mut den = BigInt::one();
                for (i, f) in forms.iter().enumerate() {
                    if eval_linear(f, p)? == 0 {
                        return Err(bad(format!("P lies on form {i}")));
                    }
                }
                for &(i, e) in &map.numerator {
                    num *= num_traits::pow(BigInt::from(eval_linear(&forms[i], p)?), e as usize);
                }
                for &(i, e) in &map.denominator {
                    den *= num_traits::pow(BigInt::from(eval_linear(&forms[i], p)?), e as usize);
                }
                let a = p1_point(num, den)?;
                P1Entry::point(a.coords()[0], a.coords()[1])?
            }
            DemoPoint::Algebraic(p) => {
                let m = p.theta().minpoly().to_rat();
                let values: Vec<RatPoly> = forms
                    .iter()
                    .map(|f| {
                        f.iter()
                            .zip(p.coords())
                            .fold(RatPoly::zero(), |acc, (c, x)| acc.add(&x.scale(&BigRational::from_integer((*c).into()))))
                            .rem(&m)
                    })
                    .collect();
                if let Some(i) = values.iter().position(|v| v.is_zero()) {
                    return Err(bad(format!("P lies on form {i}")));
                }
                let prod = |side: &[(usize, u32)]| {
                    side.iter().fold(RatPoly::constant(BigRational::one()), |acc, &(i, e)| {
                        (0..e).fold(acc, |a, _| a.mul(&values[i]).rem(&m))
                    })
                };
                let den_inv = inverse_mod(&prod(&map.denominator), &m).ok_or_else(|| bad("f(P) is undefined".into()))?;
                let beta = prod(&map.numerator).mul(&den_inv).rem(&m);
                let mp = minimal_polynomial(&beta, &m);
                if mp.degree() == 1 {
                    let c = mp.coeffs();
                    P1Entry::point((-&c[0]).to_i128().ok_or(FunError::Overflow)?, c[1].to_i128().ok_or(FunError::Overflow)?)?
                } else {
                    P1Entry::Orbit(mp)
                }
            }
        };
        let m = map.max_exponent();
        Ok(DemoInstance { n, forms, map, point, divisor, orbit, m })
    }

    /// Forms x0 and x1 on P^2, f = x0 / x1, P = [1:2:1].
    pub fn standard() -> Self {
        let map = MonomialMap::new(vec![(0, 1)], vec![(1, 1)]).expect("valid map");
        let p = ProjPoint::new(vec![1, 2, 1]).expect("valid point");
        DemoInstance::new(2, vec![vec![1, 0, 0], vec![0, 1, 0]], map, DemoPoint::Rational(p)).expect("valid instance")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn forms(&self) -> &[Vec<i128>] {
        &self.forms
    }

    pub fn map(&self) -> &MonomialMap {
        &self.map
    }

    pub fn point(&self) -> &DemoPoint {
        &self.point
    }

    pub fn divisor(&self) -> &DivisorSpec {
        &self.divisor
    }

    /// The divisor of the Galois orbit of alpha = f(P).
    pub fn orbit(&self) -> &P1Entry {
        &self.orbit
    }

    /// `M`, the largest exponent, so that `M D >= f^*([0] + [inf])`.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// `deg(D)`: the number of forms.
    pub fn degree(&self) -> u64 {
        self.divisor.degree()
    }

    /// `2 max(S_num, S_den)` with `S = sum e_i (log(n+1) + log max|coeff of form i|)`.
    pub fn step_a_bound(&self) -> f64 {
        let side = |s: &[(usize, u32)]| -> f64 {
            s.iter()
                .map(|&(i, e)| {
                    let c = self.forms[i].iter().map(|c| c.unsigned_abs()).max().unwrap_or(1) as f64;
                    e as f64 * (((self.n + 1) as f64).ln() + c.ln())
                })
                .sum()
        };
        2.0 * side(&self.map.numerator).max(side(&self.map.denominator))
    }

    fn form_values(&self, x: &ProjPoint) -> Result<Vec<i128>, DemoError> {
        if x.dim() != self.n {
            return Err(FunError::DimensionMismatch.into());
        }
        self.forms.iter().map(|f| Ok(eval_linear(f, x)?)).collect()
    }

    fn map_from_values(&self, vals: &[i128]) -> Result<ProjPoint, DemoError> {
        let side = |s: &[(usize, u32)]| -> Option<i128> {
            s.iter().try_fold(1i128, |acc, &(i, e)| acc.checked_mul(vals[i].checked_pow(e)?))
        };
        match (side(&self.map.numerator), side(&self.map.denominator)) {
            (Some(0), Some(0)) => Err(DemoError::IndeterminacyLocus),
            (Some(num), Some(den)) => p1_point(num.into(), den.into()),
            _ => {
                let big = |s: &[(usize, u32)]| {
                    s.iter().fold(BigInt::one(), |acc, &(i, e)| acc * num_traits::pow(BigInt::from(vals[i]), e as usize))
                };
                let (num, den) = (big(&self.map.numerator), big(&self.map.denominator));
                if num.is_zero() && den.is_zero() {
                    return Err(DemoError::IndeterminacyLocus);
                }
                p1_point(num, den)
            }
        }
    }

    /// `f(x)` as a point `[b : c]` of P^1.
    pub fn eval_map(&self, x: &ProjPoint) -> Result<ProjPoint, DemoError> {
        self.map_from_values(&self.form_values(x)?)
    }

    /// Whether `x` lies on a form of D or `f(x)` is a conjugate of alpha.
    pub fn z_membership(&self, x: &ProjPoint) -> Result<bool, DemoError> {
        let vals = self.form_values(x)?;
        if vals.contains(&0) {
            return Ok(true);
        }
        let fx = self.map_from_values(&vals)?;
        Ok(self.orbit.form_value(fx.coords()[0], fx.coords()[1])?.is_zero())
    }

    /// Precomputes the conjugates of alpha at `v` for repeated checks.
    pub fn pipeline(&self, v: Place, eps: f64, kappa: f64) -> Result<Pipeline<'_>, DemoError> {
        if !(eps > 0.0) {
            return Err(DemoError::InvalidInstance(format!("epsilon = {eps}")));
        }
        let conjugates = match &self.orbit {
            P1Entry::Point { u, w } => Conjugates::Rational { u: *u, w: *w },
            P1Entry::Orbit(mp) => Conjugates::Algebraic(conjugate_targets(mp, v)?),
        };
        if let DemoPoint::Algebraic(p) = &self.point {
            let ok = match (p.theta().embedding(), v) {
                (Embedding::Rational, _) => true,
                (Embedding::Archimedean(_), Place::Infinity) => true,
                (Embedding::Padic { p: q, .. }, Place::Prime(r)) => *q == r,
                _ => false,
            };
            if !ok {
                return Err(PlaceError::EmbeddingMismatch.into());
            }
        }
        Ok(Pipeline { inst: self, v, eps, kappa, conjugates })
    }

    /// Single-point check; see [`Pipeline::check`].
    pub fn pipeline_check(&self, x: &ProjPoint, v: Place, eps: f64, kappa: f64) -> Result<PipelineReport, DemoError> {
        self.pipeline(v, eps, kappa)?.check(x)
    }
}

/// All conjugates of the root field of `mp` embedded at `v`.
fn conjugate_targets(mp: &IntPoly, v: Place) -> Result<Vec<AlgebraicTarget>, DemoError> {
    let d = mp.degree();
    match v {
        Place::Infinity => (0..d).map(|j| Ok(AlgebraicTarget::new(mp.clone(), Embedding::Archimedean(j))?)).collect(),
        Place::Prime(p) => {
            const SEARCH_LIMIT: u64 = 1_000_000;
            let pb = BigInt::from(p);
            if p > SEARCH_LIMIT || (mp.leading() % &pb).is_zero() {
                return Err(DemoError::Unsupported(format!("conjugates of {mp} at {p}")));
            }
            let mut out = Vec::new();
            for r in 0..p {
                let rb = BigInt::from(r);
                if mp.eval_mod(&rb, &pb).is_zero() {
                    match AlgebraicTarget::new(mp.clone(), Embedding::Padic { p, seed: rb }) {
                        Ok(t) => out.push(t),
                        Err(PlaceError::NoSimpleRoot) => break,
                        Err(e) => return Err(e.into()),
                    }
                }
            }
            if out.len() != d {
                return Err(DemoError::Unsupported(format!("{mp} does not split into simple roots modulo {p}")));
            }
            Ok(out)
        }
    }
}

#[derive(Clone, Debug)]
enum Conjugates {
    Rational { u: i128, w: i128 },
    Algebraic(Vec<AlgebraicTarget>),
}

/// Per-point results of the four proof steps and the main inequality.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineReport {
    pub x: ProjPoint,
    pub fx: ProjPoint,
    /// `2 h(f(x))`.
    pub a_lhs: f64,
    /// `M deg(D) h(x)`.
    pub a_rhs: f64,
    /// `lambda_v(P, x)`.
    pub b_lhs: f64,
    /// `sum_j lambda_v(alpha_j, f(x))`.
    pub b_rhs: f64,
    pub c_sum: f64,
    pub c_max: f64,
    /// `N^(1)([0] + [inf], f(x))`.
    pub d_lhs: f64,
    /// `N^(1)(D, x)`.
    pub d_rhs: f64,
    /// Primes of f(x) form a subset of the primes of the form values.
    pub d_subset: bool,
    /// `h(O(D), x)`.
    pub h_d: f64,
    pub main_lhs: f64,
    pub main_rhs: f64,
    pub in_margin: bool,
}

impl PipelineReport {
    pub fn slack_a(&self) -> f64 {
        (self.a_lhs - self.a_rhs).max(0.0)
    }

    pub fn slack_b(&self) -> f64 {
        (self.b_lhs - self.b_rhs).max(0.0)
    }

    pub fn slack_c(&self) -> f64 {
        self.c_sum - self.c_max
    }

    /// 0 exactly when the prime-set inclusion holds.
    pub fn slack_d(&self) -> f64 {
        if self.d_subset {
            0.0
        } else {
            (self.d_lhs - self.d_rhs).max(f64::MIN_POSITIVE)
        }
    }

    pub const CSV_HEADER: &'static str = "x,fx,a_lhs,a_rhs,b_lhs,b_rhs,c_sum,c_max,d_lhs,d_rhs,main_lhs,main_rhs,in_margin";

    pub fn csv_row(&self) -> String {
        let fx = match self.fx.coords() {
            [b, 1] => b.to_string(),
            [b, c] => format!("{b}/{c}"),
            _ => self.fx.to_string(),
        };
        let nums: Vec<String> = [
            self.a_lhs, self.a_rhs, self.b_lhs, self.b_rhs, self.c_sum, self.c_max, self.d_lhs, self.d_rhs, self.main_lhs,
            self.main_rhs,
        ]
        .iter()
        .map(|v| crate::scanlab::fmt_sig(*v))
        .collect();
        format!("{},{},{},{}", self.x, fx, nums.join(","), self.in_margin)
    }
}

pub struct Pipeline<'a> {
    inst: &'a DemoInstance,
    v: Place,
    eps: f64,
    kappa: f64,
    conjugates: Conjugates,
}

fn primes_of(n: i128, out: &mut Vec<u128>) -> Result<(), DemoError> {
    if n.unsigned_abs() > 1 {
        out.extend(factorize(n).map_err(FunError::from)?.primes());
    }
    Ok(())
}

impl Pipeline<'_> {
    pub fn place(&self) -> Place {
        self.v
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    /// `lambda_v(alpha_j, f(x))` for every conjugate.
    fn orbit_values(&self, fx: &ProjPoint) -> Result<Vec<f64>, DemoError> {
        let (b, c) = (fx.coords()[0], fx.coords()[1]);
        match &self.conjugates {
            Conjugates::Rational { u, w } => {
                let form = w.checked_mul(b).zip(u.checked_mul(c)).and_then(|(s, t)| s.checked_sub(t));
                match form {
                    Some(0) => Err(DemoError::OnZ),
                    Some(f) => Ok(vec![match self.v {
                        Place::Infinity => {
                            let hx = (b.unsigned_abs().max(c.unsigned_abs()) as f64).ln();
                            let ha = (u.unsigned_abs().max(w.unsigned_abs()) as f64).ln();
                            (hx + ha - (f.unsigned_abs() as f64).ln()).max(0.0)
                        }
                        Place::Prime(p) => crate::placeval::vp_i128(f, p) as f64 * (p as f64).ln(),
                    }]),
                    None => {
                        let t = P1Target::Rational(BigRational::new((*u).into(), (*w).into()));
                        let y = BigRational::new(b.into(), c.into());
                        Ok(vec![weil_point(&t, &y, self.v).map_err(on_z)?.value])
                    }
                }
            }
            Conjugates::Algebraic(targets) => {
                let y = BigRational::new(b.into(), c.into());
                targets
                    .iter()
                    .map(|t| Ok(weil_point(&P1Target::Algebraic(t.clone()), &y, self.v).map_err(on_z)?.value))
                    .collect()
            }
        }
    }

    /// The report at `x`. Errors with `IndeterminacyLocus` or `OnZ` off the valid domain.
    pub fn check(&self, x: &ProjPoint) -> Result<PipelineReport, DemoError> {
        let inst = self.inst;
        let vals = inst.form_values(x)?;
        let fx = inst.map_from_values(&vals)?;
        if vals.contains(&0) {
            return Err(DemoError::OnZ);
        }
        let (b, c) = (fx.coords()[0], fx.coords()[1]);
        if inst.orbit.form_value(b, c)?.is_zero() {
            return Err(DemoError::OnZ);
        }
        let hx = (x.max_abs() as f64).ln();
        let h_d = inst.degree() as f64 * hx;
        let a_lhs = 2.0 * (b.unsigned_abs().max(c.unsigned_abs()) as f64).ln();
        let a_rhs = inst.m as f64 * h_d;

        let b_lhs = match &inst.point {
            DemoPoint::Rational(p) => proximity(p, x, self.v)?,
            DemoPoint::Algebraic(p) => proximity_algebraic(p, x, self.v)?,
        };
        let orbit = self.orbit_values(&fx)?;
        let c_sum: f64 = orbit.iter().sum();
        let c_max = orbit.iter().copied().fold(0.0, f64::max);

        let mut fx_primes = Vec::new();
        primes_of(b, &mut fx_primes)?;
        primes_of(c, &mut fx_primes)?;
        fx_primes.sort_unstable();
        fx_primes.dedup();
        let mut x_primes = Vec::new();
        for v in &vals {
            primes_of(*v, &mut x_primes)?;
        }
        x_primes.sort_unstable();
        x_primes.dedup();
        let d_subset = fx_primes.iter().all(|p| x_primes.binary_search(p).is_ok());
        let d_lhs = FormalLogSum::from_primes(fx_primes).eval();
        let d_rhs = FormalLogSum::from_primes(x_primes).eval();

        let main_lhs = b_lhs;
        let main_rhs = thm1bis_rhs(h_d, d_rhs, self.eps, self.kappa).map_err(|e| DemoError::InvalidInstance(e.to_string()))?;
        Ok(PipelineReport {
            x: x.clone(),
            fx,
            a_lhs,
            a_rhs,
            b_lhs,
            b_rhs: c_sum,
            c_sum,
            c_max,
            d_lhs,
            d_rhs,
            d_subset,
            h_d,
            main_lhs,
            main_rhs,
            in_margin: holds(Variant::Thm1Bis, main_lhs, main_rhs),
        })
    }

    /// The constant making the main inequality an equality at this report, if any.
    pub fn kappa_at(&self, r: &PipelineReport) -> Option<f64> {
        Shape::Thm1Bis { h: r.h_d, n1: r.d_rhs }.invert(r.main_lhs, self.eps).ok().flatten()
    }
}

fn on_z(e: FunError) -> DemoError {
    match e {
        FunError::OnDivisor => DemoError::OnZ,
        other => other.into(),
    }
}

/// A maximum together with the first point attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct Extremum {
    pub value: f64,
    pub at: Option<ProjPoint>,
}

impl Extremum {
    pub fn new() -> Self {
        Extremum { value: f64::NEG_INFINITY, at: None }
    }

    fn push(&mut self, value: f64, at: &ProjPoint) {
        if value > self.value || self.at.is_none() {
            self.value = value;
            self.at = Some(at.clone());
        }
    }

    fn merge(self, later: Extremum) -> Extremum {
        match (&self.at, &later.at) {
            (None, _) => later,
            (_, None) => self,
            _ if later.value > self.value => later,
            _ => self,
        }
    }
}

impl Default for Extremum {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub height: i128,
    pub place: Place,
    pub reports: u64,
    /// Points on Z or on the indeterminacy locus.
    pub skipped: u64,
    /// Points where some evaluation failed, e.g. for lack of precision.
    pub errors: u64,
    pub slack_a: Extremum,
    pub slack_b: Extremum,
    pub slack_c: Extremum,
    pub slack_d: Extremum,
    pub d_failures: u64,
    /// Least constant for which the main inequality holds over the sweep.
    pub kappa_fit: Extremum,
    /// Points violating the main inequality at the pipeline's constant.
    pub main_violations: u64,
    pub first_violation: Option<ProjPoint>,
}

impl SweepSummary {
    fn empty(height: i128, place: Place) -> Self {
        SweepSummary {
            height,
            place,
            reports: 0,
            skipped: 0,
            errors: 0,
            slack_a: Extremum::new(),
            slack_b: Extremum::new(),
            slack_c: Extremum::new(),
            slack_d: Extremum::new(),
            d_failures: 0,
            kappa_fit: Extremum::new(),
            main_violations: 0,
            first_violation: None,
        }
    }

    fn push(&mut self, pipe: &Pipeline<'_>, r: &PipelineReport) {
        self.reports += 1;
        self.slack_a.push(r.slack_a(), &r.x);
        self.slack_b.push(r.slack_b(), &r.x);
        self.slack_c.push(r.slack_c(), &r.x);
        self.slack_d.push(r.slack_d(), &r.x);
        if !r.d_subset {
            self.d_failures += 1;
        }
        if let Some(k) = pipe.kappa_at(r) {
            self.kappa_fit.push(k, &r.x);
        }
        if !r.in_margin {
            self.main_violations += 1;
            if self.first_violation.is_none() {
                self.first_violation = Some(r.x.clone());
            }
        }
    }

    /// Combines with the summary of a later part of the sweep.
    fn merge(self, later: SweepSummary) -> SweepSummary {
        SweepSummary {
            height: self.height,
            place: self.place,
            reports: self.reports + later.reports,
            skipped: self.skipped + later.skipped,
            errors: self.errors + later.errors,
            slack_a: self.slack_a.merge(later.slack_a),
            slack_b: self.slack_b.merge(later.slack_b),
            slack_c: self.slack_c.merge(later.slack_c),
            slack_d: self.slack_d.merge(later.slack_d),
            d_failures: self.d_failures + later.d_failures,
            kappa_fit: self.kappa_fit.merge(later.kappa_fit),
            main_violations: self.main_violations + later.main_violations,
            first_violation: self.first_violation.or(later.first_violation),
        }
    }
}

impl fmt::Display for SweepSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = |e: &Extremum| e.at.as_ref().map_or("-".to_string(), |p| p.to_string());
        writeln!(f, "height = {}", self.height)?;
        writeln!(f, "place = {}", self.place)?;
        writeln!(f, "points = {}", self.reports)?;
        writeln!(f, "skipped = {}", self.skipped)?;
        writeln!(f, "errors = {}", self.errors)?;
        for (name, e) in [("a", &self.slack_a), ("b", &self.slack_b), ("c", &self.slack_c), ("d", &self.slack_d)] {
            writeln!(f, "max_slack_{name} = {} at {}", crate::scanlab::fmt_sig(e.value), at(e))?;
        }
        writeln!(f, "d_failures = {}", self.d_failures)?;
        writeln!(f, "kappa_fit = {} at {}", crate::scanlab::fmt_sig(self.kappa_fit.value), at(&self.kappa_fit))?;
        write!(f, "main_violations = {}", self.main_violations)?;
        if let Some(p) = &self.first_violation {
            write!(f, " first at {p}")?;
        }
        Ok(())
    }
}

/// Calls `visit` on every tuple in `[-h, h]^len` in lexicographic order.
fn for_each_tuple(prefix: &mut Vec<i128>, len: usize, h: i128, visit: &mut dyn FnMut(&[i128])) {
    if prefix.len() == len {
        visit(prefix);
        return;
    }
    for c in -h..=h {
        prefix.push(c);
        for_each_tuple(prefix, len, h, visit);
        prefix.pop();
    }
}

/// Normalized points of P^n with first coordinate `x0` and all coordinates in
/// `[-h, h]`, in lexicographic order.
fn points_with_first(n: usize, h: i128, x0: i128, visit: &mut dyn FnMut(ProjPoint)) {
    let mut prefix = vec![x0];
    for_each_tuple(&mut prefix, n + 1, h, &mut |t| {
        let first = t.iter().find(|&&c| c != 0);
        if first.is_some_and(|&c| c > 0) && t.iter().fold(0i128, |g, &c| g.gcd(&c)) == 1 {
            visit(ProjPoint::new(t.to_vec()).expect("normalized"));
        }
    });
}

/// All normalized points of P^n with coordinates in `[-h, h]`, lexicographic.
pub fn enumerate_points(n: usize, h: i128) -> Vec<ProjPoint> {
    let mut out = Vec::new();
    for x0 in 0..=h.max(0) {
        points_with_first(n, h, x0, &mut |p| out.push(p));
    }
    out
}

impl Pipeline<'_> {
    fn sweep_first(&self, h: i128, x0: i128, keep: bool) -> (SweepSummary, Vec<PipelineReport>) {
        let mut summary = SweepSummary::empty(h, self.v);
        let mut kept = Vec::new();
        points_with_first(self.inst.n, h, x0, &mut |x| match self.check(&x) {
            Ok(r) => {
                summary.push(self, &r);
                if keep {
                    kept.push(r);
                }
            }
            Err(DemoError::OnZ | DemoError::IndeterminacyLocus) => summary.skipped += 1,
            Err(_) => summary.errors += 1,
        });
        (summary, kept)
    }

    /// Runs every normalized point of height at most `h`, calling `visit` on
    /// each report in lexicographic order.
    pub fn sweep_each(&self, h: i128, exec: Exec, mut visit: Option<&mut dyn FnMut(&PipelineReport)>) -> SweepSummary {
        let firsts: Vec<i128> = (0..=h.max(0)).collect();
        let batch = if visit.is_some() { 4 } else { firsts.len().max(1) };
        let keep = visit.is_some();
        let mut total = SweepSummary::empty(h, self.v);
        for chunk in firsts.chunks(batch) {
            for (s, reports) in exec.map(chunk, |&x0| self.sweep_first(h, x0, keep)) {
                if let Some(v) = visit.as_mut() {
                    reports.iter().for_each(|r| v(r));
                }
                total = total.merge(s);
            }
        }
        total
    }

    /// Reports and summary of a full sweep.
    pub fn sweep(&self, h: i128, exec: Exec) -> (Vec<PipelineReport>, SweepSummary) {
        let mut reports = Vec::new();
        let summary = self.sweep_each(h, exec, Some(&mut |r: &PipelineReport| reports.push(r.clone())));
        (reports, summary)
    }
}

impl FromStr for DemoInstance {
    type Err = DemoError;

    /// Lines `n=<int>`, `form=<c0,...,cn>` (repeated), `map=<i>:<e>,.../<j>:<e>,...`,
    /// `P=<x0>:<x1>:...` and optionally `theta=<algebraic target>`, in which
    /// case each coordinate of P is a rational or `[c0,c1,...]` in theta.
    fn from_str(s: &str) -> Result<Self, DemoError> {
        let mut n = None;
        let mut forms = Vec::new();
        let mut map = None;
        let mut p_text: Option<(usize, String)> = None;
        let mut theta: Option<AlgebraicTarget> = None;
        for (idx, raw) in s.lines().enumerate() {
            let line = idx + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let bad = |msg: String| DemoError::Parse { line, msg };
            let (key, value) = t.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {t:?}")))?;
            let value = value.trim();
            match key.trim() {
                "n" => n = Some(value.parse::<usize>().map_err(|_| bad(format!("bad dimension {value:?}")))?),
                "form" => forms.push(
                    value
                        .split(',')
                        .map(|c| c.trim().parse::<i128>().map_err(|_| bad(format!("bad coefficient {c:?}"))))
                        .collect::<Result<Vec<_>, _>>()?,
                ),
                "map" => map = Some(value.parse::<MonomialMap>().map_err(|e| bad(e.to_string()))?),
                "P" => p_text = Some((line, value.to_string())),
                "theta" => theta = Some(value.parse::<AlgebraicTarget>().map_err(|e| bad(e.to_string()))?),
                k => return Err(bad(format!("unknown key {k:?}"))),
            }
        }
        let missing = |what: &str| DemoError::Parse { line: 0, msg: format!("missing {what}") };
        let n = n.ok_or_else(|| missing("n="))?;
        let map = map.ok_or_else(|| missing("map="))?;
        let (pline, p_text) = p_text.ok_or_else(|| missing("P="))?;
        let bad_p = |msg: String| DemoError::Parse { line: pline, msg };
        let point = match theta {
            None => DemoPoint::Rational(p_text.parse::<ProjPoint>().map_err(|e| bad_p(e.to_string()))?),
            Some(theta) => {
                let coords = p_text
                    .split(':')
                    .map(|c| parse_theta_poly(c).map_err(|e| bad_p(e.to_string())))
                    .collect::<Result<Vec<_>, _>>()?;
                DemoPoint::Algebraic(AlgebraicPoint::new(theta, coords)?)
            }
        };
        DemoInstance::new(n, forms, map, point)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(s: &str) -> ProjPoint {
        s.parse().unwrap()
    }

    #[test]
    fn eval_map_examples() {
        let inst = DemoInstance::standard();
        assert_eq!(inst.eval_map(&pt("[1,3,2]")).unwrap(), pt("[1,3]"));
        assert_eq!(inst.eval_map(&pt("[0,0,1]")), Err(DemoError::IndeterminacyLocus));
        assert_eq!(inst.eval_map(&pt("[0,1,1]")).unwrap(), pt("[0,1]"));
        assert_eq!(inst.eval_map(&pt("[1,0,1]")).unwrap(), pt("[1,0]"));
        let sq = DemoInstance::new(
            2,
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
            "0:2/1:1,2:1".parse().unwrap(),
            DemoPoint::Rational(pt("[1,2,3]")),
        )
        .unwrap();
        assert_eq!(sq.eval_map(&pt("[1,1,1]")).unwrap(), pt("[1,1]"));
        assert_eq!(sq.m(), 2);
        assert_eq!(sq.orbit(), &P1Entry::point(1, 6).unwrap());
    }

    #[test]
    fn z_membership_examples() {
        let inst = DemoInstance::standard();
        assert_eq!(inst.orbit(), &P1Entry::point(1, 2).unwrap());
        assert!(inst.z_membership(&pt("[1,2,5]")).unwrap());
        assert!(!inst.z_membership(&pt("[1,3,2]")).unwrap());
        assert!(inst.z_membership(&pt("[0,1,1]")).unwrap());
    }

    #[test]
    fn pipeline_examples() {
        let inst = DemoInstance::standard();
        let r = inst.pipeline_check(&pt("[1,3,2]"), Place::Infinity, 1.0, 0.0).unwrap();
        assert_eq!(r.fx, pt("[1,3]"));
        let l3 = 3f64.ln();
        assert!((r.d_lhs - l3).abs() < 1e-15 && (r.d_rhs - l3).abs() < 1e-15 && r.d_subset);
        assert!((r.a_lhs - 2.0 * l3).abs() < 1e-15 && (r.a_rhs - 2.0 * l3).abs() < 1e-15);
        assert_eq!(r.slack_c(), 0.0);
        assert_eq!(inst.pipeline_check(&pt("[1,2,5]"), Place::Infinity, 1.0, 0.0), Err(DemoError::OnZ));
        assert_eq!(inst.pipeline_check(&pt("[0,0,1]"), Place::Infinity, 1.0, 0.0), Err(DemoError::IndeterminacyLocus));
        // at [1:1:1] the main inequality is tight for kappa = log log 2
        let p = inst.pipeline(Place::Infinity, 1.0, 0.0).unwrap();
        let r = p.check(&pt("[1,1,1]")).unwrap();
        assert!((p.kappa_at(&r).unwrap() - 2f64.ln().ln()).abs() < 1e-12);
        assert!(inst.step_a_bound() - 2.0 * l3 < 1e-15);
    }

    #[test]
    fn sweep_small() {
        let inst = DemoInstance::standard();
        assert!(enumerate_points(2, 0).is_empty());
        let all = enumerate_points(2, 3);
        let brute = (-3i128..=3)
            .flat_map(|a| (-3i128..=3).flat_map(move |b| (-3i128..=3).map(move |c| vec![a, b, c])))
            .filter(|v| v.iter().any(|&c| c != 0))
            .map(|v| ProjPoint::new(v).unwrap())
            .collect::<std::collections::BTreeSet<_>>();
        assert_eq!(all.len(), brute.len());
        let p = inst.pipeline(Place::Infinity, 1.0, 0.0).unwrap();
        let (reports, s) = p.sweep(3, Exec::Sequential);
        let off_z = all.iter().filter(|x| !inst.z_membership(x).unwrap_or(true)).count();
        assert_eq!(reports.len(), off_z);
        assert_eq!(s.reports as usize + s.skipped as usize, all.len());
        assert_eq!(s.slack_c.value, 0.0);
        assert_eq!(s.slack_d.value, 0.0);
        assert!(s.slack_a.value <= inst.step_a_bound());
        let (r2, s2) = p.sweep(3, Exec::from_jobs(8));
        assert_eq!((r2, s2), (reports, s));
    }

    #[test]
    fn padic_sweep_and_algebraic_alpha() {
        let inst = DemoInstance::standard();
        let p = inst.pipeline(Place::Prime(3), 1.0, 0.0).unwrap();
        let (_, s) = p.sweep(6, Exec::Sequential);
        assert_eq!(s.errors, 0);
        assert_eq!(s.slack_d.value, 0.0);

        // P = [sqrt2 : 1 : 1] on the same forms gives alpha = sqrt 2 with a two-point orbit
        let text = "n=2\nform=1,0,0\nform=0,1,0\nmap=0:1/1:1\ntheta=poly:[-2,0,1];embed:arch:1\nP=[0,1]:1:1\n";
        let inst: DemoInstance = text.parse().unwrap();
        assert_eq!(inst.orbit(), &P1Entry::Orbit(IntPoly::from_i64s(&[-2, 0, 1])));
        assert!(!inst.z_membership(&pt("[7,5,1]")).unwrap());
        let p = inst.pipeline(Place::Infinity, 1.0, 0.0).unwrap();
        let (reports, s) = p.sweep(5, Exec::Sequential);
        assert_eq!(s.errors, 0);
        assert!(reports.iter().all(|r| r.c_sum >= r.c_max && r.slack_d() == 0.0));
        // the orbit sum exceeds the max by a bounded amount
        assert!(s.slack_c.value < 3.0, "{}", s.slack_c.value);
        // 2 splits in Q_7 as +-3, +-4 modulo 7
        assert!(inst.pipeline(Place::Prime(7), 1.0, 0.0).is_err());
    }

    #[test]
    fn minimal_polynomials() {
        let m = IntPoly::from_i64s(&[-2, 0, 1]).to_rat();
        let q = |n: i64| BigRational::from_integer(n.into());
        // 1 + sqrt2 has minimal polynomial t^2 - 2t - 1
        let beta = RatPoly::new(vec![q(1), q(1)]);
        assert_eq!(minimal_polynomial(&beta, &m), IntPoly::from_i64s(&[-1, -2, 1]));
        assert_eq!(minimal_polynomial(&RatPoly::constant(q(3)), &m), IntPoly::from_i64s(&[-3, 1]));
        let inv = inverse_mod(&beta, &m).unwrap();
        assert_eq!(beta.mul(&inv).rem(&m), RatPoly::constant(q(1)));
    }

    #[test]
    fn instance_parsing() {
        let inst: DemoInstance = "n=2\nform=1,0,0\nform=0,1,0\nmap=0:1/1:1\nP=1:2:1\n".parse().unwrap();
        assert_eq!(inst.forms(), DemoInstance::standard().forms());
        assert!("n=2\nform=1,0,0\nmap=0:1/1:1\nP=1:2:1\n".parse::<DemoInstance>().is_err());
        assert!("n=2\nform=1,0,0\nform=0,1,0\nmap=0:2/1:1\nP=1:2:1\n".parse::<DemoInstance>().is_err());
        assert!("n=2\nform=1,0,0\nform=0,1,0\nmap=0:1/1:1\nP=0:2:1\n".parse::<DemoInstance>().is_err());
        assert!(matches!("n=2\nbogus=1".parse::<DemoInstance>(), Err(DemoError::Parse { line: 2, .. })));
    }
}
