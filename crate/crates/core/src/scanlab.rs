//! abc triples: enumeration, ingestion, per-triple evaluation of the bounds,
//! constant fitting at scale, and the regression file of fitted constants.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::BigRational;
use thiserror::Error;

use crate::bounds::{
    crossover, fit_kappa, holds, log_exponent_shape, lw_lhs, thm1_exponent_from_log, thm1bis_exponent, BoundError,
    FitResult, Shape, Variant,
};
use crate::diophfun::{weil_point, DivisorSpec, FunError, P1Entry, P1Target, ProjPoint};
use crate::exactnum::{factorize_u128, largest_prime_factor, logstar, NumError, RadicalTable};
use crate::exec::Exec;
use crate::placeval::{vp_i128, Place};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScanError {
    #[error("line {line}: parse error: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: {which}")]
    InvariantViolation { line: usize, which: TripleViolation },
    #[error("empty sample")]
    EmptySample,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Fun(#[from] FunError),
    #[error(transparent)]
    Num(#[from] NumError),
}

impl From<io::Error> for ScanError {
    fn from(e: io::Error) -> Self {
        ScanError::Io(e.to_string())
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum TripleViolation {
    #[error("entries must be positive")]
    NotPositive,
    #[error("a + b != c")]
    SumMismatch,
    #[error("gcd(a, b) = {0}")]
    NotCoprime(u64),
    #[error("a >= b")]
    NotOrdered,
}

/// Coprime positive `a < b` with `a + b = c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

impl Triple {
    pub fn new(a: u64, b: u64, c: u64) -> Result<Self, TripleViolation> {
        if a == 0 || b == 0 {
            return Err(TripleViolation::NotPositive);
        }
        if a.checked_add(b) != Some(c) {
            return Err(TripleViolation::SumMismatch);
        }
        let g = a.gcd(&b);
        if g != 1 {
            return Err(TripleViolation::NotCoprime(g));
        }
        if a >= b {
            return Err(TripleViolation::NotOrdered);
        }
        Ok(Triple { a, b, c })
    }

    /// `x = b / c` as a point of P^1.
    pub fn x(&self) -> ProjPoint {
        ProjPoint::from_normalized(vec![self.b as i128, self.c as i128])
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)
    }
}

/// Triples with `c` in `range`, ordered by `(c, a)`.
pub fn triples_in(range: Range<u64>) -> impl Iterator<Item = Triple> {
    range.flat_map(|c| {
        (1..c.div_ceil(2)).filter(move |&a| a.gcd(&c) == 1).map(move |a| Triple { a, b: c - a, c })
    })
}

/// All triples with `c <= c_max`, ordered by `(c, a)`.
pub fn enumerate_triples(c_max: u64) -> impl Iterator<Item = Triple> {
    triples_in(3..c_max.saturating_add(1).max(3))
}

/// Parses `a b c` lines; blank lines and lines starting with `#` are skipped.
pub fn ingest_triples<R: BufRead>(reader: R) -> impl Iterator<Item = Result<Triple, ScanError>> {
    reader.lines().enumerate().filter_map(|(idx, line)| {
        let line_no = idx + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(ScanError::from(e))),
        };
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            return None;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        let parsed: Option<Vec<u64>> = parts.iter().map(|p| p.parse().ok()).collect();
        Some(match parsed {
            Some(v) if v.len() == 3 => {
                Triple::new(v[0], v[1], v[2]).map_err(|which| ScanError::InvariantViolation { line: line_no, which })
            }
            _ => Err(ScanError::Parse { line: line_no, msg: format!("expected `a b c`, got {t:?}") }),
        })
    })
}

/// Formats with 12 significant digits, trailing zeros dropped.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..15).contains(&e) {
        let s = format!("{:.*}", (11 - e).max(0) as usize, x);
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
        // rounding can carry into a 13th digit, e.g. 9.99999999999951
        if s.chars().filter(|c| c.is_ascii_digit()).count() > 12 + usize::from(e < 0) * (-e) as usize {
            return format!("{:.11e}", x);
        }
        s
    } else {
        format!("{:.11e}", x)
    }
}

/// Target alpha and place for the approximation side of the bounds.
#[derive(Clone, Debug)]
pub struct ScanParams {
    pub variant: Variant,
    pub epsilon: f64,
    pub kappa: f64,
    pub place: Place,
    pub alpha: P1Target,
}

impl ScanParams {
    pub fn new(variant: Variant, epsilon: f64, kappa: f64, place: Place, alpha: P1Target) -> Result<Self, ScanError> {
        if matches!(variant, Variant::EgLemma | Variant::LwConj) {
            return Err(ScanError::Unsupported(format!("{variant} is not a bound on abc triples")));
        }
        if !(epsilon > 0.0) {
            return Err(BoundError::BadParams(format!("epsilon = {epsilon}")).into());
        }
        Ok(ScanParams { variant, epsilon, kappa, place, alpha })
    }

    /// alpha = 1 at infinity.
    pub fn standard(variant: Variant, epsilon: f64, kappa: f64) -> Result<Self, ScanError> {
        Self::new(variant, epsilon, kappa, Place::Infinity, P1Target::One)
    }

    fn alpha_is_one(&self) -> bool {
        match &self.alpha {
            P1Target::One => true,
            P1Target::Rational(r) => r.numer() == r.denom(),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TripleRecord {
    pub triple: Triple,
    /// `rad(abc)`.
    pub rad: u128,
    /// `log c / log rad(abc)`.
    pub quality: f64,
    /// `-log |1 - b/c| = log(c/a)`.
    pub log_c_over_a: f64,
    /// `1 - log a / log c`, the exponent for the second form of the abc bound.
    pub eta: f64,
    /// `N^(1)([0] + [inf], b/c) = log rad(bc)`.
    pub n1: f64,
    /// `h(b/c) = log c`.
    pub h: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// The constant at which this record is tight, when there is one.
    pub kappa: Option<f64>,
    /// All four truncated counting identities hold as prime sets.
    pub identity: bool,
}

impl TripleRecord {
    pub const CSV_HEADER: &'static str = "a,b,c,rad,quality,log_c_over_a,eta,n1,h,lhs,rhs,holds,identity";

    pub fn csv_row(&self) -> String {
        let t = &self.triple;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            t.a,
            t.b,
            t.c,
            self.rad,
            fmt_sig(self.quality),
            fmt_sig(self.log_c_over_a),
            fmt_sig(self.eta),
            fmt_sig(self.n1),
            fmt_sig(self.h),
            fmt_sig(self.lhs),
            fmt_sig(self.rhs),
            self.holds,
            self.identity
        )
    }
}

fn primes_product(primes: &[u128]) -> u128 {
    primes.iter().product()
}

/// The four identities `N([0]+[1]+[inf]) = log rad(abc)`, `N([0]) = log rad(b)`,
/// `N([inf]) = log rad(c)`, `N([1]) = log rad(a)` at `x = b/c`, compared as
/// prime sets against the given radicals.
pub struct IdentityChecker {
    all: DivisorSpec,
    zero: DivisorSpec,
    one: DivisorSpec,
    inf: DivisorSpec,
}

impl IdentityChecker {
    pub fn new() -> Self {
        let single = |e: P1Entry| DivisorSpec::P1(vec![(e, 1)]);
        IdentityChecker {
            all: DivisorSpec::zero_one_infinity(),
            zero: single(P1Entry::ZERO),
            one: single(P1Entry::ONE),
            inf: single(P1Entry::INFINITY),
        }
    }

    pub fn check(&self, t: &Triple, rad_a: u128, rad_b: u128, rad_c: u128) -> Result<bool, ScanError> {
        let x = t.x();
        let support = |d: &DivisorSpec| -> Result<u128, ScanError> { Ok(primes_product(&d.counting_support(&x)?)) };
        Ok(support(&self.all)? == rad_a * rad_b * rad_c
            && support(&self.zero)? == rad_b
            && support(&self.inf)? == rad_c
            && support(&self.one)? == rad_a)
    }
}

impl Default for IdentityChecker {
    fn default() -> Self {
        Self::new()
    }
}

fn rad_of(n: u64) -> Result<u128, ScanError> {
    Ok(factorize_u128(n as u128)?.radical())
}

/// The bound's left side and shape for one triple.
fn triple_shape(
    t: &Triple,
    params: &ScanParams,
    lambda: f64,
    rads: (u128, u128, u128),
) -> Result<(f64, Shape), ScanError> {
    let (ra, rb, rc) = rads;
    let h = (t.c as f64).ln();
    let rad_bc = (rb * rc) as f64;
    let n1 = rad_bc.ln();
    let rad = (ra * rb * rc) as f64;
    let log_c = h;
    Ok(match params.variant {
        Variant::Thm1 => (lambda, Shape::Thm1 { h, rad: rad_bc }),
        Variant::Thm1Bis => (lambda, Shape::Thm1Bis { h, n1 }),
        Variant::Coromain => (lambda, Shape::Coromain { n1, h_d: 2.0 * h }),
        Variant::LwLemma => (lambda, Shape::LwLemma { n1, hx: h }),
        Variant::CoroAbc => (log_c, Shape::CoroAbc { a: t.a as f64, rad }),
        Variant::StewartYu => (log_c, Shape::StewartYu { rad }),
        Variant::StewartYuP => {
            let p_min = [t.a, t.b, t.c]
                .iter()
                .map(|&n| largest_prime_factor(n as u128))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .min()
                .unwrap_or(1);
            (log_c, Shape::StewartYuP { p_min: p_min as f64, rad })
        }
        v => return Err(ScanError::Unsupported(format!("{v} is not a bound on abc triples"))),
    })
}

/// `lambda_v(alpha, b/c)`; for alpha = 1 this is `log(c/a)` at infinity and `v_p(a) log p` at p.
fn lambda_triple(t: &Triple, params: &ScanParams) -> Result<f64, ScanError> {
    if params.alpha_is_one() {
        return Ok(match params.place {
            Place::Infinity => (t.c as f64 / t.a as f64).ln(),
            Place::Prime(p) => vp_i128(t.a as i128, p) as f64 * (p as f64).ln(),
        });
    }
    let x = BigRational::new(t.b.into(), t.c.into());
    Ok(weil_point(&params.alpha, &x, params.place)?.value)
}

/// Every quantity attached to one triple, computed by exact factorization.
pub fn evaluate_triple(t: &Triple, params: &ScanParams, checker: &IdentityChecker) -> Result<TripleRecord, ScanError> {
    let (ra, rb, rc) = (rad_of(t.a)?, rad_of(t.b)?, rad_of(t.c)?);
    let rad = ra * rb * rc;
    let identity = checker.check(t, ra, rb, rc)?;
    let lambda = lambda_triple(t, params)?;
    let (lhs, shape) = triple_shape(t, params, lambda, (ra, rb, rc))?;
    let rhs = shape.rhs(params.epsilon, params.kappa)?;
    let h = (t.c as f64).ln();
    Ok(TripleRecord {
        triple: *t,
        rad,
        quality: h / (rad as f64).ln(),
        log_c_over_a: (t.c as f64 / t.a as f64).ln(),
        eta: 1.0 - (t.a as f64).ln() / h,
        n1: ((rb * rc) as f64).ln(),
        h,
        lhs,
        rhs,
        holds: holds(params.variant, lhs, rhs),
        kappa: shape.invert(lhs, params.epsilon)?,
        identity,
    })
}

/// A maximum with the first triple attaining it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Best {
    pub value: f64,
    pub triple: Option<Triple>,
}

impl Best {
    pub const NONE: Best = Best { value: f64::NEG_INFINITY, triple: None };

    #[inline]
    pub fn push(&mut self, value: f64, t: Triple) {
        if value > self.value || self.triple.is_none() {
            self.value = value;
            self.triple = Some(t);
        }
    }

    /// `self` precedes `later` in source order; ties keep `self`.
    pub fn merge(self, later: Best) -> Best {
        match (self.triple, later.triple) {
            (None, _) => later,
            (_, None) => self,
            _ if later.value > self.value => later,
            _ => self,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanSummary {
    pub variant: Variant,
    pub epsilon: f64,
    pub kappa: f64,
    pub place: Place,
    pub records: u64,
    /// Records that could not be evaluated; the first few messages are kept.
    pub skipped: u64,
    pub skipped_messages: Vec<String>,
    pub identity_failures: u64,
    pub violations: u64,
    pub first_violation: Option<Triple>,
    pub max_quality: Best,
    /// Least constant for which every record holds.
    pub kappa_fit: Best,
    /// Records that hold for every constant.
    pub vacuous: u64,
    /// Crossover of the subexponential and Stewart-Yu exponents at this epsilon and constant 1.
    pub crossover: Option<f64>,
}

const KEPT_MESSAGES: usize = 5;

impl ScanSummary {
    fn empty(p: &ScanParams) -> Self {
        ScanSummary {
            variant: p.variant,
            epsilon: p.epsilon,
            kappa: p.kappa,
            place: p.place,
            records: 0,
            skipped: 0,
            skipped_messages: Vec::new(),
            identity_failures: 0,
            violations: 0,
            first_violation: None,
            max_quality: Best::NONE,
            kappa_fit: Best::NONE,
            vacuous: 0,
            crossover: None,
        }
    }

    fn push(&mut self, r: &TripleRecord) {
        self.records += 1;
        if !r.identity {
            self.identity_failures += 1;
        }
        if !r.holds {
            self.violations += 1;
            self.first_violation.get_or_insert(r.triple);
        }
        self.max_quality.push(r.quality, r.triple);
        match r.kappa {
            Some(k) => self.kappa_fit.push(k, r.triple),
            None => self.vacuous += 1,
        }
    }

    fn skip(&mut self, t: &Triple, e: &ScanError) {
        self.skipped += 1;
        if self.skipped_messages.len() < KEPT_MESSAGES {
            self.skipped_messages.push(format!("{t}: {e}"));
        }
    }

    fn merge(mut self, later: ScanSummary) -> ScanSummary {
        self.records += later.records;
        self.skipped += later.skipped;
        for m in later.skipped_messages {
            if self.skipped_messages.len() < KEPT_MESSAGES {
                self.skipped_messages.push(m);
            }
        }
        self.identity_failures += later.identity_failures;
        self.violations += later.violations;
        self.first_violation = self.first_violation.or(later.first_violation);
        self.max_quality = self.max_quality.merge(later.max_quality);
        self.kappa_fit = self.kappa_fit.merge(later.kappa_fit);
        self.vacuous += later.vacuous;
        self
    }
}

impl fmt::Display for ScanSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = |b: &Best| b.triple.map_or("-".to_string(), |t| t.to_string());
        writeln!(f, "variant = {}", self.variant)?;
        writeln!(f, "epsilon = {}", fmt_sig(self.epsilon))?;
        writeln!(f, "kappa = {}", fmt_sig(self.kappa))?;
        writeln!(f, "place = {}", self.place)?;
        writeln!(f, "records = {}", self.records)?;
        writeln!(f, "skipped = {}", self.skipped)?;
        for m in &self.skipped_messages {
            writeln!(f, "  {m}")?;
        }
        writeln!(f, "identity_failures = {}", self.identity_failures)?;
        writeln!(f, "violations = {}", self.violations)?;
        if let Some(v) = self.first_violation {
            writeln!(f, "first_violation = {v}")?;
        }
        writeln!(f, "max_quality = {} at {}", fmt_sig(self.max_quality.value), t(&self.max_quality))?;
        writeln!(f, "kappa_fit = {} at {}", fmt_sig(self.kappa_fit.value), t(&self.kappa_fit))?;
        writeln!(f, "vacuous = {}", self.vacuous)?;
        match self.crossover {
            Some(r) => write!(f, "crossover_r0 = {}", fmt_sig(r)),
            None => write!(f, "crossover_r0 = none"),
        }
    }
}

/// Where the triples of a scan come from.
#[derive(Clone, Debug)]
pub enum TripleSource {
    Enumerate(u64),
    List(Vec<Triple>),
}

/// Evaluates every triple of the source, writing CSV rows in source order to
/// `sink`. Failing records are counted and skipped.
pub fn scan(
    source: &TripleSource,
    params: &ScanParams,
    exec: Exec,
    mut sink: Option<&mut dyn Write>,
) -> Result<ScanSummary, ScanError> {
    let checker = IdentityChecker::new();
    let keep = sink.is_some();
    let run = |triples: &mut dyn Iterator<Item = Triple>| {
        let mut s = ScanSummary::empty(params);
        let mut rows = Vec::new();
        for t in triples {
            match evaluate_triple(&t, params, &checker) {
                Ok(r) => {
                    s.push(&r);
                    if keep {
                        rows.push(r.csv_row());
                    }
                }
                Err(e) => s.skip(&t, &e),
            }
        }
        (s, rows)
    };
    if let Some(w) = sink.as_mut() {
        writeln!(w, "{}", TripleRecord::CSV_HEADER)?;
    }
    let mut total = ScanSummary::empty(params);
    let mut absorb = |parts: Vec<(ScanSummary, Vec<String>)>, total: &mut ScanSummary| -> Result<(), ScanError> {
        for (s, rows) in parts {
            if let Some(w) = sink.as_mut() {
                for r in rows {
                    writeln!(w, "{r}")?;
                }
            }
            *total = std::mem::replace(total, ScanSummary::empty(params)).merge(s);
        }
        Ok(())
    };
    match source {
        TripleSource::Enumerate(c_max) => {
            const C_CHUNK: u64 = 256;
            let ranges: Vec<Range<u64>> =
                (3..=*c_max).step_by(C_CHUNK as usize).map(|s| s..(s + C_CHUNK).min(c_max + 1)).collect();
            for batch in ranges.chunks(64) {
                let parts = exec.map(batch, |r| run(&mut triples_in(r.clone())));
                absorb(parts, &mut total)?;
            }
        }
        TripleSource::List(list) => {
            for batch in list.chunks(1 << 16) {
                let pieces: Vec<&[Triple]> = batch.chunks(1024).collect();
                let parts = exec.map(&pieces, |p| run(&mut p.iter().copied()));
                absorb(parts, &mut total)?;
            }
        }
    }
    if total.records == 0 {
        return Err(ScanError::EmptySample);
    }
    total.crossover = match (
        log_exponent_shape(Variant::CoroAbc, params.epsilon, 1.0),
        log_exponent_shape(Variant::StewartYu, params.epsilon, 1.0),
    ) {
        (Ok(a), Ok(b)) => crossover(&a, &b).ok(),
        _ => None,
    };
    Ok(total)
}

/// Outcome of the table-driven identity suite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityReport {
    pub c_max: u64,
    pub triples: u64,
    pub failures: u64,
    pub first_failure: Option<Triple>,
}

/// Coprimality with `c` for `a` in `0..=c/2`, from the primes of `c`.
fn coprime_mask(primes: &[u64], c: u64, mask: &mut Vec<bool>) {
    let half = (c / 2) as usize;
    mask.clear();
    mask.resize(half + 1, true);
    mask[0] = false;
    for &p in primes {
        let mut m = p as usize;
        while m <= half {
            mask[m] = false;
            m += p as usize;
        }
    }
}

/// Calls `f(a, b, c)` for every triple with `c` in `range`, in `(c, a)` order.
#[inline]
fn for_each_triple(table: &RadicalTable, range: Range<u64>, mut f: impl FnMut(u64, u64, u64)) {
    let mut mask = Vec::new();
    for c in range.start.max(3)..range.end {
        coprime_mask(&table.primes_of(c), c, &mut mask);
        for a in 1..c.div_ceil(2) {
            if mask[a as usize] {
                f(a, c - a, c);
            }
        }
    }
}

const FAST_CHUNK: u64 = 500;

/// Checks the four counting identities for every triple with `c <= c_max`
/// against radicals from a sieve table.
pub fn identity_suite(c_max: u64, exec: Exec) -> IdentityReport {
    let table = RadicalTable::new(c_max.max(3));
    let checker = IdentityChecker::new();
    let (triples, failures, first_failure) = exec.map_reduce(
        3..c_max + 1,
        FAST_CHUNK,
        |r| {
            let (mut n, mut bad, mut first) = (0u64, 0u64, None);
            for_each_triple(&table, r, |a, b, c| {
                n += 1;
                let t = Triple { a, b, c };
                let ok = checker
                    .check(&t, table.rad(a) as u128, table.rad(b) as u128, table.rad(c) as u128)
                    .unwrap_or(false);
                if !ok {
                    bad += 1;
                    first.get_or_insert(t);
                }
            });
            (n, bad, first)
        },
        (0, 0, None),
        |x, y| (x.0 + y.0, x.1 + y.1, x.2.or(y.2)),
    );
    IdentityReport { c_max, triples, failures, first_failure }
}

/// Left side and shape for alpha = 1, from table data.
#[derive(Clone, Copy)]
struct FastInputs {
    lhs: f64,
    h: f64,
    n1: f64,
    ln_rad: f64,
    a: u64,
}

fn fast_inputs(table: &RadicalTable, place: Place, a: u64, b: u64, c: u64) -> FastInputs {
    let h = table.ln(c);
    let lhs = match place {
        Place::Infinity => h - table.ln(a),
        Place::Prime(p) => vp_i128(a as i128, p) as f64 * (p as f64).ln(),
    };
    let n1 = table.ln_rad(b) + table.ln_rad(c);
    FastInputs { lhs, h, n1, ln_rad: n1 + table.ln_rad(a), a }
}

fn fast_supported(variant: Variant) -> Result<(), ScanError> {
    match variant {
        Variant::Thm1 | Variant::Thm1Bis | Variant::CoroAbc | Variant::StewartYu | Variant::Coromain | Variant::LwLemma => {
            Ok(())
        }
        v => Err(ScanError::Unsupported(format!("{v} has no table-driven path"))),
    }
}

/// The constant at which the bound is tight for these inputs (alpha = 1).
#[inline]
fn fast_invert(variant: Variant, eps: f64, x: &FastInputs) -> Option<f64> {
    let k = match variant {
        Variant::Thm1Bis if x.lhs > 0.0 => x.lhs.ln() - logstar(x.h).ln() - thm1bis_exponent(x.n1, eps),
        Variant::Thm1 if x.lhs > 0.0 => x.lhs.ln() - logstar(x.h).ln() - thm1_exponent_from_log(x.n1, eps),
        Variant::Thm1 | Variant::Thm1Bis => return None,
        _ => return fast_shape(variant, x).invert(x.lhs, eps).ok().flatten(),
    };
    Some(k)
}

fn fast_shape(variant: Variant, x: &FastInputs) -> Shape {
    match variant {
        Variant::Thm1 => Shape::Thm1 { h: x.h, rad: x.n1.exp() },
        Variant::Thm1Bis => Shape::Thm1Bis { h: x.h, n1: x.n1 },
        Variant::CoroAbc => Shape::CoroAbc { a: x.a as f64, rad: x.ln_rad.exp() },
        Variant::StewartYu => Shape::StewartYu { rad: x.ln_rad.exp() },
        Variant::Coromain => Shape::Coromain { n1: x.n1, h_d: 2.0 * x.h },
        _ => Shape::LwLemma { n1: x.n1, hx: x.h },
    }
}

/// Left side for the c-bound variants is `log c`.
fn fast_lhs(variant: Variant, x: &FastInputs) -> f64 {
    match variant {
        Variant::CoroAbc | Variant::StewartYu => x.h,
        _ => x.lhs,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AbcFit {
    pub variant: Variant,
    pub epsilon: f64,
    pub place: Place,
    pub c_max: u64,
    pub triples: u64,
    pub vacuous: u64,
    pub kappa: Best,
    pub max_quality: Best,
}

/// Fits the constant of `variant` (alpha = 1) over every triple with `c <= c_max`.
pub fn fit_abc(c_max: u64, variant: Variant, eps: f64, place: Place, exec: Exec) -> Result<AbcFit, ScanError> {
    fast_supported(variant)?;
    if !(eps > 0.0) {
        return Err(BoundError::BadParams(format!("epsilon = {eps}")).into());
    }
    let table = RadicalTable::new(c_max.max(3));
    let (triples, vacuous, kappa, max_quality) = exec.map_reduce(
        3..c_max + 1,
        FAST_CHUNK,
        |r| {
            let (mut n, mut vac, mut best, mut q) = (0u64, 0u64, Best::NONE, Best::NONE);
            for_each_triple(&table, r, |a, b, c| {
                n += 1;
                let x = fast_inputs(&table, place, a, b, c);
                let x = FastInputs { lhs: fast_lhs(variant, &x), ..x };
                match fast_invert(variant, eps, &x) {
                    Some(k) => best.push(k, Triple { a, b, c }),
                    None => vac += 1,
                }
                q.push(x.h / x.ln_rad, Triple { a, b, c });
            });
            (n, vac, best, q)
        },
        (0, 0, Best::NONE, Best::NONE),
        |x, y| (x.0 + y.0, x.1 + y.1, x.2.merge(y.2), x.3.merge(y.3)),
    );
    if triples == 0 {
        return Err(ScanError::EmptySample);
    }
    Ok(AbcFit { variant, epsilon: eps, place, c_max, triples, vacuous, kappa, max_quality })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AbcCheck {
    pub triples: u64,
    pub violations: u64,
    pub first_violation: Option<Triple>,
    /// Largest `lhs - rhs` and where it occurs.
    pub worst: Best,
}

/// Evaluates the bound of `variant` at constant `kappa` on every triple with
/// `c <= c_max` and counts the failures.
pub fn check_abc(c_max: u64, variant: Variant, eps: f64, kappa: f64, place: Place, exec: Exec) -> Result<AbcCheck, ScanError> {
    fast_supported(variant)?;
    let table = RadicalTable::new(c_max.max(3));
    let (triples, violations, first_violation, worst) = exec.map_reduce(
        3..c_max + 1,
        FAST_CHUNK,
        |r| {
            let (mut n, mut bad, mut first, mut worst) = (0u64, 0u64, None, Best::NONE);
            for_each_triple(&table, r, |a, b, c| {
                n += 1;
                let x = fast_inputs(&table, place, a, b, c);
                let lhs = fast_lhs(variant, &x);
                let rhs = match variant {
                    Variant::Thm1Bis => logstar(x.h) * (thm1bis_exponent(x.n1, eps) + kappa).exp(),
                    Variant::Thm1 => logstar(x.h) * (thm1_exponent_from_log(x.n1, eps) + kappa).exp(),
                    _ => fast_shape(variant, &x).rhs(eps, kappa).unwrap_or(f64::NAN),
                };
                let t = Triple { a, b, c };
                if !holds(variant, lhs, rhs) {
                    bad += 1;
                    first.get_or_insert(t);
                }
                worst.push(lhs - rhs, t);
            });
            (n, bad, first, worst)
        },
        (0, 0, None, Best::NONE),
        |x, y| (x.0 + y.0, x.1 + y.1, x.2.or(y.2), x.3.merge(y.3)),
    );
    Ok(AbcCheck { triples, violations, first_violation, worst })
}

/// The primes of the Lang-Waldschmidt experiment.
pub const LW_PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// One point of the Lang-Waldschmidt grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LwPoint {
    pub a: Vec<u64>,
    pub b: Vec<i64>,
}

impl fmt::Display for LwPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.a.iter().zip(&self.b).map(|(a, b)| format!("{a}^{b}")).collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Sets of `n <= max_n` distinct primes from [`LW_PRIMES`] with exponents
/// `1 <= |b_i| <= b_max`, in a fixed order.
pub fn lw_grid(max_n: usize, b_max: i64) -> Vec<LwPoint> {
    fn subsets(start: usize, k: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if k == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..LW_PRIMES.len() {
            cur.push(LW_PRIMES[i]);
            subsets(i + 1, k - 1, cur, out);
            cur.pop();
        }
    }
    let exps: Vec<i64> = (-b_max..=b_max).filter(|&b| b != 0).collect();
    let mut out = Vec::new();
    for n in 1..=max_n {
        let mut sets = Vec::new();
        subsets(0, n, &mut Vec::new(), &mut sets);
        for a in sets {
            let mut idx = vec![0usize; n];
            loop {
                out.push(LwPoint { a: a.clone(), b: idx.iter().map(|&i| exps[i]).collect() });
                let mut k = n;
                loop {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < exps.len() {
                        break;
                    }
                    idx[k] = 0;
                    if k == 0 {
                        k = usize::MAX;
                        break;
                    }
                }
                if k == usize::MAX {
                    break;
                }
            }
        }
    }
    out
}

/// `C_min(eps)`: the least `|prod a^b - 1| |prod b a|^(1+eps) / max|b|` over the grid.
pub fn lw_experiment(grid: &[LwPoint], eps: f64, exec: Exec) -> Result<(FitResult, Vec<(f64, Shape)>), ScanError> {
    let records = exec
        .map(grid, |p| Ok((lw_lhs(&p.a, &p.b)?, Shape::LwConj { a: p.a.clone(), b: p.b.clone() })))
        .into_iter()
        .collect::<Result<Vec<_>, BoundError>>()?;
    Ok((fit_kappa(&records, Variant::LwConj, eps)?, records))
}

/// S-units `2^e1 3^e2 5^e3` with `|e_i| <= e_max`, `x != 1`, as points `[b : c]`.
pub fn s_unit_points(e_max: i32) -> Vec<ProjPoint> {
    let mut out = Vec::new();
    for e1 in -e_max..=e_max {
        for e2 in -e_max..=e_max {
            for e3 in -e_max..=e_max {
                if (e1, e2, e3) == (0, 0, 0) {
                    continue;
                }
                let (mut num, mut den) = (1i128, 1i128);
                for (p, e) in [(2i128, e1), (3, e2), (5, e3)] {
                    if e > 0 {
                        num *= p.pow(e as u32);
                    } else {
                        den *= p.pow((-e) as u32);
                    }
                }
                out.push(ProjPoint::new(vec![num, den]).expect("nonzero"));
            }
        }
    }
    out
}

/// Records `(lambda_inf(1, x), shape)` of the Lang-Waldschmidt consequence on S-unit points.
pub fn lw_lemma_records(points: &[ProjPoint], exec: Exec) -> Result<Vec<(f64, Shape)>, ScanError> {
    let d = DivisorSpec::P1(vec![(P1Entry::ZERO, 1), (P1Entry::INFINITY, 1)]);
    exec.map(points, |x| {
        let q = x.as_rational().ok_or(FunError::OnDivisor)?;
        let lhs = weil_point(&P1Target::One, &q, Place::Infinity)?.value;
        let n1 = d.truncated_counting(x)?.eval();
        Ok((lhs, Shape::LwLemma { n1, hx: x.height().eval() }))
    })
    .into_iter()
    .collect()
}

/// Locked constants: lines `<variant> <key> = <value> # <argmax>`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FittedConstants {
    entries: Vec<(String, f64, String)>,
}

impl FittedConstants {
    /// A missing file reads as empty.
    pub fn load(path: &Path) -> Result<Self, ScanError> {
        match std::fs::read_to_string(path) {
            Ok(s) => s.parse(),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(e.into()),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), ScanError> {
        std::fs::write(path, self.to_string())?;
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.entries.iter().find(|(k, ..)| k == key).map(|(_, v, _)| *v)
    }

    pub fn note(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, ..)| k == key).map(|(.., n)| n.as_str())
    }

    /// Inserts or replaces, keeping entries sorted by key.
    pub fn set(&mut self, key: &str, value: f64, note: &str) {
        match self.entries.iter_mut().find(|(k, ..)| k == key) {
            Some(e) => *e = (key.to_string(), value, note.to_string()),
            None => {
                self.entries.push((key.to_string(), value, note.to_string()));
                self.entries.sort_by(|x, y| x.0.cmp(&y.0));
            }
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, ..)| k.as_str())
    }
}

impl FromStr for FittedConstants {
    type Err = ScanError;

    fn from_str(s: &str) -> Result<Self, ScanError> {
        let mut out = FittedConstants::default();
        for (idx, line) in s.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let bad = || ScanError::Parse { line: idx + 1, msg: format!("expected `key = value # note`, got {t:?}") };
            let (body, note) = t.split_once('#').map_or((t, ""), |(b, n)| (b, n.trim()));
            let (key, value) = body.rsplit_once('=').ok_or_else(bad)?;
            let value: f64 = value.trim().parse().map_err(|_| bad())?;
            out.set(key.trim(), value, note);
        }
        Ok(out)
    }
}

impl fmt::Display for FittedConstants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v, n) in &self.entries {
            if n.is_empty() {
                writeln!(f, "{k} = {v:?}")?;
            } else {
                writeln!(f, "{k} = {v:?} # {n}")?;
            }
        }
        Ok(())
    }
}

/// Key of the abc constant of `variant` at `c_max` and `eps` (alpha = 1, v = infinity).
pub fn abc_key(variant: Variant, c_max: u64, eps: f64) -> String {
    format!("{variant} cmax={c_max} eps={eps}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::radical;
    use proptest::prelude::*;

    #[test]
    fn enumeration_examples() {
        let ts: Vec<Triple> = enumerate_triples(10).collect();
        assert_eq!(ts.len(), 15);
        assert_eq!(ts[0], Triple { a: 1, b: 2, c: 3 });
        assert_eq!(*ts.last().unwrap(), Triple { a: 3, b: 7, c: 10 });
        assert_eq!(enumerate_triples(3).collect::<Vec<_>>(), vec![Triple { a: 1, b: 2, c: 3 }]);
        assert!(enumerate_triples(9).any(|t| t == Triple { a: 1, b: 8, c: 9 }));
        // brute force over all pairs
        let brute = (3u64..=200)
            .flat_map(|c| (1..c).map(move |a| (a, c - a, c)))
            .filter(|&(a, b, c)| Triple::new(a, b, c).is_ok())
            .count();
        assert_eq!(enumerate_triples(200).count(), brute);
    }

    #[test]
    fn ingest_examples() {
        let text = "# header\n1 8 9\n\n2 4 6\n1 9 8\nx y z\n5 27 32\n";
        let got: Vec<_> = ingest_triples(text.as_bytes()).collect();
        assert_eq!(got[0], Ok(Triple { a: 1, b: 8, c: 9 }));
        assert_eq!(got[1], Err(ScanError::InvariantViolation { line: 4, which: TripleViolation::NotCoprime(2) }));
        assert_eq!(got[2], Err(ScanError::InvariantViolation { line: 5, which: TripleViolation::SumMismatch }));
        assert!(matches!(got[3], Err(ScanError::Parse { line: 6, .. })));
        assert_eq!(got[4], Ok(Triple { a: 5, b: 27, c: 32 }));
        assert_eq!(Triple::new(2, 1, 3), Err(TripleViolation::NotOrdered));
    }

    #[test]
    fn evaluate_examples() {
        let p = ScanParams::standard(Variant::Thm1Bis, 1.0, 0.0).unwrap();
        let ch = IdentityChecker::new();
        let r = evaluate_triple(&Triple::new(1, 8, 9).unwrap(), &p, &ch).unwrap();
        assert_eq!(r.rad, 6);
        assert!((r.quality - 1.22629).abs() < 1e-5);
        assert!((r.log_c_over_a - 9f64.ln()).abs() < 1e-15);
        assert!(r.identity);
        let r = evaluate_triple(&Triple::new(1, 2, 3).unwrap(), &p, &ch).unwrap();
        assert!((r.quality - 0.6131).abs() < 1e-4);
        let r = evaluate_triple(&Triple::new(1, 80, 81).unwrap(), &p, &ch).unwrap();
        assert_eq!(r.rad, 30);
        assert!((r.quality - 1.2920).abs() < 1e-4);
        assert!(ScanParams::standard(Variant::LwConj, 1.0, 0.0).is_err());
    }

    #[test]
    fn fmt_sig_examples() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(9f64.ln()), "2.19722457734");
        assert_eq!(fmt_sig(-0.36651292058166435), "-0.366512920582");
        assert_eq!(fmt_sig(123456789.123456789), "123456789.123");
        assert_eq!(fmt_sig(1e300), "1.00000000000e300");
        assert_eq!(fmt_sig(f64::INFINITY), "inf");
        assert_eq!(fmt_sig(0.000123456789012345), "0.000123456789012");
    }

    #[test]
    fn scan_small_sources() {
        let p = ScanParams::standard(Variant::Thm1Bis, 1.0, 0.0).unwrap();
        let list: Vec<Triple> = enumerate_triples(10).collect();
        let mut out = Vec::new();
        let s = scan(&TripleSource::List(list), &p, Exec::Sequential, Some(&mut out)).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 16);
        assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
        assert_eq!(s.records, 15);
        assert_eq!(s.identity_failures, 0);
        assert_eq!(scan(&TripleSource::List(vec![]), &p, Exec::Sequential, None), Err(ScanError::EmptySample));

        let seq = scan(&TripleSource::Enumerate(2000), &p, Exec::Sequential, None).unwrap();
        for jobs in [2, 8] {
            let par = scan(&TripleSource::Enumerate(2000), &p, Exec::from_jobs(jobs), None).unwrap();
            assert_eq!(par.to_string(), seq.to_string());
        }
    }

    #[test]
    fn fast_paths_agree_with_exact_scan() {
        for v in [Variant::Thm1, Variant::Thm1Bis, Variant::CoroAbc, Variant::StewartYu, Variant::Coromain, Variant::LwLemma] {
            let p = ScanParams::standard(v, 1.0, 0.0).unwrap();
            let exact = scan(&TripleSource::Enumerate(300), &p, Exec::Sequential, None).unwrap();
            let fast = fit_abc(300, v, 1.0, Place::Infinity, Exec::Sequential).unwrap();
            assert_eq!(fast.triples, exact.records);
            assert_eq!(fast.kappa.triple, exact.kappa_fit.triple, "{v}");
            assert!((fast.kappa.value - exact.kappa_fit.value).abs() < 1e-9 * exact.kappa_fit.value.abs().max(1.0));
            let check = check_abc(300, v, 1.0, fast.kappa.value, Place::Infinity, Exec::Sequential).unwrap();
            assert_eq!(check.violations, 0, "{v}");
        }
        let at3 = fit_abc(300, Variant::Thm1Bis, 1.0, Place::Prime(3), Exec::Sequential).unwrap();
        let p3 = ScanParams::new(Variant::Thm1Bis, 1.0, 0.0, Place::Prime(3), P1Target::One).unwrap();
        let exact = scan(&TripleSource::Enumerate(300), &p3, Exec::Sequential, None).unwrap();
        assert_eq!(at3.kappa.triple, exact.kappa_fit.triple);
        assert_eq!(at3.vacuous, exact.vacuous);
    }

    #[test]
    fn identity_suite_small() {
        let r = identity_suite(500, Exec::Sequential);
        assert_eq!(r.failures, 0);
        assert_eq!(r.triples, enumerate_triples(500).count() as u64);
        assert_eq!(identity_suite(500, Exec::from_jobs(4)), r);
    }

    #[test]
    fn lw_grid_shape() {
        let g = lw_grid(2, 2);
        // 8 * 4 + 28 * 16
        assert_eq!(g.len(), 32 + 28 * 16);
        assert_eq!(g[0], LwPoint { a: vec![2], b: vec![-2] });
        let (fit, _) = lw_experiment(&g, 1.0, Exec::Sequential).unwrap();
        assert!(fit.kappa_min > 0.0);
        assert_eq!(s_unit_points(1).len(), 26);
    }

    #[test]
    fn constants_roundtrip() {
        let mut c = FittedConstants::default();
        c.set("thm1bis cmax=10 eps=1", -0.5, "(1,8,9)");
        c.set("lw cmin", 0.25, "");
        c.set("thm1bis cmax=10 eps=1", -0.25, "(1,8,9)");
        let text = c.to_string();
        assert_eq!(text, "lw cmin = 0.25\nthm1bis cmax=10 eps=1 = -0.25 # (1,8,9)\n");
        assert_eq!(text.parse::<FittedConstants>().unwrap(), c);
        assert_eq!(c.get("lw cmin"), Some(0.25));
        assert_eq!(abc_key(Variant::Thm1Bis, 100000, 1.0), "thm1bis cmax=100000 eps=1");
    }

    proptest! {
        #[test]
        fn record_correspondence(a in 1u64..5000, b in 1u64..5000) {
            prop_assume!(a < b && a.gcd(&b) == 1);
            let t = Triple::new(a, b, a + b).unwrap();
            let p = ScanParams::standard(Variant::Thm1Bis, 1.0, 0.0).unwrap();
            let r = evaluate_triple(&t, &p, &IdentityChecker::new()).unwrap();
            prop_assert!(r.identity);
            prop_assert_eq!(r.rad, radical((a * b * (a + b)) as i128).unwrap());
            // h(O(1), b/c) = log c exactly
            prop_assert_eq!(t.x().height(), crate::exactnum::FormalLogSum::log_of((a + b) as u128));
            prop_assert!(r.quality > 0.0);
        }
    }
}
