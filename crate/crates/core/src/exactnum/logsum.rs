use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

/// Absolute tolerance for numeric comparisons of log sums.
pub const LOGSUM_TOLERANCE: f64 = 1e-9;

pub type Coeff = Ratio<u64>;

/// A nonnegative combination `sum c_p log p + sum log n`, kept symbolic.
///
/// Prime terms map each prime to a positive rational coefficient; integer
/// terms are a sorted multiset of integers greater than one. Zero
/// coefficients and unit integers are dropped on construction, so two sums
/// with the same value built from the same terms compare structurally equal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FormalLogSum {
    prime_terms: BTreeMap<u128, Coeff>,
    integer_terms: Vec<u128>,
}

/// Result of comparing two log sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LogComparison {
    pub ordering: Ordering,
    /// True when the order was decided from the terms alone.
    pub exact: bool,
}

impl FormalLogSum {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `log p` for every prime in the iterator (coefficient 1 each, repeats add).
    pub fn from_primes<I: IntoIterator<Item = u128>>(primes: I) -> Self {
        let mut s = Self::zero();
        for p in primes {
            s.add_prime(p, Coeff::from_integer(1));
        }
        s
    }

    /// `log n` as a single integer term.
    pub fn log_of(n: u128) -> Self {
        let mut s = Self::zero();
        s.add_integer(n);
        s
    }

    pub fn add_prime(&mut self, p: u128, c: Coeff) {
        if c.is_zero() {
            return;
        }
        *self.prime_terms.entry(p).or_insert_with(Coeff::zero) += c;
    }

    pub fn add_integer(&mut self, n: u128) {
        if n > 1 {
            let at = self.integer_terms.partition_point(|&m| m <= n);
            self.integer_terms.insert(at, n);
        }
    }

    pub fn prime_terms(&self) -> &BTreeMap<u128, Coeff> {
        &self.prime_terms
    }

    pub fn integer_terms(&self) -> &[u128] {
        &self.integer_terms
    }

    pub fn is_zero(&self) -> bool {
        self.prime_terms.is_empty() && self.integer_terms.is_empty()
    }

    pub fn prime_support(&self) -> impl Iterator<Item = u128> + '_ {
        self.prime_terms.keys().copied()
    }

    /// When the sum is `log m` for a squarefree `m` (unit prime coefficients,
    /// no integer terms), returns `m`.
    pub fn as_squarefree(&self) -> Option<u128> {
        if !self.integer_terms.is_empty() {
            return None;
        }
        let one = Coeff::from_integer(1);
        self.prime_terms.iter().try_fold(1u128, |acc, (&p, c)| {
            if *c == one {
                acc.checked_mul(p)
            } else {
                None
            }
        })
    }

    pub fn scaled(&self, k: u64) -> Self {
        let mut out = Self::zero();
        if k == 0 {
            return out;
        }
        for (&p, c) in &self.prime_terms {
            out.add_prime(p, *c * k);
        }
        for _ in 0..k {
            for &n in &self.integer_terms {
                out.add_integer(n);
            }
        }
        out
    }

    /// Double-precision value; terms are summed in key order.
    pub fn eval(&self) -> f64 {
        let primes: f64 = self
            .prime_terms
            .iter()
            .map(|(&p, c)| c.to_f64().unwrap_or(f64::INFINITY) * (p as f64).ln())
            .sum();
        let ints: f64 = self.integer_terms.iter().map(|&n| (n as f64).ln()).sum();
        primes + ints
    }

    /// Exact when the terms decide the order: identical sums are equal, and a
    /// pure prime sum whose coefficients are dominated termwise by another's is
    /// below it. Otherwise falls back to values with [`LOGSUM_TOLERANCE`].
    pub fn compare(&self, other: &Self) -> LogComparison {
        if self == other {
            return LogComparison { ordering: Ordering::Equal, exact: true };
        }
        if self.integer_terms.is_empty() && other.integer_terms.is_empty() {
            if dominated(&self.prime_terms, &other.prime_terms) {
                return LogComparison { ordering: Ordering::Less, exact: true };
            }
            if dominated(&other.prime_terms, &self.prime_terms) {
                return LogComparison { ordering: Ordering::Greater, exact: true };
            }
        }
        let (a, b) = (self.eval(), other.eval());
        let ordering = if (a - b).abs() <= LOGSUM_TOLERANCE {
            Ordering::Equal
        } else if a < b {
            Ordering::Less
        } else {
            Ordering::Greater
        };
        LogComparison { ordering, exact: false }
    }
}

fn dominated(small: &BTreeMap<u128, Coeff>, big: &BTreeMap<u128, Coeff>) -> bool {
    small.iter().all(|(p, c)| big.get(p).is_some_and(|d| c <= d))
}

impl std::ops::Add for &FormalLogSum {
    type Output = FormalLogSum;

    fn add(self, rhs: &FormalLogSum) -> FormalLogSum {
        let mut out = self.clone();
        for (&p, c) in &rhs.prime_terms {
            out.add_prime(p, *c);
        }
        for &n in &rhs.integer_terms {
            out.add_integer(n);
        }
        out
    }
}

impl fmt::Display for FormalLogSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (p, c) in &self.prime_terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if *c == Coeff::from_integer(1) {
                write!(f, "log {p}")?;
            } else {
                write!(f, "{c}·log {p}")?;
            }
        }
        for n in &self.integer_terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "log {n}")?;
        }
        Ok(())
    }
}
