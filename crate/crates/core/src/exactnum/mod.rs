//! Exact integer primitives: factorization, radicals, prime counting
//! functions, the starred logarithms, and symbolic sums of logarithms.

mod analytic;
mod factor;
mod logsum;
mod sieve;

pub use analytic::{
    amgm_log_gap, elementary_bound_log_gap, omega_bound_holds, omega_threshold_from_primorials,
    primorials_up_to, OmegaThreshold,
};
pub use factor::{
    factorize, factorize_u128, is_probable_prime, largest_prime_factor, omega, radical, small_primes,
    smallest_prime_factors, FactorConfig, PrimeFactorization, SPF_LIMIT, TRIAL_LIMIT,
};
pub use logsum::{Coeff, FormalLogSum, LogComparison, LOGSUM_TOLERANCE};
pub use sieve::RadicalTable;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumError {
    #[error("zero has no prime factorization")]
    ZeroInput,
    #[error("cannot fully factor {value} within the configured limits")]
    FactorizationTooLarge { value: u128 },
}

/// `log max{e, t}`; always at least 1.
#[inline]
pub fn logstar(t: f64) -> f64 {
    if t > std::f64::consts::E {
        t.ln()
    } else {
        1.0
    }
}

/// `r`-fold iterate of [`logstar`]. `r = 0` is treated as 1.
pub fn logstar_iter(t: f64, r: u32) -> f64 {
    let mut v = logstar(t);
    for _ in 1..r {
        v = logstar(v);
    }
    v
}

/// `log max{1, t}`.
#[inline]
pub fn logplus(t: f64) -> f64 {
    if t > 1.0 {
        t.ln()
    } else {
        0.0
    }
}
