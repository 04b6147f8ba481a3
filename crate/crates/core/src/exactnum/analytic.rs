//! Elementary analytic facts used when bounding linear-form estimates by the
//! radical: the prime-count bound, the exponential comparison, and AM-GM.

use super::{logstar, small_primes};

/// `12n - log(n (log* n) (16e)^{3n})`; positive exactly when
/// `n (log* n) (16e)^{3n} < e^{12n}`. Evaluated in log form since
/// `e^{12n}` overflows doubles from n = 60 on.
pub fn elementary_bound_log_gap(n: u64) -> f64 {
    let n = n as f64;
    let log_lhs = n.ln() + logstar(n).ln() + 3.0 * n * (16.0f64.ln() + 1.0);
    12.0 * n - log_lhs
}

/// `n log(mean) - sum log(x_j)` for positive `x_j`: the log of
/// `((sum x_j)/n)^n / prod x_j`, nonnegative by AM-GM.
pub fn amgm_log_gap(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    n * mean.ln() - values.iter().map(|v| v.ln()).sum::<f64>()
}

/// `omega * log log m < (1 + eps) log m`, for `m >= 2`.
pub fn omega_bound_holds(m: u64, omega: u32, eps: f64) -> bool {
    let l = (m as f64).ln();
    (omega as f64) * l.ln() < (1.0 + eps) * l
}

/// Products of the first k primes that do not exceed `limit`, with k.
pub fn primorials_up_to(limit: u64) -> Vec<(u32, u64)> {
    let mut out = Vec::new();
    let mut acc = 1u64;
    for (i, &p) in small_primes().iter().enumerate() {
        match acc.checked_mul(p) {
            Some(v) if v <= limit => {
                acc = v;
                out.push((i as u32 + 1, acc));
            }
            _ => break,
        }
    }
    out
}

/// Threshold above which the prime-count bound is guaranteed on `[2, limit]`.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaThreshold {
    /// Every `m` in `(kappa2, limit]` satisfies the bound; 1 when no primorial fails.
    pub kappa2: u64,
    /// Primorials (k, p_k#) at which the bound fails.
    pub failing_primorials: Vec<(u32, u64)>,
}

/// For `omega(m) = k` the left side is smallest relative to the right at the
/// least such m, the k-th primorial, because `log m / log log m` increases for
/// `m > e^e`. So the bound can fail for some m with k prime factors only if it
/// fails at the primorial, and then only up to the largest real m with
/// `(1 + eps) log m / log log m <= k`. The threshold is the largest such m over
/// the failing primorials.
///
/// Integers below `e^e` are handled directly since the monotonicity argument
/// does not apply there.
pub fn omega_threshold_from_primorials(eps: f64, limit: u64) -> OmegaThreshold {
    let mut kappa2 = 1u64;
    for m in 3u64..16 {
        let w = crate::exactnum::omega(m as i128).unwrap_or(0) as u32;
        if !omega_bound_holds(m, w, eps) {
            kappa2 = kappa2.max(m);
        }
    }
    let mut failing = Vec::new();
    for (k, primorial) in primorials_up_to(limit) {
        if primorial < 16 || omega_bound_holds(primorial, k, eps) {
            continue;
        }
        failing.push((k, primorial));
        // g(m) = (1+eps) log m / log log m is increasing past e^e; find the last m <= limit with g(m) <= k.
        let g = |m: f64| (1.0 + eps) * m.ln() / m.ln().ln();
        let (mut lo, mut hi) = (primorial as f64, limit as f64);
        if g(hi) <= k as f64 {
            kappa2 = kappa2.max(limit);
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) <= k as f64 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        kappa2 = kappa2.max(lo.ceil() as u64);
    }
    OmegaThreshold { kappa2, failing_primorials: failing }
}
