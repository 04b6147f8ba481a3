//! Integer factorization for magnitudes below 2^128.
//!
//! Small inputs go through a smallest-prime-factor table. Larger inputs are
//! trial-divided by the primes below 10^6, and whatever cofactor survives is
//! split with Brent's variant of Pollard rho, with Miller-Rabin deciding
//! primality of the pieces.

use once_cell::sync::Lazy;

use super::NumError;

/// Inputs below this bound are factored with the smallest-prime-factor table.
pub const SPF_LIMIT: usize = 1 << 20;

/// Trial division covers every prime below this bound.
pub const TRIAL_LIMIT: u64 = 1_000_000;

static SPF: Lazy<Vec<u32>> = Lazy::new(|| smallest_prime_factors(SPF_LIMIT));

static TRIAL_PRIMES: Lazy<Vec<u64>> = Lazy::new(|| {
    SPF.iter()
        .enumerate()
        .skip(2)
        .filter(|&(n, &p)| p as usize == n && (n as u64) < TRIAL_LIMIT)
        .map(|(n, _)| n as u64)
        .collect()
});

/// Smallest-prime-factor table for `0..limit` (entries 0 and 1 are 0 and 1).
pub fn smallest_prime_factors(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit.max(2)];
    if limit > 1 {
        spf[1] = 1;
    }
    let mut primes: Vec<u32> = Vec::new();
    for n in 2..limit {
        if spf[n] == 0 {
            spf[n] = n as u32;
            primes.push(n as u32);
        }
        let sn = spf[n];
        for &p in &primes {
            let m = n * p as usize;
            if p > sn || m >= limit {
                break;
            }
            spf[m] = p;
        }
    }
    spf
}

/// Primes below 10^6, ascending.
pub fn small_primes() -> &'static [u64] {
    &TRIAL_PRIMES
}

/// Sorted prime-power decomposition of `|n|`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PrimeFactorization {
    entries: Vec<(u128, u32)>,
}

impl PrimeFactorization {
    /// Builds a factorization from unsorted `(prime, exponent)` pairs, merging repeats.
    /// The caller guarantees every base is prime.
    pub fn from_pairs(mut pairs: Vec<(u128, u32)>) -> Self {
        pairs.retain(|&(_, e)| e > 0);
        pairs.sort_unstable_by_key(|&(p, _)| p);
        let mut entries: Vec<(u128, u32)> = Vec::with_capacity(pairs.len());
        for (p, e) in pairs {
            match entries.last_mut() {
                Some((q, f)) if *q == p => *f += e,
                _ => entries.push((p, e)),
            }
        }
        PrimeFactorization { entries }
    }

    pub fn entries(&self) -> &[(u128, u32)] {
        &self.entries
    }

    pub fn primes(&self) -> impl Iterator<Item = u128> + '_ {
        self.entries.iter().map(|&(p, _)| p)
    }

    pub fn is_one(&self) -> bool {
        self.entries.is_empty()
    }

    /// Product of `p^e`; `None` on overflow.
    pub fn value(&self) -> Option<u128> {
        self.entries.iter().try_fold(1u128, |acc, &(p, e)| {
            let pe = p.checked_pow(e)?;
            acc.checked_mul(pe)
        })
    }

    pub fn radical(&self) -> u128 {
        self.entries.iter().map(|&(p, _)| p).product()
    }

    pub fn omega(&self) -> usize {
        self.entries.len()
    }

    pub fn largest_prime(&self) -> Option<u128> {
        self.entries.last().map(|&(p, _)| p)
    }

    pub fn exponent_of(&self, p: u128) -> u32 {
        self.entries
            .binary_search_by_key(&p, |&(q, _)| q)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }
}

/// Limits for the general factorization path.
#[derive(Clone, Copy, Debug)]
pub struct FactorConfig {
    /// Inputs with more significant bits than this are rejected.
    pub max_bits: u32,
    /// Total Pollard-rho iterations allowed for one input.
    pub rho_budget: u64,
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig {
            max_bits: 128,
            rho_budget: 50_000_000,
        }
    }
}

impl FactorConfig {
    pub fn factorize(&self, n: u128) -> Result<PrimeFactorization, NumError> {
        if n == 0 {
            return Err(NumError::ZeroInput);
        }
        let bits = 128 - n.leading_zeros();
        if bits > self.max_bits {
            return Err(NumError::FactorizationTooLarge { value: n });
        }
        if n < SPF_LIMIT as u128 {
            return Ok(factor_small(n as usize));
        }
        let mut pairs = Vec::new();
        let mut m = n;
        for &p in TRIAL_PRIMES.iter() {
            let p = p as u128;
            if p * p > m {
                break;
            }
            if m % p == 0 {
                let mut e = 0;
                while m % p == 0 {
                    m /= p;
                    e += 1;
                }
                pairs.push((p, e));
            }
        }
        if m > 1 {
            let bound = TRIAL_LIMIT as u128;
            if m < bound * bound {
                pairs.push((m, 1));
            } else {
                let mut budget = self.rho_budget;
                split_into(m, &mut pairs, &mut budget).ok_or(NumError::FactorizationTooLarge { value: n })?;
            }
        }
        Ok(PrimeFactorization::from_pairs(pairs))
    }
}

fn factor_small(mut n: usize) -> PrimeFactorization {
    let spf = &*SPF;
    let mut entries: Vec<(u128, u32)> = Vec::new();
    while n > 1 {
        let p = spf[n] as usize;
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        entries.push((p as u128, e));
    }
    PrimeFactorization { entries }
}

/// Factorization of `|n|` with the default limits.
pub fn factorize(n: i128) -> Result<PrimeFactorization, NumError> {
    FactorConfig::default().factorize(n.unsigned_abs())
}

pub fn factorize_u128(n: u128) -> Result<PrimeFactorization, NumError> {
    FactorConfig::default().factorize(n)
}

/// Product of the distinct primes dividing `n`.
pub fn radical(n: i128) -> Result<u128, NumError> {
    Ok(factorize(n)?.radical())
}

/// Number of distinct primes dividing `n`.
pub fn omega(n: i128) -> Result<usize, NumError> {
    Ok(factorize(n)?.omega())
}

/// Largest prime factor, with the convention that it is 1 for n = 1.
pub fn largest_prime_factor(n: u128) -> Result<u128, NumError> {
    if n == 0 {
        return Err(NumError::ZeroInput);
    }
    Ok(factorize_u128(n)?.largest_prime().unwrap_or(1))
}

// --- modular arithmetic on u128 ---

fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return (a % m) * (b % m) % m;
    }
    let (mut a, mut b) = (a % m, b % m);
    let mut acc = 0u128;
    while b > 0 {
        if b & 1 == 1 {
            acc = add_mod(acc, a, m);
        }
        a = add_mod(a, a, m);
        b >>= 1;
    }
    acc
}

/// Full 256-bit product as (high, low).
#[inline]
fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    let mask = u64::MAX as u128;
    let (a0, a1) = (a & mask, a >> 64);
    let (b0, b1) = (b & mask, b >> 64);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let mid = (p00 >> 64) + (p01 & mask) + (p10 & mask);
    let lo = (p00 & mask) | (mid << 64);
    let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    (hi, lo)
}

/// Montgomery arithmetic modulo an odd `n` with `R = 2^128`.
struct Montgomery {
    n: u128,
    n_neg_inv: u128,
    r2: u128,
}

impl Montgomery {
    fn new(n: u128) -> Self {
        debug_assert!(n & 1 == 1);
        let mut inv = 1u128;
        for _ in 0..7 {
            inv = inv.wrapping_mul(2u128.wrapping_sub(n.wrapping_mul(inv)));
        }
        let r1 = (u128::MAX % n + 1) % n;
        let r2 = mul_mod(r1, r1, n);
        Montgomery { n, n_neg_inv: inv.wrapping_neg(), r2 }
    }

    #[inline]
    fn redc(&self, hi: u128, lo: u128) -> u128 {
        let u = lo.wrapping_mul(self.n_neg_inv);
        let (uh, ul) = mul_wide(u, self.n);
        let carry = lo.overflowing_add(ul).1 as u128;
        let (t, over1) = hi.overflowing_add(uh);
        let (t, over2) = t.overflowing_add(carry);
        if over1 || over2 || t >= self.n {
            t.wrapping_sub(self.n)
        } else {
            t
        }
    }

    #[inline]
    fn mul(&self, a: u128, b: u128) -> u128 {
        let (hi, lo) = mul_wide(a, b);
        self.redc(hi, lo)
    }

    fn to_mont(&self, a: u128) -> u128 {
        self.mul(a % self.n, self.r2)
    }

    #[cfg(test)]
    fn from_mont(&self, a: u128) -> u128 {
        self.redc(0, a)
    }

    fn pow(&self, base: u128, mut exp: u128) -> u128 {
        let mut acc = self.to_mont(1);
        let mut b = self.to_mont(base);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }
}

fn add_mod(a: u128, b: u128, m: u128) -> u128 {
    let (s, overflow) = a.overflowing_add(b);
    if overflow || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

fn pow_mod(mut base: u128, mut exp: u128, m: u128) -> u128 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

const MR_BASES: [u128; 20] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71];

/// Miller-Rabin with the first 13 prime bases (deterministic below 3.3e24)
/// and 20 bases above that.
pub fn is_probable_prime(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d0 = n - 1;
    let s = d0.trailing_zeros();
    let d = d0 >> s;
    let rounds = if n < 3_317_044_064_679_887_385_961_981 { 13 } else { MR_BASES.len() };
    if n > u64::MAX as u128 {
        let mont = Montgomery::new(n);
        let one = mont.to_mont(1);
        let minus_one = mont.to_mont(n - 1);
        'big: for &a in &MR_BASES[..rounds] {
            let mut x = mont.pow(a, d);
            if x == one || x == minus_one {
                continue;
            }
            for _ in 1..s {
                x = mont.mul(x, x);
                if x == minus_one {
                    continue 'big;
                }
            }
            return false;
        }
        return true;
    }
    'bases: for &a in &MR_BASES[..rounds] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn split_into(n: u128, out: &mut Vec<(u128, u32)>, budget: &mut u64) -> Option<()> {
    if n == 1 {
        return Some(());
    }
    if is_probable_prime(n) {
        out.push((n, 1));
        return Some(());
    }
    let d = brent_rho(n, budget)?;
    split_into(d, out, budget)?;
    split_into(n / d, out, budget)
}

/// Nontrivial divisor of the odd composite `n`, or `None` when the budget runs out.
fn brent_rho(n: u128, budget: &mut u64) -> Option<u128> {
    // Working in Montgomery form scales differences by a unit, so gcds are unchanged.
    let mont = (n > u64::MAX as u128).then(|| Montgomery::new(n));
    let mulm = |a: u128, b: u128| match &mont {
        Some(m) => m.mul(a, b),
        None => mul_mod(a, b, n),
    };
    for c in 1u128.. {
        let f = |y: u128| add_mod(mulm(y, y), c, n);
        let mut y = 2u128;
        let mut r = 1u64;
        let mut q = 1u128;
        let m = 128u64;
        let mut g = 1u128;
        let mut x = y;
        let mut ys = y;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                let steps = m.min(r - k);
                for _ in 0..steps {
                    y = f(y);
                    q = mulm(q, x.abs_diff(y));
                }
                *budget = budget.checked_sub(steps)?;
                g = gcd_u128(q, n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                *budget = budget.checked_sub(1)?;
                g = gcd_u128(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return Some(g);
        }
        if c > 64 {
            return None;
        }
    }
    None
}
