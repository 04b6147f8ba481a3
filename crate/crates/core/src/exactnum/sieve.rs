//! Table-driven radicals for dense scans over `1..=limit`.

use super::factor::smallest_prime_factors;

/// Per-integer radical data for every `n` in `1..=limit`.
#[derive(Clone, Debug)]
pub struct RadicalTable {
    spf: Vec<u32>,
    rad: Vec<u64>,
    ln_rad: Vec<f64>,
    ln: Vec<f64>,
    omega: Vec<u8>,
}

impl RadicalTable {
    pub fn new(limit: u64) -> Self {
        let size = limit as usize + 1;
        let spf = smallest_prime_factors(size);
        let mut rad = vec![1u64; size];
        let mut omega = vec![0u8; size];
        let mut ln_rad = vec![0f64; size];
        let mut ln = vec![0f64; size];
        for n in 2..size {
            let p = spf[n] as usize;
            let mut m = n / p;
            while m % p == 0 {
                m /= p;
            }
            rad[n] = rad[m] * p as u64;
            omega[n] = omega[m] + 1;
            ln_rad[n] = (p as f64).ln() + ln_rad[m];
            ln[n] = (n as f64).ln();
        }
        RadicalTable { spf, rad, ln_rad, ln, omega }
    }

    pub fn limit(&self) -> u64 {
        self.rad.len() as u64 - 1
    }

    #[inline]
    pub fn rad(&self, n: u64) -> u64 {
        self.rad[n as usize]
    }

    #[inline]
    pub fn ln_rad(&self, n: u64) -> f64 {
        self.ln_rad[n as usize]
    }

    #[inline]
    pub fn ln(&self, n: u64) -> f64 {
        self.ln[n as usize]
    }

    #[inline]
    pub fn omega(&self, n: u64) -> u8 {
        self.omega[n as usize]
    }

    /// Distinct primes of `n`, ascending.
    pub fn primes_of(&self, mut n: u64) -> Vec<u64> {
        let mut out = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        out
    }
}
