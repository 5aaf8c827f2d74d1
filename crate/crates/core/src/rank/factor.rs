//! Integer factorization for rank computations.
//!
//! Trial division by the primes below `10^6`, then Brent's variant of
//! Pollard rho on what is left. Primality below `2^64` is certified by
//! Miller-Rabin with the first twelve prime bases; above that a
//! configurable number of seeded random bases is added.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const TRIAL_LIMIT: u32 = 1_000_000;
const MR_BASES: [u128; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorConfig {
    /// Inputs strictly above this are refused.
    pub bound: u128,
    pub seed: u64,
    /// Random Miller-Rabin rounds added for candidates above `2^64`.
    pub extra_rounds: u32,
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig {
            bound: 1u128 << 96,
            seed: 0x5eed,
            extra_rounds: 16,
        }
    }
}

/// Prime factorization with strictly increasing primes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Factorization {
    factors: Vec<(u128, u32)>,
}

impl Factorization {
    pub fn factors(&self) -> &[(u128, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u128> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn product(&self) -> BigUint {
        self.factors
            .iter()
            .map(|&(p, e)| BigUint::from(p).pow(e))
            .product()
    }

    /// All positive divisors in increasing order.
    pub fn divisors(&self) -> Vec<u128> {
        let mut divs = vec![1u128];
        for &(p, e) in &self.factors {
            let len = divs.len();
            let mut pk = 1u128;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }
}

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let limit = TRIAL_LIMIT as usize;
        let mut composite = vec![false; limit + 1];
        let mut out = Vec::new();
        for i in 2..=limit {
            if !composite[i] {
                out.push(i as u32);
                let mut j = i * i;
                while j <= limit {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        out
    })
}

fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return a * b % m;
    }
    debug_assert!(m < 1u128 << 96);
    // Horner over 32-bit limbs of b keeps every product below 2^128.
    let mut r = 0u128;
    for shift in [64u32, 32, 0] {
        let limb = (b >> shift) & 0xffff_ffff;
        r = ((r << 32) % m + a * limb % m) % m;
    }
    r
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

fn mr_round(n: u128, d: u128, s: u32, base: u128) -> bool {
    let mut x = pow_mod(base, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

fn is_prime_with(n: u128, config: &FactorConfig) -> bool {
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
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    if !MR_BASES.iter().all(|&base| mr_round(n, d, s, base)) {
        return false;
    }
    if n <= u64::MAX as u128 {
        return true;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9);
    (0..config.extra_rounds).all(|_| mr_round(n, d, s, rng.gen_range(2..n - 1)))
}

/// Deterministic primality test for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    is_prime_with(n as u128, &FactorConfig::default())
}

fn brent_rho(n: u128, rng: &mut ChaCha8Rng) -> u128 {
    debug_assert!(n % 2 == 1);
    loop {
        let c = rng.gen_range(1..n);
        let mut y = rng.gen_range(0..n);
        let step = |v: u128| (mul_mod(v, v, n) + c) % n;
        let batch = 128u64;
        let (mut g, mut r, mut q) = (1u128, 1u64, 1u128);
        let (mut x, mut ys) = (y, y);
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = step(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..batch.min(r - k) {
                    y = step(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += batch;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = step(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
}

fn split_into(n: u128, config: &FactorConfig, rng: &mut ChaCha8Rng, out: &mut Vec<u128>) {
    if n == 1 {
        return;
    }
    let trial = u128::from(TRIAL_LIMIT);
    if n < trial * trial || is_prime_with(n, config) {
        out.push(n);
        return;
    }
    let d = brent_rho(n, rng);
    split_into(d, config, rng, out);
    split_into(n / d, config, rng, out);
}

/// Factors `x >= 2` under `config`.
pub fn factorize_with(x: &BigUint, config: &FactorConfig) -> Result<Factorization> {
    let n = x
        .to_u128()
        .filter(|&n| n <= config.bound)
        .ok_or_else(|| Error::TooLarge(x.to_string()))?;
    factorize_u128(n, config)
}

pub(crate) fn factorize_u128(mut n: u128, config: &FactorConfig) -> Result<Factorization> {
    if n < 2 {
        return Err(Error::BadRange(format!("cannot factor {n}")));
    }
    if n > config.bound {
        return Err(Error::TooLarge(n.to_string()));
    }
    let mut factors = Vec::new();
    if let Ok(mut w) = u64::try_from(n) {
        // 64-bit division is much cheaper than 128-bit.
        for &p in small_primes() {
            let p = u64::from(p);
            if p * p > w {
                break;
            }
            let mut e = 0;
            while w % p == 0 {
                w /= p;
                e += 1;
            }
            if e > 0 {
                factors.push((u128::from(p), e));
            }
        }
        n = u128::from(w);
    } else {
        for &p in small_primes() {
            let p = u128::from(p);
            if p * p > n {
                break;
            }
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            if e > 0 {
                factors.push((p, e));
            }
        }
    }
    if n > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut rest = Vec::new();
        split_into(n, config, &mut rng, &mut rest);
        rest.sort_unstable();
        for p in rest {
            match factors.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => factors.push((p, 1)),
            }
        }
    }
    Ok(Factorization { factors })
}

/// Factors `x >= 2` with the default bound of `2^96`.
pub fn factorize(x: &BigUint) -> Result<Factorization> {
    factorize_with(x, &FactorConfig::default())
}

pub(crate) fn factorize_u64(n: u64) -> Result<Factorization> {
    factorize_u128(u128::from(n), &FactorConfig::default())
}
