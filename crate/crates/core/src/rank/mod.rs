//! Order of appearance `tau(m) = min { k >= 1 : m | U_k }`.
//!
//! Three independent routes are provided:
//! * [`tau_scan`] steps the recurrence modulo `m` (definitional, slow);
//! * [`tau_min_divisor_oracle`] starts from a known index `M` with
//!   `m | U_M` and strips prime factors of `M` while divisibility persists;
//! * [`tau`] factors `m`, lifts `tau(p)` to `tau(p^e)` with the closed
//!   valuation formulas, and takes the lcm.

pub mod factor;
mod scan;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lucas::{u_mod, u_valuation_at, LucasParams};

pub use factor::{factorize, factorize_with, is_prime, FactorConfig, Factorization};
pub use scan::ModularScanner;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauMethod {
    LinearScan,
    DivisorMinimality,
    FactorizationLift,
}

impl std::fmt::Display for TauMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TauMethod::LinearScan => "linear-scan",
            TauMethod::DivisorMinimality => "divisor-minimality",
            TauMethod::FactorizationLift => "factorization-lift",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TauResult {
    pub value: u64,
    pub method: TauMethod,
    /// Which dispatch branch produced the value, when there is one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<u64>>,
}

impl TauResult {
    fn new(value: u64, method: TauMethod) -> Self {
        TauResult {
            value,
            method,
            case: None,
            witness: None,
        }
    }

    fn with_case(mut self, case: &'static str) -> Self {
        self.case = Some(case);
        self
    }

    fn with_witness(mut self, witness: Vec<u64>) -> Self {
        self.witness = Some(witness);
        self
    }
}

/// `10 m^2 + 10`, saturating.
pub fn default_scan_cap(m: &BigUint) -> u64 {
    m.to_u64()
        .and_then(|m| m.checked_mul(m))
        .and_then(|sq| sq.checked_mul(10))
        .and_then(|x| x.checked_add(10))
        .unwrap_or(u64::MAX)
}

fn check_coprime_to_b(params: &LucasParams, m: &BigUint) -> Result<()> {
    let b = BigUint::from(params.b().unsigned_abs());
    if m.gcd(&b).is_one() {
        Ok(())
    } else {
        Err(Error::NotCoprimeToB {
            m: m.to_string(),
            b: params.b(),
        })
    }
}

fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// Smallest `k <= cap` with `m | U_k`, by stepping the recurrence mod `m`.
pub fn tau_scan(params: &LucasParams, m: &BigUint, cap: u64) -> Result<TauResult> {
    if m.is_zero() {
        return Err(Error::BadRange("m must be positive".into()));
    }
    check_coprime_to_b(params, m)?;
    let mut scanner = ModularScanner::new(params, m);
    for k in 1..=cap {
        if scanner.current_is_zero() {
            return Ok(TauResult::new(k, TauMethod::LinearScan));
        }
        scanner.step();
    }
    Err(Error::NotFound { cap })
}

/// Jacobi symbol `(x / n)` for odd positive `n`.
pub fn jacobi(x: i128, n: u64) -> i32 {
    assert!(n % 2 == 1, "jacobi needs an odd modulus");
    let mut a = x.rem_euclid(i128::from(n)) as u64;
    let mut n = n;
    let mut sign = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                sign = -sign;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        a %= n;
    }
    if n == 1 {
        sign
    } else {
        0
    }
}

fn divides_delta(params: &LucasParams, p: u64) -> bool {
    params.delta().rem_euclid(i128::from(p)) == 0
}

/// `tau(p)` for a prime `p` not dividing `b`.
///
/// For odd `p` not dividing the discriminant, the answer is searched among
/// the divisors of `p - (delta / p)`.
pub fn tau_prime(params: &LucasParams, p: u64) -> Result<TauResult> {
    check_prime(p)?;
    check_coprime_to_b(params, &BigUint::from(p))?;
    let method = TauMethod::FactorizationLift;
    if divides_delta(params, p) {
        return Ok(TauResult::new(p, method).with_case("p-divides-delta"));
    }
    if p == 2 {
        // 2 does not divide delta, hence a is odd.
        return Ok(TauResult::new(3, method).with_case("two-odd-a"));
    }
    let epsilon = jacobi(params.delta(), p);
    let bound = if epsilon == 1 { p - 1 } else { p + 1 };
    let modulus = BigUint::from(p);
    let mut checked = Vec::new();
    for k in factor::factorize_u64(bound)?.divisors() {
        let k = k as u64;
        checked.push(k);
        if u_mod(params, k, &modulus).is_zero() {
            return Ok(TauResult::new(k, method)
                .with_case(if epsilon == 1 {
                    "divisor-of-p-minus-1"
                } else {
                    "divisor-of-p-plus-1"
                })
                .with_witness(checked));
        }
    }
    unreachable!("tau({p}) must divide {bound}")
}

fn overflow(what: &str) -> Error {
    Error::Overflow(what.to_string())
}

fn checked_pow(base: u64, exp: u32) -> Result<u64> {
    base.checked_pow(exp).ok_or_else(|| overflow("prime power"))
}

/// `tau(p^e)` by inverting the closed valuation formulas.
pub fn tau_prime_power(params: &LucasParams, p: u64, e: u32) -> Result<TauResult> {
    if e == 0 {
        return Err(Error::BadRange("exponent must be positive".into()));
    }
    check_prime(p)?;
    check_coprime_to_b(params, &BigUint::from(p))?;
    let method = TauMethod::FactorizationLift;
    let lift = |base: u64, v: u32, floor: u32, case| -> Result<TauResult> {
        let exp = (e + floor).saturating_sub(v).max(floor);
        let value = base
            .checked_mul(checked_pow(p, exp)?)
            .ok_or_else(|| overflow("tau of prime power"))?;
        Ok(TauResult::new(value, method).with_case(case))
    };
    if p == 2 {
        let a = params.a();
        if a % 2 == 0 {
            let v = a.unsigned_abs().trailing_zeros();
            // smallest 2^k, k >= 1, with k + v - 1 >= e
            return lift(1, v, 1, "two-even-a");
        }
        let v3 = u_valuation_at(params, 2, 3);
        if e <= v3 {
            return Ok(TauResult::new(3, method).with_case("two-odd-a-within-u3"));
        }
        let v6 = u_valuation_at(params, 2, 6);
        return lift(6, v6, 0, "two-odd-a-lifted");
    }
    if divides_delta(params, p) {
        let vp = u_valuation_at(params, p, p);
        return lift(1, vp, 1, "p-divides-delta");
    }
    let base = tau_prime(params, p)?.value;
    let v = u_valuation_at(params, p, base);
    lift(base, v, 0, "p-coprime-to-delta")
}

/// `tau(m)` as the lcm of `tau(p^e)` over the factorization of `m`.
pub fn tau(params: &LucasParams, m: &BigUint) -> Result<TauResult> {
    tau_with(params, m, &FactorConfig::default())
}

pub fn tau_with(params: &LucasParams, m: &BigUint, config: &FactorConfig) -> Result<TauResult> {
    if m.is_zero() {
        return Err(Error::BadRange("m must be positive".into()));
    }
    check_coprime_to_b(params, m)?;
    if m.is_one() {
        return Ok(TauResult::new(1, TauMethod::FactorizationLift));
    }
    let fz = factorize_with(m, config)?;
    let mut value = 1u64;
    let mut parts = Vec::new();
    for &(p, e) in fz.factors() {
        let p = u64::try_from(p).map_err(|_| overflow("prime factor above 2^64"))?;
        let part = tau_prime_power(params, p, e)?.value;
        parts.push(part);
        value = (value / value.gcd(&part))
            .checked_mul(part)
            .ok_or_else(|| overflow("lcm of prime-power ranks"))?;
    }
    Ok(TauResult::new(value, TauMethod::FactorizationLift).with_witness(parts))
}

/// `tau(target)` from any `multiple` with `target | U_multiple`.
///
/// The witness lists every index tested after the initial check.
pub fn tau_min_divisor_oracle(
    params: &LucasParams,
    target: &BigUint,
    multiple: u64,
) -> Result<TauResult> {
    if target.is_zero() || multiple == 0 {
        return Err(Error::BadRange(
            "target and multiple must be positive".into(),
        ));
    }
    check_coprime_to_b(params, target)?;
    if !u_mod(params, multiple, target).is_zero() {
        return Err(Error::NotAMultiple {
            target: target.to_string(),
            multiple,
        });
    }
    let mut current = multiple;
    let mut checked = Vec::new();
    if current > 1 {
        for q in factor::factorize_u64(multiple)?.primes() {
            let q = q as u64;
            while current % q == 0 {
                let candidate = current / q;
                checked.push(candidate);
                if u_mod(params, candidate, target).is_zero() {
                    current = candidate;
                } else {
                    break;
                }
            }
        }
    }
    Ok(TauResult::new(current, TauMethod::DivisorMinimality).with_witness(checked))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lucas::{make_params, u_exact};

    fn p(a: i64, b: i64) -> LucasParams {
        make_params(a, b).unwrap()
    }

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn scan_examples() {
        let fib = p(1, 1);
        assert_eq!(tau_scan(&fib, &big(10), 100).unwrap().value, 15);
        assert_eq!(tau_scan(&fib, &big(2), 10).unwrap().value, 3);
        assert!(matches!(
            tau_scan(&p(1, 2), &big(2), 10),
            Err(Error::NotCoprimeToB { .. })
        ));
        assert_eq!(tau_scan(&fib, &big(10), 14), Err(Error::NotFound { cap: 14 }));
        assert_eq!(tau_scan(&fib, &big(1), 5).unwrap().value, 1);
    }

    #[test]
    fn prime_examples() {
        let fib = p(1, 1);
        let t = tau_prime(&fib, 5).unwrap();
        assert_eq!((t.value, t.case), (5, Some("p-divides-delta")));
        assert_eq!(tau_prime(&fib, 7).unwrap().value, 8);
        assert_eq!(tau_prime(&p(2, 1), 2).unwrap().value, 2);
        assert_eq!(tau_prime(&fib, 2).unwrap().value, 3);
        assert_eq!(tau_prime(&fib, 9), Err(Error::NotPrime(9)));
        assert!(matches!(
            tau_prime(&p(1, 2), 2),
            Err(Error::NotCoprimeToB { .. })
        ));
    }

    #[test]
    fn prime_power_examples() {
        let fib = p(1, 1);
        assert_eq!(tau_prime_power(&fib, 3, 3).unwrap().value, 36);
        assert_eq!(tau_prime_power(&fib, 2, 5).unwrap().value, 24);
        assert_eq!(tau_prime_power(&fib, 5, 1).unwrap().value, 5);
        assert_eq!(tau_prime_power(&fib, 2, 1).unwrap().value, 3);
        assert!(matches!(
            tau_prime_power(&p(3, 2), 2, 4),
            Err(Error::NotCoprimeToB { .. })
        ));
    }

    #[test]
    fn tau_examples() {
        let fib = p(1, 1);
        let t = tau(&fib, &big(272)).unwrap();
        assert_eq!(t.value, 36);
        assert_eq!(t.witness, Some(vec![12, 9]));
        assert_eq!(tau(&fib, &big(10)).unwrap().value, 15);
        assert_eq!(tau(&fib, &big(1)).unwrap().value, 1);
        assert!(matches!(
            tau(&p(3, 2), &big(6)),
            Err(Error::NotCoprimeToB { .. })
        ));
    }

    #[test]
    fn min_divisor_examples() {
        let fib = p(1, 1);
        assert_eq!(tau_min_divisor_oracle(&fib, &big(54), 36).unwrap().value, 36);
        assert_eq!(tau_min_divisor_oracle(&fib, &big(2), 12).unwrap().value, 3);
        let target = [50u64, 55, 60]
            .iter()
            .map(|&n| u_exact(&fib, n).unwrap().magnitude().clone())
            .product::<BigUint>();
        let t = tau_min_divisor_oracle(&fib, &target, 907_500).unwrap();
        assert_eq!(t.value, 82_500);
        assert_eq!(t.method, TauMethod::DivisorMinimality);
        assert_eq!(
            tau_min_divisor_oracle(&fib, &big(7), 10),
            Err(Error::NotAMultiple {
                target: "7".into(),
                multiple: 10
            })
        );
    }

    #[test]
    fn jacobi_matches_euler_criterion() {
        for &n in &[3u64, 5, 7, 11, 13, 97, 101] {
            for x in -30i128..30 {
                let r = x.rem_euclid(i128::from(n)) as u64;
                let euler = if r == 0 {
                    0
                } else {
                    let e = (0..(n - 1) / 2).fold(1u64, |acc, _| acc * r % n);
                    if e == 1 {
                        1
                    } else {
                        -1
                    }
                };
                assert_eq!(jacobi(x, n), euler, "({x}/{n})");
            }
        }
    }

    #[test]
    fn scan_cap_default() {
        assert_eq!(default_scan_cap(&big(10)), 1010);
        assert_eq!(default_scan_cap(&big(u64::MAX)), u64::MAX);
    }
}
