//! p-adic valuations of integers and of the terms `U_n`, `V_n`.
//!
//! The closed forms dispatch on divisibility of `a`, `n` and the
//! discriminant, and report which branch fired through [`ValuationCase`].

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lucas::{u_valuation_at, valuation_big, LucasParams};
use crate::rank::{is_prime, tau_prime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Valuation {
    pub value: u32,
    pub prime: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValuationCase {
    // odd p, first sequence
    DeltaDivisibleIndexDivisible,
    DeltaDivisibleIndexCoprime,
    RankDividesIndex,
    RankNotDividingIndex,
    // odd p, second sequence
    RankDividesTwiceIndexOnly,
    SecondOtherwise,
    // p = 2, both sequences
    EvenAEvenIndex,
    EvenAOddIndex,
    OddAMultipleOfSixIndex,
    OddAOddMultipleOfThreeIndex,
    OddAIndexNotMultipleOfThree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TermValuation {
    pub valuation: Valuation,
    pub case: ValuationCase,
}

fn nu_u64(p: u64, mut x: u64) -> u32 {
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// Exponent of `p` in `|x|`.
pub fn nu_int(p: u64, x: &BigInt) -> Result<Valuation> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if x.is_zero() {
        return Err(Error::ZeroArgument);
    }
    Ok(Valuation {
        value: valuation_big(x.magnitude(), p),
        prime: p,
    })
}

fn check_inputs(params: &LucasParams, p: u64, n: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if n == 0 {
        return Err(Error::BadRange("index must be positive".into()));
    }
    if params.b().unsigned_abs() % p == 0 {
        return Err(Error::PrimeDividesB { p, b: params.b() });
    }
    Ok(())
}

fn two_adic_case(params: &LucasParams, n: u64) -> ValuationCase {
    use ValuationCase::*;
    match (params.a() % 2 == 0, n % 2 == 0, n % 3 == 0) {
        (true, true, _) => EvenAEvenIndex,
        (true, false, _) => EvenAOddIndex,
        (false, true, true) => OddAMultipleOfSixIndex,
        (false, false, true) => OddAOddMultipleOfThreeIndex,
        (false, _, false) => OddAIndexNotMultipleOfThree,
    }
}

/// `nu_p(U_n)` from the closed case split.
pub fn nu_u(params: &LucasParams, p: u64, n: u64) -> Result<TermValuation> {
    use ValuationCase::*;
    check_inputs(params, p, n)?;
    let (value, case) = if p == 2 {
        let case = two_adic_case(params, n);
        let value = match case {
            EvenAEvenIndex => nu_u64(2, n) + params.a().unsigned_abs().trailing_zeros() - 1,
            OddAMultipleOfSixIndex => nu_u64(2, n) + u_valuation_at(params, 2, 6) - 1,
            OddAOddMultipleOfThreeIndex => u_valuation_at(params, 2, 3),
            _ => 0,
        };
        (value, case)
    } else if params.delta().rem_euclid(i128::from(p)) == 0 {
        if n % p == 0 {
            (
                nu_u64(p, n) + u_valuation_at(params, p, p) - 1,
                DeltaDivisibleIndexDivisible,
            )
        } else {
            (0, DeltaDivisibleIndexCoprime)
        }
    } else {
        let rank = tau_prime(params, p)?.value;
        if n % rank == 0 {
            (
                nu_u64(p, n) + u_valuation_at(params, p, rank),
                RankDividesIndex,
            )
        } else {
            (0, RankNotDividingIndex)
        }
    };
    Ok(TermValuation {
        valuation: Valuation { value, prime: p },
        case,
    })
}

/// `nu_p(V_n)` from the closed case split.
pub fn nu_v(params: &LucasParams, p: u64, n: u64) -> Result<TermValuation> {
    use ValuationCase::*;
    check_inputs(params, p, n)?;
    let (value, case) = if p == 2 {
        let case = two_adic_case(params, n);
        let value = match case {
            EvenAEvenIndex | OddAMultipleOfSixIndex => 1,
            EvenAOddIndex => params.a().unsigned_abs().trailing_zeros(),
            OddAOddMultipleOfThreeIndex => {
                // a^2 + 3b = 0 forces 3 | gcd(a, b)
                nu2_a2_plus_3b(params).expect("a^2 + 3b is nonzero for coprime a, b")
            }
            _ => 0,
        };
        (value, case)
    } else if params.delta().rem_euclid(i128::from(p)) == 0 {
        (0, SecondOtherwise)
    } else {
        let rank = tau_prime(params, p)?.value;
        if n % rank != 0 && (2 * n) % rank == 0 {
            (
                nu_u64(p, n) + u_valuation_at(params, p, rank),
                RankDividesTwiceIndexOnly,
            )
        } else {
            (0, SecondOtherwise)
        }
    };
    Ok(TermValuation {
        valuation: Valuation { value, prime: p },
        case,
    })
}

/// `nu_2(a^2 + 3b)`, which appears in the two-adic branch for `V_n`.
pub fn nu2_a2_plus_3b(params: &LucasParams) -> Option<u32> {
    let a = i128::from(params.a());
    let w = a * a + 3 * i128::from(params.b());
    (w != 0).then(|| w.unsigned_abs().trailing_zeros())
}

/// `gcd(x, b)` helper for the coprimality invariants.
pub fn gcd_with_b(params: &LucasParams, x: &BigInt) -> BigInt {
    x.gcd(&BigInt::from(params.b()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lucas::{make_params, u_exact, v_exact};

    fn p(a: i64, b: i64) -> LucasParams {
        make_params(a, b).unwrap()
    }

    #[test]
    fn nu_int_examples() {
        assert_eq!(nu_int(2, &BigInt::from(144)).unwrap().value, 4);
        assert_eq!(nu_int(5, &BigInt::from(75025)).unwrap().value, 2);
        assert_eq!(nu_int(3, &BigInt::from(-45)).unwrap().value, 2);
        assert_eq!(nu_int(3, &BigInt::zero()), Err(Error::ZeroArgument));
        assert_eq!(nu_int(4, &BigInt::from(8)), Err(Error::NotPrime(4)));
    }

    #[test]
    fn nu_u_examples() {
        let fib = p(1, 1);
        let r = nu_u(&fib, 5, 25).unwrap();
        assert_eq!(r.valuation.value, 2);
        assert_eq!(r.case, ValuationCase::DeltaDivisibleIndexDivisible);
        let r = nu_u(&fib, 2, 12).unwrap();
        assert_eq!(r.valuation.value, 4);
        assert_eq!(r.case, ValuationCase::OddAMultipleOfSixIndex);
        let r = nu_u(&fib, 7, 5).unwrap();
        assert_eq!(r.valuation.value, 0);
        assert_eq!(r.case, ValuationCase::RankNotDividingIndex);
        assert_eq!(
            nu_u(&p(3, 2), 2, 4),
            Err(Error::PrimeDividesB { p: 2, b: 2 })
        );
    }

    #[test]
    fn nu_v_examples() {
        let fib = p(1, 1);
        let r = nu_v(&fib, 11, 5).unwrap();
        assert_eq!(r.valuation.value, 1);
        assert_eq!(r.case, ValuationCase::RankDividesTwiceIndexOnly);
        let r = nu_v(&fib, 2, 3).unwrap();
        assert_eq!(r.valuation.value, 2);
        assert_eq!(r.case, ValuationCase::OddAOddMultipleOfThreeIndex);
        let r = nu_v(&p(2, 1), 2, 2).unwrap();
        assert_eq!(r.valuation.value, 1);
        assert_eq!(r.case, ValuationCase::EvenAEvenIndex);
        assert_eq!(
            nu_v(&p(1, 3), 3, 4),
            Err(Error::PrimeDividesB { p: 3, b: 3 })
        );
    }

    #[test]
    fn closed_forms_match_direct_small_grid() {
        for (a, b) in [(1, 1), (2, 1), (3, -1), (4, -3), (1, 2), (5, 3), (-3, -5), (1, -2)] {
            let params = p(a, b);
            for prime in [2u64, 3, 5, 7, 11, 13] {
                if b.unsigned_abs() % prime == 0 {
                    continue;
                }
                for n in 1..=60u64 {
                    let u = u_exact(&params, n).unwrap();
                    let v = v_exact(&params, n).unwrap();
                    assert_eq!(
                        nu_u(&params, prime, n).unwrap().valuation,
                        nu_int(prime, u.value()).unwrap(),
                        "U a={a} b={b} p={prime} n={n}"
                    );
                    assert_eq!(
                        nu_v(&params, prime, n).unwrap().valuation,
                        nu_int(prime, v.value()).unwrap(),
                        "V a={a} b={b} p={prime} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn two_adic_facts_on_u3_u6() {
        let mut checked_mod1 = 0;
        for a in (-15i64..=15).step_by(2) {
            for b in -21i64..=21 {
                let Ok(params) = make_params(a, b) else {
                    continue;
                };
                if b % 2 == 0 {
                    continue;
                }
                let u3 = u_exact(&params, 3).unwrap().into_inner();
                let u6 = u_exact(&params, 6).unwrap().into_inner();
                let a_big = BigInt::from(a);
                let factor = &a_big * &a_big + 3 * BigInt::from(b);
                assert_eq!(u6, &a_big * &u3 * &factor);
                if u6.is_zero() {
                    continue;
                }
                let v3 = nu_int(2, &u3).unwrap().value;
                let v6 = nu_int(2, &u6).unwrap().value;
                if b.rem_euclid(4) == 1 {
                    assert_eq!(v3, 1);
                    assert_eq!(v6, nu2_a2_plus_3b(&params).unwrap() + 1);
                    checked_mod1 += 1;
                } else {
                    assert!(v3 >= 2);
                    assert_eq!(v6, v3 + 1);
                }
            }
        }
        assert!(checked_mod1 >= 20);
    }

    #[test]
    fn terms_are_coprime_to_b() {
        for (a, b) in [(1, 2), (3, 2), (1, 6), (5, -6), (3, -10)] {
            let params = p(a, b);
            for n in 1..=40 {
                let u = u_exact(&params, n).unwrap().into_inner();
                let v = v_exact(&params, n).unwrap().into_inner();
                assert_eq!(gcd_with_b(&params, &u), BigInt::from(1));
                assert_eq!(gcd_with_b(&params, &v), BigInt::from(1));
            }
        }
    }
}
