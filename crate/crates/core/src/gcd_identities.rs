//! Closed forms for `gcd(U_m, U_n)`, `gcd(V_m, V_n)`, `gcd(U_m, V_n)` and
//! the divisibility criteria `U_n | U_m`, `V_n | U_m`.
//!
//! All of these need `a > 0` and `a^2 + 4b > 0`; outside that regime the
//! divisibility criteria have explicit counterexamples.

use num_bigint::BigUint;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lucas::{abs_u, abs_v, LucasParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GcdBranch {
    /// `gcd(U_m, U_n) = U_d`.
    FirstIndexGcd,
    /// `nu_2(m) = nu_2(n)`: `gcd(V_m, V_n) = V_d`.
    SecondEqualTwoAdic,
    SecondEven,
    SecondOdd,
    /// `nu_2(m) > nu_2(n)`: `gcd(U_m, V_n) = V_d`.
    MixedLargerTwoAdic,
    MixedEven,
    MixedOdd,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GcdWitness {
    #[serde(with = "crate::serde_big::biguint")]
    pub value: BigUint,
    pub branch: GcdBranch,
    pub d: u64,
}

pub(crate) fn nu2(n: u64) -> u32 {
    n.trailing_zeros()
}

fn check(params: &LucasParams, m: u64, n: u64) -> Result<()> {
    params.require_eligible()?;
    if m < 3 || n < 3 {
        return Err(Error::BadRange(format!(
            "indices must be at least 3, got m={m}, n={n}"
        )));
    }
    Ok(())
}

/// `2 | gcd(U_m, V_n)` exactly when `2 | a, 2 | m`, or `a, b` odd and `3 | d`.
pub fn mixed_gcd_is_even(params: &LucasParams, m: u64, n: u64) -> bool {
    let (a_even, b_even) = (params.a() % 2 == 0, params.b() % 2 == 0);
    let d = m.gcd(&n);
    (a_even && m % 2 == 0) || (!a_even && !b_even && d % 3 == 0)
}

/// `2 | gcd(V_m, V_n)` exactly when `2 | a`, or `a, b` odd and `3 | d`.
pub fn second_gcd_is_even(params: &LucasParams, m: u64, n: u64) -> bool {
    let (a_even, b_even) = (params.a() % 2 == 0, params.b() % 2 == 0);
    let d = m.gcd(&n);
    a_even || (!a_even && !b_even && d % 3 == 0)
}

pub fn gcd_uu(params: &LucasParams, m: u64, n: u64) -> Result<GcdWitness> {
    check(params, m, n)?;
    first_gcd(params, m, n)
}

pub(crate) fn first_gcd(params: &LucasParams, m: u64, n: u64) -> Result<GcdWitness> {
    let d = m.gcd(&n);
    Ok(GcdWitness {
        value: abs_u(params, d)?,
        branch: GcdBranch::FirstIndexGcd,
        d,
    })
}

pub fn gcd_vv(params: &LucasParams, m: u64, n: u64) -> Result<GcdWitness> {
    check(params, m, n)?;
    second_gcd(params, m, n)
}

pub(crate) fn second_gcd(params: &LucasParams, m: u64, n: u64) -> Result<GcdWitness> {
    let d = m.gcd(&n);
    let (value, branch) = if nu2(m) == nu2(n) {
        (abs_v(params, d)?, GcdBranch::SecondEqualTwoAdic)
    } else if second_gcd_is_even(params, m, n) {
        (BigUint::from(2u8), GcdBranch::SecondEven)
    } else {
        (BigUint::from(1u8), GcdBranch::SecondOdd)
    };
    Ok(GcdWitness { value, branch, d })
}

pub fn gcd_uv(params: &LucasParams, m: u64, n: u64) -> Result<GcdWitness> {
    check(params, m, n)?;
    let d = m.gcd(&n);
    let (value, branch) = if nu2(m) > nu2(n) {
        (abs_v(params, d)?, GcdBranch::MixedLargerTwoAdic)
    } else if mixed_gcd_is_even(params, m, n) {
        (BigUint::from(2u8), GcdBranch::MixedEven)
    } else {
        (BigUint::from(1u8), GcdBranch::MixedOdd)
    };
    Ok(GcdWitness { value, branch, d })
}

/// `U_n | U_m` iff `n | m`.
pub fn divides_uu(params: &LucasParams, n: u64, m: u64) -> Result<bool> {
    check(params, m, n)?;
    Ok(m % n == 0)
}

/// `V_n | U_m` iff `n | m` and `m / n` is even.
pub fn divides_vu(params: &LucasParams, n: u64, m: u64) -> Result<bool> {
    check(params, m, n)?;
    Ok(m % n == 0 && (m / n) % 2 == 0)
}
