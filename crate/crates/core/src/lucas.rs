//! Lucas sequence parameters and evaluation.
//!
//! `U_n(a, b)` and `V_n(a, b)` satisfy `X_{n+2} = a X_{n+1} + b X_n` with
//! `U_0 = 0, U_1 = 1` and `V_0 = 2, V_1 = a`. Exact values come from plain
//! iteration; residues come from a fast-doubling ladder. The two paths share
//! no code so each can be used to check the other.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest index accepted by [`u_exact`] and [`v_exact`].
pub const MAX_EXACT_INDEX: u64 = 1_000_000;
/// Largest index accepted by [`uv_mod`].
pub const MAX_MOD_INDEX: u64 = i64::MAX as u64;

const DEGENERATE: [(i64, i64); 8] = [
    (2, -1),
    (-2, -1),
    (1, -1),
    (-1, -1),
    (0, 1),
    (0, -1),
    (1, 0),
    (-1, 0),
];

/// Validated parameters `(a, b)` of a non-degenerate Lucas pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct LucasParams {
    a: i64,
    b: i64,
    delta: i128,
    theorem_eligible: bool,
}

#[derive(Deserialize)]
struct RawParams {
    a: i64,
    b: i64,
}

impl TryFrom<RawParams> for LucasParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        make_params(raw.a, raw.b)
    }
}

/// Validates `(a, b)` and derives the discriminant.
pub fn make_params(a: i64, b: i64) -> Result<LucasParams> {
    if b == 0 {
        return Err(Error::Degenerate { a, b });
    }
    if a.unsigned_abs().gcd(&b.unsigned_abs()) != 1 {
        return Err(Error::NotCoprime { a, b });
    }
    if DEGENERATE.contains(&(a, b)) {
        return Err(Error::Degenerate { a, b });
    }
    let delta = i128::from(a) * i128::from(a) + 4 * i128::from(b);
    Ok(LucasParams {
        a,
        b,
        delta,
        theorem_eligible: a > 0 && delta > 0,
    })
}

impl LucasParams {
    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    /// `a^2 + 4b`.
    pub fn delta(&self) -> i128 {
        self.delta
    }

    /// True when `a > 0` and `a^2 + 4b > 0`, the regime the closed forms cover.
    pub fn theorem_eligible(&self) -> bool {
        self.theorem_eligible
    }

    pub(crate) fn require_eligible(&self) -> Result<()> {
        if self.theorem_eligible {
            Ok(())
        } else {
            Err(Error::NotEligible {
                a: self.a,
                b: self.b,
            })
        }
    }

    /// Parameters with `a` negated; always valid when `self` is.
    pub fn negate_a(&self) -> LucasParams {
        make_params(-self.a, self.b).expect("negating a preserves validity")
    }
}

impl fmt::Display for LucasParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(a={}, b={})", self.a, self.b)
    }
}

/// An exact term of `U` or `V`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SequenceValue(pub BigInt);

impl SequenceValue {
    pub fn value(&self) -> &BigInt {
        &self.0
    }

    pub fn into_inner(self) -> BigInt {
        self.0
    }

    pub fn magnitude(&self) -> &BigUint {
        self.0.magnitude()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl fmt::Display for SequenceValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for SequenceValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for SequenceValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse::<BigInt>()
            .map(SequenceValue)
            .map_err(serde::de::Error::custom)
    }
}

fn check_exact_index(n: u64) -> Result<()> {
    if n > MAX_EXACT_INDEX {
        Err(Error::IndexTooLarge {
            n,
            max: MAX_EXACT_INDEX,
        })
    } else {
        Ok(())
    }
}

fn iterate(params: &LucasParams, first: BigInt, second: BigInt, n: u64) -> BigInt {
    let a = BigInt::from(params.a);
    let b = BigInt::from(params.b);
    let (mut x, mut y) = (first, second);
    for _ in 0..n {
        let next = &a * &y + &b * &x;
        x = std::mem::replace(&mut y, next);
    }
    x
}

/// `U_n` by direct iteration of the recurrence.
pub fn u_exact(params: &LucasParams, n: u64) -> Result<SequenceValue> {
    check_exact_index(n)?;
    Ok(SequenceValue(iterate(
        params,
        BigInt::zero(),
        BigInt::one(),
        n,
    )))
}

/// `V_n` by direct iteration of the recurrence.
pub fn v_exact(params: &LucasParams, n: u64) -> Result<SequenceValue> {
    check_exact_index(n)?;
    Ok(SequenceValue(iterate(
        params,
        BigInt::from(2),
        BigInt::from(params.a),
        n,
    )))
}

/// `U_0, ..., U_{len-1}` in one pass.
pub fn u_terms(params: &LucasParams, len: usize) -> Result<Vec<BigInt>> {
    let last = len.saturating_sub(1) as u64;
    check_exact_index(last)?;
    Ok(terms(params, BigInt::zero(), BigInt::one(), len))
}

/// `V_0, ..., V_{len-1}` in one pass.
pub fn v_terms(params: &LucasParams, len: usize) -> Result<Vec<BigInt>> {
    let last = len.saturating_sub(1) as u64;
    check_exact_index(last)?;
    Ok(terms(params, BigInt::from(2), BigInt::from(params.a), len))
}

fn terms(params: &LucasParams, first: BigInt, second: BigInt, len: usize) -> Vec<BigInt> {
    let a = BigInt::from(params.a);
    let b = BigInt::from(params.b);
    let mut out = Vec::with_capacity(len);
    let (mut x, mut y) = (first, second);
    for _ in 0..len {
        let next = &a * &y + &b * &x;
        out.push(std::mem::replace(&mut x, std::mem::replace(&mut y, next)));
    }
    out
}

/// Reduces a signed machine integer into `[0, modulus)`.
pub fn residue_of(x: i64, modulus: &BigUint) -> BigUint {
    let r = BigUint::from(x.unsigned_abs()) % modulus;
    if x < 0 && !r.is_zero() {
        modulus - r
    } else {
        r
    }
}

/// Reduces a signed big integer into `[0, modulus)`.
pub fn residue_of_big(x: &BigInt, modulus: &BigUint) -> BigUint {
    let r = x.magnitude() % modulus;
    if x.sign() == Sign::Minus && !r.is_zero() {
        modulus - r
    } else {
        r
    }
}

/// `(U_n mod modulus, V_n mod modulus)` in `O(log n)` multiplications.
///
/// The ladder carries `(U_k, U_{k+1})` and uses
/// `U_{2k} = U_k (2 U_{k+1} - a U_k)` and `U_{2k+1} = U_{k+1}^2 + b U_k^2`,
/// so no division by 2 is needed and even moduli work. `V_n` is recovered
/// as `2 U_{n+1} - a U_n`.
pub fn uv_mod(params: &LucasParams, n: u64, modulus: &BigUint) -> Result<(BigUint, BigUint)> {
    if modulus.is_zero() {
        return Err(Error::ZeroModulus);
    }
    if n > MAX_MOD_INDEX {
        return Err(Error::IndexTooLarge {
            n,
            max: MAX_MOD_INDEX,
        });
    }
    if modulus.is_one() {
        return Ok((BigUint::zero(), BigUint::zero()));
    }
    let (u, u_next) = u_pair_mod(params, n, modulus);
    let a = residue_of(params.a, modulus);
    let v = (u_next * 2u32 + (modulus - (&a * &u) % modulus)) % modulus;
    Ok((u, v))
}

/// `U_n mod modulus` alone; panics on a zero modulus.
pub(crate) fn u_mod(params: &LucasParams, n: u64, modulus: &BigUint) -> BigUint {
    assert!(!modulus.is_zero(), "zero modulus");
    if modulus.is_one() {
        return BigUint::zero();
    }
    u_pair_mod(params, n, modulus).0
}

fn u_pair_mod(params: &LucasParams, n: u64, modulus: &BigUint) -> (BigUint, BigUint) {
    let a = residue_of(params.a, modulus);
    let b = residue_of(params.b, modulus);
    let neg_a = (modulus - &a) % modulus;
    let mut u = BigUint::zero();
    let mut u_next = BigUint::one() % modulus;
    for bit in (0..64 - n.leading_zeros()).rev() {
        // (U_k, U_{k+1}) -> (U_{2k}, U_{2k+1})
        let twice = (&u_next * 2u32 + &neg_a * &u) % modulus;
        let even = (&u * twice) % modulus;
        let odd = (&u_next * &u_next + &b * &u * &u) % modulus;
        if (n >> bit) & 1 == 1 {
            let next = (&a * &odd + &b * &even) % modulus;
            u = odd;
            u_next = next;
        } else {
            u = even;
            u_next = odd;
        }
    }
    (u, u_next)
}

/// `nu_p(|x|)` for a nonzero big integer.
pub(crate) fn valuation_big(x: &BigUint, p: u64) -> u32 {
    debug_assert!(!x.is_zero());
    let p = BigUint::from(p);
    let mut x = x.clone();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        x = q;
        v += 1;
    }
}

/// `nu_p(U_k)` computed from residues modulo growing powers of `p`.
///
/// Works for any `k >= 1` without materialising `U_k`.
pub fn u_valuation_at(params: &LucasParams, p: u64, k: u64) -> u32 {
    assert!(k >= 1, "U_0 = 0 has no valuation");
    let base = BigUint::from(p);
    let mut exponent = 16u32;
    loop {
        let modulus = base.pow(exponent);
        let r = u_mod(params, k, &modulus);
        if !r.is_zero() {
            return valuation_big(&r, p);
        }
        exponent *= 2;
    }
}

/// Absolute value helper used by the gcd and closed-form modules.
pub(crate) fn abs_u(params: &LucasParams, n: u64) -> Result<BigUint> {
    Ok(u_exact(params, n)?.into_inner().abs().to_biguint().expect("abs"))
}

pub(crate) fn abs_v(params: &LucasParams, n: u64) -> Result<BigUint> {
    Ok(v_exact(params, n)?.into_inner().abs().to_biguint().expect("abs"))
}
