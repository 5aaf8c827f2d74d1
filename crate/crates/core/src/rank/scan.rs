//! Step-by-step evaluation of `U_k mod m`.
//!
//! Scans run for millions of steps, so the residue pair is kept in fixed
//! machine words: `u128` arithmetic for moduli below `2^63`, and a limb
//! buffer with small multipliers above that. Large `|a|` or `|b|` fall back
//! to `BigUint`.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::lucas::{residue_of, LucasParams};

const MAX_SMALL_COEFF: u64 = 64;

/// Iterator state holding `(U_k mod m, U_{k+1} mod m)`, starting at `k = 1`.
pub struct ModularScanner {
    inner: Inner,
}

enum Inner {
    Word {
        m: u128,
        a: u128,
        b: u128,
        cur: u128,
        next: u128,
    },
    Limbs(LimbState),
    Big {
        m: BigUint,
        a: BigUint,
        b: BigUint,
        cur: BigUint,
        next: BigUint,
    },
}

struct LimbState {
    /// Modulus limbs plus one zero guard limb.
    m: Vec<u64>,
    cur: Vec<u64>,
    next: Vec<u64>,
    scratch: Vec<u64>,
    acc: Vec<u64>,
    a_abs: u64,
    a_neg: bool,
    b_abs: u64,
    b_neg: bool,
}

impl ModularScanner {
    pub fn new(params: &LucasParams, m: &BigUint) -> Self {
        assert!(!m.is_zero(), "zero modulus");
        let a_res = residue_of(params.a(), m);
        let b_res = residue_of(params.b(), m);
        let one = BigUint::from(1u8) % m;
        let u2 = a_res.clone();
        let inner = if let Some(mw) = m.to_u64().filter(|&w| w < 1 << 63) {
            Inner::Word {
                m: u128::from(mw),
                a: a_res.to_u128().unwrap(),
                b: b_res.to_u128().unwrap(),
                cur: one.to_u128().unwrap(),
                next: u2.to_u128().unwrap(),
            }
        } else if params.a().unsigned_abs() <= MAX_SMALL_COEFF
            && params.b().unsigned_abs() <= MAX_SMALL_COEFF
        {
            let len = m.to_u64_digits().len() + 1;
            let limbs = |x: &BigUint| {
                let mut v = x.to_u64_digits();
                v.resize(len, 0);
                v
            };
            Inner::Limbs(LimbState {
                m: limbs(m),
                cur: limbs(&one),
                next: limbs(&u2),
                scratch: vec![0; len],
                acc: vec![0; len],
                a_abs: params.a().unsigned_abs(),
                a_neg: params.a() < 0,
                b_abs: params.b().unsigned_abs(),
                b_neg: params.b() < 0,
            })
        } else {
            Inner::Big {
                m: m.clone(),
                a: a_res,
                b: b_res,
                cur: one,
                next: u2,
            }
        };
        ModularScanner { inner }
    }

    pub fn current_is_zero(&self) -> bool {
        match &self.inner {
            Inner::Word { cur, .. } => *cur == 0,
            Inner::Limbs(s) => s.cur.iter().all(|&w| w == 0),
            Inner::Big { cur, .. } => cur.is_zero(),
        }
    }

    /// `U_k mod m` at the current position.
    pub fn current(&self) -> BigUint {
        match &self.inner {
            Inner::Word { cur, .. } => BigUint::from(*cur),
            Inner::Limbs(s) => BigUint::new(
                s.cur
                    .iter()
                    .flat_map(|&w| [w as u32, (w >> 32) as u32])
                    .collect(),
            ),
            Inner::Big { cur, .. } => cur.clone(),
        }
    }

    /// Advances from `k` to `k + 1`.
    pub fn step(&mut self) {
        match &mut self.inner {
            Inner::Word {
                m,
                a,
                b,
                cur,
                next,
            } => {
                let following = (*a * *next + *b * *cur) % *m;
                *cur = std::mem::replace(next, following);
            }
            Inner::Limbs(s) => s.step(),
            Inner::Big {
                m,
                a,
                b,
                cur,
                next,
            } => {
                let following = (&*a * &*next + &*b * &*cur) % &*m;
                *cur = std::mem::replace(next, following);
            }
        }
    }
}

fn is_zero(x: &[u64]) -> bool {
    x.iter().all(|&w| w == 0)
}

/// `out = m - x` for `0 < x < m`, or `0` when `x = 0`.
fn negate_into(out: &mut [u64], x: &[u64], m: &[u64]) {
    if is_zero(x) {
        out.fill(0);
        return;
    }
    let mut borrow = 0u64;
    for i in 0..m.len() {
        let (d1, b1) = m[i].overflowing_sub(x[i]);
        let (d2, b2) = d1.overflowing_sub(borrow);
        out[i] = d2;
        borrow = u64::from(b1 | b2);
    }
}

/// `acc += x * c`, with `acc` wide enough to absorb the carry.
fn mul_add(acc: &mut [u64], x: &[u64], c: u64) {
    let mut carry = 0u128;
    for i in 0..acc.len() {
        let t = u128::from(acc[i]) + u128::from(x[i]) * u128::from(c) + carry;
        acc[i] = t as u64;
        carry = t >> 64;
    }
    debug_assert_eq!(carry, 0);
}

fn geq(x: &[u64], m: &[u64]) -> bool {
    for i in (0..x.len()).rev() {
        if x[i] != m[i] {
            return x[i] > m[i];
        }
    }
    true
}

fn sub_in_place(x: &mut [u64], m: &[u64]) {
    let mut borrow = 0u64;
    for i in 0..x.len() {
        let (d1, b1) = x[i].overflowing_sub(m[i]);
        let (d2, b2) = d1.overflowing_sub(borrow);
        x[i] = d2;
        borrow = u64::from(b1 | b2);
    }
}

impl LimbState {
    fn step(&mut self) {
        // following = a * next + b * cur, with negative coefficients applied
        // to the negated residue so every term stays nonnegative.
        let mut acc = std::mem::take(&mut self.acc);
        acc.fill(0);
        if self.a_neg {
            negate_into(&mut self.scratch, &self.next, &self.m);
            mul_add(&mut acc, &self.scratch, self.a_abs);
        } else {
            mul_add(&mut acc, &self.next, self.a_abs);
        }
        if self.b_neg {
            negate_into(&mut self.scratch, &self.cur, &self.m);
            mul_add(&mut acc, &self.scratch, self.b_abs);
        } else {
            mul_add(&mut acc, &self.cur, self.b_abs);
        }
        while geq(&acc, &self.m) {
            sub_in_place(&mut acc, &self.m);
        }
        std::mem::swap(&mut self.cur, &mut self.next);
        self.acc = std::mem::replace(&mut self.next, acc);
    }
}
