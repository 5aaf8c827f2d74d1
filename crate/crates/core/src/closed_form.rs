//! Closed-form ranks of appearance for products of Lucas terms:
//! `tau(U_m V_n)`, `tau(U_m U_n)`, `tau(V_m V_n)` and
//! `tau(U_n U_{n+p} U_{n+2p})` for an odd prime `p`.
//!
//! Branches are chosen from parities, `3 | d` and 2-adic comparisons of the
//! indices before any term is evaluated. Everything downstream is exact.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gcd_identities::{nu2, second_gcd};
use crate::lucas::{abs_u, abs_v, LucasParams, MAX_EXACT_INDEX};
use crate::rank::is_prime;

/// Which product the formula describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// `tau(U_m V_n)`
    UmVn,
    /// `tau(U_m U_n)`
    UmUn,
    /// `tau(V_m V_n)`
    VmVn,
    /// `tau(U_n U_{n+p} U_{n+2p})`
    Triple,
}

impl Theorem {
    pub const ALL: [Theorem; 4] = [Theorem::UmVn, Theorem::UmUn, Theorem::VmVn, Theorem::Triple];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::UmVn => "um-vn",
            Theorem::UmUn => "um-un",
            Theorem::VmVn => "vm-vn",
            Theorem::Triple => "triple",
        }
    }

    /// Every branch of this formula.
    pub fn branches(self) -> &'static [FormulaCase] {
        use FormulaCase::*;
        match self {
            Theorem::UmVn => &[UmVnTwiceLcm, UmVnLcmTimesVd],
            Theorem::UmUn => &[UmUnLcmTimesUd],
            Theorem::VmVn => &[
                VmVnEvenAEvenD,
                VmVnOddAThreeDividesD,
                VmVnEvenAOddDUnequalTwoAdic,
                VmVnEvenB,
                VmVnOddAThreeCoprimeD,
                VmVnEvenAOddDEqualTwoAdic,
            ],
            Theorem::Triple => &[
                TripleCoprimeOdd,
                TripleCoprimeEven,
                TripleMultipleOdd,
                TripleMultipleEven,
            ],
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::BadRange(format!("unknown formula {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulaCase {
    /// `nu_2(m) <= nu_2(n)`: `2 [m, n]`
    UmVnTwiceLcm,
    /// `nu_2(m) > nu_2(n)`: `[m, n] V_d`
    UmVnLcmTimesVd,
    /// `[m, n] U_d`
    UmUnLcmTimesUd,
    /// `2 ∤ b, 2 | a, 2 | d`: `[m, n] g`
    VmVnEvenAEvenD,
    /// `2 ∤ b, 2 ∤ a, 3 | d`: `[m, n] g`
    VmVnOddAThreeDividesD,
    /// `2 ∤ b, 2 | a, 2 ∤ d, nu_2(m) != nu_2(n)`: `[m, n] g`
    VmVnEvenAOddDUnequalTwoAdic,
    /// `2 | b`: `2 [m, n] g`
    VmVnEvenB,
    /// `2 ∤ b, 2 ∤ a, 3 ∤ d`: `2 [m, n] g`
    VmVnOddAThreeCoprimeD,
    /// `2 ∤ b, 2 | a, 2 ∤ d, nu_2(m) = nu_2(n)`: `2 [m, n] g`
    VmVnEvenAOddDEqualTwoAdic,
    /// `p ∤ n, 2 ∤ n`
    TripleCoprimeOdd,
    /// `p ∤ n, 2 | n`
    TripleCoprimeEven,
    /// `p | n, 2 ∤ n`
    TripleMultipleOdd,
    /// `p | n, 2 | n`
    TripleMultipleEven,
}

impl FormulaCase {
    pub fn label(self) -> &'static str {
        use FormulaCase::*;
        match self {
            UmVnTwiceLcm => "um-vn-twice-lcm",
            UmVnLcmTimesVd => "um-vn-lcm-times-vd",
            UmUnLcmTimesUd => "um-un-lcm-times-ud",
            VmVnEvenAEvenD => "vm-vn-even-a-even-d",
            VmVnOddAThreeDividesD => "vm-vn-odd-a-three-divides-d",
            VmVnEvenAOddDUnequalTwoAdic => "vm-vn-even-a-odd-d-unequal-two-adic",
            VmVnEvenB => "vm-vn-even-b",
            VmVnOddAThreeCoprimeD => "vm-vn-odd-a-three-coprime-d",
            VmVnEvenAOddDEqualTwoAdic => "vm-vn-even-a-odd-d-equal-two-adic",
            TripleCoprimeOdd => "triple-coprime-odd",
            TripleCoprimeEven => "triple-coprime-even",
            TripleMultipleOdd => "triple-multiple-odd",
            TripleMultipleEven => "triple-multiple-even",
        }
    }

    /// Whether the `V_m V_n` branch carries the extra factor of 2.
    pub fn doubles(self) -> bool {
        use FormulaCase::*;
        matches!(
            self,
            VmVnEvenB | VmVnOddAThreeCoprimeD | VmVnEvenAOddDEqualTwoAdic
        )
    }
}

impl fmt::Display for FormulaCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Intermediate quantities a formula used, for reports.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ingredients {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lcm: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu2_m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu2_n: Option<u32>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::serde_big::opt_biguint"
    )]
    pub u_d: Option<BigUint>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::serde_big::opt_biguint"
    )]
    pub v_d: Option<BigUint>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::serde_big::opt_biguint"
    )]
    pub gcd_v: Option<BigUint>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::serde_big::opt_biguint"
    )]
    pub index_product: Option<BigUint>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::serde_big::opt_biguint"
    )]
    pub u_p: Option<BigUint>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::serde_big::opt_biguint"
    )]
    pub v_p: Option<BigUint>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::serde_big::opt_biguint"
    )]
    pub gcd_factor: Option<BigUint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosedFormResult {
    #[serde(with = "crate::serde_big::biguint")]
    pub value: BigUint,
    pub case_label: FormulaCase,
    pub ingredients: Ingredients,
}

fn check_pair(params: &LucasParams, m: u64, n: u64) -> Result<()> {
    params.require_eligible()?;
    if m < 3 || n < 3 {
        return Err(Error::BadRange(format!(
            "indices must be at least 3, got m={m}, n={n}"
        )));
    }
    if m > MAX_EXACT_INDEX || n > MAX_EXACT_INDEX {
        return Err(Error::IndexTooLarge {
            n: m.max(n),
            max: MAX_EXACT_INDEX,
        });
    }
    Ok(())
}

fn pair_ingredients(m: u64, n: u64) -> Ingredients {
    let d = m.gcd(&n);
    Ingredients {
        d: Some(d),
        lcm: Some(m / d * n),
        nu2_m: Some(nu2(m)),
        nu2_n: Some(nu2(n)),
        ..Ingredients::default()
    }
}

pub fn um_vn_case(m: u64, n: u64) -> FormulaCase {
    if nu2(m) <= nu2(n) {
        FormulaCase::UmVnTwiceLcm
    } else {
        FormulaCase::UmVnLcmTimesVd
    }
}

pub fn vm_vn_case(params: &LucasParams, m: u64, n: u64) -> FormulaCase {
    use FormulaCase::*;
    let d = m.gcd(&n);
    let a_even = params.a() % 2 == 0;
    let b_even = params.b() % 2 == 0;
    if b_even {
        assert!(!a_even, "a and b are coprime, so both cannot be even");
        return VmVnEvenB;
    }
    match (a_even, d % 2 == 0, d % 3 == 0, nu2(m) == nu2(n)) {
        (true, true, _, _) => VmVnEvenAEvenD,
        (true, false, _, false) => VmVnEvenAOddDUnequalTwoAdic,
        (true, false, _, true) => VmVnEvenAOddDEqualTwoAdic,
        (false, _, true, _) => VmVnOddAThreeDividesD,
        (false, _, false, _) => VmVnOddAThreeCoprimeD,
    }
}

pub fn triple_case(n: u64, p: u64) -> FormulaCase {
    use FormulaCase::*;
    match (n % p == 0, n % 2 == 0) {
        (false, false) => TripleCoprimeOdd,
        (false, true) => TripleCoprimeEven,
        (true, false) => TripleMultipleOdd,
        (true, true) => TripleMultipleEven,
    }
}

/// `tau(U_m V_n)`.
pub fn tau_um_vn(params: &LucasParams, m: u64, n: u64) -> Result<ClosedFormResult> {
    check_pair(params, m, n)?;
    let mut ingredients = pair_ingredients(m, n);
    let lcm = BigUint::from(ingredients.lcm.unwrap());
    let case = um_vn_case(m, n);
    let value = match case {
        FormulaCase::UmVnTwiceLcm => lcm * 2u8,
        _ => {
            let v_d = abs_v(params, ingredients.d.unwrap())?;
            let value = lcm * &v_d;
            ingredients.v_d = Some(v_d);
            value
        }
    };
    Ok(ClosedFormResult {
        value,
        case_label: case,
        ingredients,
    })
}

/// `tau(U_m U_n) = [m, n] U_d`.
pub fn tau_um_un(params: &LucasParams, m: u64, n: u64) -> Result<ClosedFormResult> {
    check_pair(params, m, n)?;
    let mut ingredients = pair_ingredients(m, n);
    let u_d = abs_u(params, ingredients.d.unwrap())?;
    let value = BigUint::from(ingredients.lcm.unwrap()) * &u_d;
    ingredients.u_d = Some(u_d);
    Ok(ClosedFormResult {
        value,
        case_label: FormulaCase::UmUnLcmTimesUd,
        ingredients,
    })
}

/// `tau(V_m V_n)`, either `[m, n] g` or `2 [m, n] g` with `g = gcd(V_m, V_n)`.
pub fn tau_vm_vn(params: &LucasParams, m: u64, n: u64) -> Result<ClosedFormResult> {
    check_pair(params, m, n)?;
    let mut ingredients = pair_ingredients(m, n);
    let case = vm_vn_case(params, m, n);
    let g = second_gcd(params, m, n)?.value;
    let mut value = BigUint::from(ingredients.lcm.unwrap()) * &g;
    if case.doubles() {
        value *= 2u8;
    }
    ingredients.gcd_v = Some(g);
    Ok(ClosedFormResult {
        value,
        case_label: case,
        ingredients,
    })
}

fn exact_div(x: BigUint, y: &BigUint) -> BigUint {
    let (q, r) = x.div_rem(y);
    assert!(r.is_zero(), "inexact division in closed form");
    q
}

/// `tau(U_n U_{n+p} U_{n+2p})` for an odd prime `p`.
pub fn tau_triple(params: &LucasParams, n: u64, p: u64) -> Result<ClosedFormResult> {
    params.require_eligible()?;
    if p < 3 || !is_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    if n == 0 {
        return Err(Error::BadRange("n must be positive".into()));
    }
    if n.saturating_add(p.saturating_mul(2)) > MAX_EXACT_INDEX {
        return Err(Error::IndexTooLarge {
            n,
            max: MAX_EXACT_INDEX,
        });
    }
    let product = BigUint::from(n) * (n + p) * (n + 2 * p);
    let p_sq = BigUint::from(p * p);
    let case = triple_case(n, p);
    let mut ingredients = Ingredients {
        index_product: Some(product.clone()),
        ..Ingredients::default()
    };
    let value = match case {
        FormulaCase::TripleCoprimeOdd => product,
        FormulaCase::TripleCoprimeEven => {
            let a = params.a().unsigned_abs();
            let g = a.gcd(&(n + p));
            ingredients.gcd_factor = Some(BigUint::from(g));
            exact_div(product, &BigUint::from(2u8)) * (a / g)
        }
        FormulaCase::TripleMultipleOdd => {
            let u_p = abs_u(params, p)?;
            let value = exact_div(product, &p_sq) * &u_p * &u_p;
            ingredients.u_p = Some(u_p);
            value
        }
        _ => {
            let u_p = abs_u(params, p)?;
            let v_p = abs_v(params, p)?;
            let g = v_p.gcd(&BigUint::from((n + p) / p));
            let value = exact_div(product, &(p_sq * 2u8)) * exact_div(&u_p * &u_p * &v_p, &g);
            ingredients.u_p = Some(u_p);
            ingredients.v_p = Some(v_p);
            ingredients.gcd_factor = Some(g);
            value
        }
    };
    Ok(ClosedFormResult {
        value,
        case_label: case,
        ingredients,
    })
}

/// Evaluates `theorem` on `(first, second)`: `(m, n)` for the pair
/// formulas and `(n, p)` for the triple.
pub fn evaluate(
    params: &LucasParams,
    theorem: Theorem,
    first: u64,
    second: u64,
) -> Result<ClosedFormResult> {
    match theorem {
        Theorem::UmVn => tau_um_vn(params, first, second),
        Theorem::UmUn => tau_um_un(params, first, second),
        Theorem::VmVn => tau_vm_vn(params, first, second),
        Theorem::Triple => tau_triple(params, first, second),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lucas::make_params;

    fn p(a: i64, b: i64) -> LucasParams {
        make_params(a, b).unwrap()
    }

    fn val(r: ClosedFormResult) -> u64 {
        u64::try_from(r.value).unwrap()
    }

    #[test]
    fn um_vn_examples() {
        let fib = p(1, 1);
        assert_eq!(val(tau_um_vn(&fib, 4, 6).unwrap()), 36);
        assert_eq!(val(tau_um_vn(&fib, 3, 6).unwrap()), 12);
        let r = tau_um_vn(&fib, 3, 3).unwrap();
        assert_eq!(r.case_label, FormulaCase::UmVnTwiceLcm);
        assert_eq!(val(r), 6);
    }

    #[test]
    fn um_un_examples() {
        assert_eq!(val(tau_um_un(&p(1, 1), 6, 9).unwrap()), 36);
        assert_eq!(val(tau_um_un(&p(1, 1), 5, 7).unwrap()), 35);
        assert_eq!(val(tau_um_un(&p(2, 1), 4, 6).unwrap()), 24);
    }

    #[test]
    fn vm_vn_examples() {
        let fib = p(1, 1);
        let r = tau_vm_vn(&fib, 3, 6).unwrap();
        assert_eq!(r.case_label, FormulaCase::VmVnOddAThreeDividesD);
        assert_eq!(val(r), 12);
        assert_eq!(val(tau_vm_vn(&fib, 6, 6).unwrap()), 108);
        let r = tau_vm_vn(&fib, 4, 5).unwrap();
        assert_eq!(r.case_label, FormulaCase::VmVnOddAThreeCoprimeD);
        assert_eq!(val(r), 40);
    }

    #[test]
    fn triple_examples() {
        let fib = p(1, 1);
        let r = tau_triple(&fib, 50, 5).unwrap();
        assert_eq!(r.case_label, FormulaCase::TripleMultipleEven);
        assert_eq!(val(r), 82_500);
        let r = tau_triple(&fib, 1, 3).unwrap();
        assert_eq!(r.case_label, FormulaCase::TripleCoprimeOdd);
        assert_eq!(val(r), 28);
        assert_eq!(val(tau_triple(&fib, 6, 3).unwrap()), 576);
    }

    #[test]
    fn errors() {
        assert_eq!(
            tau_um_un(&p(-3, -5), 4, 6),
            Err(Error::NotEligible { a: -3, b: -5 })
        );
        assert!(matches!(tau_um_vn(&p(1, 1), 2, 6), Err(Error::BadRange(_))));
        assert_eq!(tau_triple(&p(1, 1), 4, 2), Err(Error::NotOddPrime(2)));
        assert_eq!(tau_triple(&p(1, 1), 4, 9), Err(Error::NotOddPrime(9)));
    }

    #[test]
    fn fibonacci_collapse() {
        // At (1, 1) the V_m V_n split is exactly "3 | m and 3 | n".
        let fib = p(1, 1);
        for m in 3..=40 {
            for n in 3..=40 {
                let case = vm_vn_case(&fib, m, n);
                assert_eq!(!case.doubles(), m % 3 == 0 && n % 3 == 0, "m={m} n={n}");
            }
        }
        for q in [3, 5, 7, 11] {
            for n in (2..=60).step_by(2).filter(|n| n % q != 0) {
                let r = tau_triple(&fib, n, q).unwrap();
                assert_eq!(r.value, BigUint::from(n * (n + q) * (n + 2 * q) / 2));
            }
        }
    }

    #[test]
    fn theorem_names_parse() {
        for t in Theorem::ALL {
            assert_eq!(t.name().parse::<Theorem>().unwrap(), t);
            assert_eq!(serde_json::to_string(&t).unwrap(), format!("\"{}\"", t.name()));
        }
        for t in Theorem::ALL {
            for case in t.branches() {
                assert_eq!(
                    serde_json::to_string(case).unwrap(),
                    format!("\"{}\"", case.label())
                );
            }
        }
    }
}
