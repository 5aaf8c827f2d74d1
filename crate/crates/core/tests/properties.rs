use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

use lucas_rank::closed_form::{tau_um_un, tau_um_vn, tau_vm_vn};
use lucas_rank::gcd_identities::{divides_uu, divides_vu, gcd_uu, gcd_uv, gcd_vv};
use lucas_rank::lucas::{make_params, u_terms, uv_mod, v_terms, LucasParams};
use lucas_rank::rank::{default_scan_cap, tau, tau_min_divisor_oracle, tau_scan};
use lucas_rank::verifier::{sweep, SweepConfig, SweepRanges, SweepReport};
use lucas_rank::Theorem;

fn params() -> impl Strategy<Value = LucasParams> {
    (-9i64..=9, -9i64..=9).prop_filter_map("valid parameters", |(a, b)| make_params(a, b).ok())
}

fn eligible() -> impl Strategy<Value = LucasParams> {
    params().prop_filter("a > 0 and positive discriminant", |p| p.theorem_eligible())
}

fn abs(x: &BigInt) -> BigUint {
    x.abs().to_biguint().unwrap()
}

proptest! {
    #[test]
    fn doubling_identities(p in params(), n in 0usize..=64) {
        let u = u_terms(&p, 2 * n + 1).unwrap();
        let v = v_terms(&p, 2 * n + 1).unwrap();
        prop_assert_eq!(&u[2 * n], &(&u[n] * &v[n]));
        let neg_b_pow = BigInt::from(-p.b()).pow(n as u32);
        prop_assert_eq!(&v[2 * n], &(&v[n] * &v[n] - 2 * neg_b_pow));
    }

    #[test]
    fn sixth_term_factors(p in params()) {
        let u = u_terms(&p, 7).unwrap();
        let (a, b) = (BigInt::from(p.a()), BigInt::from(p.b()));
        prop_assert_eq!(&u[6], &(&a * &u[3] * (&a * &a + 3 * b)));
    }

    #[test]
    fn negating_a_flips_signs(p in params(), n in 0usize..=32) {
        let q = p.negate_a();
        let (u, uq) = (u_terms(&p, n + 1).unwrap(), u_terms(&q, n + 1).unwrap());
        let (v, vq) = (v_terms(&p, n + 1).unwrap(), v_terms(&q, n + 1).unwrap());
        let sign = if n % 2 == 0 { -1 } else { 1 };
        prop_assert_eq!(&uq[n], &(&u[n] * sign));
        prop_assert_eq!(&vq[n], &(&v[n] * -sign));
    }

    #[test]
    fn eligible_sequences_grow(p in eligible()) {
        let u = u_terms(&p, 65).unwrap();
        for n in 2..64 {
            prop_assert!(u[n] > BigInt::zero());
            prop_assert!(u[n + 1] >= u[n]);
        }
    }

    #[test]
    fn modular_agrees_with_exact(
        p in params(),
        n in 0u64..=256,
        modulus in prop::sample::select(vec![2u64, 3, 10, 97, 2_147_483_647]),
    ) {
        let u = u_terms(&p, n as usize + 1).unwrap();
        let v = v_terms(&p, n as usize + 1).unwrap();
        let m = BigInt::from(modulus);
        let (um, vm) = uv_mod(&p, n, &BigUint::from(modulus)).unwrap();
        prop_assert_eq!(BigInt::from(um), u[n as usize].mod_floor(&m));
        prop_assert_eq!(BigInt::from(vm), v[n as usize].mod_floor(&m));
    }

    #[test]
    fn terms_coprime_to_b(p in params(), n in 1usize..=80) {
        let b = BigInt::from(p.b());
        prop_assert!(u_terms(&p, n + 1).unwrap()[n].gcd(&b).abs() == BigInt::from(1));
        prop_assert!(v_terms(&p, n + 1).unwrap()[n].gcd(&b).abs() == BigInt::from(1));
    }

    #[test]
    fn gcds_and_divisibility_match_direct(p in eligible(), m in 3u64..=24, n in 3u64..=24) {
        let u = u_terms(&p, 25).unwrap();
        let v = v_terms(&p, 25).unwrap();
        let (um, un) = (abs(&u[m as usize]), abs(&u[n as usize]));
        let (vm, vn) = (abs(&v[m as usize]), abs(&v[n as usize]));
        prop_assert_eq!(gcd_uu(&p, m, n).unwrap().value, um.gcd(&un));
        prop_assert_eq!(gcd_vv(&p, m, n).unwrap().value, vm.gcd(&vn));
        prop_assert_eq!(gcd_uv(&p, m, n).unwrap().value, um.gcd(&vn));
        prop_assert_eq!(divides_uu(&p, n, m).unwrap(), (&um % &un).is_zero());
        prop_assert_eq!(divides_vu(&p, n, m).unwrap(), (&um % &vn).is_zero());
    }

    #[test]
    fn closed_forms_are_multiples_of_index_lcms(p in eligible(), m in 3u64..=30, n in 3u64..=30) {
        let l = m.lcm(&n);
        let um_vn = tau_um_vn(&p, m, n).unwrap().value;
        prop_assert!((um_vn % BigUint::from(m.lcm(&(2 * n)))).is_zero());
        let um_un = tau_um_un(&p, m, n).unwrap().value;
        prop_assert!((um_un % BigUint::from(l)).is_zero());
        let vm_vn = tau_vm_vn(&p, m, n).unwrap().value;
        prop_assert!((vm_vn % BigUint::from(2 * l)).is_zero());
    }

    #[test]
    fn oracles_agree(p in params(), m in 2u64..=400) {
        prop_assume!(m.gcd(&p.b().unsigned_abs()) == 1);
        let m = BigUint::from(m);
        let scanned = tau_scan(&p, &m, default_scan_cap(&m)).unwrap().value;
        let lifted = tau(&p, &m).unwrap().value;
        prop_assert_eq!(lifted, scanned);
        // any multiple of the rank strips back down to it
        let stripped = tau_min_divisor_oracle(&p, &m, scanned * 12).unwrap().value;
        prop_assert_eq!(stripped, scanned);
    }

    #[test]
    fn rank_divides_exactly_the_zero_indices(p in params(), m in 2u64..=300, k in 1u64..=5_000) {
        prop_assume!(m.gcd(&p.b().unsigned_abs()) == 1);
        let m = BigUint::from(m);
        let rank = tau(&p, &m).unwrap().value;
        let (u, _) = uv_mod(&p, k, &m).unwrap();
        prop_assert_eq!(u.is_zero(), k % rank == 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sweep_report_round_trips(p in eligible(), hi in 4u64..=8) {
        let report = sweep(
            &p,
            Theorem::UmVn,
            &SweepRanges::new(3..=hi, 3..=hi),
            &SweepConfig::default(),
        )
        .unwrap();
        let text = serde_json::to_string(&report).unwrap();
        let back: SweepReport = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, report);
    }
}
