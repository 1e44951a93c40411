mod common;

use exzero_core::iwasawa::{self, GroupRingElement, MeasureTower};
use exzero_core::padic::{self, PadicNumber};
use exzero_core::Prime;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn prime_strategy() -> impl Strategy<Value = Prime> {
    prop::sample::select(vec![5u64, 7, 11, 13]).prop_map(|p| Prime::new(p).unwrap())
}

fn padic_strategy() -> impl Strategy<Value = (Prime, i64, i64, i64)> {
    (prime_strategy(), -10_000i64..10_000, 1i64..500, 4i64..12)
}

fn element(p: Prime, level: u32, m: u32, seed: &[u64]) -> GroupRingElement {
    let n = (p.get() as usize).pow(level);
    let coeffs = (0..n).map(|i| BigInt::from(seed[i % seed.len()].wrapping_mul(i as u64 + 1) % 1_000_003)).collect();
    GroupRingElement::new(p, level, m, coeffs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_round_trip((p, num, den, prec) in padic_strategy()) {
        let r = BigRational::new(num.into(), den.into());
        let x = PadicNumber::from_rational(p, &r, prec).unwrap();
        let back = PadicNumber::from_rational(p, &x.to_rational(), prec).unwrap();
        prop_assert_eq!(x, back);
    }

    #[test]
    fn field_operations_are_consistent((p, a, b, prec) in padic_strategy(), c in 1i64..1000) {
        let x = PadicNumber::from_ratio(p, a, b, prec).unwrap();
        let y = PadicNumber::from_ratio(p, c, 1, prec).unwrap();
        prop_assert!(x.add(&y).unwrap().agrees_with(&y.add(&x).unwrap()).unwrap());
        prop_assert!(x.mul(&y).unwrap().agrees_with(&y.mul(&x).unwrap()).unwrap());
        prop_assert!(x.add(&y).unwrap().sub(&y).unwrap().agrees_with(&x).unwrap());
        if !y.is_zero() {
            prop_assert!(x.mul(&y).unwrap().div(&y).unwrap().agrees_with(&x).unwrap());
        }
    }

    #[test]
    fn precision_never_exceeds_inputs((p, a, b, prec) in padic_strategy(), k in 1i64..8) {
        let x = PadicNumber::from_ratio(p, a, b, prec).unwrap();
        let y = PadicNumber::from_ratio(p, b, 1, k).unwrap();
        prop_assert!(x.add(&y).unwrap().precision() <= prec.min(k));
        prop_assert!(x.sub(&y).unwrap().precision() <= prec.min(k));
    }

    #[test]
    fn log_is_a_homomorphism(p in prime_strategy(), a in 1i64..10_000, b in 1i64..10_000) {
        let pp = p.get() as i64;
        prop_assume!(a % pp != 0 && b % pp != 0);
        let prec = 8;
        let x = PadicNumber::from_i64(p, a, prec);
        let y = PadicNumber::from_i64(p, b, prec);
        let lhs = padic::padic_log(&x.mul(&y).unwrap()).unwrap();
        let rhs = padic::padic_log(&x).unwrap().add(&padic::padic_log(&y).unwrap()).unwrap();
        prop_assert!(lhs.agrees_with(&rhs).unwrap());
    }

    #[test]
    fn log_matches_oracle(p in prime_strategy(), a in 1i64..100_000) {
        prop_assume!(a % p.get() as i64 != 0);
        let prec = 6;
        let ours = padic::padic_log(&PadicNumber::from_i64(p, a, prec + 1)).unwrap();
        let oracle = common::log_oracle(p.get(), &BigInt::from(a), prec);
        prop_assert_eq!(ours.with_precision(prec).to_integer().unwrap(), oracle);
    }

    #[test]
    fn teichmuller_is_a_root_of_unity(p in prime_strategy(), a in 1i64..1000) {
        prop_assume!(a % p.get() as i64 != 0);
        let w = padic::teichmuller(p, &BigInt::from(a), 10).unwrap();
        prop_assert!(w.pow(p.get() as u32 - 1).agrees_with(&PadicNumber::one(p, 10)).unwrap());
        prop_assert!(w.sub(&PadicNumber::from_i64(p, a, 1)).unwrap().with_precision(1).is_zero());
    }

    #[test]
    fn projection_commutes_with_gamma_minus_one(p in prime_strategy(), m in 2u32..6, seed in prop::collection::vec(any::<u64>(), 1..8)) {
        let level = if p.get() > 7 { 2 } else { 3 };
        let x = element(p, level, m, &seed);
        for k in 0..level {
            prop_assert_eq!(x.mul_gamma_minus_one().project(k), x.project(k).mul_gamma_minus_one());
        }
    }

    #[test]
    fn division_inverts_multiplication(p in prime_strategy(), m in 2u32..6, seed in prop::collection::vec(any::<u64>(), 1..8)) {
        let level = if p.get() > 7 { 2 } else { 3 };
        let t = MeasureTower::from_top(element(p, level, m, &seed).mul_gamma_minus_one());
        let d = iwasawa::divide_gamma_minus_1(&t).unwrap();
        let l = iwasawa::log_gamma_residue(p, m);
        prop_assert_eq!(d.top().mul_gamma_minus_one(), t.top().scale(&l));
        prop_assert!(d.check_compatible().is_ok());
    }

    #[test]
    fn integration_is_linear(p in prime_strategy(), m in 2u32..6, s1 in prop::collection::vec(any::<u64>(), 1..8), s2 in prop::collection::vec(any::<u64>(), 1..8)) {
        let level = 2;
        let a = MeasureTower::from_top(element(p, level, m, &s1));
        let b = MeasureTower::from_top(element(p, level, m, &s2));
        let w = iwasawa::log_power_weight(p, 1, m as i64);
        let ia = iwasawa::integrate(&a, &w).unwrap().value;
        let ib = iwasawa::integrate(&b, &w).unwrap().value;
        let iab = iwasawa::integrate(&a.add(&b).unwrap(), &w).unwrap().value;
        prop_assert!(iab.agrees_with(&ia.add(&ib).unwrap()).unwrap());
    }
}
