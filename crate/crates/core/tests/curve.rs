mod common;

use common::{curve, pk, prime, rat_val};
use exzero_core::curve::{self, CurveError, ReductionKind};
use exzero_core::PadicNumber;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

/// (label, coefficients, multiplicative prime)
const MULTIPLICATIVE: &[(&str, [i64; 5], u64)] = &[
    ("11a", [0, -1, 1, -10, -20], 11),
    ("14a", [1, 0, 1, 4, -6], 7),
    ("15a", [1, 1, 1, -10, -10], 5),
    ("19a", [0, 1, 1, -9, -15], 19),
    ("26a", [1, 0, 1, -5, -8], 13),
    ("37b", [0, 1, 1, -23, -50], 37),
    ("57a", [0, -1, 1, -2, 2], 19),
    ("58a", [1, -1, 0, -1, 1], 29),
    ("65a", [1, 0, 0, -1, 0], 13),
    ("77a", [0, 0, 1, 2, 0], 11),
    ("91a", [0, 0, 1, 1, 0], 13),
    ("91b", [0, 1, 1, -7, 5], 7),
];

#[test]
fn invariants_of_11a() {
    let e = curve([0, -1, 1, -10, -20]);
    assert_eq!(e.discriminant(), &BigInt::from(-161051));
    let lhs = e.c4().pow(3) - e.c6().pow(2);
    assert_eq!(lhs, BigInt::from(1728) * e.discriminant());
    // j = -2^12 31^3 / 11^5
    let j = e.j_invariant();
    assert_eq!(j.numer(), &(BigInt::from(-4096) * BigInt::from(29791)));
    assert_eq!(j.denom(), &BigInt::from(161051));
}

#[test]
fn singular_cubic_is_rejected() {
    assert_eq!(curve::EllipticCurveQ::from_i64([0, 0, 0, 0, 0]), Err(CurveError::Singular));
}

#[test]
fn reduction_of_11a() {
    let e = curve([0, -1, 1, -10, -20]);
    let r = curve::reduction_type(&e, 11).unwrap();
    assert_eq!(r.kind, ReductionKind::SplitMultiplicative);
    assert_eq!(r.v_disc, 5);
    assert_eq!(r.a_p, 1);
    let good = curve::reduction_type(&e, 7).unwrap();
    assert_eq!(good.kind, ReductionKind::Good);
    // #E(F_7) = 10 by direct count
    let mut count = 1i64;
    for x in 0..7i64 {
        for y in 0..7i64 {
            if (y * y + y - (x * x * x - x * x - 10 * x - 20)).rem_euclid(7) == 0 {
                count += 1;
            }
        }
    }
    assert_eq!(good.a_p, 7 + 1 - count);
    assert!(matches!(curve::reduction_type(&e, 3), Err(CurveError::BadPrime(3))));
}

#[test]
fn additive_reduction_after_scaling() {
    // y^2 = x^3 - 11^2 x + 11^3 has c4 and Delta divisible by 11
    let e = curve([0, 0, 0, -121, 1331]);
    let r = curve::reduction_type(&e, 11).unwrap();
    assert_eq!(r.kind, ReductionKind::Additive);
}

#[test]
fn split_and_nonsplit_are_distinguished() {
    for &(label, a, p) in MULTIPLICATIVE {
        let e = curve(a);
        let r = curve::reduction_type(&e, p).unwrap();
        assert!(r.is_multiplicative(), "{label}");
        let m = BigInt::from(p);
        let minus_c6 = (-e.c6()).mod_floor(&m);
        let square = minus_c6.modpow(&BigInt::from((p - 1) / 2), &m) == BigInt::from(1);
        assert_eq!(r.kind == ReductionKind::SplitMultiplicative, square, "{label}");
        assert_eq!(r.a_p, if square { 1 } else { -1 }, "{label}");
    }
}

#[test]
fn tate_parameter_matches_series_reversion() {
    for &(label, a, p) in MULTIPLICATIVE {
        let e = curve(a);
        let t = curve::tate_parameter(&e, p, 8).unwrap();
        let j = e.j_invariant();
        assert_eq!(t.ord, -rat_val(p, &j).unwrap(), "{label}");
        let prec = t.q.precision().min(8 + t.ord);
        let oracle = common::tate_q_oracle(p, &j, prec);
        let ours = t.q.to_integer().unwrap().mod_floor(&pk(p, prec));
        assert_eq!(ours, oracle, "{label}: q_E");
    }
}

#[test]
fn l_invariant_matches_log_oracle() {
    for &(label, a, p) in MULTIPLICATIVE.iter().take(6) {
        let e = curve(a);
        let t = curve::tate_parameter(&e, p, 8).unwrap();
        let u = t.u.to_integer().unwrap();
        let prec = t.log_q.precision().min(7);
        let log_u = common::log_oracle(p, &u, prec);
        let ours = t.log_q.to_integer().unwrap().mod_floor(&pk(p, prec));
        assert_eq!(ours, log_u, "{label}: log q");
        let ord_inv = common::inv_mod(&BigInt::from(t.ord), &pk(p, prec));
        let l = t.l_invariant.to_integer().unwrap().mod_floor(&pk(p, prec));
        assert_eq!(l, (log_u * ord_inv).mod_floor(&pk(p, prec)), "{label}: L");
    }
}

#[test]
fn leading_term_when_ord_is_one() {
    // 91a has v_13(j) = -1
    let e = curve([0, 0, 1, 1, 0]);
    let t = curve::tate_parameter(&e, 13, 6).unwrap();
    assert_eq!(t.ord, 1);
    let inv_j = PadicNumber::from_rational(prime(13), &e.j_invariant().recip(), 2).unwrap();
    assert!(t.q.with_precision(2).agrees_with(&inv_j).unwrap());
}

#[test]
fn frozen_tate_data_for_11a() {
    // frozen from the series-reversion and log oracles
    let e = curve([0, -1, 1, -10, -20]);
    let t = curve::tate_parameter(&e, 11, 8).unwrap();
    assert_eq!(t.ord, 5);
    assert!(t.split);
    let m = pk(11, 13);
    let q = t.q.to_integer().unwrap().mod_floor(&m);
    assert_eq!(q, common::tate_q_oracle(11, &e.j_invariant(), 13));
    assert_eq!(t.u.unit().mod_floor(&m), BigInt::from(29675656426327i64).mod_floor(&m));
    assert_eq!(t.log_q.valuation(), Some(1));
}

#[test]
fn good_reduction_has_no_tate_parameter() {
    let e = curve([0, -1, 1, -10, -20]);
    assert!(matches!(curve::tate_parameter(&e, 7, 8), Err(CurveError::NotMultiplicative(7))));
    assert!(matches!(curve::tate_parameter(&e, 11, 0), Err(CurveError::BadPrecision(0))));
}

#[test]
fn tate_series_leading_coefficients() {
    let (a4, a6) = curve::tate_series_coefficients(4);
    let ints = |v: &[i64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
    assert_eq!(a4, ints(&[0, -5, -45, -140]));
    assert_eq!(a6[..3], ints(&[0, -1, -23])[..]);
}

#[test]
fn tate_curve_has_the_series_j_invariant() {
    for &(label, a, p) in MULTIPLICATIVE.iter().take(5) {
        let e = curve(a);
        let t = curve::tate_parameter(&e, p, 8).unwrap();
        let s = curve::tate_series(&t.q, 8).unwrap();
        assert!(s.agreement >= s.j_curve.precision().min(s.j_series.precision()), "{label}");
    }
    let unit = PadicNumber::one(prime(5), 8);
    assert!(matches!(curve::tate_series(&unit, 8), Err(CurveError::NonPositiveOrder)));
}

#[test]
fn degenerate_tate_curve() {
    // a_4 and a_6 shrink with q: both are q times a unit
    for k in 1..5 {
        let q = PadicNumber::prime_power(prime(7), k, 40);
        let s = curve::tate_series(&q, 30).unwrap();
        assert_eq!(s.a4.valuation(), Some(k));
        assert_eq!(s.a6.valuation(), Some(k));
    }
}

#[test]
fn height_unit_class_of_11a() {
    let e = curve([0, -1, 1, -10, -20]);
    let t = curve::tate_parameter(&e, 11, 8).unwrap();
    let h = curve::height_unit_class(&e, 11, 8).unwrap();
    let prec = h.precision().min(7);
    let u = t.u.to_integer().unwrap();
    let log_u = common::log_oracle(11, &u, prec);
    // (1 - 1/p)^{-1} = p / (p - 1)
    let m = pk(11, prec);
    let expected: BigInt = (log_u * BigInt::from(11) * common::inv_mod(&BigInt::from(10), &m)).mod_floor(&m);
    assert_eq!(h.to_integer().unwrap().mod_floor(&m), expected);
    let finer = curve::height_unit_class(&e, 11, 10).unwrap();
    assert!(finer.agrees_with(&h).unwrap());
}

#[test]
fn synthetic_power_of_p_has_zero_height() {
    let p = prime(7);
    let q = PadicNumber::prime_power(p, 3, 12);
    let t = curve::TateData {
        p,
        q: q.clone(),
        ord: 3,
        u: PadicNumber::one(p, 9),
        log_q: PadicNumber::zero(p, 9),
        l_invariant: PadicNumber::zero(p, 9),
        working_precision: 12,
        escalations: 0,
        split: true,
    };
    assert!(curve::height_from_tate(&t).unwrap().is_zero());
}

#[test]
fn lambda_bk_formula() {
    let e = curve([0, -1, 1, -10, -20]);
    let t = curve::tate_parameter(&e, 11, 8).unwrap();
    let p = prime(11);
    let alpha = PadicNumber::from_i64(p, 2, 8);
    let h = PadicNumber::from_ratio(p, 1, 3, 8).unwrap();
    let lam = curve::lambda_bk(1, &alpha, &h, &t).unwrap();
    // 1/alpha - (alpha/h) L / ord
    let expected = PadicNumber::one(p, 8)
        .div(&alpha)
        .unwrap()
        .sub(&alpha.div(&h).unwrap().mul(&t.l_invariant).unwrap().div_integer(&BigInt::from(5)).unwrap())
        .unwrap();
    assert!(lam.value.agrees_with(&expected).unwrap());
    assert!(!lam.regulator_vanishes);
    // alpha^2 L = h ord makes lambda vanish
    let h0 = alpha.mul(&alpha).unwrap().mul(&t.l_invariant).unwrap().div_integer(&BigInt::from(5)).unwrap();
    let lam0 = curve::lambda_bk(1, &alpha, &h0, &t).unwrap();
    assert!(lam0.value.is_zero() && lam0.regulator_vanishes);
    assert_eq!(curve::lambda_bk(1, &PadicNumber::zero(p, 8), &h, &t), Err(CurveError::ZeroAlpha));
    assert_eq!(curve::lambda_bk(1, &alpha, &PadicNumber::zero(p, 8), &t), Err(CurveError::ZeroHeight));
}

#[test]
fn j_series_matches_oracle_coefficients() {
    let c = curve::j_series_coefficients(4);
    // j = 1/q + 744 + 196884 q + 21493760 q^2
    assert!(c.iter().any(|x| x == &BigInt::from(196884)));
    assert!(c.iter().any(|x| x == &BigInt::from(21493760)));
    assert!(!c.iter().all(Zero::is_zero));
}
