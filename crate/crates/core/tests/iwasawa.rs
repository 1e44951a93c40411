mod common;

use common::{prime, random_augmentation_zero, random_element, random_j2};
use exzero_core::iwasawa::{self, CoefficientwisePairing, GroupRingElement, IwasawaError, MeasureTower};
use exzero_core::{PadicNumber, Prime};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CASES: usize = 100;

fn setting(rng: &mut ChaCha8Rng) -> (Prime, u32, u32) {
    let p = [5u64, 7, 11][rng.gen_range(0..3)];
    let level = match p {
        5 => rng.gen_range(1..=3),
        7 => rng.gen_range(1..=3),
        _ => rng.gen_range(1..=2),
    };
    (prime(p), level, rng.gen_range(2..=6))
}

fn ell(p: Prime, m: u32) -> BigInt {
    iwasawa::log_gamma_residue(p, m)
}

fn residue(x: &PadicNumber, k: i64) -> BigInt {
    x.with_precision(k).to_integer().unwrap()
}

#[test]
fn dirac_integrates_to_one() {
    let p = prime(5);
    let t = MeasureTower::from_top(GroupRingElement::dirac(p, 3, 6, 0));
    let r = iwasawa::integrate(&t, |_, _| Some(PadicNumber::one(p, 6))).unwrap();
    assert_eq!(r.value, PadicNumber::one(p, 6));
    assert_eq!(r.level_values.len(), 4);
}

#[test]
fn augmentation_kills_gamma_minus_one() {
    let p = prime(7);
    let t = MeasureTower::from_top(GroupRingElement::dirac(p, 2, 5, 3).mul_gamma_minus_one());
    let r = iwasawa::integrate(&t, |_, _| Some(PadicNumber::one(p, 5))).unwrap();
    assert!(r.value.is_zero());
}

#[test]
fn undefined_weight_is_an_error() {
    let p = prime(5);
    let t = MeasureTower::from_top(GroupRingElement::dirac(p, 1, 3, 2));
    let err = iwasawa::integrate(&t, |_, i| (i == 0).then(|| PadicNumber::one(p, 3))).unwrap_err();
    assert!(matches!(err, IwasawaError::WeightUndefined { .. }));
}

#[test]
fn cyclotomic_weight_matches_direct_level_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let (p, level, m) = setting(&mut rng);
        let t = MeasureTower::from_top(random_element(&mut rng, p, level, m));
        let x = rng.gen_range(0..50i64);
        let xp = PadicNumber::from_i64(p, x, m as i64 + 2);
        let w = iwasawa::cyclotomic_power_weight(&xp, m as i64).unwrap();
        let r = iwasawa::integrate(&t, w).unwrap();
        let modulus = p.pow(m);
        let base = p.big() + BigInt::from(1);
        let direct: BigInt = t
            .level(1)
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| c * base.modpow(&BigInt::from(x * i as i64), &modulus))
            .sum();
        assert_eq!(residue(&r.level_values[1], m as i64), direct.mod_floor(&modulus));
    }
}

#[test]
fn trivial_weight_gives_the_augmentation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let (p, level, m) = setting(&mut rng);
        let t = MeasureTower::from_top(random_element(&mut rng, p, level, m));
        let r = iwasawa::integrate(&t, |_, _| Some(PadicNumber::one(p, m as i64))).unwrap();
        let e = iwasawa::j_expand(&t, 1).unwrap();
        assert!(r.value.agrees_with(&e.coeffs[0]).unwrap());
    }
}

#[test]
fn expansion_matches_binomial_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..CASES {
        let (p, level, m) = setting(&mut rng);
        let t = MeasureTower::from_top(random_element(&mut rng, p, level, m));
        let order = 3.min(t.top().order());
        let Ok(e) = iwasawa::j_expand(&t, order) else { continue };
        let oracle = common::binomial_expansion(t.top().coeffs(), order);
        for (c, b) in e.coeffs.iter().zip(&oracle) {
            let k = c.precision();
            if k > 0 {
                assert_eq!(residue(c, k), b.mod_floor(&p.pow(k as u32)));
            }
        }
    }
}

#[test]
fn reconstruction_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..CASES {
        let (p, level, m) = setting(&mut rng);
        let order = 3usize;
        if iwasawa::expansion_precision(p, m, level, order - 1) < 1 {
            continue;
        }
        let c: Vec<BigInt> = (0..order).map(|_| BigInt::from(rng.gen_range(0..1000))).collect();
        let t = MeasureTower::from_top(GroupRingElement::from_j_coefficients(p, level, m, &c));
        let e = iwasawa::j_expand(&t, order).unwrap();
        for (got, want) in e.coeffs.iter().zip(&c) {
            let k = got.precision();
            assert_eq!(residue(got, k), want.mod_floor(&p.pow(k as u32)));
        }
    }
}

#[test]
fn expansion_depth_is_bounded() {
    let t = MeasureTower::from_top(GroupRingElement::dirac(prime(5), 1, 6, 0));
    assert!(matches!(iwasawa::j_expand(&t, 6), Err(IwasawaError::DepthExhausted { .. })));
}

#[test]
fn division_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..CASES {
        let (p, level, m) = setting(&mut rng);
        let t = random_augmentation_zero(&mut rng, p, level, m);
        let d = iwasawa::divide_gamma_minus_1(&t).unwrap();
        d.check_compatible().unwrap();
        for n in 0..=level {
            assert_eq!(d.level(n).mul_gamma_minus_one(), t.level(n).scale(&ell(p, m)));
        }
    }
}

#[test]
fn division_rejects_nonzero_augmentation() {
    let t = MeasureTower::from_top(GroupRingElement::dirac(prime(5), 2, 4, 0));
    assert!(matches!(
        iwasawa::divide_gamma_minus_1(&t),
        Err(IwasawaError::NonzeroAugmentation(Some(0)))
    ));
}

#[test]
fn double_division_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..CASES {
        let (p, level, m) = setting(&mut rng);
        let t = random_j2(&mut rng, p, level, m);
        let once = iwasawa::divide_gamma_minus_1(&t).unwrap();
        let twice = iwasawa::divide_gamma_minus_1_at_precision(&once).unwrap();
        let k = twice.modulus_exp();
        let l = ell(p, m);
        let modulus = p.pow(k);
        for n in 0..=level {
            let back = twice.level(n).mul_gamma_minus_one().mul_gamma_minus_one();
            let target = t.level(n).scale(&(&l * &l));
            for (a, b) in back.coeffs().iter().zip(target.coeffs()) {
                assert!((a - b).mod_floor(&modulus).is_zero());
            }
        }
    }
}

#[test]
fn derivative_two_sides_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..CASES {
        let (p, level, m) = setting(&mut rng);
        let xi = random_augmentation_zero(&mut rng, p, level, m);
        let z = MeasureTower::from_top(random_element(&mut rng, p, level, m));
        let limit = iwasawa::der_rho(&xi, &z, &CoefficientwisePairing).unwrap();
        let divided = iwasawa::der_rho_via_division(&xi, &z, &CoefficientwisePairing).unwrap();
        assert!(limit.value.agrees_with(&divided).unwrap(), "{} vs {}", limit.value, divided);
        assert_eq!(limit.value.precision(), divided.precision());
    }
}

#[test]
fn derivative_of_zero_is_zero() {
    let p = prime(5);
    let xi = MeasureTower::from_top(GroupRingElement::zero(p, 2, 4));
    let z = MeasureTower::from_top(GroupRingElement::dirac(p, 2, 4, 1));
    assert!(iwasawa::der_rho(&xi, &z, &CoefficientwisePairing).unwrap().value.is_zero());
}

#[test]
fn derivative_rejects_nonzero_augmentation() {
    let p = prime(5);
    let xi = MeasureTower::from_top(GroupRingElement::dirac(p, 2, 4, 1));
    let err = iwasawa::der_rho(&xi, &xi, &CoefficientwisePairing).unwrap_err();
    assert!(matches!(err, IwasawaError::NonzeroAugmentation(_)));
}

struct Skewed;

impl iwasawa::PairingTower for Skewed {
    fn pair(&self, level: u32, x: &GroupRingElement, y: &GroupRingElement) -> BigInt {
        // weights the identity class more at every level: not compatible
        let s: BigInt = x.coeffs().iter().zip(y.coeffs()).map(|(a, b)| a * b).sum();
        s + &x.coeffs()[0] * &y.coeffs()[0] * BigInt::from(level)
    }
}

#[test]
fn incompatible_pairing_is_detected() {
    let p = prime(5);
    let xi = MeasureTower::from_top(GroupRingElement::dirac(p, 2, 4, 1).mul_gamma_minus_one());
    let z = MeasureTower::from_top(GroupRingElement::dirac(p, 2, 4, 0));
    assert!(matches!(
        iwasawa::der_rho(&xi, &z, &Skewed),
        Err(IwasawaError::PairingIncompatible(_))
    ));
}

#[test]
fn congruence_modulo_j_squared() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..CASES {
        let (p, level, m) = setting(&mut rng);
        let t = random_augmentation_zero(&mut rng, p, level, m);
        let d = iwasawa::divide_gamma_minus_1(&t).unwrap();
        let aug = d.augmentation();
        let l = ell(p, m);
        for n in 1..=level {
            let at_level = MeasureTower::from_top(t.level(n).clone());
            let e = iwasawa::j_expand(&at_level, 2).unwrap();
            assert!(e.coeffs[0].is_zero());
            // ((gamma - 1)/l) d = t, so t = (aug d / l)(gamma - 1) mod J^2
            let k = e.coeffs[1].precision();
            let lhs = residue(&e.coeffs[1], k) * &l;
            let modulus = p.pow(k as u32);
            assert!((lhs - &aug).mod_floor(&modulus).is_zero(), "level {n}");
        }
    }
}

#[test]
fn derived_measure_congruence_modulo_j_cubed() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checked = 0;
    for _ in 0..CASES {
        let (p, level, m) = setting(&mut rng);
        let t = random_j2(&mut rng, p, level, m);
        let Ok(e) = iwasawa::j_expand(&t, 3) else { continue };
        let once = iwasawa::divide_gamma_minus_1(&t).unwrap();
        let twice = iwasawa::divide_gamma_minus_1_at_precision(&once).unwrap();
        let l = ell(p, m);
        let k = e.coeffs[2].precision().min(twice.modulus_exp() as i64);
        let modulus = p.pow(k as u32);
        let lhs = residue(&e.coeffs[2], k) * &l * &l;
        assert!((lhs - twice.augmentation()).mod_floor(&modulus).is_zero());
        checked += 1;
    }
    assert!(checked > 50);
}

#[test]
fn level_zero_division_is_generator_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..CASES {
        let (p, level, m) = setting(&mut rng);
        let t = random_augmentation_zero(&mut rng, p, level, m);
        let k = 1 + p.get();
        let a = iwasawa::divide_gamma_minus_1(&t).unwrap();
        let b = iwasawa::divide_by_generator_power(&t, k).unwrap();
        let modulus = p.pow(m.min(level));
        assert!((a.augmentation() - b.augmentation()).mod_floor(&modulus).is_zero());
    }
}

#[test]
fn incompatible_levels_are_rejected() {
    let p = prime(5);
    let levels = vec![GroupRingElement::dirac(p, 0, 3, 0), GroupRingElement::zero(p, 1, 3)];
    assert_eq!(MeasureTower::new(levels), Err(IwasawaError::Incompatible(0)));
}

#[test]
fn towers_stay_compatible() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let (p, level, m) = setting(&mut rng);
        let t = MeasureTower::from_top(random_element(&mut rng, p, level, m));
        t.check_compatible().unwrap();
        t.mul_gamma_minus_one().check_compatible().unwrap();
        t.scale(&BigInt::from(rng.gen_range(1..100))).check_compatible().unwrap();
        t.add(&t.mul_gamma_minus_one()).unwrap().check_compatible().unwrap();
        if let Ok(d) = iwasawa::divide_gamma_minus_1(&t.mul_gamma_minus_one()) {
            d.check_compatible().unwrap();
        }
    }
}
