//! Test-side oracles. Nothing here calls into the library's arithmetic:
//! values are computed with plain big-integer and rational arithmetic.
#![allow(dead_code)]

use exzero_core::curve::EllipticCurveQ;
use exzero_core::iwasawa::{GroupRingElement, MeasureTower};
use exzero_core::Prime;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

pub fn prime(p: u64) -> Prime {
    Prime::new(p).unwrap()
}

pub fn curve(a: [i64; 5]) -> EllipticCurveQ {
    EllipticCurveQ::from_i64(a).unwrap()
}

pub fn pk(p: u64, k: i64) -> BigInt {
    BigInt::from(p).pow(k as u32)
}

pub fn val(p: u64, n: &BigInt) -> Option<i64> {
    if n.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    while n.is_multiple_of(&pb) {
        n /= &pb;
        v += 1;
    }
    Some(v)
}

pub fn inv_mod(a: &BigInt, m: &BigInt) -> BigInt {
    let g = a.extended_gcd(m);
    assert!(g.gcd.is_one(), "{a} is not invertible mod {m}");
    g.x.mod_floor(m)
}

/// A rational with unit denominator reduced mod `p^k`.
pub fn rat_mod(p: u64, r: &BigRational, k: i64) -> BigInt {
    let m = pk(p, k);
    (r.numer() * inv_mod(r.denom(), &m)).mod_floor(&m)
}

/// Valuation of a rational.
pub fn rat_val(p: u64, r: &BigRational) -> Option<i64> {
    Some(val(p, r.numer())? - val(p, r.denom()).unwrap())
}

type Series = Vec<BigInt>;

fn mul_series(a: &[BigInt], b: &[BigInt], len: usize) -> Series {
    let mut out = vec![BigInt::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn inverse_series(a: &[BigInt], len: usize) -> Series {
    assert!(a[0].is_one());
    let mut inv = vec![BigInt::zero(); len];
    inv[0] = BigInt::one();
    for n in 1..len {
        let s: BigInt = (1..=n).filter(|&k| k < a.len()).map(|k| &a[k] * &inv[n - k]).sum();
        inv[n] = -s;
    }
    inv
}

fn sigma(n: u64, k: u32) -> BigInt {
    (1..=n).filter(|d| n.is_multiple_of(*d)).map(|d| BigInt::from(d).pow(k)).sum()
}

/// `1/j(q)` as a power series in `q`, from `Delta / E_4^3`.
pub fn inverse_j_series(len: usize) -> Series {
    let mut e4 = vec![BigInt::zero(); len];
    e4[0] = BigInt::one();
    for n in 1..len {
        e4[n] = 240 * sigma(n as u64, 3);
    }
    let e4_cubed = mul_series(&mul_series(&e4, &e4, len), &e4, len);
    // prod (1 - q^n)^24
    let mut eta24 = vec![BigInt::zero(); len];
    eta24[0] = BigInt::one();
    for n in 1..len {
        for _ in 0..24 {
            for i in (n..len).rev() {
                let t = eta24[i - n].clone();
                eta24[i] -= t;
            }
        }
    }
    let ratio = mul_series(&eta24, &inverse_series(&e4_cubed, len), len);
    let mut out = vec![BigInt::zero(); len];
    for i in 1..len {
        out[i] = ratio[i - 1].clone();
    }
    out
}

fn compose(f: &[BigInt], g: &[BigInt], len: usize) -> Series {
    let mut out = vec![BigInt::zero(); len];
    let mut power = vec![BigInt::zero(); len];
    power[0] = BigInt::one();
    for c in f.iter().take(len) {
        for i in 0..len {
            out[i] += c * &power[i];
        }
        power = mul_series(&power, g, len);
    }
    out
}

/// `q` as a power series in `t = 1/j`, by reversion.
pub fn q_of_inverse_j(len: usize) -> Series {
    let f = inverse_j_series(len);
    let mut g = vec![BigInt::zero(); len];
    g[1] = BigInt::one();
    for k in 2..len {
        let fg = compose(&f, &g, len);
        g[k] = -fg[k].clone();
    }
    g
}

/// `q_E mod p^prec` from `j(E)`, for `v_p(j) < 0`.
pub fn tate_q_oracle(p: u64, j: &BigRational, prec: i64) -> BigInt {
    let t = j.recip();
    let ord = rat_val(p, &t).unwrap();
    assert!(ord > 0);
    let len = (prec / ord + 2) as usize;
    let g = q_of_inverse_j(len);
    let m = pk(p, prec);
    // t = p^ord * (unit)
    let t_int = (t.numer() * inv_mod(t.denom(), &m)).mod_floor(&m);
    let mut acc = BigInt::zero();
    let mut power = BigInt::one();
    for c in &g {
        acc = (acc + c * &power).mod_floor(&m);
        power = (power * &t_int).mod_floor(&m);
    }
    acc
}

/// Iwasawa `log_p` of a `p`-adic unit given by an integer, mod `p^prec`.
pub fn log_oracle(p: u64, u: &BigInt, prec: i64) -> BigInt {
    assert!(!u.is_multiple_of(&BigInt::from(p)));
    let work = prec + 4;
    let m = pk(p, work);
    let y = u.modpow(&BigInt::from(p - 1), &m);
    let x = BigRational::from_integer(y - 1);
    let mut sum = BigRational::zero();
    let mut power = BigRational::one();
    let mut n: i64 = 1;
    loop {
        power = &power * &x;
        let term = &power / BigRational::from_integer(BigInt::from(n));
        if rat_val(p, &term).is_none_or(|v| v >= prec + 2) && n > 2 * prec {
            break;
        }
        if n % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
        n += 1;
    }
    let log = sum / BigRational::from_integer(BigInt::from(p - 1));
    rat_mod(p, &log, prec)
}

/// `sum_t binom(t, i) m_t`: coefficients of `m` in powers of `gamma - 1`.
pub fn binomial_expansion(coeffs: &[BigInt], order: usize) -> Vec<BigInt> {
    (0..order)
        .map(|i| {
            let mut b = BigInt::zero();
            let mut binom = BigInt::zero();
            for (t, c) in coeffs.iter().enumerate() {
                binom = if t == i {
                    BigInt::one()
                } else if t < i {
                    BigInt::zero()
                } else {
                    binom * BigInt::from(t) / BigInt::from(t - i)
                };
                b += &binom * c;
            }
            b
        })
        .collect()
}

pub fn random_element<R: Rng>(rng: &mut R, p: Prime, level: u32, m: u32) -> GroupRingElement {
    let modulus = p.pow(m);
    let bound: u64 = modulus.clone().try_into().unwrap_or(u64::MAX);
    let n = (p.get() as usize).pow(level);
    let coeffs = (0..n).map(|_| BigInt::from(rng.gen_range(0..bound))).collect();
    GroupRingElement::new(p, level, m, coeffs).unwrap()
}

/// Random tower with vanishing augmentation.
pub fn random_augmentation_zero<R: Rng>(rng: &mut R, p: Prime, level: u32, m: u32) -> MeasureTower {
    MeasureTower::from_top(random_element(rng, p, level, m).mul_gamma_minus_one())
}

/// Random tower in `J^2`.
pub fn random_j2<R: Rng>(rng: &mut R, p: Prime, level: u32, m: u32) -> MeasureTower {
    MeasureTower::from_top(random_element(rng, p, level, m).mul_gamma_minus_one().mul_gamma_minus_one())
}

pub fn is_zero_mod(x: &BigInt, m: &BigInt) -> bool {
    x.mod_floor(m).is_zero()
}

pub fn abs_val(x: &BigInt) -> BigInt {
    x.abs()
}
