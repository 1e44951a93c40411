//! p-adic numbers with explicit absolute precision.
//!
//! A [`PadicNumber`] is `u * p^v + O(p^M)` with `u` a unit reduced modulo
//! `p^(M - v)`. Both `v` and `M` may be negative. The value known to be
//! divisible by `p^M` is represented by a dedicated zero form carrying `M`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("{0} is not a prime greater than 3")]
    BadPrime(u64),
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("division by a value indistinguishable from zero at precision {0}")]
    DivisionByZero(i64),
    #[error("logarithm of a value indistinguishable from zero")]
    LogOfZero,
    #[error("{0} is divisible by p; Teichmuller lift needs a unit")]
    NonUnitResidue(BigInt),
    #[error("precision must be positive, got {0}")]
    BadPrecision(i64),
    #[error("denominator is zero")]
    ZeroDenominator,
}

/// A rational prime `p > 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self, PadicError> {
        if p > 3 && is_prime_u64(p) {
            Ok(Prime(p))
        } else {
            Err(PadicError::BadPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn big(self) -> BigInt {
        BigInt::from(self.0)
    }

    /// `p^e` for `e >= 0`.
    pub fn pow(self, e: u32) -> BigInt {
        num_traits::pow(self.big(), e as usize)
    }

    /// Largest `k` with `p^k <= n` (`n >= 1`).
    pub fn ilog(self, n: u64) -> u32 {
        let mut k = 0;
        let mut acc = self.0;
        while acc <= n {
            k += 1;
            match acc.checked_mul(self.0) {
                Some(next) => acc = next,
                None => break,
            }
        }
        k
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for sp in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(sp) {
            return n == sp;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        r
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// `v_p(n)` and the cofactor, for `n != 0`.
pub fn split_valuation(p: Prime, n: &BigInt) -> (i64, BigInt) {
    debug_assert!(!n.is_zero());
    let pb = p.big();
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return (v, m);
        }
        m = q;
        v += 1;
    }
}

fn mod_pow_p(p: Prime, e: i64) -> BigInt {
    debug_assert!(e >= 0);
    p.pow(e as u32)
}

/// Modular inverse of a unit modulo `m`.
pub(crate) fn inverse_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let g = a.extended_gcd(m);
    if !g.gcd.is_one() {
        return None;
    }
    Some(g.x.mod_floor(m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicNumber {
    p: Prime,
    /// `None` is the zero form `O(p^prec)`.
    val: Option<i64>,
    unit: BigInt,
    prec: i64,
}

impl PadicNumber {
    pub fn zero(p: Prime, prec: i64) -> Self {
        PadicNumber {
            p,
            val: None,
            unit: BigInt::zero(),
            prec,
        }
    }

    pub fn one(p: Prime, prec: i64) -> Self {
        Self::from_integer(p, &BigInt::one(), prec)
    }

    /// The element `n * p^shift + O(p^prec)`.
    fn normalize(p: Prime, n: &BigInt, shift: i64, prec: i64) -> Self {
        if n.is_zero() {
            return Self::zero(p, prec);
        }
        let (vn, cof) = split_valuation(p, n);
        let v = vn + shift;
        if v >= prec {
            return Self::zero(p, prec);
        }
        let modulus = mod_pow_p(p, prec - v);
        PadicNumber {
            p,
            val: Some(v),
            unit: cof.mod_floor(&modulus),
            prec,
        }
    }

    pub fn from_integer(p: Prime, n: &BigInt, prec: i64) -> Self {
        Self::normalize(p, n, 0, prec)
    }

    pub fn from_i64(p: Prime, n: i64, prec: i64) -> Self {
        Self::from_integer(p, &BigInt::from(n), prec)
    }

    /// `p^k + O(p^prec)`.
    pub fn prime_power(p: Prime, k: i64, prec: i64) -> Self {
        Self::normalize(p, &BigInt::one(), k, prec)
    }

    pub fn from_rational(p: Prime, r: &BigRational, prec: i64) -> Result<Self, PadicError> {
        if r.denom().is_zero() {
            return Err(PadicError::ZeroDenominator);
        }
        if r.numer().is_zero() {
            return Ok(Self::zero(p, prec));
        }
        let (vn, un) = split_valuation(p, r.numer());
        let (vd, ud) = split_valuation(p, r.denom());
        let v = vn - vd;
        if v >= prec {
            return Ok(Self::zero(p, prec));
        }
        let modulus = mod_pow_p(p, prec - v);
        let inv = inverse_mod(&ud, &modulus).expect("cofactor is a unit");
        Ok(PadicNumber {
            p,
            val: Some(v),
            unit: (un * inv).mod_floor(&modulus),
            prec,
        })
    }

    pub fn from_ratio(p: Prime, num: i64, den: i64, prec: i64) -> Result<Self, PadicError> {
        if den == 0 {
            return Err(PadicError::ZeroDenominator);
        }
        Self::from_rational(
            p,
            &BigRational::new(BigInt::from(num), BigInt::from(den)),
            prec,
        )
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    /// `None` when the value is zero at its precision.
    pub fn valuation(&self) -> Option<i64> {
        self.val
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn unit(&self) -> &BigInt {
        &self.unit
    }

    pub fn is_zero(&self) -> bool {
        self.val.is_none()
    }

    /// `M - v`, or 0 for the zero form.
    pub fn relative_precision(&self) -> i64 {
        match self.val {
            Some(v) => self.prec - v,
            None => 0,
        }
    }

    /// Drop precision to `min(self.prec, prec)`.
    pub fn with_precision(&self, prec: i64) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        match self.val {
            None => Self::zero(self.p, prec),
            Some(v) => Self::normalize(self.p, &self.unit, v, prec),
        }
    }

    /// A representative in `Z` of a value with `v >= 0`, reduced mod `p^prec`.
    pub fn to_integer(&self) -> Option<BigInt> {
        match self.val {
            None => Some(BigInt::zero()),
            Some(v) if v >= 0 => {
                let n = &self.unit * mod_pow_p(self.p, v);
                if self.prec >= 0 {
                    Some(n.mod_floor(&mod_pow_p(self.p, self.prec)))
                } else {
                    Some(n)
                }
            }
            Some(_) => None,
        }
    }

    /// The exact rational `u * p^v` represented by the stored digits.
    pub fn to_rational(&self) -> BigRational {
        match self.val {
            None => BigRational::zero(),
            Some(v) if v >= 0 => BigRational::from_integer(&self.unit * mod_pow_p(self.p, v)),
            Some(v) => BigRational::new(self.unit.clone(), mod_pow_p(self.p, -v)),
        }
    }

    fn check_prime(&self, other: &Self) -> Result<(), PadicError> {
        if self.p != other.p {
            Err(PadicError::PrimeMismatch(self.p.get(), other.p.get()))
        } else {
            Ok(())
        }
    }

    pub fn arith(&self, other: &Self, op: ArithOp) -> Result<Self, PadicError> {
        match op {
            ArithOp::Add => self.add(other),
            ArithOp::Sub => self.sub(other),
            ArithOp::Mul => self.mul(other),
            ArithOp::Div => self.div(other),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, PadicError> {
        self.check_prime(other)?;
        let prec = self.prec.min(other.prec);
        match (self.val, other.val) {
            (None, None) => Ok(Self::zero(self.p, prec)),
            (None, Some(_)) => Ok(other.with_precision(prec)),
            (Some(_), None) => Ok(self.with_precision(prec)),
            (Some(vx), Some(vy)) => {
                let v0 = vx.min(vy);
                let n = &self.unit * mod_pow_p(self.p, vx - v0)
                    + &other.unit * mod_pow_p(self.p, vy - v0);
                Ok(Self::normalize(self.p, &n, v0, prec))
            }
        }
    }

    pub fn neg(&self) -> Self {
        match self.val {
            None => self.clone(),
            Some(v) => {
                let modulus = mod_pow_p(self.p, self.prec - v);
                PadicNumber {
                    p: self.p,
                    val: Some(v),
                    unit: (-&self.unit).mod_floor(&modulus),
                    prec: self.prec,
                }
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PadicError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PadicError> {
        self.check_prime(other)?;
        match (self.val, other.val) {
            (None, None) => Ok(Self::zero(self.p, self.prec + other.prec)),
            (None, Some(vy)) => Ok(Self::zero(self.p, self.prec + vy)),
            (Some(vx), None) => Ok(Self::zero(self.p, other.prec + vx)),
            (Some(vx), Some(vy)) => {
                let rel = (self.prec - vx).min(other.prec - vy);
                let v = vx + vy;
                let modulus = mod_pow_p(self.p, rel);
                Ok(PadicNumber {
                    p: self.p,
                    val: Some(v),
                    unit: (&self.unit * &other.unit).mod_floor(&modulus),
                    prec: v + rel,
                })
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self, PadicError> {
        self.check_prime(other)?;
        let vy = other.val.ok_or(PadicError::DivisionByZero(other.prec))?;
        match self.val {
            None => Ok(Self::zero(self.p, self.prec - vy)),
            Some(vx) => {
                let rel = (self.prec - vx).min(other.prec - vy);
                let v = vx - vy;
                let modulus = mod_pow_p(self.p, rel);
                let inv = inverse_mod(&other.unit, &modulus).expect("unit part is a unit");
                Ok(PadicNumber {
                    p: self.p,
                    val: Some(v),
                    unit: (&self.unit * inv).mod_floor(&modulus),
                    prec: v + rel,
                })
            }
        }
    }

    /// Multiply by an exact integer.
    pub fn scale(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::zero(self.p, self.prec);
        }
        let (vk, uk) = split_valuation(self.p, k);
        match self.val {
            None => Self::zero(self.p, self.prec + vk),
            Some(v) => {
                let rel = self.prec - v;
                let modulus = mod_pow_p(self.p, rel);
                PadicNumber {
                    p: self.p,
                    val: Some(v + vk),
                    unit: (&self.unit * uk).mod_floor(&modulus),
                    prec: self.prec + vk,
                }
            }
        }
    }

    /// Divide by a nonzero exact integer.
    pub fn div_integer(&self, k: &BigInt) -> Result<Self, PadicError> {
        if k.is_zero() {
            return Err(PadicError::DivisionByZero(i64::MAX));
        }
        let (vk, uk) = split_valuation(self.p, k);
        Ok(match self.val {
            None => Self::zero(self.p, self.prec - vk),
            Some(v) => {
                let rel = self.prec - v;
                let modulus = mod_pow_p(self.p, rel);
                let inv = inverse_mod(&uk, &modulus).expect("cofactor is a unit");
                PadicNumber {
                    p: self.p,
                    val: Some(v - vk),
                    unit: (&self.unit * inv).mod_floor(&modulus),
                    prec: self.prec - vk,
                }
            }
        })
    }

    pub fn pow(&self, e: u32) -> Self {
        if e == 0 {
            return Self::one(self.p, self.relative_precision().max(self.prec).max(1));
        }
        let mut acc = self.clone();
        for _ in 1..e {
            acc = acc.mul(self).expect("same prime");
        }
        acc
    }

    /// Valuation of `self - other` capped at the common precision.
    pub fn difference_valuation(&self, other: &Self) -> Result<i64, PadicError> {
        let d = self.sub(other)?;
        Ok(d.val.unwrap_or(d.prec))
    }

    /// True iff the two values are congruent modulo the smaller precision.
    pub fn agrees_with(&self, other: &Self) -> Result<bool, PadicError> {
        Ok(self.sub(other)?.is_zero())
    }
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.val {
            None => write!(f, "0 + O({}^{})", self.p, self.prec),
            Some(v) => write!(
                f,
                "{} * {}^{} + O({}^{})",
                self.unit, self.p, v, self.p, self.prec
            ),
        }
    }
}

/// Teichmuller representative of `a` modulo `p^prec`.
pub fn teichmuller(p: Prime, a: &BigInt, prec: i64) -> Result<PadicNumber, PadicError> {
    if prec < 1 {
        return Err(PadicError::BadPrecision(prec));
    }
    if a.mod_floor(&p.big()).is_zero() {
        return Err(PadicError::NonUnitResidue(a.clone()));
    }
    let modulus = mod_pow_p(p, prec);
    let pb = p.big();
    let mut x = a.mod_floor(&modulus);
    for _ in 0..=prec {
        let next = x.modpow(&pb, &modulus);
        if next == x {
            break;
        }
        x = next;
    }
    Ok(PadicNumber::from_integer(p, &x, prec))
}

/// The principal unit `<x> = x p^(-v) omega(x p^(-v))^(-1)`.
pub fn one_unit_part(x: &PadicNumber) -> Result<PadicNumber, PadicError> {
    let v = x.valuation().ok_or(PadicError::LogOfZero)?;
    let rel = x.prec - v;
    let u = PadicNumber::from_integer(x.p, &x.unit, rel);
    let w = teichmuller(x.p, &x.unit, rel)?;
    u.div(&w)
}

/// Iwasawa logarithm: `log_p(p) = 0`, roots of unity map to 0.
///
/// The result is known modulo `p^N` where `N` is the relative precision of
/// the input.
pub fn padic_log(x: &PadicNumber) -> Result<PadicNumber, PadicError> {
    let principal = one_unit_part(x)?;
    let p = x.p;
    let rel = principal.precision();
    let t = principal.sub(&PadicNumber::one(p, rel))?;
    let vt = match t.valuation() {
        None => return Ok(PadicNumber::zero(p, rel)),
        Some(v) => v,
    };
    debug_assert!(vt >= 1);
    let mut sum = PadicNumber::zero(p, rel);
    let mut t_pow = t.clone();
    let mut n: u64 = 1;
    loop {
        if (n as i64) * vt - p.ilog(n) as i64 >= rel {
            break;
        }
        if n > 1 {
            t_pow = t_pow.mul(&t)?;
        }
        let term = t_pow.div_integer(&BigInt::from(n))?;
        sum = if n % 2 == 1 {
            sum.add(&term)?
        } else {
            sum.sub(&term)?
        };
        n += 1;
    }
    Ok(sum.with_precision(rel))
}

/// `E_p(1) = 1 - 1/p`, known to precision `prec`.
pub fn euler_factor_at_one(p: Prime, prec: i64) -> PadicNumber {
    PadicNumber::from_rational(
        p,
        &BigRational::new(p.big() - BigInt::one(), p.big()),
        prec,
    )
    .expect("nonzero denominator")
}

/// `log_p(1 + p)`, the scalar attached to the fixed generator of `Gamma`.
pub fn log_gamma(p: Prime, prec: i64) -> PadicNumber {
    let one_plus_p = PadicNumber::from_integer(p, &(p.big() + 1), prec);
    padic_log(&one_plus_p).expect("1 + p is a unit")
}
