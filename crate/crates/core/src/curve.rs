//! Elliptic curves over Q with multiplicative reduction at p.
//!
//! Covers reduction data, the Tate parameter (found by Newton iteration on
//! the inverted j-series), the Tate series, and the L-invariant.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::padic::{self, PadicError, PadicNumber, Prime};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("discriminant vanishes: the cubic is singular")]
    Singular,
    #[error("model is not minimal at {0}")]
    NotMinimal(u64),
    #[error("{0} is not a prime greater than 3")]
    BadPrime(u64),
    #[error("reduction at {0} is not multiplicative")]
    NotMultiplicative(u64),
    #[error("ord_p(q) must be positive")]
    NonPositiveOrder,
    #[error("log_p(q_E) is indistinguishable from zero up to working precision {0}")]
    LogVanishes(i64),
    #[error("j-series round trip failed at precision {0}")]
    RoundTrip(i64),
    #[error("precision must be positive, got {0}")]
    BadPrecision(i64),
    #[error("cannot factor {0}")]
    Factorization(BigInt),
    #[error("alpha must be nonzero")]
    ZeroAlpha,
    #[error("height must be nonzero")]
    ZeroHeight,
    #[error(transparent)]
    Padic(#[from] PadicError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EllipticCurveQ {
    a: [BigInt; 5],
    b2: BigInt,
    b4: BigInt,
    b6: BigInt,
    b8: BigInt,
    c4: BigInt,
    c6: BigInt,
    disc: BigInt,
}

impl EllipticCurveQ {
    /// Accepts `[a1, a2, a3, a4, a6]` of a globally minimal model.
    pub fn new(a: [BigInt; 5]) -> Result<Self, CurveError> {
        let e = Self::unchecked(a)?;
        for (ell, _) in factor(&e.disc)? {
            if !e.is_minimal_at(ell) {
                return Err(CurveError::NotMinimal(ell));
            }
        }
        Ok(e)
    }

    pub fn from_i64(a: [i64; 5]) -> Result<Self, CurveError> {
        Self::new(a.map(BigInt::from))
    }

    /// Builds the invariants without the minimality check.
    pub fn unchecked(a: [BigInt; 5]) -> Result<Self, CurveError> {
        let [a1, a2, a3, a4, a6] = &a;
        let b2 = a1 * a1 + 4i64 * a2;
        let b4 = 2i64 * a4 + a1 * a3;
        let b6 = a3 * a3 + 4i64 * a6;
        let b8 = a1 * a1 * a6 + 4i64 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        let c4 = &b2 * &b2 - 24i64 * &b4;
        let c6 = -(&b2 * &b2 * &b2) + 36i64 * &b2 * &b4 - 216i64 * &b6;
        let disc = -(&b2 * &b2 * &b8) - 8i64 * &b4 * &b4 * &b4 - 27i64 * &b6 * &b6
            + 9i64 * &b2 * &b4 * &b6;
        if disc.is_zero() {
            return Err(CurveError::Singular);
        }
        debug_assert_eq!(&c4 * &c4 * &c4 - &c6 * &c6, 1728i64 * &disc);
        Ok(EllipticCurveQ {
            a,
            b2,
            b4,
            b6,
            b8,
            c4,
            c6,
            disc,
        })
    }

    pub fn coefficients(&self) -> &[BigInt; 5] {
        &self.a
    }

    pub fn b_invariants(&self) -> [&BigInt; 4] {
        [&self.b2, &self.b4, &self.b6, &self.b8]
    }

    pub fn c4(&self) -> &BigInt {
        &self.c4
    }

    pub fn c6(&self) -> &BigInt {
        &self.c6
    }

    pub fn discriminant(&self) -> &BigInt {
        &self.disc
    }

    pub fn j_invariant(&self) -> BigRational {
        BigRational::new(&self.c4 * &self.c4 * &self.c4, self.disc.clone())
    }

    /// The model obtained by `x = x' + r`, `y = y' + s x' + t`.
    pub fn translate(&self, r: &BigInt, s: &BigInt, t: &BigInt) -> Result<Self, CurveError> {
        let [a1, a2, a3, a4, a6] = &self.a;
        let n1 = a1 + 2i64 * s;
        let n2 = a2 - s * a1 + 3i64 * r - s * s;
        let n3 = a3 + r * a1 + 2i64 * t;
        let n4 = a4 - s * a3 + 2i64 * r * a2 - (t + r * s) * a1 + 3i64 * r * r - 2i64 * s * t;
        let n6 = a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1;
        Self::unchecked([n1, n2, n3, n4, n6])
    }

    /// Whether no `u = ell` change of coordinates gives an integral model.
    pub fn is_minimal_at(&self, ell: u64) -> bool {
        let l = BigInt::from(ell);
        let vd = valuation(&self.disc, &l);
        if vd < 12 {
            return true;
        }
        if ell >= 5 {
            return !self.c4.is_zero() && valuation(&self.c4, &l) < 4;
        }
        let [a1, a2, a3, a4, a6] = &self.a;
        let (u, u2, u3, u4, u6) = (
            l.clone(),
            l.pow(2),
            l.pow(3),
            l.pow(4),
            l.pow(6),
        );
        let range = |m: &BigInt| {
            let top = m.to_i64().expect("small modulus");
            (0..top).map(BigInt::from)
        };
        for r in range(&u2) {
            for s in range(&u) {
                if !(a1 + 2i64 * &s).is_multiple_of(&u) {
                    continue;
                }
                if !(a2 - &s * a1 + 3i64 * &r - &s * &s).is_multiple_of(&u2) {
                    continue;
                }
                for t in range(&u3) {
                    let n3 = a3 + &r * a1 + 2i64 * &t;
                    let n4 = a4 - &s * a3 + 2i64 * &r * a2 - (&t + &r * &s) * a1 + 3i64 * &r * &r
                        - 2i64 * &s * &t;
                    let n6 = a6 + &r * a4 + &r * &r * a2 + &r * &r * &r - &t * a3 - &t * &t
                        - &r * &t * a1;
                    if n3.is_multiple_of(&u3) && n4.is_multiple_of(&u4) && n6.is_multiple_of(&u6)
                    {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// `ell + 1 - #E(F_ell)` counting every point of the reduced cubic,
    /// which gives `+1`, `-1`, `0` at split, nonsplit and additive primes.
    pub fn trace_of_frobenius(&self, ell: u64) -> i64 {
        let l = BigInt::from(ell);
        let red = |x: &BigInt| x.mod_floor(&l).to_u64().expect("reduced");
        if ell == 2 {
            let a = self.a.clone().map(|x| red(&x));
            let mut count = 1;
            for x in 0..2u64 {
                for y in 0..2u64 {
                    let lhs = y * y + a[0] * x * y + a[2] * y;
                    let rhs = x * x * x + a[1] * x * x + a[3] * x + a[4];
                    if (lhs + rhs) % 2 == 0 {
                        count += 1;
                    }
                }
            }
            return ell as i64 + 1 - count;
        }
        // (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
        let (b2, b4, b6) = (red(&self.b2), red(&self.b4), red(&self.b6));
        let mut sum: i64 = 0;
        for x in 0..ell {
            let m = |a: u64, b: u64| ((a as u128 * b as u128) % ell as u128) as u64;
            let x2 = m(x, x);
            let f = (m(4, m(x2, x)) + m(b2, x2) + m(2, m(b4, x)) + b6) % ell;
            sum += legendre(f, ell);
        }
        -sum
    }

    /// The a_ell attached to any prime, good or bad.
    pub fn a_ell(&self, ell: u64) -> i64 {
        self.trace_of_frobenius(ell)
    }

    /// Radical of the discriminant (the conductor of a semistable curve).
    pub fn discriminant_radical(&self) -> Result<u64, CurveError> {
        let mut n = 1u64;
        for (ell, _) in factor(&self.disc)? {
            n = n
                .checked_mul(ell)
                .ok_or_else(|| CurveError::Factorization(self.disc.clone()))?;
        }
        Ok(n)
    }

    /// True iff no prime of bad reduction is additive.
    pub fn is_semistable(&self) -> Result<bool, CurveError> {
        for (ell, _) in factor(&self.disc)? {
            if !self.c4.is_zero() && !self.c4.is_multiple_of(&BigInt::from(ell)) {
                continue;
            }
            return Ok(false);
        }
        Ok(true)
    }
}

fn valuation(n: &BigInt, l: &BigInt) -> i64 {
    if n.is_zero() {
        return i64::MAX;
    }
    let mut v = 0;
    let mut m = n.clone();
    while m.is_multiple_of(l) {
        m /= l;
        v += 1;
    }
    v
}

/// Legendre symbol `(a / ell)` for an odd prime `ell`.
pub fn legendre(a: u64, ell: u64) -> i64 {
    let a = a % ell;
    if a == 0 {
        return 0;
    }
    let r = BigInt::from(a).modpow(&BigInt::from((ell - 1) / 2), &BigInt::from(ell));
    if r.is_one() {
        1
    } else {
        -1
    }
}

/// Prime factorization of a nonzero integer whose absolute value fits in
/// 64 bits after removing primes below `10^5`.
pub fn factor(n: &BigInt) -> Result<Vec<(u64, u32)>, CurveError> {
    let mut m = n.abs();
    let mut out = Vec::new();
    let mut d = 2u64;
    while d < 100_000 {
        let db = BigInt::from(d);
        if &db * &db > m {
            break;
        }
        let mut e = 0;
        while m.is_multiple_of(&db) {
            m /= &db;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m.is_one() {
        return Ok(out);
    }
    let rest = m
        .to_u64()
        .ok_or_else(|| CurveError::Factorization(n.clone()))?;
    let mut stack = vec![rest];
    let mut big = Vec::new();
    while let Some(x) = stack.pop() {
        if x == 1 {
            continue;
        }
        if padic::is_prime_u64(x) {
            big.push(x);
            continue;
        }
        let f = pollard_rho(x).ok_or_else(|| CurveError::Factorization(n.clone()))?;
        stack.push(f);
        stack.push(x / f);
    }
    big.sort_unstable();
    for q in big {
        match out.last_mut() {
            Some((last, e)) if *last == q => *e += 1,
            _ => out.push((q, 1)),
        }
    }
    out.sort_unstable();
    Ok(out)
}

fn pollard_rho(n: u64) -> Option<u64> {
    if n.is_multiple_of(2) {
        return Some(2);
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    for c in 1..50u64 {
        let f = |x: u64| (mulmod(x, x) + c) % n;
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        while g == 1 {
            x = f(x);
            y = f(f(y));
            g = x.abs_diff(y).gcd(&n);
        }
        if g != n {
            return Some(g);
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionKind {
    Good,
    SplitMultiplicative,
    NonsplitMultiplicative,
    Additive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionData {
    pub p: Prime,
    pub kind: ReductionKind,
    pub v_disc: i64,
    /// `None` when `c4 = 0`.
    pub v_c4: Option<i64>,
    /// `None` when `j = 0`.
    pub v_j: Option<i64>,
    pub a_p: i64,
}

impl ReductionData {
    pub fn is_multiplicative(&self) -> bool {
        matches!(
            self.kind,
            ReductionKind::SplitMultiplicative | ReductionKind::NonsplitMultiplicative
        )
    }
}

pub fn reduction_type(e: &EllipticCurveQ, p: u64) -> Result<ReductionData, CurveError> {
    let prime = Prime::new(p).map_err(|_| CurveError::BadPrime(p))?;
    if !e.is_minimal_at(p) {
        return Err(CurveError::NotMinimal(p));
    }
    let pb = prime.big();
    let v_disc = valuation(&e.disc, &pb);
    let v_c4 = if e.c4.is_zero() {
        None
    } else {
        Some(valuation(&e.c4, &pb))
    };
    let v_j = v_c4.map(|v| 3i64 * v - v_disc);
    let kind = if v_disc == 0 {
        ReductionKind::Good
    } else if v_c4 == Some(0) {
        let minus_c6 = (-&e.c6).mod_floor(&pb).to_u64().expect("reduced");
        if legendre(minus_c6, p) == 1 {
            ReductionKind::SplitMultiplicative
        } else {
            ReductionKind::NonsplitMultiplicative
        }
    } else {
        ReductionKind::Additive
    };
    let a_p = e.a_ell(p);
    debug_assert!(match kind {
        ReductionKind::SplitMultiplicative => a_p == 1,
        ReductionKind::NonsplitMultiplicative => a_p == -1,
        ReductionKind::Additive => a_p == 0,
        ReductionKind::Good => true,
    });
    Ok(ReductionData {
        p: prime,
        kind,
        v_disc,
        v_c4,
        v_j,
        a_p,
    })
}

fn series_mul(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
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

/// Inverse of a power series with constant term 1.
fn series_inverse(a: &[BigInt], len: usize) -> Vec<BigInt> {
    debug_assert!(a[0].is_one());
    let mut inv = vec![BigInt::zero(); len];
    inv[0] = BigInt::one();
    for n in 1..len {
        let mut s = BigInt::zero();
        for k in 1..=n.min(a.len() - 1) {
            s += &a[k] * &inv[n - k];
        }
        inv[n] = -s;
    }
    inv
}

pub fn divisor_sum(n: u64, k: u32) -> BigInt {
    let mut s = BigInt::zero();
    for d in 1..=n {
        if n.is_multiple_of(d) {
            s += num_traits::pow(BigInt::from(d), k as usize);
        }
    }
    s
}

/// Coefficients `g_0, g_1, ...` of `q j(q) = E_4(q)^3 / prod (1 - q^n)^24`.
pub fn j_series_coefficients(count: usize) -> Vec<BigInt> {
    let len = count.max(1);
    let mut e4 = vec![BigInt::zero(); len];
    e4[0] = BigInt::one();
    for (n, c) in e4.iter_mut().enumerate().skip(1) {
        *c = 240i64 * divisor_sum(n as u64, 3);
    }
    let e4_cubed = series_mul(&series_mul(&e4, &e4, len), &e4, len);
    let mut eta = vec![BigInt::zero(); len];
    eta[0] = BigInt::one();
    for n in 1..len {
        let mut factor = vec![BigInt::zero(); len];
        factor[0] = BigInt::one();
        factor[n] = -BigInt::one();
        eta = series_mul(&eta, &factor, len);
    }
    let mut eta24 = vec![BigInt::zero(); len];
    eta24[0] = BigInt::one();
    for _ in 0..24 {
        eta24 = series_mul(&eta24, &eta, len);
    }
    series_mul(&e4_cubed, &series_inverse(&eta24, len), len)
}

/// `sum_n c_n q^n` for `ord_p(q) > 0`, truncated once `n ord_p(q) >= prec`.
fn evaluate_series(
    coeffs: &[BigInt],
    q: &PadicNumber,
    prec: i64,
) -> Result<PadicNumber, CurveError> {
    let p = q.prime();
    let mut acc = PadicNumber::zero(p, prec);
    let mut power = PadicNumber::one(p, prec);
    for c in coeffs {
        acc = acc.add(&power.scale(c))?;
        power = power.mul(q)?;
        if power.is_zero() && power.precision() >= prec {
            break;
        }
    }
    Ok(acc.with_precision(prec))
}

fn terms_needed(prec: i64, ord: i64) -> usize {
    (prec.max(0) / ord.max(1)) as usize + 2
}

/// `j(q) = (q j(q)) / q`, evaluated to absolute precision `prec`.
pub fn j_of_q(q: &PadicNumber, prec: i64) -> Result<PadicNumber, CurveError> {
    let ord = q.valuation().filter(|&v| v > 0).ok_or(CurveError::NonPositiveOrder)?;
    let inner_prec = prec + 2i64 * ord;
    let g = j_series_coefficients(terms_needed(inner_prec, ord));
    let gq = evaluate_series(&g, q, inner_prec)?;
    Ok(gq.div(q)?.with_precision(prec))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TateData {
    pub p: Prime,
    pub q: PadicNumber,
    pub ord: i64,
    pub u: PadicNumber,
    pub log_q: PadicNumber,
    pub l_invariant: PadicNumber,
    /// Precision the Newton iteration ran at after any escalation.
    pub working_precision: i64,
    pub escalations: u32,
    pub split: bool,
}

const MAX_ESCALATIONS: u32 = 4;

/// Solve `j(q) = j(E)` for multiplicative reduction at `p`, with
/// `j(q) = j(E)` holding modulo `p^prec`.
pub fn tate_parameter(e: &EllipticCurveQ, p: u64, prec: i64) -> Result<TateData, CurveError> {
    if prec < 1 {
        return Err(CurveError::BadPrecision(prec));
    }
    let red = reduction_type(e, p)?;
    if !red.is_multiplicative() {
        return Err(CurveError::NotMultiplicative(p));
    }
    let prime = red.p;
    let ord = red.v_disc;
    let mut target = prec;
    let mut escalations = 0;
    loop {
        let working = target + 2i64 * ord;
        let q = solve_tate_q(e, prime, ord, working)?;
        let u = q.div(&PadicNumber::prime_power(prime, ord, working))?;
        let log_q = padic::padic_log(&q)?;
        if log_q.is_zero() {
            if escalations == MAX_ESCALATIONS {
                return Err(CurveError::LogVanishes(working));
            }
            escalations += 1;
            target *= 2;
            continue;
        }
        let j_e = PadicNumber::from_rational(prime, &e.j_invariant(), prec)?;
        if !j_of_q(&q, prec)?.agrees_with(&j_e)? {
            return Err(CurveError::RoundTrip(prec));
        }
        let l_invariant = log_q.div_integer(&BigInt::from(ord))?;
        return Ok(TateData {
            p: prime,
            q,
            ord,
            u,
            log_q,
            l_invariant,
            working_precision: working,
            escalations,
            split: red.kind == ReductionKind::SplitMultiplicative,
        });
    }
}

/// Newton iteration for `F(q) = q / (q j(q)) = Delta / c4^3` modulo `p^working`.
fn solve_tate_q(
    e: &EllipticCurveQ,
    p: Prime,
    ord: i64,
    working: i64,
) -> Result<PadicNumber, CurveError> {
    let modulus = p.pow(working as u32);
    let terms = terms_needed(working, ord);
    let g = j_series_coefficients(terms);
    let h = series_inverse(&g, terms);
    let c4_cubed = &e.c4 * &e.c4 * &e.c4;
    let inv = padic::inverse_mod(&c4_cubed, &modulus).expect("c4 is a unit at p");
    let t = (&e.disc * inv).mod_floor(&modulus);
    let eval = |q: &BigInt| {
        let mut f = BigInt::zero();
        let mut df = BigInt::zero();
        let mut power = BigInt::one();
        for (n, hn) in h.iter().enumerate() {
            df += BigInt::from(n + 1) * hn * &power;
            power = (&power * q).mod_floor(&modulus);
            f += hn * &power;
        }
        (f.mod_floor(&modulus), df.mod_floor(&modulus))
    };
    let mut q = t.clone();
    for _ in 0..(2i64 * working + 8) {
        let (f, df) = eval(&q);
        let step = ((f - &t) * padic::inverse_mod(&df, &modulus).expect("F' is a unit"))
            .mod_floor(&modulus);
        if step.is_zero() {
            break;
        }
        q = (q - step).mod_floor(&modulus);
    }
    Ok(PadicNumber::from_integer(p, &q, working))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TateSeries {
    pub a4: PadicNumber,
    pub a6: PadicNumber,
    /// `j` of `y^2 + xy = x^3 + a4 x + a6`.
    pub j_curve: PadicNumber,
    pub j_series: PadicNumber,
    pub agreement: i64,
}

/// Integer coefficients of `a_4(q) = -5 s_3(q)` and
/// `a_6(q) = -(5 s_3(q) + 7 s_5(q)) / 12`.
pub fn tate_series_coefficients(count: usize) -> (Vec<BigInt>, Vec<BigInt>) {
    let mut a4 = vec![BigInt::zero(); count];
    let mut a6 = vec![BigInt::zero(); count];
    for n in 1..count {
        let s3 = divisor_sum(n as u64, 3);
        let s5 = divisor_sum(n as u64, 5);
        a4[n] = -5i64 * &s3;
        let num = 5i64 * s3 + 7i64 * s5;
        debug_assert!(num.is_multiple_of(&BigInt::from(12)));
        a6[n] = -(num / BigInt::from(12));
    }
    (a4, a6)
}

pub fn tate_series(q: &PadicNumber, prec: i64) -> Result<TateSeries, CurveError> {
    let ord = q.valuation().filter(|&v| v > 0).ok_or(CurveError::NonPositiveOrder)?;
    let p = q.prime();
    let (c4s, c6s) = tate_series_coefficients(terms_needed(prec, ord));
    let a4 = evaluate_series(&c4s, q, prec)?;
    let a6 = evaluate_series(&c6s, q, prec)?;
    // b2 = 1, b4 = 2 a4, b6 = 4 a6, b8 = a6 - a4^2
    let int = |n: i64| BigInt::from(n);
    let c4 = PadicNumber::one(p, prec).sub(&a4.scale(&int(48)))?;
    let b8 = a6.sub(&a4.mul(&a4)?)?;
    let disc = b8
        .neg()
        .sub(&a4.pow(3).scale(&int(64)))?
        .sub(&a6.mul(&a6)?.scale(&int(432)))?
        .add(&a4.mul(&a6)?.scale(&int(72)))?;
    let j_curve = c4.pow(3).div(&disc)?;
    let j_series = j_of_q(q, j_curve.precision().max(1))?;
    let agreement = j_curve.difference_valuation(&j_series)?;
    Ok(TateSeries {
        a4,
        a6,
        j_curve,
        j_series,
        agreement,
    })
}

/// `(1 - 1/p)^{-1} log_p(u_E)`.
pub fn height_unit_class(e: &EllipticCurveQ, p: u64, prec: i64) -> Result<PadicNumber, CurveError> {
    let tate = tate_parameter(e, p, prec)?;
    if !tate.split {
        return Err(CurveError::NotMultiplicative(p));
    }
    height_from_tate(&tate)
}

pub fn height_from_tate(tate: &TateData) -> Result<PadicNumber, CurveError> {
    let log_u = padic::padic_log(&tate.u)?;
    let euler = padic::euler_factor_at_one(tate.p, log_u.precision());
    Ok(log_u.div(&euler)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaBk {
    pub value: PadicNumber,
    /// `h ord_p(q_E) - alpha^2 L`.
    pub regulator_defect: PadicNumber,
    pub regulator_vanishes: bool,
}

/// `ord_C0 (1/alpha - (alpha/h)(L / ord_p(q_E)))`.
pub fn lambda_bk(
    ord_c0: i64,
    alpha: &PadicNumber,
    h: &PadicNumber,
    tate: &TateData,
) -> Result<LambdaBk, CurveError> {
    if alpha.is_zero() {
        return Err(CurveError::ZeroAlpha);
    }
    if h.is_zero() {
        return Err(CurveError::ZeroHeight);
    }
    let p = tate.p;
    let ord = BigInt::from(tate.ord);
    let l_over_ord = tate.l_invariant.div_integer(&ord)?;
    let one = PadicNumber::one(p, alpha.precision().max(h.precision()));
    let first = one.div(alpha)?;
    let second = alpha.div(h)?.mul(&l_over_ord)?;
    let value = first.sub(&second)?.scale(&BigInt::from(ord_c0));
    let regulator_defect = h.scale(&ord).sub(&alpha.mul(alpha)?.mul(&tate.l_invariant)?)?;
    Ok(LambdaBk {
        value,
        regulator_vanishes: regulator_defect.is_zero(),
        regulator_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e11() -> EllipticCurveQ {
        EllipticCurveQ::from_i64([0, -1, 1, -10, -20]).unwrap()
    }

    #[test]
    fn invariants_of_11a() {
        let e = e11();
        assert_eq!(e.discriminant(), &BigInt::from(-161051));
        assert_eq!(
            e.j_invariant(),
            BigRational::new(BigInt::from(-122023936), BigInt::from(161051))
        );
    }

    #[test]
    fn reduction_11a() {
        let e = e11();
        let r = reduction_type(&e, 11).unwrap();
        assert_eq!(r.kind, ReductionKind::SplitMultiplicative);
        assert_eq!(r.v_disc, 5);
        let r7 = reduction_type(&e, 7).unwrap();
        assert_eq!(r7.kind, ReductionKind::Good);
        assert_eq!(r7.a_p, -2);
        assert!(reduction_type(&e, 3).is_err());
    }

    #[test]
    fn additive_when_c4_and_disc_share_p() {
        let e = EllipticCurveQ::from_i64([0, 0, 0, 5, 5]).unwrap();
        let r = reduction_type(&e, 5).unwrap();
        assert_eq!(r.kind, ReductionKind::Additive);
        assert_eq!(r.a_p, 0);
    }

    #[test]
    fn non_minimal_rejected() {
        let e = EllipticCurveQ::unchecked([0i64, 0, 0, -625, 0].map(BigInt::from)).unwrap();
        assert!(!e.is_minimal_at(5));
        assert!(EllipticCurveQ::from_i64([0, 0, 0, -625, 0]).is_err());
    }

    #[test]
    fn factor_small() {
        assert_eq!(factor(&BigInt::from(-161051)).unwrap(), vec![(11, 5)]);
        assert_eq!(factor(&BigInt::from(360)).unwrap(), vec![(2, 3), (3, 2), (5, 1)]);
        let big = BigInt::from(1_000_003u64) * BigInt::from(999_983u64);
        assert_eq!(factor(&big).unwrap(), vec![(999_983, 1), (1_000_003, 1)]);
    }

    #[test]
    fn j_series_leading_terms() {
        let g = j_series_coefficients(4);
        let expect = [1i64, 744, 196884, 21493760];
        for (a, b) in g.iter().zip(expect) {
            assert_eq!(a, &BigInt::from(b));
        }
    }

    #[test]
    fn tate_series_leading_terms() {
        let (a4, a6) = tate_series_coefficients(4);
        assert_eq!(a4[1..], [-5, -45, -140].map(BigInt::from));
        assert_eq!(a6[1..3], [-1, -23].map(BigInt::from));
    }

    #[test]
    fn tate_parameter_11a() {
        let t = tate_parameter(&e11(), 11, 8).unwrap();
        assert_eq!(t.ord, 5);
        assert_eq!(t.q.valuation(), Some(5));
        assert!(!t.log_q.is_zero());
        assert!(t.split);
    }

    #[test]
    fn lambda_vanishes_on_regulator_locus() {
        let t = tate_parameter(&e11(), 11, 8).unwrap();
        let alpha = PadicNumber::from_i64(t.p, 3, 8);
        let h = alpha
            .mul(&alpha)
            .unwrap()
            .mul(&t.l_invariant)
            .unwrap()
            .div_integer(&BigInt::from(t.ord))
            .unwrap();
        let l = lambda_bk(2, &alpha, &h, &t).unwrap();
        assert!(l.regulator_vanishes);
        assert!(l.value.is_zero());
        assert!(lambda_bk(2, &PadicNumber::zero(t.p, 8), &h, &t).is_err());
    }
}
