//! The coefficient ring `Z/p^M`.

use serde::{Deserialize, Serialize};

use crate::CohomError;

/// Largest modulus accepted, so that products of residues fit in a `u64`.
const MAX_MODULUS: u64 = 1 << 31;

/// `Z/p^M` for a prime `p`. Residues are stored as `u64` in `[0, p^M)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainRing {
    p: u64,
    exponent: u32,
    modulus: u64,
}

impl ChainRing {
    pub fn new(p: u64, exponent: u32) -> Result<Self, CohomError> {
        if p < 2 || !is_prime(p) {
            return Err(CohomError::InvalidRing(format!("{p} is not prime")));
        }
        if exponent == 0 {
            return Err(CohomError::InvalidRing("exponent must be positive".into()));
        }
        let modulus = p
            .checked_pow(exponent)
            .filter(|&q| q <= MAX_MODULUS)
            .ok_or_else(|| CohomError::InvalidRing(format!("{p}^{exponent} is too large")))?;
        Ok(Self { p, exponent, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// The exponent `M` in `p^M`.
    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn reduce_i64(&self, a: i64) -> u64 {
        a.rem_euclid(self.modulus as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.modulus
    }

    pub fn pow(&self, mut base: u64, mut e: u64) -> u64 {
        let mut acc = 1 % self.modulus;
        base %= self.modulus;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `p`-adic valuation of a residue; zero has valuation `M`.
    #[inline]
    pub fn valuation(&self, a: u64) -> u32 {
        if a == 0 {
            return self.exponent;
        }
        let mut v = 0;
        let mut a = a;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            v += 1;
        }
        v
    }

    pub fn is_unit(&self, a: u64) -> bool {
        !a.is_multiple_of(self.p)
    }

    /// Inverse of a unit.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if !self.is_unit(a) {
            return None;
        }
        let (mut old_r, mut r) = (a as i128, self.modulus as i128);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_s, s) = (s, old_s - q * s);
        }
        Some(old_s.rem_euclid(self.modulus as i128) as u64)
    }

    /// `p^e` as a residue (zero when `e >= M`).
    pub fn p_power(&self, e: u32) -> u64 {
        if e >= self.exponent {
            0
        } else {
            self.p.pow(e)
        }
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_valuation() {
        let r = ChainRing::new(3, 3).unwrap();
        for a in 0..27 {
            match r.inv(a) {
                Some(b) => assert_eq!(r.mul(a, b), 1),
                None => assert_eq!(a % 3, 0),
            }
        }
        assert_eq!(r.valuation(18), 2);
        assert_eq!(r.valuation(0), 3);
        assert!(ChainRing::new(4, 2).is_err());
    }
}
