//! Finite levels of the Iwasawa algebra `Z_p[[Gamma]]`
//!
//! Multiplication by `(gamma - 1)` and the canonical division used by the
//! derivative calculus are implemented here, together with expansion
//! modulo powers of the augmentation ideal.
//!
//! `Gamma_n = Z/p^n` with index `i` standing for `gamma^i`, where the
//! topological generator `gamma` satisfies `rho(gamma) = 1 + p`.
//! All coefficients live in `Z/p^M`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::padic::{self, PadicError, PadicNumber, Prime};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IwasawaError {
    #[error("coefficient array has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("tower is empty")]
    EmptyTower,
    #[error("tower levels {0} and {} are not compatible under projection", .0 + 1)]
    Incompatible(u32),
    #[error("tower level {index} has level {level}")]
    LevelOrder { index: usize, level: u32 },
    #[error("mismatched group rings (prime, level or modulus differ)")]
    RingMismatch,
    #[error("augmentation is nonzero (valuation {0:?})")]
    NonzeroAugmentation(Option<i64>),
    #[error("weight undefined at class {index} of level {level}")]
    WeightUndefined { level: u32, index: usize },
    #[error("order {order} exceeds what depth {depth} supports")]
    DepthExhausted { order: usize, depth: u32 },
    #[error("pairing tower fails the corestriction check at level {0}")]
    PairingIncompatible(u32),
    #[error("modulus exponent must be positive")]
    ZeroModulus,
    #[error(transparent)]
    Padic(#[from] PadicError),
}

/// Element of `Z/p^M [Gamma_n]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupRingElement {
    p: Prime,
    level: u32,
    modulus_exp: u32,
    coeffs: Vec<BigInt>,
}

impl GroupRingElement {
    pub fn new(
        p: Prime,
        level: u32,
        modulus_exp: u32,
        coeffs: Vec<BigInt>,
    ) -> Result<Self, IwasawaError> {
        if modulus_exp == 0 {
            return Err(IwasawaError::ZeroModulus);
        }
        let expected = group_order(p, level);
        if coeffs.len() != expected {
            return Err(IwasawaError::LengthMismatch {
                expected,
                got: coeffs.len(),
            });
        }
        let modulus = p.pow(modulus_exp);
        let coeffs = coeffs.into_iter().map(|c| c.mod_floor(&modulus)).collect();
        Ok(GroupRingElement {
            p,
            level,
            modulus_exp,
            coeffs,
        })
    }

    pub fn zero(p: Prime, level: u32, modulus_exp: u32) -> Self {
        GroupRingElement {
            p,
            level,
            modulus_exp,
            coeffs: vec![BigInt::zero(); group_order(p, level)],
        }
    }

    /// The group element `gamma^index`.
    pub fn dirac(p: Prime, level: u32, modulus_exp: u32, index: usize) -> Self {
        let mut e = Self::zero(p, level, modulus_exp);
        let n = e.coeffs.len();
        e.coeffs[index % n] = BigInt::one();
        e
    }

    /// `sum_k c_k (gamma - 1)^k`.
    pub fn from_j_coefficients(p: Prime, level: u32, modulus_exp: u32, c: &[BigInt]) -> Self {
        let mut acc = Self::zero(p, level, modulus_exp);
        let mut power = Self::dirac(p, level, modulus_exp, 0);
        for ck in c {
            acc = acc.add(&power.scale(ck)).expect("same ring");
            power = power.mul_gamma_minus_one();
        }
        acc
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn modulus_exp(&self) -> u32 {
        self.modulus_exp
    }

    pub fn modulus(&self) -> BigInt {
        self.p.pow(self.modulus_exp)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn augmentation(&self) -> BigInt {
        let s: BigInt = self.coeffs.iter().sum();
        s.mod_floor(&self.modulus())
    }

    /// Push forward along `Gamma_n -> Gamma_k`.
    pub fn project(&self, to_level: u32) -> Self {
        assert!(to_level <= self.level, "cannot project upwards");
        let order = group_order(self.p, to_level);
        let mut out = vec![BigInt::zero(); order];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i % order] += c;
        }
        let modulus = self.modulus();
        for c in out.iter_mut() {
            *c = c.mod_floor(&modulus);
        }
        GroupRingElement {
            p: self.p,
            level: to_level,
            modulus_exp: self.modulus_exp,
            coeffs: out,
        }
    }

    /// Restriction to a higher level: lift and multiply by the norm of the
    /// kernel of `Gamma_n -> Gamma_k`.
    pub fn inflate_by_norm(&self, to_level: u32) -> Self {
        assert!(to_level >= self.level);
        let order = group_order(self.p, to_level);
        let small = self.coeffs.len();
        let coeffs = (0..order).map(|j| self.coeffs[j % small].clone()).collect();
        GroupRingElement {
            p: self.p,
            level: to_level,
            modulus_exp: self.modulus_exp,
            coeffs,
        }
    }

    pub fn reduce_modulus(&self, modulus_exp: u32) -> Result<Self, IwasawaError> {
        Self::new(self.p, self.level, modulus_exp.min(self.modulus_exp), self.coeffs.clone())
    }

    fn same_ring(&self, other: &Self) -> Result<(), IwasawaError> {
        if self.p != other.p || self.level != other.level || self.modulus_exp != other.modulus_exp {
            Err(IwasawaError::RingMismatch)
        } else {
            Ok(())
        }
    }

    fn with_coeffs(&self, coeffs: Vec<BigInt>) -> Self {
        let modulus = self.modulus();
        GroupRingElement {
            p: self.p,
            level: self.level,
            modulus_exp: self.modulus_exp,
            coeffs: coeffs.into_iter().map(|c| c.mod_floor(&modulus)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, IwasawaError> {
        self.same_ring(other)?;
        Ok(self.with_coeffs(
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, IwasawaError> {
        self.same_ring(other)?;
        Ok(self.with_coeffs(
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        self.with_coeffs(self.coeffs.iter().map(|a| a * k).collect())
    }

    /// Convolution product; quadratic in the group order.
    pub fn mul(&self, other: &Self) -> Result<Self, IwasawaError> {
        self.same_ring(other)?;
        let n = self.order();
        let mut out = vec![BigInt::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[(i + j) % n] += a * b;
            }
        }
        Ok(self.with_coeffs(out))
    }

    /// `gamma^s * self`.
    pub fn shift(&self, s: usize) -> Self {
        let n = self.order();
        let mut out = vec![BigInt::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[(i + s) % n] = c.clone();
        }
        GroupRingElement {
            coeffs: out,
            ..self.clone()
        }
    }

    /// The involution `gamma -> gamma^{-1}`.
    pub fn invert(&self) -> Self {
        let n = self.order();
        let coeffs = (0..n).map(|i| self.coeffs[(n - i) % n].clone()).collect();
        GroupRingElement {
            coeffs,
            ..self.clone()
        }
    }

    pub fn mul_gamma_minus_one(&self) -> Self {
        let n = self.order();
        let out = (0..n)
            .map(|i| &self.coeffs[(i + n - 1) % n] - &self.coeffs[i])
            .collect();
        self.with_coeffs(out)
    }

    /// The solution `y` of `(gamma - 1) y = self` whose coefficient at the
    /// identity vanishes. Solutions differ by multiples of the norm element,
    /// whose identity coefficient is 1, so this picks exactly one.
    pub fn canonical_division(&self) -> Result<Self, IwasawaError> {
        let aug = self.augmentation();
        if !aug.is_zero() {
            let v = padic::split_valuation(self.p, &aug).0;
            return Err(IwasawaError::NonzeroAugmentation(Some(v)));
        }
        let n = self.order();
        let mut y = vec![BigInt::zero(); n];
        for i in 1..n {
            y[i] = &y[i - 1] - &self.coeffs[i];
        }
        Ok(self.with_coeffs(y))
    }

    /// Re-express in the basis of a different generator `gamma' = gamma^k`
    /// (`k` a unit): the returned coefficient `j` is the coefficient of
    /// `gamma'^j`.
    fn to_generator_basis(&self, k: u64) -> Self {
        let n = self.order() as u64;
        let coeffs = (0..n)
            .map(|j| self.coeffs[((j as u128 * k as u128) % n as u128) as usize].clone())
            .collect();
        GroupRingElement {
            coeffs,
            ..self.clone()
        }
    }

    fn from_generator_basis(&self, k: u64) -> Self {
        let n = self.order() as u64;
        let mut out = vec![BigInt::zero(); n as usize];
        for (j, c) in self.coeffs.iter().enumerate() {
            out[((j as u128 * k as u128) % n as u128) as usize] = c.clone();
        }
        GroupRingElement {
            coeffs: out,
            ..self.clone()
        }
    }
}

pub fn group_order(p: Prime, level: u32) -> usize {
    (p.get() as usize).pow(level)
}

/// Compatible family of group-ring elements at levels `0..=n_max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureTower {
    p: Prime,
    modulus_exp: u32,
    levels: Vec<GroupRingElement>,
}

impl MeasureTower {
    pub fn new(levels: Vec<GroupRingElement>) -> Result<Self, IwasawaError> {
        let first = levels.first().ok_or(IwasawaError::EmptyTower)?;
        let (p, modulus_exp) = (first.p, first.modulus_exp);
        for (index, e) in levels.iter().enumerate() {
            if e.level as usize != index {
                return Err(IwasawaError::LevelOrder {
                    index,
                    level: e.level,
                });
            }
            if e.p != p || e.modulus_exp != modulus_exp {
                return Err(IwasawaError::RingMismatch);
            }
        }
        let tower = MeasureTower {
            p,
            modulus_exp,
            levels,
        };
        tower.check_compatible()?;
        Ok(tower)
    }

    /// The tower generated by projecting `top` to every lower level.
    pub fn from_top(top: GroupRingElement) -> Self {
        let n = top.level;
        let mut levels: Vec<GroupRingElement> = (0..n).map(|k| top.project(k)).collect();
        let (p, modulus_exp) = (top.p, top.modulus_exp);
        levels.push(top);
        MeasureTower {
            p,
            modulus_exp,
            levels,
        }
    }

    pub fn check_compatible(&self) -> Result<(), IwasawaError> {
        for w in self.levels.windows(2) {
            if w[1].project(w[0].level) != w[0] {
                return Err(IwasawaError::Incompatible(w[0].level));
            }
        }
        Ok(())
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn modulus_exp(&self) -> u32 {
        self.modulus_exp
    }

    pub fn n_max(&self) -> u32 {
        (self.levels.len() - 1) as u32
    }

    pub fn level(&self, n: u32) -> &GroupRingElement {
        &self.levels[n as usize]
    }

    pub fn levels(&self) -> &[GroupRingElement] {
        &self.levels
    }

    pub fn top(&self) -> &GroupRingElement {
        self.levels.last().expect("nonempty")
    }

    pub fn augmentation(&self) -> BigInt {
        self.levels[0].coeffs[0].clone()
    }

    pub fn reduce_modulus(&self, modulus_exp: u32) -> Result<Self, IwasawaError> {
        let top = self.top().reduce_modulus(modulus_exp)?;
        Ok(Self::from_top(top))
    }

    pub fn add(&self, other: &Self) -> Result<Self, IwasawaError> {
        if self.n_max() != other.n_max() {
            return Err(IwasawaError::RingMismatch);
        }
        Ok(Self::from_top(self.top().add(other.top())?))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, IwasawaError> {
        if self.n_max() != other.n_max() {
            return Err(IwasawaError::RingMismatch);
        }
        Ok(Self::from_top(self.top().sub(other.top())?))
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::from_top(self.top().scale(k))
    }

    pub fn mul_gamma_minus_one(&self) -> Self {
        Self::from_top(self.top().mul_gamma_minus_one())
    }
}

/// Integer representative of `log_p(1 + p)` modulo `p^M`.
pub fn log_gamma_residue(p: Prime, modulus_exp: u32) -> BigInt {
    padic::log_gamma(p, modulus_exp as i64)
        .to_integer()
        .expect("log_p(1+p) has positive valuation")
}

fn scaled_division(
    m: &MeasureTower,
    scalar: &BigInt,
) -> Result<MeasureTower, IwasawaError> {
    let aug = m.augmentation();
    if !aug.is_zero() {
        return Err(IwasawaError::NonzeroAugmentation(Some(
            padic::split_valuation(m.p, &aug).0,
        )));
    }
    let y = m.top().scale(scalar).canonical_division()?;
    Ok(MeasureTower::from_top(y))
}

/// Solve `((gamma - 1) / log_p(1 + p)) m' = m`.
///
/// The top level is solved with the canonical normalization and projected
/// down, so `(gamma - 1) m' = log_p(1+p) m` holds exactly at every level.
/// The level-`k` component is determined by `m` only modulo
/// `p^(n_max - k)` times the level-`k` norm element: one level of depth is
/// lost.
pub fn divide_gamma_minus_1(m: &MeasureTower) -> Result<MeasureTower, IwasawaError> {
    scaled_division(m, &log_gamma_residue(m.p, m.modulus_exp))
}

/// Like [`divide_gamma_minus_1`], but when the augmentation is only
/// divisible by `p^e` with `e < M`, first reduce the modulus to `p^e`.
pub fn divide_gamma_minus_1_at_precision(
    m: &MeasureTower,
) -> Result<MeasureTower, IwasawaError> {
    let aug = m.augmentation();
    if aug.is_zero() {
        return divide_gamma_minus_1(m);
    }
    let e = padic::split_valuation(m.p, &aug).0 as u32;
    if e == 0 {
        return Err(IwasawaError::NonzeroAugmentation(Some(0)));
    }
    divide_gamma_minus_1(&m.reduce_modulus(e)?)
}

/// Division with respect to the generator `gamma^k` (`k` a unit mod p),
/// normalized by `log_p(rho(gamma^k)) = k log_p(1 + p)`. The result is
/// expressed back in the `gamma` basis.
pub fn divide_by_generator_power(
    m: &MeasureTower,
    k: u64,
) -> Result<MeasureTower, IwasawaError> {
    let aug = m.augmentation();
    if !aug.is_zero() {
        return Err(IwasawaError::NonzeroAugmentation(Some(
            padic::split_valuation(m.p, &aug).0,
        )));
    }
    let scalar = log_gamma_residue(m.p, m.modulus_exp) * BigInt::from(k);
    let rebased = m.top().to_generator_basis(k);
    let y = rebased.scale(&scalar).canonical_division()?;
    Ok(MeasureTower::from_top(y.from_generator_basis(k)))
}

/// Coefficients of `m` modulo `J^k` in the basis `(gamma - 1)^i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JExpansion {
    pub order: usize,
    pub coeffs: Vec<PadicNumber>,
}

impl JExpansion {
    /// Number of leading coefficients that vanish at their precision.
    pub fn vanishing_prefix(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }
}

/// Precision of the `i`-th coefficient of the expansion at level `n`.
///
/// At level `n` the polynomial model is only defined modulo
/// `(1+T)^(p^n) - 1`, whose `T^j` coefficient has valuation
/// `n - v_p(j)`; this bounds what the `T^i` coefficient can carry.
pub fn expansion_precision(p: Prime, modulus_exp: u32, level: u32, i: usize) -> i64 {
    if i == 0 {
        return modulus_exp as i64;
    }
    (modulus_exp as i64).min(level as i64 - p.ilog(i as u64) as i64)
}

pub fn j_expand(m: &MeasureTower, order: usize) -> Result<JExpansion, IwasawaError> {
    let n = m.n_max();
    let p = m.p;
    if order >= 1 && expansion_precision(p, m.modulus_exp, n, order - 1) < 1 {
        return Err(IwasawaError::DepthExhausted { order, depth: n });
    }
    let mut coeffs = Vec::with_capacity(order);
    let mut cur = m.top().clone();
    for i in 0..order {
        let ci = cur.augmentation();
        let prec = expansion_precision(p, m.modulus_exp, n, i);
        coeffs.push(PadicNumber::from_integer(p, &ci, prec));
        if i + 1 < order {
            let lowered = cur.sub(&GroupRingElement::dirac(p, n, m.modulus_exp, 0).scale(&ci))?;
            cur = lowered.canonical_division()?;
        }
    }
    Ok(JExpansion { order, coeffs })
}

/// Result of integrating a weight against a tower.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Integral {
    pub value: PadicNumber,
    pub level_values: Vec<PadicNumber>,
    /// Valuation of the difference between the last two level sums.
    pub stabilization: Option<i64>,
}

impl Integral {
    pub fn achieved_precision(&self) -> i64 {
        match self.stabilization {
            Some(s) => s.min(self.value.precision()),
            None => self.value.precision(),
        }
    }
}

/// `sum_tau weight(tau) m_n(tau)` at every level.
///
/// `weight(n, i)` is the value at the class `gamma^i` of `Gamma_n`.
pub fn integrate<W>(m: &MeasureTower, weight: W) -> Result<Integral, IwasawaError>
where
    W: Fn(u32, usize) -> Option<PadicNumber>,
{
    let p = m.p;
    let prec = m.modulus_exp as i64;
    let mut level_values = Vec::with_capacity(m.levels.len());
    for e in &m.levels {
        let mut sum = PadicNumber::zero(p, prec);
        for (i, c) in e.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let w = weight(e.level, i).ok_or(IwasawaError::WeightUndefined {
                level: e.level,
                index: i,
            })?;
            let mass = PadicNumber::from_integer(p, c, prec);
            sum = sum.add(&w.mul(&mass)?)?;
        }
        level_values.push(sum);
    }
    let value = level_values.last().expect("nonempty").clone();
    let stabilization = if level_values.len() >= 2 {
        let prev = &level_values[level_values.len() - 2];
        Some(value.difference_valuation(prev)?)
    } else {
        None
    };
    Ok(Integral {
        value,
        level_values,
        stabilization,
    })
}

/// The weight `(log_p rho)^r`: the class `gamma^i` maps to `(i log_p(1+p))^r`.
pub fn log_power_weight(p: Prime, r: u32, prec: i64) -> impl Fn(u32, usize) -> Option<PadicNumber> {
    let ell = padic::log_gamma(p, prec);
    move |_, i| Some(ell.scale(&BigInt::from(i)).pow(r))
}

/// The weight `rho^x` for `x` in `Z_p`: the class `gamma^i` maps to
/// `(1+p)^(i x)`. Returns `None` when `x` is not integral.
pub fn cyclotomic_power_weight(
    x: &PadicNumber,
    cap: i64,
) -> Option<impl Fn(u32, usize) -> Option<PadicNumber>> {
    let p = x.prime();
    if let Some(v) = x.valuation() {
        if v < 0 {
            return None;
        }
    }
    let x_prec = x.precision().max(0);
    let out_prec = (x_prec + 1).min(cap);
    let x_rep = x.to_integer()?;
    let modulus = p.pow(out_prec.max(0) as u32);
    let base = p.big() + BigInt::one();
    Some(move |_, i| {
        if out_prec <= 0 {
            return Some(PadicNumber::zero(p, 0));
        }
        let e = &x_rep * BigInt::from(i);
        let val = base.modpow(&e, &modulus);
        Some(PadicNumber::from_integer(p, &val, out_prec))
    })
}

/// A `Z/p^M`-valued bilinear pairing on each level.
pub trait PairingTower {
    fn pair(&self, level: u32, x: &GroupRingElement, y: &GroupRingElement) -> BigInt;
}

/// `<x, y>_n = sum_i x_i y_i`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CoefficientwisePairing;

impl PairingTower for CoefficientwisePairing {
    fn pair(&self, _level: u32, x: &GroupRingElement, y: &GroupRingElement) -> BigInt {
        let s: BigInt = x.coeffs.iter().zip(&y.coeffs).map(|(a, b)| a * b).sum();
        s.mod_floor(&x.modulus())
    }
}

/// Spot-check `<res x, y>_n = <x, cor y>_{n-1}` on Dirac elements.
pub fn check_corestriction<P: PairingTower + ?Sized>(
    pairing: &P,
    p: Prime,
    modulus_exp: u32,
    n_max: u32,
) -> Result<(), IwasawaError> {
    for n in 1..=n_max {
        let big = group_order(p, n);
        let small = group_order(p, n - 1);
        let samples: Vec<usize> = if big <= 64 {
            (0..big).collect()
        } else {
            (0..16).map(|k| (k * 7919 + 3) % big).collect()
        };
        for &j in &samples {
            for &i in samples.iter().filter(|&&i| i < small).take(8) {
                let x = GroupRingElement::dirac(p, n - 1, modulus_exp, i);
                let y = GroupRingElement::dirac(p, n, modulus_exp, j);
                let lhs = pairing.pair(n, &x.inflate_by_norm(n), &y);
                let rhs = pairing.pair(n - 1, &x, &y.project(n - 1));
                if lhs != rhs {
                    return Err(IwasawaError::PairingIncompatible(n));
                }
            }
        }
    }
    Ok(())
}

/// The tower `L_xi` with `L_xi(gamma^t) = <xi_n, gamma^t z_n>_n`.
pub fn pairing_tower<P: PairingTower + ?Sized>(
    xi: &MeasureTower,
    z: &MeasureTower,
    pairing: &P,
) -> Result<MeasureTower, IwasawaError> {
    if xi.n_max() != z.n_max() || xi.p != z.p || xi.modulus_exp != z.modulus_exp {
        return Err(IwasawaError::RingMismatch);
    }
    let mut levels = Vec::with_capacity(xi.levels.len());
    for (x, zn) in xi.levels.iter().zip(&z.levels) {
        let coeffs = (0..x.order()).map(|t| pairing.pair(x.level, x, &zn.shift(t))).collect();
        levels.push(GroupRingElement::new(x.p, x.level, x.modulus_exp, coeffs)?);
    }
    MeasureTower::new(levels)
}

/// Finite-level values of `Der_rho(L_xi)(z_0)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivative {
    pub value: PadicNumber,
    pub level_values: Vec<PadicNumber>,
    pub stabilization: Option<i64>,
}

/// `sum_tau log_p(rho(tau^{-1})) <tau xi_n, z_n>` with `tau = gamma^s` and
/// `tau^{-1}` lifted as `gamma^{-s}`. The level-`n` value is reported
/// modulo `p^min(M, n)`: changing the lift moves it by a multiple of
/// `p^(n+1)` and the comparison with the level-0 pairing holds modulo
/// `p^n`.
pub fn der_rho<P: PairingTower + ?Sized>(
    xi: &MeasureTower,
    z: &MeasureTower,
    pairing: &P,
) -> Result<Derivative, IwasawaError> {
    let aug = xi.augmentation();
    if !aug.is_zero() {
        return Err(IwasawaError::NonzeroAugmentation(Some(
            padic::split_valuation(xi.p, &aug).0,
        )));
    }
    if xi.n_max() != z.n_max() {
        return Err(IwasawaError::RingMismatch);
    }
    check_corestriction(pairing, xi.p, xi.modulus_exp, xi.n_max())?;
    let p = xi.p;
    let m = xi.modulus_exp;
    let ell = log_gamma_residue(p, m);
    let mut level_values = Vec::new();
    for (x, zn) in xi.levels.iter().zip(&z.levels) {
        let mut sum = BigInt::zero();
        for s in 1..x.order() {
            let paired = pairing.pair(x.level, &x.shift(s), zn);
            sum -= BigInt::from(s) * paired;
        }
        let prec = (m as i64).min(x.level as i64);
        level_values.push(PadicNumber::from_integer(p, &(sum * &ell), prec));
    }
    let value = level_values.last().expect("nonempty").clone();
    let stabilization = if level_values.len() >= 2 {
        Some(value.difference_valuation(&level_values[level_values.len() - 2])?)
    } else {
        None
    };
    Ok(Derivative {
        value,
        level_values,
        stabilization,
    })
}

/// The other side of the derivative formula: `<xi'_0, z_0>_0` where
/// `xi = ((gamma - 1)/log_p(1+p)) xi'`, reported modulo `p^min(M, n_max)`.
pub fn der_rho_via_division<P: PairingTower + ?Sized>(
    xi: &MeasureTower,
    z: &MeasureTower,
    pairing: &P,
) -> Result<PadicNumber, IwasawaError> {
    let xi_prime = divide_gamma_minus_1(xi)?;
    let v = pairing.pair(0, xi_prime.level(0), z.level(0));
    let prec = (xi.modulus_exp as i64).min(xi.n_max() as i64);
    Ok(PadicNumber::from_integer(xi.p, &v, prec))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p5() -> Prime {
        Prime::new(5).unwrap()
    }

    #[test]
    fn dirac_expansion() {
        let t = MeasureTower::from_top(GroupRingElement::dirac(p5(), 3, 6, 0));
        let e = j_expand(&t, 3).unwrap();
        assert_eq!(e.coeffs[0].to_integer().unwrap(), BigInt::one());
        assert!(e.coeffs[1].is_zero() && e.coeffs[2].is_zero());
    }

    #[test]
    fn square_of_gamma_minus_one_expansion() {
        let top = GroupRingElement::dirac(p5(), 3, 6, 0)
            .mul_gamma_minus_one()
            .mul_gamma_minus_one();
        let e = j_expand(&MeasureTower::from_top(top), 3).unwrap();
        assert!(e.coeffs[0].is_zero() && e.coeffs[1].is_zero());
        assert_eq!(e.coeffs[2].to_integer().unwrap(), BigInt::one());
        assert_eq!(e.vanishing_prefix(), 2);
    }

    #[test]
    fn depth_limit() {
        let t = MeasureTower::from_top(GroupRingElement::dirac(p5(), 1, 6, 0));
        assert!(j_expand(&t, 5).is_ok());
        assert!(matches!(
            j_expand(&t, 6),
            Err(IwasawaError::DepthExhausted { .. })
        ));
    }

    #[test]
    fn division_inverts_multiplication() {
        let p = p5();
        let x = GroupRingElement::new(p, 2, 5, (0..25).map(|i| BigInt::from(i * i + 3)).collect())
            .unwrap();
        let m = MeasureTower::from_top(x.mul_gamma_minus_one());
        let y = divide_gamma_minus_1(&m).unwrap();
        let ell = log_gamma_residue(p, 5);
        for n in 0..=2 {
            assert_eq!(y.level(n).mul_gamma_minus_one(), m.level(n).scale(&ell));
        }
    }

    #[test]
    fn nonzero_augmentation_rejected() {
        let t = MeasureTower::from_top(GroupRingElement::dirac(p5(), 2, 4, 1));
        assert!(matches!(
            divide_gamma_minus_1(&t),
            Err(IwasawaError::NonzeroAugmentation(Some(0)))
        ));
    }

    #[test]
    fn incompatible_tower_detected() {
        let p = p5();
        let levels = vec![
            GroupRingElement::dirac(p, 0, 3, 0),
            GroupRingElement::dirac(p, 1, 3, 0).scale(&BigInt::from(2)),
        ];
        assert_eq!(MeasureTower::new(levels), Err(IwasawaError::Incompatible(0)));
    }

    #[test]
    fn integrate_dirac_and_augmentation() {
        let p = p5();
        let t = MeasureTower::from_top(GroupRingElement::dirac(p, 2, 4, 0));
        let r = integrate(&t, |_, _| Some(PadicNumber::one(p, 4))).unwrap();
        assert_eq!(r.value, PadicNumber::one(p, 4));
        let g = MeasureTower::from_top(GroupRingElement::dirac(p, 2, 4, 0).mul_gamma_minus_one());
        let r = integrate(&g, |_, _| Some(PadicNumber::one(p, 4))).unwrap();
        assert!(r.value.is_zero());
    }

    #[test]
    fn coefficientwise_pairing_is_compatible() {
        check_corestriction(&CoefficientwisePairing, p5(), 4, 3).unwrap();
    }
}
