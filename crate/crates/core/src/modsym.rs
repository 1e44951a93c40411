//! Weight-2 plus modular symbols for `Gamma_0(N)` via Manin symbols.
//!
//! A plus symbol is stored as a functional on `P^1(Z/N)`: the value at
//! `(c:d)` is `{b/d, a/c}` for any lift `[[a,b],[c,d]]` in `SL_2(Z)`.
//! Rational points are evaluated with `[r] = {r, oo}` by continued
//! fractions.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{self, CurveError, EllipticCurveQ};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModSymError {
    #[error("level must be positive")]
    ZeroLevel,
    #[error("level {0} is too large for the Manin-symbol table")]
    LevelTooLarge(u64),
    #[error("({0}:{1}) is not a point of P^1(Z/N)")]
    NotInP1(i64, i64),
    #[error("eigenspace has dimension {dim} after checking primes up to {bound}")]
    EigenspaceDimension { dim: usize, bound: u64 },
    #[error("conductor {given} is inconsistent with the bad primes of the curve ({expected})")]
    ConductorMismatch { given: u64, expected: u64 },
    #[error("curve is not semistable; supply the conductor")]
    NotSemistable,
    #[error("relation space has dimension {got}, expected {expected}")]
    DimensionFormula { expected: usize, got: usize },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

const MAX_LEVEL: u64 = 5000;

/// `P^1(Z/N)` with a normalization table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManinSpace {
    level: u64,
    reps: Vec<(u64, u64)>,
    /// `lookup[c * N + d]` is the index of the class of `(c:d)`.
    lookup: Vec<u32>,
    /// Sparse rows: S, T and star relations on functionals.
    relations: Vec<Vec<(usize, i64)>>,
}

const NOT_IN_P1: u32 = u32::MAX;

pub fn p1_enumerate(level: u64) -> Result<ManinSpace, ModSymError> {
    if level == 0 {
        return Err(ModSymError::ZeroLevel);
    }
    if level > MAX_LEVEL {
        return Err(ModSymError::LevelTooLarge(level));
    }
    let n = level;
    let units: Vec<u64> = (1..=n).filter(|u| u.gcd(&n) == 1).map(|u| u % n).collect();
    let mut lookup = vec![NOT_IN_P1; (n * n) as usize];
    let mut reps = Vec::new();
    for c in 0..n {
        for d in 0..n {
            if c.gcd(&d).gcd(&n) != 1 || lookup[(c * n + d) as usize] != NOT_IN_P1 {
                continue;
            }
            // orbit of (c, d) under scaling; (c, d) is its smallest member
            // because pairs are visited in lexicographic order
            let idx = reps.len() as u32;
            reps.push((c, d));
            for &u in &units {
                let (uc, ud) = ((u * c) % n, (u * d) % n);
                lookup[(uc * n + ud) as usize] = idx;
            }
        }
    }
    let mut space = ManinSpace {
        level,
        reps,
        lookup,
        relations: Vec::new(),
    };
    space.relations = space.build_relations();
    Ok(space)
}

impl ManinSpace {
    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn reps(&self) -> &[(u64, u64)] {
        &self.reps
    }

    pub fn relations(&self) -> &[Vec<(usize, i64)>] {
        &self.relations
    }

    /// Index of the class of `(c:d)`.
    pub fn index(&self, c: i64, d: i64) -> Result<usize, ModSymError> {
        let n = self.level as i64;
        let (cr, dr) = (c.rem_euclid(n), d.rem_euclid(n));
        let k = self.lookup[(cr * n + dr) as usize];
        if k == NOT_IN_P1 {
            Err(ModSymError::NotInP1(c, d))
        } else {
            Ok(k as usize)
        }
    }

    fn index_big(&self, c: &BigInt, d: &BigInt) -> Result<usize, ModSymError> {
        let n = BigInt::from(self.level);
        let cr = c.mod_floor(&n).to_i64().expect("reduced");
        let dr = d.mod_floor(&n).to_i64().expect("reduced");
        self.index(cr, dr)
    }

    fn build_relations(&self) -> Vec<Vec<(usize, i64)>> {
        let mut rows = Vec::new();
        let mut push = |mut terms: Vec<(usize, i64)>| {
            terms.sort_unstable();
            let mut merged: Vec<(usize, i64)> = Vec::new();
            for (i, v) in terms {
                match merged.last_mut() {
                    Some((j, w)) if *j == i => *w += v,
                    _ => merged.push((i, v)),
                }
            }
            merged.retain(|&(_, v)| v != 0);
            if !merged.is_empty() && !rows.contains(&merged) {
                rows.push(merged);
            }
        };
        for (i, &(c, d)) in self.reps.iter().enumerate() {
            let (c, d) = (c as i64, d as i64);
            let s = self.index(d, -c).expect("S permutes P^1");
            push(vec![(i, 1), (s, 1)]);
            let t1 = self.index(d, -c - d).expect("T permutes P^1");
            let t2 = self.index(-c - d, c).expect("T permutes P^1");
            push(vec![(i, 1), (t1, 1), (t2, 1)]);
            let star = self.index(-c, d).expect("star permutes P^1");
            push(vec![(i, 1), (star, -1)]);
        }
        rows
    }

    /// Basis of the functionals killed by every relation.
    pub fn relation_kernel(&self) -> Vec<Vec<BigRational>> {
        let m = self.len();
        let rows: Vec<Vec<BigRational>> = self
            .relations
            .iter()
            .map(|r| {
                let mut row = vec![BigRational::zero(); m];
                for &(i, v) in r {
                    row[i] = BigRational::from_integer(v.into());
                }
                row
            })
            .collect();
        linalg::kernel(rows, m)
    }

    /// Lift `(c:d)` to integers `(a, b, c', d')` with `a d' - b c' = 1`.
    pub fn lift_to_sl2(&self, index: usize) -> (i64, i64, i64, i64) {
        let n = self.level as i64;
        let (c, d) = self.reps[index];
        let c = if c == 0 { n } else { c as i64 };
        let mut d = d as i64;
        while c.gcd(&d) != 1 {
            d += n;
        }
        let g = d.extended_gcd(&c);
        debug_assert_eq!(g.gcd, 1);
        // x d + y c = 1, so [[x, -y], [c, d]] has determinant 1
        (g.x, -g.y, c, d)
    }

    /// Signed list of Manin symbols whose values sum to `[u/v]` (`v != 0`),
    /// using regular or nearest-integer continued fractions.
    pub fn decompose(&self, u: i64, v: i64, mode: ContinuedFraction) -> Vec<(usize, i64)> {
        let mut out = Vec::new();
        if v == 0 {
            return out;
        }
        let (mut num, mut den) = if v < 0 { (-u, -v) } else { (u, v) };
        let (mut p_prev2, mut p_prev) = (0i64, 1i64);
        let (mut q_prev2, mut q_prev) = (1i64, 0i64);
        loop {
            let a = match mode {
                ContinuedFraction::Regular => Integer::div_floor(&num, &den),
                ContinuedFraction::NearestInteger => Integer::div_floor(&(2 * num + den), &(2 * den)),
            };
            let p_k = a * p_prev + p_prev2;
            let q_k = a * q_prev + q_prev2;
            let det = p_k * q_prev - p_prev * q_k;
            let c = if det == 1 { q_k } else { -q_k };
            let idx = self.index(c, q_prev).expect("unimodular columns lie in P^1");
            out.push((idx, -1));
            let rem = num - a * den;
            if rem == 0 {
                break;
            }
            (num, den) = (den, rem);
            (p_prev2, p_prev) = (p_prev, p_k);
            (q_prev2, q_prev) = (q_prev, q_k);
        }
        out
    }

    fn decompose_big(&self, r: &BigRational) -> Vec<(usize, i64)> {
        let mut out = Vec::new();
        let (mut num, mut den) = (r.numer().clone(), r.denom().clone());
        let (mut p_prev2, mut p_prev) = (BigInt::zero(), BigInt::one());
        let (mut q_prev2, mut q_prev) = (BigInt::one(), BigInt::zero());
        loop {
            let a = num.div_floor(&den);
            let p_k = &a * &p_prev + &p_prev2;
            let q_k = &a * &q_prev + &q_prev2;
            let det = &p_k * &q_prev - &p_prev * &q_k;
            let c = if det.is_one() { q_k.clone() } else { -&q_k };
            let idx = self.index_big(&c, &q_prev).expect("unimodular columns lie in P^1");
            out.push((idx, -1));
            let rem = &num - &a * &den;
            if rem.is_zero() {
                break;
            }
            (num, den) = (den, rem);
            (p_prev2, p_prev) = (p_prev, p_k);
            (q_prev2, q_prev) = (q_prev, q_k);
        }
        out
    }

    /// Integer matrix `H` with `(T phi)(x) = sum_i H[x][i] phi(i)` for the
    /// operator defined by the matrices `[[alpha, beta], [0, delta]]`.
    fn hecke_counts(&self, mats: &[(i64, i64, i64)]) -> Vec<BTreeMap<usize, i64>> {
        let mut out = Vec::with_capacity(self.len());
        for x in 0..self.len() {
            let (a, b, c, d) = self.lift_to_sl2(x);
            let mut row: BTreeMap<usize, i64> = BTreeMap::new();
            for &(al, be, de) in mats {
                // M (b/d) - M (a/c), where M r = (al r + be) / de
                for (u, v, sign) in [(b, d, 1i64), (a, c, -1i64)] {
                    if v == 0 {
                        continue;
                    }
                    for (i, s) in self.decompose(al * u + be * v, de * v, ContinuedFraction::Regular)
                    {
                        *row.entry(i).or_default() += sign * s;
                    }
                }
            }
            row.retain(|_, v| *v != 0);
            out.push(row);
        }
        out
    }

    /// Matrices of `T_ell` (`ell` not dividing N) or `U_ell` (`ell | N`).
    pub fn hecke_matrices(&self, ell: u64) -> Vec<(i64, i64, i64)> {
        let l = ell as i64;
        let mut mats: Vec<(i64, i64, i64)> = (0..l).map(|j| (1, j, l)).collect();
        if !self.level.is_multiple_of(ell) {
            mats.push((l, 0, 1));
        }
        mats
    }

    /// Apply the Hecke operator at `ell` to a functional.
    pub fn apply_hecke(&self, ell: u64, phi: &[BigRational]) -> Vec<BigRational> {
        let counts = self.hecke_counts(&self.hecke_matrices(ell));
        counts
            .iter()
            .map(|row| {
                row.iter()
                    .map(|(&i, &k)| &phi[i] * BigRational::from_integer(k.into()))
                    .sum()
            })
            .collect()
    }

    /// Boundary of `(c:d)` as a pair of cusp labels `(cusp(b/d), cusp(a/c))`.
    fn boundary(&self, x: usize, cusps: &CuspClassifier) -> (usize, usize) {
        let (a, b, c, d) = self.lift_to_sl2(x);
        (cusps.class_of(b, d), cusps.class_of(a, c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContinuedFraction {
    Regular,
    NearestInteger,
}

/// Cusps of `Gamma_0(N)`. For coprime `(a, c)`, with `s a = 1 mod c`, the
/// cusps `a1/c1` and `a2/c2` are equivalent iff
/// `gcd(c1, N) = gcd(c2, N) = g` and `s1 c2 = s2 c1 mod gcd(c1 c2, N)`.
struct CuspClassifier {
    level: i64,
    classes: Vec<(i64, i64)>,
}

impl CuspClassifier {
    fn new(level: u64) -> Self {
        CuspClassifier {
            level: level as i64,
            classes: Vec::new(),
        }
    }

    fn equivalent(&self, (a1, c1): (i64, i64), (a2, c2): (i64, i64)) -> bool {
        let n = self.level;
        let g1 = c1.gcd(&n);
        let g2 = c2.gcd(&n);
        if g1 != g2 {
            return false;
        }
        let s = |a: i64, c: i64| -> i64 {
            if c == 0 {
                return 1;
            }
            if c == 1 {
                return 0;
            }
            let e = a.extended_gcd(&c);
            e.x.rem_euclid(c)
        };
        let m = ((c1 as i128 * c2 as i128) as i64).gcd(&n);
        let (s1, s2) = (s(a1, c1), s(a2, c2));
        ((s1 as i128 * c2 as i128 - s2 as i128 * c1 as i128).rem_euclid(m as i128)) == 0
    }

    fn class_of(&self, a: i64, c: i64) -> usize {
        let (a, c) = normalize_cusp(a, c);
        self.classes
            .iter()
            .position(|&k| self.equivalent(k, (a, c)))
            .expect("cusp list is complete")
    }

    fn register(&mut self, a: i64, c: i64) {
        let k = normalize_cusp(a, c);
        if !self.classes.iter().any(|&e| self.equivalent(e, k)) {
            self.classes.push(k);
        }
    }
}

/// Coprime representative with `c >= 0`; infinity is `(1, 0)`.
fn normalize_cusp(a: i64, c: i64) -> (i64, i64) {
    if c == 0 {
        return (1, 0);
    }
    let g = a.gcd(&c);
    let (a, c) = (a / g, c / g);
    if c < 0 {
        (-a, -c)
    } else {
        (a, c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationCertificate {
    /// Primitive integral eigenvector (content 1 over Manin symbols).
    pub integral_values: Vec<BigInt>,
    /// The stored values are `scale * integral_values`.
    pub scale: BigRational,
    /// gcd of the integral vector over closed integral cycles.
    pub cycle_content: BigInt,
    /// Components of `E(R)`: 1 if the discriminant is negative, else 2.
    pub real_components: u8,
    pub hecke_primes: Vec<u64>,
    pub sturm_bound: u64,
    pub relation_dimension: usize,
    /// `[r]` always lies in `(1/denominator_bound) Z`.
    pub denominator_bound: BigInt,
    pub manin_constant_note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EigenSymbol {
    level: u64,
    values: Vec<BigRational>,
    certificate: NormalizationCertificate,
}

impl EigenSymbol {
    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn certificate(&self) -> &NormalizationCertificate {
        &self.certificate
    }

    pub fn scale(&self) -> &BigRational {
        &self.certificate.scale
    }

    /// A copy with every value multiplied by `k`.
    pub fn scaled(&self, k: &BigRational) -> Self {
        let mut s = self.clone();
        s.values = s.values.iter().map(|v| v * k).collect();
        s.certificate.scale = &s.certificate.scale * k;
        s
    }
}

/// Conductor used for the modular-symbol computation.
pub fn resolve_conductor(e: &EllipticCurveQ, given: Option<u64>) -> Result<u64, ModSymError> {
    let radical = e.discriminant_radical()?;
    match given {
        None => {
            if !e.is_semistable()? {
                return Err(ModSymError::NotSemistable);
            }
            Ok(radical)
        }
        Some(n) => {
            let bad: Vec<u64> = curve::factor(e.discriminant())?.into_iter().map(|f| f.0).collect();
            let level_primes: Vec<u64> =
                curve::factor(&BigInt::from(n))?.into_iter().map(|f| f.0).collect();
            if bad != level_primes {
                return Err(ModSymError::ConductorMismatch {
                    given: n,
                    expected: radical,
                });
            }
            Ok(n)
        }
    }
}

/// Genus of `X_0(N)` and the number of cusps.
pub fn genus_and_cusps(level: u64) -> (i64, i64) {
    let n = level as i64;
    let primes: Vec<(u64, u32)> = curve::factor(&BigInt::from(level)).unwrap_or_default();
    let mut index = BigRational::from_integer(n.into());
    let mut nu2: i64 = if n % 4 == 0 { 0 } else { 1 };
    let mut nu3: i64 = if n % 9 == 0 { 0 } else { 1 };
    for &(l, _) in &primes {
        let l = l as i64;
        index *= BigRational::new((l + 1).into(), l.into());
        nu2 *= 1 + kronecker_minus(4, l);
        nu3 *= 1 + kronecker_minus(3, l);
    }
    let mut cusps = 0i64;
    for d in 1..=n {
        if n % d == 0 {
            cusps += euler_phi(d.gcd(&(n / d)));
        }
    }
    let mu = index.to_integer().to_i64().expect("small index");
    // 12 g = 12 + mu - 3 nu2 - 4 nu3 - 6 c
    let twelve_g = 12 + mu - 3 * nu2 - 4 * nu3 - 6 * cusps;
    (twelve_g / 12, cusps)
}

/// `(-k / l)` for `k` in {3, 4}, with the usual convention at `l | k`.
fn kronecker_minus(k: i64, l: i64) -> i64 {
    if k % l == 0 || (k == 4 && l == 2) {
        return 0;
    }
    if l == 2 {
        // -3 = 5 mod 8
        return -1;
    }
    let target = (l - k % l) % l;
    curve::legendre(target as u64, l as u64)
}

fn euler_phi(n: i64) -> i64 {
    (1..=n).filter(|k| k.gcd(&n) == 1).count() as i64
}

fn is_squarefree(n: u64) -> bool {
    curve::factor(&BigInt::from(n))
        .map(|f| f.iter().all(|&(_, e)| e == 1))
        .unwrap_or(false)
}

/// The normalized plus eigen-symbol attached to `e`.
pub fn eigen_symbol(
    e: &EllipticCurveQ,
    conductor: Option<u64>,
) -> Result<(ManinSpace, EigenSymbol), ModSymError> {
    let level = resolve_conductor(e, conductor)?;
    let space = p1_enumerate(level)?;
    let basis = space.relation_kernel();
    let dim = basis.len();
    if is_squarefree(level) {
        let (g, c) = genus_and_cusps(level);
        let expected = (g + c - 1) as usize;
        if dim != expected {
            return Err(ModSymError::DimensionFormula { expected, got: dim });
        }
    }
    let sturm_bound = space.len() as u64 / 6;
    let bound = sturm_bound.max(20);
    let primes: Vec<u64> = (2..=bound).filter(|&l| crate::padic::is_prime_u64(l)).collect();
    let free = linalg::free_columns(&basis);
    let mut stacked: Vec<Vec<BigRational>> = Vec::new();
    for &ell in &primes {
        let a = BigRational::from_integer(e.a_ell(ell).into());
        let counts = space.hecke_counts(&space.hecke_matrices(ell));
        // column b holds coordinates of T(basis_b) - a basis_b
        let mut block = vec![vec![BigRational::zero(); dim]; dim];
        for (b, phi) in basis.iter().enumerate() {
            for (r, &x) in free.iter().enumerate() {
                let tx: BigRational = counts[x]
                    .iter()
                    .map(|(&i, &k)| &phi[i] * BigRational::from_integer(k.into()))
                    .sum();
                block[r][b] = tx - &a * &phi[x];
            }
        }
        stacked.extend(block);
    }
    let eigen = linalg::kernel(stacked, dim);
    if eigen.len() != 1 {
        return Err(ModSymError::EigenspaceDimension {
            dim: eigen.len(),
            bound,
        });
    }
    let mut phi = vec![BigRational::zero(); space.len()];
    for (coef, b) in eigen[0].iter().zip(&basis) {
        for (v, bv) in phi.iter_mut().zip(b) {
            *v += coef * bv;
        }
    }
    let integral = primitive_integral(&phi);
    let cycle_content = cycle_content(&space, &integral);
    let real_components: u8 = if e.discriminant().is_negative() { 1 } else { 2 };
    let target = if real_components == 1 {
        BigRational::new(BigInt::one(), BigInt::from(2))
    } else {
        BigRational::one()
    };
    let scale = target / BigRational::from_integer(cycle_content.clone());
    let unsigned = EigenSymbol {
        level,
        values: integral
            .iter()
            .map(|v| BigRational::from_integer(v.clone()) * &scale)
            .collect(),
        certificate: NormalizationCertificate {
            integral_values: integral.clone(),
            scale: scale.clone(),
            cycle_content: cycle_content.clone(),
            real_components,
            hecke_primes: primes.clone(),
            sturm_bound,
            relation_dimension: dim,
            denominator_bound: BigInt::one(),
            manin_constant_note: String::new(),
        },
    };
    let zero_value = symbol_value(&space, &unsigned, &BigRational::zero());
    let flip = if !zero_value.is_zero() {
        zero_value.is_negative()
    } else {
        integral.iter().find(|v| !v.is_zero()).is_some_and(|v| v.is_negative())
    };
    let mut integral = integral;
    if flip {
        integral = integral.into_iter().map(|v| -v).collect();
    }
    let values: Vec<BigRational> = integral
        .iter()
        .map(|v| BigRational::from_integer(v.clone()) * &scale)
        .collect();
    let certificate = NormalizationCertificate {
        integral_values: integral,
        denominator_bound: scale.denom().clone(),
        scale,
        cycle_content,
        real_components,
        hecke_primes: primes,
        sturm_bound,
        relation_dimension: dim,
        manin_constant_note: "values are normalized on integral homology; a Manin constant \
                              other than 1 would rescale them by that unit"
            .to_string(),
    };
    Ok((
        space,
        EigenSymbol {
            level,
            values,
            certificate,
        },
    ))
}

fn primitive_integral(phi: &[BigRational]) -> Vec<BigInt> {
    let lcm = phi
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let ints: Vec<BigInt> = phi.iter().map(|v| (v * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|v| v / &g).collect()
}

/// gcd of `sum n_x phi(x)` over integer combinations with zero boundary.
fn cycle_content(space: &ManinSpace, integral: &[BigInt]) -> BigInt {
    let mut cusps = CuspClassifier::new(space.level);
    let lifts: Vec<(i64, i64, i64, i64)> = (0..space.len()).map(|x| space.lift_to_sl2(x)).collect();
    for &(a, b, c, d) in &lifts {
        cusps.register(b, d);
        cusps.register(a, c);
    }
    let ncusps = cusps.classes.len();
    let mut boundary = vec![vec![BigInt::zero(); space.len()]; ncusps];
    for x in 0..space.len() {
        let (to, from) = space.boundary(x, &cusps);
        boundary[to][x] += 1;
        boundary[from][x] -= 1;
    }
    let kernel = linalg::integer_kernel(boundary, space.len());
    kernel
        .iter()
        .map(|z| z.iter().zip(integral).map(|(a, b)| a * b).sum::<BigInt>())
        .fold(BigInt::zero(), |acc, v| acc.gcd(&v))
}

/// `[r]^+` as an exact rational.
pub fn symbol_value(space: &ManinSpace, sym: &EigenSymbol, r: &BigRational) -> BigRational {
    space
        .decompose_big(r)
        .into_iter()
        .map(|(i, s)| &sym.values[i] * BigRational::from_integer(s.into()))
        .sum()
}

/// `[u/v]^+` using a chosen continued-fraction expansion.
pub fn symbol_value_with(
    space: &ManinSpace,
    sym: &EigenSymbol,
    u: i64,
    v: i64,
    mode: ContinuedFraction,
) -> BigRational {
    space
        .decompose(u, v, mode)
        .into_iter()
        .map(|(i, s)| &sym.values[i] * BigRational::from_integer(s.into()))
        .sum()
}

/// `[u/v]^+ / scale` as an integer (the content-1 normalization).
pub fn integral_symbol_value(space: &ManinSpace, sym: &EigenSymbol, u: i64, v: i64) -> BigInt {
    let w = &sym.certificate.integral_values;
    space
        .decompose(u, v, ContinuedFraction::Regular)
        .into_iter()
        .map(|(i, s)| &w[i] * BigInt::from(s))
        .sum()
}

/// Exact rational and integer linear algebra.
pub mod linalg {
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_rational::BigRational;
    use num_traits::{One, Signed, Zero};

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref(rows: &mut Vec<Vec<BigRational>>, ncols: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..ncols {
            let Some(pr) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
                continue;
            };
            rows.swap(r, pr);
            let inv = rows[r][col].recip();
            for v in rows[r].iter_mut() {
                *v *= &inv;
            }
            let pivot_row = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i == r || row[col].is_zero() {
                    continue;
                }
                let f = row[col].clone();
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    if !pv.is_zero() {
                        *v -= &f * pv;
                    }
                }
            }
            pivots.push(col);
            r += 1;
            if r == rows.len() {
                break;
            }
        }
        rows.truncate(r);
        pivots
    }

    /// Basis of `{x : A x = 0}`; vector `k` has a 1 at the `k`-th free column.
    pub fn kernel(mut rows: Vec<Vec<BigRational>>, ncols: usize) -> Vec<Vec<BigRational>> {
        let pivots = rref(&mut rows, ncols);
        let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![BigRational::zero(); ncols];
                v[f] = BigRational::one();
                for (row, &pc) in rows.iter().zip(&pivots) {
                    v[pc] = -row[f].clone();
                }
                v
            })
            .collect()
    }

    /// The columns at which a kernel basis from [`kernel`] is the identity.
    pub fn free_columns(basis: &[Vec<BigRational>]) -> Vec<usize> {
        (0..basis.len())
            .map(|k| {
                (0..basis[k].len())
                    .find(|&c| {
                        basis[k][c].is_one()
                            && basis.iter().enumerate().all(|(j, w)| j == k || w[c].is_zero())
                    })
                    .expect("free column exists")
            })
            .collect()
    }

    /// Z-basis of `{x in Z^n : A x = 0}` via unimodular column operations.
    pub fn integer_kernel(mut a: Vec<Vec<BigInt>>, ncols: usize) -> Vec<Vec<BigInt>> {
        let mut u: Vec<Vec<BigInt>> = (0..ncols)
            .map(|i| {
                let mut col = vec![BigInt::zero(); ncols];
                col[i] = BigInt::one();
                col
            })
            .collect();
        // u[j] is the j-th column of the transform; a is row-major
        let mut active: Vec<usize> = (0..ncols).collect();
        for r in 0..a.len() {
            loop {
                let nz: Vec<usize> = active.iter().copied().filter(|&j| !a[r][j].is_zero()).collect();
                if nz.len() <= 1 {
                    if let Some(&j) = nz.first() {
                        active.retain(|&k| k != j);
                    }
                    break;
                }
                let piv = *nz
                    .iter()
                    .min_by(|&&x, &&y| a[r][x].abs().cmp(&a[r][y].abs()))
                    .expect("nonempty");
                for &j in &nz {
                    if j == piv {
                        continue;
                    }
                    let q = a[r][j].div_floor(&a[r][piv]);
                    if q.is_zero() {
                        continue;
                    }
                    for row in a.iter_mut() {
                        let t = &row[piv] * &q;
                        row[j] -= t;
                    }
                    let (uj, up) = if j < piv {
                        let (lo, hi) = u.split_at_mut(piv);
                        (&mut lo[j], &hi[0])
                    } else {
                        let (lo, hi) = u.split_at_mut(j);
                        (&mut hi[0], &lo[piv])
                    };
                    for (x, y) in uj.iter_mut().zip(up.iter()) {
                        *x -= y * &q;
                    }
                }
            }
        }
        active.into_iter().map(|j| u[j].clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p1_sizes() {
        assert_eq!(p1_enumerate(1).unwrap().len(), 1);
        assert_eq!(p1_enumerate(11).unwrap().len(), 12);
        assert_eq!(p1_enumerate(6).unwrap().len(), 12);
        assert!(p1_enumerate(0).is_err());
    }

    #[test]
    fn normalization_is_idempotent() {
        let s = p1_enumerate(12).unwrap();
        for (i, &(c, d)) in s.reps().iter().enumerate() {
            assert_eq!(s.index(c as i64, d as i64).unwrap(), i);
            assert_eq!(s.index(5 * c as i64, 5 * d as i64).unwrap(), i);
        }
        assert!(s.index(2, 4).is_err());
    }

    #[test]
    fn lifts_have_determinant_one() {
        let s = p1_enumerate(20).unwrap();
        for x in 0..s.len() {
            let (a, b, c, d) = s.lift_to_sl2(x);
            assert_eq!(a * d - b * c, 1);
            assert_eq!(s.index(c, d).unwrap(), x);
        }
    }

    #[test]
    fn genus_formula() {
        assert_eq!(genus_and_cusps(11), (1, 2));
        assert_eq!(genus_and_cusps(37), (2, 2));
        assert_eq!(genus_and_cusps(91), (7, 4));
        assert_eq!(genus_and_cusps(1), (0, 1));
    }

    #[test]
    fn relation_dimension_small_levels() {
        for n in [2u64, 3, 5, 6, 7, 10, 11, 13, 14, 15, 30, 35] {
            let (g, c) = genus_and_cusps(n);
            let dim = p1_enumerate(n).unwrap().relation_kernel().len();
            assert_eq!(dim as i64, g + c - 1, "level {n}");
        }
    }

    #[test]
    fn integer_kernel_basis() {
        let a = vec![vec![BigInt::from(2), BigInt::from(4), BigInt::from(6)]];
        let k = linalg::integer_kernel(a, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            let s: BigInt = &v[0] * 2i64 + &v[1] * 4i64 + &v[2] * 6i64;
            assert!(s.is_zero());
        }
    }
}
