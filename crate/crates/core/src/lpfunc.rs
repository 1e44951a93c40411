//! The p-adic L-function of a split multiplicative curve, built from
//! plus modular symbols, and its behaviour at `s = 1`.
//!
//! Level `n` of the tower lives on `Gamma_n = Z/p^n`, which is the quotient
//! of `Z_p^x` by `mu_{p-1} (1 + p^{n+1} Z_p)`. Its `gamma^i` coefficient is
//! the mass of `{a : <a> = (1+p)^i mod p^{n+1}}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{self, CurveError, EllipticCurveQ, LambdaBk, ReductionKind, TateData};
use crate::iwasawa::{self, GroupRingElement, IwasawaError, MeasureTower};
use crate::modsym::{self, EigenSymbol, ManinSpace, ModSymError};
use crate::padic::{self, PadicError, PadicNumber, Prime};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("reduction at {p} is not split multiplicative")]
    NotSplit { p: u64 },
    #[error("U_{p} acts on the eigen-symbol by something other than 1")]
    UpEigenvalue { p: u64 },
    #[error("measure invariant violated: {0}")]
    Invariant(String),
    #[error("s - 1 must lie in Z_p")]
    OutsideConvergence,
    #[error("p^(n_max+1) = {0}^(n+1) is too large")]
    LevelTooDeep(u64),
    #[error("order of vanishing is below {needed} at the available precision")]
    OrderTooLow { needed: usize },
    #[error("n_max and M must be positive")]
    BadParameters,
    #[error(transparent)]
    ModSym(#[from] ModSymError),
    #[error(transparent)]
    Iwasawa(#[from] IwasawaError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

/// Where a measure came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasureSource {
    Curve {
        coefficients: [BigInt; 5],
        conductor: u64,
        /// `[0]^+`.
        zero_value: BigRational,
    },
    Synthetic,
}

/// The measure `L_E` as an integral tower times a rational scale.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MttMeasure {
    p: Prime,
    /// Content-1 integral values reduced mod `p^M`.
    tower: MeasureTower,
    /// Actual measure = `scale * tower`.
    scale: BigRational,
    /// Exact (unreduced) total mass at every level.
    exact_masses: Vec<BigInt>,
    /// `U_p` fixes the symbol exactly, so `alpha = 1`.
    alpha_is_one: bool,
    source: MeasureSource,
}

impl MttMeasure {
    /// Wrap a synthetic tower (scale 1).
    pub fn synthetic(tower: MeasureTower) -> Self {
        let exact_masses = tower
            .levels()
            .iter()
            .map(|e| e.coeffs().iter().sum::<BigInt>())
            .collect();
        MttMeasure {
            p: tower.prime(),
            tower,
            scale: BigRational::one(),
            exact_masses,
            alpha_is_one: true,
            source: MeasureSource::Synthetic,
        }
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn tower(&self) -> &MeasureTower {
        &self.tower
    }

    pub fn scale(&self) -> &BigRational {
        &self.scale
    }

    pub fn exact_masses(&self) -> &[BigInt] {
        &self.exact_masses
    }

    pub fn alpha_is_one(&self) -> bool {
        self.alpha_is_one
    }

    pub fn source(&self) -> &MeasureSource {
        &self.source
    }

    pub fn modulus_exp(&self) -> u32 {
        self.tower.modulus_exp()
    }

    pub fn n_max(&self) -> u32 {
        self.tower.n_max()
    }

    /// Multiply a tower-side quantity by the scale.
    pub fn rescale(&self, x: &PadicNumber) -> Result<PadicNumber, LpError> {
        let s = PadicNumber::from_rational(self.p, &self.scale, x.precision().max(1) + 8)?;
        Ok(x.mul(&s)?)
    }
}

/// Largest `n_max` with `p^(n_max+1)` comfortably inside `i64` arithmetic.
fn max_depth(p: Prime) -> u32 {
    let mut k = 0;
    let mut q: u128 = p.get() as u128;
    while q * (p.get() as u128) < (1u128 << 40) {
        q *= p.get() as u128;
        k += 1;
    }
    k
}

/// Residues `a mod p^(n+1)` with `<a> = (1+p)^i`, grouped by `i`.
pub(crate) fn residue_classes(p: Prime, n: u32) -> Vec<Vec<i64>> {
    let pp = p.get() as i128;
    let q = pp.pow(n + 1);
    let pn = pp.pow(n);
    let teich: Vec<i128> = (1..pp)
        .map(|k| {
            let mut z = k;
            for _ in 0..n {
                z = pow_mod(z, pp, q);
            }
            z
        })
        .collect();
    let mut out = Vec::with_capacity(pn as usize);
    let mut u: i128 = 1;
    for _ in 0..pn {
        out.push(teich.iter().map(|z| ((z * u) % q) as i64).collect());
        u = (u * (1 + pp)) % q;
    }
    out
}

fn pow_mod(mut b: i128, mut e: i128, m: i128) -> i128 {
    let mut r = 1i128;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// Build the measure `mu(a + p^(n+1) Z_p) = [a / p^(n+1)]^+` on levels
/// `0..=n_max` modulo `p^M`.
pub fn build_mtt(
    e: &EllipticCurveQ,
    space: &ManinSpace,
    sym: &EigenSymbol,
    p: u64,
    n_max: u32,
    modulus_exp: u32,
) -> Result<MttMeasure, LpError> {
    if n_max == 0 || modulus_exp == 0 {
        return Err(LpError::BadParameters);
    }
    let red = curve::reduction_type(e, p)?;
    if red.kind != ReductionKind::SplitMultiplicative {
        return Err(LpError::NotSplit { p });
    }
    let prime = red.p;
    if n_max > max_depth(prime) {
        return Err(LpError::LevelTooDeep(p));
    }
    if !space.level().is_multiple_of(p) {
        return Err(LpError::NotSplit { p });
    }
    let up = space.apply_hecke(p, sym.values());
    if up.as_slice() != sym.values() {
        return Err(LpError::UpEigenvalue { p });
    }
    let mut exact_levels: Vec<Vec<BigInt>> = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max {
        let q = prime.pow(n + 1).to_i64().expect("bounded by max_depth");
        let coeffs: Vec<BigInt> = residue_classes(prime, n)
            .iter()
            .map(|class| {
                class
                    .iter()
                    .map(|&a| modsym::integral_symbol_value(space, sym, a, q))
                    .sum()
            })
            .collect();
        exact_levels.push(coeffs);
    }
    let exact_masses: Vec<BigInt> = exact_levels.iter().map(|c| c.iter().sum()).collect();
    if let Some(n) = exact_masses.iter().position(|m| !m.is_zero()) {
        return Err(LpError::Invariant(format!("total mass at level {n} is nonzero")));
    }
    for n in 1..exact_levels.len() {
        let small = exact_levels[n - 1].len();
        let mut projected = vec![BigInt::zero(); small];
        for (j, c) in exact_levels[n].iter().enumerate() {
            projected[j % small] += c;
        }
        if projected != exact_levels[n - 1] {
            return Err(LpError::Invariant(format!(
                "distribution property fails between levels {} and {n}",
                n - 1
            )));
        }
    }
    let levels = exact_levels
        .into_iter()
        .enumerate()
        .map(|(n, c)| GroupRingElement::new(prime, n as u32, modulus_exp, c))
        .collect::<Result<Vec<_>, _>>()?;
    let tower = MeasureTower::new(levels)?;
    let zero_value = modsym::symbol_value(space, sym, &BigRational::zero());
    Ok(MttMeasure {
        p: prime,
        tower,
        scale: sym.scale().clone(),
        exact_masses,
        alpha_is_one: true,
        source: MeasureSource::Curve {
            coefficients: e.coefficients().clone(),
            conductor: space.level(),
            zero_value,
        },
    })
}

/// Value of `L_p(E, s)` with the per-level values it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpValue {
    pub value: PadicNumber,
    pub level_values: Vec<PadicNumber>,
    /// True when the value is an exact rational zero, not just small.
    pub exact_zero: bool,
    pub stabilization: Option<i64>,
}

/// `sum_a <a>^(s-1) mu(a + p^(n+1))` at every level.
///
/// Any `s` with `s - 1` in `Z_p` is accepted: `<a>^x` converges there.
pub fn lp_eval(mu: &MttMeasure, s: &PadicNumber) -> Result<LpValue, LpError> {
    let p = mu.p;
    let m = mu.modulus_exp() as i64;
    let x = s.sub(&PadicNumber::one(p, s.precision().max(m)))?;
    if x.valuation().is_some_and(|v| v < 0) {
        return Err(LpError::OutsideConvergence);
    }
    if x.is_zero() && mu.exact_masses.iter().all(|c| c.is_zero()) {
        let zero = PadicNumber::zero(p, m);
        return Ok(LpValue {
            value: zero.clone(),
            level_values: vec![zero; mu.exact_masses.len()],
            exact_zero: true,
            stabilization: None,
        });
    }
    let weight = iwasawa::cyclotomic_power_weight(&x, m).ok_or(LpError::OutsideConvergence)?;
    let integral = iwasawa::integrate(&mu.tower, weight)?;
    let level_values = integral
        .level_values
        .iter()
        .map(|v| mu.rescale(v))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LpValue {
        value: mu.rescale(&integral.value)?,
        level_values,
        exact_zero: false,
        stabilization: integral.stabilization,
    })
}

/// `d^r/ds^r L_p(E, s)` at `s = 1` by two routes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivativePair {
    pub r: u32,
    /// Riemann sums of `(log_p <a>)^r`.
    pub riemann: PadicNumber,
    /// `log_p(1+p)^r sum_i i! S(r, i) c_i` from the J-adic expansion.
    pub expansion: PadicNumber,
    pub agreement: i64,
}

/// Stirling numbers of the second kind `S(r, i)` for `i <= r`.
fn stirling2(r: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for k in 1..=r {
        let mut next = vec![BigInt::zero(); k + 1];
        for i in 1..=k {
            let prev = row.get(i).cloned().unwrap_or_default();
            next[i] = BigInt::from(i) * prev + &row[i - 1];
        }
        row = next;
    }
    row
}

fn factorial(n: usize) -> BigInt {
    (1..=n).map(BigInt::from).product::<BigInt>().max(BigInt::one())
}

/// Coefficients `c_0, .., c_{order-1}` of `L_E` in powers of `(gamma - 1)`,
/// scaled to the actual measure.
pub fn expansion_coefficients(mu: &MttMeasure, order: usize) -> Result<Vec<PadicNumber>, LpError> {
    let e = iwasawa::j_expand(&mu.tower, order)?;
    e.coeffs.iter().map(|c| mu.rescale(c)).collect()
}

/// Derivative from expansion coefficients (tower-side, unscaled).
fn derivative_from_expansion(p: Prime, coeffs: &[PadicNumber], r: usize, prec: i64) -> Result<PadicNumber, LpError> {
    if r == 0 {
        return Ok(coeffs[0].clone());
    }
    let s = stirling2(r);
    let ell = padic::log_gamma(p, prec);
    let mut acc = PadicNumber::zero(p, prec);
    for i in 1..=r {
        let k = factorial(i) * &s[i];
        acc = acc.add(&coeffs[i].scale(&k))?;
    }
    Ok(acc.mul(&ell.pow(r as u32))?)
}

pub fn lp_derivatives(mu: &MttMeasure, r_max: u32) -> Result<Vec<DerivativePair>, LpError> {
    let p = mu.p;
    let m = mu.modulus_exp() as i64;
    let e = iwasawa::j_expand(&mu.tower, r_max as usize + 1)?;
    let mut out = Vec::with_capacity(r_max as usize + 1);
    for r in 0..=r_max {
        let integral = iwasawa::integrate(&mu.tower, iwasawa::log_power_weight(p, r, m))?;
        let riemann_raw = if r == 0 && mu.exact_masses.iter().all(|c| c.is_zero()) {
            PadicNumber::zero(p, m)
        } else {
            integral.value.with_precision(integral.achieved_precision())
        };
        let expansion_raw = derivative_from_expansion(p, &e.coeffs, r as usize, m)?;
        let riemann = mu.rescale(&riemann_raw)?;
        let expansion = mu.rescale(&expansion_raw)?;
        let agreement = riemann.difference_valuation(&expansion)?;
        out.push(DerivativePair {
            r,
            riemann,
            expansion,
            agreement,
        });
    }
    Ok(out)
}

/// Greenberg-Stevens comparison `L_p'(1) = (log q / ord q) [0]^+`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GsRecord {
    pub lhs: PadicNumber,
    pub lhs_riemann: PadicNumber,
    pub rhs: PadicNumber,
    pub l_invariant: PadicNumber,
    pub zero_value: BigRational,
    pub difference_valuation: i64,
    pub achieved_precision: i64,
    /// `[0]^+ = 0`: both sides must vanish.
    pub degenerate: bool,
    pub pass: bool,
}

pub fn gs_check(mu: &MttMeasure, tate: &TateData, zero_value: &BigRational) -> Result<GsRecord, LpError> {
    let p = mu.p;
    let m = mu.modulus_exp() as i64;
    let d = lp_derivatives(mu, 1)?;
    let lhs = d[1].expansion.clone();
    let zero_p = PadicNumber::from_rational(p, zero_value, m)?;
    let rhs = tate.l_invariant.mul(&zero_p)?;
    let achieved_precision = lhs.precision().min(rhs.precision());
    let difference_valuation = lhs.difference_valuation(&rhs)?;
    let degenerate = zero_value.is_zero();
    let pass = if degenerate {
        lhs.is_zero() && d[1].riemann.is_zero()
    } else {
        difference_valuation >= achieved_precision
    };
    Ok(GsRecord {
        lhs,
        lhs_riemann: d[1].riemann.clone(),
        rhs,
        l_invariant: tate.l_invariant.clone(),
        zero_value: zero_value.clone(),
        difference_valuation,
        achieved_precision,
        degenerate,
        pass,
    })
}

/// The second derivative computed from the twice-divided measure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedSecond {
    /// `2 aug(mu'')` with `L = ((gamma-1)/log_p(1+p))^2 mu''`.
    pub value: PadicNumber,
    /// `d^2/ds^2 L_p` at `s = 1` from the J-adic expansion.
    pub via_derivatives: PadicNumber,
    pub agreement: i64,
    pub exact_match: bool,
}

pub fn second_derivative_via_derived_measure(mu: &MttMeasure) -> Result<DerivedSecond, LpError> {
    let p = mu.p;
    let m = mu.modulus_exp() as i64;
    let e = iwasawa::j_expand(&mu.tower, 3)?;
    if !e.coeffs[0].is_zero() || !e.coeffs[1].is_zero() {
        return Err(LpError::OrderTooLow { needed: 2 });
    }
    let first = iwasawa::divide_gamma_minus_1(&mu.tower)?;
    let second = iwasawa::divide_gamma_minus_1_at_precision(&first)?;
    let twice_aug = second.augmentation() * BigInt::from(2);
    let prec = (second.modulus_exp() as i64).min(e.coeffs[2].precision());
    let raw = PadicNumber::from_integer(p, &twice_aug, prec);
    let via_raw = derivative_from_expansion(p, &e.coeffs, 2, m)?;
    // c_2 is only defined modulo p^prec at the top level, so that is the
    // finest modulus at which the two integers can be compared
    let exact_match = {
        let modulus = p.pow(prec as u32);
        let via_int = via_raw.with_precision(prec).to_integer();
        let direct = twice_aug.modpow(&BigInt::one(), &modulus);
        via_int.map(|v| v.modpow(&BigInt::one(), &modulus)) == Some(direct)
    };
    let value = mu.rescale(&raw)?;
    let via_derivatives = mu.rescale(&via_raw)?;
    let agreement = value.difference_valuation(&via_derivatives)?;
    Ok(DerivedSecond {
        value,
        via_derivatives,
        agreement,
        exact_match,
    })
}

/// How the analytic rank entered the report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RankSource {
    UserSupplied(u32),
    /// `[0]^+ != 0` certifies rank 0.
    InferredZero,
    Unknown,
}

impl RankSource {
    pub fn rank(self) -> Option<u32> {
        match self {
            RankSource::UserSupplied(r) => Some(r),
            RankSource::InferredZero => Some(0),
            RankSource::Unknown => None,
        }
    }
}

/// Inputs to the `lambda_BK` formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaInputs {
    pub ord_c0: i64,
    pub alpha: PadicNumber,
    pub height: PadicNumber,
}

/// Height value implied by the second derivative, not an independent
/// computation of the height.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedPrediction {
    pub lambda: LambdaBk,
    /// `-lambda_BK * (1/2) L_p''(1)`.
    pub predicted_height: Option<PadicNumber>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExceptionalReport {
    pub value_at_one: LpValue,
    pub derivatives: Vec<DerivativePair>,
    pub expansion: Vec<PadicNumber>,
    /// Leading expansion coefficients that vanish at their precision.
    pub order_lower_bound: usize,
    /// `(1/2) L_p''(1)`, the coefficient of `gamma_0` with
    /// `log_p rho(gamma_0) = p`.
    pub half_second_derivative: PadicNumber,
    pub derived_second: Option<DerivedSecond>,
    pub gs: GsRecord,
    pub rank: RankSource,
    pub verdict: String,
    pub prediction: Option<DerivedPrediction>,
}

pub fn mtt_report(
    mu: &MttMeasure,
    tate: &TateData,
    r_an: Option<u32>,
    lambda_inputs: Option<&LambdaInputs>,
) -> Result<ExceptionalReport, LpError> {
    let zero_value = match mu.source() {
        MeasureSource::Curve { zero_value, .. } => zero_value.clone(),
        MeasureSource::Synthetic => BigRational::zero(),
    };
    let rank = match r_an {
        Some(r) => RankSource::UserSupplied(r),
        None if !zero_value.is_zero() => RankSource::InferredZero,
        None => RankSource::Unknown,
    };
    let value_at_one = lp_eval(mu, &PadicNumber::one(mu.p, mu.modulus_exp() as i64))?;
    let derivatives = lp_derivatives(mu, 2)?;
    let expansion = expansion_coefficients(mu, 3)?;
    let order_lower_bound = expansion.iter().take_while(|c| c.is_zero()).count();
    let half_second_derivative = derivatives[2]
        .expansion
        .div(&PadicNumber::from_i64(mu.p, 2, mu.modulus_exp() as i64))?;
    let derived_second = if order_lower_bound >= 2 {
        Some(second_derivative_via_derived_measure(mu)?)
    } else {
        None
    };
    let gs = gs_check(mu, tate, &zero_value)?;
    let verdict = verdict_line(mu.p, &expansion, order_lower_bound, rank);
    let prediction = match lambda_inputs {
        Some(li) => {
            let lambda = curve::lambda_bk(li.ord_c0, &li.alpha, &li.height, tate)?;
            let predicted_height = if lambda.value.is_zero() {
                None
            } else {
                Some(lambda.value.mul(&half_second_derivative)?.neg())
            };
            Some(DerivedPrediction {
                lambda,
                predicted_height,
            })
        }
        None => None,
    };
    Ok(ExceptionalReport {
        value_at_one,
        derivatives,
        expansion,
        order_lower_bound,
        half_second_derivative,
        derived_second,
        gs,
        rank,
        verdict,
        prediction,
    })
}

fn verdict_line(p: Prime, expansion: &[PadicNumber], bound: usize, rank: RankSource) -> String {
    let Some(r) = rank.rank() else {
        return format!(
            "analytic rank not supplied; ord >= {bound} verified at the available precision"
        );
    };
    let predicted = 1 + r as usize;
    let prec = expansion
        .iter()
        .take(predicted.min(expansion.len()))
        .map(|c| c.precision())
        .min()
        .unwrap_or(0);
    if bound >= predicted {
        let mut line = format!("consistent with ord >= {predicted} at precision {}^{prec}", p.get());
        if let Some(c) = expansion.get(predicted) {
            if !c.is_zero() {
                line.push_str(&format!(
                    "; c_{predicted} is nonzero at precision {}^{}",
                    p.get(),
                    c.precision()
                ));
            }
        }
        line
    } else {
        let nonzero = expansion[bound].precision();
        format!(
            "inconsistent at precision {}^{nonzero}: c_{bound} is nonzero but ord >= {predicted} is predicted",
            p.get()
        )
    }
}

/// Shortcut: eigen-symbol, measure and Tate data for a curve.
pub fn curve_measure(
    e: &EllipticCurveQ,
    conductor: Option<u64>,
    p: u64,
    n_max: u32,
    modulus_exp: u32,
) -> Result<(ManinSpace, EigenSymbol, MttMeasure, TateData), LpError> {
    let (space, sym) = modsym::eigen_symbol(e, conductor)?;
    let mu = build_mtt(e, &space, &sym, p, n_max, modulus_exp)?;
    let tate = curve::tate_parameter(e, p, modulus_exp as i64)?;
    Ok((space, sym, mu, tate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stirling_rows() {
        let s = stirling2(3);
        assert_eq!(s, vec![0, 1, 3, 1].into_iter().map(BigInt::from).collect::<Vec<_>>());
        assert_eq!(stirling2(0), vec![BigInt::one()]);
    }

    #[test]
    fn residue_classes_partition_units() {
        let p = Prime::new(5).unwrap();
        let classes = residue_classes(p, 2);
        let mut all: Vec<i64> = classes.concat();
        all.sort_unstable();
        let units: Vec<i64> = (1..125).filter(|a| a % 5 != 0).collect();
        assert_eq!(all, units);
    }

    #[test]
    fn gamma_minus_one_dirac_derivative() {
        let p = Prime::new(5).unwrap();
        let top = GroupRingElement::dirac(p, 3, 6, 0).mul_gamma_minus_one();
        let mu = MttMeasure::synthetic(MeasureTower::from_top(top));
        let d = lp_derivatives(&mu, 1).unwrap();
        let ell = padic::log_gamma(p, 6);
        assert!(d[0].riemann.is_zero() && d[0].expansion.is_zero());
        assert!(d[1].riemann.agrees_with(&ell).unwrap());
        assert!(d[1].expansion.agrees_with(&ell).unwrap());
    }
}
