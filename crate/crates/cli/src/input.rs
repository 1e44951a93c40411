//! Curve input from flags or a JSON file.

use std::path::Path;

use exzero_core::curve::EllipticCurveQ;
use exzero_core::{PadicNumber, Prime};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveInput {
    pub a: [i64; 5],
    #[serde(default)]
    pub conductor: Option<u64>,
    pub p: u64,
    /// Working precision `M`: values are reported modulo `p^M`.
    pub prec: u32,
    pub n_max: u32,
}

/// The JSON file layout. Fields given on the command line take precedence.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveFile {
    a1: i64,
    a2: i64,
    a3: i64,
    a4: i64,
    a6: i64,
    conductor: Option<u64>,
    p: Option<u64>,
    prec: Option<u32>,
    n_max: Option<u32>,
}

pub fn parse_coefficients(text: &str) -> Result<[i64; 5], CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 5 {
        return Err(CliError::Input(format!("expected five comma-separated coefficients, got {}", parts.len())));
    }
    let mut a = [0i64; 5];
    for (slot, part) in a.iter_mut().zip(&parts) {
        *slot = part.parse().map_err(|_| CliError::Input(format!("not an integer coefficient: {part:?}")))?;
    }
    Ok(a)
}

pub struct CurveFlags<'a> {
    pub curve: Option<&'a str>,
    pub curve_file: Option<&'a Path>,
    pub conductor: Option<u64>,
    pub p: Option<u64>,
    pub prec: Option<u32>,
    pub n_max: Option<u32>,
}

impl CurveInput {
    pub fn resolve(flags: CurveFlags<'_>) -> Result<Self, CliError> {
        let file = match flags.curve_file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
                Some(serde_json::from_str::<CurveFile>(&text).map_err(|e| CliError::Input(format!("bad curve file: {e}")))?)
            }
            None => None,
        };
        let a = match (flags.curve, &file) {
            (Some(text), _) => parse_coefficients(text)?,
            (None, Some(f)) => [f.a1, f.a2, f.a3, f.a4, f.a6],
            (None, None) => return Err(CliError::Input("give --curve or --curve-file".into())),
        };
        let from_file = |pick: fn(&CurveFile) -> Option<u64>| file.as_ref().and_then(pick);
        let p = flags
            .p
            .or_else(|| from_file(|f| f.p))
            .ok_or_else(|| CliError::Input("the prime --p is required".into()))?;
        let prec = flags.prec.or_else(|| file.as_ref().and_then(|f| f.prec)).unwrap_or(8);
        let n_max = flags.n_max.or_else(|| file.as_ref().and_then(|f| f.n_max)).unwrap_or(4);
        let conductor = flags.conductor.or_else(|| from_file(|f| f.conductor));
        let input = Self { a, conductor, p, prec, n_max };
        input.validate()?;
        Ok(input)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.p <= 3 || !exzero_core::padic::is_prime_u64(self.p) {
            return Err(CliError::Input(format!("p = {} must be a prime greater than 3", self.p)));
        }
        if self.prec == 0 || self.n_max == 0 {
            return Err(CliError::Input("precision and tower depth must be positive".into()));
        }
        self.curve()?;
        Ok(())
    }

    pub fn curve(&self) -> Result<EllipticCurveQ, CliError> {
        EllipticCurveQ::from_i64(self.a).map_err(|e| CliError::Input(format!("bad curve: {e}")))
    }

    pub fn prime(&self) -> Prime {
        Prime::new(self.p).expect("validated")
    }
}

/// A `p`-adic number from a decimal integer or fraction `a/b`.
pub fn parse_padic(p: Prime, text: &str, prec: i64) -> Result<PadicNumber, CliError> {
    let r: BigRational = if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| CliError::Input(format!("bad numerator in {text:?}")))?;
        let den: BigInt = den.trim().parse().map_err(|_| CliError::Input(format!("bad denominator in {text:?}")))?;
        if den == BigInt::from(0) {
            return Err(CliError::Input("zero denominator".into()));
        }
        BigRational::new(num, den)
    } else {
        BigRational::from_integer(text.trim().parse().map_err(|_| CliError::Input(format!("not a number: {text:?}")))?)
    };
    PadicNumber::from_rational(p, &r, prec).map_err(|e| CliError::Input(format!("{text}: {e}")))
}
