//! `exzero`: exceptional-zero computations for split multiplicative curves.

mod cache;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use exzero_core::curve::{self, EllipticCurveQ, TateData};
use exzero_core::lpfunc::{self, LambdaInputs, MttMeasure};
use exzero_core::modsym::{self, EigenSymbol, ManinSpace};
use thiserror::Error;

use cache::{Cache, CacheEntry, CacheKey, Miss};
use input::{CurveFlags, CurveInput};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("computation failed: {0}")]
    Compute(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

fn compute<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

#[derive(Parser)]
#[command(name = "exzero", version, about = "p-adic L-functions at exceptional zeros")]
struct Cli {
    /// Print a JSON record instead of the text report.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CurveArgs {
    /// Weierstrass coefficients a1,a2,a3,a4,a6.
    #[arg(long, allow_hyphen_values = true)]
    curve: Option<String>,
    /// JSON file with a1..a6 and optionally conductor, p, prec, n_max.
    #[arg(long)]
    curve_file: Option<PathBuf>,
    #[arg(long)]
    conductor: Option<u64>,
    #[arg(long)]
    p: Option<u64>,
    /// Precision M: results are reported modulo p^M. Default 8.
    #[arg(long)]
    prec: Option<u32>,
    /// Depth of the measure tower. Default 4.
    #[arg(long)]
    n_max: Option<u32>,
    /// Modular-symbol cache directory; falls back to $EXZERO_CACHE_DIR.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

impl CurveArgs {
    fn resolve(&self) -> Result<CurveInput, CliError> {
        CurveInput::resolve(CurveFlags {
            curve: self.curve.as_deref(),
            curve_file: self.curve_file.as_deref(),
            conductor: self.conductor,
            p: self.p,
            prec: self.prec,
            n_max: self.n_max,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Tate parameter, L-invariant and the j-invariant round trip.
    Tate(CurveArgs),
    /// Evaluate L_p(E, s) at a point with s - 1 in Z_p.
    LpEval {
        #[command(flatten)]
        curve: CurveArgs,
        /// Integer or fraction a/b.
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        s: String,
    },
    /// Derivatives at s = 1 by Riemann sums and by the J-adic expansion.
    LpDeriv {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, default_value_t = 2)]
        r: u32,
    },
    /// First derivative against (log q / ord q) [0]^+.
    GsCheck(CurveArgs),
    /// Full exceptional-zero report.
    MttReport {
        #[command(flatten)]
        curve: CurveArgs,
        /// Analytic rank, if known.
        #[arg(long)]
        rank: Option<u32>,
        #[command(flatten)]
        lambda: LambdaArgs,
    },
    /// (1 - 1/p)^{-1} log_p(u_E).
    HeightUnit(CurveArgs),
    /// lambda_BK from a supplied alpha and height.
    LambdaBk {
        #[command(flatten)]
        curve: CurveArgs,
        #[command(flatten)]
        lambda: LambdaArgs,
    },
    /// Randomized checks over finite Selmer-complex instances.
    CohomlabSuite {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        instances: usize,
    },
}

#[derive(Args, Clone)]
struct LambdaArgs {
    /// alpha as an integer or fraction.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// p-adic height as an integer or fraction.
    #[arg(long, allow_hyphen_values = true)]
    height: Option<String>,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    ord_c0: i64,
}

impl LambdaArgs {
    fn parse(&self, input: &CurveInput) -> Result<Option<LambdaInputs>, CliError> {
        match (&self.alpha, &self.height) {
            (None, None) => Ok(None),
            (Some(a), Some(h)) => {
                let p = input.prime();
                let prec = input.prec as i64;
                Ok(Some(LambdaInputs {
                    ord_c0: self.ord_c0,
                    alpha: input::parse_padic(p, a, prec)?,
                    height: input::parse_padic(p, h, prec)?,
                }))
            }
            _ => Err(CliError::Input("--alpha and --height go together".into())),
        }
    }
}

fn symbol_for(input: &CurveInput, e: &EllipticCurveQ, cache_dir: Option<&std::path::Path>) -> Result<(ManinSpace, EigenSymbol), CliError> {
    let key = CacheKey { coefficients: input.a, conductor: input.conductor };
    let cache = Cache::from_flag_or_env(cache_dir);
    if let Some(c) = &cache {
        match c.load(&key) {
            Ok(entry) => {
                eprintln!("cache: hit {}", c.path_for(&key).display());
                return Ok((entry.space, entry.symbol));
            }
            Err(Miss::Absent) => {}
            Err(miss) => eprintln!("cache: {miss:?}, recomputing"),
        }
    }
    let (space, symbol) = modsym::eigen_symbol(e, input.conductor).map_err(modsym_error)?;
    if let Some(c) = &cache {
        let entry = CacheEntry { key, space, symbol };
        match c.store(&entry) {
            Ok(path) => eprintln!("cache: stored {}", path.display()),
            Err(err) => eprintln!("cache: could not store ({err}), continuing"),
        }
        return Ok((entry.space, entry.symbol));
    }
    Ok((space, symbol))
}

struct Loaded {
    input: CurveInput,
    mu: MttMeasure,
    tate: TateData,
}

fn load(args: &CurveArgs) -> Result<Loaded, CliError> {
    let input = args.resolve()?;
    let e = input.curve()?;
    let (space, symbol) = symbol_for(&input, &e, args.cache_dir.as_deref())?;
    let mu = lpfunc::build_mtt(&e, &space, &symbol, input.p, input.n_max, input.prec).map_err(lp_error)?;
    let tate = curve::tate_parameter(&e, input.p, input.prec as i64).map_err(curve_error)?;
    Ok(Loaded { input, mu, tate })
}

/// Replace every serialized p-adic number by its printed form and precision.
fn annotate_padics(v: &mut serde_json::Value) {
    use serde_json::Value;
    match v {
        Value::Object(map) => {
            let is_padic = map.len() == 4 && ["p", "val", "unit", "prec"].iter().all(|k| map.contains_key(*k));
            if is_padic {
                if let Ok(x) = serde_json::from_value::<exzero_core::PadicNumber>(Value::Object(map.clone())) {
                    *v = serde_json::json!({
                        "p": x.prime().get(),
                        "display": x.to_string(),
                        "valuation": x.valuation(),
                        "precision": x.precision(),
                    });
                    return;
                }
            }
            map.values_mut().for_each(annotate_padics);
        }
        Value::Array(items) => items.iter_mut().for_each(annotate_padics),
        _ => {}
    }
}

fn emit<T: serde::Serialize>(json: bool, record: &T, text: String) {
    use std::io::Write;
    let out = if json {
        let mut v = serde_json::to_value(record).expect("records serialize");
        annotate_padics(&mut v);
        format!("{}\n", serde_json::to_string_pretty(&v).expect("values serialize"))
    } else {
        text
    };
    // A closed pipe is not an error worth reporting.
    let _ = std::io::stdout().lock().write_all(out.as_bytes());
}

fn curve_error(e: curve::CurveError) -> CliError {
    use curve::CurveError::*;
    match e {
        Singular | NotMinimal(_) | BadPrime(_) | NotMultiplicative(_) | BadPrecision(_) | ZeroAlpha | ZeroHeight => {
            CliError::Input(e.to_string())
        }
        other => compute(other),
    }
}

fn modsym_error(e: modsym::ModSymError) -> CliError {
    use modsym::ModSymError::*;
    match e {
        Curve(c) => curve_error(c),
        ZeroLevel | LevelTooLarge(_) | ConductorMismatch { .. } | NotSemistable => CliError::Input(e.to_string()),
        other => compute(other),
    }
}

fn lp_error(e: lpfunc::LpError) -> CliError {
    use lpfunc::LpError::*;
    match e {
        Curve(c) => curve_error(c),
        ModSym(m) => modsym_error(m),
        NotSplit { .. } | OutsideConvergence | LevelTooDeep(_) | BadParameters => CliError::Input(e.to_string()),
        other => compute(other),
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let json = cli.json;
    match cli.command {
        Command::Tate(args) => {
            let input = args.resolve()?;
            let e = input.curve()?;
            let tate = curve::tate_parameter(&e, input.p, input.prec as i64).map_err(curve_error)?;
            let record = report::TateReport::new(&input, &e, tate)?;
            let ok = record.pass();
            emit(json, &record, record.render_with(&input));
            Ok(ok)
        }
        Command::LpEval { curve, s } => {
            let l = load(&curve)?;
            let s_val = input::parse_padic(l.input.prime(), &s, l.input.prec as i64)?;
            let value = lpfunc::lp_eval(&l.mu, &s_val).map_err(lp_error)?;
            emit(json, &value, report::lp_value(&l.input, &s, &value));
            Ok(true)
        }
        Command::LpDeriv { curve, r } => {
            let l = load(&curve)?;
            let d = lpfunc::lp_derivatives(&l.mu, r).map_err(lp_error)?;
            emit(json, &d, report::derivatives(&l.input, &d));
            Ok(true)
        }
        Command::GsCheck(args) => {
            let l = load(&args)?;
            let zero = zero_value(&l);
            let gs = lpfunc::gs_check(&l.mu, &l.tate, &zero).map_err(lp_error)?;
            emit(json, &gs, report::gs(&l.input, &gs));
            Ok(gs.pass)
        }
        Command::MttReport { curve, rank, lambda } => {
            let l = load(&curve)?;
            let li = lambda.parse(&l.input)?;
            let rep = lpfunc::mtt_report(&l.mu, &l.tate, rank, li.as_ref()).map_err(lp_error)?;
            emit(json, &rep, report::mtt(&l.input, &rep));
            Ok(rep.gs.pass && !rep.verdict.starts_with("inconsistent"))
        }
        Command::HeightUnit(args) => {
            let input = args.resolve()?;
            let e = input.curve()?;
            let h = curve::height_unit_class(&e, input.p, input.prec as i64).map_err(curve_error)?;
            emit(json, &h, format!("(1 - 1/p)^-1 log_p(u_E) = {h}\n"));
            Ok(true)
        }
        Command::LambdaBk { curve, lambda } => {
            let input = curve.resolve()?;
            let e = input.curve()?;
            let li = lambda.parse(&input)?.ok_or_else(|| CliError::Input("lambda-bk needs --alpha and --height".into()))?;
            let tate = curve::tate_parameter(&e, input.p, input.prec as i64).map_err(curve_error)?;
            let lam = curve::lambda_bk(li.ord_c0, &li.alpha, &li.height, &tate).map_err(curve_error)?;
            emit(json, &lam, report::lambda(&lam));
            Ok(true)
        }
        Command::CohomlabSuite { seed, instances } => {
            if instances == 0 {
                return Err(CliError::Input("--instances must be positive".into()));
            }
            let rep = exzero_cohomlab::run_suite(seed, instances).map_err(compute)?;
            emit(json, &rep, format!("{rep}\n"));
            Ok(rep.all_pass())
        }
    }
}

fn zero_value(l: &Loaded) -> num_rational::BigRational {
    match l.mu.source() {
        lpfunc::MeasureSource::Curve { zero_value, .. } => zero_value.clone(),
        lpfunc::MeasureSource::Synthetic => num_rational::BigRational::from_integer(0.into()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("exzero: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
