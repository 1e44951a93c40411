//! Text rendering of computation records.

use std::fmt::Write;

use exzero_core::curve::{self, EllipticCurveQ, LambdaBk, TateData};
use exzero_core::lpfunc::{DerivativePair, ExceptionalReport, GsRecord, LpValue, RankSource};
use exzero_core::PadicNumber;
use num_rational::BigRational;
use serde::Serialize;

use crate::input::CurveInput;
use crate::CliError;

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn header(input: &CurveInput) -> String {
    let a = input.a;
    format!("E = [{},{},{},{},{}], p = {}\n", a[0], a[1], a[2], a[3], a[4], input.p)
}

#[derive(Debug, Serialize)]
pub struct TateReport {
    pub tate: TateData,
    pub j_curve: BigRational,
    pub j_of_q: PadicNumber,
    /// `v(j(q) - j(E))`.
    pub j_agreement: i64,
    pub target_precision: i64,
    pub ord_matches: bool,
    pub l_invariant_nonzero: bool,
}

impl TateReport {
    pub fn new(input: &CurveInput, e: &EllipticCurveQ, tate: TateData) -> Result<Self, CliError> {
        let prec = input.prec as i64;
        let err = |e: &dyn std::fmt::Display| CliError::Compute(e.to_string());
        let j_curve = e.j_invariant();
        let j_q = curve::j_of_q(&tate.q, prec).map_err(|e| err(&e))?;
        let j_e = PadicNumber::from_rational(tate.p, &j_curve, prec).map_err(|e| err(&e))?;
        let j_agreement = j_q.difference_valuation(&j_e).map_err(|e| err(&e))?;
        let ord_matches = j_e.valuation().map(|v| -v) == Some(tate.ord);
        let l_invariant_nonzero = !tate.l_invariant.is_zero();
        Ok(TateReport {
            tate,
            j_curve,
            j_of_q: j_q,
            j_agreement,
            target_precision: prec,
            ord_matches,
            l_invariant_nonzero,
        })
    }

    pub fn pass(&self) -> bool {
        self.j_agreement >= self.target_precision && self.ord_matches && self.l_invariant_nonzero
    }

    pub fn render_with(&self, input: &CurveInput) -> String {
        let mut s = header(input);
        s.push_str(&self.render());
        s
    }

    pub fn render(&self) -> String {
        let t = &self.tate;
        let p = t.p.get();
        let mut s = String::new();
        let kind = if t.split { "split" } else { "nonsplit" };
        let _ = writeln!(s, "reduction: {kind} multiplicative");
        let _ = writeln!(s, "ord_p(q) = {}", t.ord);
        let _ = writeln!(s, "q = {}", t.q);
        let _ = writeln!(s, "u = q / p^ord = {}", t.u);
        let _ = writeln!(s, "log_p(q) = {}", t.log_q);
        let _ = writeln!(s, "L-invariant = {}", t.l_invariant);
        let _ = writeln!(s, "working precision {p}^{} after {} escalations", t.working_precision, t.escalations);
        let _ = writeln!(
            s,
            "{} j(q) = j(E) mod {p}^{} (agreement {p}^{})",
            verdict(self.j_agreement >= self.target_precision),
            self.target_precision,
            self.j_agreement
        );
        let _ = writeln!(s, "{} ord_p(q) = -v_p(j(E))", verdict(self.ord_matches));
        let _ = writeln!(s, "{} Saint-Etienne: L-invariant is nonzero", verdict(self.l_invariant_nonzero));
        s
    }
}

pub fn lp_value(input: &CurveInput, s_text: &str, v: &LpValue) -> String {
    let mut s = header(input);
    if v.exact_zero {
        let _ = writeln!(
            s,
            "L_p(E, {s_text}) = 0 exactly at all {} levels (every level mass is the integer 0)",
            v.level_values.len()
        );
        return s;
    }
    let _ = writeln!(s, "L_p(E, {s_text}) = {}", v.value);
    for (n, lv) in v.level_values.iter().enumerate() {
        let _ = writeln!(s, "  level {n}: {lv}");
    }
    match v.stabilization {
        Some(n) => {
            let _ = writeln!(s, "stable from level {n}");
        }
        None => {
            let _ = writeln!(s, "did not stabilize within the tower");
        }
    }
    s
}

pub fn derivatives(input: &CurveInput, ds: &[DerivativePair]) -> String {
    let mut s = header(input);
    for d in ds {
        let _ = writeln!(s, "r = {}", d.r);
        let _ = writeln!(s, "  Riemann sums:    {}", d.riemann);
        let _ = writeln!(s, "  J-adic expansion: {}", d.expansion);
        let _ = writeln!(s, "  agreement: p^{}", d.agreement);
    }
    s
}

pub fn gs(input: &CurveInput, g: &GsRecord) -> String {
    let mut s = header(input);
    let _ = writeln!(s, "[0]^+ = {}", g.zero_value);
    let _ = writeln!(s, "L_p'(1) (expansion) = {}", g.lhs);
    let _ = writeln!(s, "L_p'(1) (Riemann)   = {}", g.lhs_riemann);
    let _ = writeln!(s, "L-invariant [0]^+   = {}", g.rhs);
    if g.degenerate {
        let _ = writeln!(s, "{} [0]^+ = 0 and both sides vanish", verdict(g.pass));
    } else {
        let _ = writeln!(
            s,
            "{} difference valuation {} at achieved precision {}",
            verdict(g.pass),
            g.difference_valuation,
            g.achieved_precision
        );
    }
    s
}

pub fn lambda(l: &LambdaBk) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "lambda_BK = {}", l.value);
    let _ = writeln!(s, "h ord_p(q) - alpha^2 L = {}", l.regulator_defect);
    if l.regulator_vanishes {
        let _ = writeln!(s, "regulator defect vanishes: lambda_BK = 0 at this precision");
    }
    s
}

pub fn mtt(input: &CurveInput, r: &ExceptionalReport) -> String {
    let mut s = header(input);
    if r.value_at_one.exact_zero {
        let _ = writeln!(s, "L_p(E, 1) = 0 exactly");
    } else {
        let _ = writeln!(s, "L_p(E, 1) = {}", r.value_at_one.value);
    }
    for (i, c) in r.expansion.iter().enumerate() {
        let _ = writeln!(s, "c{i} = {c}");
    }
    for d in &r.derivatives {
        let _ = writeln!(s, "L_p^({})(1) = {} (Riemann agreement p^{})", d.r, d.expansion, d.agreement);
    }
    let _ = writeln!(s, "(1/2) L_p''(1) = {}", r.half_second_derivative);
    if let Some(d) = &r.derived_second {
        let _ = writeln!(
            s,
            "second derivative via derived measure = {} ({})",
            d.value,
            if d.exact_match { "exact match" } else { "agreement within precision" }
        );
    }
    let rank = match r.rank {
        RankSource::UserSupplied(k) => format!("{k} (supplied)"),
        RankSource::InferredZero => "0 ([0]^+ nonzero)".to_string(),
        RankSource::Unknown => "unknown".to_string(),
    };
    let _ = writeln!(s, "analytic rank: {rank}");
    let _ = writeln!(s, "ord_(s=1) L_p >= {}", r.order_lower_bound);
    let _ = writeln!(s, "verdict: {}", r.verdict);
    let _ = writeln!(s, "{} first derivative matches L-invariant [0]^+", verdict(r.gs.pass));
    if let Some(pred) = &r.prediction {
        s.push_str(&lambda(&pred.lambda));
        match &pred.predicted_height {
            Some(h) => {
                let _ = writeln!(s, "height implied by -lambda_BK (1/2) L_p''(1) = {h}");
            }
            None => {
                let _ = writeln!(s, "no height prediction: lambda_BK vanishes");
            }
        }
    }
    s
}
