//! One PASS/FAIL line per acceptance criterion.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{curve, prime};
use exzero_core::curve as ec;
use exzero_core::iwasawa::{self, CoefficientwisePairing, MeasureTower};
use exzero_core::lpfunc::{self, MeasureSource, MttMeasure};
use exzero_core::modsym::{self, linalg};
use exzero_core::{PadicNumber, Prime};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const E11A: [i64; 5] = [0, -1, 1, -10, -20];
const E91B: [i64; 5] = [0, 1, 1, -7, 5];

type Outcome = Result<String, String>;

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn exceptional_zero() -> Outcome {
    let cases: &[(&str, [i64; 5], u64)] =
        &[("11a", E11A, 11), ("14a", [1, 0, 1, 4, -6], 7), ("26a", [1, 0, 1, -5, -8], 13), ("91b", E91B, 7)];
    for &(label, a, p) in cases {
        let (_, _, mu, _) = lpfunc::curve_measure(&curve(a), None, p, 4, 8).map_err(err)?;
        let v = lpfunc::lp_eval(&mu, &PadicNumber::one(prime(p), 8)).map_err(err)?;
        check(v.exact_zero, format!("{label}: not an exact zero"))?;
        check(v.level_values.len() == 5, format!("{label}: expected levels 0..=4"))?;
        check(mu.exact_masses().iter().all(Zero::is_zero), format!("{label}: nonzero integer mass"))?;
    }
    Ok(format!("L_p(E,1) = 0 exactly at levels 0..=4 for {} split curves", cases.len()))
}

fn greenberg_stevens() -> Outcome {
    let (_, _, mu, tate) = lpfunc::curve_measure(&curve(E11A), None, 11, 4, 8).map_err(err)?;
    let MeasureSource::Curve { zero_value, .. } = mu.source().clone() else {
        return Err("measure lost its curve".into());
    };
    check(!zero_value.is_zero(), "[0]^+ vanishes, rank 0 not certified")?;
    let gs = lpfunc::gs_check(&mu, &tate, &zero_value).map_err(err)?;
    check(gs.difference_valuation >= 3, format!("difference valuation {}", gs.difference_valuation))?;
    Ok(format!(
        "11a, p=11: L_p'(1) = {} vs L [0]^+ = {}, difference valuation {}",
        gs.lhs, gs.rhs, gs.difference_valuation
    ))
}

fn rank_one_order() -> Outcome {
    let (_, _, mu, tate) = lpfunc::curve_measure(&curve(E91B), None, 7, 4, 8).map_err(err)?;
    let r = lpfunc::mtt_report(&mu, &tate, Some(1), None).map_err(err)?;
    check(r.expansion[0].is_zero() && r.expansion[1].is_zero(), "c0 or c1 nonzero")?;
    check(r.verdict.starts_with("consistent with ord >= 2"), r.verdict.clone())?;
    Ok(format!(
        "91b, p=7: c0 = {}, c1 = {}, c2 = {}; {}",
        r.expansion[0], r.expansion[1], r.expansion[2], r.verdict
    ))
}

fn tate_round_trip() -> Outcome {
    let cases: &[(&str, [i64; 5], u64)] = &[
        ("11a", E11A, 11),
        ("14a", [1, 0, 1, 4, -6], 7),
        ("15a", [1, 1, 1, -10, -10], 5),
        ("19a", [0, 1, 1, -9, -15], 19),
        ("26a", [1, 0, 1, -5, -8], 13),
        ("37b", [0, 1, 1, -23, -50], 37),
        ("91a", [0, 0, 1, 1, 0], 7),
        ("91b", E91B, 7),
    ];
    for &(label, a, p) in cases {
        let e = curve(a);
        let t = ec::tate_parameter(&e, p, 8).map_err(err)?;
        let j = e.j_invariant();
        let jq = ec::j_of_q(&t.q, 8).map_err(err)?;
        let je = PadicNumber::from_rational(prime(p), &j, 8).map_err(err)?;
        check(jq.difference_valuation(&je).map_err(err)? >= 8, format!("{label}: j(q) != j(E) mod p^8"))?;
        check(Some(-t.ord) == je.valuation(), format!("{label}: ord_p(q) != -v_p(j)"))?;
        check(t.log_q.valuation().is_some(), format!("{label}: log_p(q) is zero"))?;
    }
    Ok(format!("{} multiplicative curves, j(q) = j(E) mod p^8, log_p(q) != 0", cases.len()))
}

fn second_derivative() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..100 {
        let p = prime([5u64, 7, 11][rng.gen_range(0..3)]);
        let level = if p.get() == 11 { 2 } else { 3 };
        let m = rng.gen_range(3..=7);
        let mu = MttMeasure::synthetic(common::random_j2(&mut rng, p, level, m));
        let d = lpfunc::second_derivative_via_derived_measure(&mu).map_err(err)?;
        let direct = lpfunc::lp_derivatives(&mu, 2).map_err(err)?;
        check(d.exact_match, format!("synthetic case {k}: routes differ"))?;
        check(d.value.agrees_with(&direct[2].expansion).map_err(err)?, format!("synthetic case {k}"))?;
    }
    let (_, _, mu, _) = lpfunc::curve_measure(&curve(E91B), None, 7, 4, 8).map_err(err)?;
    let d = lpfunc::second_derivative_via_derived_measure(&mu).map_err(err)?;
    let direct = &lpfunc::lp_derivatives(&mu, 2).map_err(err)?[2].expansion;
    let within = d.value.precision().min(direct.precision());
    check(d.value.difference_valuation(direct).map_err(err)? >= within, "91b: routes differ")?;
    Ok(format!(
        "100 synthetic J^2-towers exact; 91b: {} vs {} (agree to precision {within})",
        d.value, direct
    ))
}

fn derivative_calculus() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let setting = |rng: &mut ChaCha8Rng| -> (Prime, u32, u32) {
        let p = prime([5u64, 7, 11][rng.gen_range(0..3)]);
        let level = if p.get() == 11 { rng.gen_range(1..=2) } else { rng.gen_range(1..=3) };
        (p, level, rng.gen_range(2..=6))
    };
    let mut failures = Vec::new();
    for k in 0..100 {
        let (p, level, m) = setting(&mut rng);
        let t = common::random_augmentation_zero(&mut rng, p, level, m);
        let d = iwasawa::divide_gamma_minus_1(&t).map_err(err)?;
        let l = iwasawa::log_gamma_residue(p, m);
        if (0..=level).any(|n| d.level(n).mul_gamma_minus_one() != t.level(n).scale(&l)) {
            failures.push(format!("division round trip {k}"));
        }
    }
    for k in 0..100 {
        let (p, level, m) = setting(&mut rng);
        let xi = common::random_augmentation_zero(&mut rng, p, level, m);
        let z = MeasureTower::from_top(common::random_element(&mut rng, p, level, m));
        let limit = iwasawa::der_rho(&xi, &z, &CoefficientwisePairing).map_err(err)?;
        let divided = iwasawa::der_rho_via_division(&xi, &z, &CoefficientwisePairing).map_err(err)?;
        if !limit.value.agrees_with(&divided).map_err(err)? {
            failures.push(format!("Der two sides {k}"));
        }
    }
    for k in 0..100 {
        let (p, level, m) = setting(&mut rng);
        let t = common::random_augmentation_zero(&mut rng, p, level, m);
        let d = iwasawa::divide_gamma_minus_1(&t).map_err(err)?;
        let l = iwasawa::log_gamma_residue(p, m);
        for n in 1..=level {
            let e = iwasawa::j_expand(&MeasureTower::from_top(t.level(n).clone()), 2).map_err(err)?;
            let prec = e.coeffs[1].precision();
            let c1 = e.coeffs[1].to_integer().unwrap();
            let ok = e.coeffs[0].is_zero() && (c1 * &l - d.augmentation()).mod_floor(&p.pow(prec as u32)).is_zero();
            if !ok {
                failures.push(format!("mod J^2 congruence {k} at level {n}"));
            }
        }
    }
    check(failures.is_empty(), failures.join(", "))?;
    Ok("division round trip, Der two sides, mod J^2 congruence: 100 cases each, 0 failures".into())
}

fn appendix_suite() -> Outcome {
    let rep = exzero_cohomlab::run_suite(7, 20).map_err(err)?;
    let max_order = rep.outcomes.iter().map(|o| o.max_group_order).max().unwrap_or(0);
    check(max_order <= 16, format!("|G| = {max_order} exceeds 16"))?;
    check(rep.instances >= 20, "fewer than 20 instances")?;
    let failed: Vec<String> = rep.families.iter().filter(|f| !f.pass()).map(|f| f.name.clone()).collect();
    check(failed.is_empty(), format!("failing families: {}", failed.join(", ")))?;
    Ok(format!(
        "{} instances, |G| <= {max_order}, {} families, {} nonzero pairings",
        rep.instances,
        rep.families.len(),
        rep.nonzero_pairings
    ))
}

fn modular_symbols() -> Outcome {
    let e = curve(E11A);
    let (space, sym) = modsym::eigen_symbol(&e, Some(11)).map_err(err)?;
    let basis = space.relation_kernel();
    let mut rows = Vec::new();
    for ell in [2u64, 3, 5, 7] {
        let a = BigRational::from_integer(e.a_ell(ell).into());
        let images: Vec<Vec<BigRational>> = basis
            .iter()
            .map(|b| space.apply_hecke(ell, b).iter().zip(b).map(|(t, x)| t - &a * x).collect())
            .collect();
        for x in 0..space.len() {
            rows.push((0..basis.len()).map(|k| images[k][x].clone()).collect());
        }
    }
    let dim = linalg::kernel(rows, basis.len()).len();
    check(dim == 1, format!("eigenspace dimension {dim}"))?;
    for rel in space.relations() {
        let s: BigRational = rel.iter().map(|&(i, k)| &sym.values()[i] * BigRational::from_integer(k.into())).sum();
        check(s.is_zero(), "a Manin relation fails")?;
    }
    for ell in [2u64, 3, 5, 7, 11, 13, 17, 19] {
        let a = BigRational::from_integer(e.a_ell(ell).into());
        let scaled: Vec<BigRational> = sym.values().iter().map(|v| &a * v).collect();
        check(space.apply_hecke(ell, sym.values()) == scaled, format!("T_{ell} not equivariant"))?;
    }
    let zero = modsym::symbol_value(&space, &sym, &BigRational::zero());
    check(zero == BigRational::new(1.into(), 5.into()), format!("[0]^+ = {zero}"))?;
    let c = sym.certificate();
    Ok(format!(
        "eigenspace dim 1, {} relations exact, Hecke exact for l <= 19, [0]^+ = {zero} (scale {}, cycle content {}, components {})",
        space.relations().len(),
        c.scale,
        c.cycle_content,
        c.real_components
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("exceptional zero", exceptional_zero),
        ("greenberg-stevens", greenberg_stevens),
        ("rank-one order bound", rank_one_order),
        ("tate round trip", tate_round_trip),
        ("second derivative two routes", second_derivative),
        ("derivative calculus", derivative_calculus),
        ("appendix suite", appendix_suite),
        ("modular symbols N=11", modular_symbols),
    ];
    let mut all = true;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail} [{secs:.1}s]", k + 1),
            Err(why) => {
                all = false;
                println!("FAIL {}. {name}: {why} [{secs:.1}s]", k + 1);
            }
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
