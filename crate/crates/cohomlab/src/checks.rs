//! Structural checks on an instance: the long exact sequences of the Selmer
//! complex, the acyclic complex `C_+`, the comparison map `j_p^-` and
//! naturality of the Bockstein.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cochain::Bar;
use crate::complex::{check_exact_sequence, cone_sequence_check, induced_image_length, ChainMap, ComplexData, JointCheck, SequenceTerm};
use crate::matrix::Mat;
use crate::pairing::{random_combination, vec_sub, Workspace};
use crate::ring::ChainRing;
use crate::selmer::{assemble, bar_dim, complete_basis, pointwise, InstanceSides, PointwiseMap, SelmerInstance, Side};
use crate::{CohomError, ResourceLimits};

/// Exactness of `H^{-1}(U^-) -> H̃^0 -> H^0(G) -> H^0(U^-) -> H̃^1 -> H^1(G) -> H^1(U^-)`.
pub fn selmer_sequence(ring: &ChainRing, side: &Side) -> Result<Vec<JointCheck>, CohomError> {
    let all = side.all_places();
    let sel = side.selmer_complex();
    let glob = side.global_complex();
    let um = side.uminus_complex(&all);
    let terms = [
        SequenceTerm { complex: &um, degree: -1 },
        SequenceTerm { complex: &sel, degree: 0 },
        SequenceTerm { complex: &glob, degree: 0 },
        SequenceTerm { complex: &um, degree: 0 },
        SequenceTerm { complex: &sel, degree: 1 },
        SequenceTerm { complex: &glob, degree: 1 },
        SequenceTerm { complex: &um, degree: 1 },
    ];
    let maps = [
        side.boundary_map(0),
        side.projection(0),
        side.local_restriction(0, true),
        side.boundary_map(1),
        side.projection(1),
        side.local_restriction(1, true),
    ];
    let labels: Vec<String> = ["H^-1(U-)", "H~^0", "H^0(G)", "H^0(U-)", "H~^1", "H^1(G)", "H^1(U-)"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    check_exact_sequence(ring, &terms, &maps, &labels)
}

/// The comparison of `H̃^1` with the strict Selmer group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrictSelmerReport {
    pub extended_length: u64,
    pub strict_length: u64,
    /// Length of the image of `H̃^1 -> H^1(G)`.
    pub image_length: u64,
    /// `len H^0(U^-_p)` and `len H^0(G_p, F^- X)`.
    pub local_quotient_lengths: (u64, u64),
    pub joints: Vec<JointCheck>,
    pub exact: bool,
    /// `H̃^1` is strictly larger than the strict Selmer group.
    pub strictly_larger: bool,
}

/// `H^0(G) -> H^0(U^-) -> H̃^1 -> Sel_str -> 0`, with `Sel_str = ker(H^1(G) -> H^1(U^-))`.
pub fn strict_selmer_sequence(ring: &ChainRing, side: &Side, designated: usize) -> Result<StrictSelmerReport, CohomError> {
    let joints = selmer_sequence(ring, side)?;
    let all = side.all_places();
    let sel = side.selmer_complex();
    let glob = side.global_complex();
    let um = side.uminus_complex(&all);
    let h_sel = sel.cohomology(ring, 1)?;
    let h_glob = glob.cohomology(ring, 1)?;
    let h_um = um.cohomology(ring, 1)?;
    let image_length = induced_image_length(ring, &side.projection(1), &h_sel, &h_glob);
    let out = induced_image_length(ring, &side.local_restriction(1, true), &h_glob, &h_um);
    let strict_length = h_glob.length() - out;
    let up = side.uminus_complex(&[designated]).cohomology_length(ring, 0)?;
    let minus = minus_complex(ring, side, designated).cohomology_length(ring, 0)?;
    let tail_ok = joints.iter().filter(|j| j.label == "H^0(U-)" || j.label == "H~^1").all(|j| j.exact);
    Ok(StrictSelmerReport {
        extended_length: h_sel.length(),
        strict_length,
        image_length,
        local_quotient_lengths: (up, minus),
        exact: tail_ok && image_length == strict_length && up == minus,
        strictly_larger: h_sel.length() > strict_length,
        joints,
    })
}

/// Pieces of the decomposition `X = F^+ ⊕ complement` at a Greenberg place.
struct Splitting {
    /// First `k` rows of `T^{-1}`.
    onto_plus: Mat,
    /// Last `r - k` rows of `T^{-1}`: the projection `ι^-`.
    onto_minus: Mat,
    complement: Mat,
    minus_bar: Bar,
}

fn splitting(ring: &ChainRing, side: &Side, place: usize) -> Splitting {
    let loc = &side.locals[place];
    let basis = &loc.plus.basis;
    let (t, t_inv) = complete_basis(ring, basis).expect("validated");
    let (r, k) = (basis.rows(), basis.cols());
    let top: Vec<usize> = (0..k).collect();
    let bottom: Vec<usize> = (k..r).collect();
    let rows_of = |idx: &[usize]| t_inv.transpose().select_columns(idx).transpose();
    let onto_plus = rows_of(&top);
    let onto_minus = rows_of(&bottom);
    let complement = t.select_columns(&bottom);
    let sub = loc.bar.subgroup();
    let actions = (0..sub.order())
        .map(|pos| onto_minus.mul(ring, &loc.bar.action_at(pos).mul(ring, &complement)))
        .collect();
    let minus_bar = Bar::from_actions(ring, sub, r - k, actions);
    Splitting { onto_plus, onto_minus, complement, minus_bar }
}

/// `C(G_p, F^- X)` in degrees `0..=2`.
pub fn minus_complex(ring: &ChainRing, side: &Side, place: usize) -> ComplexData {
    splitting(ring, side, place).minus_bar.complex(2)
}

fn plus_bar(side: &Side, place: usize) -> Result<&Bar, CohomError> {
    side.locals[place]
        .plus
        .bar
        .as_ref()
        .ok_or_else(|| CohomError::InvalidInstance("the place does not carry a Greenberg condition".into()))
}

/// `C_+ = Cone(-id)` on `C(G_p, F^+)`: `C_+^i = C^{i+1} ⊕ C^i`,
/// `d(a, b) = (-d a, -a + d b)`, in degrees `-1..=2`.
pub fn plus_cone(ring: &ChainRing, side: &Side, place: usize) -> Result<ComplexData, CohomError> {
    let bar = plus_bar(side, place)?;
    let dim = |i: i32| bar_dim(bar, i);
    let diff = |i: i32| if i < 0 { Mat::zeros(dim(i + 1), 0) } else { bar.differential(i as usize) };
    let ranks = (-1..=2).map(|i| dim(i + 1) + dim(i)).collect();
    let diffs = (-1..2)
        .map(|i| {
            let blocks = vec![
                (0, 0, diff(i + 1).neg(ring)),
                (1, 0, Mat::identity(dim(i + 1)).neg(ring)),
                (1, 1, diff(i)),
            ];
            assemble(ring, &[dim(i + 2), dim(i + 1)], &[dim(i + 1), dim(i)], blocks)
        })
        .collect();
    ComplexData::new(ring, -1, ranks, diffs)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasiIsoReport {
    /// Per degree `-1..=1`: `(len H(U^-_p), len H(C(F^-)), len of the image)`.
    pub lengths: Vec<(i32, u64, u64, u64)>,
    pub inverse_is_section: bool,
    pub inverse_is_retraction: bool,
    pub plus_cone_acyclic: bool,
    pub plus_cone_maps: bool,
    pub composite_vanishes: bool,
    pub factors_projection: bool,
}

impl QuasiIsoReport {
    pub fn is_isomorphism(&self) -> bool {
        self.lengths.iter().all(|&(_, a, b, im)| a == b && im == b) && self.inverse_is_section && self.inverse_is_retraction
    }
}

/// Checks `C_+` acyclicity, `(id, i^+): C_+ -> U^-_p`, and that
/// `j = (0, ι^-)` is a quasi-isomorphism `U^-_p -> C(G_p, F^-)` with an explicit inverse.
pub fn comparison_check(ring: &ChainRing, side: &Side, place: usize) -> Result<QuasiIsoReport, CohomError> {
    let sp = splitting(ring, side, place);
    let loc = &side.locals[place];
    let pb = plus_bar(side, place)?;
    let um = side.uminus_complex(&[place]);
    let target = sp.minus_bar.complex(2);
    let j_at = |i: i32| -> Mat {
        if i < 0 {
            return Mat::zeros(0, um.rank(i));
        }
        let blocks = vec![(0, 1, loc.bar.pointwise(&sp.onto_minus, i as usize))];
        assemble(ring, &[bar_dim(&sp.minus_bar, i)], &[bar_dim(pb, i + 1), bar_dim(&loc.bar, i)], blocks)
    };
    let j_maps: Vec<Mat> = (-1..=2).map(j_at).collect();
    let target_shifted = ComplexData::new(
        ring,
        -1,
        std::iter::once(0).chain((0..=2).map(|i| target.rank(i))).collect(),
        std::iter::once(Mat::zeros(target.rank(0), 0)).chain((0..2).map(|i| target.differential(i))).collect(),
    )?;
    let j = ChainMap::new(ring, &um, &target_shifted, -1, j_maps.clone())?;
    let mut lengths = Vec::new();
    let mut section = true;
    let mut retraction = true;
    for i in -1..=1 {
        let hs = um.cohomology(ring, i)?;
        let ht = target_shifted.cohomology(ring, i)?;
        let im = induced_image_length(ring, &j.at(i, &um, &target_shifted), &hs, &ht);
        lengths.push((i, hs.length(), ht.length(), im));
        if i < 0 {
            continue;
        }
        let iu = i as usize;
        let inverse = |c: &[u64]| -> Option<Vec<u64>> {
            let lifted = pointwise(ring, &sp.complement, sp.minus_bar.tuples(iu), c);
            let dl = loc.bar.apply_differential(iu, &lifted);
            let u = pointwise(ring, &sp.onto_plus, loc.bar.tuples(iu + 1), &dl);
            if loc.plus.inclusion(&loc.bar, i + 1).apply(ring, &u) != dl {
                return None;
            }
            let mut v = u;
            v.extend(lifted);
            Some(v)
        };
        for c in ht.representatives() {
            match inverse(c) {
                Some(v) if hs.is_cocycle(&v) && j_maps[(i + 1) as usize].apply(ring, &v) == *c => {}
                _ => section = false,
            }
        }
        for x in hs.representatives() {
            let back = j_maps[(i + 1) as usize].apply(ring, x);
            match inverse(&back) {
                Some(v) if hs.is_coboundary(&vec_sub(ring, &v, x)) => {}
                _ => retraction = false,
            }
        }
    }
    let cplus = plus_cone(ring, side, place)?;
    let plus_cone_acyclic = (-1..=1).map(|i| cplus.cohomology_length(ring, i)).collect::<Result<Vec<_>, _>>()?.iter().all(|&l| l == 0);
    let incl: Vec<Mat> = (-1..=2)
        .map(|i| {
            let (a, b) = (bar_dim(pb, i + 1), bar_dim(pb, i));
            let blocks = vec![(0, 0, Mat::identity(a)), (1, 1, loc.plus.inclusion(&loc.bar, i).clone())];
            let blocks = if i < 0 { vec![(0, 0, Mat::identity(a))] } else { blocks };
            assemble(ring, &[a, bar_dim(&loc.bar, i)], &[a, b], blocks)
        })
        .collect();
    let plus_cone_maps = ChainMap::new(ring, &cplus, &um, -1, incl.clone()).is_ok();
    let composite_vanishes = (0..=2).all(|i| j_maps[(i + 1) as usize].mul(ring, &incl[(i + 1) as usize]).is_zero());
    let factors_projection = (0..=2).all(|i: i32| {
        let res_minus = {
            let blocks = vec![(1, 0, Mat::identity(bar_dim(&loc.bar, i)))];
            assemble(ring, &[bar_dim(pb, i + 1), bar_dim(&loc.bar, i)], &[bar_dim(&loc.bar, i)], blocks)
        };
        j_maps[(i + 1) as usize].mul(ring, &res_minus) == loc.bar.pointwise(&sp.onto_minus, i as usize)
    });
    Ok(QuasiIsoReport {
        lengths,
        inverse_is_section: section,
        inverse_is_retraction: retraction,
        plus_cone_acyclic,
        plus_cone_maps,
        composite_vanishes,
        factors_projection,
    })
}

/// Long exact sequences of the cones of restriction and of `i^+` at every place.
pub fn cone_sequences(ring: &ChainRing, side: &Side) -> Result<Vec<JointCheck>, CohomError> {
    let glob = side.global_complex();
    let mut out = Vec::new();
    for (l, loc) in side.locals.iter().enumerate() {
        let local = loc.bar.complex(2);
        let res: Vec<Mat> = (0..=2).map(|i| side.restriction(l, i)).collect();
        let f = ChainMap::new(ring, &glob, &local, 0, res)?;
        out.extend(cone_sequence_check(ring, &glob, &local, &f)?);
        let plus = match &loc.plus.bar {
            Some(b) => b.complex(2),
            None => ComplexData::new(ring, 0, vec![loc.plus.rank(), 0, 0], vec![Mat::zeros(0, loc.plus.rank()), Mat::zeros(0, 0)])?,
        };
        let inc: Vec<Mat> = (0..=2).map(|i| loc.plus.inclusion(&loc.bar, i)).collect();
        let g = ChainMap::new(ring, &plus, &local, 0, inc)?;
        out.extend(cone_sequence_check(ring, &plus, &local, &g)?);
    }
    Ok(out)
}

/// For `f = (1, c): X -> X ⊕ X`, compares `β(f x_f)` with `f β(x_f)` in `H̃^2(X ⊕ X)`.
pub fn bockstein_naturality(
    ws: &Workspace,
    x_f: &[u64],
    scalar: u64,
    limits: &ResourceLimits,
) -> Result<bool, CohomError> {
    let ring = ws.ring();
    let inst = ws.instance();
    let doubled: SelmerInstance = inst.doubled(limits)?;
    let wide = Workspace::new(&doubled)?;
    let r = inst.module().rank();
    let graph = |n: usize| Mat::identity(n).vstack(&Mat::identity(n).scale(ring, scalar));
    let f = PointwiseMap {
        global: graph(r),
        plus: inst.places().iter().map(|p| graph(p.condition.basis().cols())).collect(),
    };
    let src: &InstanceSides = &ws.sides;
    let pushed = f.selmer(&src.x, 1, x_f);
    let beta_pushed = wide.bockstein(&pushed)?;
    let pushed_beta = f.selmer(&src.x, 2, &ws.bockstein(x_f)?);
    Ok(wide.is_selmer_coboundary(&vec_sub(ring, &beta_pushed, &pushed_beta)))
}

/// Lift independence: changing the ε-part of the lift moves `β(x_f)` by a coboundary.
pub fn bockstein_lift_independence(ws: &Workspace, x_f: &[u64], rng: &mut impl Rng) -> Result<bool, CohomError> {
    let ring = ws.ring();
    let x = &ws.sides.x;
    let e: Vec<u64> = crate::pairing::random_vector(ring, rng, x_f.len());
    let a = ws.bockstein(x_f)?;
    let b = ws.bockstein_with_lift(x_f, Some(&e))?;
    let diff = vec_sub(ring, &b, &a);
    let expected = x.selmer_differential(1).apply(ring, &e);
    Ok(diff == expected && ws.is_selmer_coboundary(&diff))
}

/// A random Selmer cocycle of `X[ε]`, reduced to `X`; its Bockstein must be a coboundary.
pub fn bockstein_of_reduction(ws: &Workspace, rng: &mut impl Rng) -> Result<bool, CohomError> {
    let ring = ws.ring();
    let eps = &ws.sides.eps;
    let cocycles = eps.selmer_differential(1).smith(ring).kernel();
    let lifted = random_combination(ring, rng, &cocycles);
    let x_f = ws.reduce.selmer(eps, 1, &lifted);
    let beta = ws.bockstein(&x_f)?;
    Ok(ws.is_selmer_coboundary(&beta))
}

/// `d(a ∪ b) = da ∪ b + (-1)^i a ∪ db` for random `a ∈ C^i(G, X)`, `b ∈ C^j(G, X*)`, `i + j ≤ 2`.
pub fn leibniz(ws: &Workspace, rng: &mut impl Rng) -> Result<bool, CohomError> {
    let ring = ws.ring();
    let inst = ws.instance();
    let unit = crate::module::GModuleData::character(ring, inst.group(), inst.chi())?;
    let unit_bar = Bar::new(ring, &crate::group::Subgroup::whole(inst.group()), &unit);
    let (x, d) = (&ws.sides.x.global, &ws.sides.dual.global);
    let pairing = Mat::identity(x.rank());
    for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1), (0, 2), (2, 0)] {
        let a = crate::pairing::random_vector(ring, rng, x.dim(i));
        let b = crate::pairing::random_vector(ring, rng, d.dim(j));
        let lhs = unit_bar.apply_differential(i + j, &crate::cochain::cup(x, i, &a, d, j, &b, &pairing));
        let da = x.apply_differential(i, &a);
        let db = d.apply_differential(j, &b);
        let left = crate::cochain::cup(x, i + 1, &da, d, j, &b, &pairing);
        let right = crate::cochain::cup(x, i, &a, d, j + 1, &db, &pairing);
        let rhs: Vec<u64> = left
            .iter()
            .zip(&right)
            .map(|(&l, &r)| if i % 2 == 0 { ring.add(l, r) } else { ring.sub(l, r) })
            .collect();
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}
