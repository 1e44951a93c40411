//! Bockstein maps, the height pairing, derivative classes and the two sides
//! of the Rubin-style formula.
//!
//! Classes are plain coordinate vectors in the layouts of [`crate::selmer::Side`].
//! For `X` the Selmer cochain `x_f = (x, x^+, λ)` lives in `C̃^1`, and a
//! derivative class `D = (u, c)` lives in `U^{-,1}_S`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cochain::{cup, Bar};
use crate::complex::ComplexData;
use crate::group::Subgroup;
use crate::matrix::{Mat, Smith};
use crate::module::GModuleData;
use crate::ring::ChainRing;
use crate::selmer::{split, InstanceSides, PointwiseMap, SelmerInstance, Side};
use crate::CohomError;

/// Result of checking the local invariants against coboundaries and global cocycles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReciprocityCertificate {
    pub kills_local_coboundaries: bool,
    pub global_cocycles_checked: usize,
    pub nontrivial: bool,
}

/// Cached matrices for one instance.
pub struct Workspace {
    inst: SelmerInstance,
    ring: ChainRing,
    pub sides: InstanceSides,
    /// `x + ε y -> x` on every slot.
    pub reduce: PointwiseMap,
    unit_global: Bar,
    unit_locals: Vec<Bar>,
    unit_d2: Smith,
    certificate: ReciprocityCertificate,
    x_global_d0: Smith,
    x_global_d1: Smith,
    x_selmer_d1: Smith,
    eps_uminus_d0: Smith,
    x_uminus: ComplexData,
}

fn dot(ring: &ChainRing, a: &[u64], b: &[u64]) -> u64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0, |acc, (&x, &y)| ring.add(acc, ring.mul(x, y)))
}

fn add_into(ring: &ChainRing, acc: &mut [u64], v: &[u64]) {
    assert_eq!(acc.len(), v.len());
    for (a, &b) in acc.iter_mut().zip(v) {
        *a = ring.add(*a, b);
    }
}

pub fn vec_add(ring: &ChainRing, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = a.to_vec();
    add_into(ring, &mut out, b);
    out
}

pub fn vec_sub(ring: &ChainRing, a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(&x, &y)| ring.sub(x, y)).collect()
}

pub fn vec_scale(ring: &ChainRing, c: u64, a: &[u64]) -> Vec<u64> {
    a.iter().map(|&x| ring.mul(c, x)).collect()
}

pub fn random_vector(ring: &ChainRing, rng: &mut impl Rng, n: usize) -> Vec<u64> {
    (0..n).map(|_| rng.gen_range(0..ring.modulus())).collect()
}

/// A random `R`-combination of the columns.
pub fn random_combination(ring: &ChainRing, rng: &mut impl Rng, gens: &Mat) -> Vec<u64> {
    let coeffs = random_vector(ring, rng, gens.cols());
    gens.apply(ring, &coeffs)
}

/// Outcome of building a derivative class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivativeClass {
    /// `D = (u, c)` in `U^{-,1}_S(X)`.
    pub representative: Vec<u64>,
    pub is_cocycle: bool,
    /// `i(D) - res^-(x_Iw)` is a coboundary in `U^-_S(X[ε])`.
    pub lifts_restriction: bool,
    /// `β(x_f) + ∂D` is a coboundary in `C̃^2(X)`.
    pub matches_bockstein: bool,
    /// Whether a class from `H^0(U^-_S)` had to be subtracted.
    pub corrected: bool,
}

/// Both sides of the Rubin-style formula plus the auxiliary evaluations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RubinCheck {
    pub lhs: u64,
    pub rhs: u64,
    pub derivative: DerivativeClass,
    pub pass: bool,
}

/// Height pairing evaluated three ways.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingPaths {
    /// `W` solved from `dW = z ∪ y`.
    pub solved: u64,
    /// `W` replaced by `W` plus a random global cocycle.
    pub shifted: u64,
    /// `W = Z ∪ y` for a primitive `dZ = z`.
    pub primitive: u64,
}

impl Workspace {
    pub fn new(inst: &SelmerInstance) -> Result<Self, CohomError> {
        let ring = *inst.ring();
        let group = inst.group();
        let sides = InstanceSides::new(inst);
        let unit = GModuleData::character(&ring, group, inst.chi())?;
        let unit_global = Bar::new(&ring, &Subgroup::whole(group), &unit);
        let unit_locals: Vec<Bar> = inst
            .places()
            .iter()
            .map(|p| Bar::new(&ring, &Subgroup::new(group, &p.subgroup).expect("validated"), &unit))
            .collect();
        let unit_d2 = unit_global.differential(2).smith(&ring);
        let r = inst.module().rank();
        let ks: Vec<usize> = inst.places().iter().map(|p| p.condition.basis().cols()).collect();
        let reduce_of = |n: usize| Mat::identity(n).hstack(&Mat::zeros(n, n));
        let reduce = PointwiseMap { global: reduce_of(r), plus: ks.iter().map(|&k| reduce_of(k)).collect() };
        let x_global_d0 = sides.x.global.differential(0).smith(&ring);
        let x_global_d1 = sides.x.global.differential(1).smith(&ring);
        let x_selmer_d1 = sides.x.selmer_differential(1).smith(&ring);
        let all = sides.x.all_places();
        let eps_uminus = sides.eps.uminus_complex(&all);
        let eps_uminus_d0 = eps_uminus.differential(0).smith(&ring);
        let x_uminus = sides.x.uminus_complex(&all);
        let mut ws = Self {
            inst: inst.clone(),
            ring,
            sides,
            reduce,
            unit_global,
            unit_locals,
            unit_d2,
            certificate: ReciprocityCertificate {
                kills_local_coboundaries: false,
                global_cocycles_checked: 0,
                nontrivial: false,
            },
            x_global_d0,
            x_global_d1,
            x_selmer_d1,
            eps_uminus_d0,
            x_uminus,
        };
        ws.certificate = ws.certify()?;
        Ok(ws)
    }

    pub fn instance(&self) -> &SelmerInstance {
        &self.inst
    }

    pub fn ring(&self) -> &ChainRing {
        &self.ring
    }

    pub fn certificate(&self) -> &ReciprocityCertificate {
        &self.certificate
    }

    fn certify(&self) -> Result<ReciprocityCertificate, CohomError> {
        let ring = &self.ring;
        for (place, bar) in self.inst.places().iter().zip(&self.unit_locals) {
            let d1 = bar.differential(1);
            let killed = d1.transpose().apply(ring, &place.invariant);
            if killed.iter().any(|&v| v != 0) {
                return Err(CohomError::Reciprocity(format!("inv at {} is nonzero on coboundaries", place.name)));
            }
        }
        let cocycles = self.unit_d2.kernel();
        for j in 0..cocycles.cols() {
            let c = cocycles.column(j);
            if self.global_invariant(&c) != 0 {
                return Err(CohomError::Reciprocity("the invariants do not sum to zero on a global 2-cocycle".into()));
            }
        }
        let nontrivial = self.inst.places().iter().any(|p| p.invariant.iter().any(|&v| v != 0));
        Ok(ReciprocityCertificate { kills_local_coboundaries: true, global_cocycles_checked: cocycles.cols(), nontrivial })
    }

    /// `Σ_ℓ inv_ℓ(res_ℓ c)` for a global 2-cochain of `R(1)`.
    pub fn global_invariant(&self, c: &[u64]) -> u64 {
        let ring = &self.ring;
        self.inst.places().iter().zip(&self.unit_locals).fold(0, |acc, (place, bar)| {
            let local = bar.restrict(&self.unit_global, 2, c);
            ring.add(acc, dot(ring, &place.invariant, &local))
        })
    }

    fn local_invariant(&self, place: usize, c: &[u64]) -> u64 {
        dot(&self.ring, &self.inst.places()[place].invariant, c)
    }

    pub fn x_selmer(&self) -> ComplexData {
        self.sides.x.selmer_complex()
    }

    pub fn is_selmer_cocycle(&self, side: &Side, degree: i32, v: &[u64]) -> bool {
        side.selmer_differential(degree).apply(&self.ring, v).iter().all(|&c| c == 0)
    }

    /// Whether `v ∈ C̃^2(X)` is a coboundary.
    pub fn is_selmer_coboundary(&self, v: &[u64]) -> bool {
        self.x_selmer_d1.contains(v)
    }

    /// The linear map `y_f ↦ [z ∪ y]` into a coordinate form of `H^3(G, R(1))`,
    /// as a matrix on `C̃^1(X*)`. The pairing with `z_f` is defined on its kernel.
    pub fn pairing_obstruction(&self, z_f: &[u64]) -> Mat {
        let d = &self.sides.dual;
        let z = &z_f[..self.sides.x.global.dim(2)];
        let n: usize = d.selmer_layout(1).iter().sum();
        let ng = d.global.dim(1);
        let columns: Vec<Vec<u64>> = (0..n)
            .map(|j| {
                let mut y = vec![0; ng];
                if j < ng {
                    y[j] = 1;
                }
                self.unit_d2.obstruction(&self.global_cup_3(z, &y))
            })
            .collect();
        Mat::from_columns(self.unit_d2.rows(), &columns)
    }

    /// `β(x_f)`: lift with zero ε-part, differentiate over `X[ε]`, take the ε-part.
    pub fn bockstein(&self, x_f: &[u64]) -> Result<Vec<u64>, CohomError> {
        self.bockstein_with_lift(x_f, None)
    }

    /// As [`Self::bockstein`] but with the ε-part of the lift given explicitly.
    pub fn bockstein_with_lift(&self, x_f: &[u64], eps_part: Option<&[u64]>) -> Result<Vec<u64>, CohomError> {
        let s = &self.sides;
        if !self.is_selmer_cocycle(&s.x, 1, x_f) {
            return Err(CohomError::NotCocycle("Bockstein input".into()));
        }
        let mut lift = s.lift.selmer(&s.x, 1, x_f);
        if let Some(e) = eps_part {
            add_into(&self.ring, &mut lift, &s.eps_embed.selmer(&s.x, 1, e));
        }
        let d = s.eps.selmer_differential(1).apply(&self.ring, &lift);
        Ok(s.eps_part.selmer(&s.eps, 2, &d))
    }

    fn pairing_terms(&self, z_f: &[u64], y_f: &[u64], w: &[u64]) -> u64 {
        let ring = &self.ring;
        let (x, d) = (&self.sides.x, &self.sides.dual);
        let zp = split(z_f, &x.selmer_layout(2));
        let yp = split(y_f, &d.selmer_layout(1));
        let n = x.place_count();
        let pairing = Mat::identity(x.rank());
        let mut total = 0;
        for l in 0..n {
            let (lx, ld) = (&x.locals[l], &d.locals[l]);
            let omega = zp[1 + n + l];
            let res_y = ld.bar.restrict(&d.global, 1, yp[0]);
            let mu = yp[1 + n + l];
            let iz = lx.plus.inclusion(&lx.bar, 2).apply(ring, zp[1 + l]);
            let mut term = cup(&lx.bar, 1, omega, &ld.bar, 1, &res_y, &pairing);
            add_into(ring, &mut term, &cup(&lx.bar, 2, &iz, &ld.bar, 0, mu, &pairing));
            add_into(ring, &mut term, &self.unit_locals[l].restrict(&self.unit_global, 2, w));
            total = ring.add(total, self.local_invariant(l, &term));
        }
        total
    }

    fn global_cup_3(&self, z: &[u64], y: &[u64]) -> Vec<u64> {
        let (x, d) = (&self.sides.x, &self.sides.dual);
        cup(&x.global, 2, z, &d.global, 1, y, &Mat::identity(x.rank()))
    }

    /// `inv_S(z_f ∪ y_f)` for `z_f ∈ Z̃^2(X)`, `y_f ∈ Z̃^1(X*)`, with `W` solved from `dW = z ∪ y`.
    pub fn pair_cochains(&self, z_f: &[u64], y_f: &[u64]) -> Result<u64, CohomError> {
        let z = &z_f[..self.sides.x.global.dim(2)];
        let y = &y_f[..self.sides.dual.global.dim(1)];
        let target = self.global_cup_3(z, y);
        let w = self
            .unit_d2
            .solve(&target)
            .ok_or_else(|| CohomError::NotSolvable("z ∪ y is not a coboundary".into()))?;
        Ok(self.pairing_terms(z_f, y_f, &w))
    }

    /// `⟨x_f, y_f⟩ = inv_S(β(x_f) ∪ y_f)`.
    pub fn height_pairing(&self, x_f: &[u64], y_f: &[u64]) -> Result<u64, CohomError> {
        if !self.is_selmer_cocycle(&self.sides.dual, 1, y_f) {
            return Err(CohomError::NotCocycle("dual Selmer class".into()));
        }
        let z_f = self.bockstein(x_f)?;
        self.pair_cochains(&z_f, y_f)
    }

    /// The pairing with `W` solved, with `W` shifted by a global cocycle, and
    /// with `W = Z ∪ y` for a primitive of `z`.
    pub fn pairing_paths(&self, x_f: &[u64], y_f: &[u64], rng: &mut impl Rng) -> Result<PairingPaths, CohomError> {
        let ring = &self.ring;
        let z_f = self.bockstein(x_f)?;
        let (x, d) = (&self.sides.x, &self.sides.dual);
        let z = &z_f[..x.global.dim(2)];
        let y = &y_f[..d.global.dim(1)];
        let target = self.global_cup_3(z, y);
        let w = self.unit_d2.solve(&target).ok_or_else(|| CohomError::NotSolvable("z ∪ y is not a coboundary".into()))?;
        let solved = self.pairing_terms(&z_f, y_f, &w);
        let shift = random_combination(ring, rng, &self.unit_d2.kernel());
        let shifted = self.pairing_terms(&z_f, y_f, &vec_add(ring, &w, &shift));
        let big_z = self
            .x_global_d1
            .solve(z)
            .ok_or_else(|| CohomError::NotSolvable("the Bockstein of x has no primitive".into()))?;
        let w_prim = cup(&x.global, 1, &big_z, &d.global, 1, y, &Mat::identity(x.rank()));
        let primitive = self.pairing_terms(&z_f, y_f, &w_prim);
        Ok(PairingPaths { solved, shifted, primitive })
    }

    /// Replaces `x_Iw` by `x_Iw - d(lift c)` when `pr(x_Iw) = x + d c`.
    pub fn normalize_lift(&self, x_iw: &[u64], x: &[u64]) -> Result<Vec<u64>, CohomError> {
        let ring = &self.ring;
        let s = &self.sides;
        if s.eps.global.apply_differential(1, x_iw).iter().any(|&v| v != 0) {
            return Err(CohomError::NotCocycle("x_Iw".into()));
        }
        let pr = self.reduce.global_cochain(&s.eps, 1, x_iw);
        let diff = vec_sub(ring, &pr, x);
        if diff.iter().all(|&v| v == 0) {
            return Ok(x_iw.to_vec());
        }
        let c = self
            .x_global_d0
            .solve(&diff)
            .ok_or_else(|| CohomError::NotSolvable("the reduction of x_Iw is not cohomologous to x".into()))?;
        let lift_c = s.lift.global_cochain(&s.x, 0, &c);
        Ok(vec_sub(ring, x_iw, &s.eps.global.apply_differential(0, &lift_c)))
    }

    /// `D' = ε-part of [res^-(x_Iw) + d(lift of (x^+, λ))]`, with the
    /// `H^0(U^-_S)` correction when needed.
    pub fn derivative_class(&self, x_iw: &[u64], x_f: &[u64]) -> Result<DerivativeClass, CohomError> {
        let ring = &self.ring;
        let s = &self.sides;
        if !self.is_selmer_cocycle(&s.x, 1, x_f) {
            return Err(CohomError::NotCocycle("x_f".into()));
        }
        let gx = s.x.global.dim(1);
        let x_iw = self.normalize_lift(x_iw, &x_f[..gx])?;
        let all = s.x.all_places();
        let res_minus = s.eps.local_restriction(1, false).apply(ring, &x_iw);
        let local_part = x_f[gx..].to_vec();
        let lifted = s.lift.uminus(&s.x, 0, &local_part);
        let d_lift = s.eps.uminus_differential(&all, 0).apply(ring, &lifted);
        let total = vec_add(ring, &res_minus, &d_lift);
        let reduced = self.reduce.uminus(&s.eps, 1, &total);
        if reduced.iter().any(|&v| v != 0) {
            return Err(CohomError::NotSolvable("non-ε part of the derivative class does not cancel".into()));
        }
        let mut repr = s.eps_part.uminus(&s.eps, 1, &total);
        let beta = self.bockstein(x_f)?;
        let boundary = s.x.boundary_map(2);
        let mut corrected = false;
        let mut gap = vec_add(ring, &beta, &boundary.apply(ring, &repr));
        if !self.is_selmer_coboundary(&gap) {
            let h0 = self.x_uminus.cohomology(ring, 0)?;
            let gens = h0.cocycles();
            let mut cols = Vec::new();
            let mut corrections = Vec::new();
            for j in 0..gens.cols() {
                let t = gens.column(j);
                let b0 = self.uminus_bockstein_0(&t);
                cols.push(boundary.apply(ring, &b0));
                corrections.push(b0);
            }
            let d1 = s.x.selmer_differential(1);
            let system = Mat::from_columns(gap.len(), &cols).hstack(&d1);
            let sol = system
                .smith(ring)
                .solve(&gap)
                .ok_or_else(|| CohomError::NotSolvable("no H^0(U^-) correction reaches the Bockstein".into()))?;
            for (j, b0) in corrections.iter().enumerate() {
                repr = vec_sub(ring, &repr, &vec_scale(ring, sol[j], b0));
            }
            gap = vec_add(ring, &beta, &boundary.apply(ring, &repr));
            corrected = true;
        }
        let is_cocycle = self.x_uminus.apply_differential(ring, 1, &repr).iter().all(|&v| v == 0);
        let embedded = s.eps_embed.uminus(&s.x, 1, &repr);
        let lifts_restriction = self.eps_uminus_d0.contains(&vec_sub(ring, &embedded, &res_minus));
        let matches_bockstein = self.is_selmer_coboundary(&gap);
        Ok(DerivativeClass { representative: repr, is_cocycle, lifts_restriction, matches_bockstein, corrected })
    }

    /// Bockstein of a degree-0 cocycle of `U^-_S(X)`.
    fn uminus_bockstein_0(&self, t: &[u64]) -> Vec<u64> {
        let s = &self.sides;
        let all = s.x.all_places();
        let lifted = s.lift.uminus(&s.x, 0, t);
        let d = s.eps.uminus_differential(&all, 0).apply(&self.ring, &lifted);
        s.eps_part.uminus(&s.eps, 1, &d)
    }

    /// `-Σ_ℓ inv_ℓ(c_ℓ ∪ i^+ y^+_ℓ)` for `D = (u, c)`.
    pub fn rubin_rhs(&self, d_class: &[u64], y_f: &[u64]) -> u64 {
        let ring = &self.ring;
        let (x, dual) = (&self.sides.x, &self.sides.dual);
        let n = x.place_count();
        let dp = split(d_class, &x.uminus_layout(&x.all_places(), 1));
        let yp = split(y_f, &dual.selmer_layout(1));
        let pairing = Mat::identity(x.rank());
        let mut total = 0;
        for l in 0..n {
            let (lx, ld) = (&x.locals[l], &dual.locals[l]);
            let iy = ld.plus.inclusion(&ld.bar, 1).apply(ring, yp[1 + l]);
            let term = cup(&lx.bar, 1, dp[n + l], &ld.bar, 1, &iy, &pairing);
            total = ring.add(total, self.local_invariant(l, &term));
        }
        ring.neg(total)
    }

    /// The single-place value `-inv_p(ι^-(c_p) ∪ i^+ y^+_p)` computed on
    /// `F^-X ⊗ F^+X*` with the induced action.
    pub fn single_place_rhs(&self, d_class: &[u64], y_f: &[u64]) -> u64 {
        let ring = &self.ring;
        let (x, dual) = (&self.sides.x, &self.sides.dual);
        let p = self.inst.designated();
        let n = x.place_count();
        let lx = &x.locals[p];
        let ld = &dual.locals[p];
        let basis = lx.plus.basis.clone();
        let (t, t_inv) = crate::selmer::complete_basis(ring, &basis).expect("validated");
        let (r, k) = (basis.rows(), basis.cols());
        let bottom: Vec<usize> = (k..r).collect();
        let iota = t_inv.transpose().select_columns(&bottom).transpose();
        let complement = t.select_columns(&bottom);
        let dual_plus = ld.plus.bar.as_ref().expect("designated place is Greenberg");
        let pairing = complement.transpose().mul(ring, &ld.plus.basis);
        let dp = split(d_class, &x.uminus_layout(&x.all_places(), 1));
        let yp = split(y_f, &dual.selmer_layout(1));
        let sub = lx.bar.subgroup();
        let minus_actions = sub
            .elements()
            .iter()
            .map(|&h| iota.mul(ring, &self.inst.module().action(h).mul(ring, &complement)))
            .collect();
        let minus_bar = Bar::from_actions(ring, sub, r - k, minus_actions);
        let a = crate::selmer::pointwise(ring, &iota, lx.bar.tuples(1), dp[n + p]);
        let term = cup(&minus_bar, 1, &a, dual_plus, 1, yp[1 + p], &pairing);
        ring.neg(self.local_invariant(p, &term))
    }

    /// The Rubin-style formula: pairing on one side, derivative class on the other.
    pub fn rs_check(&self, x_f: &[u64], x_iw: &[u64], y_f: &[u64]) -> Result<RubinCheck, CohomError> {
        let lhs = self.height_pairing(x_f, y_f)?;
        let derivative = self.derivative_class(x_iw, x_f)?;
        let rhs = self.rubin_rhs(&derivative.representative, y_f);
        let pass = lhs == rhs && derivative.is_cocycle && derivative.lifts_restriction && derivative.matches_bockstein;
        Ok(RubinCheck { lhs, rhs, derivative, pass })
    }

    /// `D + d(u, v)` for a random `(u, v) ∈ U^{-,0}_S(X)`.
    pub fn perturb_derivative(&self, d_class: &[u64], rng: &mut impl Rng) -> Vec<u64> {
        let ring = &self.ring;
        let uv = random_vector(ring, rng, self.x_uminus.rank(0));
        vec_add(ring, d_class, &self.x_uminus.apply_differential(ring, 0, &uv))
    }

    /// Whether every place other than the designated one has acyclic local cochains.
    pub fn other_places_acyclic(&self) -> Result<bool, CohomError> {
        let ring = &self.ring;
        for (l, loc) in self.sides.x.locals.iter().enumerate() {
            if l == self.inst.designated() {
                continue;
            }
            let c = loc.bar.complex(2);
            for i in 0..2 {
                if c.cohomology_length(ring, i)? != 0 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}
