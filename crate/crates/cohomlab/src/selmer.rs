//! Selmer instances: local conditions, Selmer complexes and the complexes
//! `U^-` of local quotients.
//!
//! Conventions. A cone is `Cone(f)^i = A^{i+1} ⊕ B^i` with
//! `d(a, b) = (-d a, f(a) + d b)`, and `[n]` shifts by `X[n]^i = X^{i+n}` with
//! the differential multiplied by `(-1)^n`. Then
//!
//! * the Selmer complex `C̃ = Cone(res - i^+)[-1]` has
//!   `C̃^i = C^i(G, Y) ⊕ ⊕_ℓ U_ℓ^{+,i} ⊕ ⊕_ℓ C^{i-1}(G_ℓ, Y)` and
//!   `d(a, u, c) = (d a, d u, -res a + i^+ u - d c)`;
//! * `U_ℓ^- = Cone(-i^+)` has `U^{-,i} = U^{+,i+1} ⊕ C^i(G_ℓ, Y)` and
//!   `d(u, c) = (-d u, -i^+ u + d c)`.
//!
//! The projection `C̃ -> C(G, Y)` is onto with kernel `U^-[-1]`, embedded by
//! `(u, c) -> (0, u, c)`; its connecting map is `a -> (0, -res a)`.

use serde::{Deserialize, Serialize};

use crate::cochain::{check_resources, Bar, ResourceLimits};
use crate::complex::ComplexData;
use crate::group::{FiniteGroupData, Subgroup};
use crate::matrix::Mat;
use crate::module::GModuleData;
use crate::ring::ChainRing;
use crate::CohomError;

/// Degree of the top group kept in global and Selmer complexes. Cohomology is
/// trusted strictly below it.
pub const SELMER_TOP: i32 = 2;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocalCondition {
    /// `U^+ = C(G_ℓ, F^+)` for a `G_ℓ`-stable free direct summand `F^+`
    /// spanned by the columns of `basis`.
    Greenberg { basis: Mat },
    /// `U^+` is a free submodule of `X^{G_ℓ}` (columns of `basis`) placed in
    /// degree 0, mapped in as constant cochains.
    Unramified { basis: Mat },
}

impl LocalCondition {
    pub fn basis(&self) -> &Mat {
        match self {
            Self::Greenberg { basis } | Self::Unramified { basis } => basis,
        }
    }

    pub fn is_greenberg(&self) -> bool {
        matches!(self, Self::Greenberg { .. })
    }

    fn with_basis(&self, basis: Mat) -> Self {
        match self {
            Self::Greenberg { .. } => Self::Greenberg { basis },
            Self::Unramified { .. } => Self::Unramified { basis },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Place {
    pub name: String,
    /// Elements of `G_ℓ ≤ G`.
    pub subgroup: Vec<usize>,
    pub condition: LocalCondition,
    /// `inv_ℓ` as a functional on `C^2(G_ℓ, R(1))`, one entry per pair.
    pub invariant: Vec<u64>,
}

/// A finite model of the Selmer data.
///
/// `R(1)` is `R` with `G` acting through the unit-valued character `chi`;
/// `kappa: G -> R` is an additive character standing in for the projection
/// to `Γ`, so `g` acts on `Λ/J^2 ⊗ R = R[ε]` by `1 + kappa(g) ε`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelmerInstance {
    pub label: String,
    ring: ChainRing,
    group: FiniteGroupData,
    module: GModuleData,
    chi: Vec<u64>,
    kappa: Vec<u64>,
    places: Vec<Place>,
    designated: usize,
}

impl SelmerInstance {
    /// Validates everything except reciprocity, which needs cohomology and is
    /// certified when a [`crate::pairing::Workspace`] is built.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        label: impl Into<String>,
        ring: ChainRing,
        group: FiniteGroupData,
        module: GModuleData,
        chi: Vec<u64>,
        kappa: Vec<u64>,
        places: Vec<Place>,
        designated: usize,
        limits: &ResourceLimits,
    ) -> Result<Self, CohomError> {
        let inst = Self { label: label.into(), ring, group, module, chi, kappa, places, designated };
        inst.validate(limits)?;
        Ok(inst)
    }

    /// Parses and fully revalidates a serialized instance.
    pub fn from_json(text: &str, limits: &ResourceLimits) -> Result<Self, CohomError> {
        let mut inst: SelmerInstance =
            serde_json::from_str(text).map_err(|e| CohomError::Serialization(e.to_string()))?;
        inst.group = inst.group.revalidated()?;
        inst.module = GModuleData::new(&inst.ring, &inst.group, inst.module.rank(), inst.module.actions().to_vec())?;
        inst.validate(limits)?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instances serialize")
    }

    fn validate(&self, limits: &ResourceLimits) -> Result<(), CohomError> {
        let ring = &self.ring;
        let g = &self.group;
        let n = g.order();
        let bad = |m: String| Err(CohomError::InvalidInstance(m));
        if self.module.rank() > limits.max_module_rank {
            return Err(CohomError::ResourceBound { order: n, rank: self.module.rank(), degree: 0 });
        }
        check_resources(n, 1, 3, limits)?;
        if self.chi.len() != n || self.kappa.len() != n {
            return bad("characters must have one value per element".into());
        }
        for a in 0..n {
            for b in 0..n {
                let ab = g.mul(a, b);
                if ring.mul(self.chi[a], self.chi[b]) != self.chi[ab] % ring.modulus() {
                    return bad("chi is not multiplicative".into());
                }
                if ring.add(self.kappa[a], self.kappa[b]) != self.kappa[ab] % ring.modulus() {
                    return bad("kappa is not additive".into());
                }
            }
        }
        if self.chi[g.identity()] != 1 {
            return bad("chi(1) must be 1".into());
        }
        if self.designated >= self.places.len() || !self.places[self.designated].condition.is_greenberg() {
            return bad("the designated place must carry a Greenberg condition".into());
        }
        for place in &self.places {
            let sub = Subgroup::new(g, &place.subgroup)?;
            check_resources(sub.order(), 2 * self.module.rank(), 3, limits)?;
            if place.invariant.len() != sub.order() * sub.order() {
                return bad(format!("invariant at {} has the wrong length", place.name));
            }
            validate_condition(ring, &self.module, &sub, &place.condition)
                .map_err(|m| CohomError::InvalidInstance(format!("{}: {m}", place.name)))?;
            if !place.condition.is_greenberg() && sub.elements().iter().any(|&h| self.kappa[h] != 0) {
                return bad(format!("kappa must vanish on the decomposition group at unramified place {}", place.name));
            }
        }
        Ok(())
    }

    pub fn ring(&self) -> &ChainRing {
        &self.ring
    }

    pub fn group(&self) -> &FiniteGroupData {
        &self.group
    }

    pub fn module(&self) -> &GModuleData {
        &self.module
    }

    pub fn chi(&self) -> &[u64] {
        &self.chi
    }

    pub fn kappa(&self) -> &[u64] {
        &self.kappa
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn designated(&self) -> usize {
        self.designated
    }

    pub fn set_invariants(&mut self, invariants: Vec<Vec<u64>>) {
        assert_eq!(invariants.len(), self.places.len());
        for (place, inv) in self.places.iter_mut().zip(invariants) {
            place.invariant = inv;
        }
    }

    /// The same data with `X` replaced by `X ⊕ X` and every local submodule doubled.
    pub fn doubled(&self, limits: &ResourceLimits) -> Result<Self, CohomError> {
        let ring = &self.ring;
        let module = self.module.direct_sum(ring, &self.module);
        let places = self
            .places
            .iter()
            .map(|p| {
                let b = p.condition.basis();
                let mut d = Mat::zeros(2 * b.rows(), 2 * b.cols());
                d.add_block(ring, 0, 0, b);
                d.add_block(ring, b.rows(), b.cols(), b);
                Place { condition: p.condition.with_basis(d), ..p.clone() }
            })
            .collect();
        let mut wide = *limits;
        wide.max_module_rank = wide.max_module_rank.max(module.rank());
        Self::new(
            format!("{} doubled", self.label),
            *ring,
            self.group.clone(),
            module,
            self.chi.clone(),
            self.kappa.clone(),
            places,
            self.designated,
            &wide,
        )
    }
}

/// `T = [B | C]` invertible, with its inverse, when `B` spans a free direct summand.
pub(crate) fn complete_basis(ring: &ChainRing, basis: &Mat) -> Result<(Mat, Mat), String> {
    let (r, k) = (basis.rows(), basis.cols());
    let s = basis.smith(ring);
    if s.rank() != k || s.exponents().iter().any(|&e| e != 0) {
        return Err("local submodule is not a free direct summand".into());
    }
    let complement: Vec<Vec<u64>> = (k..r).map(|j| s.row_basis_vector(j)).collect();
    let t = basis.hstack(&Mat::from_columns(r, &complement));
    let t_inv = t.inverse(ring).ok_or("basis completion is not invertible")?;
    Ok((t, t_inv))
}

fn validate_condition(ring: &ChainRing, module: &GModuleData, sub: &Subgroup, cond: &LocalCondition) -> Result<(), String> {
    let b = cond.basis();
    if b.rows() != module.rank() {
        return Err("basis has the wrong number of rows".into());
    }
    complete_basis(ring, b)?;
    match cond {
        LocalCondition::Greenberg { .. } => {
            let (_, t_inv) = complete_basis(ring, b)?;
            for &h in sub.elements() {
                let moved = module.action(h).mul(ring, b);
                let coords = t_inv.mul(ring, &moved);
                for i in b.cols()..module.rank() {
                    if (0..b.cols()).any(|j| coords.get(i, j) != 0) {
                        return Err("Greenberg submodule is not stable".into());
                    }
                }
            }
        }
        LocalCondition::Unramified { .. } => {
            for &h in sub.elements() {
                if module.action(h).mul(ring, b) != *b {
                    return Err("unramified basis is not invariant".into());
                }
            }
        }
    }
    Ok(())
}

/// The condition complex `U^+_ℓ` with its map `i^+` into local cochains.
#[derive(Clone, Debug)]
pub(crate) struct Plus {
    pub basis: Mat,
    /// Cochains of `F^+` with the induced action, for Greenberg conditions.
    pub bar: Option<Bar>,
}

impl Plus {
    fn new(ring: &ChainRing, module: &GModuleData, sub: &Subgroup, cond: &LocalCondition) -> Self {
        match cond {
            LocalCondition::Greenberg { basis } => {
                let (_, t_inv) = complete_basis(ring, basis).expect("validated");
                let k = basis.cols();
                let rows: Vec<usize> = (0..k).collect();
                let left = t_inv.transpose().select_columns(&rows).transpose();
                let actions = sub
                    .elements()
                    .iter()
                    .map(|&h| left.mul(ring, &module.action(h).mul(ring, basis)))
                    .collect();
                Self { basis: basis.clone(), bar: Some(Bar::from_actions(ring, sub, k, actions)) }
            }
            LocalCondition::Unramified { basis } => Self { basis: basis.clone(), bar: None },
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    /// Number of value slots in degree `i` (tuples for Greenberg).
    pub fn tuples(&self, i: i32) -> usize {
        if i < 0 {
            return 0;
        }
        match &self.bar {
            Some(b) => b.tuples(i as usize),
            None => usize::from(i == 0),
        }
    }

    pub fn dim(&self, i: i32) -> usize {
        self.rank() * self.tuples(i)
    }

    pub fn differential(&self, i: i32) -> Mat {
        match &self.bar {
            Some(b) if i >= 0 => b.differential(i as usize),
            _ => Mat::zeros(self.dim(i + 1), self.dim(i)),
        }
    }

    /// `i^+ : U^{+,i} -> C^i(G_ℓ, Y)`.
    pub fn inclusion(&self, local: &Bar, i: i32) -> Mat {
        if i < 0 {
            return Mat::zeros(0, 0);
        }
        match &self.bar {
            Some(_) => local.pointwise(&self.basis, i as usize),
            None if i == 0 => self.basis.clone(),
            None => Mat::zeros(local.dim(i as usize), 0),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct LocalSide {
    pub bar: Bar,
    pub plus: Plus,
}

/// A module with local conditions: everything needed to build its Selmer
/// complex and local quotient complexes.
#[derive(Clone, Debug)]
pub struct Side {
    pub(crate) ring: ChainRing,
    pub(crate) global: Bar,
    pub(crate) locals: Vec<LocalSide>,
}

pub(crate) fn bar_dim(b: &Bar, i: i32) -> usize {
    if i < 0 {
        0
    } else {
        b.dim(i as usize)
    }
}

pub(crate) fn bar_tuples(b: &Bar, i: i32) -> usize {
    if i < 0 {
        0
    } else {
        b.tuples(i as usize)
    }
}

fn bar_differential(b: &Bar, i: i32) -> Mat {
    if i < 0 {
        Mat::zeros(bar_dim(b, i + 1), 0)
    } else {
        b.differential(i as usize)
    }
}

pub(crate) fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(sizes.len() + 1);
    let mut acc = 0;
    out.push(0);
    for &s in sizes {
        acc += s;
        out.push(acc);
    }
    out
}

pub(crate) fn assemble(ring: &ChainRing, rows: &[usize], cols: &[usize], blocks: Vec<(usize, usize, Mat)>) -> Mat {
    let (ro, co) = (offsets(rows), offsets(cols));
    let mut m = Mat::zeros(ro[rows.len()], co[cols.len()]);
    for (bi, bj, b) in blocks {
        assert_eq!((b.rows(), b.cols()), (rows[bi], cols[bj]), "block ({bi}, {bj}) has the wrong shape");
        m.add_block(ring, ro[bi], co[bj], &b);
    }
    m
}

pub(crate) fn split<'a>(v: &'a [u64], sizes: &[usize]) -> Vec<&'a [u64]> {
    let o = offsets(sizes);
    assert_eq!(v.len(), o[sizes.len()], "vector does not match the layout");
    (0..sizes.len()).map(|k| &v[o[k]..o[k + 1]]).collect()
}

impl Side {
    pub(crate) fn new(
        ring: &ChainRing,
        group: &FiniteGroupData,
        module: &GModuleData,
        places: &[(Subgroup, LocalCondition)],
    ) -> Self {
        let global = Bar::new(ring, &Subgroup::whole(group), module);
        let locals = places
            .iter()
            .map(|(sub, cond)| LocalSide { bar: Bar::new(ring, sub, module), plus: Plus::new(ring, module, sub, cond) })
            .collect();
        Self { ring: *ring, global, locals }
    }

    pub fn rank(&self) -> usize {
        self.global.rank()
    }

    pub fn place_count(&self) -> usize {
        self.locals.len()
    }

    pub(crate) fn restriction(&self, place: usize, i: i32) -> Mat {
        let l = &self.locals[place].bar;
        if i < 0 {
            Mat::zeros(0, 0)
        } else {
            l.restriction_from(&self.global, i as usize)
        }
    }

    /// Block sizes of `C̃^i`: global, then each `U^{+,i}`, then each `C^{i-1}(G_ℓ)`.
    pub fn selmer_layout(&self, i: i32) -> Vec<usize> {
        let mut sizes = vec![bar_dim(&self.global, i)];
        sizes.extend(self.locals.iter().map(|l| l.plus.dim(i)));
        sizes.extend(self.locals.iter().map(|l| bar_dim(&l.bar, i - 1)));
        sizes
    }

    /// Block sizes of `U^{-,i}` over the given places: each `U^{+,i+1}`, then each `C^i(G_ℓ)`.
    pub fn uminus_layout(&self, places: &[usize], i: i32) -> Vec<usize> {
        let mut sizes: Vec<usize> = places.iter().map(|&l| self.locals[l].plus.dim(i + 1)).collect();
        sizes.extend(places.iter().map(|&l| bar_dim(&self.locals[l].bar, i)));
        sizes
    }

    pub fn all_places(&self) -> Vec<usize> {
        (0..self.locals.len()).collect()
    }

    pub fn selmer_differential(&self, i: i32) -> Mat {
        let ring = &self.ring;
        let s = self.locals.len();
        let mut blocks = vec![(0, 0, bar_differential(&self.global, i))];
        for (l, loc) in self.locals.iter().enumerate() {
            blocks.push((1 + l, 1 + l, loc.plus.differential(i)));
            blocks.push((1 + s + l, 0, self.restriction(l, i).neg(ring)));
            blocks.push((1 + s + l, 1 + l, loc.plus.inclusion(&loc.bar, i)));
            blocks.push((1 + s + l, 1 + s + l, bar_differential(&loc.bar, i - 1).neg(ring)));
        }
        assemble(ring, &self.selmer_layout(i + 1), &self.selmer_layout(i), blocks)
    }

    /// `C̃^0 -> C̃^1 -> C̃^2`.
    pub fn selmer_complex(&self) -> ComplexData {
        let ranks = (0..=SELMER_TOP).map(|i| self.selmer_layout(i).iter().sum()).collect();
        let diffs = (0..SELMER_TOP).map(|i| self.selmer_differential(i)).collect();
        ComplexData::new(&self.ring, 0, ranks, diffs).expect("Selmer differential squares to zero")
    }

    pub fn global_complex(&self) -> ComplexData {
        self.global.complex(SELMER_TOP as usize)
    }

    pub fn uminus_differential(&self, places: &[usize], i: i32) -> Mat {
        let ring = &self.ring;
        let s = places.len();
        let mut blocks = Vec::new();
        for (k, &l) in places.iter().enumerate() {
            let loc = &self.locals[l];
            blocks.push((k, k, loc.plus.differential(i + 1).neg(ring)));
            blocks.push((s + k, k, loc.plus.inclusion(&loc.bar, i + 1).neg(ring)));
            blocks.push((s + k, s + k, bar_differential(&loc.bar, i)));
        }
        assemble(ring, &self.uminus_layout(places, i + 1), &self.uminus_layout(places, i), blocks)
    }

    /// `U^{-,-1} -> ... -> U^{-,2}` over the given places.
    pub fn uminus_complex(&self, places: &[usize]) -> ComplexData {
        let ranks = (-1..=SELMER_TOP).map(|i| self.uminus_layout(places, i).iter().sum()).collect();
        let diffs = (-1..SELMER_TOP).map(|i| self.uminus_differential(places, i)).collect();
        ComplexData::new(&self.ring, -1, ranks, diffs).expect("U^- differential squares to zero")
    }

    /// `∂ : U^{-,i-1}_S -> C̃^i`, `(u, c) -> (0, u, c)`.
    pub fn boundary_map(&self, i: i32) -> Mat {
        let s = self.locals.len();
        let all = self.all_places();
        let mut blocks = Vec::new();
        for l in 0..s {
            blocks.push((1 + l, l, Mat::identity(self.locals[l].plus.dim(i))));
            blocks.push((1 + s + l, s + l, Mat::identity(bar_dim(&self.locals[l].bar, i - 1))));
        }
        assemble(&self.ring, &self.selmer_layout(i), &self.uminus_layout(&all, i - 1), blocks)
    }

    /// `C̃^i -> C^i(G, Y)`.
    pub fn projection(&self, i: i32) -> Mat {
        let blocks = vec![(0, 0, Mat::identity(bar_dim(&self.global, i)))];
        assemble(&self.ring, &[bar_dim(&self.global, i)], &self.selmer_layout(i), blocks)
    }

    /// `a -> (0, sign · res a)` into `U^{-,i}_S`.
    pub fn local_restriction(&self, i: i32, negate: bool) -> Mat {
        let s = self.locals.len();
        let all = self.all_places();
        let blocks = (0..s)
            .map(|l| {
                let r = self.restriction(l, i);
                (s + l, 0, if negate { r.neg(&self.ring) } else { r })
            })
            .collect();
        assemble(&self.ring, &self.uminus_layout(&all, i), &[bar_dim(&self.global, i)], blocks)
    }
}

/// A map of sides acting pointwise: `global` on `Y`-values, `plus[ℓ]` on
/// coordinates of each `U^+_ℓ`.
#[derive(Clone, Debug)]
pub struct PointwiseMap {
    pub global: Mat,
    pub plus: Vec<Mat>,
}

pub(crate) fn pointwise(ring: &ChainRing, a: &Mat, tuples: usize, v: &[u64]) -> Vec<u64> {
    assert_eq!(v.len(), tuples * a.cols(), "pointwise map applied to a vector of the wrong length");
    let mut out = Vec::with_capacity(tuples * a.rows());
    for t in 0..tuples {
        out.extend(a.apply(ring, &v[t * a.cols()..(t + 1) * a.cols()]));
    }
    out
}

impl PointwiseMap {
    pub fn global_cochain(&self, side: &Side, i: i32, v: &[u64]) -> Vec<u64> {
        pointwise(&side.ring, &self.global, bar_tuples(&side.global, i), v)
    }

    /// Applies the map to a `C̃^i` vector of `source`.
    pub fn selmer(&self, source: &Side, i: i32, v: &[u64]) -> Vec<u64> {
        let ring = &source.ring;
        let parts = split(v, &source.selmer_layout(i));
        let s = source.locals.len();
        let mut out = pointwise(ring, &self.global, bar_tuples(&source.global, i), parts[0]);
        for (l, loc) in source.locals.iter().enumerate() {
            out.extend(pointwise(ring, &self.plus[l], loc.plus.tuples(i), parts[1 + l]));
        }
        for (l, loc) in source.locals.iter().enumerate() {
            out.extend(pointwise(ring, &self.global, bar_tuples(&loc.bar, i - 1), parts[1 + s + l]));
        }
        out
    }

    /// Applies the map to a `U^{-,i}_S` vector of `source` over all places.
    pub fn uminus(&self, source: &Side, i: i32, v: &[u64]) -> Vec<u64> {
        let ring = &source.ring;
        let all = source.all_places();
        let parts = split(v, &source.uminus_layout(&all, i));
        let s = source.locals.len();
        let mut out = Vec::new();
        for (l, loc) in source.locals.iter().enumerate() {
            out.extend(pointwise(ring, &self.plus[l], loc.plus.tuples(i + 1), parts[l]));
        }
        for (l, loc) in source.locals.iter().enumerate() {
            out.extend(pointwise(ring, &self.global, bar_tuples(&loc.bar, i), parts[s + l]));
        }
        out
    }
}

/// The three sides attached to an instance: `X`, `X* = Hom(X, R)(1)` with
/// the dual conditions, and `X[ε]` with the conditions tensored up.
#[derive(Clone, Debug)]
pub struct InstanceSides {
    pub x: Side,
    pub dual: Side,
    pub eps: Side,
    /// `x -> x + 0 ε`
    pub lift: PointwiseMap,
    /// `x + ε y -> y`
    pub eps_part: PointwiseMap,
    /// `y -> ε y`
    pub eps_embed: PointwiseMap,
}

/// Annihilator-style dual of a local condition.
pub(crate) fn dual_condition(
    ring: &ChainRing,
    dual_module: &GModuleData,
    sub: &Subgroup,
    cond: &LocalCondition,
) -> LocalCondition {
    match cond {
        LocalCondition::Greenberg { basis } => {
            let ann = basis.transpose().smith(ring).free_kernel();
            LocalCondition::Greenberg { basis: ann }
        }
        LocalCondition::Unramified { .. } => {
            let sys = dual_module.invariants_system(ring, sub.elements());
            LocalCondition::Unramified { basis: sys.smith(ring).free_kernel() }
        }
    }
}

fn stack_pair(ring: &ChainRing, rows: usize, top: Option<&Mat>, bottom: Option<&Mat>, cols: usize) -> Mat {
    let mut m = Mat::zeros(2 * rows, cols);
    if let Some(t) = top {
        m.add_block(ring, 0, 0, t);
    }
    if let Some(b) = bottom {
        m.add_block(ring, rows, 0, b);
    }
    m
}

impl InstanceSides {
    pub fn new(inst: &SelmerInstance) -> Self {
        let ring = inst.ring();
        let g = inst.group();
        let x_mod = inst.module();
        let dual_mod = x_mod.twisted_dual(ring, g, inst.chi());
        let eps_mod = x_mod.dual_numbers(ring, inst.kappa());
        let subs: Vec<Subgroup> =
            inst.places().iter().map(|p| Subgroup::new(g, &p.subgroup).expect("validated")).collect();
        let x_places: Vec<(Subgroup, LocalCondition)> =
            subs.iter().cloned().zip(inst.places().iter().map(|p| p.condition.clone())).collect();
        let dual_places: Vec<(Subgroup, LocalCondition)> = x_places
            .iter()
            .map(|(s, c)| (s.clone(), dual_condition(ring, &dual_mod, s, c)))
            .collect();
        let eps_places: Vec<(Subgroup, LocalCondition)> = x_places
            .iter()
            .map(|(s, c)| {
                let b = c.basis();
                let mut d = Mat::zeros(2 * b.rows(), 2 * b.cols());
                d.add_block(ring, 0, 0, b);
                d.add_block(ring, b.rows(), b.cols(), b);
                (s.clone(), c.with_basis(d))
            })
            .collect();
        let r = x_mod.rank();
        let id = |n: usize| Mat::identity(n);
        let lift_of = |n: usize| stack_pair(ring, n, Some(&id(n)), None, n);
        let embed_of = |n: usize| stack_pair(ring, n, None, Some(&id(n)), n);
        let eps_of = |n: usize| stack_pair(ring, n, None, Some(&id(n)), n).transpose();
        let ks: Vec<usize> = inst.places().iter().map(|p| p.condition.basis().cols()).collect();
        Self {
            x: Side::new(ring, g, x_mod, &x_places),
            dual: Side::new(ring, g, &dual_mod, &dual_places),
            eps: Side::new(ring, g, &eps_mod, &eps_places),
            lift: PointwiseMap { global: lift_of(r), plus: ks.iter().map(|&k| lift_of(k)).collect() },
            eps_part: PointwiseMap { global: eps_of(r), plus: ks.iter().map(|&k| eps_of(k)).collect() },
            eps_embed: PointwiseMap { global: embed_of(r), plus: ks.iter().map(|&k| embed_of(k)).collect() },
        }
    }
}
