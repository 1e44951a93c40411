//! Seeded random instances and random classes on them.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cochain::{Bar, ResourceLimits};
use crate::group::{FiniteGroupData, Subgroup};
use crate::matrix::Mat;
use crate::module::GModuleData;
use crate::pairing::{random_combination, Workspace};
use crate::ring::ChainRing;
use crate::selmer::{LocalCondition, Place, SelmerInstance};
use crate::CohomError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub max_group_order: usize,
    pub max_local_order: usize,
    pub max_rank: usize,
    pub max_extra_places: usize,
    /// Build the one-place shape: every place but the designated one has
    /// order prime to `p` and acts without fixed vectors.
    pub single_place: bool,
    /// Fix the prime instead of drawing it.
    pub prime: Option<u64>,
    /// Draw candidates until one has a nonzero height pairing on sampled
    /// classes, up to this many; zero disables the search.
    pub seek_nonzero_pairing: usize,
    /// Give the first extra place the designated subgroup, with `G_p` acting
    /// trivially on `X` and `F^- X ≠ 0`, so classes supported at one of the two
    /// places can pair nontrivially. At odd `p` this uses `G = Z/3 × Z/3`.
    pub twin_place: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            max_group_order: 16,
            max_local_order: 8,
            max_rank: 3,
            max_extra_places: 2,
            single_place: false,
            prime: None,
            seek_nonzero_pairing: 0,
            twin_place: false,
        }
    }
}

/// A random instance together with classes `x_Iw`, `x_f` (with `pr x_Iw = x`) and `y_f`.
#[derive(Clone, Debug)]
pub struct SampledClasses {
    pub x_iw: Vec<u64>,
    pub x_f: Vec<u64>,
    pub y_f: Vec<u64>,
}

#[derive(Clone, Copy)]
enum Shape {
    Cyclic(usize),
    Product(usize, usize),
    Dihedral(usize),
}

fn build_group(shape: Shape) -> Result<FiniteGroupData, CohomError> {
    match shape {
        Shape::Cyclic(n) => FiniteGroupData::cyclic(n),
        Shape::Product(a, b) => FiniteGroupData::product(&[a, b]),
        Shape::Dihedral(m) => FiniteGroupData::dihedral(m),
    }
}

fn order_of(shape: Shape) -> usize {
    match shape {
        Shape::Cyclic(n) => n,
        Shape::Product(a, b) => a * b,
        Shape::Dihedral(m) => 2 * m,
    }
}

fn shapes_for(p: u64) -> Vec<Shape> {
    match p {
        2 => vec![
            Shape::Cyclic(2),
            Shape::Cyclic(4),
            Shape::Cyclic(8),
            Shape::Product(2, 2),
            Shape::Product(2, 4),
            Shape::Dihedral(2),
            Shape::Dihedral(3),
            Shape::Dihedral(4),
            Shape::Product(2, 6),
            Shape::Product(4, 4),
        ],
        3 => vec![
            Shape::Cyclic(3),
            Shape::Cyclic(6),
            Shape::Cyclic(9),
            Shape::Product(3, 3),
            Shape::Dihedral(3),
            Shape::Product(3, 4),
        ],
        _ => vec![Shape::Cyclic(5), Shape::Cyclic(10)],
    }
}

/// A generating set, chosen greedily in random order.
fn generators(g: &FiniteGroupData, rng: &mut impl Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.order()).collect();
    order.shuffle(rng);
    let mut gens = Vec::new();
    let mut span = g.generated_subgroup(&gens);
    for a in order {
        if !span.contains(&a) {
            gens.push(a);
            span = g.generated_subgroup(&gens);
        }
    }
    gens
}

/// Units of `R` whose order divides `exponent`.
fn roots_of_unity(ring: &ChainRing, exponent: u64) -> Vec<u64> {
    (1..ring.modulus()).filter(|&u| ring.is_unit(u) && ring.pow(u, exponent) == 1).collect()
}

/// A random character `G -> R^×`, trivial when no attempt extends.
fn random_character(ring: &ChainRing, g: &FiniteGroupData, rng: &mut impl Rng) -> Vec<u64> {
    for _ in 0..20 {
        let gens = generators(g, rng);
        let images: Vec<u64> = gens
            .iter()
            .map(|&a| *roots_of_unity(ring, g.element_order(a) as u64).choose(rng).expect("1 is a root"))
            .collect();
        if let Some(chi) = g.extend_hom(&gens, &images, 1u64, |a, b| ring.mul(*a, *b)) {
            return chi;
        }
    }
    vec![1; g.order()]
}

/// A random character with prescribed values on some elements.
fn character_with(ring: &ChainRing, g: &FiniteGroupData, rng: &mut impl Rng, wanted: &[(usize, u64)]) -> Option<Vec<u64>> {
    (0..200).map(|_| random_character(ring, g, rng)).find(|chi| wanted.iter().all(|&(a, v)| chi[a] == v))
}

/// A random element of `Hom(G, R)`.
fn random_additive(ring: &ChainRing, g: &FiniteGroupData, rng: &mut impl Rng) -> Vec<u64> {
    let bar = Bar::new(ring, &Subgroup::whole(g), &GModuleData::trivial(g, 1));
    let homs = bar.differential(1).smith(ring).kernel();
    random_combination(ring, rng, &homs)
}

/// Extends `A` by a character: `[[A, b], [0, ψ]]` with `b = c ψ` for a random
/// cocycle `c ∈ Z^1(G, A ⊗ ψ^{-1})`.
fn extend_module(ring: &ChainRing, g: &FiniteGroupData, a: &GModuleData, psi: &[u64], rng: &mut impl Rng) -> GModuleData {
    let m = a.rank();
    let twisted: Vec<Mat> = (0..g.order())
        .map(|h| a.action(h).scale(ring, ring.inv(psi[h]).expect("characters are unit valued")))
        .collect();
    let bar = Bar::from_actions(ring, &Subgroup::whole(g), m, twisted);
    let c = random_combination(ring, rng, &bar.differential(1).smith(ring).kernel());
    let action = (0..g.order())
        .map(|h| {
            let mut rho = Mat::zeros(m + 1, m + 1);
            rho.add_block(ring, 0, 0, a.action(h));
            for i in 0..m {
                rho.set(i, m, ring.mul(c[h * m + i], psi[h]));
            }
            rho.set(m, m, psi[h]);
            rho
        })
        .collect();
    GModuleData::new(ring, g, m + 1, action).expect("extension of a module by a character")
}

/// A random matrix in `GL_r(R)` with its inverse.
fn random_invertible(ring: &ChainRing, r: usize, rng: &mut impl Rng) -> (Mat, Mat) {
    loop {
        let mut t = Mat::zeros(r, r);
        for i in 0..r {
            for j in 0..r {
                t.set(i, j, rng.gen_range(0..ring.modulus()));
            }
        }
        if let Some(inv) = t.inverse(ring) {
            return (t, inv);
        }
    }
}

fn random_subgroup(g: &FiniteGroupData, rng: &mut impl Rng, max_order: usize, allowed: impl Fn(usize) -> bool) -> Vec<usize> {
    let pool: Vec<usize> = (0..g.order()).filter(|&a| allowed(a)).collect();
    for _ in 0..50 {
        let count = rng.gen_range(1..=2);
        let gens: Vec<usize> = (0..count).map(|_| *pool.choose(rng).expect("identity is allowed")).collect();
        let sub = g.generated_subgroup(&gens);
        if sub.len() <= max_order && sub.iter().all(|&a| allowed(a)) && sub.len() > 1 {
            return sub;
        }
    }
    vec![g.identity()]
}

fn p_part_subgroup(g: &FiniteGroupData, p: u64, rng: &mut impl Rng, max_order: usize) -> Vec<usize> {
    let p_elements: Vec<usize> =
        (0..g.order()).filter(|&a| a != g.identity() && (g.element_order(a) as u64).is_power_of(p)).collect();
    if p_elements.is_empty() {
        return random_subgroup(g, rng, max_order, |_| true);
    }
    for attempt in 0..50 {
        let mut gens = vec![*p_elements.choose(rng).expect("nonempty")];
        if rng.gen_bool(0.3) {
            gens.push(rng.gen_range(0..g.order()));
        }
        let sub = g.generated_subgroup(&gens);
        // a proper subgroup is preferred for the first few tries
        if sub.len() <= max_order && (sub.len() < g.order() || attempt >= 5) {
            return sub;
        }
    }
    g.generated_subgroup(&[p_elements[0]])
}

trait PowerOf {
    fn is_power_of(self, p: u64) -> bool;
}

impl PowerOf for u64 {
    fn is_power_of(mut self, p: u64) -> bool {
        while self > 1 && self.is_multiple_of(p) {
            self /= p;
        }
        self == 1
    }
}

/// Maximal free direct summand of the invariants of `X` under `sub`.
fn free_invariants(ring: &ChainRing, x: &GModuleData, sub: &[usize]) -> Mat {
    x.invariants_system(ring, sub).smith(ring).free_kernel()
}

/// Random local invariants satisfying reciprocity.
fn random_invariants(
    ring: &ChainRing,
    g: &FiniteGroupData,
    chi: &[u64],
    places: &[Place],
    rng: &mut impl Rng,
) -> Result<Vec<Vec<u64>>, CohomError> {
    let unit = GModuleData::character(ring, g, chi)?;
    let global = Bar::new(ring, &Subgroup::whole(g), &unit);
    let cocycles = global.differential(2).smith(ring).kernel();
    let locals: Vec<Bar> =
        places.iter().map(|p| Bar::new(ring, &Subgroup::new(g, &p.subgroup).expect("subgroup"), &unit)).collect();
    let sizes: Vec<usize> = locals.iter().map(|b| b.dim(2)).collect();
    let total: usize = sizes.iter().sum();
    let mut rows: Vec<Vec<u64>> = Vec::new();
    let mut offset = 0;
    for (b, &n) in locals.iter().zip(&sizes) {
        let dt = b.differential(1).transpose();
        for i in 0..dt.rows() {
            let mut row = vec![0; total];
            row[offset..offset + n].copy_from_slice(dt.row(i));
            rows.push(row);
        }
        offset += n;
    }
    for j in 0..cocycles.cols() {
        let c = cocycles.column(j);
        let mut row = Vec::with_capacity(total);
        for b in &locals {
            row.extend(b.restrict(&global, 2, &c));
        }
        rows.push(row);
    }
    let system = Mat::from_columns(total, &rows).transpose();
    let kernel = system.smith(ring).kernel();
    let mut phi = random_combination(ring, rng, &kernel);
    for _ in 0..5 {
        if phi.iter().any(|&v| v != 0) {
            break;
        }
        phi = random_combination(ring, rng, &kernel);
    }
    let mut out = Vec::new();
    let mut offset = 0;
    for &n in &sizes {
        out.push(phi[offset..offset + n].to_vec());
        offset += n;
    }
    Ok(out)
}

fn pick_prime(rng: &mut impl Rng, fixed: Option<u64>) -> (u64, u32) {
    match fixed {
        Some(2) => return (2, rng.gen_range(1..=3)),
        Some(3) => return (3, rng.gen_range(1..=2)),
        Some(p) => return (p, 1),
        None => {}
    }
    match rng.gen_range(0..10) {
        0..=4 => (2, rng.gen_range(1..=3)),
        5..=8 => (3, rng.gen_range(1..=2)),
        _ => (5, 1),
    }
}

/// A seeded instance. Groups have order at most `config.max_group_order`.
pub fn generate_instance(seed: u64, config: &GeneratorConfig) -> Result<SelmerInstance, CohomError> {
    if config.seek_nonzero_pairing == 0 || config.single_place {
        return draw_instance(seed, seed, config);
    }
    let mut first = None;
    for attempt in 0..config.seek_nonzero_pairing as u64 {
        let inst = draw_instance(seed.wrapping_add(attempt << 32), seed, config)?;
        if has_nonzero_pairing(&inst, seed) {
            return Ok(inst);
        }
        first.get_or_insert(inst);
    }
    Ok(first.expect("at least one attempt"))
}

fn has_nonzero_pairing(inst: &SelmerInstance, seed: u64) -> bool {
    let Ok(ws) = Workspace::new(inst) else { return false };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5);
    (0..4).any(|_| {
        let c = sample_classes(&ws, &mut rng);
        matches!(ws.height_pairing(&c.x_f, &c.y_f), Ok(v) if v != 0)
    })
}

fn draw_instance(seed: u64, label_seed: u64, config: &GeneratorConfig) -> Result<SelmerInstance, CohomError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limits = ResourceLimits::default();
    if config.single_place {
        return single_place_instance(&mut rng, label_seed, config, &limits);
    }
    for _ in 0..20 {
        let (p, exponent) = pick_prime(&mut rng, config.prime);
        let twin = config.twin_place;
        if twin && p > 3 {
            continue;
        }
        let ring = ChainRing::new(p, exponent)?;
        let shapes: Vec<Shape> = if twin && p == 3 {
            vec![Shape::Product(3, 3)]
        } else {
            shapes_for(p).into_iter().filter(|&s| order_of(s) <= config.max_group_order).collect()
        };
        let Some(&shape) = shapes.choose(&mut rng) else { continue };
        let g = build_group(shape)?;
        let chi = if rng.gen_bool(0.3) { random_character(&ring, &g, &mut rng) } else { vec![1; g.order()] };
        let gp = if twin && p == 3 {
            (0..g.order()).collect()
        } else {
            p_part_subgroup(&g, p, &mut rng, config.max_local_order)
        };
        let trivial_on_gp: Vec<(usize, u64)> = gp.iter().map(|&a| (a, 1)).collect();
        let local_character = |rng: &mut ChaCha8Rng| {
            character_with(&ring, &g, rng, &trivial_on_gp).unwrap_or_else(|| vec![1; g.order()])
        };
        // κ should see the designated place, and X should have vectors fixed
        // there but not globally, so that local H^0 carries new classes
        let mut kappa = random_additive(&ring, &g, &mut rng);
        for _ in 0..10 {
            if gp.iter().any(|&a| kappa[a] != 0) {
                break;
            }
            kappa = random_additive(&ring, &g, &mut rng);
        }
        let r = rng.gen_range(1..=config.max_rank.min(limits.max_module_rank / 2 + 1).max(1));
        let first = if twin || rng.gen_bool(0.5) { local_character(&mut rng) } else { random_character(&ring, &g, &mut rng) };
        let mut x = GModuleData::character(&ring, &g, &first)?;
        while x.rank() < r {
            let psi = if twin { local_character(&mut rng) } else { random_character(&ring, &g, &mut rng) };
            x = extend_module(&ring, &g, &x, &psi, &mut rng);
        }
        let (t, t_inv) = random_invertible(&ring, r, &mut rng);
        let x = x.conjugate(&ring, &t, &t_inv);
        let flag = |k: usize| t.select_columns(&(0..k).collect::<Vec<_>>());
        let mut places = Vec::new();
        let k = match (twin, r) {
            (true, _) => rng.gen_range(0..r),
            (false, 1) => rng.gen_range(0..=1),
            (false, _) => rng.gen_range(1..r),
        };
        places.push(Place {
            name: "p".into(),
            subgroup: gp.clone(),
            condition: LocalCondition::Greenberg { basis: flag(k) },
            invariant: Vec::new(),
        });
        let extra = rng.gen_range(1..=config.max_extra_places.max(1));
        for e in 0..extra {
            let name = format!("l{}", e + 1);
            let same = (twin && e == 0) || rng.gen_bool(0.35);
            let unramified = !(twin && e == 0) && rng.gen_bool(0.5);
            let (subgroup, condition) = if unramified {
                let sub = if same && gp.iter().all(|&a| kappa[a] == 0) {
                    gp.clone()
                } else {
                    random_subgroup(&g, &mut rng, config.max_local_order, |a| kappa[a] == 0)
                };
                let basis = free_invariants(&ring, &x, &sub);
                (sub, LocalCondition::Unramified { basis })
            } else {
                let sub = if same { gp.clone() } else { random_subgroup(&g, &mut rng, config.max_local_order, |_| true) };
                (sub, LocalCondition::Greenberg { basis: flag(rng.gen_range(0..=r)) })
            };
            places.push(Place { name, subgroup, condition, invariant: Vec::new() });
        }
        for place in &mut places {
            place.invariant = vec![0; place.subgroup.len() * place.subgroup.len()];
        }
        let invariants = random_invariants(&ring, &g, &chi, &places, &mut rng)?;
        for (place, inv) in places.iter_mut().zip(invariants) {
            place.invariant = inv;
        }
        let label = format!("seed {label_seed}: p = {p}, M = {exponent}, |G| = {}, rank {r}", g.order());
        match SelmerInstance::new(label, ring, g, x, chi, kappa, places, 0, &limits) {
            Ok(inst) => return Ok(inst),
            Err(CohomError::ResourceBound { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(CohomError::Generation(format!("no admissible instance for seed {seed}")))
}

/// `G = Z/3 × (Z/2)^k` with `k ∈ {1, 2}`, `p = 3`: the designated place sees the
/// 3-part and every other place has order prime to 3, acting on `X` and on
/// `R(1)` through a character that is `-1` on an element of order 2.
fn single_place_instance(
    rng: &mut ChaCha8Rng,
    seed: u64,
    config: &GeneratorConfig,
    limits: &ResourceLimits,
) -> Result<SelmerInstance, CohomError> {
    let ring = ChainRing::new(3, rng.gen_range(1..=2))?;
    // a unit of order 4 does not exist in Z/3^M, so the prime-to-3 part is 2-elementary
    let twos = if rng.gen_bool(0.5) { vec![2] } else { vec![2, 2] };
    let orders: Vec<usize> = std::iter::once(3).chain(twos.iter().copied()).collect();
    let g = FiniteGroupData::product(&orders)?;
    // (0, 1, ..) has order 2 and (1, 0, ..) generates the 3-part
    let tail: usize = twos.iter().product();
    let involution = tail / 2;
    let three = tail;
    let minus_one = ring.neg(1);
    let chi = character_with(&ring, &g, rng, &[(involution, minus_one), (three, 1)])
        .ok_or_else(|| CohomError::Generation("no odd character".into()))?;
    let kappa = random_additive(&ring, &g, rng);
    let r = rng.gen_range(1..=config.max_rank.min(3));
    let odd = |rng: &mut ChaCha8Rng| {
        character_with(&ring, &g, rng, &[(involution, minus_one)]).expect("chi itself qualifies")
    };
    let mut x = GModuleData::character(&ring, &g, &odd(rng))?;
    while x.rank() < r {
        let psi = odd(rng);
        x = extend_module(&ring, &g, &x, &psi, rng);
    }
    let (t, t_inv) = random_invertible(&ring, r, rng);
    let x = x.conjugate(&ring, &t, &t_inv);
    let flag = |k: usize| t.select_columns(&(0..k).collect::<Vec<_>>());
    let gp = g.generated_subgroup(&[three]);
    let k = if r == 1 { 1 } else { rng.gen_range(1..r) };
    let mut places = vec![Place {
        name: "p".into(),
        subgroup: gp,
        condition: LocalCondition::Greenberg { basis: flag(k) },
        invariant: Vec::new(),
    }];
    let coprime = g.generated_subgroup(&[involution]);
    let cond = if rng.gen_bool(0.5) {
        LocalCondition::Unramified { basis: free_invariants(&ring, &x, &coprime) }
    } else {
        LocalCondition::Greenberg { basis: flag(rng.gen_range(0..=r)) }
    };
    places.push(Place { name: "l1".into(), subgroup: coprime, condition: cond, invariant: Vec::new() });
    let invariants = random_invariants(&ring, &g, &chi, &places, rng)?;
    for (place, inv) in places.iter_mut().zip(invariants) {
        place.invariant = inv;
    }
    let label = format!("seed {seed}: one-place shape, p = 3, M = {}, |G| = {}, rank {r}", ring.exponent(), g.order());
    SelmerInstance::new(label, ring, g, x, chi, kappa, places, 0, limits)
}

/// Random `x_Iw ∈ Z^1(G, X[ε])` and `x_f = (pr x_Iw, x^+, λ) ∈ Z̃^1(X)`, plus `y_f ∈ Z̃^1(X*)`.
pub fn sample_classes(ws: &Workspace, rng: &mut impl Rng) -> SampledClasses {
    let ring = ws.ring();
    let s = &ws.sides;
    let n_iw = s.eps.global.dim(1);
    let layout = s.x.selmer_layout(1);
    let n_local: usize = layout[1..].iter().sum();
    let pr = s.eps.global.pointwise(&ws.reduce.global, 1);
    let d_eps = s.eps.global.differential(1);
    let mut lift = Mat::zeros(pr.rows() + n_local, n_iw + n_local);
    lift.add_block(ring, 0, 0, &pr);
    lift.add_block(ring, pr.rows(), n_iw, &Mat::identity(n_local));
    let selmer = s.x.selmer_differential(1).mul(ring, &lift);
    let mut eqs = Mat::zeros(d_eps.rows(), n_iw + n_local);
    eqs.add_block(ring, 0, 0, &d_eps);
    let system = eqs.vstack(&selmer);
    let v = random_combination(ring, rng, &system.smith(ring).kernel());
    let x_iw = v[..n_iw].to_vec();
    let mut x_f = pr.apply(ring, &x_iw);
    x_f.extend_from_slice(&v[n_iw..]);
    let y_f = random_pairable(ws, &x_f, rng);
    SampledClasses { x_iw, x_f, y_f }
}

/// A random `y_f ∈ Z̃^1(X*)` for which `β(x_f) ∪ y` is a global coboundary.
pub fn random_pairable(ws: &Workspace, x_f: &[u64], rng: &mut impl Rng) -> Vec<u64> {
    let ring = ws.ring();
    let cocycle = ws.sides.dual.selmer_differential(1);
    let system = match ws.bockstein(x_f) {
        Ok(z_f) => cocycle.vstack(&ws.pairing_obstruction(&z_f)),
        Err(_) => cocycle,
    };
    random_combination(ring, rng, &system.smith(ring).kernel())
}

/// A random global 1-cocycle of `X`.
pub fn random_global_cocycle(ws: &Workspace, rng: &mut impl Rng) -> Vec<u64> {
    let x = &ws.sides.x.global;
    random_combination(ws.ring(), rng, &x.differential(1).smith(ws.ring()).kernel())
}
