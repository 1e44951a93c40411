//! Inhomogeneous cochains `C^i(H, X) = Maps(H^i, X)` of a subgroup `H`.
//!
//! A cochain of degree `i` is stored as a vector of length `r |H|^i`; the
//! tuple `(h_1, ..., h_i)` of subgroup positions is read as a base-`|H|`
//! numeral with `h_1` most significant, and component `c` of its value sits
//! at `tuple * r + c`.

use crate::complex::ComplexData;
use crate::group::{FiniteGroupData, Subgroup};
use crate::matrix::Mat;
use crate::module::GModuleData;
use crate::ring::ChainRing;
use crate::CohomError;

/// Caps applied before any cochain group is materialized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResourceLimits {
    pub max_group_order: usize,
    pub max_degree: usize,
    pub max_module_rank: usize,
    pub max_cochain_dim: usize,
}

impl Default for ResourceLimits {
    fn default() -> Self {
        Self { max_group_order: 16, max_degree: 3, max_module_rank: 4, max_cochain_dim: 1 << 15 }
    }
}

/// Cochains of a subgroup with coefficients in a module given by the
/// matrices of the subgroup's elements (in position order).
#[derive(Clone, Debug)]
pub struct Bar {
    ring: ChainRing,
    sub: Subgroup,
    actions: Vec<Mat>,
    rank: usize,
}

impl Bar {
    pub fn new(ring: &ChainRing, sub: &Subgroup, module: &GModuleData) -> Self {
        let actions = sub.elements().iter().map(|&g| module.action(g).clone()).collect();
        Self { ring: *ring, sub: sub.clone(), actions, rank: module.rank() }
    }

    /// Cochains valued in a module known only through matrices for the subgroup.
    pub fn from_actions(ring: &ChainRing, sub: &Subgroup, rank: usize, actions: Vec<Mat>) -> Self {
        assert_eq!(actions.len(), sub.order());
        Self { ring: *ring, sub: sub.clone(), actions, rank }
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.sub
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn action_at(&self, position: usize) -> &Mat {
        &self.actions[position]
    }

    pub fn tuples(&self, degree: usize) -> usize {
        self.sub.order().pow(degree as u32)
    }

    pub fn dim(&self, degree: usize) -> usize {
        self.rank * self.tuples(degree)
    }

    fn merged_tuple(&self, tuple: usize, degree: usize, k: usize) -> usize {
        // replace entries k-1 and k (1-based k) of a (degree+1)-tuple by their product
        let n = self.sub.order();
        let total = degree + 1;
        let mut digits = vec![0; total];
        let mut t = tuple;
        for slot in (0..total).rev() {
            digits[slot] = t % n;
            t /= n;
        }
        let merged = self.sub.mul(digits[k - 1], digits[k]);
        let mut out = 0;
        for (slot, &d) in digits.iter().enumerate() {
            if slot == k {
                continue;
            }
            out = out * n + if slot == k - 1 { merged } else { d };
        }
        out
    }

    /// `d : C^degree -> C^{degree+1}`.
    pub fn differential(&self, degree: usize) -> Mat {
        let r = self.rank;
        let ring = &self.ring;
        let n = self.sub.order();
        let src_tuples = self.tuples(degree);
        let tgt_tuples = self.tuples(degree + 1);
        let mut d = Mat::zeros(tgt_tuples * r, src_tuples * r);
        let minus_one = ring.neg(1);
        for t in 0..tgt_tuples {
            let first = t / src_tuples;
            let tail = t % src_tuples;
            d.add_block(ring, t * r, tail * r, &self.actions[first]);
            for k in 1..=degree {
                let sign = if k % 2 == 0 { 1 } else { minus_one };
                let col = self.merged_tuple(t, degree, k);
                for c in 0..r {
                    let idx = d.get(t * r + c, col * r + c);
                    d.set(t * r + c, col * r + c, ring.add(idx, sign));
                }
            }
            let sign = if (degree + 1).is_multiple_of(2) { 1 } else { minus_one };
            let col = t / n;
            for c in 0..r {
                let idx = d.get(t * r + c, col * r + c);
                d.set(t * r + c, col * r + c, ring.add(idx, sign));
            }
        }
        d
    }

    /// Applies `d` without materializing the matrix.
    pub fn apply_differential(&self, degree: usize, f: &[u64]) -> Vec<u64> {
        assert_eq!(f.len(), self.dim(degree));
        let r = self.rank;
        let ring = &self.ring;
        let n = self.sub.order();
        let src_tuples = self.tuples(degree);
        let tgt_tuples = self.tuples(degree + 1);
        let mut out = vec![0; tgt_tuples * r];
        for t in 0..tgt_tuples {
            let first = t / src_tuples;
            let tail = t % src_tuples;
            let acted = self.actions[first].apply(ring, &f[tail * r..(tail + 1) * r]);
            let slot = &mut out[t * r..(t + 1) * r];
            for c in 0..r {
                slot[c] = ring.add(slot[c], acted[c]);
            }
            for k in 1..=degree {
                let col = self.merged_tuple(t, degree, k);
                for c in 0..r {
                    let v = f[col * r + c];
                    slot[c] = if k % 2 == 0 { ring.add(slot[c], v) } else { ring.sub(slot[c], v) };
                }
            }
            let col = t / n;
            for c in 0..r {
                let v = f[col * r + c];
                slot[c] = if (degree + 1).is_multiple_of(2) { ring.add(slot[c], v) } else { ring.sub(slot[c], v) };
            }
        }
        out
    }

    /// The complex `C^0 -> ... -> C^top`.
    pub fn complex(&self, top: usize) -> ComplexData {
        let ranks = (0..=top).map(|i| self.dim(i)).collect();
        let diffs = (0..top).map(|i| self.differential(i)).collect();
        ComplexData::new(&self.ring, 0, ranks, diffs).expect("the bar differential squares to zero")
    }

    /// Applies a module map pointwise, `(f c)(h..) = A c(h..)`, to cochains
    /// of this subgroup with values in the source of `A`.
    pub fn pointwise(&self, a: &Mat, degree: usize) -> Mat {
        a.block_diagonal(self.tuples(degree))
    }

    pub fn apply_pointwise(ring: &ChainRing, a: &Mat, f: &[u64]) -> Vec<u64> {
        let r = a.cols();
        let mut out = Vec::with_capacity(f.len() / r * a.rows());
        for chunk in f.chunks(r) {
            out.extend(a.apply(ring, chunk));
        }
        out
    }

    /// Position tuple of a subgroup `degree`-tuple inside `outer`.
    fn outer_tuple(&self, outer: &Bar, tuple: usize, degree: usize) -> usize {
        let n = self.sub.order();
        let big = outer.sub.order();
        let mut digits = vec![0; degree];
        let mut t = tuple;
        for slot in (0..degree).rev() {
            digits[slot] = t % n;
            t /= n;
        }
        digits.iter().fold(0, |acc, &d| {
            let g = self.sub.element(d);
            acc * big + outer.sub.position(g).expect("restriction to a subgroup")
        })
    }

    /// Restriction `C^degree(outer) -> C^degree(self)` as a matrix.
    pub fn restriction_from(&self, outer: &Bar, degree: usize) -> Mat {
        assert_eq!(self.rank, outer.rank);
        let r = self.rank;
        let mut m = Mat::zeros(self.dim(degree), outer.dim(degree));
        for t in 0..self.tuples(degree) {
            let o = self.outer_tuple(outer, t, degree);
            for c in 0..r {
                m.set(t * r + c, o * r + c, 1);
            }
        }
        m
    }

    pub fn restrict(&self, outer: &Bar, degree: usize, f: &[u64]) -> Vec<u64> {
        let r = self.rank;
        let mut out = Vec::with_capacity(self.dim(degree));
        for t in 0..self.tuples(degree) {
            let o = self.outer_tuple(outer, t, degree);
            out.extend_from_slice(&f[o * r..(o + 1) * r]);
        }
        out
    }
}

/// Cup product `C^i(H, X) ⊗ C^j(H, Y) -> C^{i+j}(H, R)` for the pairing
/// `<x, y> = x^T Π y`:
/// `(a ∪ b)(h_1..h_{i+j}) = <a(h_1..h_i), h_1⋯h_i · b(h_{i+1}..h_{i+j})>`.
pub fn cup(left: &Bar, i: usize, a: &[u64], right: &Bar, j: usize, b: &[u64], pairing: &Mat) -> Vec<u64> {
    let ring = &left.ring;
    let n = left.sub.order();
    assert_eq!(n, right.sub.order());
    assert_eq!((pairing.rows(), pairing.cols()), (left.rank, right.rank));
    assert_eq!(a.len(), left.dim(i));
    assert_eq!(b.len(), right.dim(j));
    let (ra, rb) = (left.rank, right.rank);
    let tj = right.tuples(j);
    let ti = left.tuples(i);
    // product h_1⋯h_i for each i-tuple
    let mut products = vec![left.sub.identity_position(); ti];
    for (t, slot) in products.iter_mut().enumerate() {
        let mut digits = vec![0; i];
        let mut x = t;
        for s in (0..i).rev() {
            digits[s] = x % n;
            x /= n;
        }
        *slot = digits.iter().fold(left.sub.identity_position(), |acc, &d| left.sub.mul(acc, d));
    }
    let mut out = vec![0; ti * tj];
    for ta in 0..ti {
        let av = &a[ta * ra..(ta + 1) * ra];
        if av.iter().all(|&v| v == 0) {
            continue;
        }
        // row vector a^T Π ρ(h_1⋯h_i)
        let row_pi: Vec<u64> = (0..rb)
            .map(|c| av.iter().enumerate().fold(0, |acc, (k, &x)| ring.add(acc, ring.mul(x, pairing.get(k, c)))))
            .collect();
        let act = right.action_at(products[ta]);
        let row: Vec<u64> = (0..rb)
            .map(|c| (0..rb).fold(0, |acc, k| ring.add(acc, ring.mul(row_pi[k], act.get(k, c)))))
            .collect();
        for tb in 0..tj {
            let bv = &b[tb * rb..(tb + 1) * rb];
            let v = row.iter().zip(bv).fold(0, |acc, (&x, &y)| ring.add(acc, ring.mul(x, y)));
            out[ta * tj + tb] = v;
        }
    }
    out
}

/// `bar_complex(G, X, d_max)`: the cochain complex in degrees `0..=d_max`.
pub fn bar_complex(
    ring: &ChainRing,
    group: &FiniteGroupData,
    module: &GModuleData,
    d_max: usize,
    limits: &ResourceLimits,
) -> Result<ComplexData, CohomError> {
    check_resources(group.order(), module.rank(), d_max, limits)?;
    Ok(Bar::new(ring, &Subgroup::whole(group), module).complex(d_max))
}

pub fn check_resources(order: usize, rank: usize, degree: usize, limits: &ResourceLimits) -> Result<(), CohomError> {
    let dim = order.checked_pow(degree as u32).and_then(|t| t.checked_mul(rank));
    if order > limits.max_group_order || degree > limits.max_degree || dim.is_none_or(|d| d > limits.max_cochain_dim) {
        return Err(CohomError::ResourceBound { order, rank, degree });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn differential_matches_matrix_and_squares_to_zero() {
        let ring = ChainRing::new(2, 2).unwrap();
        let g = FiniteGroupData::dihedral(3).unwrap();
        let sign: Vec<u64> = (0..6).map(|a| if a < 3 { 1 } else { 3 }).collect();
        let x = GModuleData::character(&ring, &g, &sign).unwrap();
        let bar = Bar::new(&ring, &Subgroup::whole(&g), &x);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for deg in 0..2 {
            let f: Vec<u64> = (0..bar.dim(deg)).map(|_| rng.gen_range(0..4)).collect();
            let df = bar.apply_differential(deg, &f);
            assert_eq!(df, bar.differential(deg).apply(&ring, &f));
            assert!(bar.apply_differential(deg + 1, &df).iter().all(|&v| v == 0));
        }
    }
}
