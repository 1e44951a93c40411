//! Cochain complexes of free `R`-modules, their cohomology, chain maps and cones.

use crate::matrix::{span_length, Mat, Smith};
use crate::ring::ChainRing;
use crate::CohomError;

/// A complex `C^lo -> ... -> C^hi` of free modules.
///
/// The top group has no outgoing differential, so cohomology is only
/// computed in degrees `lo..hi`.
#[derive(Clone, Debug)]
pub struct ComplexData {
    lo: i32,
    ranks: Vec<usize>,
    diffs: Vec<Mat>,
}

impl ComplexData {
    /// Checks shapes and `d ∘ d = 0` exactly.
    pub fn new(ring: &ChainRing, lo: i32, ranks: Vec<usize>, diffs: Vec<Mat>) -> Result<Self, CohomError> {
        if ranks.is_empty() || diffs.len() + 1 != ranks.len() {
            return Err(CohomError::InvalidComplex("need one differential between consecutive groups".into()));
        }
        for (k, d) in diffs.iter().enumerate() {
            if d.cols() != ranks[k] || d.rows() != ranks[k + 1] {
                return Err(CohomError::InvalidComplex(format!("differential {} has the wrong shape", lo + k as i32)));
            }
        }
        for k in 1..diffs.len() {
            if !diffs[k].mul(ring, &diffs[k - 1]).is_zero() {
                return Err(CohomError::InvalidComplex(format!("d∘d ≠ 0 at degree {}", lo + k as i32 - 1)));
            }
        }
        Ok(Self { lo, ranks, diffs })
    }

    pub fn zero(lo: i32, hi: i32) -> Self {
        let n = (hi - lo + 1) as usize;
        Self { lo, ranks: vec![0; n], diffs: vec![Mat::zeros(0, 0); n - 1] }
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.ranks.len() as i32 - 1
    }

    /// Rank of `C^i`, zero outside the stored range.
    pub fn rank(&self, i: i32) -> usize {
        if i < self.lo || i > self.hi() {
            0
        } else {
            self.ranks[(i - self.lo) as usize]
        }
    }

    /// `d^i : C^i -> C^{i+1}`; the zero map below the range.
    ///
    /// Panics for `i >= hi`, where the complex was truncated.
    pub fn differential(&self, i: i32) -> Mat {
        assert!(i < self.hi(), "differential {i} lies past the truncation");
        if i < self.lo {
            Mat::zeros(self.rank(i + 1), 0)
        } else {
            self.diffs[(i - self.lo) as usize].clone()
        }
    }

    pub fn apply_differential(&self, ring: &ChainRing, i: i32, v: &[u64]) -> Vec<u64> {
        if i < self.lo {
            return vec![0; self.rank(i + 1)];
        }
        self.diffs[(i - self.lo) as usize].apply(ring, v)
    }

    pub fn cohomology(&self, ring: &ChainRing, i: i32) -> Result<Cohomology, CohomError> {
        if i >= self.hi() {
            return Err(CohomError::DegreeOutOfRange { degree: i, lo: self.lo, hi: self.hi() - 1 });
        }
        Ok(Cohomology::compute(ring, i, &self.differential(i - 1), &self.differential(i)))
    }

    /// Length of `H^i` only, skipping representatives.
    pub fn cohomology_length(&self, ring: &ChainRing, i: i32) -> Result<u64, CohomError> {
        if i >= self.hi() {
            return Err(CohomError::DegreeOutOfRange { degree: i, lo: self.lo, hi: self.hi() - 1 });
        }
        let n = self.rank(i) as u64 * ring.exponent() as u64;
        Ok(n - span_length(ring, &self.differential(i)) - span_length(ring, &self.differential(i - 1)))
    }
}

/// `H^i = ker d^i / im d^{i-1}` with explicit structure.
#[derive(Clone, Debug)]
pub struct Cohomology {
    degree: i32,
    ring: ChainRing,
    invariants: Vec<u32>,
    representatives: Vec<Vec<u64>>,
    cocycles: Mat,
    boundary_map: Mat,
    cocycle_smith: Smith,
    boundary_smith: Smith,
    relation_smith: Smith,
    length: u64,
}

impl Cohomology {
    fn compute(ring: &ChainRing, degree: i32, d_in: &Mat, d_out: &Mat) -> Self {
        let n = d_out.cols();
        let out_smith = d_out.smith(ring);
        let cocycles = out_smith.kernel();
        let boundary_smith = d_in.smith(ring);
        let cocycle_smith = cocycles.smith(ring);
        let g = cocycles.cols();
        // relations among the cocycle generators, plus coordinates of boundaries
        let syzygies = cocycle_smith.kernel();
        let mut rel_cols: Vec<Vec<u64>> = (0..syzygies.cols()).map(|j| syzygies.column(j)).collect();
        for j in 0..d_in.cols() {
            let b = d_in.column(j);
            rel_cols.push(cocycle_smith.solve(&b).expect("boundaries are cocycles"));
        }
        let relations = Mat::from_columns(g, &rel_cols);
        let relation_smith = relations.smith(ring);
        let m = ring.exponent();
        let mut invariants = Vec::new();
        let mut representatives = Vec::new();
        for j in 0..g {
            let e = relation_smith.exponents().get(j).copied().unwrap_or(m);
            if e == 0 {
                continue;
            }
            invariants.push(e);
            representatives.push(cocycles.apply(ring, &relation_smith.row_basis_vector(j)));
        }
        let length = invariants.iter().map(|&e| e as u64).sum();
        debug_assert_eq!(length, m as u64 * n as u64 - out_smith.image_length() - boundary_smith.image_length());
        Self {
            degree,
            ring: *ring,
            invariants,
            representatives,
            cocycles,
            boundary_map: d_in.clone(),
            cocycle_smith,
            boundary_smith,
            relation_smith,
            length,
        }
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    /// Exponents `e` with `H ≅ ⊕ Z/p^e`.
    pub fn invariants(&self) -> &[u32] {
        &self.invariants
    }

    /// Cocycles whose classes generate the summands of [`Self::invariants`].
    pub fn representatives(&self) -> &[Vec<u64>] {
        &self.representatives
    }

    /// Length as an `R`-module, i.e. `log_p` of the order.
    pub fn length(&self) -> u64 {
        self.length
    }

    pub fn is_trivial(&self) -> bool {
        self.length == 0
    }

    /// Generators of the cocycles, as columns.
    pub fn cocycles(&self) -> &Mat {
        &self.cocycles
    }

    pub fn boundary_map(&self) -> &Mat {
        &self.boundary_map
    }

    pub fn boundary_length(&self) -> u64 {
        self.boundary_smith.image_length()
    }

    pub fn is_cocycle(&self, v: &[u64]) -> bool {
        self.cocycle_smith.contains(v)
    }

    pub fn is_coboundary(&self, v: &[u64]) -> bool {
        self.boundary_smith.contains(v)
    }

    /// Some `w` with `d w = v`.
    pub fn coboundary_preimage(&self, v: &[u64]) -> Option<Vec<u64>> {
        self.boundary_smith.solve(v)
    }

    /// Coordinates of the class of a cocycle against the representatives,
    /// each reduced modulo the matching `p^e`.
    pub fn class_coordinates(&self, v: &[u64]) -> Option<Vec<u64>> {
        let c = self.cocycle_smith.solve(v)?;
        let t = self.relation_smith.transform(&c);
        let m = self.ring.exponent();
        let mut out = Vec::new();
        for (j, &tj) in t.iter().enumerate() {
            let e = self.relation_smith.exponents().get(j).copied().unwrap_or(m);
            if e == 0 {
                continue;
            }
            out.push(tj % self.ring.p().pow(e));
        }
        Some(out)
    }
}

/// Length of the image of the map induced on cohomology by a cochain map.
pub fn induced_image_length(ring: &ChainRing, map: &Mat, source: &Cohomology, target: &Cohomology) -> u64 {
    let images = map.mul(ring, source.cocycles());
    span_length(ring, &images.hstack(target.boundary_map())) - target.boundary_length()
}

/// A degree-0 map of complexes given by one matrix per degree.
#[derive(Clone, Debug)]
pub struct ChainMap {
    lo: i32,
    maps: Vec<Mat>,
}

impl ChainMap {
    /// Checks `d_B f = f d_A` wherever both sides are defined.
    pub fn new(ring: &ChainRing, source: &ComplexData, target: &ComplexData, lo: i32, maps: Vec<Mat>) -> Result<Self, CohomError> {
        let f = Self { lo, maps };
        for i in lo..f.hi() {
            let fi = f.at(i, source, target);
            if fi.rows() != target.rank(i) || fi.cols() != source.rank(i) {
                return Err(CohomError::NotChainMap { degree: i });
            }
            if i < source.hi() && i < target.hi() && i < source.hi() && i < target.hi() {
                let lhs = target.differential(i).mul(ring, &fi);
                let rhs = f.at(i + 1, source, target).mul(ring, &source.differential(i));
                if lhs != rhs {
                    return Err(CohomError::NotChainMap { degree: i });
                }
            }
        }
        Ok(f)
    }

    pub fn identity(c: &ComplexData) -> Self {
        Self { lo: c.lo(), maps: (c.lo()..=c.hi()).map(|i| Mat::identity(c.rank(i))).collect() }
    }

    pub fn negated(&self, ring: &ChainRing) -> Self {
        Self { lo: self.lo, maps: self.maps.iter().map(|m| m.neg(ring)).collect() }
    }

    fn hi(&self) -> i32 {
        self.lo + self.maps.len() as i32
    }

    /// Matrix in degree `i`, the zero map outside the stored range.
    pub fn at(&self, i: i32, source: &ComplexData, target: &ComplexData) -> Mat {
        if i < self.lo || i >= self.hi() {
            Mat::zeros(target.rank(i), source.rank(i))
        } else {
            self.maps[(i - self.lo) as usize].clone()
        }
    }
}

/// `Cone(f)^i = A^{i+1} ⊕ B^i`, `d(a, b) = (-d a, f(a) + d b)`.
pub fn cone(ring: &ChainRing, source: &ComplexData, target: &ComplexData, f: &ChainMap) -> Result<ComplexData, CohomError> {
    ChainMap::new(ring, source, target, f.lo, f.maps.clone())?;
    let lo = (source.lo() - 1).min(target.lo());
    let hi = (source.hi() - 1).min(target.hi());
    let ranks: Vec<usize> = (lo..=hi).map(|i| source.rank(i + 1) + target.rank(i)).collect();
    let mut diffs = Vec::new();
    for i in lo..hi {
        let (a0, b0) = (source.rank(i + 1), target.rank(i));
        let (a1, b1) = (source.rank(i + 2), target.rank(i + 1));
        let mut d = Mat::zeros(a1 + b1, a0 + b0);
        d.add_block(ring, 0, 0, &source.differential(i + 1).neg(ring));
        d.add_block(ring, a1, 0, &f.at(i + 1, source, target));
        d.add_block(ring, a1, a0, &target.differential(i));
        diffs.push(d);
    }
    ComplexData::new(ring, lo, ranks, diffs)
}

/// One map `H^i(A) -> H^j(B)` in a long sequence, given on cochains.
pub struct SequenceTerm<'a> {
    pub complex: &'a ComplexData,
    pub degree: i32,
}

/// Outcome of the length comparison at one interior object of a sequence.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct JointCheck {
    pub label: String,
    pub length: u64,
    pub incoming_image: u64,
    pub outgoing_image: u64,
    pub exact: bool,
}

/// Checks exactness at every interior object of
/// `H(terms[0]) -> H(terms[1]) -> ... ` with `maps[k]` the cochain map
/// `terms[k] -> terms[k+1]`.
///
/// Since image ⊆ kernel always holds for a complex, exactness at a joint
/// is the length identity `len im(in) = len H - len im(out)`.
pub fn check_exact_sequence(
    ring: &ChainRing,
    terms: &[SequenceTerm<'_>],
    maps: &[Mat],
    labels: &[String],
) -> Result<Vec<JointCheck>, CohomError> {
    assert_eq!(terms.len(), maps.len() + 1);
    assert_eq!(labels.len(), terms.len());
    let cohom: Vec<Cohomology> =
        terms.iter().map(|t| t.complex.cohomology(ring, t.degree)).collect::<Result<_, _>>()?;
    let images: Vec<u64> = maps
        .iter()
        .enumerate()
        .map(|(k, m)| induced_image_length(ring, m, &cohom[k], &cohom[k + 1]))
        .collect();
    let mut out = Vec::new();
    for k in 1..terms.len() - 1 {
        let length = cohom[k].length();
        out.push(JointCheck {
            label: labels[k].clone(),
            length,
            incoming_image: images[k - 1],
            outgoing_image: images[k],
            exact: images[k - 1] + images[k] == length,
        });
    }
    Ok(out)
}

/// Long exact sequence of a cone, checked at every joint within range.
pub fn cone_sequence_check(
    ring: &ChainRing,
    source: &ComplexData,
    target: &ComplexData,
    f: &ChainMap,
) -> Result<Vec<JointCheck>, CohomError> {
    let c = cone(ring, source, target, f)?;
    let lo = source.lo().min(target.lo());
    let hi = (source.hi() - 1).min(target.hi() - 1).min(c.hi() - 1);
    let mut terms = Vec::new();
    let mut maps = Vec::new();
    let mut labels = Vec::new();
    for i in lo..hi {
        terms.push(SequenceTerm { complex: source, degree: i });
        labels.push(format!("H^{i}(A)"));
        maps.push(f.at(i, source, target));
        terms.push(SequenceTerm { complex: target, degree: i });
        labels.push(format!("H^{i}(B)"));
        let (a, b) = (source.rank(i + 1), target.rank(i));
        let mut inc = Mat::zeros(a + b, b);
        inc.add_block(ring, a, 0, &Mat::identity(b));
        maps.push(inc);
        terms.push(SequenceTerm { complex: &c, degree: i });
        labels.push(format!("H^{i}(Cone)"));
        let mut proj = Mat::zeros(a, a + b);
        proj.add_block(ring, 0, 0, &Mat::identity(a));
        maps.push(proj);
    }
    terms.push(SequenceTerm { complex: source, degree: hi });
    labels.push(format!("H^{hi}(A)"));
    check_exact_sequence(ring, &terms, &maps, &labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_of_identity_is_acyclic() {
        let ring = ChainRing::new(2, 2).unwrap();
        let d0 = Mat::from_rows(&ring, &[vec![1, 2], vec![0, 0], vec![2, 2]]);
        let d1 = Mat::from_rows(&ring, &[vec![0, 1, 0]]);
        assert!(d1.mul(&ring, &d0).is_zero());
        let c = ComplexData::new(&ring, 0, vec![2, 3, 1], vec![d0, d1]).unwrap();
        let id = ChainMap::identity(&c);
        let k = cone(&ring, &c, &c, &id).unwrap();
        for i in k.lo()..k.hi() {
            assert!(k.cohomology(&ring, i).unwrap().is_trivial(), "degree {i}");
        }
    }

    #[test]
    fn rejects_nonzero_square() {
        let ring = ChainRing::new(3, 1).unwrap();
        let d0 = Mat::from_rows(&ring, &[vec![1]]);
        let d1 = Mat::from_rows(&ring, &[vec![1]]);
        assert!(ComplexData::new(&ring, 0, vec![1, 1, 1], vec![d0, d1]).is_err());
    }
}
