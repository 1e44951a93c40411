//! Free `R[G]`-modules of finite rank, given by action matrices.

use serde::{Deserialize, Serialize};

use crate::group::FiniteGroupData;
use crate::matrix::Mat;
use crate::ring::ChainRing;
use crate::CohomError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GModuleData {
    rank: usize,
    /// `action[g]` is the matrix of `g` acting on column vectors.
    action: Vec<Mat>,
}

impl GModuleData {
    pub fn new(ring: &ChainRing, group: &FiniteGroupData, rank: usize, action: Vec<Mat>) -> Result<Self, CohomError> {
        let bad = |msg: String| Err(CohomError::InvalidModule(msg));
        if action.len() != group.order() {
            return bad(format!("{} matrices for a group of order {}", action.len(), group.order()));
        }
        if action.iter().any(|m| m.rows() != rank || m.cols() != rank) {
            return bad("action matrices have the wrong size".into());
        }
        if action[group.identity()] != Mat::identity(rank) {
            return bad("identity does not act trivially".into());
        }
        for a in 0..group.order() {
            for b in 0..group.order() {
                if action[a].mul(ring, &action[b]) != action[group.mul(a, b)] {
                    return bad(format!("action is not multiplicative at ({a}, {b})"));
                }
            }
        }
        // multiplicativity plus a trivial identity already force invertibility
        Ok(Self { rank, action })
    }

    pub fn trivial(group: &FiniteGroupData, rank: usize) -> Self {
        Self { rank, action: vec![Mat::identity(rank); group.order()] }
    }

    /// Rank one with `g` acting by the unit `chi[g]`.
    pub fn character(ring: &ChainRing, group: &FiniteGroupData, chi: &[u64]) -> Result<Self, CohomError> {
        let action = chi
            .iter()
            .map(|&c| {
                let mut m = Mat::zeros(1, 1);
                m.set(0, 0, c);
                m
            })
            .collect();
        Self::new(ring, group, 1, action)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn action(&self, g: usize) -> &Mat {
        &self.action[g]
    }

    pub fn actions(&self) -> &[Mat] {
        &self.action
    }

    /// `Hom(X, R) ⊗ chi`, acting by `chi(g) * rho(g^{-1})^T`.
    pub fn twisted_dual(&self, ring: &ChainRing, group: &FiniteGroupData, chi: &[u64]) -> Self {
        let action = (0..group.order())
            .map(|g| self.action[group.inverse(g)].transpose().scale(ring, chi[g]))
            .collect();
        Self { rank: self.rank, action }
    }

    /// `X ⊗ R[ε]` with `ε^2 = 0`, where `g` multiplies by `1 + kappa(g) ε`.
    ///
    /// Coordinates are `(x, y)` for `x + ε y`.
    pub fn dual_numbers(&self, ring: &ChainRing, kappa: &[u64]) -> Self {
        let r = self.rank;
        let action = self
            .action
            .iter()
            .zip(kappa)
            .map(|(rho, &k)| {
                let mut m = Mat::zeros(2 * r, 2 * r);
                m.add_block(ring, 0, 0, rho);
                m.add_block(ring, r, r, rho);
                m.add_block(ring, r, 0, &rho.scale(ring, k));
                m
            })
            .collect();
        Self { rank: 2 * r, action }
    }

    pub fn direct_sum(&self, ring: &ChainRing, other: &GModuleData) -> Self {
        let (r, s) = (self.rank, other.rank);
        let action = self
            .action
            .iter()
            .zip(&other.action)
            .map(|(a, b)| {
                let mut m = Mat::zeros(r + s, r + s);
                m.add_block(ring, 0, 0, a);
                m.add_block(ring, r, r, b);
                m
            })
            .collect();
        Self { rank: r + s, action }
    }

    /// Conjugates by an invertible change of basis: `T rho T^{-1}`.
    pub fn conjugate(&self, ring: &ChainRing, t: &Mat, t_inv: &Mat) -> Self {
        let action = self.action.iter().map(|rho| t.mul(ring, rho).mul(ring, t_inv)).collect();
        Self { rank: self.rank, action }
    }

    /// Stacked `rho(h) - 1` over the given elements; its kernel is the invariants.
    pub fn invariants_system(&self, ring: &ChainRing, elements: &[usize]) -> Mat {
        let r = self.rank;
        let mut m = Mat::zeros(r * elements.len(), r);
        for (k, &h) in elements.iter().enumerate() {
            m.add_block(ring, k * r, 0, self.action(h));
            m.add_block(ring, k * r, 0, &Mat::identity(r).neg(ring));
        }
        m
    }
}
