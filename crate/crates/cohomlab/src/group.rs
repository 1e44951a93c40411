//! Finite groups given by multiplication tables, and their subgroups.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::CohomError;

/// A finite group. Elements are the indices `0..order`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroupData {
    names: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    #[serde(skip)]
    inverses: Vec<usize>,
}

impl FiniteGroupData {
    /// Validates closure, associativity, the identity and inverses.
    pub fn new(names: Vec<String>, table: Vec<Vec<usize>>, identity: usize) -> Result<Self, CohomError> {
        let n = table.len();
        let bad = |msg: String| Err(CohomError::InvalidGroup(msg));
        if n == 0 || names.len() != n || identity >= n {
            return bad("empty table or mismatched element list".into());
        }
        if table.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
            return bad("table is not closed".into());
        }
        for a in 0..n {
            if table[identity][a] != a || table[a][identity] != a {
                return bad(format!("element {a} is not fixed by the identity"));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return bad(format!("associativity fails at ({a}, {b}, {c})"));
                    }
                }
            }
        }
        let mut inverses = vec![usize::MAX; n];
        for a in 0..n {
            match (0..n).find(|&b| table[a][b] == identity) {
                Some(b) if table[b][a] == identity => inverses[a] = b,
                _ => return bad(format!("element {a} has no inverse")),
            }
        }
        Ok(Self { names, table, identity, inverses })
    }

    /// Rebuilds derived data after deserialization and revalidates.
    pub fn revalidated(self) -> Result<Self, CohomError> {
        Self::new(self.names, self.table, self.identity)
    }

    pub fn cyclic(n: usize) -> Result<Self, CohomError> {
        Self::product(&[n])
    }

    /// `Z/n_1 x ... x Z/n_k`.
    pub fn product(orders: &[usize]) -> Result<Self, CohomError> {
        let n: usize = orders.iter().product();
        let digits = |mut x: usize| {
            orders
                .iter()
                .rev()
                .map(|&m| {
                    let d = x % m;
                    x /= m;
                    d
                })
                .collect::<Vec<_>>()
                .into_iter()
                .rev()
                .collect::<Vec<_>>()
        };
        let index = |ds: &[usize]| ds.iter().zip(orders).fold(0, |acc, (&d, &m)| acc * m + d);
        let mut table = vec![vec![0; n]; n];
        for a in 0..n {
            let da = digits(a);
            for b in 0..n {
                let db = digits(b);
                let s: Vec<usize> = da.iter().zip(&db).zip(orders).map(|((x, y), m)| (x + y) % m).collect();
                table[a][b] = index(&s);
            }
        }
        let names = (0..n).map(|a| format!("{:?}", digits(a))).collect();
        Self::new(names, table, 0)
    }

    /// Dihedral group of order `2m`: elements `r^i s^j`, indexed `i + m j`.
    pub fn dihedral(m: usize) -> Result<Self, CohomError> {
        let n = 2 * m;
        let mut table = vec![vec![0; n]; n];
        for a in 0..n {
            let (i, j) = (a % m, a / m);
            for b in 0..n {
                let (k, l) = (b % m, b / m);
                // r^i s^j r^k s^l = r^{i + (-1)^j k} s^{j+l}
                let rot = if j == 0 { (i + k) % m } else { (i + m - k) % m };
                table[a][b] = rot + m * ((j + l) % 2);
            }
        }
        let names = (0..n).map(|a| format!("r^{} s^{}", a % m, a / m)).collect();
        Self::new(names, table, 0)
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    #[inline]
    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn name(&self, a: usize) -> &str {
        &self.names[a]
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// The subgroup generated by `gens`, as a sorted element list.
    pub fn generated_subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order()];
        let mut queue = VecDeque::from([self.identity]);
        seen[self.identity] = true;
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        (0..self.order()).filter(|&a| seen[a]).collect()
    }

    /// Extends an assignment on generators to a homomorphism into a monoid,
    /// checking consistency against every product in the table.
    ///
    /// Returns `None` if the assignment does not define a homomorphism or the
    /// generators do not generate the group.
    pub fn extend_hom<T: Clone + PartialEq>(
        &self,
        gens: &[usize],
        images: &[T],
        one: T,
        op: impl Fn(&T, &T) -> T,
    ) -> Option<Vec<T>> {
        let n = self.order();
        let mut value: Vec<Option<T>> = vec![None; n];
        value[self.identity] = Some(one);
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            let vx = value[x].clone().expect("queued elements carry values");
            for (g, img) in gens.iter().zip(images) {
                let y = self.mul(x, *g);
                let vy = op(&vx, img);
                match &value[y] {
                    Some(existing) if *existing != vy => return None,
                    Some(_) => {}
                    None => {
                        value[y] = Some(vy);
                        queue.push_back(y);
                    }
                }
            }
        }
        let value: Vec<T> = value.into_iter().collect::<Option<Vec<T>>>()?;
        for a in 0..n {
            for b in 0..n {
                if op(&value[a], &value[b]) != value[self.mul(a, b)] {
                    return None;
                }
            }
        }
        Some(value)
    }
}

/// A subgroup with its own position-indexed multiplication table.
#[derive(Clone, Debug)]
pub struct Subgroup {
    elements: Vec<usize>,
    position: Vec<Option<usize>>,
    table: Vec<Vec<usize>>,
    identity: usize,
}

impl Subgroup {
    pub fn new(group: &FiniteGroupData, elements: &[usize]) -> Result<Self, CohomError> {
        let mut elements = elements.to_vec();
        elements.sort_unstable();
        elements.dedup();
        let mut position = vec![None; group.order()];
        for (k, &g) in elements.iter().enumerate() {
            if g >= group.order() {
                return Err(CohomError::InvalidGroup(format!("element {g} out of range")));
            }
            position[g] = Some(k);
        }
        let identity = position[group.identity()]
            .ok_or_else(|| CohomError::InvalidGroup("subgroup misses the identity".into()))?;
        let mut table = vec![vec![0; elements.len()]; elements.len()];
        for (i, &a) in elements.iter().enumerate() {
            for (j, &b) in elements.iter().enumerate() {
                table[i][j] = position[group.mul(a, b)]
                    .ok_or_else(|| CohomError::InvalidGroup("subset is not closed".into()))?;
            }
        }
        Ok(Self { elements, position, table, identity })
    }

    pub fn whole(group: &FiniteGroupData) -> Self {
        let all: Vec<usize> = (0..group.order()).collect();
        Self::new(group, &all).expect("the whole group is a subgroup")
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    /// Group element at a position.
    #[inline]
    pub fn element(&self, k: usize) -> usize {
        self.elements[k]
    }

    pub fn position(&self, g: usize) -> Option<usize> {
        self.position[g]
    }

    #[inline]
    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.table[i][j]
    }

    pub fn identity_position(&self) -> usize {
        self.identity
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dihedral_is_nonabelian() {
        let d = FiniteGroupData::dihedral(4).unwrap();
        assert_eq!(d.order(), 8);
        let commute = (0..8).all(|a| (0..8).all(|b| d.mul(a, b) == d.mul(b, a)));
        assert!(!commute);
    }

    #[test]
    fn homomorphism_extension() {
        let g = FiniteGroupData::product(&[2, 4]).unwrap();
        let kappa = g.extend_hom(&[1, 4], &[2u64, 4], 0, |a, b| (a + b) % 8);
        assert!(kappa.is_some());
        let not_hom = g.extend_hom(&[1, 4], &[1u64, 0], 0, |a, b| (a + b) % 8);
        assert!(not_hom.is_none());
    }

    #[test]
    fn rejects_non_associative() {
        let table = vec![vec![0, 1, 2], vec![1, 0, 0], vec![2, 2, 0]];
        assert!(FiniteGroupData::new(vec!["e".into(), "a".into(), "b".into()], table, 0).is_err());
    }
}
