//! Dense matrices over `Z/p^M` and Smith normal form by valuation pivoting.
//!
//! `Z/p^M` is a chain ring: every ideal is `p^e R`. Picking the pivot of least
//! valuation in the remaining block lets every other entry of its row and
//! column be cleared by an exact quotient, so elimination never leaves `R`.

use serde::{Deserialize, Serialize};

use crate::ring::ChainRing;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Entries are reduced into `R`.
    pub fn from_rows(ring: &ChainRing, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, ring.reduce_i64(v));
            }
        }
        m
    }

    pub fn from_columns(rows: usize, columns: &[Vec<u64>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, &v) in col.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, ring: &ChainRing, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    if b != 0 {
                        *d = ring.add(*d, ring.mul(a, b));
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, ring: &ChainRing, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols, "dimension mismatch in matrix-vector product");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(&a, &b)| a != 0 && b != 0)
                    .fold(0, |acc, (&a, &b)| ring.add(acc, ring.mul(a, b)))
            })
            .collect()
    }

    pub fn add(&self, ring: &ChainRing, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| ring.add(a, b)).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, ring: &ChainRing, c: u64) -> Mat {
        let data = self.data.iter().map(|&a| ring.mul(a, c)).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self, ring: &ChainRing) -> Mat {
        let data = self.data.iter().map(|&a| ring.neg(a)).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    /// Adds `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn add_block(&mut self, ring: &ChainRing, r0: usize, c0: usize, block: &Mat) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols, "block out of range");
        for i in 0..block.rows {
            for j in 0..block.cols {
                let v = block.get(i, j);
                if v != 0 {
                    let idx = (r0 + i) * self.cols + c0 + j;
                    self.data[idx] = ring.add(self.data[idx], v);
                }
            }
        }
    }

    /// Horizontal concatenation.
    pub fn hstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows);
        let mut out = Mat::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            out.data[i * out.cols..i * out.cols + self.cols].copy_from_slice(self.row(i));
            out.data[i * out.cols + self.cols..(i + 1) * out.cols].copy_from_slice(other.row(i));
        }
        out
    }

    /// Vertical concatenation.
    pub fn vstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Mat { rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Inverse of a square matrix, if it is invertible over `R`.
    pub fn inverse(&self, ring: &ChainRing) -> Option<Mat> {
        if self.rows != self.cols {
            return None;
        }
        let s = self.smith(ring);
        if s.rank() != self.rows || s.exponents().iter().any(|&e| e != 0) {
            return None;
        }
        let cols: Vec<Vec<u64>> = (0..self.rows)
            .map(|j| {
                let mut e = vec![0; self.rows];
                e[j] = 1;
                s.solve(&e).expect("invertible")
            })
            .collect();
        Some(Mat::from_columns(self.rows, &cols))
    }

    /// Selected columns as a new matrix.
    pub fn select_columns(&self, cols: &[usize]) -> Mat {
        let mut out = Mat::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (k, &j) in cols.iter().enumerate() {
                out.set(i, k, self.get(i, j));
            }
        }
        out
    }

    /// Block-diagonal matrix with `copies` copies of `self`.
    pub fn block_diagonal(&self, copies: usize) -> Mat {
        let mut out = Mat::zeros(self.rows * copies, self.cols * copies);
        for c in 0..copies {
            for i in 0..self.rows {
                for j in 0..self.cols {
                    out.set(c * self.rows + i, c * self.cols + j, self.get(i, j));
                }
            }
        }
        out
    }

    pub fn smith(&self, ring: &ChainRing) -> Smith {
        Smith::compute(ring, self)
    }
}

#[derive(Clone, Copy, Debug)]
enum RowOp {
    Swap(u32, u32),
    Scale(u32, u64),
    /// `row[target] += factor * row[source]`
    AddMultiple { target: u32, source: u32, factor: u64 },
}

/// A Smith decomposition `P A Q = D` with `D` diagonal, entries `p^{e_j}`.
///
/// `P` is kept as a log of row operations so it can be replayed on vectors
/// without materializing a square matrix the height of `A`.
#[derive(Clone, Debug)]
pub struct Smith {
    ring: ChainRing,
    rows: usize,
    cols: usize,
    exponents: Vec<u32>,
    q: Mat,
    ops: Vec<RowOp>,
}

impl Smith {
    fn compute(ring: &ChainRing, input: &Mat) -> Self {
        let (rows, cols) = (input.rows, input.cols);
        let mut a = input.clone();
        let mut q = Mat::identity(cols);
        let mut ops = Vec::new();
        let mut exponents = Vec::new();
        let m = ring.exponent();
        let mut t = 0;
        while t < rows.min(cols) {
            let mut best: Option<(usize, usize, u32)> = None;
            'search: for i in t..rows {
                for j in t..cols {
                    let v = a.get(i, j);
                    if v == 0 {
                        continue;
                    }
                    let e = ring.valuation(v);
                    if best.is_none_or(|b| e < b.2) {
                        best = Some((i, j, e));
                        if e == 0 {
                            break 'search;
                        }
                    }
                }
            }
            let Some((pi, pj, e)) = best else { break };
            debug_assert!(e < m);
            if pi != t {
                for j in 0..cols {
                    a.data.swap(pi * cols + j, t * cols + j);
                }
                ops.push(RowOp::Swap(pi as u32, t as u32));
            }
            if pj != t {
                for i in 0..rows {
                    a.data.swap(i * cols + pj, i * cols + t);
                }
                for i in 0..cols {
                    q.data.swap(i * cols + pj, i * cols + t);
                }
            }
            let pe = ring.p().pow(e);
            let unit = a.get(t, t) / pe;
            let unit_inv = ring.inv(unit).expect("pivot unit part is invertible");
            if unit_inv != 1 {
                for j in t..cols {
                    let v = a.get(t, j);
                    a.set(t, j, ring.mul(v, unit_inv));
                }
                ops.push(RowOp::Scale(t as u32, unit_inv));
            }
            for i in t + 1..rows {
                let v = a.get(i, t);
                if v == 0 {
                    continue;
                }
                let factor = ring.neg(v / pe);
                for j in t..cols {
                    let s = a.get(t, j);
                    if s != 0 {
                        let idx = i * cols + j;
                        a.data[idx] = ring.add(a.data[idx], ring.mul(factor, s));
                    }
                }
                ops.push(RowOp::AddMultiple { target: i as u32, source: t as u32, factor });
            }
            for j in t + 1..cols {
                let v = a.get(t, j);
                if v == 0 {
                    continue;
                }
                let factor = ring.neg(v / pe);
                a.set(t, j, 0);
                for i in 0..cols {
                    let s = q.get(i, t);
                    if s != 0 {
                        let idx = i * cols + j;
                        q.data[idx] = ring.add(q.data[idx], ring.mul(factor, s));
                    }
                }
            }
            exponents.push(e);
            t += 1;
        }
        Self { ring: *ring, rows, cols, exponents, q, ops }
    }

    /// Valuations of the nonzero diagonal entries, in pivot order.
    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn rank(&self) -> usize {
        self.exponents.len()
    }

    /// Length (as an `R`-module) of the column span.
    pub fn image_length(&self) -> u64 {
        let m = self.ring.exponent();
        self.exponents.iter().map(|&e| (m - e) as u64).sum()
    }

    /// Length of the kernel of `x -> A x` on `R^cols`.
    pub fn kernel_length(&self) -> u64 {
        self.ring.exponent() as u64 * self.cols as u64 - self.image_length()
    }

    fn apply_ops(&self, v: &mut [u64]) {
        let r = &self.ring;
        for op in &self.ops {
            match *op {
                RowOp::Swap(a, b) => v.swap(a as usize, b as usize),
                RowOp::Scale(a, u) => v[a as usize] = r.mul(v[a as usize], u),
                RowOp::AddMultiple { target, source, factor } => {
                    let s = v[source as usize];
                    if s != 0 {
                        v[target as usize] = r.add(v[target as usize], r.mul(factor, s));
                    }
                }
            }
        }
    }

    fn apply_inverse_ops(&self, v: &mut [u64]) {
        let r = &self.ring;
        for op in self.ops.iter().rev() {
            match *op {
                RowOp::Swap(a, b) => v.swap(a as usize, b as usize),
                RowOp::Scale(a, u) => {
                    let inv = r.inv(u).expect("scaling by a unit");
                    v[a as usize] = r.mul(v[a as usize], inv);
                }
                RowOp::AddMultiple { target, source, factor } => {
                    let s = v[source as usize];
                    if s != 0 {
                        v[target as usize] = r.sub(v[target as usize], r.mul(factor, s));
                    }
                }
            }
        }
    }

    /// `P^{-1} e_j`: the vector that `P` sends to the `j`-th standard basis vector.
    pub fn row_basis_vector(&self, j: usize) -> Vec<u64> {
        let mut v = vec![0; self.rows];
        v[j] = 1;
        self.apply_inverse_ops(&mut v);
        v
    }

    /// Coordinates `P b` of a vector after the row operations.
    pub fn transform(&self, b: &[u64]) -> Vec<u64> {
        let mut v = b.to_vec();
        self.apply_ops(&mut v);
        v
    }

    /// Some `x` with `A x = b`, or `None` if `b` is outside the column span.
    pub fn solve(&self, b: &[u64]) -> Option<Vec<u64>> {
        assert_eq!(b.len(), self.rows);
        let r = &self.ring;
        let pb = self.transform(b);
        let rank = self.rank();
        if pb[rank..].iter().any(|&v| v != 0) {
            return None;
        }
        let mut y = vec![0; self.cols];
        for (j, &e) in self.exponents.iter().enumerate() {
            if r.valuation(pb[j]) < e {
                return None;
            }
            y[j] = pb[j] / r.p().pow(e);
        }
        Some(self.q.apply(r, &y))
    }

    /// A linear map vanishing exactly on the column span: the coordinates of
    /// `P b` past the rank, and those before it scaled by `p^{M-e_j}`.
    pub fn obstruction(&self, b: &[u64]) -> Vec<u64> {
        let r = &self.ring;
        let m = r.exponent();
        let mut pb = self.transform(b);
        for (j, &e) in self.exponents.iter().enumerate() {
            pb[j] = r.mul(pb[j], r.p().pow(m - e));
        }
        pb
    }

    pub fn contains(&self, b: &[u64]) -> bool {
        self.solve(b).is_some()
    }

    /// Generators of `ker(x -> A x)` as columns.
    pub fn kernel(&self) -> Mat {
        let r = &self.ring;
        let m = r.exponent();
        let mut cols = Vec::new();
        for j in 0..self.cols {
            let scale = match self.exponents.get(j) {
                None => 1,
                Some(&0) => continue,
                Some(&e) => r.p().pow(m - e),
            };
            cols.push(self.q.column(j).into_iter().map(|v| r.mul(v, scale)).collect::<Vec<_>>());
        }
        Mat::from_columns(self.cols, &cols)
    }

    /// Columns of `Q` past the rank: a basis of a free direct summand of the kernel.
    pub fn free_kernel(&self) -> Mat {
        let idx: Vec<usize> = (self.rank()..self.cols).collect();
        self.q.select_columns(&idx)
    }

    pub fn q(&self) -> &Mat {
        &self.q
    }
}

/// Length of the submodule of `R^rows` spanned by the columns of `a`.
pub fn span_length(ring: &ChainRing, a: &Mat) -> u64 {
    if a.cols() == 0 || a.rows() == 0 {
        return 0;
    }
    a.smith(ring).image_length()
}
