//! Dense linear algebra over `F_p`.
//!
//! Subspaces are kept in reduced row echelon form so that two subspaces are
//! equal exactly when their stored rows are equal.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfp::PrimeChar;

/// A dense matrix over `F_p`, row-major. Acts on column vectors: `M x`.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    p: PrimeChar,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl Matrix {
    pub fn zeros(p: PrimeChar, rows: usize, cols: usize) -> Self {
        Matrix {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(p: PrimeChar, dim: usize) -> Self {
        let mut m = Self::zeros(p, dim, dim);
        for i in 0..dim {
            m.set(i, i, 1 % p.get());
        }
        m
    }

    pub fn from_rows(p: PrimeChar, cols: usize, rows: Vec<Vec<u32>>) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in &rows {
            if row.len() != cols {
                return Err(Error::ContextMismatch(format!(
                    "row of length {} in a matrix with {} columns",
                    row.len(),
                    cols
                )));
            }
            data.extend(row.iter().map(|&x| x % p.get()));
        }
        Ok(Matrix {
            p,
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Build a matrix whose columns are the given vectors.
    pub fn from_columns(p: PrimeChar, rows: usize, columns: &[Vec<u32>]) -> Result<Self> {
        let mut m = Self::zeros(p, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::ContextMismatch(format!(
                    "column of length {} in a matrix with {} rows",
                    col.len(),
                    rows
                )));
            }
            for (i, &x) in col.iter().enumerate() {
                m.set(i, j, x % p.get());
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn characteristic(&self) -> PrimeChar {
        self.p
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.p != other.p {
            return Err(Error::CharacteristicMismatch {
                left: self.p.get(),
                right: other.p.get(),
            });
        }
        if self.cols != other.rows {
            return Err(Error::ContextMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let p = self.p.get() as u64;
        let mut out = Matrix::zeros(self.p, self.rows, other.cols);
        let mut acc = vec![0u64; other.cols];
        for i in 0..self.rows {
            acc.iter_mut().for_each(|x| *x = 0);
            for k in 0..self.cols {
                let a = self.get(i, k) as u64;
                if a == 0 {
                    continue;
                }
                for (j, slot) in acc.iter_mut().enumerate() {
                    *slot = (*slot + a * other.get(k, j) as u64) % p;
                }
            }
            for (j, &x) in acc.iter().enumerate() {
                out.set(i, j, x as u32);
            }
        }
        Ok(out)
    }

    pub fn apply(&self, x: &[u32]) -> Result<Vec<u32>> {
        if x.len() != self.cols {
            return Err(Error::ContextMismatch(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols
            )));
        }
        let p = self.p.get() as u64;
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(0u64, |acc, (&a, &b)| (acc + a as u64 * b as u64) % p)
                    as u32
            })
            .collect())
    }

    /// `Id_k ⊗ self`: `k` copies of `self` on the block diagonal.
    pub fn identity_kron(&self, k: usize) -> Matrix {
        let mut out = Matrix::zeros(self.p, k * self.rows, k * self.cols);
        for b in 0..k {
            for i in 0..self.rows {
                for j in 0..self.cols {
                    out.set(b * self.rows + i, b * self.cols + j, self.get(i, j));
                }
            }
        }
        out
    }

    /// Row-reduce in place to reduced echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let p = self.p;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pivot_row) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            self.swap_rows(r, pivot_row);
            let inv = p.inv(self.get(r, c)).expect("nonzero pivot");
            for j in c..self.cols {
                let v = p.mul(self.get(r, j), inv);
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.get(i, c);
                if f == 0 {
                    continue;
                }
                for j in c..self.cols {
                    let v = p.sub(self.get(i, j), p.mul(f, self.get(r, j)));
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of `{ x : M x = 0 }`.
    pub fn kernel(&self) -> SubspaceBasis {
        let mut m = self.clone();
        let pivots = m.rref();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let p = self.p;
        let vectors = (0..self.cols).filter(|&c| !is_pivot[c]).map(|free| {
            let mut v = vec![0u32; self.cols];
            v[free] = 1 % p.get();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = p.neg(m.get(r, free));
            }
            v
        });
        SubspaceBasis::from_vectors(self.p, self.cols, vectors)
            .expect("kernel vectors have the ambient length")
    }

    /// Basis of `{ y : yᵀ M = 0 }`, i.e. linear relations among the rows.
    pub fn left_kernel(&self) -> SubspaceBasis {
        self.transpose().kernel()
    }

    /// Span of the columns.
    pub fn image(&self) -> SubspaceBasis {
        SubspaceBasis::from_vectors(self.p, self.rows, (0..self.cols).map(|j| self.column(j)))
            .expect("columns have the ambient length")
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix over F_{} ({}x{}):", self.p, self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

/// A subspace of `F_p^ambient`, stored as the nonzero rows of its reduced
/// echelon form with respect to the fixed column order.
#[derive(Clone, PartialEq, Eq)]
pub struct SubspaceBasis {
    p: PrimeChar,
    ambient: usize,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl SubspaceBasis {
    pub fn zero(p: PrimeChar, ambient: usize) -> Self {
        SubspaceBasis {
            p,
            ambient,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(p: PrimeChar, ambient: usize) -> Self {
        let rows = (0..ambient)
            .map(|i| {
                let mut v = vec![0; ambient];
                v[i] = 1 % p.get();
                v
            })
            .collect();
        SubspaceBasis {
            p,
            ambient,
            rows,
            pivots: (0..ambient).collect(),
        }
    }

    /// Span of coordinate vectors `e_i` for the given indices.
    pub fn coordinate_span(p: PrimeChar, ambient: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let vectors = indices.into_iter().map(|i| {
            let mut v = vec![0; ambient];
            v[i] = 1;
            v
        });
        Self::from_vectors(p, ambient, vectors).expect("indices are in range")
    }

    pub fn from_vectors<I>(p: PrimeChar, ambient: usize, vectors: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<u32>>,
    {
        let rows: Vec<Vec<u32>> = vectors.into_iter().collect();
        let mut m = Matrix::from_rows(p, ambient, rows)?;
        let pivots = m.rref();
        let rows = (0..pivots.len()).map(|i| m.row(i).to_vec()).collect();
        Ok(SubspaceBasis {
            p,
            ambient,
            rows,
            pivots,
        })
    }

    #[inline]
    pub fn characteristic(&self) -> PrimeChar {
        self.p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Canonical representative of `v` modulo this subspace: the unique vector
    /// congruent to `v` with zeros in every pivot column. Linear in `v`.
    pub fn reduce(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.ambient, "vector length does not match ambient dimension");
        let p = self.p;
        let mut out = v.to_vec();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let f = out[pc];
            if f == 0 {
                continue;
            }
            for (o, &r) in out.iter_mut().zip(row).skip(pc) {
                *o = p.sub(*o, p.mul(f, r));
            }
        }
        out
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    pub fn contains_subspace(&self, other: &SubspaceBasis) -> bool {
        self.p == other.p
            && self.ambient == other.ambient
            && other.rows.iter().all(|r| self.contains(r))
    }

    /// `r` copies of this subspace inside `F_p^(r * ambient)`, copy-major.
    pub fn direct_sum_power(&self, r: usize) -> SubspaceBasis {
        let ambient = self.ambient * r;
        let mut rows = Vec::with_capacity(self.dim() * r);
        let mut pivots = Vec::with_capacity(self.dim() * r);
        for c in 0..r {
            for (row, &pc) in self.rows.iter().zip(&self.pivots) {
                let mut v = vec![0; ambient];
                v[c * self.ambient..(c + 1) * self.ambient].copy_from_slice(row);
                rows.push(v);
                pivots.push(c * self.ambient + pc);
            }
        }
        SubspaceBasis {
            p: self.p,
            ambient,
            rows,
            pivots,
        }
    }

    pub fn as_matrix(&self) -> Matrix {
        Matrix::from_rows(self.p, self.ambient, self.rows.clone()).expect("rows have ambient length")
    }
}

impl fmt::Debug for SubspaceBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SubspaceBasis(F_{}, dim {} in {}, rows {:?})",
            self.p,
            self.dim(),
            self.ambient,
            self.rows
        )
    }
}

impl Serialize for SubspaceBasis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows.serialize(s)
    }
}

/// The quotient `sup / sub` for nested subspaces, with a fixed basis.
///
/// The basis is the reduced echelon form of `sup`'s rows taken modulo `sub`.
/// When both subspaces are coordinate spans this is just the set of coordinate
/// vectors in `sup` but not in `sub`, in the ambient order.
#[derive(Debug, Clone)]
pub struct Quotient {
    sub: SubspaceBasis,
    complement: SubspaceBasis,
}

impl Quotient {
    pub fn new(sup: &SubspaceBasis, sub: &SubspaceBasis) -> Result<Self> {
        if !sup.contains_subspace(sub) {
            return Err(Error::ContextMismatch(
                "quotient of a subspace that is not contained in the larger one".into(),
            ));
        }
        let complement =
            SubspaceBasis::from_vectors(sup.p, sup.ambient, sup.rows.iter().map(|r| sub.reduce(r)))?;
        Ok(Quotient {
            sub: sub.clone(),
            complement,
        })
    }

    pub fn dim(&self) -> usize {
        self.complement.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.sub.ambient
    }

    /// Coordinates of the class of `v` (which must lie in `sup`).
    pub fn coordinates(&self, v: &[u32]) -> Vec<u32> {
        let w = self.sub.reduce(v);
        self.complement.pivots.iter().map(|&c| w[c]).collect()
    }

    /// The representative in the ambient space of the class with the given coordinates.
    pub fn lift(&self, coords: &[u32]) -> Vec<u32> {
        let p = self.sub.p;
        let mut v = vec![0u32; self.sub.ambient];
        for (row, &c) in self.complement.rows.iter().zip(coords) {
            if c == 0 {
                continue;
            }
            for (o, &x) in v.iter_mut().zip(row) {
                *o = p.add(*o, p.mul(c, x));
            }
        }
        v
    }

    /// The pivot column of each basis vector of the quotient.
    pub fn basis_columns(&self) -> &[usize] {
        &self.complement.pivots
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: u64) -> PrimeChar {
        PrimeChar::new(x).unwrap()
    }

    #[test]
    fn rref_and_rank() {
        let m = Matrix::from_rows(p(3), 3, vec![vec![1, 2, 0], vec![2, 1, 0], vec![0, 0, 1]]).unwrap();
        // row2 = 2*row1 mod 3
        assert_eq!(m.rank(), 2);
        let s = SubspaceBasis::from_vectors(p(3), 3, m.to_rows()).unwrap();
        assert_eq!(s.rows(), &[vec![1, 2, 0], vec![0, 0, 1]]);
        assert_eq!(s.pivots(), &[0, 2]);
    }

    #[test]
    fn kernel_of_augmentation() {
        // v -> v[0] on F_2^4: kernel is the span of e1, e2, e3.
        let m = Matrix::from_rows(p(2), 4, vec![vec![1, 0, 0, 0]]).unwrap();
        let k = m.kernel();
        assert_eq!(k, SubspaceBasis::coordinate_span(p(2), 4, 1..4));
    }

    #[test]
    fn quotient_coordinates() {
        let sup = SubspaceBasis::coordinate_span(p(5), 4, [1, 2, 3]);
        let sub = SubspaceBasis::coordinate_span(p(5), 4, [3]);
        let q = Quotient::new(&sup, &sub).unwrap();
        assert_eq!(q.dim(), 2);
        assert_eq!(q.coordinates(&[0, 4, 2, 1]), vec![4, 2]);
        assert_eq!(q.lift(&[4, 2]), vec![0, 4, 2, 0]);
        assert!(Quotient::new(&sub, &sup).is_err());
    }

    #[test]
    fn direct_sum_matches_span() {
        let s = SubspaceBasis::from_vectors(p(3), 2, vec![vec![1, 1]]).unwrap();
        let d = s.direct_sum_power(2);
        let expected = SubspaceBasis::from_vectors(p(3), 4, vec![vec![1, 1, 0, 0], vec![0, 0, 1, 1]]).unwrap();
        assert_eq!(d, expected);
    }

    #[test]
    fn identity_kron_blocks() {
        let m = Matrix::from_rows(p(7), 2, vec![vec![1, 2]]).unwrap();
        let k = m.identity_kron(2);
        assert_eq!(k.to_rows(), vec![vec![1, 2, 0, 0], vec![0, 0, 1, 2]]);
    }

    fn arb_rows(ambient: usize) -> impl Strategy<Value = Vec<Vec<u32>>> {
        prop::collection::vec(prop::collection::vec(0u32..5, ambient), 0..6)
    }

    proptest! {
        #[test]
        fn rank_nullity(rows in arb_rows(5)) {
            let m = Matrix::from_rows(p(5), 5, rows).unwrap();
            prop_assert_eq!(m.rank() + m.kernel().dim(), 5);
            for v in m.kernel().rows() {
                prop_assert!(m.apply(v).unwrap().iter().all(|&x| x == 0));
            }
        }

        #[test]
        fn span_is_canonical(rows in arb_rows(4), seed in 0u32..5) {
            let a = SubspaceBasis::from_vectors(p(5), 4, rows.clone()).unwrap();
            // Adding a combination of existing rows does not change the span.
            let mut extended = rows.clone();
            if let (Some(r0), Some(r1)) = (rows.first(), rows.last()) {
                extended.push(r0.iter().zip(r1).map(|(&x, &y)| (x * seed + y) % 5).collect());
            }
            extended.reverse();
            let b = SubspaceBasis::from_vectors(p(5), 4, extended).unwrap();
            prop_assert_eq!(&a, &b);
            for r in &rows {
                prop_assert!(a.contains(r));
            }
        }
    }
}
