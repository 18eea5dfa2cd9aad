//! Exact sparse linear algebra: sparse vectors and column-major matrices,
//! column-reduction echelon forms, ranks, kernels and cokernel presentations.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;

/// Sparse vector: strictly increasing indices, no stored zeros.
pub type SparseVec<F> = Vec<(usize, F)>;

/// `a + c * b` for sorted sparse vectors.
pub fn axpy<F: Field>(a: &[(usize, F)], c: &F, b: &[(usize, F)]) -> SparseVec<F> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            let v = c.times(&b[j].1);
            if !v.is_zero() {
                out.push((b[j].0, v));
            }
            j += 1;
        } else {
            let v = a[i].1.plus(&c.times(&b[j].1));
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

pub fn scale<F: Field>(c: &F, v: &[(usize, F)]) -> SparseVec<F> {
    if c.is_zero() {
        return Vec::new();
    }
    v.iter().map(|(i, x)| (*i, c.times(x))).collect()
}

/// Collect unsorted `(index, value)` terms into a canonical sparse vector.
pub fn collect_terms<F: Field>(terms: impl IntoIterator<Item = (usize, F)>) -> SparseVec<F> {
    let mut acc: HashMap<usize, F> = HashMap::new();
    for (i, v) in terms {
        if v.is_zero() {
            continue;
        }
        match acc.get_mut(&i) {
            Some(x) => *x = x.plus(&v),
            None => {
                acc.insert(i, v);
            }
        }
    }
    let mut out: Vec<(usize, F)> = acc.into_iter().filter(|(_, v)| !v.is_zero()).collect();
    out.sort_unstable_by_key(|(i, _)| *i);
    out
}

/// Column-major sparse matrix over an exact field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<SparseVec<F>>,
}

impl<F: Field> SparseMatrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, data: vec![Vec::new(); cols] }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix { rows: n, cols: n, data: (0..n).map(|i| vec![(i, F::one())]).collect() }
    }

    /// Build from columns; each column must already be a canonical sparse vector.
    pub fn from_columns(rows: usize, data: Vec<SparseVec<F>>) -> Self {
        debug_assert!(data.iter().all(|c| c.iter().all(|(i, v)| *i < rows && !v.is_zero())));
        debug_assert!(data.iter().all(|c| c.windows(2).all(|w| w[0].0 < w[1].0)));
        SparseMatrix { rows, cols: data.len(), data }
    }

    /// Build from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, entries: impl IntoIterator<Item = (usize, usize, F)>) -> Result<Self> {
        let mut per_col: Vec<Vec<(usize, F)>> = vec![Vec::new(); cols];
        for (i, j, v) in entries {
            if i >= rows || j >= cols {
                return Err(Error::Dimension(format!("entry ({i},{j}) outside {rows}x{cols}")));
            }
            per_col[j].push((i, v));
        }
        Ok(SparseMatrix { rows, cols, data: per_col.into_iter().map(collect_terms).collect() })
    }

    /// Dense constructor from integer rows, mostly for tests.
    pub fn from_dense(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let entries = rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, v)| (i, j, F::from_i64(*v))));
        Self::from_triplets(r, c, entries).expect("in range")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn col(&self, j: usize) -> &[(usize, F)] {
        &self.data[j]
    }
    pub fn columns(&self) -> &[SparseVec<F>] {
        &self.data
    }
    pub fn into_columns(self) -> Vec<SparseVec<F>> {
        self.data
    }
    pub fn nnz(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Vec::is_empty)
    }

    pub fn get(&self, i: usize, j: usize) -> F {
        match self.data[j].binary_search_by_key(&i, |(r, _)| *r) {
            Ok(p) => self.data[j][p].1.clone(),
            Err(_) => F::zero(),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &F)> + '_ {
        self.data.iter().enumerate().flat_map(|(j, c)| c.iter().map(move |(i, v)| (*i, j, v)))
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[(usize, F)]) -> SparseVec<F> {
        let mut acc = Vec::new();
        for (j, c) in v {
            acc = axpy(&acc, c, &self.data[*j]);
        }
        acc
    }

    /// `self * other`.
    pub fn mul(&self, other: &SparseMatrix<F>) -> SparseMatrix<F> {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let data = other
            .data
            .iter()
            .map(|col| {
                if col.len() <= 1 {
                    match col.first() {
                        Some((k, c)) => scale(c, &self.data[*k]),
                        None => Vec::new(),
                    }
                } else {
                    collect_terms(
                        col.iter().flat_map(|(k, c)| self.data[*k].iter().map(move |(i, v)| (*i, c.times(v)))),
                    )
                }
            })
            .collect();
        SparseMatrix { rows: self.rows, cols: other.cols, data }
    }

    pub fn add(&self, other: &SparseMatrix<F>) -> SparseMatrix<F> {
        self.lincomb(&F::one(), other)
    }

    pub fn sub(&self, other: &SparseMatrix<F>) -> SparseMatrix<F> {
        self.lincomb(&F::one().negate(), other)
    }

    /// `self + c * other`.
    pub fn lincomb(&self, c: &F, other: &SparseMatrix<F>) -> SparseMatrix<F> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix sum shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| axpy(a, c, b)).collect();
        SparseMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scaled(&self, c: &F) -> SparseMatrix<F> {
        SparseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| scale(c, v)).collect() }
    }

    pub fn transpose(&self) -> SparseMatrix<F> {
        let mut data: Vec<SparseVec<F>> = vec![Vec::new(); self.rows];
        for (j, col) in self.data.iter().enumerate() {
            for (i, v) in col {
                data[*i].push((j, v.clone()));
            }
        }
        SparseMatrix { rows: self.cols, cols: self.rows, data }
    }

    /// Submatrix on a contiguous block of rows and columns, reindexed from zero.
    pub fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> SparseMatrix<F> {
        let data = self.data[cols.clone()]
            .iter()
            .map(|c| {
                c.iter()
                    .filter(|(i, _)| rows.contains(i))
                    .map(|(i, v)| (i - rows.start, v.clone()))
                    .collect()
            })
            .collect();
        SparseMatrix { rows: rows.len(), cols: cols.len(), data }
    }

    /// Columns picked (in order) from `cols`.
    pub fn select_columns(&self, cols: &[usize]) -> SparseMatrix<F> {
        SparseMatrix { rows: self.rows, cols: cols.len(), data: cols.iter().map(|j| self.data[*j].clone()).collect() }
    }

    /// Rows picked (in order) from `rows`; other rows are dropped.
    pub fn select_rows(&self, rows: &[usize]) -> SparseMatrix<F> {
        let mut pos = vec![usize::MAX; self.rows];
        for (k, r) in rows.iter().enumerate() {
            pos[*r] = k;
        }
        let data = self
            .data
            .iter()
            .map(|c| {
                let mut v: SparseVec<F> =
                    c.iter().filter(|(i, _)| pos[*i] != usize::MAX).map(|(i, x)| (pos[*i], x.clone())).collect();
                v.sort_unstable_by_key(|(i, _)| *i);
                v
            })
            .collect();
        SparseMatrix { rows: rows.len(), cols: self.cols, data }
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &SparseMatrix<F>) -> SparseMatrix<F> {
        assert_eq!(self.rows, other.rows);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        SparseMatrix { rows: self.rows, cols: self.cols + other.cols, data }
    }

    /// `[self ; other]`.
    pub fn vstack(&self, other: &SparseMatrix<F>) -> SparseMatrix<F> {
        assert_eq!(self.cols, other.cols);
        let off = self.rows;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| {
                let mut v = a.clone();
                v.extend(b.iter().map(|(i, x)| (i + off, x.clone())));
                v
            })
            .collect();
        SparseMatrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn direct_sum(&self, other: &SparseMatrix<F>) -> SparseMatrix<F> {
        let top = self.vstack(&SparseMatrix::zeros(other.rows, self.cols));
        let bottom = SparseMatrix::zeros(self.rows, other.cols).vstack(other);
        top.hstack(&bottom)
    }

    pub fn push_column(&mut self, col: SparseVec<F>) {
        debug_assert!(col.iter().all(|(i, _)| *i < self.rows));
        self.data.push(col);
        self.cols += 1;
    }

    /// True when every column has exactly one entry equal to ±1 and the
    /// column supports form a permutation.
    pub fn is_signed_permutation(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let mut seen = vec![false; self.rows];
        let one = F::one();
        let minus = one.negate();
        for c in &self.data {
            if c.len() != 1 || seen[c[0].0] || (c[0].1 != one && c[0].1 != minus) {
                return false;
            }
            seen[c[0].0] = true;
        }
        true
    }
}

/// Column echelon data: reduced image vectors keyed by their pivot (largest) row.
#[derive(Clone, Debug)]
pub struct Echelon<F> {
    rows: usize,
    pivot_of_row: HashMap<usize, usize>,
    basis: Vec<SparseVec<F>>,
}

impl<F: Field> Echelon<F> {
    pub fn new(rows: usize) -> Self {
        Echelon { rows, pivot_of_row: HashMap::new(), basis: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Reduce `v` against the current basis; returns the remainder.
    pub fn reduce(&self, mut v: SparseVec<F>) -> SparseVec<F> {
        while let Some((r, c)) = v.last().cloned() {
            match self.pivot_of_row.get(&r) {
                Some(&p) => v = axpy(&v, &c.negate(), &self.basis[p]),
                None => break,
            }
        }
        v
    }

    /// Insert a vector; returns false if it was already in the span.
    pub fn insert(&mut self, v: SparseVec<F>) -> bool {
        let v = self.reduce(v);
        match v.last().cloned() {
            None => false,
            Some((r, c)) => {
                let inv = c.inverse().expect("nonzero pivot");
                self.pivot_of_row.insert(r, self.basis.len());
                self.basis.push(scale(&inv, &v));
                true
            }
        }
    }

    pub fn contains(&self, v: SparseVec<F>) -> bool {
        self.reduce(v).is_empty()
    }

    pub fn basis_vectors(&self) -> &[SparseVec<F>] {
        &self.basis
    }

    pub fn pivot_rows(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.pivot_of_row.keys().copied().collect();
        p.sort_unstable();
        p
    }

    /// Fully reduce `v` so that it has no entries on pivot rows.
    pub fn normal_form(&self, mut v: SparseVec<F>) -> SparseVec<F> {
        let mut bound = usize::MAX;
        loop {
            let hit = v
                .iter()
                .rev()
                .find(|(i, _)| *i < bound && self.pivot_of_row.contains_key(i))
                .cloned();
            match hit {
                None => return v,
                Some((r, c)) => {
                    v = axpy(&v, &c.negate(), &self.basis[self.pivot_of_row[&r]]);
                    bound = r;
                }
            }
        }
    }
}

/// Column-reduce all columns of `m`.
pub fn echelon<F: Field>(m: &SparseMatrix<F>) -> Echelon<F> {
    let mut e = Echelon::new(m.rows());
    for c in m.columns() {
        e.insert(c.clone());
    }
    e
}

pub fn rank<F: Field>(m: &SparseMatrix<F>) -> usize {
    echelon(m).rank()
}

/// Columns form a basis of the null space of `m`.
pub fn kernel_basis<F: Field>(m: &SparseMatrix<F>) -> SparseMatrix<F> {
    let n = m.cols();
    let mut pivot_of_row: HashMap<usize, usize> = HashMap::new();
    let mut reduced: Vec<SparseVec<F>> = Vec::new();
    let mut combos: Vec<SparseVec<F>> = Vec::new();
    let mut kernel = Vec::new();
    for j in 0..n {
        let mut v = m.col(j).to_vec();
        let mut comb: SparseVec<F> = vec![(j, F::one())];
        while let Some((r, c)) = v.last().cloned() {
            match pivot_of_row.get(&r) {
                Some(&p) => {
                    let f = c.negate();
                    v = axpy(&v, &f, &reduced[p]);
                    comb = axpy(&comb, &f, &combos[p]);
                }
                None => break,
            }
        }
        match v.last().cloned() {
            None => kernel.push(comb),
            Some((r, c)) => {
                let inv = c.inverse().expect("nonzero");
                pivot_of_row.insert(r, reduced.len());
                reduced.push(scale(&inv, &v));
                combos.push(scale(&inv, &comb));
            }
        }
    }
    SparseMatrix::from_columns(n, kernel)
}

/// Presentation of `target / im(m)`: a surjective projection with kernel
/// exactly the image, and a section with `projection * section = id`.
#[derive(Clone, Debug)]
pub struct Quotient<F> {
    pub projection: SparseMatrix<F>,
    pub section: SparseMatrix<F>,
    /// Rows of the ambient space that index the quotient basis.
    pub kept_rows: Vec<usize>,
}

impl<F: Field> Quotient<F> {
    pub fn dim(&self) -> usize {
        self.kept_rows.len()
    }
}

pub fn cokernel_presentation<F: Field>(m: &SparseMatrix<F>) -> Quotient<F> {
    quotient_by_echelon(&echelon(m))
}

pub fn quotient_by_echelon<F: Field>(e: &Echelon<F>) -> Quotient<F> {
    let rows = e.rows;
    let pivots = e.pivot_rows();
    let is_pivot: Vec<bool> = {
        let mut p = vec![false; rows];
        for r in &pivots {
            p[*r] = true;
        }
        p
    };
    let kept_rows: Vec<usize> = (0..rows).filter(|r| !is_pivot[*r]).collect();
    let mut qpos = vec![usize::MAX; rows];
    for (k, r) in kept_rows.iter().enumerate() {
        qpos[*r] = k;
    }
    let mut cols: Vec<SparseVec<F>> = vec![Vec::new(); rows];
    for r in &kept_rows {
        cols[*r] = vec![(qpos[*r], F::one())];
    }
    for r in &pivots {
        let p = e.pivot_of_row[r];
        let v = e.normal_form(e.basis[p][..e.basis[p].len() - 1].to_vec());
        // e_r == -(v) modulo the image, and v only has kept rows now
        let mut col: SparseVec<F> = v.iter().map(|(i, x)| (qpos[*i], x.negate())).collect();
        col.sort_unstable_by_key(|(i, _)| *i);
        debug_assert!(col.iter().all(|(i, _)| *i != usize::MAX));
        cols[*r] = col;
    }
    let projection = SparseMatrix::from_columns(kept_rows.len(), cols);
    let section = SparseMatrix::from_columns(
        rows,
        kept_rows.iter().map(|r| vec![(*r, F::one())]).collect(),
    );
    Quotient { projection, section, kept_rows }
}

/// JSON triple-list encoding `{rows, cols, entries: [[i, j, "num/den"], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, String)>,
}

impl<F: Field> SparseMatrix<F> {
    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries().map(|(i, j, v)| (i, j, v.to_string())).collect(),
        }
    }

    pub fn from_json(j: &MatrixJson) -> Result<Self> {
        let entries = j
            .entries
            .iter()
            .map(|(i, c, s)| Ok((*i, *c, F::parse(s)?)))
            .collect::<Result<Vec<_>>>()?;
        let mut seen = std::collections::HashSet::new();
        for (i, c, _) in &entries {
            if !seen.insert((*i, *c)) {
                return Err(Error::Parse(format!("duplicate matrix entry ({i},{c})")));
            }
        }
        Self::from_triplets(j.rows, j.cols, entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{F2, Q};

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&SparseMatrix::<Q>::identity(3)), 3);
        assert_eq!(rank(&SparseMatrix::<Q>::zeros(4, 7)), 0);
        assert_eq!(rank(&SparseMatrix::<F2>::from_dense(&[vec![1, 1], vec![1, 1]])), 1);
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_basis(&SparseMatrix::<Q>::identity(3)).cols(), 0);
        let m = SparseMatrix::<Q>::from_dense(&[vec![1, 1]]);
        let k = kernel_basis(&m);
        assert_eq!(k.cols(), 1);
        assert_eq!(k.get(0, 0), k.get(1, 0).negate());
        assert!(m.mul(&k).is_zero());
        assert_eq!(kernel_basis(&SparseMatrix::<Q>::zeros(2, 2)).cols(), 2);
    }

    #[test]
    fn cokernel_examples() {
        assert_eq!(cokernel_presentation(&SparseMatrix::<Q>::identity(3)).dim(), 0);
        let q = cokernel_presentation(&SparseMatrix::<Q>::zeros(3, 2));
        assert_eq!(q.dim(), 3);
        assert_eq!(q.projection, SparseMatrix::identity(3));
        let two = SparseMatrix::<Q>::from_dense(&[vec![2]]);
        assert_eq!(cokernel_presentation(&two).dim(), 0);
    }

    #[test]
    fn cokernel_projection_kills_image() {
        let m = SparseMatrix::<Q>::from_dense(&[vec![1, 2, 0], vec![0, 1, 1], vec![1, 3, 1], vec![2, 0, -4]]);
        let q = cokernel_presentation(&m);
        assert!(q.projection.mul(&m).is_zero());
        assert_eq!(q.projection.mul(&q.section), SparseMatrix::identity(q.dim()));
        assert_eq!(rank(&q.projection), m.rows() - rank(&m));
    }

    #[test]
    fn json_round_trip() {
        let m = SparseMatrix::<Q>::from_triplets(2, 2, vec![(0, 1, Q::new(-3, 4)), (1, 0, Q::from_i64(5))]).unwrap();
        let j = m.to_json();
        assert_eq!(j.entries[0].2, "5/1");
        assert_eq!(SparseMatrix::<Q>::from_json(&j).unwrap(), m);
    }
}
