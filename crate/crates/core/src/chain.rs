//! Finite-dimensional chain complexes with optional symmetric group actions.
//!
//! A complex stores one flat basis sorted by degree and a single differential
//! matrix of degree −1. Degree blocks are contiguous index ranges.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::combinatorics::Perm;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{echelon, kernel_basis, quotient_by_echelon, Echelon, MatrixJson, SparseMatrix, SparseVec};

#[derive(Clone, Debug, PartialEq)]
pub struct ChainComplex<F> {
    degrees: Vec<i32>,
    labels: Vec<String>,
    d: SparseMatrix<F>,
}

impl<F: Field> ChainComplex<F> {
    pub fn zero() -> Self {
        ChainComplex { degrees: Vec::new(), labels: Vec::new(), d: SparseMatrix::zeros(0, 0) }
    }

    /// Build from a basis already sorted by degree.
    pub fn new(degrees: Vec<i32>, labels: Vec<String>, d: SparseMatrix<F>) -> Result<Self> {
        let n = degrees.len();
        if labels.len() != n || d.rows() != n || d.cols() != n {
            return Err(Error::Dimension(format!(
                "complex with {n} generators, {} labels, {}x{} differential",
                labels.len(),
                d.rows(),
                d.cols()
            )));
        }
        if degrees.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Invalid("basis must be sorted by degree".into()));
        }
        let c = ChainComplex { degrees, labels, d };
        c.check_degree()?;
        Ok(c)
    }

    /// Build from a basis in any order; returns the complex and the position
    /// of each input generator in the sorted basis.
    pub fn from_unsorted(degrees: Vec<i32>, labels: Vec<String>, d: SparseMatrix<F>) -> Result<(Self, Vec<usize>)> {
        let n = degrees.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| degrees[i]);
        let mut pos = vec![0; n];
        for (k, &i) in order.iter().enumerate() {
            pos[i] = k;
        }
        let d = permute_square(&d, &pos);
        let degrees = order.iter().map(|&i| degrees[i]).collect();
        let mut labels = labels;
        let labels = order.iter().map(|&i| std::mem::take(&mut labels[i])).collect();
        Ok((Self::new(degrees, labels, d)?, pos))
    }

    /// Complex with zero differential.
    pub fn graded(degrees: Vec<i32>, labels: Vec<String>) -> Result<(Self, Vec<usize>)> {
        let n = degrees.len();
        Self::from_unsorted(degrees, labels, SparseMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[i32] {
        &self.degrees
    }

    pub fn degree(&self, i: usize) -> i32 {
        self.degrees[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn differential(&self) -> &SparseMatrix<F> {
        &self.d
    }

    pub fn range(&self, q: i32) -> Range<usize> {
        let a = self.degrees.partition_point(|&x| x < q);
        let b = self.degrees.partition_point(|&x| x <= q);
        a..b
    }

    pub fn dim_in(&self, q: i32) -> usize {
        self.range(q).len()
    }

    pub fn min_degree(&self) -> Option<i32> {
        self.degrees.first().copied()
    }

    pub fn max_degree(&self) -> Option<i32> {
        self.degrees.last().copied()
    }

    /// Distinct degrees carrying generators.
    pub fn support(&self) -> Vec<i32> {
        let mut s = self.degrees.clone();
        s.dedup();
        s
    }

    /// `d_q : C_q → C_{q−1}` as a block matrix.
    pub fn d_block(&self, q: i32) -> SparseMatrix<F> {
        self.d.block(self.range(q - 1), self.range(q))
    }

    fn check_degree(&self) -> Result<()> {
        for (i, j, _) in self.d.entries() {
            if self.degrees[i] != self.degrees[j] - 1 {
                return Err(Error::Invariant(format!(
                    "differential entry ({i},{j}) maps degree {} to {}",
                    self.degrees[j], self.degrees[i]
                )));
            }
        }
        Ok(())
    }

    pub fn check_d_squared(&self) -> Result<()> {
        if !self.d.mul(&self.d).is_zero() {
            return Err(Error::Invariant("d∘d ≠ 0".into()));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.check_degree()?;
        self.check_d_squared()
    }

    /// Rank of `d_q`.
    pub fn rank_d(&self, q: i32) -> usize {
        echelon(&self.d_block(q)).rank()
    }

    /// Betti numbers, nonzero entries only.
    pub fn homology(&self) -> BTreeMap<i32, usize> {
        let support = self.support();
        let mut ranks: BTreeMap<i32, usize> = BTreeMap::new();
        for &q in &support {
            ranks.insert(q, self.rank_d(q));
        }
        let mut h = BTreeMap::new();
        for &q in &support {
            let dim = self.dim_in(q) - ranks[&q] - ranks.get(&(q + 1)).copied().unwrap_or(0);
            if dim > 0 {
                h.insert(q, dim);
            }
        }
        h
    }

    pub fn homology_in(&self, q: i32) -> usize {
        self.dim_in(q) - self.rank_d(q) - self.rank_d(q + 1)
    }

    pub fn is_acyclic(&self) -> bool {
        self.homology().is_empty()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.degrees.iter().map(|q| if q % 2 == 0 { 1 } else { -1 }).sum()
    }

    /// Cycles in degree `q` as columns in the block basis of `C_q`.
    pub fn cycles(&self, q: i32) -> SparseMatrix<F> {
        kernel_basis(&self.d_block(q))
    }

    /// Echelon form of the boundaries in degree `q`, block basis of `C_q`.
    pub fn boundaries(&self, q: i32) -> Echelon<F> {
        echelon(&self.d_block(q + 1))
    }

    /// `Σ^k`: degrees raised by `k`, differential multiplied by `(−1)^k`.
    pub fn shift(&self, k: i32) -> Self {
        let d = if k % 2 == 0 { self.d.clone() } else { self.d.scaled(&F::one().negate()) };
        ChainComplex { degrees: self.degrees.iter().map(|q| q + k).collect(), labels: self.labels.clone(), d }
    }

    /// Keep only generators of degree `≤ bound`; the result is a quotient
    /// complex only when nothing of degree `bound + 1` is hit, so callers
    /// use it for bookkeeping of low degrees.
    pub fn truncate_above(&self, bound: i32) -> Self {
        let keep = self.degrees.partition_point(|&x| x <= bound);
        ChainComplex {
            degrees: self.degrees[..keep].to_vec(),
            labels: self.labels[..keep].to_vec(),
            d: self.d.block(0..keep, 0..keep),
        }
    }

    pub fn direct_sum(&self, other: &Self) -> (Self, Vec<usize>, Vec<usize>) {
        let mut degrees = self.degrees.clone();
        degrees.extend_from_slice(&other.degrees);
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        let d = self.d.direct_sum(&other.d);
        let (c, pos) = Self::from_unsorted(degrees, labels, d).expect("direct sum of complexes");
        let left = pos[..self.dim()].to_vec();
        let right = pos[self.dim()..].to_vec();
        (c, left, right)
    }

    /// `A ⊗ B` with `d(a⊗b) = da⊗b + (−1)^{|a|} a⊗db`. The returned table maps
    /// `(i, j)` (flattened as `i * dim B + j`) to the sorted position.
    pub fn tensor(&self, other: &Self) -> (Self, Vec<usize>) {
        let (m, n) = (self.dim(), other.dim());
        let mut degrees = Vec::with_capacity(m * n);
        let mut labels = Vec::with_capacity(m * n);
        let mut cols: Vec<SparseVec<F>> = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                degrees.push(self.degrees[i] + other.degrees[j]);
                labels.push(format!("{}⊗{}", self.labels[i], other.labels[j]));
                let mut col: SparseVec<F> = Vec::new();
                for (r, c) in self.d.col(i) {
                    col.push((r * n + j, c.clone()));
                }
                let sign = F::sign(self.degrees[i] % 2 == 0);
                for (r, c) in other.d.col(j) {
                    col.push((i * n + r, c.times(&sign)));
                }
                col.sort_unstable_by_key(|(r, _)| *r);
                cols.push(col);
            }
        }
        let d = SparseMatrix::from_columns(m * n, cols);
        Self::from_unsorted(degrees, labels, d).expect("tensor of complexes")
    }

    /// Quotient by the span of homogeneous vectors closed under `d`.
    pub fn quotient(&self, sub: &SparseMatrix<F>) -> Result<Quotient<F>> {
        let mut e = Echelon::new(self.dim());
        for c in sub.columns() {
            e.insert(c.clone());
        }
        self.quotient_by(&e)
    }

    pub fn quotient_by(&self, e: &Echelon<F>) -> Result<Quotient<F>> {
        let q = quotient_by_echelon(e);
        let d = q.projection.mul(&self.d).mul(&q.section);
        let degrees = q.kept_rows.iter().map(|&r| self.degrees[r]).collect();
        let labels = q.kept_rows.iter().map(|&r| self.labels[r].clone()).collect();
        let complex = ChainComplex::new(degrees, labels, d)?;
        // closure under d: d(sub) must project to zero
        for v in e_basis(e) {
            if !q.projection.apply(&self.d.apply(&v)).is_empty() {
                return Err(Error::Invariant("quotient by a subspace that is not a subcomplex".into()));
            }
        }
        Ok(Quotient { complex, projection: q.projection, section: q.section })
    }

    /// The subcomplex spanned by homogeneous vectors, with its inclusion.
    pub fn subcomplex(&self, basis: &SparseMatrix<F>) -> Result<(Self, SparseMatrix<F>)> {
        // basis columns must be homogeneous; sort them by degree
        let mut cols: Vec<(i32, SparseVec<F>)> = Vec::new();
        for c in basis.columns() {
            let deg = c.first().map(|(i, _)| self.degrees[*i]).ok_or_else(|| Error::Invalid("zero vector in basis".into()))?;
            if c.iter().any(|(i, _)| self.degrees[*i] != deg) {
                return Err(Error::Invalid("inhomogeneous subcomplex generator".into()));
            }
            cols.push((deg, c.clone()));
        }
        cols.sort_by_key(|(d, _)| *d);
        let inc = SparseMatrix::from_columns(self.dim(), cols.iter().map(|(_, c)| c.clone()).collect());
        // solve d(inc) = inc * D through an echelon form with combos
        let solver = Solver::new(&inc);
        let mut dcols = Vec::with_capacity(inc.cols());
        for c in inc.columns() {
            let img = self.d.apply(c);
            dcols.push(solver.solve(&img).ok_or_else(|| Error::Invariant("span is not closed under d".into()))?);
        }
        let degrees = cols.iter().map(|(d, _)| *d).collect();
        let labels = (0..inc.cols()).map(|k| format!("z{k}")).collect();
        let d = SparseMatrix::from_columns(inc.cols(), dcols);
        Ok((ChainComplex::new(degrees, labels, d)?, inc))
    }

    pub fn to_json(&self) -> ComplexJson {
        ComplexJson {
            degrees: self.degrees.clone(),
            labels: self.labels.clone(),
            differential: self.d.to_json(),
            actions: Vec::new(),
        }
    }

    pub fn from_json(j: &ComplexJson) -> Result<Self> {
        let d = SparseMatrix::from_json(&j.differential)?;
        let c = Self::new(j.degrees.clone(), j.labels.clone(), d)?;
        c.check_d_squared()?;
        Ok(c)
    }
}

fn e_basis<F: Field>(e: &Echelon<F>) -> Vec<SparseVec<F>> {
    e.basis_vectors().to_vec()
}

/// Permute rows and columns of a square matrix: index `i` moves to `pos[i]`.
pub fn permute_square<F: Field>(m: &SparseMatrix<F>, pos: &[usize]) -> SparseMatrix<F> {
    let n = pos.len();
    let mut cols: Vec<SparseVec<F>> = vec![Vec::new(); n];
    for (j, col) in m.columns().iter().enumerate() {
        let mut c: SparseVec<F> = col.iter().map(|(i, x)| (pos[*i], x.clone())).collect();
        c.sort_unstable_by_key(|(i, _)| *i);
        cols[pos[j]] = c;
    }
    SparseMatrix::from_columns(n, cols)
}

/// Solve `A x = b` for `b` in the column span of `A`.
pub struct Solver<F> {
    rows: usize,
    pivot_of_row: std::collections::HashMap<usize, usize>,
    reduced: Vec<SparseVec<F>>,
    combos: Vec<SparseVec<F>>,
}

impl<F: Field> Solver<F> {
    pub fn new(a: &SparseMatrix<F>) -> Self {
        let mut s = Solver { rows: a.rows(), pivot_of_row: Default::default(), reduced: Vec::new(), combos: Vec::new() };
        for (j, c) in a.columns().iter().enumerate() {
            let (v, comb) = s.reduce(c.clone(), vec![(j, F::one())]);
            if let Some((r, x)) = v.last().cloned() {
                let inv = x.inverse().expect("nonzero");
                s.pivot_of_row.insert(r, s.reduced.len());
                s.reduced.push(crate::linalg::scale(&inv, &v));
                s.combos.push(crate::linalg::scale(&inv, &comb));
            }
        }
        s
    }

    fn reduce(&self, mut v: SparseVec<F>, mut comb: SparseVec<F>) -> (SparseVec<F>, SparseVec<F>) {
        while let Some((r, c)) = v.last().cloned() {
            match self.pivot_of_row.get(&r) {
                Some(&p) => {
                    let f = c.negate();
                    v = crate::linalg::axpy(&v, &f, &self.reduced[p]);
                    comb = crate::linalg::axpy(&comb, &f, &self.combos[p]);
                }
                None => break,
            }
        }
        (v, comb)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn solve(&self, b: &[(usize, F)]) -> Option<SparseVec<F>> {
        let (v, comb) = self.reduce(b.to_vec(), Vec::new());
        if v.is_empty() {
            Some(crate::linalg::scale(&F::one().negate(), &comb))
        } else {
            None
        }
    }
}

/// A quotient complex together with its projection and a linear section.
#[derive(Clone, Debug)]
pub struct Quotient<F> {
    pub complex: ChainComplex<F>,
    pub projection: SparseMatrix<F>,
    pub section: SparseMatrix<F>,
}

/// JSON form of a complex, optionally with `Σ_n` generator actions.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ComplexJson {
    pub degrees: Vec<i32>,
    pub labels: Vec<String>,
    pub differential: MatrixJson,
    #[serde(default)]
    pub actions: Vec<MatrixJson>,
}

/// A chain complex with a `Σ_n` action given by the adjacent transpositions.
#[derive(Clone, Debug, PartialEq)]
pub struct EqComplex<F> {
    pub complex: ChainComplex<F>,
    n: usize,
    gens: Vec<SparseMatrix<F>>,
}

impl<F: Field> EqComplex<F> {
    pub fn new(complex: ChainComplex<F>, n: usize, gens: Vec<SparseMatrix<F>>) -> Result<Self> {
        if gens.len() != n.saturating_sub(1) {
            return Err(Error::Dimension(format!("Σ_{n} needs {} generators, got {}", n.saturating_sub(1), gens.len())));
        }
        for g in &gens {
            if g.rows() != complex.dim() || g.cols() != complex.dim() {
                return Err(Error::Dimension("action matrix size".into()));
            }
        }
        Ok(EqComplex { complex, n, gens })
    }

    /// Trivial action.
    pub fn trivial(complex: ChainComplex<F>, n: usize) -> Self {
        let id = SparseMatrix::identity(complex.dim());
        EqComplex { complex, n, gens: vec![id; n.saturating_sub(1)] }
    }

    pub fn zero(n: usize) -> Self {
        Self::trivial(ChainComplex::zero(), n)
    }

    /// `A ⊗ B` with the diagonal action.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        crate::ensure!(self.arity() == other.arity(), "tensor of representations of different groups");
        let (c, pos) = self.complex.tensor(&other.complex);
        let nb = other.dim();
        let gens = self
            .gens
            .iter()
            .zip(&other.gens)
            .map(|(g, h)| {
                let mut cols: Vec<SparseVec<F>> = vec![Vec::new(); c.dim()];
                for i in 0..self.dim() {
                    for j in 0..nb {
                        let mut v: SparseVec<F> = Vec::new();
                        for (a, x) in g.col(i) {
                            for (b, y) in h.col(j) {
                                v.push((pos[a * nb + b], x.times(y)));
                            }
                        }
                        cols[pos[i * nb + j]] = crate::linalg::collect_terms(v);
                    }
                }
                SparseMatrix::from_columns(c.dim(), cols)
            })
            .collect();
        EqComplex::new(c, self.arity(), gens)
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.complex.dim()
    }

    pub fn generators(&self) -> &[SparseMatrix<F>] {
        &self.gens
    }

    /// Matrix of a permutation, via a reduced word.
    pub fn act(&self, p: &Perm) -> SparseMatrix<F> {
        assert_eq!(p.len(), self.n, "permutation size");
        let mut m = SparseMatrix::identity(self.dim());
        for i in p.reduced_word() {
            m = m.mul(&self.gens[i]);
        }
        m
    }

    /// Actions commute with `d`, preserve degree and satisfy the Coxeter relations.
    pub fn validate(&self) -> Result<()> {
        self.complex.validate()?;
        let d = self.complex.differential();
        let id = SparseMatrix::identity(self.dim());
        for (i, g) in self.gens.iter().enumerate() {
            for (r, c, _) in g.entries() {
                if self.complex.degree(r) != self.complex.degree(c) {
                    return Err(Error::Invariant(format!("s_{} does not preserve degree", i + 1)));
                }
            }
            if g.mul(d) != d.mul(g) {
                return Err(Error::Invariant(format!("s_{} does not commute with d", i + 1)));
            }
            if g.mul(g) != id {
                return Err(Error::Invariant(format!("s_{}² ≠ 1", i + 1)));
            }
            for (j, h) in self.gens.iter().enumerate().skip(i + 1) {
                let gh = g.mul(h);
                let order = if j == i + 1 { 3 } else { 2 };
                let mut p = gh.clone();
                for _ in 1..order {
                    p = p.mul(&gh);
                }
                if p != id {
                    return Err(Error::Invariant(format!("Coxeter relation fails for s_{}, s_{}", i + 1, j + 1)));
                }
            }
        }
        Ok(())
    }

    /// Strict coinvariants `C_{Σ_n}`.
    pub fn coinvariants(&self) -> Result<Quotient<F>> {
        self.coinvariants_under(&self.gens)
    }

    /// Coinvariants under the subgroup generated by the given matrices.
    pub fn coinvariants_under(&self, gens: &[SparseMatrix<F>]) -> Result<Quotient<F>> {
        let mut e = Echelon::new(self.dim());
        let id = SparseMatrix::identity(self.dim());
        for g in gens {
            for c in g.sub(&id).columns() {
                if !c.is_empty() {
                    e.insert(c.clone());
                }
            }
        }
        self.complex.quotient_by(&e)
    }

    pub fn to_json(&self) -> ComplexJson {
        let mut j = self.complex.to_json();
        j.actions = self.gens.iter().map(|g| g.to_json()).collect();
        j
    }

    pub fn from_json(j: &ComplexJson, n: usize) -> Result<Self> {
        let c = ChainComplex::from_json(j)?;
        let gens = j.actions.iter().map(SparseMatrix::from_json).collect::<Result<Vec<_>>>()?;
        let e = Self::new(c, n, gens)?;
        e.validate()?;
        Ok(e)
    }
}

/// `X^{⊗n}` restricted to the tuples accepted by `keep`, with `Σ_n` permuting
/// factors under the Koszul sign rule. `keep` must be closed under reordering
/// and under replacing one factor by a term of its differential. Returns the
/// complex and the tuples in sorted basis order.
pub fn tensor_power<F: Field>(x: &ChainComplex<F>, n: usize, keep: impl Fn(&[usize]) -> bool) -> Result<(EqComplex<F>, Vec<Vec<usize>>)> {
    let mut tuples: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for t in &tuples {
            for i in 0..x.dim() {
                let mut u = t.clone();
                u.push(i);
                next.push(u);
            }
        }
        tuples = next;
    }
    tuples.retain(|t| keep(t));
    let index: std::collections::HashMap<&Vec<usize>, usize> = tuples.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let dim = tuples.len();
    let mut cols: Vec<SparseVec<F>> = Vec::with_capacity(dim);
    for t in &tuples {
        let mut terms = Vec::new();
        let mut sign = 0;
        for p in 0..n {
            for (y, c) in x.d.col(t[p]) {
                let mut u = t.clone();
                u[p] = *y;
                let j = *index.get(&u).ok_or_else(|| Error::Invalid("tensor power filter is not closed under d".into()))?;
                terms.push((j, c.times(&F::sign(sign % 2 == 0))));
            }
            sign += x.degrees[t[p]].rem_euclid(2);
        }
        cols.push(crate::linalg::collect_terms(terms));
    }
    let degrees = tuples.iter().map(|t| t.iter().map(|&i| x.degrees[i]).sum()).collect();
    let labels = tuples.iter().map(|t| t.iter().map(|&i| x.labels[i].as_str()).collect::<Vec<_>>().join("⊗")).collect();
    let (c, pos) = ChainComplex::from_unsorted(degrees, labels, SparseMatrix::from_columns(dim, cols))?;
    let mut gens = Vec::with_capacity(n.saturating_sub(1));
    for i in 0..n.saturating_sub(1) {
        let mut g: Vec<SparseVec<F>> = vec![Vec::new(); dim];
        for (k, t) in tuples.iter().enumerate() {
            let mut u = t.clone();
            u.swap(i, i + 1);
            let j = *index.get(&u).ok_or_else(|| Error::Invalid("tensor power filter is not symmetric".into()))?;
            let odd = (x.degrees[t[i]] * x.degrees[t[i + 1]]).rem_euclid(2) == 1;
            g[pos[k]] = vec![(pos[j], F::sign(!odd))];
        }
        gens.push(SparseMatrix::from_columns(dim, g));
    }
    let mut sorted = vec![Vec::new(); dim];
    for (k, t) in tuples.into_iter().enumerate() {
        sorted[pos[k]] = t;
    }
    Ok((EqComplex::new(c, n, gens)?, sorted))
}

/// A degree-0 chain map between flat bases.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainMap<F> {
    pub matrix: SparseMatrix<F>,
}

impl<F: Field> ChainMap<F> {
    pub fn new(matrix: SparseMatrix<F>) -> Self {
        ChainMap { matrix }
    }

    pub fn check(&self, source: &ChainComplex<F>, target: &ChainComplex<F>) -> Result<()> {
        let m = &self.matrix;
        if m.rows() != target.dim() || m.cols() != source.dim() {
            return Err(Error::Dimension("chain map size".into()));
        }
        for (i, j, _) in m.entries() {
            if target.degree(i) != source.degree(j) {
                return Err(Error::Invariant("chain map does not preserve degree".into()));
            }
        }
        if m.mul(source.differential()) != target.differential().mul(m) {
            return Err(Error::Invariant("map does not commute with d".into()));
        }
        Ok(())
    }

    /// Rank of the induced map on `H_q`.
    pub fn homology_rank(&self, source: &ChainComplex<F>, target: &ChainComplex<F>, q: i32) -> usize {
        let z = source.cycles(q);
        if z.cols() == 0 {
            return 0;
        }
        let sr = source.range(q);
        let tr = target.range(q);
        let block = self.matrix.block(tr, sr);
        let fz = block.mul(&z);
        let mut b = target.boundaries(q);
        let base = b.rank();
        for c in fz.columns() {
            b.insert(c.clone());
        }
        b.rank() - base
    }

    pub fn is_quasi_iso(&self, source: &ChainComplex<F>, target: &ChainComplex<F>) -> bool {
        let hs = source.homology();
        let ht = target.homology();
        if hs != ht {
            return false;
        }
        hs.iter().all(|(&q, &dim)| self.homology_rank(source, target, q) == dim)
    }

    pub fn compose(&self, other: &ChainMap<F>) -> ChainMap<F> {
        ChainMap { matrix: self.matrix.mul(&other.matrix) }
    }
}

/// The mapping cone of `f : A → B`, `Cone_q = A_{q−1} ⊕ B_q`.
pub fn cone<F: Field>(f: &ChainMap<F>, a: &ChainComplex<F>, b: &ChainComplex<F>) -> ChainComplex<F> {
    let (m, n) = (a.dim(), b.dim());
    let mut degrees: Vec<i32> = a.degrees().iter().map(|q| q + 1).collect();
    degrees.extend_from_slice(b.degrees());
    let mut labels: Vec<String> = a.labels().iter().map(|l| format!("s{l}")).collect();
    labels.extend(b.labels().iter().cloned());
    let mut cols: Vec<SparseVec<F>> = Vec::with_capacity(m + n);
    for j in 0..m {
        let mut col: SparseVec<F> = a.differential().col(j).iter().map(|(i, x)| (*i, x.negate())).collect();
        col.extend(f.matrix.col(j).iter().map(|(i, x)| (m + i, x.clone())));
        cols.push(col);
    }
    for j in 0..n {
        cols.push(b.differential().col(j).iter().map(|(i, x)| (m + i, x.clone())).collect());
    }
    let d = SparseMatrix::from_columns(m + n, cols);
    ChainComplex::from_unsorted(degrees, labels, d).expect("cone").0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{F2, Q};

    fn circle<F: Field>() -> ChainComplex<F> {
        // one vertex, one edge with zero boundary; plus a contractible pair
        let d = SparseMatrix::from_triplets(4, 4, vec![(1, 3, F::one())]).unwrap();
        ChainComplex::new(vec![0, 0, 1, 1], vec!["v".into(), "a".into(), "e".into(), "b".into()], d).unwrap()
    }

    #[test]
    fn homology_of_circle() {
        let c = circle::<Q>();
        c.validate().unwrap();
        let h = c.homology();
        assert_eq!(h.get(&0), Some(&1));
        assert_eq!(h.get(&1), Some(&1));
        assert_eq!(c.euler_characteristic(), 0);
    }

    #[test]
    fn tensor_kunneth() {
        let c = circle::<Q>();
        let (t, _) = c.tensor(&c);
        t.validate().unwrap();
        let h = t.homology();
        assert_eq!(h, BTreeMap::from([(0, 1), (1, 2), (2, 1)]));
    }

    #[test]
    fn rp2_mod_two() {
        // cellular chains of RP²: 1 ← 2 ← 2
        let build = |two: i64| {
            let d = SparseMatrix::from_triplets(3, 3, vec![(1, 2, Q::from_i64(two))]).unwrap();
            ChainComplex::new(vec![0, 1, 2], vec!["e0".into(), "e1".into(), "e2".into()], d).unwrap()
        };
        assert_eq!(build(2).homology(), BTreeMap::from([(0, 1)]));
        let d = SparseMatrix::<F2>::from_triplets(3, 3, vec![]).unwrap();
        let c = ChainComplex::new(vec![0, 1, 2], vec!["e0".into(), "e1".into(), "e2".into()], d).unwrap();
        assert_eq!(c.homology(), BTreeMap::from([(0, 1), (1, 1), (2, 1)]));
    }

    #[test]
    fn quasi_iso_and_cone() {
        let c = circle::<Q>();
        let id = ChainMap::new(SparseMatrix::identity(c.dim()));
        id.check(&c, &c).unwrap();
        assert!(id.is_quasi_iso(&c, &c));
        assert!(cone(&id, &c, &c).is_acyclic());
        let zero = ChainMap::new(SparseMatrix::zeros(c.dim(), c.dim()));
        assert!(!zero.is_quasi_iso(&c, &c));
    }

    #[test]
    fn quotient_by_subcomplex() {
        let c = circle::<Q>();
        // kill the contractible pair
        let sub = SparseMatrix::from_columns(4, vec![vec![(1, Q::one())], vec![(3, Q::one())]]);
        let q = c.quotient(&sub).unwrap();
        assert_eq!(q.complex.dim(), 2);
        assert_eq!(q.complex.homology(), c.homology());
        let bad = SparseMatrix::from_columns(4, vec![vec![(3, Q::one())]]);
        assert!(c.quotient(&bad).is_err());
        let (s, inc) = c.subcomplex(&sub).unwrap();
        assert!(s.is_acyclic());
        ChainMap::new(inc).check(&s, &c).unwrap();
    }

    #[test]
    fn swap_action_coinvariants() {
        // V ⊗ V for V one-dimensional in degree 1: the swap acts by −1
        let (c, _) = ChainComplex::<Q>::graded(vec![2], vec!["x⊗x".into()]).unwrap();
        let s = SparseMatrix::from_triplets(1, 1, vec![(0, 0, Q::from_i64(-1))]).unwrap();
        let e = EqComplex::new(c, 2, vec![s]).unwrap();
        e.validate().unwrap();
        assert_eq!(e.coinvariants().unwrap().complex.dim(), 0);
    }

    #[test]
    fn coxeter_detects_bad_action() {
        let (c, _) = ChainComplex::<Q>::graded(vec![0, 0, 0], vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let s1 = SparseMatrix::from_triplets(3, 3, vec![(1, 0, Q::one()), (0, 1, Q::one()), (2, 2, Q::one())]).unwrap();
        let s2 = SparseMatrix::from_triplets(3, 3, vec![(0, 0, Q::one()), (1, 1, Q::one()), (2, 2, Q::from_i64(2))]).unwrap();
        let e = EqComplex::new(c.clone(), 3, vec![s1.clone(), s2]).unwrap();
        assert!(e.validate().is_err());
        let s2 = SparseMatrix::from_triplets(3, 3, vec![(0, 0, Q::one()), (2, 1, Q::one()), (1, 2, Q::one())]).unwrap();
        let e = EqComplex::new(c, 3, vec![s1, s2]).unwrap();
        e.validate().unwrap();
        let p = Perm(vec![1, 2, 0]);
        let m = e.act(&p);
        for i in 0..3 {
            assert_eq!(m.col(i), &[(p.apply(i), Q::one())]);
        }
    }

    #[test]
    fn json_round_trip() {
        let c = circle::<Q>();
        let j = serde_json::to_string(&c.to_json()).unwrap();
        let back = ChainComplex::<Q>::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
