//! Weight-graded commutative algebras and the arity-zero bar construction
//! `B(M, Com, I) = ⊕_{s,m} [M, Com^s](m) ⊗_{Σ_m} I^{⊗m}`.
//!
//! Every generator has weight at least one and the algebra is truncated above
//! `max_weight`; since weights add under products and the bar differential
//! preserves total weight, the truncated computation is exact in all weights
//! up to the cutoff.

use std::collections::{BTreeMap, HashMap};

use crate::chain::ChainComplex;
use crate::combinatorics::{koszul_sign, Perm};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{collect_terms, Echelon, SparseMatrix, SparseVec};
use crate::operad::{ModuleMap, Operad, RightModule};
use crate::tree::{ChainProduct, Elem};

/// A non-unital graded-commutative algebra with a weight grading.
#[derive(Clone, Debug)]
pub struct Algebra<F> {
    pub name: String,
    pub max_weight: usize,
    pub degrees: Vec<i32>,
    pub weights: Vec<usize>,
    pub labels: Vec<String>,
    pub d: SparseMatrix<F>,
    product: Vec<Vec<SparseVec<F>>>,
}

impl<F: Field> Algebra<F> {
    pub fn new(
        name: &str,
        max_weight: usize,
        degrees: Vec<i32>,
        weights: Vec<usize>,
        labels: Vec<String>,
        d: SparseMatrix<F>,
        product: Vec<Vec<SparseVec<F>>>,
    ) -> Result<Self> {
        let a = Algebra { name: name.into(), max_weight, degrees, weights, labels, d, product };
        a.validate()?;
        Ok(a)
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> &SparseVec<F> {
        &self.product[a][b]
    }

    /// Free algebra on generators of the given degrees, all of weight one.
    pub fn free(gen_degrees: &[i32], max_weight: usize) -> Self {
        let k = gen_degrees.len();
        let odd_dies = F::characteristic() != 2;
        // exponent vectors of total weight 1..=max_weight
        let mut monos: Vec<Vec<usize>> = Vec::new();
        fn rec(i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, degs: &[i32], odd_dies: bool) {
            if i == degs.len() {
                out.push(cur.clone());
                return;
            }
            let cap = if odd_dies && degs[i] % 2 != 0 { left.min(1) } else { left };
            for e in 0..=cap {
                cur.push(e);
                rec(i + 1, left - e, cur, out, degs, odd_dies);
                cur.pop();
            }
        }
        rec(0, max_weight, &mut Vec::new(), &mut monos, gen_degrees, odd_dies);
        monos.retain(|m| m.iter().sum::<usize>() > 0);
        monos.sort_by_key(|m| (m.iter().sum::<usize>(), std::cmp::Reverse(m.clone())));
        let index: HashMap<Vec<usize>, usize> = monos.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let deg = |m: &[usize]| m.iter().zip(gen_degrees).map(|(e, d)| *e as i32 * d).sum::<i32>();
        let product = monos
            .iter()
            .map(|a| {
                monos
                    .iter()
                    .map(|b| {
                        let c: Vec<usize> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                        let Some(&idx) = index.get(&c) else { return Vec::new() };
                        // move b's generators left past the later generators of a
                        let mut odd = 0usize;
                        for i in 0..k {
                            for j in 0..i {
                                odd += a[i] * b[j] * ((gen_degrees[i] * gen_degrees[j]).rem_euclid(2) as usize);
                            }
                        }
                        vec![(idx, F::sign(odd.is_multiple_of(2)))]
                    })
                    .collect()
            })
            .collect();
        let names = ["x", "y", "z", "w"];
        let labels = monos
            .iter()
            .map(|m| {
                m.iter()
                    .enumerate()
                    .filter(|(_, e)| **e > 0)
                    .map(|(i, e)| {
                        let v = names.get(i).map_or_else(|| format!("x{i}"), |s| s.to_string());
                        if *e == 1 {
                            v
                        } else {
                            format!("{v}^{e}")
                        }
                    })
                    .collect::<Vec<_>>()
                    .join("")
            })
            .collect();
        let n = monos.len();
        Algebra {
            name: format!("free{gen_degrees:?}"),
            max_weight,
            degrees: monos.iter().map(|m| deg(m)).collect(),
            weights: monos.iter().map(|m| m.iter().sum()).collect(),
            labels,
            d: SparseMatrix::zeros(n, n),
            product,
        }
    }

    /// One generator in the given degree with zero multiplication.
    pub fn square_zero(degree: i32, max_weight: usize) -> Self {
        Algebra {
            name: format!("zero[{degree}]"),
            max_weight,
            degrees: vec![degree],
            weights: vec![1],
            labels: vec!["u".into()],
            d: SparseMatrix::zeros(1, 1),
            product: vec![vec![Vec::new()]],
        }
    }

    /// `free:<deg>` or `zero:<deg>`.
    pub fn from_spec(spec: &str, max_weight: usize) -> Result<Self> {
        let (kind, deg) = spec.split_once(':').ok_or_else(|| Error::Parse(format!("algebra spec `{spec}`")))?;
        let deg: i32 = deg.parse().map_err(|_| Error::Parse(format!("algebra degree in `{spec}`")))?;
        match kind {
            "free" => Ok(Self::free(&[deg], max_weight)),
            "zero" => Ok(Self::square_zero(deg, max_weight)),
            _ => Err(Error::Parse(format!("unknown algebra kind `{kind}`"))),
        }
    }

    fn mul_vec(&self, a: &[(usize, F)], b: &[(usize, F)]) -> SparseVec<F> {
        let mut out = Vec::new();
        for (i, x) in a {
            for (j, y) in b {
                for (k, z) in &self.product[*i][*j] {
                    out.push((*k, x.times(y).times(z)));
                }
            }
        }
        collect_terms(out)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if self.weights.iter().any(|w| *w == 0 || *w > self.max_weight) {
            return Err(Error::Invalid("algebra weights must lie in 1..=max_weight".into()));
        }
        for (i, col) in self.d.columns().iter().enumerate() {
            for (r, _) in col {
                if self.degrees[*r] != self.degrees[i] - 1 || self.weights[*r] != self.weights[i] {
                    return Err(Error::Invalid("algebra differential is not homogeneous".into()));
                }
            }
        }
        if !self.d.mul(&self.d).is_zero() {
            return Err(Error::Invariant("algebra d² ≠ 0".into()));
        }
        let e = |i: usize| vec![(i, F::one())];
        for a in 0..n {
            for b in 0..n {
                let ab = &self.product[a][b];
                for (k, _) in ab {
                    if self.weights[*k] != self.weights[a] + self.weights[b] || self.degrees[*k] != self.degrees[a] + self.degrees[b] {
                        return Err(Error::Invalid("product is not homogeneous".into()));
                    }
                }
                let sign = F::sign((self.degrees[a] * self.degrees[b]).rem_euclid(2) == 0);
                let ba: SparseVec<F> = self.product[b][a].iter().map(|(k, c)| (*k, c.times(&sign))).collect();
                if *ab != ba {
                    return Err(Error::Invariant("product is not graded commutative".into()));
                }
                // Leibniz
                let lhs = self.d.apply(ab);
                let mut rhs = self.mul_vec(self.d.col(a), &e(b));
                let s = F::sign(self.degrees[a].rem_euclid(2) == 0);
                rhs.extend(self.mul_vec(&e(a), self.d.col(b)).into_iter().map(|(k, c)| (k, c.times(&s))));
                if lhs != collect_terms(rhs) {
                    return Err(Error::Invariant("Leibniz rule fails".into()));
                }
                for c in 0..n {
                    let l = self.mul_vec(ab, &e(c));
                    let r = self.mul_vec(&e(a), &self.product[b][c]);
                    if l != r {
                        return Err(Error::Invariant("product is not associative".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Underlying chain complex, with the sorted position of each basis element.
    pub fn complex(&self) -> (ChainComplex<F>, Vec<usize>) {
        ChainComplex::from_unsorted(self.degrees.clone(), self.labels.clone(), self.d.clone()).expect("algebra complex")
    }
}

/// Ordered tuples of algebra basis elements of length `m` and total weight at most `cap`.
fn monomials<F: Field>(alg: &Algebra<F>, m: usize, cap: usize) -> Vec<Vec<u32>> {
    fn rec<F: Field>(alg: &Algebra<F>, m: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        let still = m - cur.len() - 1;
        for b in 0..alg.dim() {
            let w = alg.weights[b];
            if w + still <= left {
                cur.push(b as u32);
                rec(alg, m, left - w, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(alg, m, cap, &mut Vec::new(), &mut out);
    out
}

type RawKey = (Elem, Vec<u32>);

/// Realized `B(M, Com, I)` through weight `max_weight` of `I`.
pub struct AlgebraBar<F> {
    /// Coinvariant complex.
    pub complex: ChainComplex<F>,
    /// Weight of each basis element of `complex`.
    pub weights: Vec<usize>,
    /// Complex before taking `Σ_m`-coinvariants.
    pub raw: ChainComplex<F>,
    pub projection: SparseMatrix<F>,
    pub section: SparseMatrix<F>,
    raw_keys: Vec<RawKey>,
    raw_index: HashMap<RawKey, usize>,
}

impl<F: Field> AlgebraBar<F> {
    /// `M ∘_Com I`, normalized.
    pub fn new(m: &RightModule<F>, alg: &Algebra<F>) -> Result<Self> {
        let top = alg.max_weight;
        if m.max_arity() < top {
            return Err(Error::Invalid(format!("module known through arity {} but weight {top} requested", m.max_arity())));
        }
        let com = Operad::<F>::com(top.max(1));
        let nonid = |j: usize, phi: &crate::combinatorics::Surjection| j == 0 || !phi.is_identity();
        // products[s][m]
        let products: Vec<Vec<ChainProduct<'_, F>>> = (0..top.max(1))
            .map(|s| {
                (0..=top)
                    .map(|ar| {
                        let mut f = vec![&m.seq];
                        f.extend(std::iter::repeat_n(&com.seq, s));
                        if ar <= s {
                            ChainProduct::new(f, 0, &nonid)
                        } else {
                            ChainProduct::new(f, ar, &nonid)
                        }
                    })
                    .collect()
            })
            .collect();
        let monos: Vec<Vec<Vec<u32>>> = (0..=top).map(|ar| if ar == 0 { Vec::new() } else { monomials(alg, ar, top) }).collect();

        let mut keys: Vec<RawKey> = Vec::new();
        let mut meta: Vec<(usize, usize, usize)> = Vec::new();
        let mut degrees = Vec::new();
        let mut labels = Vec::new();
        for (s, row) in products.iter().enumerate() {
            for ar in (s + 1)..=top {
                let p = &row[ar];
                for x in 0..p.len() {
                    for mono in &monos[ar] {
                        let q = p.degrees[x] + mono.iter().map(|b| alg.degrees[*b as usize]).sum::<i32>();
                        degrees.push(q + s as i32);
                        let tail: Vec<&str> = mono.iter().map(|b| alg.labels[*b as usize].as_str()).collect();
                        labels.push(format!("s{s}{}⊗{}", p.label(x), tail.join("⊗")));
                        keys.push((p.elems[x].clone(), mono.clone()));
                        meta.push((s, ar, x));
                    }
                }
            }
        }
        let raw_index: HashMap<RawKey, usize> = keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        let total = keys.len();
        let mono_deg = |mono: &[u32]| mono.iter().map(|b| alg.degrees[*b as usize]).collect::<Vec<i32>>();

        let internal: Vec<Vec<Vec<SparseVec<F>>>> =
            products.iter().map(|row| row.iter().map(|p| p.differential()).collect()).collect();
        let mut cols: Vec<SparseVec<F>> = Vec::with_capacity(total);
        for (k, (elem, mono)) in keys.iter().enumerate() {
            let (s, ar, x) = meta[k];
            let p = &products[s][ar];
            let mdeg = mono_deg(mono);
            let mut col: Vec<(usize, F)> = Vec::new();
            for (r, c) in &internal[s][ar][x] {
                col.push((raw_index[&(p.elems[*r].clone(), mono.clone())], c.clone()));
            }
            let mut sign_acc = p.degrees[x];
            for e in 0..ar {
                let sg = F::sign(sign_acc.rem_euclid(2) == 0);
                for (b, c) in alg.d.col(mono[e] as usize) {
                    let mut m2 = mono.clone();
                    m2[e] = *b as u32;
                    col.push((raw_index[&(elem.clone(), m2)], c.times(&sg)));
                }
                sign_acc += mdeg[e];
            }
            if s > 0 {
                let q = sign_acc;
                let base = F::sign(q.rem_euclid(2) == 0);
                let dst = &products[s - 1][ar];
                for i in 0..s {
                    let sg = if i % 2 == 0 { base.clone() } else { base.negate() };
                    let composer: &dyn crate::tree::Composer<F> = if i == 0 { m } else { com.composer() };
                    for (r, c) in p.merge(x, i, composer, dst) {
                        col.push((raw_index[&(dst.elems[r].clone(), mono.clone())], c.times(&sg)));
                    }
                }
                let sg = if s % 2 == 0 { base } else { base.negate() };
                for (key, c) in last_face(elem, mono, alg) {
                    if let Some(&r) = raw_index.get(&key) {
                        col.push((r, c.times(&sg)));
                    }
                }
            }
            cols.push(collect_terms(col));
        }
        let d = SparseMatrix::from_columns(total, cols);
        let (raw, pos) = ChainComplex::from_unsorted(degrees, labels, d)?;

        // diagonal Σ_m relations g·v − v
        let mut rel = Echelon::new(total);
        for (k, (_, mono)) in keys.iter().enumerate() {
            let (s, ar, x) = meta[k];
            let p = &products[s][ar];
            for i in 0..ar.saturating_sub(1) {
                let t = Perm::transposition(ar, i);
                let mut m2 = mono.clone();
                m2.swap(i, i + 1);
                let odd = alg.degrees[mono[i] as usize] * alg.degrees[mono[i + 1] as usize];
                let sg = F::sign(odd.rem_euclid(2) == 0);
                let mut v: Vec<(usize, F)> = vec![(pos[k], F::one().negate())];
                for (r, c) in p.act(x, &t) {
                    v.push((pos[raw_index[&(p.elems[r].clone(), m2.clone())]], c.times(&sg)));
                }
                let v = collect_terms(v);
                if !v.is_empty() {
                    rel.insert(v);
                }
            }
        }
        let q = raw.quotient_by(&rel)?;
        let mut sorted_keys = vec![None; total];
        for (k, key) in keys.into_iter().enumerate() {
            sorted_keys[pos[k]] = Some(key);
        }
        let raw_keys: Vec<RawKey> = sorted_keys.into_iter().map(|k| k.expect("key")).collect();
        let raw_index = raw_keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        let kept: Vec<usize> = (0..q.complex.dim()).map(|j| q.section.col(j)[0].0).collect();
        let weights = kept
            .iter()
            .map(|&r| raw_keys[r].1.iter().map(|b| alg.weights[*b as usize]).sum())
            .collect();
        Ok(AlgebraBar { complex: q.complex, weights, raw, projection: q.projection, section: q.section, raw_keys, raw_index })
    }

    /// The part of total weight `w`.
    pub fn weight_part(&self, w: usize) -> ChainComplex<F> {
        let idx: Vec<usize> = (0..self.complex.dim()).filter(|&i| self.weights[i] == w).collect();
        let d = self.complex.differential().select_columns(&idx).select_rows(&idx);
        let degrees = idx.iter().map(|&i| self.complex.degree(i)).collect();
        let labels = idx.iter().map(|&i| self.complex.labels()[i].clone()).collect();
        ChainComplex::new(degrees, labels, d).expect("weight part")
    }

    pub fn homology_by_weight(&self) -> BTreeMap<usize, BTreeMap<i32, usize>> {
        let mut ws: Vec<usize> = self.weights.clone();
        ws.sort_unstable();
        ws.dedup();
        ws.into_iter()
            .map(|w| (w, self.weight_part(w).homology()))
            .filter(|(_, h)| !h.is_empty())
            .collect()
    }

    /// The map `B(f, Com, I)` into `target`, which must be built over the same algebra.
    pub fn induced(&self, target: &AlgebraBar<F>, f: &ModuleMap<F>) -> SparseMatrix<F> {
        let cols = (0..self.raw_keys.len())
            .map(|r| {
                let (e, mono) = &self.raw_keys[r];
                let k = e.base_size(mono.len());
                let mut out = Vec::new();
                for (l, c) in f.levels[k].col(e.labels[0] as usize) {
                    let mut e2 = e.clone();
                    e2.labels[0] = *l as u32;
                    if let Some(&t) = target.raw_index.get(&(e2, mono.clone())) {
                        out.push((t, c.clone()));
                    }
                }
                collect_terms(out)
            })
            .collect();
        let raw_map = SparseMatrix::from_columns(target.raw_keys.len(), cols);
        target.projection.mul(&raw_map).mul(&self.section)
    }
}

/// The face multiplying algebra factors along the fibers of the top map.
fn last_face<F: Field>(elem: &Elem, mono: &[u32], alg: &Algebra<F>) -> Vec<(RawKey, F)> {
    let s = elem.maps.len();
    let phi = &elem.maps[s - 1];
    let mut e2 = elem.clone();
    e2.maps.pop();
    let off = elem.offset(s);
    e2.labels.truncate(off);
    // factor at e moves to its place in the fiber-grouped order
    let mut order: Vec<usize> = (0..mono.len()).collect();
    order.sort_by_key(|&e| (phi.apply(e), e));
    let mut dest = vec![0; mono.len()];
    for (p, &e) in order.iter().enumerate() {
        dest[e] = p;
    }
    let degs: Vec<i32> = mono.iter().map(|b| alg.degrees[*b as usize]).collect();
    let sign = F::sign(koszul_sign(&Perm(dest), &degs));
    let mut terms: Vec<(Vec<u32>, F)> = vec![(Vec::new(), sign)];
    for fib in phi.fibers() {
        let mut prod: SparseVec<F> = vec![(mono[fib[0]] as usize, F::one())];
        for &e in &fib[1..] {
            prod = alg.mul_vec(&prod, &[(mono[e] as usize, F::one())]);
        }
        let mut next = Vec::new();
        for (t, c) in &terms {
            for (b, x) in &prod {
                let mut t2 = t.clone();
                t2.push(*b as u32);
                next.push((t2, c.times(x)));
            }
        }
        terms = next;
    }
    terms.into_iter().map(|(m, c)| ((e2.clone(), m), c)).collect()
}

/// Topological Quillen homology chains `TQ(I) = B(S(1), Com, I)`.
pub fn tq<F: Field>(alg: &Algebra<F>) -> Result<AlgebraBar<F>> {
    AlgebraBar::new(&RightModule::unit(alg.max_weight.max(1)), alg)
}

/// Indecomposables `I / I²` as a complex.
pub fn indecomposables<F: Field>(alg: &Algebra<F>) -> Result<ChainComplex<F>> {
    let (c, pos) = alg.complex();
    let mut e = Echelon::new(alg.dim());
    for a in 0..alg.dim() {
        for b in 0..alg.dim() {
            if !alg.mul(a, b).is_empty() {
                e.insert(crate::symseq::remap(alg.mul(a, b), &pos));
            }
        }
    }
    Ok(c.quotient_by(&e)?.complex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{F2, F3, Q};

    #[test]
    fn algebras_validate() {
        Algebra::<Q>::free(&[0], 4).validate().unwrap();
        Algebra::<Q>::free(&[1, 2], 4).validate().unwrap();
        Algebra::<F2>::free(&[1], 4).validate().unwrap();
        Algebra::<F3>::free(&[1, 1], 3).validate().unwrap();
        assert_eq!(Algebra::<Q>::free(&[1], 4).dim(), 1);
        assert_eq!(Algebra::<F2>::free(&[1], 4).dim(), 4);
    }

    #[test]
    fn tq_of_free_is_generators() {
        for deg in [0, 1, 2] {
            let a = Algebra::<Q>::free(&[deg], 4);
            let t = tq(&a).unwrap();
            t.complex.validate().unwrap();
            assert_eq!(t.complex.homology(), BTreeMap::from([(deg, 1)]), "free on degree {deg}");
            assert_eq!(indecomposables(&a).unwrap().homology(), BTreeMap::from([(deg, 1)]));
        }
    }

    #[test]
    fn tq_of_square_zero_is_a_free_lie_coalgebra() {
        // free graded Lie algebra on one odd generator: weights 1 and 2 only
        let t = tq(&Algebra::<Q>::square_zero(0, 4)).unwrap();
        let expect = BTreeMap::from([(1, BTreeMap::from([(0, 1)])), (2, BTreeMap::from([(1, 1)]))]);
        assert_eq!(t.homology_by_weight(), expect);
        let t = tq(&Algebra::<Q>::square_zero(1, 4)).unwrap();
        assert_eq!(t.complex.homology(), BTreeMap::from([(1, 1)]));
    }

    #[test]
    fn identity_map_is_identity() {
        let a = Algebra::<Q>::free(&[1], 3);
        let m = RightModule::<Q>::surjections(2, 3);
        let b = AlgebraBar::new(&m, &a).unwrap();
        let id = b.induced(&b, &ModuleMap::identity(&m));
        assert_eq!(id, SparseMatrix::identity(b.complex.dim()));
    }
}
