//! Symmetric sequences of equivariant complexes, truncated at a maximum arity.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chain::{ChainComplex, ComplexJson, EqComplex};
use crate::combinatorics::{epi_set, Perm, Surjection};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{SparseMatrix, SparseVec};

#[derive(Clone, Debug, PartialEq)]
pub struct SymSeq<F> {
    max_arity: usize,
    reduced: bool,
    levels: Vec<EqComplex<F>>,
}

impl<F: Field> SymSeq<F> {
    pub fn new(max_arity: usize, reduced: bool, levels: Vec<EqComplex<F>>) -> Result<Self> {
        if levels.len() != max_arity + 1 {
            return Err(Error::Dimension(format!("expected {} levels, got {}", max_arity + 1, levels.len())));
        }
        for (n, l) in levels.iter().enumerate() {
            if l.arity() != n {
                return Err(Error::Invalid(format!("level {n} carries a Σ_{} action", l.arity())));
            }
        }
        if reduced && levels[0].dim() != 0 {
            return Err(Error::NotReduced("level 0 of a reduced sequence must vanish".into()));
        }
        Ok(SymSeq { max_arity, reduced, levels })
    }

    pub fn zero(max_arity: usize) -> Self {
        SymSeq { max_arity, reduced: true, levels: (0..=max_arity).map(EqComplex::zero).collect() }
    }

    /// `i_n(X)`: `X` at level `n`, zero elsewhere.
    pub fn embed(x: EqComplex<F>, max_arity: usize) -> Result<Self> {
        let n = x.arity();
        if n > max_arity {
            return Err(Error::Invalid(format!("arity {n} exceeds max arity {max_arity}")));
        }
        let mut levels: Vec<EqComplex<F>> = (0..=max_arity).map(EqComplex::zero).collect();
        let reduced = n > 0 || x.dim() == 0;
        levels[n] = x;
        Ok(SymSeq { max_arity, reduced, levels })
    }

    /// The unit `S(1)`.
    pub fn unit(max_arity: usize) -> Self {
        Self::embed(EqComplex::trivial(unit_complex(), 1), max_arity).expect("unit sequence")
    }

    /// Unit complex at every positive arity with trivial actions.
    pub fn com(max_arity: usize) -> Self {
        let levels = (0..=max_arity)
            .map(|n| if n == 0 { EqComplex::zero(0) } else { EqComplex::trivial(unit_complex(), n) })
            .collect();
        SymSeq { max_arity, reduced: true, levels }
    }

    pub fn max_arity(&self) -> usize {
        self.max_arity
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn level(&self, n: usize) -> &EqComplex<F> {
        &self.levels[n]
    }

    pub fn levels(&self) -> &[EqComplex<F>] {
        &self.levels
    }

    pub fn dims(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.dim()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        for l in &self.levels {
            l.validate()?;
        }
        Ok(())
    }

    /// Forget levels above `n`.
    pub fn truncate(&self, n: usize) -> Self {
        let n = n.min(self.max_arity);
        SymSeq { max_arity: n, reduced: self.reduced, levels: self.levels[..=n].to_vec() }
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.max_arity != other.max_arity {
            return Err(Error::Dimension("direct sum of sequences with different max arity".into()));
        }
        let levels = self
            .levels
            .iter()
            .zip(&other.levels)
            .map(|(a, b)| direct_sum_eq(a, b).0)
            .collect();
        Ok(SymSeq { max_arity: self.max_arity, reduced: self.reduced && other.reduced, levels })
    }

    pub fn to_json(&self) -> SymSeqJson {
        SymSeqJson {
            max_arity: self.max_arity,
            reduced: self.reduced,
            levels: self.levels.iter().enumerate().map(|(n, l)| (n.to_string(), l.to_json())).collect(),
        }
    }

    pub fn from_json(j: &SymSeqJson) -> Result<Self> {
        let mut levels = Vec::with_capacity(j.max_arity + 1);
        for n in 0..=j.max_arity {
            let l = match j.levels.get(&n.to_string()) {
                Some(c) => EqComplex::from_json(c, n)?,
                None => EqComplex::zero(n),
            };
            levels.push(l);
        }
        Self::new(j.max_arity, j.reduced, levels)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SymSeqJson {
    pub max_arity: usize,
    pub reduced: bool,
    pub levels: BTreeMap<String, ComplexJson>,
}

/// One generator in degree 0 with zero differential.
pub fn unit_complex<F: Field>() -> ChainComplex<F> {
    ChainComplex::new(vec![0], vec!["1".into()], SparseMatrix::zeros(1, 1)).expect("unit complex")
}

/// Direct sum of two equivariant complexes with the positions of both summands.
pub fn direct_sum_eq<F: Field>(a: &EqComplex<F>, b: &EqComplex<F>) -> (EqComplex<F>, Vec<usize>, Vec<usize>) {
    assert_eq!(a.arity(), b.arity(), "direct sum arity");
    let (c, left, right) = a.complex.direct_sum(&b.complex);
    let gens = a
        .generators()
        .iter()
        .zip(b.generators())
        .map(|(g, h)| {
            let mut cols: Vec<SparseVec<F>> = vec![Vec::new(); c.dim()];
            for (j, col) in g.columns().iter().enumerate() {
                cols[left[j]] = remap(col, &left);
            }
            for (j, col) in h.columns().iter().enumerate() {
                cols[right[j]] = remap(col, &right);
            }
            SparseMatrix::from_columns(c.dim(), cols)
        })
        .collect();
    (EqComplex::new(c, a.arity(), gens).expect("direct sum action"), left, right)
}

pub(crate) fn remap<F: Field>(col: &[(usize, F)], pos: &[usize]) -> SparseVec<F> {
    let mut v: SparseVec<F> = col.iter().map(|(i, x)| (pos[*i], x.clone())).collect();
    v.sort_unstable_by_key(|(i, _)| *i);
    v
}

/// Equivariant complex spanned by a finite `Σ_n`-set in one degree, with the
/// action given on adjacent transpositions as a function on indices.
pub fn permutation_module<F: Field>(
    n: usize,
    labels: Vec<String>,
    degree: i32,
    act: impl Fn(usize, usize) -> (usize, bool),
) -> EqComplex<F> {
    let dim = labels.len();
    let (c, _) = ChainComplex::graded(vec![degree; dim], labels).expect("permutation module");
    let gens = (0..n.saturating_sub(1))
        .map(|i| {
            let cols = (0..dim)
                .map(|x| {
                    let (y, positive) = act(i, x);
                    vec![(y, F::sign(positive))]
                })
                .collect();
            SparseMatrix::from_columns(dim, cols)
        })
        .collect();
    EqComplex::new(c, n, gens).expect("permutation module action")
}

/// `P_r(n)`: the free module on `Epi(n, r)` in degree 0, `Σ_n` acting by
/// `f ↦ f ∘ π⁻¹`.
pub fn surjection_level<F: Field>(n: usize, r: usize) -> (EqComplex<F>, Vec<Surjection>) {
    let epis = epi_set(n, r);
    let index: std::collections::HashMap<Surjection, usize> =
        epis.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let labels = epis.iter().map(|s| s.to_string()).collect();
    let eq = permutation_module(n, labels, 0, |i, x| {
        let t = Perm::transposition(n, i);
        (index[&epis[x].pre_compose(&t)], true)
    });
    (eq, epis)
}

/// Level `n` of `M ⊗ N`: induced from `Σ_l × Σ_m` over all `(l, m)`-shuffles.
pub fn tensor_seq<F: Field>(m: &SymSeq<F>, n: &SymSeq<F>) -> Result<SymSeq<F>> {
    if m.max_arity != n.max_arity {
        return Err(Error::Dimension("tensor of sequences with different max arity".into()));
    }
    let max = m.max_arity;
    let mut levels = Vec::with_capacity(max + 1);
    for total in 0..=max {
        levels.push(tensor_level(m, n, total));
    }
    let reduced = levels[0].dim() == 0;
    SymSeq::new(max, reduced, levels)
}

fn tensor_level<F: Field>(m: &SymSeq<F>, n: &SymSeq<F>, total: usize) -> EqComplex<F> {
    // basis: (subset S of size l, a ∈ M(l), b ∈ N(total − l))
    let mut elems: Vec<(Vec<usize>, usize, usize)> = Vec::new();
    let mut degrees = Vec::new();
    let mut labels = Vec::new();
    for l in 0..=total {
        let (ml, nl) = (&m.levels[l].complex, &n.levels[total - l].complex);
        if ml.dim() == 0 || nl.dim() == 0 {
            continue;
        }
        for subset in subsets(total, l) {
            for a in 0..ml.dim() {
                for b in 0..nl.dim() {
                    degrees.push(ml.degree(a) + nl.degree(b));
                    labels.push(format!("{:?}:{}⊗{}", subset.iter().map(|x| x + 1).collect::<Vec<_>>(), ml.labels()[a], nl.labels()[b]));
                    elems.push((subset.clone(), a, b));
                }
            }
        }
    }
    let index: std::collections::HashMap<(Vec<usize>, usize, usize), usize> =
        elems.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
    let dim = elems.len();
    let mut dcols = Vec::with_capacity(dim);
    for (s, a, b) in &elems {
        let l = s.len();
        let (ml, nl) = (&m.levels[l].complex, &n.levels[total - l].complex);
        let mut col: SparseVec<F> = Vec::new();
        for (r, x) in ml.differential().col(*a) {
            col.push((index[&(s.clone(), *r, *b)], x.clone()));
        }
        let sign = F::sign(ml.degree(*a) % 2 == 0);
        for (r, x) in nl.differential().col(*b) {
            col.push((index[&(s.clone(), *a, *r)], x.times(&sign)));
        }
        col.sort_unstable_by_key(|(i, _)| *i);
        dcols.push(col);
    }
    let d = SparseMatrix::from_columns(dim, dcols);
    let mut gens = Vec::new();
    for i in 0..total.saturating_sub(1) {
        let pi = Perm::transposition(total, i);
        let mut cols = Vec::with_capacity(dim);
        for (s, a, b) in &elems {
            let l = s.len();
            let comp: Vec<usize> = (0..total).filter(|x| !s.contains(x)).collect();
            let (ns, tau_s) = moved(s, &pi);
            let (_, tau_c) = moved(&comp, &pi);
            let ga = m.levels[l].act(&tau_s);
            let gb = n.levels[total - l].act(&tau_c);
            let mut col: SparseVec<F> = Vec::new();
            for (a2, x) in ga.col(*a) {
                for (b2, y) in gb.col(*b) {
                    col.push((index[&(ns.clone(), *a2, *b2)], x.times(y)));
                }
            }
            col.sort_unstable_by_key(|(i, _)| *i);
            cols.push(col);
        }
        gens.push(SparseMatrix::from_columns(dim, cols));
    }
    let (c, pos) = ChainComplex::from_unsorted(degrees, labels, d).expect("tensor level");
    let gens = gens.iter().map(|g| crate::chain::permute_square(g, &pos)).collect();
    EqComplex::new(c, total, gens).expect("tensor level action")
}

/// Image of a sorted subset under `π` and the induced order permutation.
pub(crate) fn moved(subset: &[usize], pi: &Perm) -> (Vec<usize>, Perm) {
    let mut img: Vec<usize> = subset.iter().map(|&x| pi.apply(x)).collect();
    let unsorted = img.clone();
    img.sort_unstable();
    let tau = Perm(unsorted.iter().map(|v| img.binary_search(v).expect("member")).collect());
    (img, tau)
}

pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..n {
            cur.push(x);
            go(x + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Q;

    #[test]
    fn surjection_levels() {
        assert_eq!(surjection_level::<Q>(1, 2).0.dim(), 0);
        let (p, _) = surjection_level::<Q>(3, 2);
        assert_eq!(p.dim(), 6);
        p.validate().unwrap();
        for n in 1..=4 {
            assert_eq!(surjection_level::<Q>(n, 1).0.dim(), 1);
        }
    }

    #[test]
    fn tensor_of_units() {
        let i1 = SymSeq::<Q>::unit(3);
        let t = tensor_seq(&i1, &i1).unwrap();
        t.validate().unwrap();
        assert_eq!(t.dims(), vec![0, 0, 2, 0]);
        // the swap exchanges the two shuffles
        let g = &t.level(2).generators()[0];
        assert_eq!(g.col(0), &[(1, Q::one())]);
        let z = SymSeq::<Q>::zero(3);
        assert_eq!(tensor_seq(&i1, &z).unwrap().dims(), vec![0; 4]);
    }

    #[test]
    fn json_round_trip() {
        let c = SymSeq::<Q>::com(3);
        let j = serde_json::to_string(&c.to_json()).unwrap();
        let back = SymSeq::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
