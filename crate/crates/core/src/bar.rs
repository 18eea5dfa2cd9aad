//! Two-sided bar constructions `B(M, O, N)` for reduced `N`, realized as the
//! normalized total complex: internal degree `q` and simplicial degree `s`
//! give total degree `q + s`, and `d = d_int + (−1)^q Σ_i (−1)^i d_i`.

use crate::chain::{ChainComplex, ChainMap, EqComplex};
use crate::combinatorics::{orbit_reps, Surjection};
use crate::error::Result;
use crate::field::Field;
use crate::linalg::{SparseMatrix, SparseVec};
use crate::operad::{LeftModule, ModuleMap, Operad, RightModule};
use crate::symseq::{remap, SymSeq};
use crate::tree::{merge_elem, ChainProduct, Composer};

/// The three inputs of a bar construction.
pub struct BarInputs<'a, F: Field> {
    pub left: &'a SymSeq<F>,
    pub rho: &'a dyn Composer<F>,
    pub op: &'a Operad<F>,
    pub right: &'a SymSeq<F>,
    pub lambda: &'a dyn Composer<F>,
}

impl<'a, F: Field> BarInputs<'a, F> {
    pub fn new(m: &'a RightModule<F>, op: &'a Operad<F>, n: &'a LeftModule<F>) -> Self {
        BarInputs { left: &m.seq, rho: m, op, right: &n.seq, lambda: n.composer() }
    }

    fn factors(&self, s: usize) -> Vec<&'a SymSeq<F>> {
        let mut f = vec![self.left];
        f.extend(std::iter::repeat_n(&self.op.seq, s));
        f.push(self.right);
        f
    }

    /// `[M, O^s, N](n)`, normalized or not.
    pub fn simplices(&self, s: usize, n: usize, normalized: bool) -> ChainProduct<'a, F> {
        let allow = move |j: usize, phi: &Surjection| !(normalized && j >= 1 && j <= s && phi.is_identity());
        ChainProduct::new(self.factors(s), n, &allow)
    }

    /// Face `d_i` of element `x` of `src`, landing in `dst`.
    pub fn face(&self, src: &ChainProduct<'_, F>, s: usize, i: usize, x: usize, dst: &ChainProduct<'_, F>) -> SparseVec<F> {
        let c: &dyn Composer<F> = if i == 0 {
            self.rho
        } else if i == s {
            self.lambda
        } else {
            self.op.composer()
        };
        src.merge(x, i, c, dst)
    }
}

/// One arity of a realized bar construction.
pub struct BarLevel<'a, F: Field> {
    pub n: usize,
    pub simplices: Vec<ChainProduct<'a, F>>,
    pub offsets: Vec<usize>,
    /// Position of each flat (s, local) generator in the sorted complex.
    pub pos: Vec<usize>,
    pub complex: EqComplex<F>,
}

impl<'a, F: Field> BarLevel<'a, F> {
    pub fn flat(&self, s: usize, local: usize) -> usize {
        self.pos[self.offsets[s] + local]
    }
}

/// Realize `B(M, O, N)(n)`.
pub fn realize_level<'a, F: Field>(inputs: &BarInputs<'a, F>, n: usize) -> BarLevel<'a, F> {
    let smax = n.saturating_sub(1);
    let simplices: Vec<ChainProduct<'a, F>> = (0..=smax).map(|s| inputs.simplices(s, n, true)).collect();
    let mut offsets = Vec::with_capacity(simplices.len());
    let mut total = 0;
    for p in &simplices {
        offsets.push(total);
        total += p.len();
    }
    let mut degrees = Vec::with_capacity(total);
    let mut labels = Vec::with_capacity(total);
    let mut cols: Vec<SparseVec<F>> = Vec::with_capacity(total);
    for (s, p) in simplices.iter().enumerate() {
        let dint = p.differential();
        for x in 0..p.len() {
            let q = p.degrees[x];
            degrees.push(q + s as i32);
            labels.push(format!("s{s}{}", p.label(x)));
            let mut col: Vec<(usize, F)> = dint[x].iter().map(|(r, c)| (offsets[s] + r, c.clone())).collect();
            if s > 0 {
                let base = F::sign(q % 2 == 0);
                for i in 0..=s {
                    let sign = if i % 2 == 0 { base.clone() } else { base.negate() };
                    for (r, c) in inputs.face(p, s, i, x, &simplices[s - 1]) {
                        col.push((offsets[s - 1] + r, c.times(&sign)));
                    }
                }
            }
            cols.push(crate::linalg::collect_terms(col));
        }
    }
    let d = SparseMatrix::from_columns(total, cols);
    let mut gens: Vec<Vec<SparseVec<F>>> = vec![Vec::with_capacity(total); n.saturating_sub(1)];
    for (s, p) in simplices.iter().enumerate() {
        for (i, g) in p.generators().into_iter().enumerate() {
            for c in g.columns() {
                gens[i].push(c.iter().map(|(r, x)| (offsets[s] + r, x.clone())).collect());
            }
        }
    }
    let (c, pos) = ChainComplex::from_unsorted(degrees, labels, d).expect("bar complex");
    let gens = gens
        .into_iter()
        .map(|cols| crate::chain::permute_square(&SparseMatrix::from_columns(total, cols), &pos))
        .collect();
    let complex = EqComplex::new(c, n, gens).expect("bar action");
    BarLevel { n, simplices, offsets, pos, complex }
}

/// `B(M, O, N)` as a symmetric sequence.
pub fn realize<F: Field>(inputs: &BarInputs<'_, F>, max_arity: usize) -> SymSeq<F> {
    let levels = (0..=max_arity).map(|n| realize_level(inputs, n).complex).collect();
    SymSeq::new(max_arity, inputs.left.is_reduced(), levels).expect("realized bar")
}

/// `B(M, Com, Com)` as a right `Com`-module, acting on the last level.
pub fn bar_module<F: Field>(m: &RightModule<F>) -> RightModule<F> {
    let max = m.max_arity();
    let com = Operad::com(max);
    let right = LeftModule::com(max);
    let inputs = BarInputs::new(m, &com, &right);
    let levels: Vec<BarLevel<'_, F>> = (0..=max).map(|n| realize_level(&inputs, n)).collect();
    let seq = SymSeq::new(max, true, levels.iter().map(|l| l.complex.clone()).collect()).expect("bar module");
    RightModule::from_fn(seq, |psi| {
        let (mm, k) = (psi.domain(), psi.target());
        let (src, dst) = (&levels[k], &levels[mm]);
        let mut cols = vec![Vec::new(); src.complex.dim()];
        for (s, p) in src.simplices.iter().enumerate() {
            if s >= dst.simplices.len() {
                continue;
            }
            let mut factors = inputs.factors(s);
            factors.push(&com.seq);
            for x in 0..p.len() {
                let e = p.graft(x, psi, &vec![0; k]);
                let v = merge_elem(&factors, mm, &e, s + 1, com.composer(), &dst.simplices[s]);
                let v: SparseVec<F> = v.into_iter().map(|(r, c)| (dst.flat(s, r), c)).collect();
                let mut v = v;
                v.sort_unstable_by_key(|(r, _)| *r);
                cols[src.flat(s, x)] = v;
            }
        }
        SparseMatrix::from_columns(dst.complex.dim(), cols)
    })
    .expect("bar module structure")
}

/// The augmentation `ε : B(M, Com, Com) → M` as a module map.
pub fn augmentation<F: Field>(m: &RightModule<F>, bar: &RightModule<F>) -> ModuleMap<F> {
    let max = m.max_arity();
    let com = Operad::com(max);
    let right = LeftModule::com(max);
    let inputs = BarInputs::new(m, &com, &right);
    let levels = (0..=max)
        .map(|n| {
            let lvl = realize_level(&inputs, n);
            debug_assert_eq!(lvl.complex.dim(), bar.level(n).dim());
            let target = ChainProduct::new(vec![&m.seq], n, &crate::tree::allow_all);
            let mut cols = vec![Vec::new(); lvl.complex.dim()];
            if let Some(p0) = lvl.simplices.first() {
                for x in 0..p0.len() {
                    cols[lvl.flat(0, x)] = p0.merge(x, 0, m, &target);
                }
            }
            SparseMatrix::from_columns(m.level(n).dim(), cols)
        })
        .collect();
    ModuleMap { levels }
}

/// `Lie(n) = B(S(1), Com, S(1))(n)` with its `Σ_n`-action.
pub fn lie<F: Field>(n: usize) -> EqComplex<F> {
    let max = n.max(1);
    let unit = RightModule::unit(max);
    let com = Operad::com(max);
    let right = LeftModule::unit(max);
    realize_level(&BarInputs::new(&unit, &com, &right), n).complex
}

/// Check `d_i d_j = d_{j−1} d_i` for `i < j` on unnormalized simplices.
pub fn check_simplicial_identities<F: Field>(inputs: &BarInputs<'_, F>, n: usize, max_s: usize) -> Result<()> {
    let simplices: Vec<ChainProduct<'_, F>> = (0..=max_s).map(|s| inputs.simplices(s, n, false)).collect();
    for s in 2..=max_s {
        let (src, mid, dst) = (&simplices[s], &simplices[s - 1], &simplices[s - 2]);
        for x in 0..src.len() {
            for j in 1..=s {
                for i in 0..j {
                    let a = compose_faces(inputs, src, mid, dst, s, j, i, x);
                    let b = compose_faces(inputs, src, mid, dst, s, i, j - 1, x);
                    if a != b {
                        return Err(crate::error::Error::Invariant(format!(
                            "simplicial identity d_{i} d_{j} fails at s = {s}, arity {n}"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn compose_faces<F: Field>(
    inputs: &BarInputs<'_, F>,
    src: &ChainProduct<'_, F>,
    mid: &ChainProduct<'_, F>,
    dst: &ChainProduct<'_, F>,
    s: usize,
    first: usize,
    second: usize,
    x: usize,
) -> SparseVec<F> {
    let v = inputs.face(src, s, first, x, mid);
    let mut out = Vec::new();
    for (k, c) in v {
        for (r, y) in inputs.face(mid, s - 1, second, k, dst) {
            out.push((r, y.times(&c)));
        }
    }
    crate::linalg::collect_terms(out)
}

/// Whether `ε` is a quasi-isomorphism at every level.
pub fn resolution_holds<F: Field>(m: &RightModule<F>) -> Result<bool> {
    let bar = bar_module(m);
    let eps = augmentation(m, &bar);
    eps.check(&bar, m)?;
    Ok(eps.is_quasi_iso(&bar, m))
}

/// Number of chains `n = A_s ↠ ⋯ ↠ A_0 = 1` of non-bijective surjections
/// up to relabeling, counted with `Σ_n`-free labels: the generators of the
/// normalized `B(S(1), Com, S(1))(n)` in simplicial degree `s`.
pub fn levelled_tree_count(n: usize, s: usize) -> u64 {
    fn go(size: usize, remaining: usize) -> u64 {
        if remaining == 0 {
            return u64::from(size == 1);
        }
        (1..size).map(|a| orbit_reps(size, a).len() as u64 * go(a, remaining - 1)).sum()
    }
    if s == 0 {
        return u64::from(n == 1);
    }
    go(n, s)
}

/// Map on a realized level induced by a levelwise map of left factors.
pub fn chain_map_check<F: Field>(f: &SparseMatrix<F>, a: &EqComplex<F>, b: &EqComplex<F>) -> Result<()> {
    ChainMap::new(f.clone()).check(&a.complex, &b.complex)
}

/// Remap a vector given in flat unsorted positions.
pub fn to_sorted<F: Field>(v: &[(usize, F)], pos: &[usize]) -> SparseVec<F> {
    remap(v, pos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{F2, Q};
    use std::collections::BTreeMap;

    #[test]
    fn lie_ranks() {
        let expect = [1usize, 1, 2, 6];
        for n in 1..=4 {
            let l = lie::<Q>(n);
            l.validate().unwrap();
            assert_eq!(l.complex.homology(), BTreeMap::from([(n as i32 - 1, expect[n - 1])]), "n = {n}");
        }
    }

    #[test]
    fn lie_two_by_hand() {
        // one generator: the single 2 ↠ 1 merge, in total degree 1
        let l = lie::<Q>(2);
        assert_eq!(l.complex.degrees(), &[1]);
    }

    #[test]
    fn tree_counts_match_generators() {
        for n in 1..=5 {
            let l = lie::<Q>(n);
            let chi: i64 = (0..n).map(|s| if s % 2 == 0 { 1 } else { -1 } * levelled_tree_count(n, s) as i64).sum();
            // total degree = s, so χ(lie) = Σ (−1)^s count
            assert_eq!(l.complex.euler_characteristic(), chi);
        }
    }

    #[test]
    fn simplicial_identities() {
        let m = RightModule::<Q>::surjections(2, 4);
        let com = Operad::com(4);
        let right = LeftModule::com(4);
        let inputs = BarInputs::new(&m, &com, &right);
        for n in 1..=3 {
            check_simplicial_identities(&inputs, n, 3).unwrap();
        }
        let rnd = crate::random::random_cellular_module::<Q>(3, 5);
        let inputs = BarInputs::new(&rnd, &com, &right);
        check_simplicial_identities(&inputs, 3, 3).unwrap();
    }

    #[test]
    fn bar_module_is_a_module() {
        let b = bar_module(&RightModule::<F2>::unit(4));
        b.validate().unwrap();
        for n in 2..=4 {
            assert!(b.level(n).complex.is_acyclic(), "B(S(1),Com,Com)({n}) acyclic");
        }
    }

    #[test]
    fn resolution_small_cases() {
        assert!(resolution_holds(&RightModule::<Q>::com(4)).unwrap());
        assert!(resolution_holds(&RightModule::<Q>::unit(4)).unwrap());
        assert!(resolution_holds(&RightModule::<Q>::surjections(2, 4)).unwrap());
        assert!(resolution_holds(&crate::random::random_cellular_module::<Q>(4, 3)).unwrap());
    }
}
