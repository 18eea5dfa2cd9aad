//! Iterated composition products `Q_0 ∘ Q_1 ∘ ⋯ ∘ Q_t` at a fixed arity.
//!
//! For reduced right factors a basis element is a chain of first-occurrence
//! ordered surjections `n = A_t ↠ A_{t−1} ↠ ⋯ ↠ A_0` together with one label
//! of `Q_0(|A_0|)` and, for each level `j ≥ 1` and each `e ∈ A_{j−1}`, a label
//! of `Q_j(|φ_j⁻¹(e)|)`. Labels are stored flat, level by level; tensor factors
//! are ordered the same way, which fixes all Koszul signs.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::combinatorics::{koszul_sign, orbit_reps, Perm, Surjection};
use crate::field::Field;
use crate::linalg::{SparseMatrix, SparseVec};
use crate::symseq::SymSeq;

/// Structure maps indexed by first-occurrence ordered surjections: for
/// `ψ : m ↠ k`, a map `A(k) ⊗ B(n_1) ⊗ ⋯ ⊗ B(n_k) → C(m)` on basis labels.
pub trait Composer<F: Field>: Send + Sync {
    fn compose(&self, psi: &Surjection, outer: usize, inner: &[usize]) -> SparseVec<F>;
}

impl<F: Field, T: Fn(&Surjection, usize, &[usize]) -> SparseVec<F> + Send + Sync> Composer<F> for T {
    fn compose(&self, psi: &Surjection, outer: usize, inner: &[usize]) -> SparseVec<F> {
        self(psi, outer, inner)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem {
    /// `φ_1, …, φ_t`.
    pub maps: Vec<Surjection>,
    pub labels: Vec<u32>,
}

impl Elem {
    /// `|A_0|`, with `A_t = n` when there are no maps.
    pub fn base_size(&self, n: usize) -> usize {
        self.maps.first().map_or(n, |m| m.target())
    }

    /// Start of level `j` in the flat label list.
    pub fn offset(&self, j: usize) -> usize {
        if j == 0 {
            0
        } else {
            1 + self.maps[..j - 1].iter().map(|m| m.target()).sum::<usize>()
        }
    }

    /// The map into level `j`'s index set; level 0 sits over a point.
    fn level_map(&self, j: usize, n: usize) -> Surjection {
        if j == 0 {
            Surjection::constant(self.base_size(n))
        } else {
            self.maps[j - 1].clone()
        }
    }
}

/// Which chains to keep: `allow(j, φ_j)` for `j ≥ 1`.
pub type LevelFilter<'a> = &'a (dyn Fn(usize, &Surjection) -> bool + Sync);

pub fn allow_all(_: usize, _: &Surjection) -> bool {
    true
}

/// Basis and structure of `[Q_0, …, Q_t](n)`.
pub struct ChainProduct<'a, F: Field> {
    pub factors: Vec<&'a SymSeq<F>>,
    pub n: usize,
    pub elems: Vec<Elem>,
    pub degrees: Vec<i32>,
    index: HashMap<Elem, usize>,
    act_cache: Mutex<HashMap<(usize, usize, Perm), SparseMatrix<F>>>,
}

impl<'a, F: Field> ChainProduct<'a, F> {
    pub fn new(factors: Vec<&'a SymSeq<F>>, n: usize, allow: LevelFilter<'_>) -> Self {
        let t = factors.len() - 1;
        let mut chains: Vec<Vec<Surjection>> = Vec::new();
        enumerate_chains(n, t, allow, &mut Vec::new(), &mut chains);
        chains.sort();
        let mut elems = Vec::new();
        let mut degrees = Vec::new();
        for maps in chains {
            let a0 = maps.first().map_or(n, |m| m.target());
            let mut slots: Vec<(usize, usize)> = vec![(0, a0)];
            for (j, m) in maps.iter().enumerate() {
                for size in m.fiber_sizes() {
                    slots.push((j + 1, size));
                }
            }
            let dims: Vec<usize> = slots
                .iter()
                .map(|&(j, k)| if k <= factors[j].max_arity() { factors[j].level(k).dim() } else { 0 })
                .collect();
            if dims.contains(&0) {
                continue;
            }
            let mut cur = vec![0u32; slots.len()];
            loop {
                let deg: i32 = slots
                    .iter()
                    .zip(&cur)
                    .map(|(&(j, k), &l)| factors[j].level(k).complex.degree(l as usize))
                    .sum();
                elems.push(Elem { maps: maps.clone(), labels: cur.clone() });
                degrees.push(deg);
                let mut p = slots.len();
                let mut done = true;
                while p > 0 {
                    p -= 1;
                    cur[p] += 1;
                    if (cur[p] as usize) < dims[p] {
                        done = false;
                        break;
                    }
                    cur[p] = 0;
                }
                if done {
                    break;
                }
            }
        }
        let index = elems.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        ChainProduct { factors, n, elems, degrees, index, act_cache: Mutex::new(HashMap::new()) }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn index_of(&self, e: &Elem) -> Option<usize> {
        self.index.get(e).copied()
    }

    /// `(level, arity)` of every flat label slot.
    pub fn slots(&self, e: &Elem) -> Vec<(usize, usize)> {
        slots_of(e, self.n)
    }

    fn label_degree(&self, slot: (usize, usize), l: u32) -> i32 {
        label_degree(&self.factors, slot, l)
    }

    pub fn label(&self, i: usize) -> String {
        let e = &self.elems[i];
        let slots = self.slots(e);
        let maps: Vec<String> = e.maps.iter().map(|m| m.to_string()).collect();
        let labels: Vec<String> = slots
            .iter()
            .zip(&e.labels)
            .map(|(&(j, k), &l)| self.factors[j].level(k).complex.labels()[l as usize].clone())
            .collect();
        format!("[{}|{}]", maps.join(""), labels.join(","))
    }

    /// Internal differential, columns indexed like `elems`.
    pub fn differential(&self) -> Vec<SparseVec<F>> {
        self.elems
            .iter()
            .map(|e| {
                let slots = self.slots(e);
                let mut terms: Vec<(usize, F)> = Vec::new();
                let mut sign_deg = 0i32;
                for (p, &slot) in slots.iter().enumerate() {
                    let l = e.labels[p] as usize;
                    let d = self.factors[slot.0].level(slot.1).complex.differential();
                    let sign = F::sign(sign_deg % 2 == 0);
                    for (r, x) in d.col(l) {
                        let mut e2 = e.clone();
                        e2.labels[p] = *r as u32;
                        terms.push((self.index[&e2], x.times(&sign)));
                    }
                    sign_deg += self.label_degree(slot, e.labels[p]);
                }
                crate::linalg::collect_terms(terms)
            })
            .collect()
    }

    fn label_action(&self, j: usize, k: usize, tau: &Perm) -> SparseMatrix<F> {
        let key = (j, k, tau.clone());
        if let Some(m) = self.act_cache.lock().expect("cache").get(&key) {
            return m.clone();
        }
        let m = self.factors[j].level(k).act(tau);
        self.act_cache.lock().expect("cache").insert(key, m.clone());
        m
    }

    /// `π · e` for `π ∈ Σ_n`, as a combination of basis elements.
    pub fn act(&self, i: usize, pi: &Perm) -> SparseVec<F> {
        let e = &self.elems[i];
        let t = e.maps.len();
        let mut maps = e.maps.clone();
        let mut terms: Vec<(Vec<u32>, F)> = vec![(e.labels.clone(), F::one())];
        let mut pi = pi.clone();
        let mut deg_of: Vec<i32> = {
            let slots = self.slots(e);
            slots.iter().zip(&e.labels).map(|(&s, &l)| self.label_degree(s, l)).collect()
        };
        for j in (0..=t).rev() {
            let phi = if j == 0 { Surjection::constant(pi.len()) } else { maps[j - 1].clone() };
            let off = e.offset(j);
            let fibers = phi.fibers();
            // label actions by the induced fiber permutations
            for (ei, fib) in fibers.iter().enumerate() {
                let (_, tau) = crate::symseq::moved(fib, &pi);
                if tau.is_identity() {
                    continue;
                }
                let mat = self.label_action(j, fib.len(), &tau);
                let mut next = Vec::with_capacity(terms.len());
                for (labels, c) in terms {
                    for (r, x) in mat.col(labels[off + ei] as usize) {
                        let mut l2 = labels.clone();
                        l2[off + ei] = *r as u32;
                        next.push((l2, c.times(x)));
                    }
                }
                terms = next;
            }
            if j == 0 {
                break;
            }
            let pinv = pi.inverse();
            let raw = phi.pre_compose(&pinv);
            let (psi, sigma) = raw.canonicalize();
            let sinv = sigma.inverse();
            let a = phi.target();
            // slot e of raw moves to σ⁻¹(e)
            let sign = F::sign(koszul_sign(&sinv, &deg_of[off..off + a]));
            let mut new_deg = deg_of.clone();
            for x in 0..a {
                new_deg[off + sinv.apply(x)] = deg_of[off + x];
            }
            deg_of = new_deg;
            terms = terms
                .into_iter()
                .map(|(labels, c)| {
                    let mut l2 = labels.clone();
                    for x in 0..a {
                        l2[off + sinv.apply(x)] = labels[off + x];
                    }
                    (l2, c.times(&sign))
                })
                .collect();
            maps[j - 1] = psi;
            pi = sinv;
        }
        let out = terms.into_iter().map(|(labels, c)| {
            let key = Elem { maps: maps.clone(), labels };
            (self.index[&key], c)
        });
        crate::linalg::collect_terms(out)
    }

    /// Matrices of the adjacent transpositions.
    pub fn generators(&self) -> Vec<SparseMatrix<F>> {
        (0..self.n.saturating_sub(1))
            .map(|i| {
                let p = Perm::transposition(self.n, i);
                let cols = (0..self.len()).map(|x| self.act(x, &p)).collect();
                SparseMatrix::from_columns(self.len(), cols)
            })
            .collect()
    }

    /// Merge levels `j` and `j + 1` of element `i` with `composer`, landing in
    /// `target`. Terms missing from `target` are dropped; `target` must
    /// contain every element the caller does not intend to discard.
    pub fn merge(&self, i: usize, j: usize, composer: &dyn Composer<F>, target: &ChainProduct<'_, F>) -> SparseVec<F> {
        merge_elem(&self.factors, self.n, &self.elems[i], j, composer, target)
    }

    /// Append a level with map `psi` (onto `n`) and labels `labels`; the
    /// result is an element of a product with one more factor.
    pub fn graft(&self, i: usize, psi: &Surjection, labels: &[u32]) -> Elem {
        let mut e = self.elems[i].clone();
        debug_assert_eq!(psi.target(), self.n);
        e.maps.push(psi.clone());
        e.labels.extend_from_slice(labels);
        e
    }
}

/// Merge levels `j` and `j + 1` of an element of `[factors](n)`.
pub fn merge_elem<F: Field>(
    factors: &[&SymSeq<F>],
    n: usize,
    e: &Elem,
    j: usize,
    composer: &dyn Composer<F>,
    target: &ChainProduct<'_, F>,
) -> SparseVec<F> {
    let slots = slots_of(e, n);
    let outer_map = e.level_map(j, n);
    let inner_map = e.maps[j].clone();
    let a = outer_map.target();
    let b = inner_map.target();
    let off_x = e.offset(j);
    let off_y = e.offset(j + 1);
    debug_assert_eq!(off_y, off_x + a);
    // interleave x_e with the y_f over e
    let fibers = outer_map.fibers();
    let mut order: Vec<usize> = Vec::with_capacity(a + b);
    for (ei, fib) in fibers.iter().enumerate() {
        order.push(ei);
        order.extend(fib.iter().map(|f| a + f));
    }
    let mut perm = vec![0; a + b];
    for (newpos, &old) in order.iter().enumerate() {
        perm[old] = newpos;
    }
    let degs: Vec<i32> = (0..a + b).map(|p| label_degree(factors, slots[off_x + p], e.labels[off_x + p])).collect();
    let sign = F::sign(koszul_sign(&Perm(perm), &degs));
    let merged = outer_map.compose(&inner_map);
    let mut blocks: Vec<SparseVec<F>> = Vec::with_capacity(a);
    for (ei, fib) in fibers.iter().enumerate() {
        let psi = inner_map.restrict_over(&outer_map, ei);
        let inner: Vec<usize> = fib.iter().map(|f| e.labels[off_y + f] as usize).collect();
        let v = composer.compose(&psi, e.labels[off_x + ei] as usize, &inner);
        if v.is_empty() {
            return Vec::new();
        }
        blocks.push(v);
    }
    let mut maps = Vec::with_capacity(e.maps.len() - 1);
    maps.extend_from_slice(&e.maps[..j.saturating_sub(1)]);
    if j >= 1 {
        maps.push(merged);
    }
    maps.extend_from_slice(&e.maps[j + 1..]);
    let prefix = &e.labels[..off_x];
    let suffix = &e.labels[off_y + b..];
    let mut out: Vec<(usize, F)> = Vec::new();
    let mut combo: Vec<(Vec<u32>, F)> = vec![(Vec::with_capacity(a), sign)];
    for blk in &blocks {
        let mut next = Vec::with_capacity(combo.len() * blk.len());
        for (ls, c) in &combo {
            for (r, x) in blk {
                let mut l2 = ls.clone();
                l2.push(*r as u32);
                next.push((l2, c.times(x)));
            }
        }
        combo = next;
    }
    for (mid, c) in combo {
        let mut labels = Vec::with_capacity(prefix.len() + mid.len() + suffix.len());
        labels.extend_from_slice(prefix);
        labels.extend_from_slice(&mid);
        labels.extend_from_slice(suffix);
        if let Some(k) = target.index_of(&Elem { maps: maps.clone(), labels }) {
            out.push((k, c));
        }
    }
    crate::linalg::collect_terms(out)
}


/// `(level, arity)` of every flat label slot of an element over `n` leaves.
pub fn slots_of(e: &Elem, n: usize) -> Vec<(usize, usize)> {
    let mut slots = vec![(0, e.base_size(n))];
    for (j, m) in e.maps.iter().enumerate() {
        for size in m.fiber_sizes() {
            slots.push((j + 1, size));
        }
    }
    slots
}

fn label_degree<F: Field>(factors: &[&SymSeq<F>], slot: (usize, usize), l: u32) -> i32 {
    factors[slot.0].level(slot.1).complex.degree(l as usize)
}

fn enumerate_chains(
    n: usize,
    t: usize,
    allow: LevelFilter<'_>,
    below: &mut Vec<Surjection>,
    out: &mut Vec<Vec<Surjection>>,
) {
    // `below` holds φ_{t}, φ_{t−1}, … (top first) for the levels fixed so far
    let j = t - below.len();
    if j == 0 {
        let mut maps = below.clone();
        maps.reverse();
        out.push(maps);
        return;
    }
    let size = below.last().map_or(n, |m| m.target());
    let lo = if size == 0 { 0 } else { 1 };
    for a in lo..=size {
        for phi in orbit_reps(size, a).iter() {
            if !allow(j, phi) {
                continue;
            }
            below.push(phi.clone());
            enumerate_chains(n, t, allow, below, out);
            below.pop();
        }
    }
}

/// Build a chain complex with `Σ_n` action from a chain product.
pub fn to_eq_complex<F: Field>(cp: &ChainProduct<'_, F>) -> crate::chain::EqComplex<F> {
    let labels = (0..cp.len()).map(|i| cp.label(i)).collect();
    let d = SparseMatrix::from_columns(cp.len(), cp.differential());
    let (c, pos) = crate::chain::ChainComplex::from_unsorted(cp.degrees.clone(), labels, d).expect("chain product");
    let gens = cp.generators().iter().map(|g| crate::chain::permute_square(g, &pos)).collect();
    crate::chain::EqComplex::new(c, cp.n, gens).expect("chain product action")
}

/// Sorted positions of a chain product's basis in [`to_eq_complex`].
pub fn sorted_positions<F: Field>(cp: &ChainProduct<'_, F>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..cp.len()).collect();
    order.sort_by_key(|&i| cp.degrees[i]);
    let mut pos = vec![0; order.len()];
    for (k, &i) in order.iter().enumerate() {
        pos[i] = k;
    }
    pos
}

/// `M ∘ N` for reduced `N`, levels `0..=max_arity`.
pub fn circle<F: Field>(m: &SymSeq<F>, n: &SymSeq<F>) -> crate::error::Result<SymSeq<F>> {
    if !n.is_reduced() {
        return Err(crate::error::Error::NotReduced(
            "circle product needs a reduced right factor; use the algebra construction for arity-0 inputs".into(),
        ));
    }
    let max = m.max_arity().min(n.max_arity());
    let levels = (0..=max)
        .map(|k| to_eq_complex(&ChainProduct::new(vec![m, n], k, &allow_all)))
        .collect();
    SymSeq::new(max, m.is_reduced(), levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Q, F2};

    #[test]
    fn com_circle_com_counts_partitions() {
        let c = SymSeq::<Q>::com(4);
        let cc = circle(&c, &c).unwrap();
        cc.validate().unwrap();
        // Bell numbers
        assert_eq!(cc.dims(), vec![0, 1, 2, 5, 15]);
    }

    #[test]
    fn unit_laws() {
        let c = SymSeq::<Q>::com(4);
        let u = SymSeq::<Q>::unit(4);
        assert_eq!(circle(&u, &c).unwrap().dims(), c.dims());
        assert_eq!(circle(&c, &u).unwrap().dims(), c.dims());
    }

    #[test]
    fn triple_products_are_equivariant() {
        let c = SymSeq::<F2>::com(4);
        let cp = ChainProduct::new(vec![&c, &c, &c], 4, &allow_all);
        let eq = to_eq_complex(&cp);
        eq.validate().unwrap();
    }
}
