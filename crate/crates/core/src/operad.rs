//! Reduced operads, right `Com`-modules and left modules.
//!
//! Structure maps are stored per first-occurrence ordered surjection. For a
//! right `Com`-module, `Δ_ψ : M(k) → M(m)` for `ψ : m ↠ k`; a general
//! surjection `φ = σ ∘ ψ` acts by `Δ_φ(x) = Δ_ψ(σ⁻¹ · x)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::chain::{ChainMap, EqComplex};
use crate::combinatorics::{orbit_reps, Perm, Surjection};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{SparseMatrix, SparseVec};
use crate::symseq::{surjection_level, SymSeq};
use crate::tree::{allow_all, merge_elem, to_eq_complex, ChainProduct, Composer, Elem};

/// A reduced operad with `O(1)` spanned by the unit.
#[derive(Clone)]
pub struct Operad<F: Field> {
    pub seq: SymSeq<F>,
    pub name: String,
    mu: Arc<dyn Composer<F>>,
}

impl<F: Field> Operad<F> {
    pub fn new(name: &str, seq: SymSeq<F>, mu: Arc<dyn Composer<F>>) -> Result<Self> {
        if !seq.is_reduced() {
            return Err(Error::NotReduced(format!("operad {name} has a nonzero arity-0 part")));
        }
        if seq.max_arity() >= 1 && seq.level(1).dim() != 1 {
            return Err(Error::Invalid(format!("operad {name}: O(1) must be spanned by the unit")));
        }
        Ok(Operad { seq, name: name.into(), mu })
    }

    pub fn com(max_arity: usize) -> Self {
        let mu: Arc<dyn Composer<F>> = Arc::new(|_: &Surjection, _: usize, _: &[usize]| vec![(0, F::one())]);
        Operad::new("Com", SymSeq::com(max_arity), mu).expect("Com")
    }

    pub fn max_arity(&self) -> usize {
        self.seq.max_arity()
    }

    pub fn composer(&self) -> &dyn Composer<F> {
        self.mu.as_ref()
    }

    /// Unit and associativity of the composition, enumerated over all
    /// composable surjection pairs up to the maximum arity.
    pub fn validate(&self) -> Result<()> {
        self.seq.validate()?;
        let o = &self.seq;
        for m in 1..=self.max_arity() {
            let two = ChainProduct::new(vec![o, o], m, &allow_all);
            let one = ChainProduct::new(vec![o], m, &allow_all);
            check_equivariant(&two, &one, |i| two.merge(i, 0, self.composer(), &one))?;
            // unit laws
            for x in 0..o.level(m).dim() {
                let id = Surjection::identity(m);
                let left = self.mu.compose(&Surjection::constant(1).compose(&Surjection::constant(m)), 0, &[x]);
                let right = self.mu.compose(&id, x, &vec![0; m]);
                let expect = vec![(x, F::one())];
                if left != expect || right != expect {
                    return Err(Error::Invariant(format!("{}: unit law fails in arity {m}", self.name)));
                }
            }
            let three = ChainProduct::new(vec![o, o, o], m, &allow_all);
            for i in 0..three.len() {
                let a = apply_then(&three, i, 0, self.composer(), &two, 0, self.composer(), &one);
                let b = apply_then(&three, i, 1, self.composer(), &two, 0, self.composer(), &one);
                if a != b {
                    return Err(Error::Invariant(format!("{}: associativity fails at {}", self.name, three.label(i))));
                }
            }
        }
        Ok(())
    }
}

/// Merge level `j1` of element `i` into `mid`, then level `j2` into `last`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn apply_then<F: Field>(
    first: &ChainProduct<'_, F>,
    i: usize,
    j1: usize,
    c1: &dyn Composer<F>,
    mid: &ChainProduct<'_, F>,
    j2: usize,
    c2: &dyn Composer<F>,
    last: &ChainProduct<'_, F>,
) -> SparseVec<F> {
    let v = first.merge(i, j1, c1, mid);
    let terms = v.iter().flat_map(|(k, c)| mid.merge(*k, j2, c2, last).into_iter().map(move |(r, x)| (r, x.times(c))));
    crate::linalg::collect_terms(terms.collect::<Vec<_>>())
}

/// `f` is a degree-preserving `Σ_n`-map from `src` to `dst`, commuting with `d`.
fn check_equivariant<F: Field>(
    src: &ChainProduct<'_, F>,
    dst: &ChainProduct<'_, F>,
    f: impl Fn(usize) -> SparseVec<F>,
) -> Result<()> {
    let fm = SparseMatrix::from_columns(dst.len(), (0..src.len()).map(&f).collect());
    let ds = SparseMatrix::from_columns(src.len(), src.differential());
    let dd = SparseMatrix::from_columns(dst.len(), dst.differential());
    if fm.mul(&ds) != dd.mul(&fm) {
        return Err(Error::Invariant("structure map does not commute with d".into()));
    }
    for (gs, gd) in src.generators().iter().zip(dst.generators()) {
        if fm.mul(gs) != gd.mul(&fm) {
            return Err(Error::Invariant("structure map is not equivariant".into()));
        }
    }
    Ok(())
}

/// A right `Com`-module given by its `Δ_ψ` matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct RightModule<F: Field> {
    pub seq: SymSeq<F>,
    delta: BTreeMap<Surjection, SparseMatrix<F>>,
}

impl<F: Field> RightModule<F> {
    pub fn new(seq: SymSeq<F>, delta: BTreeMap<Surjection, SparseMatrix<F>>) -> Result<Self> {
        if !seq.is_reduced() {
            return Err(Error::NotReduced("right modules are reduced".into()));
        }
        for m in 1..=seq.max_arity() {
            for k in 1..=m {
                for psi in orbit_reps(m, k).iter() {
                    let mat = delta
                        .get(psi)
                        .ok_or_else(|| Error::Invalid(format!("missing structure map for {psi}")))?;
                    if mat.rows() != seq.level(m).dim() || mat.cols() != seq.level(k).dim() {
                        return Err(Error::Dimension(format!("structure map for {psi}")));
                    }
                }
            }
        }
        Ok(RightModule { seq, delta })
    }

    /// Build from a function computing `Δ_ψ` for every representative.
    pub fn from_fn(seq: SymSeq<F>, f: impl Fn(&Surjection) -> SparseMatrix<F>) -> Result<Self> {
        let mut delta = BTreeMap::new();
        for m in 1..=seq.max_arity() {
            for k in 1..=m {
                for psi in orbit_reps(m, k).iter() {
                    delta.insert(psi.clone(), f(psi));
                }
            }
        }
        Self::new(seq, delta)
    }

    pub fn max_arity(&self) -> usize {
        self.seq.max_arity()
    }

    pub fn level(&self, n: usize) -> &EqComplex<F> {
        self.seq.level(n)
    }

    /// `Δ_ψ` for a first-occurrence ordered `ψ`.
    pub fn delta(&self, psi: &Surjection) -> &SparseMatrix<F> {
        &self.delta[psi]
    }

    pub fn deltas(&self) -> &BTreeMap<Surjection, SparseMatrix<F>> {
        &self.delta
    }

    /// `Δ_φ` for an arbitrary surjection.
    pub fn delta_any(&self, phi: &Surjection) -> SparseMatrix<F> {
        let (psi, sigma) = phi.canonicalize();
        self.delta[&psi].mul(&self.level(phi.target()).act(&sigma.inverse()))
    }

    /// `Com` as a right module over itself.
    pub fn com(max_arity: usize) -> Self {
        Self::from_fn(SymSeq::com(max_arity), |_| SparseMatrix::identity(1)).expect("Com module")
    }

    /// The unit `S(1)`.
    pub fn unit(max_arity: usize) -> Self {
        let seq = SymSeq::unit(max_arity);
        Self::from_fn(seq.clone(), |psi| {
            SparseMatrix::identity(1).block(0..seq.level(psi.domain()).dim(), 0..seq.level(psi.target()).dim())
        })
        .expect("unit module")
    }

    pub fn zero(max_arity: usize) -> Self {
        Self::from_fn(SymSeq::zero(max_arity), |_| SparseMatrix::zeros(0, 0)).expect("zero module")
    }

    /// `P_r`: levels spanned by surjections onto `r`, `Δ_ψ(f) = f ∘ ψ`.
    pub fn surjections(r: usize, max_arity: usize) -> Self {
        let mut levels = vec![EqComplex::zero(0)];
        let mut bases = vec![Vec::new()];
        for n in 1..=max_arity {
            let (l, b) = surjection_level(n, r);
            levels.push(l);
            bases.push(b);
        }
        let seq = SymSeq::new(max_arity, true, levels).expect("P_r");
        let index: Vec<std::collections::HashMap<Surjection, usize>> =
            bases.iter().map(|b| b.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect()).collect();
        Self::from_fn(seq, |psi| {
            let (m, k) = (psi.domain(), psi.target());
            let cols = bases[k].iter().map(|f| vec![(index[m][&f.compose(psi)], F::one())]).collect();
            SparseMatrix::from_columns(bases[m].len(), cols)
        })
        .expect("P_r module")
    }

    /// The free module `M₀ ∘ Com`.
    pub fn free(m0: &SymSeq<F>) -> Result<Self> {
        let com = SymSeq::com(m0.max_arity());
        let max = m0.max_arity();
        let products: Vec<ChainProduct<'_, F>> = (0..=max).map(|n| ChainProduct::new(vec![m0, &com], n, &allow_all)).collect();
        let levels = products.iter().map(to_eq_complex).collect();
        let seq = SymSeq::new(max, true, levels)?;
        let pos: Vec<Vec<usize>> = products.iter().map(crate::tree::sorted_positions).collect();
        let mu = Operad::<F>::com(max);
        let three = vec![m0, &com, &com];
        Self::from_fn(seq, |psi| {
            let (m, k) = (psi.domain(), psi.target());
            let src = &products[k];
            let dst = &products[m];
            let mut cols = vec![Vec::new(); src.len()];
            for i in 0..src.len() {
                let e = src.graft(i, psi, &vec![0; k]);
                let v = merge_elem(&three, m, &e, 1, mu.composer(), dst);
                cols[pos[k][i]] = crate::symseq::remap(&v, &pos[m]);
            }
            SparseMatrix::from_columns(dst.len(), cols)
        })
    }

    /// Levelwise direct sum.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        Ok(self.direct_sum_with_positions(other)?.0)
    }

    /// Direct sum with the positions of both summands in every level.
    #[allow(clippy::type_complexity)]
    pub fn direct_sum_with_positions(&self, other: &Self) -> Result<(Self, Vec<(Vec<usize>, Vec<usize>)>)> {
        let max = self.max_arity();
        let mut levels = Vec::with_capacity(max + 1);
        let mut pos = Vec::with_capacity(max + 1);
        for n in 0..=max {
            let (l, a, b) = crate::symseq::direct_sum_eq(self.level(n), other.level(n));
            levels.push(l);
            pos.push((a, b));
        }
        let seq = SymSeq::new(max, true, levels)?;
        Self::from_fn(seq.clone(), |psi| {
            let (m, k) = (psi.domain(), psi.target());
            let mut cols = vec![Vec::new(); seq.level(k).dim()];
            for (j, c) in self.delta(psi).columns().iter().enumerate() {
                cols[pos[k].0[j]] = crate::symseq::remap(c, &pos[m].0);
            }
            for (j, c) in other.delta(psi).columns().iter().enumerate() {
                cols[pos[k].1[j]] = crate::symseq::remap(c, &pos[m].1);
            }
            SparseMatrix::from_columns(seq.level(m).dim(), cols)
        })
        .map(|module| (module, pos))
    }

    /// `Σ^k M`.
    pub fn shift(&self, k: i32) -> Self {
        let levels = self
            .seq
            .levels()
            .iter()
            .map(|l| EqComplex::new(l.complex.shift(k), l.arity(), l.generators().to_vec()).expect("shift"))
            .collect();
        let seq = SymSeq::new(self.max_arity(), true, levels).expect("shifted sequence");
        RightModule { seq, delta: self.delta.clone() }
    }

    /// Forget levels above `n`.
    pub fn truncate(&self, n: usize) -> Self {
        let seq = self.seq.truncate(n);
        let delta = self.delta.iter().filter(|(k, _)| k.domain() <= n).map(|(k, v)| (k.clone(), v.clone())).collect();
        RightModule { seq, delta }
    }

    /// The quotient module with levels above `a` replaced by zero, padded
    /// with zero levels up to `max_arity`.
    pub fn vanish_above(&self, a: usize, max_arity: usize) -> Self {
        let levels = (0..=max_arity)
            .map(|n| if n <= a && n <= self.max_arity() { self.level(n).clone() } else { EqComplex::zero(n) })
            .collect();
        let seq = SymSeq::new(max_arity, true, levels).expect("vanishing levels");
        let dims: Vec<usize> = seq.dims();
        Self::from_fn(seq, |psi| {
            if psi.domain() <= a && psi.domain() <= self.max_arity() {
                self.delta[psi].clone()
            } else {
                SparseMatrix::zeros(dims[psi.domain()], dims[psi.target()])
            }
        })
        .expect("vanishing module")
    }

    /// Check the module axioms: chain maps, unit, equivariance in both
    /// arities, and `Δ_{φ∘ψ} = Δ_ψ ∘ Δ_φ`.
    pub fn validate(&self) -> Result<()> {
        self.seq.validate()?;
        let max = self.max_arity();
        for (psi, mat) in &self.delta {
            let (m, k) = (psi.domain(), psi.target());
            ChainMap::new(mat.clone())
                .check(&self.level(k).complex, &self.level(m).complex)
                .map_err(|e| Error::Invariant(format!("Δ_{psi}: {e}")))?;
            if psi.is_identity() && *mat != SparseMatrix::identity(self.level(m).dim()) {
                return Err(Error::Invariant(format!("Δ_{psi} is not the identity")));
            }
            // π · Δ_ψ = Δ_{ψ ∘ π⁻¹}
            for i in 0..m.saturating_sub(1) {
                let t = Perm::transposition(m, i);
                let lhs = self.level(m).act(&t).mul(mat);
                let rhs = self.delta_any(&psi.pre_compose(&t));
                if lhs != rhs {
                    return Err(Error::Invariant(format!("Δ_{psi} is not Σ_{m}-equivariant")));
                }
            }
        }
        for m in 1..=max {
            for n in 1..=m {
                for k in 1..=n {
                    for psi in orbit_reps(m, n).iter() {
                        for phi in orbit_reps(n, k).iter() {
                            let lhs = self.delta(&phi.compose(psi)).clone();
                            let rhs = self.delta(psi).mul(self.delta(phi));
                            if lhs != rhs {
                                return Err(Error::Invariant(format!("Δ fails to compose for {phi} after {psi}")));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> ModuleJson {
        ModuleJson {
            seq: self.seq.to_json(),
            structure: self.delta.iter().map(|(k, v)| (k.clone(), v.to_json())).collect(),
        }
    }

    pub fn from_json(j: &ModuleJson) -> Result<Self> {
        let seq = SymSeq::from_json(&j.seq)?;
        let mut delta = BTreeMap::new();
        for (k, v) in &j.structure {
            delta.insert(k.clone(), SparseMatrix::from_json(v)?);
        }
        let m = Self::new(seq, delta)?;
        m.validate()?;
        Ok(m)
    }
}

impl<F: Field> Composer<F> for RightModule<F> {
    fn compose(&self, psi: &Surjection, outer: usize, _inner: &[usize]) -> SparseVec<F> {
        self.delta[psi].col(outer).to_vec()
    }
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct ModuleJson {
    pub seq: crate::symseq::SymSeqJson,
    pub structure: Vec<(Surjection, crate::linalg::MatrixJson)>,
}

/// A map of right modules, one matrix per level.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleMap<F> {
    pub levels: Vec<SparseMatrix<F>>,
}

impl<F: Field> ModuleMap<F> {
    pub fn identity(m: &RightModule<F>) -> Self {
        ModuleMap { levels: m.seq.levels().iter().map(|l| SparseMatrix::identity(l.dim())).collect() }
    }

    pub fn compose(&self, other: &ModuleMap<F>) -> Self {
        ModuleMap { levels: self.levels.iter().zip(&other.levels).map(|(a, b)| a.mul(b)).collect() }
    }

    /// Chain map, equivariant, and compatible with every `Δ_ψ`.
    pub fn check(&self, src: &RightModule<F>, dst: &RightModule<F>) -> Result<()> {
        for (n, f) in self.levels.iter().enumerate() {
            ChainMap::new(f.clone()).check(&src.level(n).complex, &dst.level(n).complex)?;
            for (g, h) in src.level(n).generators().iter().zip(dst.level(n).generators()) {
                if f.mul(g) != h.mul(f) {
                    return Err(Error::Invariant(format!("module map not equivariant at level {n}")));
                }
            }
        }
        for (psi, d) in src.deltas() {
            let (m, k) = (psi.domain(), psi.target());
            if self.levels[m].mul(d) != dst.delta(psi).mul(&self.levels[k]) {
                return Err(Error::Invariant(format!("module map does not commute with Δ_{psi}")));
            }
        }
        Ok(())
    }

    pub fn is_quasi_iso(&self, src: &RightModule<F>, dst: &RightModule<F>) -> bool {
        self.levels
            .iter()
            .enumerate()
            .all(|(n, f)| ChainMap::new(f.clone()).is_quasi_iso(&src.level(n).complex, &dst.level(n).complex))
    }
}

/// A left module over `Com` (reduced or concentrated in arity 0).
#[derive(Clone)]
pub struct LeftModule<F: Field> {
    pub seq: SymSeq<F>,
    pub name: String,
    lambda: Arc<dyn Composer<F>>,
}

impl<F: Field> LeftModule<F> {
    pub fn new(name: &str, seq: SymSeq<F>, lambda: Arc<dyn Composer<F>>) -> Self {
        LeftModule { seq, name: name.into(), lambda }
    }

    pub fn com(max_arity: usize) -> Self {
        let c = Operad::<F>::com(max_arity);
        LeftModule { seq: c.seq.clone(), name: "Com".into(), lambda: c.mu.clone() }
    }

    /// `S(1)` through the augmentation `Com → S(1)`.
    pub fn unit(max_arity: usize) -> Self {
        let lambda: Arc<dyn Composer<F>> = Arc::new(|psi: &Surjection, _: usize, _: &[usize]| {
            if psi.domain() == 1 {
                vec![(0, F::one())]
            } else {
                Vec::new()
            }
        });
        LeftModule { seq: SymSeq::unit(max_arity), name: "S(1)".into(), lambda }
    }

    pub fn composer(&self) -> &dyn Composer<F> {
        self.lambda.as_ref()
    }

    /// Associativity `λ ∘ (μ ∘ 1) = λ ∘ (1 ∘ λ)` and equivariance.
    pub fn validate(&self, o: &Operad<F>) -> Result<()> {
        self.seq.validate()?;
        let (os, ns) = (&o.seq, &self.seq);
        for m in 1..=self.seq.max_arity() {
            let one = ChainProduct::new(vec![ns], m, &allow_all);
            let on = ChainProduct::new(vec![os, ns], m, &allow_all);
            check_equivariant(&on, &one, |i| on.merge(i, 0, self.composer(), &one))?;
            let oon = ChainProduct::new(vec![os, os, ns], m, &allow_all);
            for i in 0..oon.len() {
                let a = apply_then(&oon, i, 0, o.composer(), &on, 0, self.composer(), &one);
                let b = apply_then(&oon, i, 1, self.composer(), &on, 0, self.composer(), &one);
                if a != b {
                    return Err(Error::Invariant(format!("{}: left action not associative", self.name)));
                }
            }
        }
        Ok(())
    }
}

/// Check the right action through the tree engine: associativity of `ρ` and
/// equivariance of `M ∘ Com → M`.
pub fn validate_right_action<F: Field>(m: &RightModule<F>) -> Result<()> {
    let com = SymSeq::com(m.max_arity());
    let mu = Operad::<F>::com(m.max_arity());
    for n in 1..=m.max_arity() {
        let one = ChainProduct::new(vec![&m.seq], n, &allow_all);
        let two = ChainProduct::new(vec![&m.seq, &com], n, &allow_all);
        check_equivariant(&two, &one, |i| two.merge(i, 0, m, &one))?;
        let three = ChainProduct::new(vec![&m.seq, &com, &com], n, &allow_all);
        for i in 0..three.len() {
            let a = apply_then(&three, i, 0, m, &two, 0, m, &one);
            let b = apply_then(&three, i, 1, mu.composer(), &two, 0, m, &one);
            if a != b {
                return Err(Error::Invariant(format!("right action not associative at {}", three.label(i))));
            }
        }
    }
    Ok(())
}

/// Element of `[M, Com, …]` with its labels.
pub fn elem_label<F: Field>(cp: &ChainProduct<'_, F>, e: &Elem) -> String {
    match cp.index_of(e) {
        Some(i) => cp.label(i),
        None => format!("{e:?}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{F2, Q};

    #[test]
    fn com_operad_axioms() {
        Operad::<Q>::com(4).validate().unwrap();
        LeftModule::<Q>::com(4).validate(&Operad::com(4)).unwrap();
        LeftModule::<Q>::unit(4).validate(&Operad::com(4)).unwrap();
    }

    #[test]
    fn basic_modules_validate() {
        for m in [RightModule::<Q>::com(4), RightModule::unit(4), RightModule::surjections(2, 4), RightModule::surjections(3, 4)] {
            m.validate().unwrap();
            validate_right_action(&m).unwrap();
        }
        assert_eq!(RightModule::<Q>::surjections(2, 4).seq.dims(), vec![0, 0, 2, 6, 14]);
        assert_eq!(RightModule::<Q>::surjections(1, 4).seq.dims(), SymSeq::<Q>::com(4).dims());
    }

    #[test]
    fn free_modules_validate() {
        let m0 = SymSeq::<F2>::unit(4);
        let free = RightModule::free(&m0).unwrap();
        free.validate().unwrap();
        assert_eq!(free.seq.dims(), vec![0, 1, 1, 1, 1]);
        let p2 = SymSeq::embed(surjection_level::<Q>(2, 2).0, 4).unwrap();
        let f = RightModule::free(&p2).unwrap();
        f.validate().unwrap();
        // i_2(Σ_2) ∘ Com = P_2
        assert_eq!(f.seq.dims(), RightModule::<Q>::surjections(2, 4).seq.dims());
    }

    #[test]
    fn direct_sum_and_json() {
        let m = RightModule::<Q>::com(3).direct_sum(&RightModule::surjections(2, 3)).unwrap();
        m.validate().unwrap();
        let j = serde_json::to_string(&m.to_json()).unwrap();
        let back = RightModule::<Q>::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
