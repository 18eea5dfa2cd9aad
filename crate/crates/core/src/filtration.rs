//! Decreasing and increasing filtrations of right `Com`-modules.
//!
//! The decreasing filtration `F^n M` keeps the levels of arity `≥ n`. The
//! increasing filtration `F_n M` is the cellular skeleton built by iterated
//! pushouts
//!
//! ```text
//! i_n(F_{n−1}M(n)) ∘ Com ──→ i_n(M(n)) ∘ Com
//!          │                        │
//!       F_{n−1}M  ─────────────→  F_n M
//! ```
//!
//! computed levelwise as cokernels of difference maps.

use std::collections::{BTreeMap, HashMap};

use crate::algebra::{tq, Algebra, AlgebraBar};
use crate::chain::{tensor_power, ChainComplex, ChainMap, EqComplex};
use crate::combinatorics::Surjection;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{rank, SparseMatrix, SparseVec};
use crate::operad::{ModuleMap, RightModule};
use crate::symseq::SymSeq;
use crate::tree::{allow_all, sorted_positions, ChainProduct};

/// A quotient module with its projection and a linear section.
#[derive(Clone, Debug)]
pub struct ModuleQuotient<F: Field> {
    pub module: RightModule<F>,
    pub projection: ModuleMap<F>,
    pub section: Vec<SparseMatrix<F>>,
}

/// `N / S` for levelwise spans `subs[r] ⊂ N(r)`; fails unless `S` is a submodule.
pub fn module_quotient<F: Field>(target: &RightModule<F>, subs: &[SparseMatrix<F>]) -> Result<ModuleQuotient<F>> {
    let max = target.max_arity();
    let mut levels = Vec::with_capacity(max + 1);
    let mut proj = Vec::with_capacity(max + 1);
    let mut sec = Vec::with_capacity(max + 1);
    for (n, sub) in subs.iter().enumerate().take(max + 1) {
        let lvl = target.level(n);
        let q = lvl.complex.quotient(sub)?;
        let mut gens = Vec::with_capacity(lvl.generators().len());
        for g in lvl.generators() {
            if !q.projection.mul(g).mul(sub).is_zero() {
                return Err(Error::Invariant(format!("subspace at level {n} is not Σ-stable")));
            }
            gens.push(q.projection.mul(g).mul(&q.section));
        }
        levels.push(EqComplex::new(q.complex, n, gens)?);
        proj.push(q.projection);
        sec.push(q.section);
    }
    for (psi, d) in target.deltas() {
        let (m, k) = (psi.domain(), psi.target());
        if !proj[m].mul(d).mul(&subs[k]).is_zero() {
            return Err(Error::Invariant(format!("subspace is not stable under Δ_{psi}")));
        }
    }
    let seq = SymSeq::new(max, true, levels)?;
    let module = RightModule::from_fn(seq, |psi| proj[psi.domain()].mul(target.delta(psi)).mul(&sec[psi.target()]))?;
    Ok(ModuleQuotient { module, projection: ModuleMap { levels: proj }, section: sec })
}

/// Cokernel of a module map into `target`.
pub fn module_cokernel<F: Field>(target: &RightModule<F>, f: &ModuleMap<F>) -> Result<ModuleQuotient<F>> {
    module_quotient(target, &f.levels)
}

pub fn zero_map<F: Field>(src: &RightModule<F>, dst: &RightModule<F>) -> ModuleMap<F> {
    let levels = (0..=src.max_arity()).map(|r| SparseMatrix::zeros(dst.level(r).dim(), src.level(r).dim())).collect();
    ModuleMap { levels }
}

/// Is every level of the map an isomorphism of graded spaces?
pub fn is_levelwise_iso<F: Field>(f: &ModuleMap<F>) -> bool {
    f.levels.iter().all(|m| m.rows() == m.cols() && rank(m) == m.cols())
}

/// The free module `i_n(X) ∘ Com` with its basis keyed by `(ψ, x)`, `ψ: r ↠ n`.
#[derive(Clone, Debug)]
pub struct FreeLevel<F: Field> {
    pub generators: EqComplex<F>,
    pub module: RightModule<F>,
    keys: Vec<Vec<(Surjection, u32)>>,
    index: Vec<HashMap<(Surjection, u32), usize>>,
}

impl<F: Field> FreeLevel<F> {
    pub fn new(x: EqComplex<F>, max_arity: usize) -> Result<Self> {
        let m0 = SymSeq::embed(x.clone(), max_arity)?;
        let module = RightModule::free(&m0)?;
        let com = SymSeq::com(max_arity);
        let mut keys = Vec::with_capacity(max_arity + 1);
        let mut index = Vec::with_capacity(max_arity + 1);
        for r in 0..=max_arity {
            let cp = ChainProduct::new(vec![&m0, &com], r, &allow_all);
            let pos = sorted_positions(&cp);
            let mut k = vec![(Surjection::identity(0), 0); cp.len()];
            for (i, e) in cp.elems.iter().enumerate() {
                k[pos[i]] = (e.maps[0].clone(), e.labels[0]);
            }
            index.push(k.iter().cloned().enumerate().map(|(i, key)| (key, i)).collect());
            keys.push(k);
        }
        Ok(FreeLevel { generators: x, module, keys, index })
    }

    pub fn arity(&self) -> usize {
        self.generators.arity()
    }

    /// Position of the generator `x` in level `n`.
    pub fn generator(&self, x: usize) -> usize {
        self.index[self.arity()][&(Surjection::identity(self.arity()), x as u32)]
    }

    /// The module map determined by `h: X → N(n)`.
    pub fn extend(&self, h: &SparseMatrix<F>, target: &RightModule<F>) -> ModuleMap<F> {
        let levels = self
            .keys
            .iter()
            .enumerate()
            .map(|(r, keys)| {
                let cols = keys.iter().map(|(psi, x)| target.delta(psi).apply(h.col(*x as usize))).collect();
                SparseMatrix::from_columns(target.level(r).dim(), cols)
            })
            .collect();
        ModuleMap { levels }
    }

    /// `i_n(h) ∘ Com` for an equivariant chain map `h: X → Y`.
    pub fn map_to(&self, other: &FreeLevel<F>, h: &SparseMatrix<F>) -> ModuleMap<F> {
        let levels = self
            .keys
            .iter()
            .enumerate()
            .map(|(r, keys)| {
                let cols = keys
                    .iter()
                    .map(|(psi, x)| {
                        let mut v: SparseVec<F> = h
                            .col(*x as usize)
                            .iter()
                            .map(|(y, c)| (other.index[r][&(psi.clone(), *y as u32)], c.clone()))
                            .collect();
                        v.sort_unstable_by_key(|(i, _)| *i);
                        v
                    })
                    .collect();
                SparseMatrix::from_columns(other.keys[r].len(), cols)
            })
            .collect();
        ModuleMap { levels }
    }
}

// ---------------------------------------------------------------------------
// decreasing filtration

/// `F^n M`: the levels of arity `≥ n`.
pub fn decreasing_stage<F: Field>(m: &RightModule<F>, n: usize) -> RightModule<F> {
    let max = m.max_arity();
    let levels = (0..=max).map(|r| if r >= n { m.level(r).clone() } else { EqComplex::zero(r) }).collect();
    let seq = SymSeq::new(max, true, levels).expect("decreasing stage");
    let dims = seq.dims();
    RightModule::from_fn(seq, |psi| {
        if psi.target() >= n {
            m.delta(psi).clone()
        } else {
            SparseMatrix::zeros(dims[psi.domain()], dims[psi.target()])
        }
    })
    .expect("decreasing stage module")
}

/// The inclusion `F^{n+1}M → F^n M`.
pub fn decreasing_inclusion<F: Field>(m: &RightModule<F>, n: usize) -> ModuleMap<F> {
    let levels = (0..=m.max_arity())
        .map(|r| {
            let d = m.level(r).dim();
            match r {
                r if r > n => SparseMatrix::identity(d),
                r if r == n => SparseMatrix::zeros(d, 0),
                _ => SparseMatrix::zeros(0, 0),
            }
        })
        .collect();
    ModuleMap { levels }
}

/// `i_n(X) ∘ S(1)`: `X` at level `n` with trivial structure maps.
pub fn concentrated<F: Field>(x: &EqComplex<F>, max_arity: usize) -> Result<RightModule<F>> {
    let seq = SymSeq::embed(x.clone(), max_arity)?;
    let dims = seq.dims();
    RightModule::from_fn(seq, |psi| {
        if psi.is_identity() {
            SparseMatrix::identity(dims[psi.domain()])
        } else {
            SparseMatrix::zeros(dims[psi.domain()], dims[psi.target()])
        }
    })
}

/// The layer `F^n M / F^{n+1} M`, computed as a cokernel.
pub fn decreasing_layer<F: Field>(m: &RightModule<F>, n: usize) -> Result<ModuleQuotient<F>> {
    let big = decreasing_stage(m, n);
    module_cokernel(&big, &decreasing_inclusion(m, n))
}

/// The layer equals `i_n(M(n)) ∘ S(1)` on the nose.
pub fn check_decreasing_layer<F: Field>(m: &RightModule<F>, n: usize) -> Result<()> {
    let layer = decreasing_layer(m, n)?;
    let expect = concentrated(m.level(n), m.max_arity())?;
    for r in 0..=m.max_arity() {
        let (a, b) = (layer.module.level(r), expect.level(r));
        if a.dim() != b.dim()
            || a.complex.degrees() != b.complex.degrees()
            || a.complex.differential() != b.complex.differential()
            || a.generators() != b.generators()
        {
            return Err(Error::Invariant(format!("decreasing layer {n} differs at level {r}")));
        }
    }
    if layer.module.deltas() != expect.deltas() {
        return Err(Error::Invariant(format!("decreasing layer {n} has nontrivial structure maps")));
    }
    Ok(())
}

/// The coinvariants `(A ⊗ X^{⊗n})_{Σ_n}`, keeping total weight `≤ max_weight`.
/// `X` is weight graded by `weights`.
pub fn over_group<F: Field>(a: &EqComplex<F>, x: &ChainComplex<F>, weights: &[usize], max_weight: usize) -> Result<ChainComplex<F>> {
    let (power, _) = tensor_power(x, a.arity(), |t| t.iter().map(|&i| weights[i]).sum::<usize>() <= max_weight)?;
    Ok(a.tensor(&power)?.coinvariants()?.complex)
}

/// Homology of the bar construction over the decreasing layer `n`, and of
/// `(M(n) ⊗ TQ(I)^{⊗n})_{Σ_n}` computed independently.
pub fn filtered_bar_decreasing<F: Field>(
    m: &RightModule<F>,
    alg: &Algebra<F>,
    n: usize,
) -> Result<(BTreeMap<i32, usize>, BTreeMap<i32, usize>)> {
    let layer = concentrated(m.level(n), m.max_arity())?;
    let lhs = AlgebraBar::new(&layer, alg)?.complex.homology();
    let t = tq(alg)?;
    let rhs = over_group(m.level(n), &t.complex, &t.weights, alg.max_weight)?.homology();
    Ok((lhs, rhs))
}

/// `I^n = B(F^n Com, Com, I)` for `n = 1..=top` with the tower maps `I^{n+1} → I^n`.
pub fn augmentation_ideal_tower<F: Field>(alg: &Algebra<F>, top: usize) -> Result<(Vec<AlgebraBar<F>>, Vec<SparseMatrix<F>>)> {
    let com = RightModule::<F>::com(alg.max_weight);
    let mut stages = Vec::with_capacity(top);
    for n in 1..=top + 1 {
        stages.push(AlgebraBar::new(&decreasing_stage(&com, n), alg)?);
    }
    let maps = (1..=top).map(|n| stages[n].induced(&stages[n - 1], &decreasing_inclusion(&com, n))).collect();
    Ok((stages, maps))
}

/// The cofiber `B(M, Com, I) / B(F^{n+1}M, Com, I) = B(M_{≤n}, Com, I)`.
pub fn tower_quotient<F: Field>(m: &RightModule<F>, alg: &Algebra<F>, n: usize) -> Result<AlgebraBar<F>> {
    AlgebraBar::new(&m.vanish_above(n, m.max_arity()), alg)
}

/// Check that the homology of `0 → A → B → C → 0` fits a long exact sequence:
/// `dim H_q(B) = rk i_q + rk p_q` and `dim H_q(A) − rk i_q = dim H_{q+1}(C) − rk p_{q+1}`.
pub fn les_consistent<F: Field>(
    a: &ChainComplex<F>,
    b: &ChainComplex<F>,
    c: &ChainComplex<F>,
    i: &SparseMatrix<F>,
    p: &SparseMatrix<F>,
) -> Result<bool> {
    let (im, pm) = (ChainMap::new(i.clone()), ChainMap::new(p.clone()));
    im.check(a, b)?;
    pm.check(b, c)?;
    if !p.mul(i).is_zero() || rank(i) != a.dim() || rank(p) != c.dim() {
        return Ok(false);
    }
    let (ha, hb, hc) = (a.homology(), b.homology(), c.homology());
    let get = |h: &BTreeMap<i32, usize>, q: i32| h.get(&q).copied().unwrap_or(0) as i64;
    let mut qs: Vec<i32> = ha.keys().chain(hb.keys()).chain(hc.keys()).copied().collect();
    qs.extend(qs.clone().iter().map(|q| q - 1));
    qs.sort_unstable();
    qs.dedup();
    for q in qs {
        let ri = im.homology_rank(a, b, q) as i64;
        let rp = pm.homology_rank(b, c, q) as i64;
        let rp1 = pm.homology_rank(b, c, q + 1) as i64;
        if get(&hb, q) != ri + rp || get(&ha, q) - ri != get(&hc, q + 1) - rp1 {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// increasing filtration

/// Place the columns of `m` into a summand of a direct sum, rows remapped by `pos`.
fn inject<F: Field>(sum_dim: usize, pos: &[usize], m: &SparseMatrix<F>) -> SparseMatrix<F> {
    SparseMatrix::from_columns(sum_dim, m.columns().iter().map(|c| crate::symseq::remap(c, pos)).collect())
}

/// `[a | b]` on a direct sum whose summands sit at `left` and `right`.
fn copair<F: Field>(rows: usize, left: &[usize], a: &SparseMatrix<F>, right: &[usize], b: &SparseMatrix<F>) -> SparseMatrix<F> {
    let mut cols = vec![Vec::new(); left.len() + right.len()];
    for (j, c) in a.columns().iter().enumerate() {
        cols[left[j]] = c.clone();
    }
    for (j, c) in b.columns().iter().enumerate() {
        cols[right[j]] = c.clone();
    }
    SparseMatrix::from_columns(rows, cols)
}

/// The pushout square that defines one stage.
#[derive(Clone, Debug)]
struct Pushout<F: Field> {
    /// `i_n(M(n)) ∘ Com`.
    b: FreeLevel<F>,
    /// Summand positions of `B ⊕ F_{n−1}M`.
    pos: Vec<(Vec<usize>, Vec<usize>)>,
    quotient: ModuleQuotient<F>,
}

/// `F_0M → F_1M → … → F_NM` with `g_n: F_nM → M`.
#[derive(Clone, Debug)]
pub struct IncreasingFiltration<F: Field> {
    pub base: RightModule<F>,
    pub stages: Vec<RightModule<F>>,
    /// `f[n]: F_nM → F_{n+1}M`.
    pub f: Vec<ModuleMap<F>>,
    /// `g[n]: F_nM → M`.
    pub g: Vec<ModuleMap<F>>,
    pushouts: Vec<Pushout<F>>,
}

impl<F: Field> IncreasingFiltration<F> {
    pub fn new(m: &RightModule<F>, top: usize) -> Result<Self> {
        let max = m.max_arity();
        if top > max {
            return Err(Error::Invalid(format!("filtration stage {top} exceeds max arity {max}")));
        }
        let zero = RightModule::zero(max);
        let mut stages = vec![zero.clone()];
        let mut g = vec![zero_map(&zero, m)];
        let mut f = Vec::new();
        let mut pushouts = Vec::new();
        for n in 1..=top {
            let prev = &stages[n - 1];
            let a = FreeLevel::new(prev.level(n).clone(), max)?;
            let b = FreeLevel::new(m.level(n).clone(), max)?;
            let alpha = a.map_to(&b, &g[n - 1].levels[n]);
            let beta = a.extend(&SparseMatrix::identity(prev.level(n).dim()), prev);
            let (sum, pos) = b.module.direct_sum_with_positions(prev)?;
            let diff = ModuleMap {
                levels: (0..=max)
                    .map(|r| {
                        let s = sum.level(r).dim();
                        inject(s, &pos[r].0, &alpha.levels[r]).sub(&inject(s, &pos[r].1, &beta.levels[r]))
                    })
                    .collect(),
            };
            let e = b.extend(&SparseMatrix::identity(m.level(n).dim()), m);
            for r in 0..=max {
                crate::ensure!(
                    e.levels[r].mul(&alpha.levels[r]) == g[n - 1].levels[r].mul(&beta.levels[r]),
                    "pushout square for stage {n} does not commute at level {r}"
                );
            }
            let quotient = module_cokernel(&sum, &diff)?;
            let fn1 = ModuleMap {
                levels: (0..=max)
                    .map(|r| quotient.projection.levels[r].mul(&inject(sum.level(r).dim(), &pos[r].1, &SparseMatrix::identity(prev.level(r).dim()))))
                    .collect(),
            };
            let gn = ModuleMap {
                levels: (0..=max)
                    .map(|r| copair(m.level(r).dim(), &pos[r].0, &e.levels[r], &pos[r].1, &g[n - 1].levels[r]).mul(&quotient.section[r]))
                    .collect(),
            };
            stages.push(quotient.module.clone());
            f.push(fn1);
            g.push(gn);
            pushouts.push(Pushout { b, pos, quotient });
        }
        Ok(IncreasingFiltration { base: m.clone(), stages, f, g, pushouts })
    }

    pub fn top(&self) -> usize {
        self.stages.len() - 1
    }

    /// All maps are module maps and `g_n ∘ f_{n−1} = g_{n−1}`.
    pub fn check(&self) -> Result<()> {
        for (n, st) in self.stages.iter().enumerate() {
            st.validate()?;
            self.g[n].check(st, &self.base)?;
            if n > 0 {
                self.f[n - 1].check(&self.stages[n - 1], st)?;
                crate::ensure!(self.g[n].compose(&self.f[n - 1]) == self.g[n - 1], "g_{n} f_{} ≠ g_{}", n - 1, n - 1);
            }
        }
        Ok(())
    }

    /// `g_n` is an isomorphism at every level `r ≤ n`.
    pub fn g_iso_through(&self, n: usize) -> bool {
        self.g[n].levels.iter().take(n + 1).all(|m| m.rows() == m.cols() && rank(m) == m.cols())
    }

    /// The attaching maps `(F_{n−1}M)(n) → M(n)` are injective for `n ≤ top`.
    pub fn is_cellular(&self) -> bool {
        (1..=self.top()).all(|n| {
            let m = &self.g[n - 1].levels[n];
            rank(m) == m.cols()
        })
    }

    /// `M̄(n) = M(n) / (F_{n−1}M)(n)` with its projection and section.
    pub fn mbar(&self, n: usize) -> Result<(EqComplex<F>, SparseMatrix<F>, SparseMatrix<F>)> {
        let lvl = self.base.level(n);
        let img = &self.g[n - 1].levels[n];
        if rank(img) != img.cols() {
            return Err(Error::NotCellular(format!("(F_{}M)({n}) → M({n}) is not injective", n - 1)));
        }
        let q = lvl.complex.quotient(img)?;
        let gens = lvl.generators().iter().map(|g| q.projection.mul(g).mul(&q.section)).collect();
        Ok((EqComplex::new(q.complex, n, gens)?, q.projection, q.section))
    }

    /// `F_nM / F_{n−1}M`.
    pub fn layer(&self, n: usize) -> Result<ModuleQuotient<F>> {
        module_cokernel(&self.stages[n], &self.f[n - 1])
    }

    /// The comparison `i_n(M̄(n)) ∘ Com → F_nM / F_{n−1}M`, with the free module.
    pub fn layer_comparison(&self, n: usize) -> Result<(FreeLevel<F>, ModuleQuotient<F>, ModuleMap<F>)> {
        let (mbar, _, sec) = self.mbar(n)?;
        let layer = self.layer(n)?;
        let po = &self.pushouts[n - 1];
        let cols = sec
            .columns()
            .iter()
            .map(|v| {
                let in_b: SparseVec<F> = {
                    let mut w: SparseVec<F> = v.iter().map(|(i, c)| (po.b.generator(*i), c.clone())).collect();
                    w.sort_unstable_by_key(|(i, _)| *i);
                    w
                };
                let in_sum = crate::symseq::remap(&in_b, &po.pos[n].0);
                layer.projection.levels[n].apply(&po.quotient.projection.levels[n].apply(&in_sum))
            })
            .collect();
        let h = SparseMatrix::from_columns(layer.module.level(n).dim(), cols);
        let free = FreeLevel::new(mbar, self.base.max_arity())?;
        let map = free.extend(&h, &layer.module);
        Ok((free, layer, map))
    }

    /// `F_nφ` for a module map `φ: M → N`, `n = 0..=top`.
    pub fn map(&self, other: &IncreasingFiltration<F>, phi: &ModuleMap<F>) -> Vec<ModuleMap<F>> {
        let max = self.base.max_arity();
        let mut out = vec![zero_map(&self.stages[0], &other.stages[0])];
        for n in 1..=self.top().min(other.top()) {
            let (p, q) = (&self.pushouts[n - 1], &other.pushouts[n - 1]);
            let bphi = p.b.map_to(&q.b, &phi.levels[n]);
            let levels = (0..=max)
                .map(|r| {
                    let rows = q.pos[r].0.len() + q.pos[r].1.len();
                    let left = inject(rows, &q.pos[r].0, &bphi.levels[r]);
                    let right = inject(rows, &q.pos[r].1, &out[n - 1].levels[r]);
                    let on_sum = copair(rows, &p.pos[r].0, &left, &p.pos[r].1, &right);
                    q.quotient.projection.levels[r].mul(&on_sum).mul(&p.quotient.section[r])
                })
                .collect();
            out.push(ModuleMap { levels });
        }
        out
    }
}

/// `M̄(n)` of `B(M, Com, Com)` equals `B(M, Com, S(1))(n)`: the simplices whose
/// last map is the identity span a complement of `(F_{n−1})(n)`, and the
/// induced map is an isomorphism of equivariant complexes.
pub fn bar_layer_identification<F: Field>(m: &RightModule<F>, n: usize) -> Result<bool> {
    use crate::bar::{bar_module, realize_level, BarInputs};
    use crate::operad::{LeftModule, Operad};
    let max = m.max_arity();
    let bar = bar_module(m);
    let filt = IncreasingFiltration::new(&bar, n)?;
    let (mbar, proj, _) = filt.mbar(n)?;
    let com = Operad::<F>::com(max);
    let (lc, lu) = (LeftModule::<F>::com(max), LeftModule::<F>::unit(max));
    let (bi, li) = (BarInputs::new(m, &com, &lc), BarInputs::new(m, &com, &lu));
    let (b, l) = (realize_level(&bi, n), realize_level(&li, n));
    crate::ensure!(b.complex == *bar.level(n), "bar level {n} differs from the realized level");
    let mut cols = vec![Vec::new(); l.complex.dim()];
    for (s, p) in l.simplices.iter().enumerate() {
        for x in 0..p.len() {
            let y = b.simplices[s].index_of(&p.elems[x]).ok_or_else(|| Error::Invariant("simplex missing from the bar module".into()))?;
            cols[l.flat(s, x)] = vec![(b.flat(s, y), F::one())];
        }
    }
    let phi = proj.mul(&SparseMatrix::from_columns(b.complex.dim(), cols));
    let iso = phi.rows() == phi.cols() && rank(&phi) == phi.cols();
    let chain = phi.mul(l.complex.complex.differential()) == mbar.complex.differential().mul(&phi);
    let equi = l.complex.generators().iter().zip(mbar.generators()).all(|(g, h)| phi.mul(g) == h.mul(&phi));
    Ok(iso && chain && equi)
}

/// `M̄(n)` for a cellular module.
pub fn increasing_layer<F: Field>(m: &RightModule<F>, n: usize) -> Result<EqComplex<F>> {
    Ok(IncreasingFiltration::new(m, n)?.mbar(n)?.0)
}

// ---------------------------------------------------------------------------
// filtered bar constructions and the comparison of filtrations on TQ

/// `B(F_•M, Com, I)` with the layer complexes `B(F_nM)/B(F_{n−1}M)`.
pub struct FilteredBar<F: Field> {
    pub stages: Vec<AlgebraBar<F>>,
    /// `B(f_{n−1})` for `n = 1..=top` (index `n − 1`).
    pub incl: Vec<SparseMatrix<F>>,
    /// `B(g_n)` into `B(M, Com, I)`.
    pub to_total: Vec<SparseMatrix<F>>,
    pub total: AlgebraBar<F>,
    pub layers: Vec<crate::chain::Quotient<F>>,
}

impl<F: Field> FilteredBar<F> {
    pub fn new(filt: &IncreasingFiltration<F>, alg: &Algebra<F>) -> Result<Self> {
        let stages: Vec<AlgebraBar<F>> = filt.stages.iter().map(|m| AlgebraBar::new(m, alg)).collect::<Result<_>>()?;
        let total = AlgebraBar::new(&filt.base, alg)?;
        let incl: Vec<SparseMatrix<F>> = (1..stages.len()).map(|n| stages[n - 1].induced(&stages[n], &filt.f[n - 1])).collect();
        let to_total = stages.iter().zip(&filt.g).map(|(b, g)| b.induced(&total, g)).collect();
        let layers = (1..stages.len()).map(|n| stages[n].complex.quotient(&incl[n - 1])).collect::<Result<_>>()?;
        Ok(FilteredBar { stages, incl, to_total, total, layers })
    }

    /// `H(F̄_n B(M, Com, I))`.
    pub fn layer_homology(&self, n: usize) -> BTreeMap<i32, usize> {
        self.layers[n - 1].complex.homology()
    }

    /// Ranks of `H_q(B(F_nM, Com, I)) → H_q(B(M, Com, I))`.
    pub fn image_ranks(&self, n: usize, degrees: &[i32]) -> BTreeMap<i32, usize> {
        let f = ChainMap::new(self.to_total[n].clone());
        degrees
            .iter()
            .map(|&q| (q, f.homology_rank(&self.stages[n].complex, &self.total.complex, q)))
            .filter(|(_, r)| *r > 0)
            .collect()
    }

    /// The short exact sequences `B(F_{n−1}) → B(F_n) → layer` have consistent long exact sequences.
    pub fn layer_sequences_exact(&self) -> Result<bool> {
        for n in 1..self.stages.len() {
            let q = &self.layers[n - 1];
            if !les_consistent(&self.stages[n - 1].complex, &self.stages[n].complex, &q.complex, &self.incl[n - 1], &q.projection)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `H(F̄_n B(M, Com, I))` and, independently, `H((M̄(n) ⊗ I^{⊗n})_{Σ_n})`.
pub fn filtered_bar_increasing<F: Field>(
    m: &RightModule<F>,
    alg: &Algebra<F>,
    n: usize,
) -> Result<(BTreeMap<i32, usize>, BTreeMap<i32, usize>)> {
    let filt = IncreasingFiltration::new(m, n)?;
    let bar = FilteredBar::new(&filt, alg)?;
    let (ic, pos) = alg.complex();
    let mut weights = vec![0; pos.len()];
    for (i, p) in pos.iter().enumerate() {
        weights[*p] = alg.weights[i];
    }
    let rhs = over_group(&filt.mbar(n)?.0, &ic, &weights, alg.max_weight)?.homology();
    Ok((bar.layer_homology(n), rhs))
}

/// The top-cell functional `Σ^{−k}(S^k ⊗ Com) → S(1)`, nonzero only at level 1.
pub fn top_cell<F: Field>(sphere: &RightModule<F>, unit: &RightModule<F>) -> Result<ModuleMap<F>> {
    let mut levels: Vec<SparseMatrix<F>> = (0..=sphere.max_arity()).map(|r| SparseMatrix::zeros(unit.level(r).dim(), sphere.level(r).dim())).collect();
    let lvl = &sphere.level(1).complex;
    let top = lvl.range(0).next().ok_or_else(|| Error::Invalid("sphere has no top cell".into()))?;
    crate::ensure!(lvl.range(1).is_empty(), "sphere module has cells above the top degree");
    levels[1] = SparseMatrix::from_triplets(1, lvl.dim(), vec![(0, top, F::one())])?;
    let map = ModuleMap { levels };
    map.check(sphere, unit)?;
    Ok(map)
}

/// One layer of the comparison between the filtrations of `TQ(I)` coming from
/// `B(S(1), Com, Com)` and from `Σ^{−k}(S^k ⊗ Com)`.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct LayerComparison {
    pub n: usize,
    /// Degrees `q ≤ bound` are compared.
    pub bound: i32,
    pub bar: BTreeMap<i32, usize>,
    pub sphere: BTreeMap<i32, usize>,
    pub agree: bool,
    /// Ranks of `H(B(F_n)) → H(B(M))` on both sides, degrees `≤ bound`.
    pub bar_image: BTreeMap<i32, usize>,
    pub sphere_image: BTreeMap<i32, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FiltrationComparison {
    pub algebra: String,
    pub k: usize,
    pub layers: Vec<LayerComparison>,
    /// The maps to `S(1)` commute with inclusions and layer projections.
    pub squares_commute: bool,
    /// All layer short exact sequences have exact homology sequences.
    pub sequences_exact: bool,
}

impl FiltrationComparison {
    pub fn holds(&self) -> bool {
        self.squares_commute && self.sequences_exact && self.layers.iter().all(|l| l.agree && l.bar_image == l.sphere_image)
    }
}

fn restrict(h: &BTreeMap<i32, usize>, bound: i32) -> BTreeMap<i32, usize> {
    h.iter().filter(|(q, _)| **q <= bound).map(|(q, d)| (*q, *d)).collect()
}

/// Do the maps `B(F_nφ)` commute with inclusions and layer projections?
fn bar_squares_commute<F: Field>(src: &FilteredBar<F>, dst: &FilteredBar<F>, maps: &[ModuleMap<F>]) -> bool {
    let ind: Vec<SparseMatrix<F>> = src.stages.iter().zip(&dst.stages).zip(maps).map(|((a, b), f)| a.induced(b, f)).collect();
    (1..src.stages.len()).all(|n| {
        let inc = dst.incl[n - 1].mul(&ind[n - 1]) == ind[n].mul(&src.incl[n - 1]);
        let (p, q) = (&src.layers[n - 1], &dst.layers[n - 1]);
        let layer_map = q.projection.mul(&ind[n]).mul(&p.section);
        let proj = layer_map.mul(&p.projection) == q.projection.mul(&ind[n]);
        let chain = ChainMap::new(layer_map).check(&p.complex, &q.complex).is_ok();
        inc && proj && chain
    })
}

/// Compare the two filtrations of `TQ(I)` through `n_max`, in degrees
/// `≤ degree_bound` intersected with the stable range of layer `n`, which is
/// degrees below `n·g + n + k − 2` where `g` is the lowest degree in `I`.
pub fn compare_filtrations<F: Field>(
    alg: &Algebra<F>,
    n_max: usize,
    k: usize,
    model: crate::sset::SphereModel,
    degree_bound: i32,
) -> Result<FiltrationComparison> {
    let w = alg.max_weight;
    crate::ensure!(n_max <= w, "filtration stage {n_max} exceeds the weight bound {w}");
    let unit = RightModule::<F>::unit(w);
    let bar = crate::bar::bar_module(&unit);
    let sphere = crate::sset::sphere_module::<F>(k, model, w);
    let eps = crate::bar::augmentation(&unit, &bar);
    let eta = top_cell(&sphere, &unit)?;
    let (fb, fs, fu) = (IncreasingFiltration::new(&bar, n_max)?, IncreasingFiltration::new(&sphere, n_max)?, IncreasingFiltration::new(&unit, n_max)?);
    let (bb, bs, bu) = (FilteredBar::new(&fb, alg)?, FilteredBar::new(&fs, alg)?, FilteredBar::new(&fu, alg)?);
    let squares_commute = bar_squares_commute(&bb, &bu, &fb.map(&fu, &eps)) && bar_squares_commute(&bs, &bu, &fs.map(&fu, &eta));
    let sequences_exact = bb.layer_sequences_exact()? && bs.layer_sequences_exact()?;
    let g = alg.degrees.iter().copied().min().unwrap_or(0);
    let mut layers = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let ni = n as i32;
        let bound = if n == 1 { degree_bound } else { degree_bound.min(ni * g + ni + k as i32 - 3) };
        let (hb, hs) = (restrict(&bb.layer_homology(n), bound), restrict(&bs.layer_homology(n), bound));
        // the image filtration on H(TQ) needs every layer in range
        let total_bound = (2..=w as i32).map(|m| m * g + m + k as i32 - 3).min().unwrap_or(degree_bound).min(degree_bound);
        let degs: Vec<i32> = (ni * g - 1..=total_bound).collect();
        layers.push(LayerComparison {
            n,
            bound,
            agree: hb == hs,
            bar: hb,
            sphere: hs,
            bar_image: bb.image_ranks(n, &degs),
            sphere_image: bs.image_ranks(n, &degs),
        });
    }
    Ok(FiltrationComparison { algebra: alg.name.clone(), k, layers, squares_commute, sequences_exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bar::bar_module;
    use crate::field::{Field, Q};

    #[test]
    fn decreasing_layers_are_concentrated() {
        let com = RightModule::<Q>::com(4);
        let bar = bar_module(&RightModule::<Q>::unit(3));
        for n in 1..=4 {
            check_decreasing_layer(&com, n).unwrap();
        }
        for n in 1..=3 {
            check_decreasing_layer(&bar, n).unwrap();
        }
    }

    #[test]
    fn decreasing_layer_bar_matches_kunneth() {
        let com = RightModule::<Q>::com(3);
        for spec in ["free:0", "free:1", "zero:0"] {
            let alg = Algebra::<Q>::from_spec(spec, 3).unwrap();
            for n in 1..=3 {
                let (lhs, rhs) = filtered_bar_decreasing(&com, &alg, n).unwrap();
                assert_eq!(lhs, rhs, "{spec} layer {n}");
            }
        }
    }

    #[test]
    fn augmentation_tower_layers() {
        let alg = Algebra::<Q>::from_spec("free:0", 3).unwrap();
        let (stages, maps) = augmentation_ideal_tower(&alg, 3).unwrap();
        for n in 1..=3 {
            let q = stages[n - 1].complex.quotient(&maps[n - 1]).unwrap();
            assert_eq!(q.complex.homology(), BTreeMap::from([(0, 1)]), "layer {n}");
        }
        // square-zero: I → TQ(I) is the unit class, so I² carries TQ(I) in weights ≥ 2 shifted down by one
        let sq = Algebra::<Q>::from_spec("zero:0", 3).unwrap();
        let (stages, _) = augmentation_ideal_tower(&sq, 2).unwrap();
        let t = tq(&sq).unwrap().homology_by_weight();
        let i2 = stages[1].homology_by_weight();
        for w in 2..=3 {
            let shifted: BTreeMap<i32, usize> = t.get(&w).cloned().unwrap_or_default().into_iter().map(|(q, d)| (q - 1, d)).collect();
            assert_eq!(i2.get(&w).cloned().unwrap_or_default(), shifted, "weight {w}");
        }
    }

    #[test]
    fn tower_fiber_sequences_are_exact() {
        let com = RightModule::<Q>::com(3);
        let alg = Algebra::<Q>::from_spec("zero:0", 3).unwrap();
        for n in 2..=3 {
            let p = tower_quotient(&com, &alg, n).unwrap();
            let p_prev = tower_quotient(&com, &alg, n - 1).unwrap();
            let layer = AlgebraBar::new(&concentrated(com.level(n), 3).unwrap(), &alg).unwrap();
            let proj = ModuleMap {
                levels: (0..=3).map(|r| if r < n { SparseMatrix::identity(1) } else { SparseMatrix::zeros(usize::from(r < n), 1) }).collect(),
            };
            let pm = p.induced(&p_prev, &proj);
            let incl = ModuleMap {
                levels: (0..=3).map(|r| if r == n { SparseMatrix::identity(1) } else { SparseMatrix::zeros(usize::from(r <= n), 0) }).collect(),
            };
            let im = layer.induced(&p, &incl);
            assert!(les_consistent(&layer.complex, &p.complex, &p_prev.complex, &im, &pm).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn over_group_of_trivial_rep() {
        let alg = Algebra::<Q>::from_spec("free:1", 3).unwrap();
        let t = tq(&alg).unwrap();
        let triv = RightModule::<Q>::com(2);
        let h = over_group(triv.level(2), &t.complex, &t.weights, 3).unwrap().homology();
        assert!(h.is_empty(), "odd generator squares to zero in coinvariants: {h:?}");
    }

    fn check_all(m: &RightModule<Q>, top: usize) -> IncreasingFiltration<Q> {
        let filt = IncreasingFiltration::new(m, top).unwrap();
        filt.check().unwrap();
        for n in 0..=top {
            assert!(filt.g_iso_through(n), "g_{n} not iso through level {n}");
        }
        filt
    }

    #[test]
    fn com_is_its_first_stage() {
        let com = RightModule::<Q>::com(4);
        let filt = check_all(&com, 4);
        assert!(filt.is_cellular());
        assert!(is_levelwise_iso(&filt.g[1]));
        for n in 2..=4 {
            assert_eq!(filt.mbar(n).unwrap().0.dim(), 0);
        }
    }

    #[test]
    fn surjection_modules_jump_once() {
        for m in 1..=3 {
            let pm = RightModule::<Q>::surjections(m, 4);
            let filt = check_all(&pm, 4);
            for n in 0..=4 {
                let dims: usize = filt.stages[n].seq.dims().iter().sum();
                if n < m {
                    assert_eq!(dims, 0, "P_{m}: stage {n}");
                } else {
                    assert!(is_levelwise_iso(&filt.g[n]), "P_{m}: stage {n}");
                }
            }
        }
    }

    #[test]
    fn free_module_stages_are_arity_truncations() {
        for seed in 0..3 {
            let mut r = crate::random::rng(seed);
            let m0 = crate::random::random_symseq::<Q>(4, &mut r);
            let m = RightModule::free(&m0).unwrap();
            let filt = check_all(&m, 4);
            assert!(filt.is_cellular());
            let com = SymSeq::com(4);
            for n in 1..=4 {
                for lvl in 0..=4 {
                    let cp = ChainProduct::new(vec![&m0, &com], lvl, &allow_all);
                    let pos = sorted_positions(&cp);
                    let mut expect: Vec<usize> = (0..cp.len()).filter(|&i| cp.elems[i].maps[0].target() <= n).map(|i| pos[i]).collect();
                    expect.sort_unstable();
                    let gm = &filt.g[n].levels[lvl];
                    assert_eq!(rank(gm), gm.cols(), "g_{n} injective at level {lvl}");
                    let basis = SparseMatrix::from_columns(
                        cp.len(),
                        expect.iter().map(|&i| vec![(i, Q::one())]).collect(),
                    );
                    assert_eq!(rank(gm), expect.len());
                    assert_eq!(rank(&gm.hstack(&basis)), expect.len(), "seed {seed}, n {n}, level {lvl}");
                }
            }
        }
    }

    #[test]
    fn bar_module_layers_drop_the_last_level() {
        let unit = RightModule::<Q>::unit(4);
        assert!(check_all(&bar_module(&unit), 4).is_cellular());
        for n in 1..=4 {
            assert!(bar_layer_identification(&unit, n).unwrap(), "S(1), n = {n}");
        }
        for m in [RightModule::<Q>::com(3), RightModule::<Q>::surjections(2, 3), crate::random::random_cellular_module::<Q>(3, 2)] {
            for n in 1..=3 {
                assert!(bar_layer_identification(&m, n).unwrap(), "n = {n}");
            }
        }
    }

    #[test]
    fn tensor_module_stages_are_fat_diagonals() {
        use crate::sset::{tensor_module_with_powers, PointedSSet, SphereModel};
        for spec in ["set:2", "set:3", "s1"] {
            let k = PointedSSet::from_spec(spec, SphereModel::Min).unwrap();
            let (m, powers) = tensor_module_with_powers::<Q>(&k, 3);
            let filt = check_all(&m, 3);
            assert!(filt.is_cellular(), "{spec}");
            for n in 1..=3 {
                for r in 0..n {
                    let gm = &filt.g[r].levels[n];
                    let fat = powers[n].distinctness(r);
                    let basis = SparseMatrix::from_columns(powers[n].len(), fat.iter().map(|&i| vec![(i, Q::one())]).collect());
                    assert_eq!(rank(gm), fat.len(), "{spec}: F_{r} at level {n}");
                    assert_eq!(rank(&gm.hstack(&basis)), fat.len(), "{spec}: F_{r} at level {n}");
                }
            }
        }
    }

    #[test]
    fn layers_are_free_on_mbar() {
        let bar = bar_module(&RightModule::<Q>::unit(3));
        let rnd = crate::random::random_cellular_module::<Q>(3, 5);
        for m in [bar, rnd] {
            let filt = IncreasingFiltration::new(&m, 3).unwrap();
            for n in 1..=3 {
                let (free, layer, map) = filt.layer_comparison(n).unwrap();
                map.check(&free.module, &layer.module).unwrap();
                assert!(is_levelwise_iso(&map), "layer {n}");
            }
        }
    }

    #[test]
    fn filtration_is_functorial() {
        let unit = RightModule::<Q>::unit(3);
        let bar = bar_module(&unit);
        let eps = crate::bar::augmentation(&unit, &bar);
        let fb = IncreasingFiltration::new(&bar, 3).unwrap();
        let fu = IncreasingFiltration::new(&unit, 3).unwrap();
        let maps = fb.map(&fu, &eps);
        for n in 0..=3 {
            maps[n].check(&fb.stages[n], &fu.stages[n]).unwrap();
            assert_eq!(fu.g[n].compose(&maps[n]), eps.compose(&fb.g[n]), "naturality of g_{n}");
            if n > 0 {
                assert_eq!(fu.f[n - 1].compose(&maps[n - 1]), maps[n].compose(&fb.f[n - 1]), "naturality of f_{}", n - 1);
            }
        }
        assert!(!fu.is_cellular());
        assert!(matches!(fu.mbar(2), Err(Error::NotCellular(_))));
    }

    #[test]
    fn increasing_layer_bar_matches_group_formula() {
        let bar = bar_module(&RightModule::<Q>::unit(3));
        for spec in ["free:0", "zero:0"] {
            let alg = Algebra::<Q>::from_spec(spec, 3).unwrap();
            for n in 1..=3 {
                let (lhs, rhs) = filtered_bar_increasing(&bar, &alg, n).unwrap();
                assert_eq!(lhs, rhs, "{spec} layer {n}");
            }
        }
    }

    #[test]
    fn filtrations_of_tq_agree() {
        for spec in ["free:0", "free:1", "zero:0"] {
            let alg = Algebra::<Q>::from_spec(spec, 3).unwrap();
            let c = compare_filtrations(&alg, 3, 2, crate::sset::SphereModel::Min, 6).unwrap();
            assert!(c.holds(), "{spec}: {c:?}");
            if spec != "free:1" {
                assert!(c.layers[1].bar.contains_key(&1), "{spec}");
            }
        }
    }

    #[test]
    fn sphere_layers_differ_outside_stable_range() {
        // S^4/Δ for k = 2 carries an unstable class in degree k after desuspension
        let alg = Algebra::<Q>::from_spec("free:0", 2).unwrap();
        let unit = RightModule::<Q>::unit(2);
        let bar = bar_module(&unit);
        let sphere = crate::sset::sphere_module::<Q>(2, crate::sset::SphereModel::Min, 2);
        let hb = FilteredBar::new(&IncreasingFiltration::new(&bar, 2).unwrap(), &alg).unwrap().layer_homology(2);
        let hs = FilteredBar::new(&IncreasingFiltration::new(&sphere, 2).unwrap(), &alg).unwrap().layer_homology(2);
        assert_eq!(hb.get(&1), hs.get(&1));
        assert_ne!(hb, hs);
    }
}
