//! Finite pointed simplicial sets, their smash products and powers, reduced
//! normalized chains, the right `Com`-modules `K ⊗ Com`, sphere models and
//! the stabilization maps `Σ(S^k ⊗ Com) → S^{k+1} ⊗ Com`.
//!
//! A simplex of a finite simplicial set is written `(x, σ)` with `x` a
//! nondegenerate simplex and `σ : [n] ↠ [dim x]` monotone, stored by its
//! values. A nondegenerate simplex of `K_1 ∧ ⋯ ∧ K_m` is a tuple of non-base
//! nondegenerate simplices plus, for each step `t → t+1` of `[n]`, the
//! nonempty set (bitmask) of coordinates whose degeneracy advances there.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, AlgebraBar};
use crate::chain::{tensor_power, ChainComplex, ChainMap, EqComplex};
use crate::combinatorics::{mono_set, Injection, Perm, Surjection};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{collect_terms, SparseMatrix, SparseVec};
use crate::operad::{ModuleMap, RightModule};
use crate::symseq::{permutation_module, SymSeq};
use crate::tree::{allow_all, sorted_positions, ChainProduct};

/// A simplex in Eilenberg–Zilber normal form.
pub type Simp = (u32, Vec<u8>);

/// Finite pointed simplicial set by nondegenerate simplices; id 0 is the basepoint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointedSSet {
    pub name: String,
    pub dims: Vec<usize>,
    /// `faces[x][i] = d_i x` for `dim x ≥ 1`.
    pub faces: Vec<Vec<Simp>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SphereModel {
    Min,
    Cube,
}

fn base_simp(n: usize) -> Simp {
    (0, vec![0; n + 1])
}

/// `d_i` of a simplex `(x, σ)` of dimension `n = σ.len() − 1`.
fn simp_face(k: &PointedSSet, s: &Simp, i: usize) -> Simp {
    let (x, sigma) = s;
    let n = sigma.len() - 1;
    if *x == 0 {
        return base_simp(n - 1);
    }
    let dim = k.dims[*x as usize];
    let mut rest: Vec<u8> = sigma.clone();
    rest.remove(i);
    let hit_all = rest.first() == Some(&0) && rest.last() == Some(&(dim as u8)) && rest.windows(2).all(|w| w[1] - w[0] <= 1);
    if hit_all {
        return (*x, rest);
    }
    // exactly the value σ(i) is now missing
    let l = sigma[i];
    let (y, tau) = &k.faces[*x as usize][l as usize];
    let comp = rest.iter().map(|&v| tau[if v > l { v - 1 } else { v } as usize]).collect();
    (*y, comp)
}

impl PointedSSet {
    /// `m₊`: `m` points plus a disjoint basepoint.
    pub fn discrete(m: usize) -> Self {
        PointedSSet { name: format!("{m}+"), dims: vec![0; m + 1], faces: vec![Vec::new(); m + 1] }
    }

    /// `Δ[k]/∂Δ[k]`.
    pub fn sphere_min(k: usize) -> Self {
        if k == 0 {
            return Self::discrete(1);
        }
        let faces = vec![Vec::new(), (0..=k).map(|_| base_simp(k - 1)).collect()];
        PointedSSet { name: format!("S{k}"), dims: vec![0, k], faces }
    }

    /// `(Δ[1]/∂Δ[1])^{∧k}`, built as `S¹ ∧ S^{k−1}`.
    pub fn sphere_cube(k: usize) -> Self {
        match k {
            0 => Self::discrete(1),
            1 => Self::sphere_min(1),
            _ => {
                let s = Smash::new(vec![Self::sphere_min(1), Self::sphere_cube(k - 1)]);
                let mut f = s.flatten();
                f.name = format!("S{k}c");
                f
            }
        }
    }

    pub fn sphere(k: usize, model: SphereModel) -> Self {
        match model {
            SphereModel::Min => Self::sphere_min(k),
            SphereModel::Cube => Self::sphere_cube(k),
        }
    }

    /// `s0`, `s1`, `s<k>` or `set:<m>`.
    pub fn from_spec(spec: &str, model: SphereModel) -> Result<Self> {
        if let Some(m) = spec.strip_prefix("set:") {
            let m: usize = m.parse().map_err(|_| Error::Parse(format!("space `{spec}`")))?;
            return Ok(Self::discrete(m));
        }
        if let Some(k) = spec.strip_prefix('s') {
            let k: usize = k.parse().map_err(|_| Error::Parse(format!("space `{spec}`")))?;
            return Ok(Self::sphere(k, model));
        }
        Err(Error::Parse(format!("unknown space `{spec}`")))
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn face(&self, s: &Simp, i: usize) -> Simp {
        simp_face(self, s, i)
    }

    /// Face data well formed and `d_i d_j = d_{j−1} d_i` for `i < j`.
    pub fn validate(&self) -> Result<()> {
        if self.dims.first() != Some(&0) {
            return Err(Error::Invalid("basepoint must be a vertex".into()));
        }
        for (x, &d) in self.dims.iter().enumerate() {
            let faces = &self.faces[x];
            if faces.len() != if d == 0 { 0 } else { d + 1 } {
                return Err(Error::Invalid(format!("simplex {x} has {} faces", faces.len())));
            }
            for (y, tau) in faces {
                let dy = self.dims[*y as usize];
                let ok = tau.len() == d && tau.first() == Some(&0) && tau.last() == Some(&(dy as u8)) && tau.windows(2).all(|w| w[1] - w[0] <= 1);
                if !ok {
                    return Err(Error::Invalid(format!("bad face data on simplex {x}")));
                }
            }
            if d >= 2 {
                let me: Simp = (x as u32, (0..=d as u8).collect());
                for j in 1..=d {
                    for i in 0..j {
                        let a = self.face(&self.face(&me, j), i);
                        let b = self.face(&self.face(&me, i), j - 1);
                        if a != b {
                            return Err(Error::Invariant(format!("simplicial identity d_{i}d_{j} fails on simplex {x}")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Reduced normalized chains.
    pub fn chains<F: Field>(&self) -> ChainComplex<F> {
        Smash::new(vec![self.clone()]).chains()
    }
}

/// A nondegenerate non-base simplex of a smash product.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tuple {
    pub ids: Vec<u32>,
    pub masks: Vec<u32>,
}

impl Tuple {
    pub fn dim(&self) -> usize {
        self.masks.len()
    }

    fn coords(&self) -> Vec<Simp> {
        (0..self.ids.len())
            .map(|j| {
                let mut v = Vec::with_capacity(self.masks.len() + 1);
                let mut cur = 0u8;
                v.push(0);
                for m in &self.masks {
                    cur += ((m >> j) & 1) as u8;
                    v.push(cur);
                }
                (self.ids[j], v)
            })
            .collect()
    }

    /// Number of distinct coordinate simplices.
    pub fn distinct(&self) -> usize {
        let col = |j: usize| (self.ids[j], self.masks.iter().map(|m| (m >> j) & 1).collect::<Vec<_>>());
        let mut seen: Vec<(u32, Vec<u32>)> = Vec::new();
        for j in 0..self.ids.len() {
            let c = col(j);
            if !seen.contains(&c) {
                seen.push(c);
            }
        }
        seen.len()
    }

    /// `(x_{ψ(0)}, …, x_{ψ(m−1)})`.
    pub fn diagonal(&self, psi: &Surjection) -> Tuple {
        let ids = (0..psi.domain()).map(|e| self.ids[psi.apply(e)]).collect();
        let masks = self
            .masks
            .iter()
            .map(|m| (0..psi.domain()).fold(0u32, |acc, e| acc | (((m >> psi.apply(e)) & 1) << e)))
            .collect();
        Tuple { ids, masks }
    }

    /// Swap coordinates `i` and `i + 1`.
    pub fn swap(&self, i: usize) -> Tuple {
        let mut ids = self.ids.clone();
        ids.swap(i, i + 1);
        let masks = self
            .masks
            .iter()
            .map(|m| {
                let (a, b) = ((m >> i) & 1, (m >> (i + 1)) & 1);
                (m & !(0b11 << i)) | (a << (i + 1)) | (b << i)
            })
            .collect();
        Tuple { ids, masks }
    }
}

/// Put a tuple of simplices in normal form: `None` at the basepoint,
/// otherwise the nondegenerate tuple and the common degeneracy.
pub fn normalize(coords: &[Simp]) -> Option<(Tuple, Vec<u8>)> {
    if coords.iter().any(|(x, _)| *x == 0) {
        return None;
    }
    let n = coords[0].1.len() - 1;
    let mut masks = Vec::with_capacity(n);
    let mut common = Vec::with_capacity(n + 1);
    common.push(0u8);
    for t in 0..n {
        let m = coords.iter().enumerate().fold(0u32, |acc, (j, (_, s))| acc | (((s[t + 1] - s[t]) as u32) << j));
        let last = *common.last().expect("nonempty");
        common.push(if m != 0 { last + 1 } else { last });
        if m != 0 {
            masks.push(m);
        }
    }
    Some((Tuple { ids: coords.iter().map(|c| c.0).collect(), masks }, common))
}

/// `K_1 ∧ ⋯ ∧ K_m` with its nondegenerate non-base simplices, sorted by dimension.
#[derive(Clone, Debug)]
pub struct Smash {
    pub factors: Vec<PointedSSet>,
    pub simplices: Vec<Tuple>,
    index: HashMap<Tuple, usize>,
}

impl Smash {
    pub fn new(factors: Vec<PointedSSet>) -> Self {
        let m = factors.len();
        assert!((1..=32).contains(&m), "smash of 1..=32 factors");
        let choices: Vec<Vec<u32>> = factors.iter().map(|k| (1..k.len() as u32).collect()).collect();
        let mut simplices = Vec::new();
        let mut ids = vec![0u32; m];
        enumerate_ids(&factors, &choices, 0, &mut ids, &mut simplices);
        simplices.sort_by(|a: &Tuple, b: &Tuple| (a.dim(), a).cmp(&(b.dim(), b)));
        let index = simplices.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        Smash { factors, simplices, index }
    }

    /// `K^{∧n}`.
    pub fn power(k: &PointedSSet, n: usize) -> Self {
        Self::new(vec![k.clone(); n])
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn index_of(&self, t: &Tuple) -> Option<usize> {
        self.index.get(t).copied()
    }

    /// Normal form of a tuple of simplices as (index, common degeneracy).
    pub fn lookup(&self, coords: &[Simp]) -> Option<(usize, Vec<u8>)> {
        let (t, c) = normalize(coords)?;
        Some((self.index[&t], c))
    }

    /// `d_i` of simplex `s` in normal form.
    pub fn face(&self, s: usize, i: usize) -> Option<(usize, Vec<u8>)> {
        let coords: Vec<Simp> = self.simplices[s]
            .coords()
            .iter()
            .zip(&self.factors)
            .map(|(c, k)| simp_face(k, c, i))
            .collect();
        self.lookup(&coords)
    }

    /// Reduced normalized chains, basis in storage order.
    pub fn chains<F: Field>(&self) -> ChainComplex<F> {
        let cols: Vec<SparseVec<F>> = (0..self.len())
            .map(|s| {
                let n = self.simplices[s].dim();
                let mut col = Vec::new();
                if n > 0 {
                    for i in 0..=n {
                        if let Some((t, c)) = self.face(s, i) {
                            if c.last() == Some(&((n - 1) as u8)) {
                                col.push((t, F::sign(i % 2 == 0)));
                            }
                        }
                    }
                }
                collect_terms(col)
            })
            .collect();
        let degrees = self.simplices.iter().map(|t| t.dim() as i32).collect();
        let labels = self.simplices.iter().map(|t| format!("{:?}/{:?}", t.ids, t.masks)).collect();
        ChainComplex::new(degrees, labels, SparseMatrix::from_columns(self.len(), cols)).expect("smash chains")
    }

    /// Chains of a power with the coordinate-permutation action.
    pub fn power_chains<F: Field>(&self) -> EqComplex<F> {
        let n = self.factors.len();
        let gens = (0..n.saturating_sub(1))
            .map(|i| {
                let cols = self.simplices.iter().map(|t| vec![(self.index[&t.swap(i)], F::one())]).collect();
                SparseMatrix::from_columns(self.len(), cols)
            })
            .collect();
        EqComplex::new(self.chains(), n, gens).expect("power action")
    }

    /// Flatten into a pointed simplicial set; simplex `i` gets id `i + 1`.
    pub fn flatten(&self) -> PointedSSet {
        let mut dims = vec![0];
        let mut faces = vec![Vec::new()];
        for s in 0..self.len() {
            let n = self.simplices[s].dim();
            dims.push(n);
            faces.push(if n == 0 {
                Vec::new()
            } else {
                (0..=n)
                    .map(|i| self.face(s, i).map_or_else(|| base_simp(n - 1), |(t, c)| (t as u32 + 1, c)))
                    .collect()
            });
        }
        let name = self.factors.iter().map(|k| k.name.as_str()).collect::<Vec<_>>().join("∧");
        PointedSSet { name, dims, faces }
    }

    /// Indices of simplices with at most `r` distinct coordinates.
    pub fn distinctness(&self, r: usize) -> Vec<usize> {
        (0..self.len()).filter(|&s| self.simplices[s].distinct() <= r).collect()
    }
}

fn enumerate_ids(factors: &[PointedSSet], choices: &[Vec<u32>], j: usize, ids: &mut Vec<u32>, out: &mut Vec<Tuple>) {
    if j == factors.len() {
        let dims: Vec<usize> = ids.iter().zip(factors).map(|(x, k)| k.dims[*x as usize]).collect();
        let lo = dims.iter().copied().max().unwrap_or(0);
        let hi: usize = dims.iter().sum();
        for n in lo..=hi {
            let mut masks = vec![0u32; n];
            place(&dims, 0, n, &mut masks, ids, out);
        }
        return;
    }
    for &x in &choices[j] {
        ids[j] = x;
        enumerate_ids(factors, choices, j + 1, ids, out);
    }
}

/// Choose for coordinate `j` its `dims[j]` step positions among `0..n`.
fn place(dims: &[usize], j: usize, n: usize, masks: &mut Vec<u32>, ids: &[u32], out: &mut Vec<Tuple>) {
    if j == dims.len() {
        if masks.iter().all(|m| *m != 0) {
            out.push(Tuple { ids: ids.to_vec(), masks: masks.clone() });
        }
        return;
    }
    let uncovered = masks.iter().filter(|m| **m == 0).count();
    if uncovered > dims[j..].iter().sum::<usize>() {
        return;
    }
    let k = dims[j];
    let mut pos: Vec<usize> = (0..k).collect();
    loop {
        for &p in &pos {
            masks[p] |= 1 << j;
        }
        place(dims, j + 1, n, masks, ids, out);
        for &p in &pos {
            masks[p] &= !(1 << j);
        }
        // next k-subset of 0..n
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if pos[i] < n - k + i {
                pos[i] += 1;
                for l in i + 1..k {
                    pos[l] = pos[l - 1] + 1;
                }
                break;
            }
        }
        if k == 0 {
            return;
        }
    }
}

/// Matrix of the diagonal `K^{∧r} → K^{∧m}` for `ψ : m ↠ r`.
pub fn diagonal_matrix<F: Field>(src: &Smash, dst: &Smash, psi: &Surjection) -> SparseMatrix<F> {
    let cols = src.simplices.iter().map(|t| vec![(dst.index[&t.diagonal(psi)], F::one())]).collect();
    SparseMatrix::from_columns(dst.len(), cols)
}

/// `K ⊗ Com` through arity `max_arity`, with the smash powers used.
pub fn tensor_module_with_powers<F: Field>(k: &PointedSSet, max_arity: usize) -> (RightModule<F>, Vec<Smash>) {
    let powers: Vec<Smash> = (0..=max_arity).map(|n| if n == 0 { Smash::new(vec![PointedSSet::discrete(0)]) } else { Smash::power(k, n) }).collect();
    let mut levels = vec![EqComplex::zero(0)];
    levels.extend(powers.iter().skip(1).map(|p| p.power_chains()));
    let seq = SymSeq::new(max_arity, true, levels).expect("tensor module levels");
    let m = RightModule::from_fn(seq, |psi| diagonal_matrix(&powers[psi.target()], &powers[psi.domain()], psi)).expect("tensor module");
    (m, powers)
}

/// `K ⊗ Com`.
pub fn tensor_module<F: Field>(k: &PointedSSet, max_arity: usize) -> RightModule<F> {
    tensor_module_with_powers(k, max_arity).0
}

/// `Σ^{−k}(S^k ⊗ Com)` in the given sphere model.
pub fn sphere_module<F: Field>(k: usize, model: SphereModel, max_arity: usize) -> RightModule<F> {
    tensor_module::<F>(&PointedSSet::sphere(k, model), max_arity).shift(-(k as i32))
}

/// The stabilization map `Σ^{−k}(S^k ⊗ Com) → Σ^{−k−1}(S^{k+1} ⊗ Com)` in the
/// cube model: Eilenberg–Zilber with the fundamental class of `S¹`, then the
/// diagonal on the `S¹` coordinate. Returns source, target and the map.
pub fn stabilization<F: Field>(k: usize, max_arity: usize) -> (RightModule<F>, RightModule<F>, ModuleMap<F>) {
    let sk = PointedSSet::sphere_cube(k);
    let circle = PointedSSet::sphere_min(1);
    let pair = Smash::new(vec![circle.clone(), sk.clone()]);
    let sk1 = if k == 0 { circle.clone() } else { pair.flatten() };
    let (src, src_pow) = tensor_module_with_powers::<F>(&sk, max_arity);
    let (dst, dst_pow) = tensor_module_with_powers::<F>(&sk1, max_arity);
    let mut levels = vec![SparseMatrix::zeros(0, 0)];
    for n in 1..=max_arity {
        let (sp, dp) = (&src_pow[n], &dst_pow[n]);
        let cols = sp
            .simplices
            .iter()
            .map(|t| {
                let d = t.dim();
                let coords = t.coords();
                let mut col = Vec::new();
                for p in 0..=d {
                    // ι degenerated to [d+1] ↠ [1] switching after p; x degenerated by s_p
                    let a: Vec<u8> = (0..=d + 1).map(|i| u8::from(i > p)).collect();
                    let sp_: Vec<usize> = (0..=d + 1).map(|i| if i <= p { i } else { i - 1 }).collect();
                    let mut out: Vec<Simp> = Vec::with_capacity(n);
                    let mut dead = false;
                    for (x, sigma) in &coords {
                        let deg: Vec<u8> = sp_.iter().map(|&i| sigma[i]).collect();
                        if k == 0 {
                            // S⁰ coordinate: the pair is just the circle
                            out.push((1, a.clone()));
                            continue;
                        }
                        match pair.lookup(&[(1, a.clone()), (*x, deg)]) {
                            Some((id, c)) => out.push((id as u32 + 1, c)),
                            None => dead = true,
                        }
                    }
                    if dead {
                        continue;
                    }
                    if let Some((idx, c)) = dp.lookup(&out) {
                        if c.last() == Some(&((d + 1) as u8)) {
                            col.push((idx, F::sign(p % 2 == 0)));
                        }
                    }
                }
                collect_terms(col)
            })
            .collect();
        levels.push(SparseMatrix::from_columns(dp.len(), cols));
    }
    (src.shift(-(k as i32)), dst.shift(-(k as i32) - 1), ModuleMap { levels })
}

/// `S¹ ∧ S^k → S^{k+1}` on minimal models, induced by `[1] × [k] → [k+1]`,
/// `(0, j) ↦ j`, `(1, j) ↦ k + 1`; `None` at the basepoint.
fn collapse(k: usize, a: &[u8], b: &[u8]) -> Option<Simp> {
    let c: Vec<u8> = a.iter().zip(b).map(|(&s, &t)| if s == 0 { t } else { k as u8 + 1 }).collect();
    let onto = c.first() == Some(&0) && c.last() == Some(&(k as u8 + 1)) && c.windows(2).all(|w| w[1] - w[0] <= 1);
    onto.then_some((1, c))
}

/// Stabilization map in either sphere model. The cube model uses the
/// diagonal on the `S¹` coordinate; the minimal model follows it by the
/// collapse `S¹ ∧ S^k → S^{k+1}` in each coordinate.
pub fn stabilization_map<F: Field>(k: usize, model: SphereModel, max_arity: usize) -> (RightModule<F>, RightModule<F>, ModuleMap<F>) {
    if model == SphereModel::Cube {
        return stabilization(k, max_arity);
    }
    let sk = PointedSSet::sphere_min(k);
    let sk1 = PointedSSet::sphere_min(k + 1);
    let (src, src_pow) = tensor_module_with_powers::<F>(&sk, max_arity);
    let (dst, dst_pow) = tensor_module_with_powers::<F>(&sk1, max_arity);
    let mut levels = vec![SparseMatrix::zeros(0, 0)];
    for n in 1..=max_arity {
        let (sp, dp) = (&src_pow[n], &dst_pow[n]);
        let cols = sp
            .simplices
            .iter()
            .map(|t| {
                let d = t.dim();
                let coords = t.coords();
                let mut col = Vec::new();
                'shuffle: for p in 0..=d {
                    let a: Vec<u8> = (0..=d + 1).map(|i| u8::from(i > p)).collect();
                    let mut out: Vec<Simp> = Vec::with_capacity(n);
                    for (_, sigma) in &coords {
                        let b: Vec<u8> = (0..=d + 1).map(|i| sigma[if i <= p { i } else { i - 1 }]).collect();
                        match collapse(k, &a, &b) {
                            Some(s) => out.push(s),
                            None => continue 'shuffle,
                        }
                    }
                    if let Some((idx, c)) = dp.lookup(&out) {
                        if c.last() == Some(&((d + 1) as u8)) {
                            col.push((idx, F::sign(p % 2 == 0)));
                        }
                    }
                }
                collect_terms(col)
            })
            .collect();
        levels.push(SparseMatrix::from_columns(dp.len(), cols));
    }
    (src.shift(-(k as i32)), dst.shift(-(k as i32) - 1), ModuleMap { levels })
}

/// Outcome of the stabilization search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StableTq {
    /// First `k` whose stabilization maps `k → k+1` and `k+1 → k+2` are both
    /// homology isomorphisms in degrees `≤ D`.
    pub witness: usize,
    /// Homology of `Σ^{−k}(S^k ⊗ I)` in degrees `≤ D` at the witness.
    pub homology: BTreeMap<i32, usize>,
    /// Homology in degrees `≤ D` for each `k` computed.
    pub by_k: Vec<BTreeMap<i32, usize>>,
    /// Arity cutoff of the sphere module used at each `k`.
    pub arity: Vec<usize>,
}

/// Arity cutoff for `Σ^{−k}(S^k ⊗ Com)` that leaves homology in degrees
/// `≤ D` unchanged: level `n` has homology only in degree `k(n − 1)`. Strict
/// coinvariants only see this in characteristic zero; otherwise no cutoff.
pub fn stable_arity<F: Field>(k: usize, degree_bound: i32, max_weight: usize) -> usize {
    if k == 0 || F::characteristic() != 0 {
        return max_weight;
    }
    (((degree_bound + 2) as usize).div_ceil(k)).clamp(1, max_weight)
}

fn low_homology<F: Field>(c: &ChainComplex<F>, bound: i32) -> BTreeMap<i32, usize> {
    c.homology().into_iter().filter(|(q, _)| *q <= bound).collect()
}

/// `colim_k Σ^{−k}(S^k ⊗ I)` in degrees `≤ D`, computed through weight
/// `I.max_weight`.
pub fn stable_tq<F: Field>(alg: &Algebra<F>, degree_bound: i32, max_k: usize, model: SphereModel) -> Result<StableTq> {
    let w = alg.max_weight;
    let mut prev: Option<(RightModule<F>, AlgebraBar<F>)> = None;
    let mut arity: Vec<usize> = Vec::new();
    let mut by_k = Vec::new();
    let mut iso: Vec<bool> = Vec::new();
    for k in 0..=max_k + 2 {
        let a = stable_arity::<F>(k, degree_bound, w);
        let module = sphere_module::<F>(k, model, a).vanish_above(a, w);
        let bar = AlgebraBar::new(&module, alg)?;
        by_k.push(low_homology(&bar.complex, degree_bound));
        if let Some((pm, pb)) = &prev {
            let common = a.min(arity[k - 1]);
            let (_, _, g) = stabilization_map::<F>(k - 1, model, common);
            let levels = (0..=w)
                .map(|n| if n <= common { g.levels[n].clone() } else { SparseMatrix::zeros(module.level(n).dim(), pm.level(n).dim()) })
                .collect();
            let map = ChainMap::new(pb.induced(&bar, &ModuleMap { levels }));
            let lo = pb.complex.min_degree().unwrap_or(0).min(bar.complex.min_degree().unwrap_or(0));
            let ok = (lo..=degree_bound).all(|q| {
                let r = map.homology_rank(&pb.complex, &bar.complex, q);
                r == pb.complex.homology_in(q) && r == bar.complex.homology_in(q)
            });
            iso.push(ok);
            // iso[j] is the map j → j+1
            if iso.len() >= 2 && iso[iso.len() - 2] && ok {
                let witness = k - 2;
                arity.push(a);
                return Ok(StableTq { witness, homology: by_k[witness].clone(), by_k, arity });
            }
        }
        arity.push(a);
        prev = Some((module, bar));
    }
    Err(Error::NotStable(format!("no stabilization in degrees ≤ {degree_bound} up to k = {max_k}")))
}

/// `Mono_m`: level `r` spanned by injections `r ↪ m` in degree 0, `Σ_r`
/// acting by `ι ↦ ι ∘ σ⁻¹`.
pub fn mono_sequence<F: Field>(m: usize, max_arity: usize) -> (SymSeq<F>, Vec<Vec<Injection>>) {
    let mut levels = vec![EqComplex::zero(0)];
    let mut monos = vec![Vec::new()];
    for r in 1..=max_arity {
        let set = mono_set(r, m);
        let index: HashMap<Injection, usize> = set.iter().cloned().enumerate().map(|(i, x)| (x, i)).collect();
        let labels = set.iter().map(|x| format!("{:?}", x.values())).collect();
        levels.push(permutation_module(r, labels, 0, |i, x| (index[&set[x].pre_compose(&Perm::transposition(r, i))], true)));
        monos.push(set);
    }
    (SymSeq::new(max_arity, true, levels).expect("mono sequence"), monos)
}

/// The epi-mono decomposition `Mono_m ∘ Com → m₊ ⊗ Com`, `(ψ, ι) ↦ ι ∘ ψ`.
/// Returns source, target and the map; the map is checked to be a module map.
pub fn epi_mono_map<F: Field>(m: usize, max_arity: usize) -> Result<(RightModule<F>, RightModule<F>, ModuleMap<F>)> {
    let (seq, monos) = mono_sequence::<F>(m, max_arity);
    let free = RightModule::free(&seq)?;
    let (tensor, powers) = tensor_module_with_powers::<F>(&PointedSSet::discrete(m), max_arity);
    let com = SymSeq::<F>::com(max_arity);
    let levels = (0..=max_arity)
        .map(|n| {
            let cp = ChainProduct::new(vec![&seq, &com], n, &allow_all);
            let pos = sorted_positions(&cp);
            let mut cols = vec![Vec::new(); cp.len()];
            for (i, e) in cp.elems.iter().enumerate() {
                let (psi, iota) = (&e.maps[0], &monos[e.maps[0].target()][e.labels[0] as usize]);
                let ids = (0..n).map(|x| (iota.apply(psi.apply(x)) + 1) as u32).collect();
                cols[pos[i]] = vec![(powers[n].index_of(&Tuple { ids, masks: Vec::new() }).expect("point of the power"), F::one())];
            }
            SparseMatrix::from_columns(tensor.level(n).dim(), cols)
        })
        .collect();
    let map = ModuleMap { levels };
    map.check(&free, &tensor)?;
    Ok((free, tensor, map))
}

/// The shuffle map `C̃(K)^{⊗n} → C̃(K^{∧n})`, a `Σ_n`-equivariant chain map.
pub fn eilenberg_zilber<F: Field>(k: &PointedSSet, n: usize) -> Result<(EqComplex<F>, EqComplex<F>, SparseMatrix<F>)> {
    let single = Smash::new(vec![k.clone()]);
    let (src, tuples) = tensor_power(&single.chains::<F>(), n, |_| true)?;
    let power = Smash::power(k, n);
    let dst = power.power_chains::<F>();
    let cols = tuples
        .iter()
        .map(|t| {
            let ids: Vec<u32> = t.iter().map(|&i| single.simplices[i].ids[0]).collect();
            let mut owners: Vec<usize> = Vec::new();
            for (j, &x) in ids.iter().enumerate() {
                owners.extend(std::iter::repeat_n(j, k.dims[x as usize]));
            }
            let mut terms = Vec::new();
            for word in distinct_permutations(&owners) {
                let inversions = (0..word.len()).flat_map(|a| (a + 1..word.len()).map(move |b| (a, b))).filter(|&(a, b)| word[a] > word[b]).count();
                let masks = word.iter().map(|&j| 1u32 << j).collect();
                let idx = power.index_of(&Tuple { ids: ids.clone(), masks }).expect("shuffle simplex");
                terms.push((idx, F::sign(inversions % 2 == 0)));
            }
            collect_terms(terms)
        })
        .collect();
    let map = SparseMatrix::from_columns(dst.dim(), cols);
    ChainMap::new(map.clone()).check(&src.complex, &dst.complex)?;
    for (g, h) in src.generators().iter().zip(dst.generators()) {
        crate::ensure!(map.mul(g) == h.mul(&map), "shuffle map is not equivariant");
    }
    Ok((src, dst, map))
}

/// Distinct rearrangements of a sorted word, lexicographically.
fn distinct_permutations(word: &[usize]) -> Vec<Vec<usize>> {
    let mut cur = word.to_vec();
    cur.sort_unstable();
    let mut out = vec![cur.clone()];
    // next lexicographic permutation
    loop {
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
        let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor");
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{F2, Q};
    use std::collections::BTreeMap;

    #[test]
    fn models_validate_and_have_sphere_homology() {
        for k in 0..=3 {
            for model in [SphereModel::Min, SphereModel::Cube] {
                let s = PointedSSet::sphere(k, model);
                s.validate().unwrap();
                assert_eq!(s.chains::<Q>().homology(), BTreeMap::from([(k as i32, 1)]), "{}", s.name);
            }
        }
        assert_eq!(PointedSSet::sphere_cube(2).len(), 1 + 3);
        assert_eq!(PointedSSet::sphere_cube(3).len(), 1 + 13);
    }

    #[test]
    fn smash_powers() {
        let two = PointedSSet::discrete(2);
        assert_eq!(Smash::power(&two, 2).len(), 4);
        let s1 = PointedSSet::sphere_min(1);
        let p = Smash::power(&s1, 2);
        assert_eq!(p.chains::<Q>().homology(), BTreeMap::from([(2, 1)]));
        // ordered Bell numbers
        assert_eq!(Smash::power(&s1, 4).len(), 75);
        let p = Smash::power(&PointedSSet::sphere_min(2), 3);
        let c = p.power_chains::<F2>();
        c.validate().unwrap();
        assert_eq!(c.complex.homology(), BTreeMap::from([(6, 1)]));
        assert_eq!(Smash::power(&PointedSSet::discrete(1), 3).len(), 1);
    }

    #[test]
    fn flattened_power_is_a_simplicial_set() {
        Smash::power(&PointedSSet::sphere_min(1), 3).flatten().validate().unwrap();
        Smash::new(vec![PointedSSet::sphere_min(2), PointedSSet::discrete(2)]).flatten().validate().unwrap();
    }

    #[test]
    fn tensor_modules_are_modules() {
        for k in [PointedSSet::discrete(2), PointedSSet::sphere_min(1), PointedSSet::sphere_cube(2)] {
            let m = tensor_module::<Q>(&k, 3);
            m.validate().unwrap();
            crate::operad::validate_right_action(&m).unwrap();
        }
    }

    #[test]
    fn fat_diagonal_of_two_points() {
        let p = Smash::power(&PointedSSet::discrete(2), 2);
        assert_eq!(p.distinctness(1).len(), 2);
        assert_eq!(p.len() - p.distinctness(1).len(), 2);
    }

    #[test]
    fn min_model_stabilization_is_a_module_map() {
        for k in 0..=3 {
            let (a, b, f) = stabilization_map::<Q>(k, SphereModel::Min, 3);
            f.check(&a, &b).unwrap();
            let one = crate::chain::ChainMap::new(f.levels[1].clone());
            assert!(one.is_quasi_iso(&a.level(1).complex, &b.level(1).complex), "k = {k}");
        }
    }

    #[test]
    fn stable_tq_matches_tq_rationally() {
        for spec in ["free:0", "zero:0"] {
            let alg = Algebra::<Q>::from_spec(spec, 4).unwrap();
            let st = stable_tq(&alg, 3, 4, SphereModel::Min).unwrap();
            let tq = crate::algebra::tq(&alg).unwrap();
            let expect: BTreeMap<i32, usize> = tq.complex.homology().into_iter().filter(|(q, _)| *q <= 3).collect();
            assert_eq!(st.homology, expect, "{spec}: {st:?}");
            assert!(st.witness <= 3, "{spec}: {st:?}");
        }
    }

    #[test]
    fn stabilization_is_a_module_map() {
        for (k, arity) in [(0, 3), (1, 3), (2, 2)] {
            let (a, b, f) = stabilization::<Q>(k, arity);
            f.check(&a, &b).unwrap();
            // level 1 is an isomorphism on homology
            let one = crate::chain::ChainMap::new(f.levels[1].clone());
            assert!(one.is_quasi_iso(&a.level(1).complex, &b.level(1).complex), "k = {k}");
        }
    }

    #[test]
    fn epi_mono_decomposition_is_an_isomorphism() {
        for m in 1..=3 {
            let (_, _, map) = epi_mono_map::<Q>(m, 4).unwrap();
            for (n, lvl) in map.levels.iter().enumerate() {
                assert!(lvl.rows() == lvl.cols() && lvl.is_signed_permutation(), "m = {m}, level {n}");
            }
        }
    }

    #[test]
    fn shuffle_map_compares_chain_powers() {
        use crate::filtration::over_group;
        for spec in ["set:2", "set:3", "s1"] {
            let k = PointedSSet::from_spec(spec, SphereModel::Min).unwrap();
            for n in 1..=3 {
                let (src, dst, map) = eilenberg_zilber::<Q>(&k, n).unwrap();
                let f = ChainMap::new(map.clone());
                assert!(f.is_quasi_iso(&src.complex, &dst.complex), "{spec}, n = {n}");
                if spec.starts_with("set") {
                    assert!(map.is_signed_permutation() && map.rows() == map.cols(), "{spec}, n = {n}");
                }
                let x = ChainComplex::<Q>::graded(vec![0], vec!["x".into()]).unwrap().0;
                let lhs = over_group(&dst, &x, &[1], n).unwrap().homology();
                let rhs = over_group(&src, &x, &[1], n).unwrap().homology();
                assert_eq!(lhs, rhs, "{spec}, n = {n}");
            }
        }
    }
}
