//! Registry of executable checks. Each check recomputes its objects from
//! scratch and compares them against an independent description.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::{tq, Algebra, AlgebraBar};
use crate::bar::{bar_module, check_simplicial_identities, lie, resolution_holds, BarInputs};
use crate::chain::{ChainComplex, ChainMap, EqComplex};
use crate::error::{Error, Result};
use crate::field::{Field, Q};
use crate::filtration::{
    augmentation_ideal_tower, bar_layer_identification, check_decreasing_layer, compare_filtrations, concentrated,
    filtered_bar_decreasing, filtered_bar_increasing, is_levelwise_iso, les_consistent, tower_quotient, IncreasingFiltration,
};
use crate::linalg::{rank, SparseMatrix};
use crate::operad::{LeftModule, ModuleMap, Operad, RightModule};
use crate::random::{random_cellular_module, random_symseq, rng};
use crate::sset::{eilenberg_zilber, epi_mono_map, sphere_module, stable_tq, tensor_module_with_powers, PointedSSet, Smash, SphereModel};
use crate::symseq::SymSeq;
use crate::tree::{allow_all, circle, sorted_positions, to_eq_complex, ChainProduct};

pub const SCHEMA_VERSION: u32 = 1;

/// Parameters shared by all checks. `None` selects the check's own default.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Params {
    pub max_n: Option<usize>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub degree_bound: i32,
    pub max_arity: usize,
    pub seed: u64,
    pub model: SphereModel,
}

impl Default for Params {
    fn default() -> Self {
        Params { max_n: None, n: None, k: None, degree_bound: 6, max_arity: 5, seed: 0, model: SphereModel::Min }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub id: String,
    pub statement: String,
    pub field: String,
    pub params: BTreeMap<String, Value>,
    pub pass: bool,
    pub seed: u64,
    pub witness: Value,
}

pub struct Check {
    pub id: &'static str,
    /// Alternative numbered name accepted on the command line.
    pub alias: Option<&'static str>,
    pub statement: &'static str,
}

pub const CHECKS: &[Check] = &[
    Check { id: "lie-ranks", alias: None, statement: "H(Lie(n)) has rank (n−1)! concentrated in degree n−1" },
    Check { id: "circle-product", alias: Some("lemma-2.1"), statement: "S(1) is a two-sided unit for ∘ and ∘ is associative" },
    Check { id: "bar-simplicial", alias: Some("prop-3.1a"), statement: "B(M, Com, Com) satisfies the simplicial identities" },
    Check { id: "bar-resolution", alias: Some("prop-3.1b"), statement: "ε: B(M, Com, Com) → M is a quasi-isomorphism" },
    Check { id: "bar-invariance", alias: Some("prop-3.3b"), statement: "a quasi-isomorphism of modules induces one on B(−, Com, I)" },
    Check { id: "tensor-free", alias: Some("thm-4.3"), statement: "K ⊗ (Com ∘ X) ≅ Com ∘ (C̃K ⊗ X) via the shuffle map" },
    Check { id: "epi-mono", alias: Some("thm-4.4"), statement: "m₊ ⊗ Com ≅ Mono_m ∘ Com" },
    Check { id: "sphere-powers", alias: Some("lemma-5.1"), statement: "Σ^{−k}C̃((S^k)^{∧n}) has homology only in degree k(n−1)" },
    Check { id: "stable-tq", alias: Some("cor-5.3"), statement: "colim_k Σ^{−k}(S^k ⊗ I) agrees with TQ(I)" },
    Check { id: "decreasing-layers", alias: Some("lemma-6.2"), statement: "the decreasing layers are concentrated in one arity" },
    Check { id: "decreasing-bar-layers", alias: Some("prop-6.3"), statement: "decreasing layers of B(M, Com, I) are (M(n) ⊗ TQ(I)^{⊗n})_{Σn}" },
    Check { id: "augmentation-tower", alias: Some("cor-6.4"), statement: "the augmentation ideal tower has the expected layers and fiber sequences" },
    Check { id: "skeleton-iso", alias: Some("prop-7.3"), statement: "g_n: F_nM → M is an isomorphism in arities ≤ n" },
    Check { id: "filtration-invariance", alias: Some("thm-7.5"), statement: "F_n preserves quasi-isomorphisms of cellular modules" },
    Check { id: "increasing-bar-layers", alias: Some("cor-7.7"), statement: "increasing layers of B(M, Com, I) are (M̄(n) ⊗ I^{⊗n})_{Σn}" },
    Check { id: "free-skeleton", alias: Some("lemma-8.1"), statement: "F_n of a free module is generated in arities ≤ n" },
    Check { id: "bar-layers", alias: Some("prop-8.2"), statement: "M̄(n) of B(M, Com, Com) is B(M, Com, S(1))(n)" },
    Check { id: "lie-layers", alias: Some("thm-8.4"), statement: "the n-th layer of B(S(1), Com, Com) is Lie(n)" },
    Check { id: "fat-diagonal", alias: Some("lemma-8.5"), statement: "F_r(K ⊗ Com)(n) is spanned by tuples with at most r distinct coordinates" },
    Check { id: "tensor-layers", alias: Some("thm-8.6"), statement: "M̄(n) of K ⊗ Com is C̃(K^{∧n}/Δ_n)" },
    Check { id: "filtration-comparison", alias: Some("thm-8.9"), statement: "the bar and sphere filtrations of TQ(I) agree in the stable range" },
    Check { id: "sphere-layers", alias: Some("cor-8.10"), statement: "Σ^{−k}C̃(S^{kn}/Δ_n) agrees with Lie(n) in the stable range" },
];

/// Resolve an id or alias.
pub fn lookup(id: &str) -> Option<&'static Check> {
    CHECKS.iter().find(|c| c.id == id || c.alias == Some(id))
}

/// Run one check. Unknown ids are usage errors; failures of internal
/// invariants are reported as a failed check.
pub fn run<F: Field>(id: &str, p: &Params) -> Result<Report> {
    let check = lookup(id).ok_or_else(|| Error::Usage(format!("unknown check `{id}`")))?;
    let (field, outcome) = dispatch::<F>(check.id, p);
    let (pass, witness) = outcome.unwrap_or_else(|e| (false, json!({ "error": e.to_string() })));
    let mut params = BTreeMap::new();
    params.insert("degree_bound".into(), json!(p.degree_bound));
    params.insert("max_arity".into(), json!(p.max_arity));
    params.insert("model".into(), json!(p.model));
    for (key, v) in [("max_n", p.max_n), ("n", p.n), ("k", p.k)] {
        if let Some(v) = v {
            params.insert(key.into(), json!(v));
        }
    }
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        id: check.id.into(),
        statement: check.statement.into(),
        field,
        params,
        pass,
        seed: p.seed,
        witness,
    })
}

pub fn run_all<F: Field>(p: &Params) -> Result<Vec<Report>> {
    CHECKS.iter().map(|c| run::<F>(c.id, p)).collect()
}

type Outcome = Result<(bool, Value)>;

fn dispatch<F: Field>(id: &str, p: &Params) -> (String, Outcome) {
    let tag = F::tag();
    match id {
        "lie-ranks" => (tag, lie_ranks::<F>(p)),
        "circle-product" => (tag, circle_product::<F>(p)),
        "bar-simplicial" => (tag, bar_simplicial::<F>(p)),
        "bar-resolution" => (tag, bar_resolution::<F>(p)),
        "bar-invariance" => (tag, bar_invariance::<F>(p)),
        "tensor-free" => (tag, tensor_free::<F>(p)),
        "epi-mono" => (tag, epi_mono::<F>(p)),
        "sphere-powers" => (tag, sphere_powers::<F>(p)),
        // strict coinvariants only model the stable statements in characteristic 0
        "stable-tq" => (Q::tag(), stable(p)),
        "decreasing-layers" => (tag, decreasing_layers::<F>(p)),
        "decreasing-bar-layers" => (tag, decreasing_bar_layers::<F>(p)),
        "augmentation-tower" => (tag, augmentation_tower::<F>(p)),
        "skeleton-iso" => (tag, skeleton_iso::<F>(p)),
        "filtration-invariance" => (tag, filtration_invariance::<F>(p)),
        "increasing-bar-layers" => (tag, increasing_bar_layers::<F>(p)),
        "free-skeleton" => (tag, free_skeleton::<F>(p)),
        "bar-layers" => (tag, bar_layers::<F>(p)),
        "lie-layers" => (tag, lie_layers::<F>(p)),
        "fat-diagonal" => (tag, fat_diagonal::<F>(p)),
        "tensor-layers" => (tag, tensor_layers::<F>(p)),
        "filtration-comparison" => (Q::tag(), comparison(p)),
        "sphere-layers" => (tag, sphere_layers::<F>(p)),
        _ => unreachable!("registry and dispatch disagree on `{id}`"),
    }
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn table(h: &BTreeMap<i32, usize>) -> Value {
    json!(h.iter().map(|(q, d)| (q.to_string(), *d)).collect::<BTreeMap<String, usize>>())
}

/// Homology and dimension of each level agree.
fn same_levels<F: Field>(a: &SymSeq<F>, b: &SymSeq<F>) -> bool {
    a.dims() == b.dims() && a.levels().iter().zip(b.levels()).all(|(x, y)| x.complex.homology() == y.complex.homology())
}

fn lie_ranks<F: Field>(p: &Params) -> Outcome {
    let top = p.max_n.unwrap_or(p.max_arity);
    let mut rows = Vec::new();
    let mut ok = true;
    for n in 1..=top {
        let l = lie::<F>(n);
        l.validate()?;
        let h = l.complex.homology();
        let expect = BTreeMap::from([(n as i32 - 1, factorial(n - 1))]);
        ok &= h == expect;
        rows.push(json!({ "n": n, "cells": l.dim(), "homology": table(&h), "expected_rank": factorial(n - 1) }));
    }
    Ok((ok, json!(rows)))
}

fn circle_product<F: Field>(p: &Params) -> Outcome {
    let max = p.max_n.unwrap_or(3);
    let mut r = rng(p.seed);
    let unit = SymSeq::<F>::unit(max);
    let mut rows = Vec::new();
    let mut ok = true;
    for trial in 0..3 {
        let (a, b, c) = (random_symseq::<F>(max, &mut r), random_symseq::<F>(max, &mut r), random_symseq::<F>(max, &mut r));
        let left_unit = same_levels(&circle(&unit, &a)?, &a);
        let right_unit = same_levels(&circle(&a, &unit)?, &a);
        let lhs = circle(&circle(&a, &b)?, &c)?;
        let rhs = circle(&a, &circle(&b, &c)?)?;
        lhs.validate()?;
        rhs.validate()?;
        // the unbracketed triple product as an independent reference
        let triple: Vec<EqComplex<F>> = (0..=max).map(|n| to_eq_complex(&ChainProduct::new(vec![&a, &b, &c], n, &allow_all))).collect();
        let triple = SymSeq::new(max, true, triple)?;
        let assoc = same_levels(&lhs, &rhs) && same_levels(&lhs, &triple);
        ok &= left_unit && right_unit && assoc;
        rows.push(json!({ "trial": trial, "dims": lhs.dims(), "left_unit": left_unit, "right_unit": right_unit, "associative": assoc }));
    }
    Ok((ok, json!(rows)))
}

fn named_modules<F: Field>(max: usize, seed: u64, random: usize) -> Vec<(String, RightModule<F>)> {
    let mut out = vec![
        ("Com".to_string(), RightModule::com(max)),
        ("S(1)".to_string(), RightModule::unit(max)),
        ("P2".to_string(), RightModule::surjections(2, max)),
        ("P3".to_string(), RightModule::surjections(3, max)),
    ];
    for i in 0..random as u64 {
        out.push((format!("random:{}", seed + i), random_cellular_module(max, seed + i)));
    }
    out
}

fn bar_simplicial<F: Field>(p: &Params) -> Outcome {
    let max = p.max_n.unwrap_or(3);
    let com = Operad::<F>::com(max);
    let right = LeftModule::com(max);
    let mut rows = Vec::new();
    for (name, m) in named_modules::<F>(max, p.seed, 2) {
        let inputs = BarInputs::new(&m, &com, &right);
        let res: Result<()> = (1..=max).try_for_each(|n| check_simplicial_identities(&inputs, n, 3));
        rows.push(json!({ "module": name, "holds": res.is_ok() }));
    }
    let ok = rows.iter().all(|r| r["holds"] == json!(true));
    Ok((ok, json!(rows)))
}

fn bar_resolution<F: Field>(p: &Params) -> Outcome {
    let max = p.max_n.unwrap_or(4);
    let mut rows = Vec::new();
    let mut ok = true;
    for (name, m) in named_modules::<F>(max, p.seed, 20) {
        let holds = resolution_holds(&m)?;
        ok &= holds;
        rows.push(json!({ "module": name, "quasi_iso": holds }));
    }
    Ok((ok, json!(rows)))
}

/// A free module on a contractible complex at one arity.
fn contractible<F: Field>(arity: usize, max: usize) -> Result<RightModule<F>> {
    let d = SparseMatrix::from_columns(2, vec![Vec::new(), vec![(0, F::one())]]);
    let c = ChainComplex::new(vec![0, 1], vec!["a".into(), "b".into()], d)?;
    RightModule::free(&SymSeq::embed(EqComplex::trivial(c, arity), max)?)
}

/// `M ⊕ C` with `C` acyclic and free, and the projection onto `M`.
fn with_acyclic_summand<F: Field>(m: &RightModule<F>, arity: usize) -> Result<(RightModule<F>, ModuleMap<F>)> {
    let c = contractible::<F>(arity, m.max_arity())?;
    let (sum, pos) = m.direct_sum_with_positions(&c)?;
    let levels = pos
        .iter()
        .enumerate()
        .map(|(r, (left, _))| {
            SparseMatrix::from_triplets(m.level(r).dim(), sum.level(r).dim(), left.iter().enumerate().map(|(i, &j)| (i, j, F::one())))
        })
        .collect::<Result<_>>()?;
    let proj = ModuleMap { levels };
    proj.check(&sum, m)?;
    Ok((sum, proj))
}

fn bar_invariance<F: Field>(p: &Params) -> Outcome {
    let w = p.max_n.unwrap_or(3);
    let mut rows = Vec::new();
    let mut ok = true;
    for (name, m) in [("Com", RightModule::<F>::com(w)), ("random", random_cellular_module::<F>(w, p.seed))] {
        let (sum, proj) = with_acyclic_summand(&m, 2)?;
        for spec in ["free:0", "zero:0"] {
            let alg = Algebra::<F>::from_spec(spec, w)?;
            let (a, b) = (AlgebraBar::new(&sum, &alg)?, AlgebraBar::new(&m, &alg)?);
            let q = ChainMap::new(a.induced(&b, &proj)).is_quasi_iso(&a.complex, &b.complex);
            ok &= q;
            rows.push(json!({ "module": name, "algebra": spec, "quasi_iso": q }));
        }
    }
    Ok((ok, json!(rows)))
}

fn tensor_free<F: Field>(p: &Params) -> Outcome {
    let top = p.max_n.unwrap_or(3);
    let x = ChainComplex::<F>::graded(vec![0], vec!["x".into()])?.0;
    let mut rows = Vec::new();
    let mut ok = true;
    for spec in ["set:2", "set:3", "s1"] {
        let k = PointedSSet::from_spec(spec, p.model)?;
        for n in 1..=top {
            let (src, dst, map) = eilenberg_zilber::<F>(&k, n)?;
            let quasi = ChainMap::new(map.clone()).is_quasi_iso(&src.complex, &dst.complex);
            // discrete spaces have no higher cells, so the comparison is exact
            let exact = map.rows() == map.cols() && map.is_signed_permutation();
            let lhs = crate::filtration::over_group(&dst, &x, &[1], n)?.homology();
            let rhs = crate::filtration::over_group(&src, &x, &[1], n)?.homology();
            // strict orbits of a mere quasi-isomorphism only agree rationally
            let orbits_agree = lhs == rhs || (!exact && F::characteristic() != 0);
            let good = quasi && orbits_agree && (exact || !spec.starts_with("set"));
            ok &= good;
            rows.push(json!({ "space": spec, "n": n, "isomorphism": exact, "quasi_iso": quasi, "coinvariants": table(&lhs), "tensor_coinvariants": table(&rhs) }));
        }
    }
    Ok((ok, json!(rows)))
}

fn epi_mono<F: Field>(p: &Params) -> Outcome {
    let max = p.max_n.unwrap_or(4);
    let mut rows = Vec::new();
    let mut ok = true;
    for m in 1..=3 {
        let (_, _, map) = epi_mono_map::<F>(m, max)?;
        let iso = map.levels.iter().all(|l| l.rows() == l.cols() && l.is_signed_permutation());
        ok &= iso;
        rows.push(json!({ "m": m, "dims": map.levels.iter().map(|l| l.cols()).collect::<Vec<_>>(), "isomorphism": iso }));
    }
    Ok((ok, json!(rows)))
}

fn sphere_powers<F: Field>(p: &Params) -> Outcome {
    let top = p.max_n.unwrap_or(3);
    let ks: Vec<usize> = p.k.map_or_else(|| (1..=3).collect(), |k| vec![k]);
    let mut rows = Vec::new();
    let mut ok = true;
    for &k in &ks {
        let m = sphere_module::<F>(k, p.model, top);
        for n in 1..=top {
            let h = m.level(n).complex.homology();
            let good = h == BTreeMap::from([((k * (n - 1)) as i32, 1)]);
            ok &= good;
            rows.push(json!({ "k": k, "n": n, "cells": m.level(n).dim(), "homology": table(&h) }));
        }
    }
    Ok((ok, json!(rows)))
}

fn stable(p: &Params) -> Outcome {
    let bound = p.degree_bound.min(3);
    let max_k = p.k.unwrap_or(3);
    let w = p.max_n.unwrap_or(4);
    let mut rows = Vec::new();
    let mut ok = true;
    for spec in ["free:0", "zero:0"] {
        let alg = Algebra::<Q>::from_spec(spec, w)?;
        let st = stable_tq(&alg, bound, max_k, p.model)?;
        let expect: BTreeMap<i32, usize> = tq(&alg)?.complex.homology().into_iter().filter(|(q, _)| *q <= bound).collect();
        let good = st.homology == expect && st.witness <= max_k;
        ok &= good;
        rows.push(json!({ "algebra": spec, "degree_bound": bound, "witness": st.witness, "stable": table(&st.homology), "tq": table(&expect) }));
    }
    Ok((ok, json!(rows)))
}

fn decreasing_layers<F: Field>(p: &Params) -> Outcome {
    let max = p.max_n.unwrap_or(4);
    let mut rows = Vec::new();
    for (name, m) in [("Com", RightModule::<F>::com(max)), ("B(S(1),Com,Com)", bar_module(&RightModule::<F>::unit(max.min(3))))] {
        for n in 1..=m.max_arity() {
            let res = check_decreasing_layer(&m, n);
            rows.push(json!({ "module": name, "n": n, "holds": res.is_ok() }));
        }
    }
    Ok((rows.iter().all(|r| r["holds"] == json!(true)), json!(rows)))
}

fn decreasing_bar_layers<F: Field>(p: &Params) -> Outcome {
    let w = p.max_n.unwrap_or(3);
    let com = RightModule::<F>::com(w);
    let mut rows = Vec::new();
    let mut ok = true;
    for spec in ["free:0", "free:1", "zero:0"] {
        let alg = Algebra::<F>::from_spec(spec, w)?;
        for n in 1..=w {
            let (lhs, rhs) = filtered_bar_decreasing(&com, &alg, n)?;
            ok &= lhs == rhs;
            rows.push(json!({ "algebra": spec, "n": n, "layer": table(&lhs), "formula": table(&rhs) }));
        }
    }
    Ok((ok, json!(rows)))
}

fn augmentation_tower<F: Field>(p: &Params) -> Outcome {
    let w = p.max_n.unwrap_or(3);
    let mut rows = Vec::new();
    let mut ok = true;
    // layers I^n/I^{n+1} of a free algebra on one degree-0 generator
    let alg = Algebra::<F>::from_spec("free:0", w)?;
    let (stages, maps) = augmentation_ideal_tower(&alg, w)?;
    for n in 1..=w {
        let h = stages[n - 1].complex.quotient(&maps[n - 1])?.complex.homology();
        ok &= h == BTreeMap::from([(0, 1)]);
        rows.push(json!({ "algebra": "free:0", "layer": n, "homology": table(&h) }));
    }
    // square-zero: H(I²) in weights ≥ 2 is H(TQ) shifted down by one
    let sq = Algebra::<F>::from_spec("zero:0", w)?;
    let (stages, _) = augmentation_ideal_tower(&sq, 2)?;
    let t = tq(&sq)?.homology_by_weight();
    let i2 = stages[1].homology_by_weight();
    for wt in 2..=w {
        let shifted: BTreeMap<i32, usize> = t.get(&wt).cloned().unwrap_or_default().into_iter().map(|(q, d)| (q - 1, d)).collect();
        let got = i2.get(&wt).cloned().unwrap_or_default();
        ok &= got == shifted;
        rows.push(json!({ "algebra": "zero:0", "weight": wt, "square": table(&got), "tq_shifted": table(&shifted) }));
    }
    // fiber sequences of the tower quotients
    let com = RightModule::<F>::com(w);
    for n in 2..=w {
        let cur = tower_quotient(&com, &sq, n)?;
        let prev = tower_quotient(&com, &sq, n - 1)?;
        let layer = AlgebraBar::new(&concentrated(com.level(n), w)?, &sq)?;
        let proj = ModuleMap {
            levels: (0..=w).map(|r| if r < n { SparseMatrix::identity(1) } else { SparseMatrix::zeros(usize::from(r < n), 1) }).collect(),
        };
        let incl = ModuleMap {
            levels: (0..=w).map(|r| if r == n { SparseMatrix::identity(1) } else { SparseMatrix::zeros(usize::from(r <= n), 0) }).collect(),
        };
        let exact = les_consistent(&layer.complex, &cur.complex, &prev.complex, &layer.induced(&cur, &incl), &cur.induced(&prev, &proj))?;
        ok &= exact;
        rows.push(json!({ "algebra": "zero:0", "stage": n, "exact": exact }));
    }
    Ok((ok, json!(rows)))
}

fn skeleton_modules<F: Field>(max: usize, p: &Params) -> Result<Vec<(String, RightModule<F>)>> {
    let mut out = named_modules::<F>(max, p.seed, 1);
    out.push(("B(S(1),Com,Com)".into(), bar_module(&RightModule::unit(max))));
    out.push(("2+ ⊗ Com".into(), tensor_module_with_powers(&PointedSSet::discrete(2), max).0));
    Ok(out)
}

fn skeleton_iso<F: Field>(p: &Params) -> Outcome {
    let max = p.max_n.unwrap_or(4);
    let mut rows = Vec::new();
    let mut ok = true;
    for (name, m) in skeleton_modules::<F>(max, p)? {
        let filt = IncreasingFiltration::new(&m, max)?;
        filt.check()?;
        let iso: Vec<bool> = (0..=max).map(|n| filt.g_iso_through(n)).collect();
        ok &= iso.iter().all(|&b| b);
        rows.push(json!({ "module": name, "g_iso_through_n": iso, "colimit": is_levelwise_iso(&filt.g[max]) }));
    }
    Ok((ok, json!(rows)))
}

fn filtration_invariance<F: Field>(p: &Params) -> Outcome {
    let max = p.max_n.unwrap_or(3);
    let mut rows = Vec::new();
    let mut ok = true;
    for (name, m) in [("Com", RightModule::<F>::com(max)), ("random", random_cellular_module::<F>(max, p.seed))] {
        let (sum, proj) = with_acyclic_summand(&m, 2)?;
        let (fs, fm) = (IncreasingFiltration::new(&sum, max)?, IncreasingFiltration::new(&m, max)?);
        ok &= fs.is_cellular() && fm.is_cellular();
        let maps = fs.map(&fm, &proj);
        let quasi: Vec<bool> = (0..=max).map(|n| maps[n].is_quasi_iso(&fs.stages[n], &fm.stages[n])).collect();
        ok &= quasi.iter().all(|&b| b);
        rows.push(json!({ "module": name, "stage_quasi_iso": quasi }));
    }
    Ok((ok, json!(rows)))
}

fn increasing_bar_layers<F: Field>(p: &Params) -> Outcome {
    let w = p.max_n.unwrap_or(3);
    let mut rows = Vec::new();
    let mut ok = true;
    for (name, m) in [("B(S(1),Com,Com)", bar_module(&RightModule::<F>::unit(w))), ("random", random_cellular_module::<F>(w, p.seed))] {
        for spec in ["free:0", "zero:0"] {
            let alg = Algebra::<F>::from_spec(spec, w)?;
            for n in 1..=w {
                let (lhs, rhs) = filtered_bar_increasing(&m, &alg, n)?;
                ok &= lhs == rhs;
                rows.push(json!({ "module": name, "algebra": spec, "n": n, "layer": table(&lhs), "formula": table(&rhs) }));
            }
        }
    }
    Ok((ok, json!(rows)))
}

fn free_skeleton<F: Field>(p: &Params) -> Outcome {
    let max = p.max_n.unwrap_or(4);
    let mut r = rng(p.seed);
    let com = SymSeq::<F>::com(max);
    let mut rows = Vec::new();
    let mut ok = true;
    for trial in 0..3 {
        let m0 = random_symseq::<F>(max, &mut r);
        let m = RightModule::free(&m0)?;
        let filt = IncreasingFiltration::new(&m, max)?;
        let mut good = filt.is_cellular();
        for n in 1..=max {
            for lvl in 0..=max {
                // span of (ψ, x) with ψ: lvl ↠ r, r ≤ n
                let cp = ChainProduct::new(vec![&m0, &com], lvl, &allow_all);
                let pos = sorted_positions(&cp);
                let expect: Vec<usize> = (0..cp.len()).filter(|&i| cp.elems[i].maps[0].target() <= n).map(|i| pos[i]).collect();
                let basis = SparseMatrix::from_columns(cp.len(), expect.iter().map(|&i| vec![(i, F::one())]).collect());
                let g = &filt.g[n].levels[lvl];
                good &= rank(g) == g.cols() && rank(g) == expect.len() && rank(&g.hstack(&basis)) == expect.len();
            }
        }
        ok &= good;
        rows.push(json!({ "trial": trial, "dims": m.seq.dims(), "holds": good }));
    }
    Ok((ok, json!(rows)))
}

fn bar_layers<F: Field>(p: &Params) -> Outcome {
    let max = p.max_n.unwrap_or(4);
    let mut rows = Vec::new();
    let mut ok = true;
    let small = max.min(3);
    let modules = [
        ("S(1)", RightModule::<F>::unit(max)),
        ("Com", RightModule::com(small)),
        ("P2", RightModule::surjections(2, small)),
        ("random", random_cellular_module(small, p.seed)),
    ];
    for (name, m) in modules {
        for n in 1..=m.max_arity() {
            let iso = bar_layer_identification(&m, n)?;
            ok &= iso;
            rows.push(json!({ "module": name, "n": n, "isomorphism": iso }));
        }
    }
    Ok((ok, json!(rows)))
}

fn lie_layers<F: Field>(p: &Params) -> Outcome {
    let w = p.max_n.unwrap_or(3);
    let bar = bar_module(&RightModule::<F>::unit(w));
    let filt = IncreasingFiltration::new(&bar, w)?;
    let mut rows = Vec::new();
    let mut ok = true;
    for n in 1..=w {
        let (mbar, _, _) = filt.mbar(n)?;
        let (hm, hl) = (mbar.complex.homology(), lie::<F>(n).complex.homology());
        ok &= hm == hl && mbar.dim() == lie::<F>(n).dim();
        rows.push(json!({ "n": n, "layer": table(&hm), "lie": table(&hl) }));
    }
    for spec in ["free:0", "free:1"] {
        let alg = Algebra::<F>::from_spec(spec, w)?;
        for n in 1..=w {
            let (lhs, rhs) = filtered_bar_increasing(&bar, &alg, n)?;
            ok &= lhs == rhs;
            rows.push(json!({ "algebra": spec, "n": n, "bar_layer": table(&lhs), "lie_formula": table(&rhs) }));
        }
    }
    Ok((ok, json!(rows)))
}

fn fat_diagonal<F: Field>(p: &Params) -> Outcome {
    let max = p.max_n.unwrap_or(3);
    let mut rows = Vec::new();
    let mut ok = true;
    for spec in ["set:2", "set:3", "s1"] {
        let k = PointedSSet::from_spec(spec, p.model)?;
        let (m, powers) = tensor_module_with_powers::<F>(&k, max);
        let filt = IncreasingFiltration::new(&m, max)?;
        for n in 1..=max {
            for r in 0..n {
                let g = &filt.g[r].levels[n];
                let fat = powers[n].distinctness(r);
                let basis = SparseMatrix::from_columns(powers[n].len(), fat.iter().map(|&i| vec![(i, F::one())]).collect());
                let good = rank(g) == fat.len() && rank(&g.hstack(&basis)) == fat.len();
                ok &= good;
                rows.push(json!({ "space": spec, "n": n, "r": r, "cells": fat.len(), "holds": good }));
            }
        }
    }
    Ok((ok, json!(rows)))
}

/// `C̃(K^{∧n}/Δ_n)` from the fat diagonal of the smash power.
fn fat_quotient<F: Field>(power: &Smash, n: usize) -> Result<ChainComplex<F>> {
    let chains = power.power_chains::<F>().complex;
    let fat = power.distinctness(n - 1);
    let basis = SparseMatrix::from_columns(power.len(), fat.iter().map(|&i| vec![(i, F::one())]).collect());
    Ok(chains.quotient(&basis)?.complex)
}

fn tensor_layers<F: Field>(p: &Params) -> Outcome {
    let max = p.max_n.unwrap_or(3);
    let mut rows = Vec::new();
    let mut ok = true;
    for spec in ["set:2", "set:3", "s1"] {
        let k = PointedSSet::from_spec(spec, p.model)?;
        let (m, powers) = tensor_module_with_powers::<F>(&k, max);
        let filt = IncreasingFiltration::new(&m, max)?;
        for n in 1..=max {
            let (mbar, _, _) = filt.mbar(n)?;
            let direct = fat_quotient::<F>(&powers[n], n)?;
            let good = mbar.dim() == direct.dim() && mbar.complex.homology() == direct.homology();
            ok &= good;
            rows.push(json!({ "space": spec, "n": n, "layer_dim": mbar.dim(), "layer": table(&mbar.complex.homology()), "quotient": table(&direct.homology()) }));
        }
    }
    // two points in arity 2: the two off-diagonal pairs
    let (m, _) = tensor_module_with_powers::<F>(&PointedSSet::discrete(2), 2);
    let two = IncreasingFiltration::new(&m, 2)?.mbar(2)?.0.dim();
    ok &= two == 2;
    rows.push(json!({ "space": "set:2", "n": 2, "layer_dim_check": two }));
    Ok((ok, json!(rows)))
}

fn sphere_layers<F: Field>(p: &Params) -> Outcome {
    let ns: Vec<usize> = p.n.map_or_else(|| (2..=p.max_n.unwrap_or(3)).collect(), |n| vec![n]);
    let ks: Vec<usize> = p.k.map_or_else(|| vec![2, 3], |k| vec![k]);
    let mut rows = Vec::new();
    let mut ok = true;
    for &k in &ks {
        let sphere = PointedSSet::sphere(k, p.model);
        for &n in &ns {
            let power = Smash::power(&sphere, n);
            let h: BTreeMap<i32, usize> = fat_quotient::<F>(&power, n)?.homology().into_iter().map(|(q, d)| (q - k as i32, d)).collect();
            // stable range of layer n for a degree-0 input
            let bound = (n + k) as i32 - 3;
            let stable: BTreeMap<i32, usize> = h.iter().filter(|(q, _)| **q <= bound).map(|(q, d)| (*q, *d)).collect();
            let lie_h: BTreeMap<i32, usize> = lie::<F>(n).complex.homology().into_iter().filter(|(q, _)| *q <= bound).collect();
            let mut good = stable == lie_h;
            if n == 2 {
                good &= h.get(&1) == Some(&1);
            }
            ok &= good;
            rows.push(json!({ "k": k, "n": n, "stable_bound": bound, "homology": table(&h), "stable": table(&stable), "lie": table(&lie_h) }));
        }
    }
    Ok((ok, json!(rows)))
}

fn comparison(p: &Params) -> Outcome {
    let n_max = p.max_n.unwrap_or(3);
    let k = p.k.unwrap_or(2);
    let mut rows = Vec::new();
    let mut ok = true;
    for spec in ["free:0", "free:1", "zero:0"] {
        let alg = Algebra::<Q>::from_spec(spec, n_max)?;
        let c = compare_filtrations(&alg, n_max, k, p.model, p.degree_bound)?;
        ok &= c.holds();
        rows.push(serde_json::to_value(&c)?);
    }
    Ok((ok, json!(rows)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_and_aliases_are_unique() {
        let mut names: Vec<&str> = CHECKS.iter().flat_map(|c| std::iter::once(c.id).chain(c.alias)).collect();
        let total = names.len();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), total);
        for c in CHECKS {
            assert_eq!(lookup(c.id).unwrap().id, c.id);
        }
    }

    #[test]
    fn unknown_id_is_a_usage_error() {
        assert!(matches!(run::<Q>("no-such-check", &Params::default()), Err(Error::Usage(_))));
    }
}
