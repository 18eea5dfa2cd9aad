//! Surjections, injections and permutations of finite sets `{1..n}`.
//!
//! Internally every map is 0-indexed; serialization is 1-indexed. An orbit
//! representative of `Epi(n, r)` under post-composition by `Σ_r` is a
//! *first-occurrence ordered* surjection: `min φ⁻¹(1) < min φ⁻¹(2) < …`,
//! i.e. a restricted growth string.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A permutation in one-line notation: `i ↦ self.0[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(pub Vec<usize>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n).collect())
    }

    /// The adjacent transposition swapping `i` and `i + 1`.
    pub fn transposition(n: usize, i: usize) -> Self {
        let mut p = Self::identity(n);
        p.0.swap(i, i + 1);
        p
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, v)| i == *v)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v] = i;
        }
        Perm(inv)
    }

    pub fn is_valid(&self) -> bool {
        let mut seen = vec![false; self.0.len()];
        self.0.iter().all(|&v| v < seen.len() && !std::mem::replace(&mut seen[v], true))
    }

    pub fn inversions(&self) -> usize {
        let p = &self.0;
        (0..p.len()).map(|i| (i + 1..p.len()).filter(|&j| p[i] > p[j]).count()).sum()
    }

    pub fn is_even(&self) -> bool {
        self.inversions().is_multiple_of(2)
    }

    /// A reduced word `[i₁, …, i_k]` with `self = s_{i₁} ∘ ⋯ ∘ s_{i_k}`.
    pub fn reduced_word(&self) -> Vec<usize> {
        let n = self.0.len();
        let mut word = Vec::new();
        let mut cur = self.0.clone();
        loop {
            let pos: Vec<usize> = {
                let mut p = vec![0; n];
                for (i, &v) in cur.iter().enumerate() {
                    p[v] = i;
                }
                p
            };
            // a left descent: value v+1 appears before value v
            match (0..n.saturating_sub(1)).find(|&v| pos[v + 1] < pos[v]) {
                None => break,
                Some(v) => {
                    word.push(v);
                    // cur ← s_v ∘ cur
                    for x in cur.iter_mut() {
                        if *x == v {
                            *x = v + 1;
                        } else if *x == v + 1 {
                            *x = v;
                        }
                    }
                }
            }
        }
        word
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one: Vec<String> = self.0.iter().map(|v| (v + 1).to_string()).collect();
        write!(f, "[{}]", one.join(","))
    }
}

/// Koszul sign (`true` = `+1`) of moving the factor in position `i` to
/// position `perm(i)` for homogeneous factors of the given degrees.
pub fn koszul_sign(perm: &Perm, degrees: &[i32]) -> bool {
    assert_eq!(perm.len(), degrees.len(), "koszul_sign: degree list length");
    let p = &perm.0;
    let mut odd_swaps = 0usize;
    for i in 0..p.len() {
        if degrees[i] % 2 == 0 {
            continue;
        }
        for j in i + 1..p.len() {
            if degrees[j] % 2 != 0 && p[i] > p[j] {
                odd_swaps += 1;
            }
        }
    }
    odd_swaps.is_multiple_of(2)
}

/// A surjection `{0..n-1} ↠ {0..r-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Surjection {
    target: usize,
    values: Vec<usize>,
}

impl Surjection {
    pub fn new(values: Vec<usize>, target: usize) -> Result<Self> {
        let mut hit = vec![false; target];
        for &v in &values {
            if v >= target {
                return Err(Error::Invalid(format!("surjection value {} exceeds target {target}", v + 1)));
            }
            hit[v] = true;
        }
        if hit.iter().any(|h| !h) {
            return Err(Error::Invalid(format!("map {values:?} does not hit every element of {target}")));
        }
        Ok(Surjection { target, values })
    }

    pub(crate) fn new_unchecked(values: Vec<usize>, target: usize) -> Self {
        Surjection { target, values }
    }

    pub fn identity(n: usize) -> Self {
        Surjection { target: n, values: (0..n).collect() }
    }

    pub fn constant(n: usize) -> Self {
        Surjection { target: 1, values: vec![0; n] }
    }

    pub fn domain(&self) -> usize {
        self.values.len()
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn apply(&self, i: usize) -> usize {
        self.values[i]
    }

    pub fn is_bijection(&self) -> bool {
        self.target == self.values.len()
    }

    pub fn is_identity(&self) -> bool {
        self.values.iter().enumerate().all(|(i, v)| i == *v)
    }

    /// First-occurrence ordered.
    pub fn is_canonical(&self) -> bool {
        let mut next = 0;
        for &v in &self.values {
            if v == next {
                next += 1;
            } else if v > next {
                return false;
            }
        }
        true
    }

    pub fn fiber_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.target];
        for &v in &self.values {
            sizes[v] += 1;
        }
        sizes
    }

    /// Elements of `φ⁻¹(k)` in increasing order.
    pub fn fiber(&self, k: usize) -> Vec<usize> {
        self.values.iter().enumerate().filter(|(_, v)| **v == k).map(|(i, _)| i).collect()
    }

    pub fn fibers(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.target];
        for (i, &v) in self.values.iter().enumerate() {
            out[v].push(i);
        }
        out
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Surjection) -> Surjection {
        assert_eq!(other.target, self.domain(), "surjection composition mismatch");
        Surjection { target: self.target, values: other.values.iter().map(|&i| self.values[i]).collect() }
    }

    /// `σ ∘ self` for a permutation of the target.
    pub fn post_compose(&self, sigma: &Perm) -> Surjection {
        Surjection { target: self.target, values: self.values.iter().map(|&v| sigma.apply(v)).collect() }
    }

    /// `self ∘ τ` for a permutation of the domain.
    pub fn pre_compose(&self, tau: &Perm) -> Surjection {
        Surjection { target: self.target, values: tau.0.iter().map(|&i| self.values[i]).collect() }
    }

    /// Decompose `self = σ ∘ rep` with `rep` first-occurrence ordered.
    pub fn canonicalize(&self) -> (Surjection, Perm) {
        let mut relabel = vec![usize::MAX; self.target];
        let mut sigma = Vec::with_capacity(self.target);
        let mut rep = Vec::with_capacity(self.values.len());
        for &v in &self.values {
            if relabel[v] == usize::MAX {
                relabel[v] = sigma.len();
                sigma.push(v);
            }
            rep.push(relabel[v]);
        }
        (Surjection { target: self.target, values: rep }, Perm(sigma))
    }

    /// For `χ = φ ∘ ψ` with `self = ψ`, the restriction of `ψ` over block `k`
    /// of `χ`, reindexed order-preservingly into `φ⁻¹(k)`.
    pub fn restrict_over(&self, phi: &Surjection, k: usize) -> Surjection {
        let inner_fiber = phi.fiber(k);
        let mut pos = vec![usize::MAX; phi.domain()];
        for (a, b) in inner_fiber.iter().enumerate() {
            pos[*b] = a;
        }
        let values = self
            .values
            .iter()
            .filter(|v| phi.apply(**v) == k)
            .map(|v| pos[*v])
            .collect();
        Surjection { target: inner_fiber.len(), values }
    }

    pub fn to_one_indexed(&self) -> Vec<usize> {
        self.values.iter().map(|v| v + 1).collect()
    }

    pub fn from_one_indexed(values: &[usize]) -> Result<Self> {
        if values.contains(&0) {
            return Err(Error::Parse("surjections are 1-indexed".into()));
        }
        let vals: Vec<usize> = values.iter().map(|v| v - 1).collect();
        let target = vals.iter().copied().max().map_or(0, |m| m + 1);
        Surjection::new(vals, target)
    }
}

impl fmt::Display for Surjection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one: Vec<String> = self.values.iter().map(|v| (v + 1).to_string()).collect();
        write!(f, "({})", one.join(","))
    }
}

impl Serialize for Surjection {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_indexed().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Surjection {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        Surjection::from_one_indexed(&v).map_err(serde::de::Error::custom)
    }
}

/// An injection `{0..r-1} ↪ {0..m-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Injection {
    target: usize,
    values: Vec<usize>,
}

impl Injection {
    pub fn new(values: Vec<usize>, target: usize) -> Result<Self> {
        let mut seen = vec![false; target];
        for &v in &values {
            if v >= target || std::mem::replace(&mut seen[v], true) {
                return Err(Error::Invalid(format!("{values:?} is not an injection into {target}")));
            }
        }
        Ok(Injection { target, values })
    }

    pub fn domain(&self) -> usize {
        self.values.len()
    }
    pub fn target(&self) -> usize {
        self.target
    }
    pub fn values(&self) -> &[usize] {
        &self.values
    }
    pub fn apply(&self, i: usize) -> usize {
        self.values[i]
    }
    /// `self ∘ σ`.
    pub fn pre_compose(&self, sigma: &Perm) -> Injection {
        Injection { target: self.target, values: sigma.0.iter().map(|&i| self.values[i]).collect() }
    }
}

/// All maps `{0..n-1} → {0..m-1}` in lexicographic order.
pub fn all_functions(n: usize, m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return if n == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    let mut cur = vec![0; n];
    loop {
        out.push(cur.clone());
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < m {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// `Epi(n, r)` in lexicographic order.
pub fn epi_set(n: usize, r: usize) -> Vec<Surjection> {
    if r > n || (r == 0 && n > 0) {
        return Vec::new();
    }
    all_functions(n, r)
        .into_iter()
        .filter_map(|v| Surjection::new(v, r).ok())
        .collect()
}

fn reps_uncached(n: usize, r: usize) -> Vec<Surjection> {
    // restricted growth strings, generated in lexicographic order
    fn go(n: usize, r: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Surjection>) {
        let i = cur.len();
        if i == n {
            if max == r {
                out.push(Surjection::new_unchecked(cur.clone(), r));
            }
            return;
        }
        // not enough room left to reach r blocks
        if r - max.min(r) > n - i {
            return;
        }
        for v in 0..=max.min(r - 1) {
            cur.push(v);
            go(n, r, cur, if v == max { max + 1 } else { max }, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if r == 0 {
        if n == 0 {
            out.push(Surjection::new_unchecked(Vec::new(), 0));
        }
        return out;
    }
    if r > n {
        return out;
    }
    go(n, r, &mut Vec::with_capacity(n), 0, &mut out);
    out
}

/// One first-occurrence ordered representative per `Σ_r`-orbit of `Epi(n, r)`,
/// lexicographically ordered. Results are cached per `(n, r)`.
pub fn orbit_reps(n: usize, r: usize) -> Arc<Vec<Surjection>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Vec<Surjection>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("cache lock").get(&(n, r)) {
        return v.clone();
    }
    let v = Arc::new(reps_uncached(n, r));
    cache.lock().expect("cache lock").insert((n, r), v.clone());
    v
}

/// The representative of `φ`'s orbit and the permutation carrying it to `φ`.
pub fn orbit_rep_of(phi: &Surjection) -> (Surjection, Perm) {
    phi.canonicalize()
}

/// All injections `r ↪ m`, lexicographically.
pub fn mono_set(r: usize, m: usize) -> Vec<Injection> {
    all_functions(r, m).into_iter().filter_map(|v| Injection::new(v, m).ok()).collect()
}

/// All permutations of `n` letters, lexicographically.
pub fn permutations(n: usize) -> Vec<Perm> {
    epi_set(n, n).into_iter().map(|s| Perm(s.values)).collect()
}

/// Factor `f = ι ∘ φ` with `φ` first-occurrence ordered.
pub fn epi_mono_factorize(f: &[usize], m: usize) -> Result<(Injection, Surjection)> {
    if f.iter().any(|v| *v >= m) {
        return Err(Error::Invalid(format!("{f:?} is not a map into {m}")));
    }
    let mut iota = Vec::new();
    let mut relabel = vec![usize::MAX; m];
    let mut phi = Vec::with_capacity(f.len());
    for &v in f {
        if relabel[v] == usize::MAX {
            relabel[v] = iota.len();
            iota.push(v);
        }
        phi.push(relabel[v]);
    }
    let r = iota.len();
    Ok((Injection { target: m, values: iota }, Surjection { target: r, values: phi }))
}

/// Stirling numbers of the second kind, used in tests and size estimates.
pub fn stirling2(n: usize, r: usize) -> u64 {
    let mut t = vec![vec![0u64; r + 1]; n + 1];
    t[0][0] = 1;
    for i in 1..=n {
        for k in 1..=r.min(i) {
            t[i][k] = k as u64 * t[i - 1][k] + t[i - 1][k - 1];
        }
    }
    t[n][r]
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn epi_examples() {
        assert_eq!(epi_set(3, 2).len(), 6);
        assert!(epi_set(2, 3).is_empty());
        assert_eq!(epi_set(4, 4).len(), 24);
        let brute = all_functions(3, 2).into_iter().filter(|f| f.contains(&0) && f.contains(&1)).count();
        assert_eq!(brute, 6);
    }

    #[test]
    fn orbit_examples() {
        assert_eq!(orbit_reps(3, 2).len(), 3);
        assert_eq!(*orbit_reps(4, 1), vec![Surjection::constant(4)]);
        assert_eq!(*orbit_reps(4, 4), vec![Surjection::identity(4)]);
        for n in 1..=7 {
            for r in 1..=n {
                assert_eq!(
                    epi_set(n, r).len() as u64,
                    factorial(r) * orbit_reps(n, r).len() as u64,
                    "free action n={n} r={r}"
                );
                assert_eq!(orbit_reps(n, r).len() as u64, stirling2(n, r));
            }
        }
    }

    #[test]
    fn canonicalize_witness() {
        for phi in epi_set(4, 3) {
            let (rep, sigma) = phi.canonicalize();
            assert!(rep.is_canonical());
            assert_eq!(rep.post_compose(&sigma), phi);
        }
    }

    #[test]
    fn fiber_examples() {
        let phi = Surjection::from_one_indexed(&[1, 2, 1]).unwrap();
        assert_eq!(phi.fiber_sizes(), vec![2, 1]);
        assert_eq!(Surjection::identity(4).fiber_sizes(), vec![1; 4]);
        assert_eq!(Surjection::constant(5).fiber_sizes(), vec![5]);
    }

    #[test]
    fn epi_mono_examples() {
        let total: usize = (1..=2).map(|r| mono_set(r, 2).len() * orbit_reps(2, r).len()).sum();
        assert_eq!(total, 4);
        let (iota, phi) = epi_mono_factorize(&[2, 0], 3).unwrap();
        assert_eq!(iota.values(), &[2, 0]);
        assert!(phi.is_identity());
        let (iota, phi) = epi_mono_factorize(&[1, 1, 1], 3).unwrap();
        assert_eq!(iota.values(), &[1]);
        assert_eq!(phi, Surjection::constant(3));
    }

    #[test]
    fn epi_mono_is_bijection() {
        for n in 1..=5 {
            for m in 1..=5 {
                let mut rebuilt = Vec::new();
                for r in 1..=n.min(m) {
                    for iota in mono_set(r, m) {
                        for phi in orbit_reps(n, r).iter() {
                            rebuilt.push(phi.values().iter().map(|&v| iota.apply(v)).collect::<Vec<_>>());
                        }
                    }
                }
                rebuilt.sort();
                assert_eq!(rebuilt, all_functions(n, m), "n={n} m={m}");
                for f in all_functions(n, m) {
                    let (iota, phi) = epi_mono_factorize(&f, m).unwrap();
                    assert!(phi.is_canonical());
                    let back: Vec<usize> = phi.values().iter().map(|&v| iota.apply(v)).collect();
                    assert_eq!(back, f);
                }
            }
        }
    }

    #[test]
    fn koszul_examples() {
        assert!(!koszul_sign(&Perm(vec![1, 0]), &[1, 1]));
        for p in permutations(4) {
            assert!(koszul_sign(&p, &[0, 2, -4, 6]));
        }
        // 3-cycle = product of two transpositions of odd factors
        assert!(koszul_sign(&Perm(vec![1, 2, 0]), &[1, 1, 1]));
    }

    #[test]
    fn koszul_homomorphism_equal_degrees() {
        for d in [0, 1] {
            for s in permutations(4) {
                for t in permutations(4) {
                    let deg = [d; 4];
                    assert_eq!(koszul_sign(&s.compose(&t), &deg), koszul_sign(&s, &deg) == koszul_sign(&t, &deg));
                }
            }
        }
    }

    #[test]
    fn right_action_composition() {
        for r in 1..=3 {
            for n in r..=4 {
                for m in n..=5 {
                    for phi in epi_set(n, r) {
                        for psi in orbit_reps(m, n).iter() {
                            let c = phi.compose(psi);
                            assert!(Surjection::new(c.values().to_vec(), r).is_ok());
                            let sizes = c.fiber_sizes();
                            let psi_sizes = psi.fiber_sizes();
                            for k in 0..r {
                                let s: usize = phi.fiber(k).iter().map(|j| psi_sizes[*j]).sum();
                                assert_eq!(sizes[k], s);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn canonical_composites_stay_canonical() {
        for psi in orbit_reps(5, 3).iter() {
            for phi in orbit_reps(3, 2).iter() {
                let chi = phi.compose(psi);
                assert!(chi.is_canonical());
                for k in 0..2 {
                    assert!(psi.restrict_over(phi, k).is_canonical());
                }
            }
        }
    }

    proptest! {
        #[test]
        fn reduced_word_reconstructs(v in Just((0..6usize).collect::<Vec<_>>()).prop_shuffle()) {
            let p = Perm(v);
            let w = p.reduced_word();
            prop_assert_eq!(w.len(), p.inversions());
            let mut acc = Perm::identity(p.len());
            for i in &w {
                acc = acc.compose(&Perm::transposition(p.len(), *i));
            }
            prop_assert_eq!(acc, p);
        }
    }
}
