//! Seeded random inputs for property tests: small equivariant complexes and
//! cellular (free) right modules.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{ChainComplex, EqComplex};
use crate::combinatorics::{permutations, Perm};
use crate::field::Field;
use crate::linalg::{SparseMatrix, SparseVec};
use crate::operad::RightModule;
use crate::symseq::{direct_sum_eq, permutation_module, SymSeq};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A permutation representation of `Σ_n` in one degree: trivial, sign or regular.
fn random_rep<F: Field>(n: usize, degree: i32, rng: &mut ChaCha8Rng) -> EqComplex<F> {
    let kind = if n <= 3 { rng.gen_range(0..3) } else { rng.gen_range(0..2) };
    match kind {
        0 => permutation_module(n, vec!["t".into()], degree, |_, x| (x, true)),
        1 => permutation_module(n, vec!["s".into()], degree, |_, x| (x, false)),
        _ => {
            let perms = permutations(n);
            let labels = perms.iter().map(|p| p.to_string()).collect();
            permutation_module(n, labels, degree, |i, x| {
                let q = Perm::transposition(n, i).compose(&perms[x]);
                (perms.iter().position(|p| *p == q).expect("perm"), true)
            })
        }
    }
}

/// A disk `V --c--> V` on a representation.
fn disk<F: Field>(v: &EqComplex<F>, c: i64) -> EqComplex<F> {
    let upper = EqComplex::new(v.complex.shift(1), v.arity(), v.generators().to_vec()).expect("shift");
    let (sum, left, right) = direct_sum_eq(v, &upper);
    let dim = sum.dim();
    let mut cols: Vec<SparseVec<F>> = vec![Vec::new(); dim];
    for x in 0..v.dim() {
        cols[right[x]] = vec![(left[x], F::from_i64(c))];
    }
    let d = SparseMatrix::from_columns(dim, cols);
    let c = ChainComplex::new(sum.complex.degrees().to_vec(), sum.complex.labels().to_vec(), d).expect("disk");
    EqComplex::new(c, v.arity(), sum.generators().to_vec()).expect("disk action")
}

/// Random small equivariant complex with a nontrivial differential, conjugated
/// by a random degree-preserving unipotent change of basis.
pub fn random_eq_complex<F: Field>(n: usize, rng: &mut ChaCha8Rng) -> EqComplex<F> {
    let blocks = rng.gen_range(1..=3);
    let mut acc = EqComplex::zero(n);
    for _ in 0..blocks {
        let deg = rng.gen_range(-1..=2);
        let v = random_rep::<F>(n, deg, rng);
        let piece = if rng.gen_bool(0.5) { disk(&v, if rng.gen_bool(0.5) { 1 } else { -1 }) } else { v };
        acc = direct_sum_eq(&acc, &piece).0;
    }
    conjugate(&acc, rng)
}

fn conjugate<F: Field>(x: &EqComplex<F>, rng: &mut ChaCha8Rng) -> EqComplex<F> {
    let dim = x.dim();
    let degs = x.complex.degrees().to_vec();
    let mut a = SparseMatrix::<F>::identity(dim);
    let mut ainv = SparseMatrix::<F>::identity(dim);
    for _ in 0..dim {
        let i = rng.gen_range(0..dim.max(1));
        let j = rng.gen_range(0..dim.max(1));
        if dim == 0 || i == j || degs[i] != degs[j] {
            continue;
        }
        let c = F::from_i64(if rng.gen_bool(0.5) { 1 } else { -1 });
        let e = SparseMatrix::from_triplets(dim, dim, vec![(i, j, c.clone())]).expect("elementary");
        let id = SparseMatrix::identity(dim);
        a = id.add(&e).mul(&a);
        ainv = ainv.mul(&id.sub(&e));
    }
    let d = a.mul(x.complex.differential()).mul(&ainv);
    let c = ChainComplex::new(degs, x.complex.labels().to_vec(), d).expect("conjugate");
    let gens = x.generators().iter().map(|g| a.mul(g).mul(&ainv)).collect();
    EqComplex::new(c, x.arity(), gens).expect("conjugate action")
}

/// Random reduced sequence; some levels may be zero.
pub fn random_symseq<F: Field>(max_arity: usize, rng: &mut ChaCha8Rng) -> SymSeq<F> {
    let mut levels = vec![EqComplex::zero(0)];
    for n in 1..=max_arity {
        if n > 1 && rng.gen_bool(0.35) {
            levels.push(EqComplex::zero(n));
        } else {
            levels.push(random_eq_complex(n, rng));
        }
    }
    SymSeq::new(max_arity, true, levels).expect("random sequence")
}

/// A random cellular right module: free on a random sequence.
pub fn random_cellular_module<F: Field>(max_arity: usize, seed: u64) -> RightModule<F> {
    let mut r = rng(seed);
    let m0 = random_symseq::<F>(max_arity, &mut r);
    RightModule::free(&m0).expect("free module")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{F3, Q};
    use crate::operad::validate_right_action;
    use crate::tree::circle;

    #[test]
    fn random_complexes_are_valid() {
        let mut r = rng(7);
        for n in 1..=4 {
            for _ in 0..4 {
                random_eq_complex::<Q>(n, &mut r).validate().unwrap();
            }
        }
    }

    #[test]
    fn random_free_modules_validate() {
        for seed in 0..4 {
            let m = random_cellular_module::<Q>(4, seed);
            m.validate().unwrap();
            validate_right_action(&m).unwrap();
        }
        random_cellular_module::<F3>(3, 99).validate().unwrap();
    }

    #[test]
    fn random_circle_products_are_equivariant() {
        let mut r = rng(11);
        for _ in 0..3 {
            let a = random_symseq::<Q>(4, &mut r);
            let b = random_symseq::<Q>(4, &mut r);
            circle(&a, &b).unwrap().validate().unwrap();
        }
    }
}
