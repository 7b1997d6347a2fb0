//! Random instances for tests, benchmarks and the acceptance suite.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::mdp::{BlindController, Mdp};
use crate::optimize::sample_simplex;
use crate::reductions::SqrtSumInstance;

/// Dense random MDP: `gamma` in `[0.5, 0.95)`, full-support `mu`, costs in
/// `[-1, 1)`, and each transition column drawn uniformly from the simplex.
pub fn random_mdp<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Mdp {
    let gamma = rng.random_range(0.5..0.95);
    let mu = DVector::from_vec(sample_simplex(n, rng));
    let cost = DMatrix::from_fn(n, k, |_, _| rng.random_range(-1.0..1.0));
    let trans = (0..k)
        .map(|_| {
            let mut p = DMatrix::zeros(n, n);
            for s in 0..n {
                p.set_column(s, &DVector::from_vec(sample_simplex(n, rng)));
            }
            p
        })
        .collect();
    Mdp::new(gamma, mu, cost, trans).expect("generated MDP is valid")
}

fn permutation_matrix(perm: &[usize]) -> DMatrix<f64> {
    let n = perm.len();
    DMatrix::from_fn(n, n, |i, j| if perm[j] == i { 1.0 } else { 0.0 })
}

/// Random instance of the symmetric class: every `P_a` is a convex
/// combination of symmetrized permutation matrices `(Q + Q^T) / 2`, and the
/// cost is `-kappa * mu` in every action with `kappa` in `[0.5, 2)`.
pub fn random_symmetric_mdp<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Mdp {
    let gamma = rng.random_range(0.5..0.95);
    let mu = DVector::from_vec(sample_simplex(n, rng));
    let kappa = rng.random_range(0.5..2.0);
    let column = &mu * -kappa;
    let cost = DMatrix::from_fn(n, k, |i, _| column[i]);
    let trans = (0..k)
        .map(|_| {
            let terms = rng.random_range(1..=3);
            let weights = sample_simplex(terms, rng);
            let mut p = DMatrix::zeros(n, n);
            for w in weights {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(rng);
                let q = permutation_matrix(&perm);
                p += (&q + q.transpose()) * (0.5 * w);
            }
            // Exact symmetry despite rounding in the weighted sum.
            (&p + p.transpose()) * 0.5
        })
        .collect();
    Mdp::new(gamma, mu, cost, trans).expect("generated MDP is valid")
}

/// Random sqrt-sum question with `c_i` in `1..=c_max` and `d` within one of
/// `sum_i sqrt(c_i)`, so both answers occur.
pub fn random_sqrtsum<R: Rng + ?Sized>(n: usize, c_max: u64, rng: &mut R) -> SqrtSumInstance {
    let c: Vec<u64> = (0..n).map(|_| rng.random_range(1..=c_max)).collect();
    let s: f64 = c.iter().map(|&v| (v as f64).sqrt()).sum();
    let d = (s.floor() as u64).saturating_add(rng.random_range(0..=1));
    SqrtSumInstance::new(c, d).expect("nonempty")
}

/// Uniform random controller on `k` actions.
pub fn random_controller<R: Rng + ?Sized>(k: usize, rng: &mut R) -> BlindController {
    BlindController::from_rounded(sample_simplex(k, rng))
}

/// Random controller with every coordinate at least `floor`, for finite
/// differences that must stay inside the simplex.
pub fn interior_controller<R: Rng + ?Sized>(k: usize, floor: f64, rng: &mut R) -> BlindController {
    let scale = 1.0 - floor * k as f64;
    let pi = sample_simplex(k, rng).into_iter().map(|v| floor + scale * v).collect();
    BlindController::from_rounded(pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::is_tractable_case;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_respect_their_classes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.random_range(1..=6);
            let k = rng.random_range(1..=4);
            let m = random_mdp(n, k, &mut rng);
            assert_eq!((m.n(), m.k()), (n, k));
            let t = random_symmetric_mdp(n, k, &mut rng);
            assert!(is_tractable_case(&t).is_tractable);
            let q = random_sqrtsum(n, 50, &mut rng);
            assert!(q.c.iter().all(|&c| (1..=50).contains(&c)));
            let p = interior_controller(k, 1e-3, &mut rng);
            assert!(p.as_slice().iter().all(|&v| v >= 1e-3 - 1e-15));
        }
    }
}
