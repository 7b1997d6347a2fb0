//! Generators for the two hardness reductions into blind-controller
//! optimization: maximum independent set on cubic graphs, and the
//! sum-of-square-roots comparison.
//!
//! Both constructors keep the discount factor and the target cost as exact
//! rationals so that YES/NO questions about `J(pi) <= r` can be posed without
//! rounding.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::mdp::{BlindController, Mdp};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionKind {
    StableSet,
    SqrtSum,
}

impl ReductionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ReductionKind::StableSet => "stable_set",
            ReductionKind::SqrtSum => "sqrt_sum",
        }
    }
}

/// Parameters the instance was generated from.
#[derive(Debug, Clone, PartialEq)]
pub enum ReductionMeta {
    StableSet {
        j: usize,
        gamma: Rational,
    },
    SqrtSum {
        c: Vec<u64>,
        d: u64,
        epsilon: Rational,
        gamma: Rational,
    },
}

/// A generated MDP together with its exact target cost `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionInstance {
    pub mdp: Mdp,
    pub target: Rational,
    pub meta: ReductionMeta,
}

impl ReductionInstance {
    pub fn kind(&self) -> ReductionKind {
        match self.meta {
            ReductionMeta::StableSet { .. } => ReductionKind::StableSet,
            ReductionMeta::SqrtSum { .. } => ReductionKind::SqrtSum,
        }
    }
}

/// Integers `c_1..c_n` and `d` of a sum-of-square-roots question
/// `sqrt(c_1) + ... + sqrt(c_n) <= d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SqrtSumInstance {
    pub c: Vec<u64>,
    pub d: u64,
}

impl SqrtSumInstance {
    pub fn new(c: Vec<u64>, d: u64) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::InvalidInstance(
                "sqrt-sum instance needs at least one integer".into(),
            ));
        }
        Ok(SqrtSumInstance { c, d })
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn c_sum(&self) -> BigInt {
        self.c.iter().map(|&v| BigInt::from(v)).sum()
    }

    /// `epsilon = n * sum(c) - n`, chosen so that `n + epsilon = n * sum(c)`.
    /// Fails unless `sum(c) > 1`, the exact condition for `epsilon > 0`.
    pub fn epsilon(&self) -> Result<Rational> {
        let sum = self.c_sum();
        if sum <= BigInt::one() {
            return Err(Error::TrivialSqrtSum {
                sum: sum.to_string(),
            });
        }
        let n = BigInt::from(self.n());
        Ok(Rational::from_integer(&n * sum - n))
    }

    /// `gamma = epsilon / (1 + epsilon)`.
    pub fn gamma(&self) -> Result<Rational> {
        let eps = self.epsilon()?;
        Ok(&eps / (Rational::one() + &eps))
    }

    /// `r = d^2 / (n (n + epsilon))`.
    pub fn target(&self) -> Result<Rational> {
        let eps = self.epsilon()?;
        let n = rational::from_integer(self.n() as u64);
        let d = rational::from_integer(self.d);
        Ok(&d * &d / (&n * (&n + eps)))
    }
}

fn check_cubic(g: &Graph) -> Result<()> {
    match g.non_cubic_vertex() {
        Some((vertex, degree)) => Err(Error::NotCubic { vertex, degree }),
        None => Ok(()),
    }
}

fn check_gamma(gamma: &Rational) -> Result<()> {
    if rational::is_open_unit(gamma) {
        Ok(())
    } else {
        Err(Error::Discount(rational::format_rational(gamma)))
    }
}

/// `4 (1 - gamma) / (n gamma)`, the controller-independent part of the
/// stable-set cost.
pub fn stableset_offset(n: usize, gamma: &Rational) -> Rational {
    let four = rational::from_integer(4u32);
    four * (Rational::one() - gamma) / (rational::from_integer(n as u64) * gamma)
}

/// MDP with one state and one action per vertex: action `a` jumps to state
/// `a` from anywhere, the start distribution is uniform, and the costs are
/// `(G + I) / gamma`. Target `r = 1/j + 4 (1 - gamma) / (n gamma)`.
pub fn stableset_to_blind(g: &Graph, j: usize, gamma: &Rational) -> Result<ReductionInstance> {
    check_cubic(g)?;
    check_gamma(gamma)?;
    let n = g.n();
    if j < 1 || j > n {
        return Err(Error::TargetOutOfRange { j, n });
    }
    let inv_gamma = rational::to_f64(&(Rational::one() / gamma));
    let mut cost = g.adjacency() * inv_gamma;
    for s in 0..n {
        cost[(s, s)] = inv_gamma;
    }
    let mu = DVector::from_element(n, 1.0 / n as f64);
    let trans = (0..n)
        .map(|a| {
            let mut t = DMatrix::zeros(n, n);
            t.row_mut(a).fill(1.0);
            t
        })
        .collect();
    let mdp = Mdp::with_exact_gamma(gamma.clone(), mu, cost, trans)?;
    let target = Rational::new(BigInt::one(), BigInt::from(j)) + stableset_offset(n, gamma);
    Ok(ReductionInstance {
        mdp,
        target,
        meta: ReductionMeta::StableSet {
            j,
            gamma: gamma.clone(),
        },
    })
}

/// Closed form of the stable-set instance cost:
/// `4 (1 - gamma) / (n gamma) + pi^T (G + I) pi`.
pub fn reduced_cost_quadratic(g: &Graph, gamma: &Rational, pi: &BlindController) -> Result<f64> {
    check_cubic(g)?;
    check_gamma(gamma)?;
    if pi.len() != g.n() {
        return Err(Error::DimensionMismatch {
            what: "controller length",
            expected: g.n(),
            got: pi.len(),
        });
    }
    Ok(rational::to_f64(&stableset_offset(g.n(), gamma)) + g.quadratic_form(pi.as_slice()))
}

/// MDP with `n + 1` states and `n` actions. From state `i < n`, action `i`
/// moves to the absorbing state `n` and every other action stays put. Costs
/// depend only on the state (`c_i`, and zero at the absorbing state) and are
/// replicated across actions.
pub fn sqrtsum_to_blind(inst: &SqrtSumInstance) -> Result<ReductionInstance> {
    let epsilon = inst.epsilon()?;
    let gamma = inst.gamma()?;
    let target = inst.target()?;
    let n = inst.n();

    let mut mu = DVector::from_element(n + 1, 1.0 / n as f64);
    mu[n] = 0.0;
    let mut cost = DMatrix::zeros(n + 1, n);
    for (i, &ci) in inst.c.iter().enumerate() {
        cost.row_mut(i).fill(ci as f64);
    }
    let trans = (0..n)
        .map(|a| {
            let mut t = DMatrix::zeros(n + 1, n + 1);
            for i in 0..n {
                if i == a {
                    t[(n, i)] = 1.0;
                } else {
                    t[(i, i)] = 1.0;
                }
            }
            t[(n, n)] = 1.0;
            t
        })
        .collect();
    let mdp = Mdp::with_exact_gamma(gamma.clone(), mu, cost, trans)?;
    Ok(ReductionInstance {
        mdp,
        target,
        meta: ReductionMeta::SqrtSum {
            c: inst.c.clone(),
            d: inst.d,
            epsilon,
            gamma,
        },
    })
}

/// Closed form of the sqrt-sum instance cost:
/// `(1/n) sum_i c_i / (1 + epsilon pi_i)`.
pub fn sqrtsum_cost_direct(inst: &SqrtSumInstance, pi: &BlindController) -> Result<f64> {
    let eps = rational::to_f64(&inst.epsilon()?);
    if pi.len() != inst.n() {
        return Err(Error::DimensionMismatch {
            what: "controller length",
            expected: inst.n(),
            got: pi.len(),
        });
    }
    let total: f64 = inst
        .c
        .iter()
        .zip(pi.as_slice())
        .map(|(&c, &p)| c as f64 / (1.0 + eps * p))
        .sum();
    Ok(total / inst.n() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{blind_cost, occupancy};
    use crate::rational::ratio;

    #[test]
    fn k4_instance() {
        let inst = stableset_to_blind(&Graph::complete(4), 1, &ratio(9, 10)).unwrap();
        assert_eq!(inst.target, ratio(10, 9));
        assert_eq!(inst.kind(), ReductionKind::StableSet);
        let c = inst.mdp.cost();
        assert!(c.iter().all(|&v| v == 10.0 / 9.0));
        let j = blind_cost(&inst.mdp, &BlindController::uniform(4)).unwrap();
        assert!((j - (1.0 + 1.0 / 9.0)).abs() < 1e-12);
    }

    #[test]
    fn k33_target() {
        let inst = stableset_to_blind(&Graph::complete_bipartite(3, 3), 3, &ratio(9, 10)).unwrap();
        assert_eq!(inst.target, ratio(11, 27));
    }

    #[test]
    fn cost_columns_sum_to_four_over_gamma() {
        let inst = stableset_to_blind(&Graph::petersen(), 2, &ratio(3, 4)).unwrap();
        for a in 0..10 {
            assert!((inst.mdp.cost().column(a).sum() - 4.0 / 0.75).abs() < 1e-12);
        }
    }

    #[test]
    fn stableset_errors() {
        let g = ratio(9, 10);
        assert!(matches!(
            stableset_to_blind(&Graph::path(4), 1, &g),
            Err(Error::NotCubic { vertex: 0, degree: 1 })
        ));
        assert!(matches!(
            stableset_to_blind(&Graph::complete(4), 0, &g),
            Err(Error::TargetOutOfRange { .. })
        ));
        assert!(matches!(
            stableset_to_blind(&Graph::complete(4), 5, &g),
            Err(Error::TargetOutOfRange { .. })
        ));
        assert!(stableset_to_blind(&Graph::complete(4), 1, &ratio(1, 1)).is_err());
    }

    #[test]
    fn occupancy_reduces_to_affine_mixture() {
        let gamma = ratio(9, 10);
        let inst = stableset_to_blind(&Graph::hypercube(3), 2, &gamma).unwrap();
        let pi = BlindController::new((1..=8).map(|i| i as f64 / 36.0).collect()).unwrap();
        let x = occupancy(&inst.mdp, &pi).unwrap();
        for (s, &xs) in x.as_slice().iter().enumerate() {
            let expected = 0.1 / 8.0 + 0.9 * pi.as_slice()[s];
            assert!((xs - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn quadratic_examples() {
        let gamma = ratio(9, 10);
        let k4 = Graph::complete(4);
        let v = reduced_cost_quadratic(&k4, &gamma, &BlindController::uniform(4)).unwrap();
        assert!((v - (1.0 / 9.0 + 1.0)).abs() < 1e-15);

        let k33 = Graph::complete_bipartite(3, 3);
        let side = BlindController::new(vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0, 0.0, 0.0]).unwrap();
        let v = reduced_cost_quadratic(&k33, &gamma, &side).unwrap();
        assert!((v - (2.0 / 27.0 + 1.0 / 3.0)).abs() < 1e-15);

        let p = Graph::petersen();
        let v = reduced_cost_quadratic(&p, &gamma, &BlindController::vertex(10, 7)).unwrap();
        assert!((v - (0.4 / 9.0 + 1.0)).abs() < 1e-15);

        assert!(reduced_cost_quadratic(&p, &gamma, &BlindController::uniform(4)).is_err());
    }

    #[test]
    fn sqrtsum_constants() {
        let inst = SqrtSumInstance::new(vec![4, 9], 5).unwrap();
        let red = sqrtsum_to_blind(&inst).unwrap();
        assert_eq!(red.target, ratio(25, 52));
        assert_eq!(red.mdp.gamma_exact(), Some(&ratio(24, 25)));
        assert_eq!((red.mdp.n(), red.mdp.k()), (3, 2));
        match red.meta {
            ReductionMeta::SqrtSum { epsilon, .. } => assert_eq!(epsilon, ratio(24, 1)),
            _ => unreachable!(),
        }

        let one = SqrtSumInstance::new(vec![2], 2).unwrap();
        assert_eq!(one.epsilon().unwrap(), ratio(1, 1));
        assert_eq!(one.gamma().unwrap(), ratio(1, 2));
        assert_eq!(one.target().unwrap(), ratio(2, 1));
    }

    #[test]
    fn sqrtsum_guard() {
        let inst = SqrtSumInstance::new(vec![1], 1).unwrap();
        assert!(matches!(sqrtsum_to_blind(&inst), Err(Error::TrivialSqrtSum { .. })));
        let inst = SqrtSumInstance::new(vec![0, 1], 1).unwrap();
        assert!(sqrtsum_to_blind(&inst).is_err());
        assert!(SqrtSumInstance::new(vec![], 1).is_err());
    }

    #[test]
    fn sqrtsum_direct_examples() {
        let inst = SqrtSumInstance::new(vec![4, 9], 5).unwrap();
        let v = sqrtsum_cost_direct(&inst, &BlindController::vertex(2, 0)).unwrap();
        assert!((v - 4.58).abs() < 1e-13);
        let star = BlindController::new(vec![47.0 / 120.0, 73.0 / 120.0]).unwrap();
        let v = sqrtsum_cost_direct(&inst, &star).unwrap();
        assert!((v - 25.0 / 52.0).abs() < 1e-15);
        let red = sqrtsum_to_blind(&inst).unwrap();
        assert!((blind_cost(&red.mdp, &star).unwrap() - 25.0 / 52.0).abs() < 1e-12);

        let one = SqrtSumInstance::new(vec![2], 2).unwrap();
        let v = sqrtsum_cost_direct(&one, &BlindController::uniform(1)).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sqrtsum_occupancy_closed_form() {
        let inst = SqrtSumInstance::new(vec![3, 5, 7], 6).unwrap();
        let red = sqrtsum_to_blind(&inst).unwrap();
        let gamma = red.mdp.gamma();
        let pi = BlindController::new(vec![0.2, 0.5, 0.3]).unwrap();
        let x = occupancy(&red.mdp, &pi).unwrap();
        for i in 0..3 {
            let p = pi.as_slice()[i];
            let expected = (1.0 - gamma) / (3.0 * (1.0 - gamma * (1.0 - p)));
            assert!((x.as_slice()[i] - expected).abs() < 1e-12);
        }
    }
}
