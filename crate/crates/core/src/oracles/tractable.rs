//! The symmetric special case.
//!
//! When every transition matrix is symmetric and the cost is the state-only
//! vector `c = -kappa * mu` with `kappa > 0`, the blind cost equals
//! `-kappa (1 - gamma) f(pi)` with `f(pi) = mu^T (I - gamma M_pi)^{-1} mu`
//! and `M_pi = sum_a pi_a P_a`. Each `I - gamma M_pi` is symmetric positive
//! definite, `f` is convex on the simplex, and the cost is therefore concave:
//! some vertex of the simplex, i.e. a deterministic controller, is globally
//! optimal. Checking all `k` vertices costs `k` dense solves.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::mdp::{self, argmin, evaluate_deterministic_blind, BlindController, Mdp};
use crate::optimize::sample_simplex;

const SYMMETRY_TOL: f64 = 1e-12;
const KAPPA_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct TractableForm {
    pub is_tractable: bool,
    /// Fitted scale in `c = -kappa * mu`, when the cost is state-only.
    pub kappa: Option<f64>,
    pub symmetric_ok: bool,
    pub cost_ok: bool,
}

impl TractableForm {
    /// Human-readable reason the instance falls outside the class.
    pub fn reason(&self) -> Option<&'static str> {
        match (self.symmetric_ok, self.cost_ok) {
            (true, true) => None,
            (false, true) => Some("transitions not symmetric"),
            (true, false) => Some("cost is not -kappa * mu with kappa > 0"),
            (false, false) => Some("transitions not symmetric and cost is not -kappa * mu"),
        }
    }
}

/// Detects the symmetric special case.
pub fn is_tractable_case(m: &Mdp) -> TractableForm {
    let symmetric_ok = m.transitions().iter().all(|p| {
        let n = p.nrows();
        (0..n).all(|i| (0..i).all(|j| (p[(i, j)] - p[(j, i)]).abs() <= SYMMETRY_TOL))
    });

    let cost = m.cost();
    let first = cost.column(0);
    let state_only = (1..m.k()).all(|a| (cost.column(a) - first).amax() <= KAPPA_TOL);
    let mut kappa = None;
    if state_only {
        let mu = m.mu();
        let mm = mu.dot(mu);
        let fitted = -first.dot(mu) / mm;
        let residual = (first + mu * fitted).amax();
        if residual < KAPPA_TOL {
            kappa = Some(fitted);
        }
    }
    let cost_ok = kappa.is_some_and(|k| k > 0.0);
    TractableForm {
        is_tractable: symmetric_ok && cost_ok,
        kappa,
        symmetric_ok,
        cost_ok,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TractableSolution {
    /// Optimal action (0-based); lowest index on ties.
    pub action: usize,
    /// Blind cost of always playing `action`.
    pub value: f64,
    /// Blind cost of every deterministic controller.
    pub vertex_values: Vec<f64>,
}

fn require_tractable(m: &Mdp) -> Result<TractableForm> {
    let form = is_tractable_case(m);
    match form.reason() {
        None => Ok(form),
        Some(r) => Err(Error::NotTractable(r.into())),
    }
}

/// Global optimum over all blind controllers for a tractable instance:
/// the best deterministic controller.
pub fn solve_tractable(m: &Mdp) -> Result<TractableSolution> {
    require_tractable(m)?;
    let vertex_values = (0..m.k())
        .map(|a| evaluate_deterministic_blind(m, a))
        .collect::<Result<Vec<_>>>()?;
    let action = argmin(vertex_values.iter().copied());
    Ok(TractableSolution {
        action,
        value: vertex_values[action],
        vertex_values,
    })
}

/// `f(pi) = mu^T (I - gamma M_pi)^{-1} mu`.
pub fn matrix_fractional(m: &Mdp, pi: &BlindController) -> Result<f64> {
    let t = mdp::policy_transition(m, pi)?;
    let y = linalg::solve(linalg::resolvent_system(&t, m.gamma()), m.mu())?;
    Ok(m.mu().dot(&y))
}

/// Whether `I - gamma M_pi` admits a Cholesky factorization. Requires
/// symmetric transitions.
pub fn psd_check(m: &Mdp, pi: &BlindController) -> Result<bool> {
    if !is_tractable_case(m).symmetric_ok {
        return Err(Error::NotTractable("transitions not symmetric".into()));
    }
    let t = mdp::policy_transition(m, pi)?;
    let a: DMatrix<f64> = linalg::resolvent_system(&t, m.gamma());
    let sym = (&a + a.transpose()) * 0.5;
    Ok(sym.cholesky().is_some())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    pub trials: usize,
    pub violations: usize,
    /// Largest `f(mid) - (f(a) + f(b)) / 2` seen; nonpositive when convex.
    pub max_excess: f64,
}

/// Samples random pairs and checks `f((a + b) / 2) <= (f(a) + f(b)) / 2 + 1e-10`.
pub fn convexity_probe(m: &Mdp, trials: usize, seed: u64) -> Result<ConvexityReport> {
    require_tractable(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut max_excess = f64::NEG_INFINITY;
    for _ in 0..trials {
        let a = BlindController::from_rounded(sample_simplex(m.k(), &mut rng));
        let b = BlindController::from_rounded(sample_simplex(m.k(), &mut rng));
        let excess = midpoint_excess(m, &a, &b)?;
        max_excess = max_excess.max(excess);
        if excess > 1e-10 {
            violations += 1;
        }
    }
    Ok(ConvexityReport {
        trials,
        violations,
        max_excess,
    })
}

/// `f((a + b) / 2) - (f(a) + f(b)) / 2`.
pub fn midpoint_excess(m: &Mdp, a: &BlindController, b: &BlindController) -> Result<f64> {
    let mid = BlindController::from_rounded(
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(x, y)| 0.5 * (x + y))
            .collect(),
    );
    let fa = matrix_fractional(m, a)?;
    let fb = matrix_fractional(m, b)?;
    Ok(matrix_fractional(m, &mid)? - 0.5 * (fa + fb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    fn identity_swap(cost: DMatrix<f64>) -> Mdp {
        Mdp::new(
            0.5,
            dvector![0.8, 0.2],
            cost,
            vec![dmatrix![1.0, 0.0; 0.0, 1.0], dmatrix![0.0, 1.0; 1.0, 0.0]],
        )
        .unwrap()
    }

    #[test]
    fn detects_the_two_state_example() {
        let m = identity_swap(dmatrix![-0.8, -0.8; -0.2, -0.2]);
        let form = is_tractable_case(&m);
        assert!(form.is_tractable);
        assert!((form.kappa.unwrap() - 1.0).abs() < 1e-12);

        let m = identity_swap(dmatrix![-0.8, -0.8; -0.3, -0.3]);
        let form = is_tractable_case(&m);
        assert!(form.symmetric_ok && !form.cost_ok && !form.is_tractable);

        let m = identity_swap(dmatrix![0.8, 0.8; 0.2, 0.2]);
        assert!(!is_tractable_case(&m).cost_ok);
    }

    #[test]
    fn k4_reduction_is_not_symmetric() {
        let inst = crate::reductions::stableset_to_blind(
            &crate::graph::Graph::complete(4),
            1,
            &crate::rational::ratio(9, 10),
        )
        .unwrap();
        let form = is_tractable_case(&inst.mdp);
        assert!(!form.symmetric_ok);
        assert_eq!(form.reason(), Some("transitions not symmetric and cost is not -kappa * mu"));
    }

    #[test]
    fn solves_the_two_state_example() {
        let m = identity_swap(dmatrix![-0.8, -0.8; -0.2, -0.2]);
        let pi1 = BlindController::vertex(2, 0);
        let pi2 = BlindController::vertex(2, 1);
        assert!((matrix_fractional(&m, &pi1).unwrap() - 1.36).abs() < 1e-12);
        assert!((matrix_fractional(&m, &pi2).unwrap() - 1.12).abs() < 1e-12);
        let sol = solve_tractable(&m).unwrap();
        assert_eq!(sol.action, 0);
        assert!((sol.value - -0.5 * 1.36).abs() < 1e-12);
    }

    #[test]
    fn single_action() {
        let m = Mdp::new(0.3, dvector![1.0], dmatrix![-2.0], vec![dmatrix![1.0]]).unwrap();
        assert_eq!(solve_tractable(&m).unwrap().action, 0);
    }

    #[test]
    fn psd_examples() {
        let m = identity_swap(dmatrix![-0.8, -0.8; -0.2, -0.2]);
        for pi in [
            BlindController::vertex(2, 0),
            BlindController::vertex(2, 1),
            BlindController::uniform(2),
        ] {
            assert!(psd_check(&m, &pi).unwrap());
        }
        let inst = crate::reductions::stableset_to_blind(
            &crate::graph::Graph::complete(4),
            1,
            &crate::rational::ratio(9, 10),
        )
        .unwrap();
        assert!(psd_check(&inst.mdp, &BlindController::uniform(4)).is_err());
    }

    #[test]
    fn midpoint_examples() {
        let m = identity_swap(dmatrix![-0.8, -0.8; -0.2, -0.2]);
        let f_mid = matrix_fractional(&m, &BlindController::uniform(2)).unwrap();
        assert!((f_mid - 1.18).abs() < 1e-12);
        let e = midpoint_excess(&m, &BlindController::vertex(2, 0), &BlindController::vertex(2, 1)).unwrap();
        assert!((e - (1.18 - 1.24)).abs() < 1e-12);
        let p = BlindController::new(vec![0.3, 0.7]).unwrap();
        assert!(midpoint_excess(&m, &p, &p).unwrap().abs() < 1e-15);
        let report = convexity_probe(&m, 50, 3).unwrap();
        assert_eq!(report.violations, 0);
    }
}
