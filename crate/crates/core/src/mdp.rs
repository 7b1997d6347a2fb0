//! MDP and blind-controller data model, plus exact evaluation.
//!
//! Transition matrices are stored column-stochastic: `trans(a)[(next, cur)]`
//! is the probability of moving from `cur` to `next` under action `a`.
//! Actions and states are 0-based in the library API; file formats and CLI
//! output use 1-based labels.
//!
//! # Cost convention
//!
//! Costs are minimized. The cost of a blind controller `pi` is
//! `J(pi) = x^T C pi`, where the occupancy `x` solves
//! `x = (1 - gamma) mu + gamma T_pi x`. Because of the `(1 - gamma)` factor
//! the occupancy is a probability vector and `J` is the *normalized*
//! discounted cost: `(1 - gamma)` times the expected discounted sum of costs.
//! Every value reported by this crate ([`blind_cost`],
//! [`evaluate_deterministic_blind`], [`unrestricted_optimum`]) uses this
//! convention.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rational::{self, Rational};

/// Tolerance applied to normalization and stochasticity checks on input data.
pub const INPUT_TOL: f64 = 1e-9;

/// A finite discounted MDP with state-action costs.
#[derive(Debug, Clone, PartialEq)]
pub struct Mdp {
    n: usize,
    k: usize,
    gamma: f64,
    gamma_exact: Option<Rational>,
    mu: DVector<f64>,
    cost: DMatrix<f64>,
    trans: Vec<DMatrix<f64>>,
}

impl Mdp {
    /// Builds and validates an MDP. `cost` is `n x k`, `trans` holds `k`
    /// column-stochastic `n x n` matrices.
    pub fn new(
        gamma: f64,
        mu: DVector<f64>,
        cost: DMatrix<f64>,
        trans: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        Self::from_parts_unchecked(gamma, None, mu, cost, trans).checked()
    }

    /// Like [`Mdp::new`] but keeps the discount factor as an exact rational,
    /// so it survives serialization bit-exactly.
    pub fn with_exact_gamma(
        gamma: Rational,
        mu: DVector<f64>,
        cost: DMatrix<f64>,
        trans: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        if !rational::is_open_unit(&gamma) {
            return Err(Error::Discount(rational::format_rational(&gamma)));
        }
        let g = rational::to_f64(&gamma);
        Self::from_parts_unchecked(g, Some(gamma), mu, cost, trans).checked()
    }

    /// Assembles an MDP without checking any invariant. Use [`validate_mdp`]
    /// to inspect the result.
    pub fn from_parts_unchecked(
        gamma: f64,
        gamma_exact: Option<Rational>,
        mu: DVector<f64>,
        cost: DMatrix<f64>,
        trans: Vec<DMatrix<f64>>,
    ) -> Self {
        Mdp {
            n: mu.len(),
            k: cost.ncols(),
            gamma,
            gamma_exact,
            mu,
            cost,
            trans,
        }
    }

    fn checked(self) -> Result<Self> {
        let report = validate_mdp(&self);
        if report.ok {
            Ok(self)
        } else {
            Err(Error::InvalidMdp(report))
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn gamma_exact(&self) -> Option<&Rational> {
        self.gamma_exact.as_ref()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    /// `n x k` cost matrix.
    pub fn cost(&self) -> &DMatrix<f64> {
        &self.cost
    }

    /// Transition matrix of action `a`, entry `(next, cur)`.
    pub fn trans(&self, a: usize) -> &DMatrix<f64> {
        &self.trans[a]
    }

    pub fn transitions(&self) -> &[DMatrix<f64>] {
        &self.trans
    }

    /// Relabels states: new state `i` is old state `perm[i]`.
    pub fn permute_states(&self, perm: &[usize]) -> Mdp {
        let n = self.n;
        let mu = DVector::from_fn(n, |i, _| self.mu[perm[i]]);
        let cost = DMatrix::from_fn(n, self.k, |i, a| self.cost[(perm[i], a)]);
        let trans = self
            .trans
            .iter()
            .map(|t| DMatrix::from_fn(n, n, |i, j| t[(perm[i], perm[j])]))
            .collect();
        Mdp {
            mu,
            cost,
            trans,
            ..self.clone()
        }
    }
}

/// A stochastic blind controller: one action distribution used at every step.
#[derive(Debug, Clone, PartialEq)]
pub struct BlindController {
    pi: Vec<f64>,
}

impl BlindController {
    /// Accepts `pi` if it is finite, nonnegative and sums to one within
    /// [`INPUT_TOL`]. The vector is not renormalized.
    pub fn new(pi: Vec<f64>) -> Result<Self> {
        if pi.is_empty() {
            return Err(Error::InvalidController("empty action distribution".into()));
        }
        if let Some((a, v)) = pi.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidController(format!(
                "pi[{}] = {v} is not finite",
                a + 1
            )));
        }
        if let Some((a, v)) = pi.iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(Error::InvalidController(format!(
                "pi[{}] = {v} is negative",
                a + 1
            )));
        }
        let sum: f64 = pi.iter().sum();
        if (sum - 1.0).abs() > INPUT_TOL {
            return Err(Error::InvalidController(format!("pi sums to {sum}")));
        }
        Ok(BlindController { pi })
    }

    /// Point mass on action `a` (0-based).
    pub fn vertex(k: usize, a: usize) -> Self {
        let mut pi = vec![0.0; k];
        pi[a] = 1.0;
        BlindController { pi }
    }

    pub fn uniform(k: usize) -> Self {
        BlindController {
            pi: vec![1.0 / k as f64; k],
        }
    }

    /// Clamps tiny negatives and rescales to unit sum. Internal use for
    /// iterates that are in the simplex up to rounding.
    pub(crate) fn from_rounded(mut pi: Vec<f64>) -> Self {
        for v in pi.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let sum: f64 = pi.iter().sum();
        for v in pi.iter_mut() {
            *v /= sum;
        }
        BlindController { pi }
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.pi
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.pi
    }
}

/// Discounted state occupancy of a controller.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyVector {
    x: DVector<f64>,
}

impl OccupancyVector {
    pub fn as_vector(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn as_slice(&self) -> &[f64] {
        self.x.as_slice()
    }

    pub fn sum(&self) -> f64 {
        self.x.sum()
    }
}

/// One failed invariant, located by a field path such as `trans a=2 column 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub path: String,
    pub message: String,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{}: {}", v.path, v.message)?;
        }
        Ok(())
    }
}

/// Checks every [`Mdp`] invariant and reports all violations.
pub fn validate_mdp(m: &Mdp) -> ValidationReport {
    let mut out = Vec::new();
    let mut push = |path: String, message: String, magnitude: f64| {
        out.push(Violation {
            path,
            message,
            magnitude,
        })
    };
    let (n, k) = (m.n, m.k);

    if n == 0 {
        push("n".into(), "MDP has no states".into(), 0.0);
    }
    if k == 0 {
        push("k".into(), "MDP has no actions".into(), 0.0);
    }
    if !(m.gamma > 0.0 && m.gamma < 1.0) {
        push(
            "gamma".into(),
            format!("gamma = {} is not in (0, 1)", m.gamma),
            m.gamma,
        );
    }

    if m.mu.len() != n {
        push(
            "mu".into(),
            format!("mu has {} entries, expected {n}", m.mu.len()),
            m.mu.len() as f64,
        );
    } else if let Some(bad) = m.mu.iter().find(|v| !v.is_finite()) {
        push("mu".into(), format!("mu has non-finite entry {bad}"), f64::NAN);
    } else {
        let worst_neg = m.mu.iter().cloned().fold(0.0f64, f64::min);
        if worst_neg < 0.0 {
            push(
                "mu".into(),
                format!("mu has negative entry {worst_neg}"),
                -worst_neg,
            );
        }
        let sum = m.mu.sum();
        if (sum - 1.0).abs() > INPUT_TOL {
            push(
                "mu".into(),
                format!("mu sums to {sum}"),
                (sum - 1.0).abs(),
            );
        }
    }

    if m.cost.nrows() != n {
        push(
            "cost".into(),
            format!("cost has {} rows, expected {n}", m.cost.nrows()),
            m.cost.nrows() as f64,
        );
    }
    if let Some(bad) = m.cost.iter().find(|v| !v.is_finite()) {
        push(
            "cost".into(),
            format!("cost has non-finite entry {bad}"),
            f64::NAN,
        );
    }

    if m.trans.len() != k {
        push(
            "trans".into(),
            format!("{} transition matrices, expected {k}", m.trans.len()),
            m.trans.len() as f64,
        );
    }
    for (a, t) in m.trans.iter().enumerate() {
        let label = format!("trans a={}", a + 1);
        if t.nrows() != n || t.ncols() != n {
            push(
                label,
                format!("matrix is {}x{}, expected {n}x{n}", t.nrows(), t.ncols()),
                0.0,
            );
            continue;
        }
        if let Some(bad) = t.iter().find(|v| !v.is_finite()) {
            push(label, format!("non-finite entry {bad}"), f64::NAN);
            continue;
        }
        for s in 0..n {
            let col = t.column(s);
            let worst_neg = col.iter().cloned().fold(0.0f64, f64::min);
            if worst_neg < 0.0 {
                push(
                    format!("{label} column {}", s + 1),
                    format!(
                        "action {} column {} has negative entry {worst_neg}",
                        a + 1,
                        s + 1
                    ),
                    -worst_neg,
                );
            }
            let sum = col.sum();
            if (sum - 1.0).abs() > INPUT_TOL {
                push(
                    format!("{label} column {}", s + 1),
                    format!("action {} column {} sums to {sum}", a + 1, s + 1),
                    (sum - 1.0).abs(),
                );
            }
        }
    }

    ValidationReport {
        ok: out.is_empty(),
        violations: out,
    }
}

fn check_controller(m: &Mdp, pi: &BlindController) -> Result<()> {
    if pi.len() != m.k {
        return Err(Error::DimensionMismatch {
            what: "controller length",
            expected: m.k,
            got: pi.len(),
        });
    }
    Ok(())
}

/// `T = sum_a pi_a P_a` without dimension checks.
pub(crate) fn mixture(m: &Mdp, pi: &[f64]) -> DMatrix<f64> {
    let mut t = DMatrix::zeros(m.n, m.n);
    for (p, &w) in m.trans.iter().zip(pi) {
        if w != 0.0 {
            t += p * w;
        }
    }
    t
}

/// Column-stochastic transition matrix of the Markov chain induced by `pi`.
pub fn policy_transition(m: &Mdp, pi: &BlindController) -> Result<DMatrix<f64>> {
    check_controller(m, pi)?;
    Ok(mixture(m, pi.as_slice()))
}

pub(crate) fn occupancy_of(m: &Mdp, t: &DMatrix<f64>) -> Result<DVector<f64>> {
    let rhs = &m.mu * (1.0 - m.gamma);
    linalg::solve(linalg::resolvent_system(t, m.gamma), &rhs)
}

/// Solves `x = (1 - gamma) mu + gamma T x` for the state occupancy.
pub fn occupancy(m: &Mdp, pi: &BlindController) -> Result<OccupancyVector> {
    let t = policy_transition(m, pi)?;
    Ok(OccupancyVector {
        x: occupancy_of(m, &t)?,
    })
}

/// `|| x - (1 - gamma) mu - gamma T x ||_inf` for a computed occupancy.
pub fn occupancy_residual(m: &Mdp, pi: &BlindController, x: &OccupancyVector) -> Result<f64> {
    let t = policy_transition(m, pi)?;
    let r = &x.x - &m.mu * (1.0 - m.gamma) - (&t * &x.x) * m.gamma;
    Ok(r.amax())
}

/// Normalized cost `x^T C pi` evaluated at an arbitrary weight vector.
pub(crate) fn cost_at(m: &Mdp, pi: &[f64]) -> Result<f64> {
    let x = occupancy_of(m, &mixture(m, pi))?;
    Ok(cost_given_occupancy(m, &x, pi))
}

pub(crate) fn cost_given_occupancy(m: &Mdp, x: &DVector<f64>, pi: &[f64]) -> f64 {
    let cpi = &m.cost * DVector::from_column_slice(pi);
    x.dot(&cpi)
}

/// Normalized discounted cost `J(pi) = x^T C pi` (see the module docs).
pub fn blind_cost(m: &Mdp, pi: &BlindController) -> Result<f64> {
    check_controller(m, pi)?;
    cost_at(m, pi.as_slice())
}

/// Cost of always playing action `a` (0-based): one Markov-chain solve on
/// `P_a` with cost column `a`.
pub fn evaluate_deterministic_blind(m: &Mdp, a: usize) -> Result<f64> {
    if a >= m.k {
        return Err(Error::ActionOutOfRange { index: a, k: m.k });
    }
    let x = occupancy_of(m, &m.trans[a])?;
    Ok(x.dot(&m.cost.column(a)))
}

/// Optimal stationary (state-dependent) policy found by policy iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct UnrestrictedSolution {
    /// Normalized optimal cost `(1 - gamma) mu^T V*`.
    pub value: f64,
    /// Optimal action per state (0-based).
    pub policy: Vec<usize>,
    /// Unnormalized cost-to-go `V*`.
    pub state_values: Vec<f64>,
    pub iterations: usize,
}

/// Optimum over all stationary policies, which lower-bounds every blind
/// controller. Computed by exact policy iteration.
pub fn unrestricted_optimum(m: &Mdp) -> Result<f64> {
    Ok(solve_unrestricted(m)?.value)
}

pub fn solve_unrestricted(m: &Mdp) -> Result<UnrestrictedSolution> {
    let (n, k, gamma) = (m.n, m.k, m.gamma);
    let mut policy: Vec<usize> = (0..n)
        .map(|s| argmin((0..k).map(|a| m.cost[(s, a)])))
        .collect();
    let mut iterations = 0;
    loop {
        iterations += 1;
        // Row-oriented chain of the current policy.
        let p = DMatrix::from_fn(n, n, |s, next| m.trans[policy[s]][(next, s)]);
        let c = DVector::from_fn(n, |s, _| m.cost[(s, policy[s])]);
        let v = linalg::solve(linalg::resolvent_system(&p, gamma), &c)?;

        let mut changed = false;
        for s in 0..n {
            let q = |a: usize| m.cost[(s, a)] + gamma * m.trans[a].column(s).dot(&v);
            let current = q(policy[s]);
            let best = argmin((0..k).map(q));
            let best_q = q(best);
            if best_q < current - 1e-12 * (1.0 + current.abs()) {
                policy[s] = best;
                changed = true;
            }
        }
        if !changed || iterations >= 10_000 {
            let value = (1.0 - gamma) * m.mu.dot(&v);
            return Ok(UnrestrictedSolution {
                value,
                policy,
                state_values: v.iter().cloned().collect(),
                iterations,
            });
        }
    }
}

/// Index of the smallest value, lowest index on ties.
pub(crate) fn argmin(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;
    use nalgebra::dvector;

    fn single_state(c: f64) -> Mdp {
        Mdp::new(0.7, dvector![1.0], dmatrix![c], vec![dmatrix![1.0]]).unwrap()
    }

    fn identity_swap(gamma: f64) -> Mdp {
        Mdp::new(
            gamma,
            dvector![0.8, 0.2],
            dmatrix![-0.8, -0.8; -0.2, -0.2],
            vec![dmatrix![1.0, 0.0; 0.0, 1.0], dmatrix![0.0, 1.0; 1.0, 0.0]],
        )
        .unwrap()
    }

    #[test]
    fn smallest_mdp_is_valid() {
        let m = Mdp::from_parts_unchecked(0.5, None, dvector![1.0], dmatrix![2.0], vec![dmatrix![1.0]]);
        let report = validate_mdp(&m);
        assert!(report.ok);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn reports_unnormalized_mu() {
        let m = Mdp::from_parts_unchecked(0.5, None, dvector![0.9], dmatrix![2.0], vec![dmatrix![1.0]]);
        let report = validate_mdp(&m);
        assert!(!report.ok);
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].message.contains("mu sums to 0.9"));
        assert!((report.violations[0].magnitude - 0.1).abs() < 1e-12);
    }

    #[test]
    fn reports_bad_transition_column() {
        let m = Mdp::from_parts_unchecked(
            0.5,
            None,
            dvector![0.5, 0.5],
            dmatrix![1.0, 1.0; 1.0, 1.0],
            vec![dmatrix![1.0, 0.0; 0.0, 1.0], dmatrix![0.5, 0.0; 0.7, 1.0]],
        );
        let report = validate_mdp(&m);
        assert!(!report.ok);
        let v = &report.violations[0];
        assert_eq!(v.path, "trans a=2 column 1");
        assert!(v.message.contains("action 2 column 1 sums to 1.2"));
    }

    #[test]
    fn reports_every_violation() {
        let m = Mdp::from_parts_unchecked(
            1.5,
            None,
            dvector![-0.5, 0.2],
            dmatrix![1.0; f64::NAN],
            vec![dmatrix![1.0, -0.5; 0.0, 1.0]],
        );
        let report = validate_mdp(&m);
        let paths: Vec<_> = report.violations.iter().map(|v| v.path.as_str()).collect();
        assert_eq!(paths, ["gamma", "mu", "mu", "cost", "trans a=1 column 2", "trans a=1 column 2"]);
    }

    #[test]
    fn controller_checks() {
        assert!(BlindController::new(vec![0.5, 0.5]).is_ok());
        assert!(BlindController::new(vec![0.5, 0.6]).is_err());
        assert!(BlindController::new(vec![1.5, -0.5]).is_err());
        assert!(BlindController::new(vec![]).is_err());
        assert!(BlindController::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn mixture_of_identity_and_swap() {
        let m = identity_swap(0.5);
        let t = policy_transition(&m, &BlindController::uniform(2)).unwrap();
        assert_eq!(t, dmatrix![0.5, 0.5; 0.5, 0.5]);
        let t = policy_transition(&m, &BlindController::vertex(2, 1)).unwrap();
        assert_eq!(&t, m.trans(1));
        assert!(matches!(
            policy_transition(&m, &BlindController::uniform(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn one_state_occupancy_and_cost() {
        let m = single_state(3.5);
        let pi = BlindController::uniform(1);
        assert_eq!(occupancy(&m, &pi).unwrap().as_slice(), &[1.0]);
        assert!((blind_cost(&m, &pi).unwrap() - 3.5).abs() < 1e-15);
        assert!((evaluate_deterministic_blind(&m, 0).unwrap() - 3.5).abs() < 1e-15);
        assert!(matches!(
            evaluate_deterministic_blind(&m, 1),
            Err(Error::ActionOutOfRange { index: 1, k: 1 })
        ));
    }

    #[test]
    fn deterministic_values_on_identity_swap() {
        // (1 - gamma) mu^T (I - gamma P)^{-1} (-mu), with mu^T(I - P/2)^{-1} mu
        // equal to 1.36 (identity) and 1.12 (swap).
        let m = identity_swap(0.5);
        let v1 = evaluate_deterministic_blind(&m, 0).unwrap();
        let v2 = evaluate_deterministic_blind(&m, 1).unwrap();
        assert!((v1 - -0.5 * 1.36).abs() < 1e-12);
        assert!((v2 - -0.5 * 1.12).abs() < 1e-12);
        for a in 0..2 {
            let via_mix = blind_cost(&m, &BlindController::vertex(2, a)).unwrap();
            let direct = evaluate_deterministic_blind(&m, a).unwrap();
            assert!((via_mix - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn unrestricted_picks_cheaper_action() {
        let m = Mdp::new(
            0.9,
            dvector![1.0],
            dmatrix![3.0, 5.0],
            vec![dmatrix![1.0], dmatrix![1.0]],
        )
        .unwrap();
        let sol = solve_unrestricted(&m).unwrap();
        assert!((sol.value - 3.0).abs() < 1e-12);
        assert_eq!(sol.policy, vec![0]);
    }

    #[test]
    fn unrestricted_with_one_action_is_the_chain_value() {
        let m = identity_swap(0.5);
        let one = Mdp::new(
            0.5,
            m.mu().clone(),
            m.cost().columns(1, 1).into_owned(),
            vec![m.trans(1).clone()],
        )
        .unwrap();
        let a = unrestricted_optimum(&one).unwrap();
        let b = evaluate_deterministic_blind(&one, 0).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn residual_is_tiny() {
        let m = identity_swap(0.9);
        let pi = BlindController::new(vec![0.3, 0.7]).unwrap();
        let x = occupancy(&m, &pi).unwrap();
        assert!(occupancy_residual(&m, &pi, &x).unwrap() < 1e-12);
        assert!((x.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_gamma_is_checked() {
        let r = Mdp::with_exact_gamma(
            rational::ratio(1, 1),
            dvector![1.0],
            dmatrix![1.0],
            vec![dmatrix![1.0]],
        );
        assert!(matches!(r, Err(Error::Discount(_))));
    }
}
