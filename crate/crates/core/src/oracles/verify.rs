//! Checks the local optimizer against the exact oracle of a reduction
//! instance.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::mdp::Mdp;
use crate::optimize::{optimize_blind, OptimizeConfig};
use crate::oracles::mis::max_independent_set;
use crate::oracles::sqrtsum::{decide_sqrtsum, epsilon_f64, sqrtsum_optimum};
use crate::rational::{self, Rational};
use crate::reductions::{
    sqrtsum_cost_direct, sqrtsum_to_blind, stableset_offset, stableset_to_blind, ReductionInstance,
    ReductionKind, ReductionMeta, SqrtSumInstance,
};

/// Default agreement tolerance between oracle and optimizer.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Above this epsilon the generic occupancy solve is poorly conditioned and
/// the closed forms are used to score controllers.
pub const LARGE_EPSILON: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Match,
    /// The optimizer stopped above the known optimum.
    OptimizerSuboptimal,
    /// The optimizer reported a value below a proven lower bound.
    Inconsistent,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Match => "match",
            Verdict::OptimizerSuboptimal => "optimizer_suboptimal",
            Verdict::Inconsistent => "inconsistent",
        }
    }
}

impl std::str::FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "match" => Ok(Verdict::Match),
            "optimizer_suboptimal" => Ok(Verdict::OptimizerSuboptimal),
            "inconsistent" => Ok(Verdict::Inconsistent),
            _ => Err(format!("unknown verdict `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub id: String,
    pub kind: ReductionKind,
    /// Optimal blind cost according to the oracle.
    pub oracle_value: f64,
    /// The same value as an exact rational, when it is one.
    pub oracle_exact: Option<Rational>,
    pub optimizer_value: f64,
    pub witness: Vec<f64>,
    /// `|optimizer_value - oracle_value|`.
    pub gap: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub target: Rational,
    /// Answer to "is there a controller with cost at most the target?".
    pub decision: bool,
    pub flags: Vec<String>,
}

fn verdict(optimizer: f64, oracle: f64, tol: f64) -> Verdict {
    if (optimizer - oracle).abs() <= tol {
        Verdict::Match
    } else if optimizer < oracle {
        Verdict::Inconsistent
    } else {
        Verdict::OptimizerSuboptimal
    }
}

/// Recovers the graph behind a stable-set instance from its cost matrix,
/// `G + I = gamma * C`, and checks that the MDP is exactly the construction.
pub fn recover_stableset_graph(inst: &ReductionInstance) -> Result<Graph> {
    let (j, gamma) = match &inst.meta {
        ReductionMeta::StableSet { j, gamma } => (*j, gamma),
        _ => return Err(Error::InvalidInstance("not a stable-set instance".into())),
    };
    let m = &inst.mdp;
    let g = rational::to_f64(gamma);
    let n = m.n();
    if m.k() != n {
        return Err(Error::InvalidInstance(
            "stable-set instance must have as many actions as states".into(),
        ));
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let w = g * m.cost()[(u, v)];
            if (w - 1.0).abs() < 1e-9 {
                edges.push((u, v));
            } else if w.abs() >= 1e-9 {
                return Err(Error::InvalidInstance(format!(
                    "cost ({}, {}) is not 0 or 1/gamma",
                    u + 1,
                    v + 1
                )));
            }
        }
    }
    let graph = Graph::new(n, edges)?;
    let rebuilt = stableset_to_blind(&graph, j, gamma)?;
    if !same_mdp(&rebuilt.mdp, m) || rebuilt.target != inst.target {
        return Err(Error::InvalidInstance(
            "MDP does not match the stable-set construction for its metadata".into(),
        ));
    }
    Ok(graph)
}

fn same_mdp(a: &Mdp, b: &Mdp) -> bool {
    let close = |x: &DMatrix<f64>, y: &DMatrix<f64>| x.shape() == y.shape() && (x - y).amax() <= 1e-12;
    a.n() == b.n()
        && a.k() == b.k()
        && a.gamma() == b.gamma()
        && (a.mu() - b.mu()).amax() <= 1e-12
        && close(a.cost(), b.cost())
        && a.transitions().iter().zip(b.transitions()).all(|(x, y)| close(x, y))
}

/// The sqrt-sum question behind an instance, after checking the MDP is the
/// construction for it.
pub fn recover_sqrtsum_instance(inst: &ReductionInstance) -> Result<SqrtSumInstance> {
    let (c, d) = match &inst.meta {
        ReductionMeta::SqrtSum { c, d, .. } => (c.clone(), *d),
        _ => return Err(Error::InvalidInstance("not a sqrt-sum instance".into())),
    };
    let q = SqrtSumInstance::new(c, d)?;
    let rebuilt = sqrtsum_to_blind(&q)?;
    if rebuilt.meta != inst.meta || !same_mdp(&rebuilt.mdp, &inst.mdp) || rebuilt.target != inst.target {
        return Err(Error::InvalidInstance(
            "MDP does not match the sqrt-sum construction for its metadata".into(),
        ));
    }
    Ok(q)
}

/// Runs the oracle matching the instance kind and the multistart optimizer,
/// and compares them.
pub fn verify_instance(
    inst: &ReductionInstance,
    id: &str,
    cfg: &OptimizeConfig,
    tolerance: f64,
) -> Result<VerificationReport> {
    match inst.kind() {
        ReductionKind::StableSet => verify_stableset(inst, id, cfg, tolerance),
        ReductionKind::SqrtSum => verify_sqrtsum(inst, id, cfg, tolerance),
    }
}

fn verify_stableset(
    inst: &ReductionInstance,
    id: &str,
    cfg: &OptimizeConfig,
    tolerance: f64,
) -> Result<VerificationReport> {
    let graph = recover_stableset_graph(inst)?;
    let (j, gamma) = match &inst.meta {
        ReductionMeta::StableSet { j, gamma } => (*j, gamma),
        _ => unreachable!(),
    };
    let mis = max_independent_set(&graph)?;
    let oracle_exact = stableset_offset(graph.n(), gamma)
        + Rational::new(1.into(), (mis.alpha as i64).into());
    let oracle_value = rational::to_f64(&oracle_exact);
    let opt = optimize_blind(&inst.mdp, cfg)?;
    let mut flags = Vec::new();
    if !opt.converged {
        flags.push("best restart did not converge".to_string());
    }
    Ok(VerificationReport {
        id: id.to_string(),
        kind: ReductionKind::StableSet,
        oracle_value,
        oracle_exact: Some(oracle_exact),
        optimizer_value: opt.value,
        gap: (opt.value - oracle_value).abs(),
        tolerance,
        verdict: verdict(opt.value, oracle_value, tolerance),
        witness: opt.pi.into_vec(),
        target: inst.target.clone(),
        decision: j <= mis.alpha,
        flags,
    })
}

fn verify_sqrtsum(
    inst: &ReductionInstance,
    id: &str,
    cfg: &OptimizeConfig,
    tolerance: f64,
) -> Result<VerificationReport> {
    let q = recover_sqrtsum_instance(inst)?;
    let closed = sqrtsum_optimum(&q)?;
    let opt = optimize_blind(&inst.mdp, cfg)?;
    let mut flags = Vec::new();
    let eps = epsilon_f64(&q)?;
    let optimizer_value = if eps > LARGE_EPSILON {
        flags.push(format!("epsilon {eps:e} exceeds 1e6: scored with the closed form"));
        sqrtsum_cost_direct(&q, &opt.pi)?
    } else {
        opt.value
    };
    if !opt.converged {
        flags.push("best restart did not converge".to_string());
    }
    let mut v = verdict(optimizer_value, closed.j_star, tolerance);
    if !closed.attained {
        // The Jensen value is only a lower bound here.
        flags.push("closed form not attained: oracle is a lower bound".to_string());
        if v == Verdict::OptimizerSuboptimal {
            v = Verdict::Match;
        }
    }
    Ok(VerificationReport {
        id: id.to_string(),
        kind: ReductionKind::SqrtSum,
        oracle_value: closed.j_star,
        oracle_exact: None,
        optimizer_value,
        gap: (optimizer_value - closed.j_star).abs(),
        tolerance,
        verdict: v,
        witness: opt.pi.into_vec(),
        target: inst.target.clone(),
        decision: decide_sqrtsum(&q),
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn k33_matches() {
        let inst = stableset_to_blind(&Graph::complete_bipartite(3, 3), 3, &ratio(9, 10)).unwrap();
        let r = verify_instance(&inst, "k33", &OptimizeConfig::default(), DEFAULT_TOLERANCE).unwrap();
        assert_eq!(r.verdict, Verdict::Match);
        assert_eq!(r.oracle_exact, Some(ratio(11, 27)));
        assert!(r.decision);
    }

    #[test]
    fn petersen_j5_is_no() {
        let inst = stableset_to_blind(&Graph::petersen(), 5, &ratio(9, 10)).unwrap();
        assert_eq!(recover_stableset_graph(&inst).unwrap(), Graph::petersen());
        let r = verify_instance(&inst, "petersen", &OptimizeConfig::default(), DEFAULT_TOLERANCE).unwrap();
        assert!(!r.decision);
        assert_eq!(r.verdict, Verdict::Match, "{r:?}");
    }

    #[test]
    fn sqrtsum_matches() {
        let q = SqrtSumInstance::new(vec![4, 9], 5).unwrap();
        let inst = sqrtsum_to_blind(&q).unwrap();
        let r = verify_instance(&inst, "c49", &OptimizeConfig::default(), DEFAULT_TOLERANCE).unwrap();
        assert_eq!(r.verdict, Verdict::Match);
        assert!(r.gap < 1e-6);
        assert!(r.decision);
    }

    #[test]
    fn verdict_classes() {
        assert_eq!(verdict(1.0, 1.0 + 1e-7, 1e-6), Verdict::Match);
        assert_eq!(verdict(1.1, 1.0, 1e-6), Verdict::OptimizerSuboptimal);
        assert_eq!(verdict(0.9, 1.0, 1e-6), Verdict::Inconsistent);
    }

    #[test]
    fn tampered_instance_is_rejected() {
        let mut inst = stableset_to_blind(&Graph::complete(4), 2, &ratio(9, 10)).unwrap();
        inst.target = ratio(1, 1);
        assert!(recover_stableset_graph(&inst).is_err());
    }
}
