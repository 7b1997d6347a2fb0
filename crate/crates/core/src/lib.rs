//! Stochastic blind controllers for discounted MDPs.
//!
//! A blind controller plays the same action distribution at every step,
//! without looking at the state. This crate evaluates such controllers
//! exactly, searches for good ones locally, builds the instances that make
//! the global problem hard, and solves the symmetric special case in which
//! a deterministic controller is always optimal.
//!
//! The companion guide in `book/` walks through each piece; its code
//! snippets are compiled and run as doctests of this crate.

pub mod error;
pub mod generate;
pub mod graph;
pub mod io;
mod linalg;
pub mod mdp;
pub mod optimize;
pub mod oracles;
pub mod rational;
pub mod reductions;

pub use error::{Error, Result};
pub use graph::Graph;
pub use mdp::{
    blind_cost, evaluate_deterministic_blind, occupancy, policy_transition, unrestricted_optimum,
    validate_mdp, BlindController, Mdp, OccupancyVector, ValidationReport,
};
pub use optimize::{
    blind_gradient, minimize_ms_quadratic, optimize_blind, project_simplex, Method,
    OptimizeConfig, OptimizeResult,
};
pub use oracles::{
    decide_sqrtsum, is_tractable_case, max_independent_set, solve_tractable, sqrtsum_optimum,
    verify_instance, Verdict, VerificationReport,
};
pub use rational::Rational;
pub use reductions::{
    reduced_cost_quadratic, sqrtsum_cost_direct, sqrtsum_to_blind, stableset_to_blind,
    ReductionInstance, ReductionKind, ReductionMeta, SqrtSumInstance,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/optimization.md")]
    mod optimization {}
    #[doc = include_str!("../../../book/src/stable-set.md")]
    mod stable_set {}
    #[doc = include_str!("../../../book/src/sqrt-sum.md")]
    mod sqrt_sum {}
    #[doc = include_str!("../../../book/src/tractable.md")]
    mod tractable {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
