//! Independent ground truth: exact stability numbers, closed-form optima,
//! exact decisions, and the solver for the symmetric special case.

pub mod mis;
pub mod sqrtsum;
pub mod tractable;
pub mod verify;

pub use mis::{max_independent_set, max_independent_set_enumerate, IndependentSet};
pub use sqrtsum::{decide_sqrtsum, sqrtsum_optimum, SqrtSumOptimum};
pub use tractable::{
    convexity_probe, is_tractable_case, matrix_fractional, psd_check, solve_tractable,
    ConvexityReport, TractableForm, TractableSolution,
};
pub use verify::{verify_instance, VerificationReport, Verdict};
