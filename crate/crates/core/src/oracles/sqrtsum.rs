//! Closed-form optimum of the sum-of-square-roots instance and an exact
//! decision procedure for `sum_i sqrt(c_i) <= d`.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::error::Result;
use crate::mdp::BlindController;
use crate::rational::{self, Rational};
use crate::reductions::SqrtSumInstance;

/// Stationary point of the instance cost where every term of the Jensen
/// bound is equal.
#[derive(Debug, Clone, PartialEq)]
pub struct SqrtSumOptimum {
    /// `pi*_i = ((n + eps) sqrt(c_i) / sum_j sqrt(c_j) - 1) / eps`.
    pub pi_star: Vec<f64>,
    /// `(sum_i sqrt(c_i))^2 / (n (n + eps))`, a lower bound on every
    /// controller's cost and the optimum whenever `attained`.
    pub j_star: f64,
    /// Whether `pi_star` lies in the simplex. It does whenever every
    /// `c_i >= 1`; a zero entry can push a coordinate negative.
    pub attained: bool,
}

impl SqrtSumOptimum {
    pub fn controller(&self) -> Option<BlindController> {
        if self.attained {
            BlindController::new(self.pi_star.clone()).ok()
        } else {
            None
        }
    }
}

/// Rational coefficients of the closed form, written over the formal weights
/// `u_i = sqrt(c_i) / sum_j sqrt(c_j)` (which sum to one): `pi*_i = scale *
/// u_i - offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormCoefficients {
    pub n: usize,
    pub scale: Rational,
    pub offset: Rational,
}

impl ClosedFormCoefficients {
    /// `sum_i pi*_i = scale * sum_i u_i - n * offset = scale - n * offset`,
    /// exactly.
    pub fn coordinate_sum(&self) -> Rational {
        &self.scale - rational::from_integer(self.n as u64) * &self.offset
    }
}

pub fn closed_form_coefficients(inst: &SqrtSumInstance) -> Result<ClosedFormCoefficients> {
    let eps = inst.epsilon()?;
    let n = rational::from_integer(inst.n() as u64);
    Ok(ClosedFormCoefficients {
        n: inst.n(),
        scale: (&n + &eps) / &eps,
        offset: Rational::one() / &eps,
    })
}

pub fn sqrtsum_optimum(inst: &SqrtSumInstance) -> Result<SqrtSumOptimum> {
    let eps = rational::to_f64(&inst.epsilon()?);
    let n = inst.n() as f64;
    let roots: Vec<f64> = inst.c.iter().map(|&c| (c as f64).sqrt()).collect();
    let s: f64 = roots.iter().sum();
    let pi_star: Vec<f64> = roots
        .iter()
        .map(|r| ((n + eps) * r / s - 1.0) / eps)
        .collect();
    let attained = pi_star.iter().all(|&p| (0.0..=1.0 + 1e-12).contains(&p));
    Ok(SqrtSumOptimum {
        pi_star,
        j_star: s * s / (n * (n + eps)),
        attained,
    })
}

/// Integer enclosure `lo <= 2^bits * sqrt(c) <= hi`, with `lo == hi` when
/// the scaled value is a perfect square.
fn scaled_root(c: u64, bits: u32) -> (BigUint, BigUint) {
    let scaled = BigUint::from(c) << (2 * bits);
    let lo = scaled.sqrt();
    if &lo * &lo == scaled {
        (lo.clone(), lo)
    } else {
        let hi = &lo + 1u32;
        (lo, hi)
    }
}

/// Enclosure of `2^bits * sum_i sqrt(c_i)`.
fn scaled_sum(c: &[u64], bits: u32) -> (BigUint, BigUint) {
    c.iter().fold((BigUint::zero(), BigUint::zero()), |(l, h), &ci| {
        let (lo, hi) = scaled_root(ci, bits);
        (l + lo, h + hi)
    })
}

/// Decides `sum_i sqrt(c_i) <= d` exactly.
///
/// Each root is enclosed between consecutive multiples of `2^-bits` using
/// integer square roots, and the precision doubles until the enclosure of
/// the sum lies on one side of `d`. When every `c_i` is a perfect square the
/// enclosure is exact on the first pass. Otherwise the sum is irrational
/// (square roots of distinct squarefree integers are linearly independent
/// over the rationals), so it never equals `d` and refinement terminates.
pub fn decide_sqrtsum(inst: &SqrtSumInstance) -> bool {
    decide_with_precision(inst).0
}

/// Like [`decide_sqrtsum`], also returning the number of fractional bits
/// that settled the comparison.
pub fn decide_with_precision(inst: &SqrtSumInstance) -> (bool, u32) {
    let mut bits = 0u32;
    loop {
        let (lo, hi) = scaled_sum(&inst.c, bits);
        let d = BigUint::from(inst.d) << bits;
        if hi <= d {
            return (true, bits);
        }
        if lo > d {
            return (false, bits);
        }
        bits = if bits == 0 { 16 } else { bits * 2 };
    }
}

/// Second route to the same decision: compares the closed-form optimum
/// `j* = S^2 / (n (n + eps))` against the target `r` as rationals, using an
/// enclosure of `S^2` that is refined until the comparison is settled.
pub fn optimum_within_target(inst: &SqrtSumInstance) -> Result<bool> {
    let r = inst.target()?;
    let eps = inst.epsilon()?;
    let denom = rational::from_integer(inst.n() as u64) * (rational::from_integer(inst.n() as u64) + eps);
    let mut bits = 8u32;
    loop {
        let (lo, hi) = scaled_sum(&inst.c, bits);
        let scale = BigInt::one() << (2 * bits);
        let sq = |v: BigUint| Rational::new(BigInt::from(&v * &v), scale.clone()) / &denom;
        let (j_lo, j_hi) = (sq(lo), sq(hi));
        if j_hi <= r {
            return Ok(true);
        }
        if j_lo > r {
            return Ok(false);
        }
        bits *= 2;
        if bits > 1 << 16 {
            // Only reachable for an irrational sum equal to d, which cannot
            // happen; fall back to the direct decision.
            return Ok(decide_sqrtsum(inst));
        }
    }
}

pub(crate) fn epsilon_f64(inst: &SqrtSumInstance) -> Result<f64> {
    Ok(inst.epsilon()?.to_f64().unwrap_or(f64::INFINITY))
}
