//! Local search for good blind controllers.
//!
//! Jointly in the occupancy and the controller the program is bilinear and
//! nonconvex, and finding the global optimum is NP-hard in general. The
//! routines here are multistart local methods: they return the best local
//! solution found and make no global claim.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg;
use crate::mdp::{self, argmin, BlindController, Mdp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    FrankWolfe,
    ProjectedGradient,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::FrankWolfe => "frank_wolfe",
            Method::ProjectedGradient => "projected_gradient",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "frank_wolfe" | "frank-wolfe" | "fw" => Ok(Method::FrankWolfe),
            "projected_gradient" | "projected-gradient" | "pg" => Ok(Method::ProjectedGradient),
            _ => Err(format!("unknown method `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeConfig {
    pub restarts: usize,
    /// Iteration cap per restart.
    pub max_iters: usize,
    /// Frank-Wolfe gap / projected-gradient step threshold.
    pub tol: f64,
    pub seed: u64,
    pub method: Method,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            restarts: 32,
            max_iters: 5000,
            tol: 1e-9,
            seed: 0,
            method: Method::FrankWolfe,
        }
    }
}

impl OptimizeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidInstance("restarts must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidInstance("max_iters must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInstance("tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub pi: BlindController,
    pub value: f64,
    pub iterations_used: usize,
    pub restart_index: usize,
    pub converged: bool,
}

/// Outcome of one local search.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSearch {
    pub pi: BlindController,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective at the start point and after every accepted step.
    pub trace: Vec<f64>,
}

/// Gradient of `J(pi) = x(pi)^T C pi` with respect to the action weights,
/// through the occupancy system. One forward solve for `x` and one adjoint
/// solve `(I - gamma T)^T w = C pi` give
/// `g_a = (C^T x)_a + gamma * w . (P_a x)`.
pub fn blind_gradient(m: &Mdp, pi: &BlindController) -> Result<Vec<f64>> {
    if pi.len() != m.k() {
        return Err(Error::DimensionMismatch {
            what: "controller length",
            expected: m.k(),
            got: pi.len(),
        });
    }
    Ok(gradient_with_value(m, pi.as_slice())?.0)
}

fn gradient_with_value(m: &Mdp, pi: &[f64]) -> Result<(Vec<f64>, f64)> {
    let gamma = m.gamma();
    let t = mdp::mixture(m, pi);
    let system = linalg::resolvent_system(&t, gamma);
    let x = linalg::solve(system.clone(), &(m.mu() * (1.0 - gamma)))?;
    let cpi = m.cost() * DVector::from_column_slice(pi);
    let w = linalg::solve(system.transpose(), &cpi)?;
    let ctx = m.cost().tr_mul(&x);
    let g = (0..m.k())
        .map(|a| ctx[a] + gamma * w.dot(&(m.trans(a) * &x)))
        .collect();
    Ok((g, x.dot(&cpi)))
}

/// Euclidean projection onto the probability simplex (sort and threshold).
pub fn project_simplex(v: &[f64]) -> BlindController {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    BlindController::from_rounded(v.iter().map(|&x| (x - theta).max(0.0)).collect())
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimizes `f` on `[0, hi]` by golden-section search down to an interval
/// width of `1e-12`. The right endpoint is also considered; the left one is
/// the caller's current point.
fn golden_section<F>(hi: f64, mut f: F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut best = (hi, f(hi)?);
    let (mut lo, mut hi) = (0.0, hi);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > 1e-12 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    for cand in [(x1, f1), (x2, f2)] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    Ok(best)
}

/// Relative size of rounding noise in a cost evaluation.
const VALUE_NOISE: f64 = 4.0 * f64::EPSILON;

/// Refines a golden-section step by bisection on the sign of the exact
/// directional derivative. Close to a minimum the cost varies below its own
/// rounding error and value comparisons stall, while the derivative is still
/// accurate. The refined step is kept only if its value is no worse than
/// `v0` up to rounding.
fn polish<D, F>(t0: f64, v0: f64, t_max: f64, mut slope: D, mut f: F) -> Result<(f64, f64)>
where
    D: FnMut(f64) -> Result<f64>,
    F: FnMut(f64) -> Result<f64>,
{
    let d0 = slope(t0)?;
    if d0 == 0.0 || (d0 < 0.0 && t0 >= t_max) {
        return Ok((t0, v0));
    }
    let (mut lo, mut hi) = (t0, t0);
    let mut width = 1e-9 * t_max;
    if d0 > 0.0 {
        loop {
            lo = (t0 - width).max(0.0);
            if lo == 0.0 || slope(lo)? <= 0.0 {
                break;
            }
            width *= 4.0;
        }
    } else {
        loop {
            hi = (t0 + width).min(t_max);
            if hi == t_max || slope(hi)? >= 0.0 {
                break;
            }
            width *= 4.0;
        }
        if hi == t_max && slope(hi)? < 0.0 {
            let v = f(hi)?;
            return Ok(if v <= v0 { (hi, v) } else { (t0, v0) });
        }
    }
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let v = f(t)?;
    if v <= v0 + VALUE_NOISE * v0.abs().max(1.0) {
        Ok((t, v))
    } else {
        Ok((t0, v0))
    }
}

/// Frank-Wolfe with away steps. Each iteration either moves toward the
/// best vertex `e_s` or away from the worst vertex `e_v` in the support,
/// whichever promises more decrease; away steps can drop a coordinate to
/// exactly zero, which plain Frank-Wolfe only approaches.
fn frank_wolfe(m: &Mdp, start: &BlindController, max_iters: usize, tol: f64) -> Result<LocalSearch> {
    let k = m.k();
    let mut pi = start.as_slice().to_vec();
    let mut value = mdp::cost_at(m, &pi)?;
    let mut trace = vec![value];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iters {
        iterations += 1;
        let (g, _) = gradient_with_value(m, &pi)?;
        let s = argmin(g.iter().copied());
        let dot: f64 = g.iter().zip(&pi).map(|(ga, pa)| ga * pa).sum();
        let gap = dot - g[s];
        if gap < tol {
            converged = true;
            break;
        }
        let v = argmin((0..k).map(|a| if pi[a] > 0.0 { -g[a] } else { f64::INFINITY }));
        let away_gap = g[v] - dot;

        let (target, sign, t_max) = if gap >= away_gap || pi[v] >= 1.0 {
            (s, 1.0, 1.0)
        } else {
            (v, -1.0, pi[v] / (1.0 - pi[v]))
        };
        let point = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = (0..k)
                .map(|a| {
                    let e = if a == target { 1.0 } else { 0.0 };
                    pi[a] + sign * t * (e - pi[a])
                })
                .collect();
            if sign < 0.0 && t == t_max {
                p[target] = 0.0;
            }
            p
        };
        let (t, val) = golden_section(t_max, |t| mdp::cost_at(m, &point(t)))?;
        let slope = |t: f64| -> Result<f64> {
            let p = point(t);
            let (gt, _) = gradient_with_value(m, &p)?;
            Ok(sign * (gt[target] - gt.iter().zip(&pi).map(|(a, b)| a * b).sum::<f64>()))
        };
        let (t, val) = polish(t, val, t_max, slope, |t| mdp::cost_at(m, &point(t)))?;
        if t == 0.0 || val > value + VALUE_NOISE * value.abs().max(1.0) {
            // No decrease along the chosen direction.
            break;
        }
        pi = BlindController::from_rounded(point(t)).into_vec();
        value = mdp::cost_at(m, &pi)?;
        trace.push(value);
    }
    Ok(LocalSearch {
        pi: BlindController::from_rounded(pi),
        value,
        iterations,
        converged,
        trace,
    })
}

const ARMIJO_C: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;

fn projected_gradient(
    m: &Mdp,
    start: &BlindController,
    max_iters: usize,
    tol: f64,
) -> Result<LocalSearch> {
    let mut pi = start.clone();
    let mut value = mdp::cost_at(m, pi.as_slice())?;
    let mut trace = vec![value];
    let mut converged = false;
    let mut iterations = 0;
    let mut step = 1.0;

    'outer: while iterations < max_iters {
        iterations += 1;
        let (g, _) = gradient_with_value(m, pi.as_slice())?;
        loop {
            let trial: Vec<f64> = pi
                .as_slice()
                .iter()
                .zip(&g)
                .map(|(p, ga)| p - step * ga)
                .collect();
            let cand = project_simplex(&trial);
            let moved: f64 = cand
                .as_slice()
                .iter()
                .zip(pi.as_slice())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if moved < tol {
                converged = true;
                break 'outer;
            }
            let decrease: f64 = g
                .iter()
                .zip(cand.as_slice().iter().zip(pi.as_slice()))
                .map(|(ga, (a, b))| ga * (a - b))
                .sum();
            let cand_value = mdp::cost_at(m, cand.as_slice())?;
            if cand_value <= value + ARMIJO_C * decrease && cand_value <= value {
                pi = cand;
                value = cand_value;
                trace.push(value);
                step *= 2.0;
                break;
            }
            step *= BACKTRACK;
        }
    }
    Ok(LocalSearch {
        pi,
        value,
        iterations,
        converged,
        trace,
    })
}

/// One local search from `start`.
pub fn local_search(
    m: &Mdp,
    start: &BlindController,
    method: Method,
    max_iters: usize,
    tol: f64,
) -> Result<LocalSearch> {
    if start.len() != m.k() {
        return Err(Error::DimensionMismatch {
            what: "controller length",
            expected: m.k(),
            got: start.len(),
        });
    }
    match method {
        Method::FrankWolfe => frank_wolfe(m, start, max_iters, tol),
        Method::ProjectedGradient => projected_gradient(m, start, max_iters, tol),
    }
}

/// Deterministic generator for restart `stream` of a run seeded with `seed`.
pub fn restart_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform sample from the simplex (Dirichlet with all parameters one).
pub fn sample_simplex<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let sum: f64 = draws.iter().sum();
    draws.into_iter().map(|v| v / sum).collect()
}

/// Start point of restart `r`: the `k` vertices first when there are at
/// least `k` restarts, then uniform random points.
pub fn start_point(k: usize, r: usize, cfg: &OptimizeConfig) -> BlindController {
    if cfg.restarts >= k && r < k {
        BlindController::vertex(k, r)
    } else {
        let mut rng = restart_rng(cfg.seed, r as u64);
        BlindController::from_rounded(sample_simplex(k, &mut rng))
    }
}

/// Multistart local optimization of the blind controller. Restarts run in
/// parallel; the best value wins and ties go to the lower restart index, so
/// the result does not depend on scheduling.
pub fn optimize_blind(m: &Mdp, cfg: &OptimizeConfig) -> Result<OptimizeResult> {
    cfg.validate()?;
    let runs: Vec<LocalSearch> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let start = start_point(m.k(), r, cfg);
            local_search(m, &start, cfg.method, cfg.max_iters, cfg.tol)
        })
        .collect::<Result<_>>()?;
    let restart_index = best_of(runs.iter().map(|r| r.value));
    let run = &runs[restart_index];
    Ok(OptimizeResult {
        pi: run.pi.clone(),
        value: run.value,
        iterations_used: run.iterations,
        restart_index,
        converged: run.converged,
    })
}

/// Index of the smallest value; values within 1e-15 count as equal and the
/// earlier index wins.
fn best_of(values: impl Iterator<Item = f64>) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        match best {
            Some((_, b)) if !(v < b - 1e-15) => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|b| b.0).unwrap_or(0)
}

/// Result of minimizing `y^T (G + I) y` over the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticMinimum {
    pub y: Vec<f64>,
    pub value: f64,
    pub converged: bool,
}

fn replicator(g: &Graph, start: Vec<f64>, max_iters: usize, tol: f64) -> QuadraticMinimum {
    let n = g.n();
    let mut y = start;
    let mut converged = false;
    let ay = |y: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| y[i] + g.neighbors(i).iter().map(|&j| y[j]).sum::<f64>())
            .collect()
    };
    for _ in 0..max_iters {
        // Replicator step on 2E - (G + I): strictly positive payoffs, so the
        // iterate stays in the simplex and y^T (G + I) y never increases.
        let a = ay(&y);
        let value: f64 = y.iter().zip(&a).map(|(yi, ai)| yi * ai).sum();
        let next: Vec<f64> = y
            .iter()
            .zip(&a)
            .map(|(yi, ai)| yi * (2.0 - ai) / (2.0 - value))
            .collect();
        let sum: f64 = next.iter().sum();
        let next: Vec<f64> = next.into_iter().map(|v| v / sum).collect();
        let change: f64 = next.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        y = next;
        if change < tol {
            converged = true;
            break;
        }
    }
    let value = g.quadratic_form(&y);
    QuadraticMinimum { y, value, converged }
}

/// Multistart replicator dynamics for `min_{y in simplex} y^T (G + I) y`,
/// whose optimum is `1 / alpha(G)`. Starts: every vertex, then
/// `cfg.restarts` uniform random points.
pub fn minimize_ms_quadratic(g: &Graph, cfg: &OptimizeConfig) -> Result<QuadraticMinimum> {
    cfg.validate()?;
    let n = g.n();
    let runs: Vec<QuadraticMinimum> = (0..n + cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r < n {
                let mut e = vec![0.0; n];
                e[r] = 1.0;
                e
            } else {
                sample_simplex(n, &mut restart_rng(cfg.seed, r as u64))
            };
            replicator(g, start, cfg.max_iters, cfg.tol)
        })
        .collect();
    let best = best_of(runs.iter().map(|r| r.value));
    Ok(runs.into_iter().nth(best).expect("at least one start"))
}
