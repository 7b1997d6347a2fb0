//! Exact maximum independent set by branch and bound over vertex bitmasks.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest graph the exact search accepts.
pub const MIS_LIMIT: usize = 40;

/// Largest graph the raw subset enumeration accepts.
pub const ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndependentSet {
    pub alpha: usize,
    /// Lexicographically smallest maximum independent set, sorted.
    pub witness: Vec<usize>,
}

fn neighbor_masks(g: &Graph) -> Vec<u64> {
    (0..g.n())
        .map(|v| g.neighbors(v).iter().fold(0u64, |m, &u| m | (1 << u)))
        .collect()
}

struct Search<'a> {
    nbr: &'a [u64],
    best: usize,
}

impl Search<'_> {
    fn run(&mut self, mut cand: u64, mut size: usize) {
        loop {
            if cand == 0 {
                self.best = self.best.max(size);
                return;
            }
            if size + cand.count_ones() as usize <= self.best {
                return;
            }
            // Vertices of degree <= 1 inside the candidate set can always be
            // taken; otherwise branch on a vertex of maximum degree.
            let mut branch = None;
            let mut forced = None;
            let mut bits = cand;
            while bits != 0 {
                let v = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let d = (self.nbr[v] & cand).count_ones();
                if d <= 1 {
                    forced = Some(v);
                    break;
                }
                if branch.is_none_or(|(_, bd)| d > bd) {
                    branch = Some((v, d));
                }
            }
            if let Some(v) = forced {
                cand &= !(self.nbr[v] | (1 << v));
                size += 1;
                continue;
            }
            let (v, _) = branch.expect("nonempty candidate set");
            self.run(cand & !(self.nbr[v] | (1 << v)), size + 1);
            cand &= !(1 << v);
        }
    }
}

fn alpha_of(nbr: &[u64], cand: u64) -> usize {
    let mut s = Search { nbr, best: 0 };
    s.run(cand, 0);
    s.best
}

/// Stability number and the lexicographically smallest maximum independent
/// set. Fails above [`MIS_LIMIT`] vertices.
pub fn max_independent_set(g: &Graph) -> Result<IndependentSet> {
    let n = g.n();
    if n > MIS_LIMIT {
        return Err(Error::SearchBudget { n, limit: MIS_LIMIT });
    }
    let nbr = neighbor_masks(g);
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let alpha = alpha_of(&nbr, all);

    // Canonical witness: take each vertex in order whenever a maximum set
    // containing the choices so far still exists.
    let mut cand = all;
    let mut witness = Vec::with_capacity(alpha);
    for v in 0..n {
        if cand & (1 << v) == 0 {
            continue;
        }
        let rest = cand & !(nbr[v] | (1 << v));
        if witness.len() + 1 + alpha_of(&nbr, rest) == alpha {
            witness.push(v);
            cand = rest;
        } else {
            cand &= !(1 << v);
        }
    }
    Ok(IndependentSet { alpha, witness })
}

/// Raw enumeration of all vertex subsets; used to cross-check the branch and
/// bound on small graphs.
pub fn max_independent_set_enumerate(g: &Graph) -> Result<IndependentSet> {
    let n = g.n();
    if n > ENUMERATION_LIMIT {
        return Err(Error::SearchBudget {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let nbr = neighbor_masks(g);
    let mut best: Option<Vec<usize>> = None;
    for mask in 0u64..(1 << n) {
        let independent = (0..n).all(|v| mask & (1 << v) == 0 || mask & nbr[v] == 0);
        if !independent {
            continue;
        }
        let set: Vec<usize> = (0..n).filter(|v| mask & (1 << v) != 0).collect();
        let better = match &best {
            None => true,
            Some(b) => set.len() > b.len() || (set.len() == b.len() && set < *b),
        };
        if better {
            best = Some(set);
        }
    }
    let witness = best.unwrap_or_default();
    Ok(IndependentSet {
        alpha: witness.len(),
        witness,
    })
}

pub fn is_independent(g: &Graph, set: &[usize]) -> bool {
    set.iter()
        .enumerate()
        .all(|(i, &u)| set[i + 1..].iter().all(|&v| u != v && !g.has_edge(u, v)))
}
