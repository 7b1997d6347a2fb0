//! Undirected simple graphs.

use std::collections::BTreeSet;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Undirected graph without self-loops or parallel edges. Vertices are
/// `0..n`; edges are stored as ordered pairs `(u, v)` with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Duplicate edges (in either orientation) collapse; self-loops and
    /// out-of-range endpoints are errors.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) out of range for {n} vertices",
                    u + 1,
                    v + 1
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {}", u + 1)));
            }
            set.insert((u.min(v), u.max(v)));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &set {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
        }
        Ok(Graph { n, edges: set, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn is_cubic(&self) -> bool {
        (0..self.n).all(|v| self.degree(v) == 3)
    }

    /// First vertex whose degree is not three, with its degree.
    pub fn non_cubic_vertex(&self) -> Option<(usize, usize)> {
        (0..self.n)
            .map(|v| (v, self.degree(v)))
            .find(|&(_, d)| d != 3)
    }

    /// Symmetric 0-1 adjacency matrix.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(u, v) in &self.edges {
            a[(u, v)] = 1.0;
            a[(v, u)] = 1.0;
        }
        a
    }

    /// `y^T (G + I) y`.
    pub fn quadratic_form(&self, y: &[f64]) -> f64 {
        let diag: f64 = y.iter().map(|v| v * v).sum();
        let off: f64 = self.edges.iter().map(|&(u, v)| y[u] * y[v]).sum();
        diag + 2.0 * off
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Graph::new(n, edges).expect("complete graph")
    }

    /// `K_{a,b}` with sides `0..a` and `a..a+b`.
    pub fn complete_bipartite(a: usize, b: usize) -> Self {
        let edges = (0..a).flat_map(|u| (a..a + b).map(move |v| (u, v)));
        Graph::new(a + b, edges).expect("complete bipartite graph")
    }

    pub fn cycle(n: usize) -> Self {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle")
    }

    pub fn path(n: usize) -> Self {
        Graph::new(n, (1..n).map(|i| (i - 1, i))).expect("path")
    }

    /// Prism over an `m`-cycle: two `m`-cycles joined by a perfect matching.
    /// `prism(3)` is the triangular prism.
    pub fn prism(m: usize) -> Self {
        let ring = |off: usize| (0..m).map(move |i| (off + i, off + (i + 1) % m));
        let rungs = (0..m).map(|i| (i, m + i));
        Graph::new(2 * m, ring(0).chain(ring(m)).chain(rungs)).expect("prism")
    }

    /// `d`-dimensional hypercube; `hypercube(3)` is the cube graph Q3.
    pub fn hypercube(d: u32) -> Self {
        let n = 1usize << d;
        let edges = (0..n).flat_map(|u| (0..d).map(move |b| (u, u ^ (1 << b))));
        Graph::new(n, edges).expect("hypercube")
    }

    /// The Petersen graph: outer 5-cycle, inner pentagram, spokes.
    pub fn petersen() -> Self {
        let outer = (0..5).map(|i| (i, (i + 1) % 5));
        let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
        let spokes = (0..5).map(|i| (i, 5 + i));
        Graph::new(10, outer.chain(inner).chain(spokes)).expect("petersen")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_graphs_are_cubic() {
        for g in [
            Graph::complete(4),
            Graph::complete_bipartite(3, 3),
            Graph::prism(3),
            Graph::hypercube(3),
            Graph::petersen(),
        ] {
            assert!(g.is_cubic(), "{g:?}");
            assert_eq!(g.edge_count(), 3 * g.n() / 2);
        }
        assert!(!Graph::path(4).is_cubic());
        assert_eq!(Graph::path(4).non_cubic_vertex(), Some((0, 1)));
    }

    #[test]
    fn rejects_self_loops_and_collapses_duplicates() {
        assert!(Graph::new(2, [(0, 0)]).is_err());
        assert!(Graph::new(2, [(0, 2)]).is_err());
        let g = Graph::new(3, [(0, 1), (1, 0), (1, 2)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!(g.has_edge(1, 0));
    }

    #[test]
    fn quadratic_form_matches_matrix() {
        let g = Graph::petersen();
        let y: Vec<f64> = (0..10).map(|i| (i as f64 + 1.0) / 55.0).collect();
        let a = g.adjacency() + DMatrix::identity(10, 10);
        let yv = nalgebra::DVector::from_column_slice(&y);
        assert!((g.quadratic_form(&y) - yv.dot(&(&a * &yv))).abs() < 1e-15);
    }
}
