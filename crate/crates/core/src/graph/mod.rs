//! Undirected simple graphs and all-pairs distance matrices.
//!
//! A [`Graph`] is the ground-truth input of every protocol: each vertex owns
//! its neighbor set and nothing else. [`DistanceMatrix`] holds either the
//! exact hop distances computed by [`exact_all_pairs`] or the estimates a
//! protocol produces.

mod distance;
pub mod generate;
mod io;

pub use distance::{exact_all_pairs, DistanceMatrix, UNREACHABLE};
pub use io::{load_edge_list, read_edge_list_file, write_edge_list, IngestReport, LoadOptions};

use crate::error::{domain, Result};

/// Undirected simple graph stored as per-vertex sorted neighbor lists.
///
/// Construction enforces symmetry, removes self-loops and duplicate edges,
/// and rejects vertex ids outside `[0, n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    /// Graph with `n` vertices and no edges.
    pub fn empty(n: usize) -> Self {
        Self { adjacency: vec![Vec::new(); n], edge_count: 0 }
    }

    pub fn complete(n: usize) -> Self {
        let adjacency = (0..n).map(|u| (0..n).filter(|&v| v != u).collect()).collect();
        Self { adjacency, edge_count: n * n.saturating_sub(1) / 2 }
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|v| (v - 1, v))).expect("path edges are in range")
    }

    /// Star with center `0`.
    pub fn star(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|v| (0, v))).expect("star edges are in range")
    }

    /// Builds a graph from an edge iterator. Self-loops and repeated edges are
    /// dropped; `(u, v)` and `(v, u)` name the same edge.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return domain(format!("edge ({u}, {v}) out of range for n = {n}"));
            }
            if u == v {
                continue;
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Ok(Self::from_raw_lists(adjacency))
    }

    /// Builds a graph from a symmetric boolean predicate evaluated on every
    /// unordered pair `u < v`.
    pub fn from_pair_fn(n: usize, mut has_edge: impl FnMut(usize, usize) -> bool) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for u in 0..n {
            for v in (u + 1)..n {
                if has_edge(u, v) {
                    adjacency[u].push(v);
                    adjacency[v].push(u);
                }
            }
        }
        Self::from_raw_lists(adjacency)
    }

    fn from_raw_lists(mut adjacency: Vec<Vec<usize>>) -> Self {
        let mut degree_sum = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            degree_sum += list.len();
        }
        Self { adjacency, edge_count: degree_sum / 2 }
    }

    /// Number of vertices.
    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    /// Number of undirected edges.
    pub fn m(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Smallest vertex degree (`δ`). Zero for the empty vertex set.
    pub fn min_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Number of distinct values in the degree sequence.
    pub fn distinct_degree_count(&self) -> usize {
        let mut degrees = self.degrees();
        degrees.sort_unstable();
        degrees.dedup();
        degrees.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Row `u` of the adjacency matrix as a dense bit vector.
    pub fn adjacency_row(&self, u: usize) -> Vec<bool> {
        let mut row = vec![false; self.n()];
        for &v in &self.adjacency[u] {
            row[v] = true;
        }
        row
    }

    /// Edge density `Σ dᵢ / (n(n-1))`.
    pub fn density(&self) -> Result<f64> {
        let n = self.n();
        if n < 2 {
            return domain(format!("density needs at least 2 vertices, got {n}"));
        }
        Ok(2.0 * self.edge_count as f64 / (n as f64 * (n as f64 - 1.0)))
    }

    /// Graph on the same vertices whose edges are exactly the non-edges of `self`.
    pub fn complement(&self) -> Graph {
        let n = self.n();
        let adjacency = (0..n)
            .map(|u| {
                let mut present = self.adjacency[u].iter().peekable();
                (0..n)
                    .filter(|&v| {
                        if present.peek() == Some(&&v) {
                            present.next();
                            false
                        } else {
                            v != u
                        }
                    })
                    .collect()
            })
            .collect();
        let edge_count = n * n.saturating_sub(1) / 2 - self.edge_count;
        Graph { adjacency, edge_count }
    }

    /// Relabels vertex `u` as `perm[u]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n() {
            return domain("permutation length differs from vertex count");
        }
        Graph::from_edges(self.n(), self.edges().map(|(u, v)| (perm[u], perm[v])))
    }

    /// Connected component labels, numbered in order of their smallest vertex.
    pub fn components(&self) -> Vec<usize> {
        let n = self.n();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for &v in &self.adjacency[u] {
                    if label[v] == usize::MAX {
                        label[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// Induced subgraph on the largest connected component, vertices renumbered
    /// in increasing order of their original ids. Ties go to the component
    /// containing the smallest vertex.
    pub fn largest_component(&self) -> Graph {
        let label = self.components();
        let count = label.iter().copied().max().map_or(0, |c| c + 1);
        let mut sizes = vec![0usize; count];
        for &c in &label {
            sizes[c] += 1;
        }
        let Some(best) = (0..count).max_by_key(|&c| (sizes[c], std::cmp::Reverse(c))) else {
            return Graph::empty(0);
        };
        let mut new_id = vec![usize::MAX; self.n()];
        let mut next = 0;
        for (u, &c) in label.iter().enumerate() {
            if c == best {
                new_id[u] = next;
                next += 1;
            }
        }
        let edges = self
            .edges()
            .filter(|&(u, _)| label[u] == best)
            .map(|(u, v)| (new_id[u], new_id[v]));
        Graph::from_edges(next, edges).expect("component ids are dense")
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    /// Checks every structural invariant. Used by tests and debug assertions.
    pub fn check_invariants(&self) -> bool {
        let n = self.n();
        let mut degree_sum = 0;
        for (u, list) in self.adjacency.iter().enumerate() {
            degree_sum += list.len();
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return false;
            }
            for &v in list {
                if v >= n || v == u || !self.has_edge(v, u) {
                    return false;
                }
            }
        }
        degree_sum == 2 * self.edge_count
    }
}
