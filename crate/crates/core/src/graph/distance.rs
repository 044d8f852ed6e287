use std::collections::VecDeque;
use std::fmt::Write as _;

use rayon::prelude::*;

use super::Graph;
use crate::error::{domain, Result};

/// Marker stored for vertex pairs with no connecting path.
pub const UNREACHABLE: f64 = f64::INFINITY;

/// Dense `n × n` matrix of pairwise distances, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    /// Matrix with every off-diagonal entry set to `fill` and a zero diagonal.
    pub fn filled(n: usize, fill: f64) -> Self {
        let mut entries = vec![fill; n * n];
        for u in 0..n {
            entries[u * n + u] = 0.0;
        }
        Self { n, entries }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return domain("distance matrix rows must all have length n");
            }
            entries.extend(row);
        }
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.entries[u * self.n + v]
    }

    pub fn set(&mut self, u: usize, v: usize, value: f64) {
        self.entries[u * self.n + v] = value;
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.entries[u * self.n..(u + 1) * self.n]
    }

    /// Iterates `(u, v, d)` over ordered pairs with `u != v`.
    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |u| {
            (0..n).filter(move |&v| v != u).map(move |v| (u, v, self.entries[u * n + v]))
        })
    }

    /// Copy with unreachable entries replaced by `cap`. Finite entries are kept.
    pub fn with_unreachable_as(&self, cap: f64) -> Self {
        let entries = self.entries.iter().map(|&d| if d.is_finite() { d } else { cap }).collect();
        Self { n: self.n, entries }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|u| (u + 1..self.n).all(|v| self.get(u, v) == self.get(v, u)))
    }

    pub fn has_zero_diagonal(&self) -> bool {
        (0..self.n).all(|u| self.get(u, u) == 0.0)
    }

    /// Plain-text dump: first line `n`, then one whitespace-separated row per
    /// line, `inf` for unreachable.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.n * self.n * 3 + 16);
        let _ = writeln!(out, "{}", self.n);
        for u in 0..self.n {
            for (i, d) in self.row(u).iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{d}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let n: usize = match lines.next().map(str::trim).map(str::parse) {
            Some(Ok(n)) => n,
            _ => return domain("distance matrix text must start with n"),
        };
        let mut entries = Vec::with_capacity(n * n);
        for line in lines.take(n) {
            for token in line.split_ascii_whitespace() {
                match token.parse::<f64>() {
                    Ok(d) => entries.push(d),
                    Err(_) => return domain(format!("bad distance token {token:?}")),
                }
            }
        }
        if entries.len() != n * n {
            return domain(format!("expected {} entries, found {}", n * n, entries.len()));
        }
        Ok(Self { n, entries })
    }
}

fn bfs_row(g: &Graph, source: usize, cap: Option<u32>) -> Vec<f64> {
    let n = g.n();
    let limit = cap.map(|c| c as usize);
    let mut hops = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    hops[source] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        if limit.is_some_and(|c| hops[u] >= c) {
            continue;
        }
        for &v in g.neighbors(u) {
            if hops[v] == usize::MAX {
                hops[v] = hops[u] + 1;
                queue.push_back(v);
            }
        }
    }
    hops.into_iter()
        .map(|h| match (h, cap) {
            (usize::MAX, Some(c)) => c as f64,
            (usize::MAX, None) => UNREACHABLE,
            (h, Some(c)) => h.min(c as usize) as f64,
            (h, None) => h as f64,
        })
        .collect()
}

/// All-pairs hop distances, one BFS per source vertex.
///
/// With `cap`, unreachable pairs and pairs farther than `cap` hops get `cap`;
/// without it, unreachable pairs get [`UNREACHABLE`].
pub fn exact_all_pairs(g: &Graph, cap: Option<u32>) -> DistanceMatrix {
    let n = g.n();
    let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| bfs_row(g, s, cap)).collect();
    DistanceMatrix { n, entries: rows.into_iter().flatten().collect() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_is_all_ones() {
        let d = exact_all_pairs(&Graph::complete(3), None);
        assert!(d.off_diagonal().all(|(_, _, x)| x == 1.0));
        assert!(d.has_zero_diagonal());
    }

    #[test]
    fn path_end_to_end() {
        let d = exact_all_pairs(&Graph::path(4), None);
        assert_eq!(d.get(0, 3), 3.0);
        assert_eq!(d.get(3, 0), 3.0);
        assert_eq!(exact_all_pairs(&Graph::path(4), Some(2)).get(0, 3), 2.0);
    }

    #[test]
    fn disconnected_pairs_take_the_cap() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let capped = exact_all_pairs(&g, Some(6));
        assert_eq!(capped.get(0, 2), 6.0);
        assert_eq!(capped.get(3, 1), 6.0);
        assert_eq!(capped.get(0, 1), 1.0);
        let raw = exact_all_pairs(&g, None);
        assert_eq!(raw.get(0, 2), UNREACHABLE);
        assert_eq!(raw.with_unreachable_as(6.0), capped);
    }

    #[test]
    fn text_round_trip_keeps_unreachable() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        let d = exact_all_pairs(&g, None);
        assert_eq!(DistanceMatrix::from_text(&d.to_text()).unwrap(), d);
    }
}
