#![allow(dead_code)]

use ldp_distance::graph::{DistanceMatrix, Graph};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Floyd-Warshall over the adjacency matrix. Independent of the BFS code.
/// Unreachable pairs and pairs farther than `cap` come out as `cap`
/// (infinity when no cap is given).
pub fn floyd_warshall(g: &Graph, cap: Option<u32>) -> DistanceMatrix {
    let n = g.n();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = 0.0;
        for &v in g.neighbors(u) {
            row[v] = 1.0;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    if let Some(cap) = cap {
        let cap = cap as f64;
        for row in d.iter_mut() {
            for x in row.iter_mut() {
                *x = x.min(cap);
            }
        }
    }
    DistanceMatrix::from_rows(d).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdos-Renyi graph built pair by pair, without the library generators.
pub fn bernoulli_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if r.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}
