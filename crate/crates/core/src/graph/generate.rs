//! Random graph generators for tests, examples and dataset stand-ins.

use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::Graph;
use crate::error::{domain, Result};

/// Erdős–Rényi `G(n, p)`: every unordered pair is an edge independently with
/// probability `p`, so the expected density is `p`.
pub fn gnp<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("edge probability {p} outside [0, 1]"));
    }
    Ok(Graph::from_pair_fn(n, |_, _| rng.random_bool(p)))
}

/// Uniform random graph with exactly `m` edges.
pub fn gnm<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Graph> {
    let max = n * n.saturating_sub(1) / 2;
    if m > max {
        return domain(format!("{m} edges do not fit in a simple graph on {n} vertices"));
    }
    if m > max / 2 {
        let missing = gnm(n, max - m, rng)?;
        return Ok(missing.complement());
    }
    let mut chosen = HashSet::with_capacity(m);
    while chosen.len() < m {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v {
            chosen.insert((u.min(v), u.max(v)));
        }
    }
    Graph::from_edges(n, chosen)
}

/// Parameters of [`community_graph`].
#[derive(Debug, Clone, PartialEq)]
pub struct CommunitySpec {
    pub n: usize,
    pub m: usize,
    pub communities: usize,
    /// Fraction of edges placed inside communities.
    pub within_fraction: f64,
    /// Exponent of the per-vertex attachment weight `rank^(-skew)`; larger
    /// values give heavier-tailed degrees.
    pub skew: f64,
}

impl CommunitySpec {
    /// Shape of a mid-sized social ego network: 1,034 vertices, 26,749
    /// edges, a handful of tight friend circles and a skewed degree sequence.
    pub fn social_ego_network() -> Self {
        Self { n: 1034, m: 26_749, communities: 8, within_fraction: 0.85, skew: 0.6 }
    }
}

/// Planted-partition graph with exactly `spec.m` edges and skewed degrees.
///
/// Community sizes decay geometrically. Each edge first picks "inside" or
/// "across" by `within_fraction`, then draws endpoints by attachment weight
/// (restricted to one community for inside edges). Duplicates are redrawn.
pub fn community_graph<R: Rng + ?Sized>(spec: &CommunitySpec, rng: &mut R) -> Result<Graph> {
    let CommunitySpec { n, m, communities, within_fraction, skew } = *spec;
    if communities == 0 || communities > n {
        return domain("community count must be in 1..=n");
    }
    if !(0.0..=1.0).contains(&within_fraction) {
        return domain("within_fraction must lie in [0, 1]");
    }
    if m > n * (n - 1) / 4 {
        return domain("community_graph is meant for sparse graphs (density below 1/2)");
    }

    let raw: Vec<f64> = (0..communities).map(|c| 0.8f64.powi(c as i32)).collect();
    let total: f64 = raw.iter().sum();
    let mut sizes: Vec<usize> = raw.iter().map(|r| ((r / total) * n as f64).floor().max(2.0) as usize).collect();
    let assigned: usize = sizes.iter().sum();
    if assigned > n {
        return domain("too many communities for n");
    }
    sizes[0] += n - assigned;

    let mut members: Vec<Vec<usize>> = Vec::with_capacity(communities);
    let mut next = 0;
    for &size in &sizes {
        members.push((next..next + size).collect());
        next += size;
    }

    let weight = |rank: usize| (rank as f64 + 1.0).powf(-skew);
    let global_weights: Vec<f64> = members.iter().flat_map(|c| (0..c.len()).map(weight)).collect();
    let global = WeightedIndex::new(&global_weights).expect("positive weights");
    let local: Vec<WeightedIndex<f64>> = members
        .iter()
        .map(|c| WeightedIndex::new((0..c.len()).map(weight)).expect("positive weights"))
        .collect();
    let pair_share: Vec<f64> = sizes.iter().map(|&s| (s * (s - 1)) as f64).collect();
    let pick_community = WeightedIndex::new(&pair_share).expect("communities have pairs");

    let mut chosen: HashSet<(usize, usize)> = HashSet::with_capacity(m);
    while chosen.len() < m {
        let (u, v) = if rng.random_bool(within_fraction) {
            let c = pick_community.sample(rng);
            (members[c][local[c].sample(rng)], members[c][local[c].sample(rng)])
        } else {
            (global.sample(rng), global.sample(rng))
        };
        if u != v {
            chosen.insert((u.min(v), u.max(v)));
        }
    }
    Graph::from_edges(n, chosen)
}
