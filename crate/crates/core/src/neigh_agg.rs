//! Neighbor aggregation: all-pairs distances from perturbed local views.
//!
//! Each vertex starts from the only distances it knows (0 to itself, 1 to
//! its neighbors, `T` to everyone else), perturbs that vector once, and then
//! takes part in `T − 1` synchronous rounds. In round `k` vertex `u` replaces
//! every non-neighbor entry `j` by
//!
//! ```text
//! D̂ᵤ⁽ᵏ⁾[j] = min( min_{i ∈ N(u)} D̂ᵢ⁽ᵏ⁻¹⁾[j] + 1,  D̂ᵤ⁽ᵏ⁻¹⁾[j] )
//! ```
//!
//! Only the perturbed round-0 vectors depend on private data, so every
//! later round is post-processing. Entries of `u`'s neighbors and of `u`
//! itself are never updated.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::graph::{DistanceMatrix, Graph};
use crate::mechanisms::{perturb_distance_vector, Mechanism, PrivacyParams, RngStream, StreamRole};

pub const DEFAULT_DIAMETER_SLACK: u32 = 1;

/// One vertex's distance estimates after `round` aggregations.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceVector {
    pub owner: usize,
    pub round: usize,
    pub entries: Vec<f64>,
}

/// Round-0 vector of `u`: 0 for itself, 1 for neighbors, `threshold` otherwise.
pub fn init_distance_vector(g: &Graph, u: usize, threshold: u32) -> Result<DistanceVector> {
    if u >= g.n() {
        return domain(format!("vertex {u} out of range for n = {}", g.n()));
    }
    if threshold < 1 {
        return domain("distance threshold must be at least 1");
    }
    let mut entries = vec![threshold as f64; g.n()];
    for &v in g.neighbors(u) {
        entries[v] = 1.0;
    }
    entries[u] = 0.0;
    Ok(DistanceVector { owner: u, round: 0, entries })
}

/// One synchronous aggregation round. Reads only `previous` and returns the
/// next round's vectors, so the result does not depend on vertex order.
pub fn aggregate_round(previous: &[DistanceVector], g: &Graph) -> Result<Vec<DistanceVector>> {
    let n = g.n();
    if previous.len() != n {
        return domain(format!("expected {n} vectors, got {}", previous.len()));
    }
    let round = previous.first().map_or(0, |v| v.round);
    for (u, v) in previous.iter().enumerate() {
        if v.owner != u || v.entries.len() != n {
            return domain(format!("vector {u} has owner {} and length {}", v.owner, v.entries.len()));
        }
        if v.round != round {
            return domain(format!("round mismatch: vector {u} is at round {}, expected {round}", v.round));
        }
    }

    Ok((0..n)
        .into_par_iter()
        .map(|u| {
            let own = &previous[u].entries;
            let mut next = own.clone();
            for &i in g.neighbors(u) {
                for (slot, &d) in next.iter_mut().zip(&previous[i].entries) {
                    let candidate = d + 1.0;
                    if candidate < *slot {
                        *slot = candidate;
                    }
                }
            }
            next[u] = own[u];
            for &i in g.neighbors(u) {
                next[i] = own[i];
            }
            DistanceVector { owner: u, round: round + 1, entries: next }
        })
        .collect())
}

/// Runs the protocol and returns the final estimates, row `u` being vertex
/// `u`'s view. Laplace estimates are clamped into `[1, T]` at the end.
pub fn run_neigh_agg(g: &Graph, params: &PrivacyParams, rng: &RngStream) -> Result<DistanceMatrix> {
    run_neigh_agg_observed(g, params, rng, |_, _| Ok(()))
}

/// Like [`run_neigh_agg`], calling `observe(k, vectors)` with the perturbed
/// round-0 vectors and again after every round `k = 1..T-1`.
pub fn run_neigh_agg_observed<F>(g: &Graph, params: &PrivacyParams, rng: &RngStream, mut observe: F) -> Result<DistanceMatrix>
where
    F: FnMut(usize, &[DistanceVector]) -> Result<()>,
{
    params.eps()?;
    let threshold = params.check_threshold()?;

    let mut vectors = (0..g.n())
        .into_par_iter()
        .map(|u| {
            let mut stream = rng.substream(StreamRole::DistanceReport, u as u64);
            perturb_distance_vector(&init_distance_vector(g, u, threshold)?, params, &mut stream)
        })
        .collect::<Result<Vec<_>>>()?;
    observe(0, &vectors)?;

    for k in 1..threshold as usize {
        vectors = aggregate_round(&vectors, g)?;
        observe(k, &vectors)?;
    }

    let cap = threshold as f64;
    let rows = vectors
        .into_iter()
        .map(|v| {
            let owner = v.owner;
            let mut entries = v.entries;
            if params.mechanism == Mechanism::Laplace {
                for d in entries.iter_mut() {
                    *d = d.clamp(1.0, cap);
                }
            }
            entries[owner] = 0.0;
            entries
        })
        .collect();
    DistanceMatrix::from_rows(rows)
}

/// Writes one round as text: a `# round k` line, then one row per vertex.
pub fn write_round_snapshot<W: Write>(round: usize, vectors: &[DistanceVector], mut out: W) -> Result<()> {
    writeln!(out, "# round {round}")?;
    for v in vectors {
        let row: Vec<String> = v.entries.iter().map(f64::to_string).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

/// Diameter bound `⌈3(n − t)/(δ + 1)⌉ + slack`, where `δ` is the minimum
/// degree and `t` the number of distinct degrees. Meant for connected graphs;
/// the constant `slack` stands in for an unspecified additive term and is a
/// heuristic.
pub fn diameter_upper_bound(g: &Graph, slack: u32) -> Result<u32> {
    let n = g.n();
    if n == 0 {
        return domain("diameter bound of the empty graph");
    }
    let distinct = g.distinct_degree_count();
    let delta = g.min_degree();
    let numerator = 3 * (n - distinct);
    Ok(numerator.div_ceil(delta + 1) as u32 + slack)
}
