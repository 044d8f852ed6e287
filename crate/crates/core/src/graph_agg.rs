//! Two-round synthetic graph generation.
//!
//! Round one collects Laplace-noised degrees and turns them into a density
//! estimate `γ̂`. Round two has every vertex report its whole neighbor row
//! through randomized response; the curator then decides each pair from the
//! two reports it holds:
//!
//! * [`Variant::AndOnly`] keeps an edge only if both endpoints report it, with
//!   the flip probability tied to the density (`p = 2γ̂`) so the expected
//!   density of the output matches the input.
//! * [`Variant::AndOr`] takes the flip probability from a free budget `ε₂`
//!   and mixes AND with OR per pair, AND chosen with probability
//!   `α = (2γ̂ + p − 2) / (2p − 2)`.
//!
//! [`run_rnl_baseline`] is the single-report baseline in which vertex `u`
//! only reports positions `u+1..n`.

use std::fmt;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::graph::{write_edge_list, Graph};
use crate::mechanisms::{
    bit_flip_probability, check_budget, noisy_degree, perturb_neighbor_bits, rr_bit, PrivacyParams,
    RngStream, StreamRole,
};

/// One vertex's (possibly perturbed) row of the adjacency matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborBits {
    pub owner: usize,
    pub bits: Vec<bool>,
}

impl NeighborBits {
    pub fn from_graph(g: &Graph, owner: usize) -> Self {
        Self { owner, bits: g.adjacency_row(owner) }
    }
}

/// Curator-side combination rule for the two reports of each pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    AndOnly,
    AndOr,
}

/// Parameters the run actually used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    /// Flip probability of the neighbor reports.
    pub p: f64,
    /// AND probability; `None` for runs without a mixture.
    pub alpha: Option<f64>,
    pub eps1: Option<f64>,
    pub eps2: f64,
    /// Whether the complement graph was aggregated and the result complemented back.
    pub complemented: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticGraph {
    pub graph: Graph,
    /// Density estimate from the noisy degree round, if there was one.
    pub gamma_hat: Option<f64>,
    /// Realized density of `graph`.
    pub gamma_bar: f64,
    pub calibration: Calibration,
    pub warnings: Vec<String>,
}

impl SyntheticGraph {
    fn new(graph: Graph, gamma_hat: Option<f64>, calibration: Calibration, warnings: Vec<String>) -> Self {
        let n = graph.n() as f64;
        let gamma_bar = if graph.n() < 2 { 0.0 } else { graph.m() as f64 / (n * (n - 1.0) / 2.0) };
        Self { graph, gamma_hat, gamma_bar, calibration, warnings }
    }

    /// `key=value` summary used as the edge-list header.
    pub fn header(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        format!(
            "gamma_hat={} gamma_bar={} p={} alpha={} eps1={} eps2={}",
            opt(self.gamma_hat),
            self.gamma_bar,
            self.calibration.p,
            opt(self.calibration.alpha),
            opt(self.calibration.eps1),
            self.calibration.eps2
        )
    }

    /// Edge list with a one-line `#` header carrying the calibration.
    pub fn write_edge_list<W: Write>(&self, out: W) -> Result<()> {
        write_edge_list(&self.graph, out, Some(&self.header()))
    }
}

/// `Σ d̂ᵢ / (n(n−1))`, clamped to `[1/(n(n−1)), 1 − 1/(n(n−1))]`.
pub fn estimate_density(noisy_degrees: &[f64], n: usize) -> Result<f64> {
    if n < 2 {
        return domain(format!("density estimation needs n >= 2, got {n}"));
    }
    if noisy_degrees.len() != n {
        return domain(format!("expected {n} noisy degrees, got {}", noisy_degrees.len()));
    }
    let pairs = n as f64 * (n as f64 - 1.0);
    let raw = noisy_degrees.iter().sum::<f64>() / pairs;
    Ok(raw.clamp(1.0 / pairs, 1.0 - 1.0 / pairs))
}

/// Budget `ε₂ = ln(1/(2γ̂) − 1)` whose flip probability `1/(e^ε₂ + 1)` is
/// exactly `2γ̂`. Defined only for `0 < γ̂ < 1/4`.
pub fn epsilon2_for_density(gamma_hat: f64) -> Result<f64> {
    if !(gamma_hat > 0.0 && gamma_hat < 0.25) {
        return Err(Error::Calibration(format!(
            "density estimate {gamma_hat} leaves no positive eps2 (needs 0 < gamma_hat < 1/4); \
             use the AND/OR variant or aggregate the complement graph"
        )));
    }
    Ok((1.0 / (2.0 * gamma_hat) - 1.0).ln())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaCalibration {
    /// Value used, inside `[0, 1]`.
    pub alpha: f64,
    /// Formula value before clamping.
    pub raw: f64,
    pub clamped: bool,
}

impl AlphaCalibration {
    pub fn warning(&self, gamma_hat: f64, p: f64) -> Option<String> {
        self.clamped.then(|| {
            format!(
                "alpha {:.6} clamped to {} (p = {p:.6} exceeds the unbiased range for gamma_hat = {gamma_hat:.6})",
                self.raw, self.alpha
            )
        })
    }
}

/// Distance from 1 within which `α` is taken to be exactly 1. A `p`
/// calibrated through `ε₂` only reproduces `2γ̂` up to rounding.
pub const ALPHA_SNAP: f64 = 1e-12;

/// AND probability `α = (2γ̂ + p − 2)/(2p − 2)` for the AND/OR mixture,
/// clamped into `[0, 1]`. Clamping at 1 happens exactly when `p > 2γ̂`.
pub fn alpha_for(gamma_hat: f64, p: f64) -> Result<AlphaCalibration> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("flip probability {p} must lie strictly inside (0, 1)"));
    }
    let raw = (2.0 * gamma_hat + p - 2.0) / (2.0 * p - 2.0);
    if (raw - 1.0).abs() <= ALPHA_SNAP {
        return Ok(AlphaCalibration { alpha: 1.0, raw, clamped: false });
    }
    let alpha = raw.clamp(0.0, 1.0);
    Ok(AlphaCalibration { alpha, raw, clamped: alpha != raw })
}

fn check_lists(lists: &[NeighborBits]) -> Result<usize> {
    let n = lists.len();
    for (i, list) in lists.iter().enumerate() {
        if list.owner != i {
            return domain(format!("list {i} belongs to vertex {}", list.owner));
        }
        if list.bits.len() != n {
            return domain(format!("list of vertex {i} has length {}, expected {n}", list.bits.len()));
        }
    }
    Ok(n)
}

/// Keeps pair `(i, j)` iff both `N̂ᵢ[j]` and `N̂ⱼ[i]` are set.
pub fn aggregate_and(lists: &[NeighborBits]) -> Result<Graph> {
    let n = check_lists(lists)?;
    Ok(Graph::from_pair_fn(n, |i, j| lists[i].bits[j] && lists[j].bits[i]))
}

/// Per pair, draws `b ~ Bernoulli(alpha)` from `rng` (pairs in lexicographic
/// order) and combines the two reports with AND if `b = 1`, OR otherwise.
pub fn aggregate_and_or(lists: &[NeighborBits], alpha: f64, rng: &mut RngStream) -> Result<Graph> {
    let n = check_lists(lists)?;
    if !(0.0..=1.0).contains(&alpha) {
        return domain(format!("alpha {alpha} outside [0, 1]"));
    }
    Ok(Graph::from_pair_fn(n, |i, j| {
        let (a, b) = (lists[i].bits[j], lists[j].bits[i]);
        if rng.random_bool(alpha) {
            a && b
        } else {
            a || b
        }
    }))
}

fn noisy_density(g: &Graph, eps1: f64, root: &RngStream) -> Result<f64> {
    let degrees = (0..g.n())
        .into_par_iter()
        .map(|u| {
            let mut rng = root.substream(StreamRole::DegreeNoise, u as u64);
            noisy_degree(g.degree(u), eps1, &mut rng)
        })
        .collect::<Result<Vec<f64>>>()?;
    estimate_density(&degrees, g.n())
}

fn report_rows(g: &Graph, eps2: f64, root: &RngStream) -> Vec<NeighborBits> {
    (0..g.n())
        .into_par_iter()
        .map(|u| {
            let mut rng = root.substream(StreamRole::NeighborReport, u as u64);
            perturb_neighbor_bits(&NeighborBits::from_graph(g, u), eps2, &mut rng)
        })
        .collect()
}

/// Full graph-aggregation run.
///
/// `AndOnly` derives `ε₂` from `γ̂` unless `params.eps2` pins it; `AndOr`
/// always takes `params.eps2`. When `γ̂ > 1/2` the vertices aggregate their
/// complement rows instead (whose density estimate is `1 − γ̂`) and the
/// curator complements the result.
pub fn run_graph_agg(g: &Graph, params: &PrivacyParams, variant: Variant, rng: &RngStream) -> Result<SyntheticGraph> {
    let eps1 = params.eps1()?;
    let gamma_hat = noisy_density(g, eps1, rng)?;

    let complemented = gamma_hat > 0.5;
    let complement;
    let (working, working_gamma) = if complemented {
        complement = g.complement();
        (&complement, 1.0 - gamma_hat)
    } else {
        (g, gamma_hat)
    };

    let mut warnings = Vec::new();
    let (eps2, p, alpha) = match variant {
        Variant::AndOnly => {
            let eps2 = match params.eps2 {
                Some(eps2) => check_budget("eps2", eps2)?,
                None => epsilon2_for_density(working_gamma)?,
            };
            (eps2, bit_flip_probability(eps2), None)
        }
        Variant::AndOr => {
            let eps2 = params.eps2()?;
            let p = bit_flip_probability(eps2);
            if p == 0.0 {
                // Noiseless reports agree pairwise, so AND and OR coincide.
                (eps2, p, Some(1.0))
            } else {
                let calibration = alpha_for(working_gamma, p)?;
                warnings.extend(calibration.warning(working_gamma, p));
                (eps2, p, Some(calibration.alpha))
            }
        }
    };

    let reports = report_rows(working, eps2, rng);
    let aggregated = match alpha {
        None => aggregate_and(&reports)?,
        Some(alpha) => aggregate_and_or(&reports, alpha, &mut rng.curator())?,
    };
    let graph = if complemented { aggregated.complement() } else { aggregated };

    let calibration = Calibration { p, alpha, eps1: Some(eps1), eps2, complemented };
    Ok(SyntheticGraph::new(graph, Some(gamma_hat), calibration, warnings))
}

/// Randomized neighbor list baseline: vertex `u` perturbs only positions
/// `u+1..n` of its row and the curator mirrors that upper triangle.
pub fn run_rnl_baseline(g: &Graph, eps: f64, rng: &RngStream) -> Result<SyntheticGraph> {
    check_budget("eps", eps)?;
    let n = g.n();
    let upper: Vec<Vec<bool>> = (0..n)
        .into_par_iter()
        .map(|u| {
            let mut stream = rng.substream(StreamRole::NeighborReport, u as u64);
            ((u + 1)..n).map(|v| rr_bit(g.has_edge(u, v), eps, &mut stream)).collect()
        })
        .collect();
    let graph = Graph::from_pair_fn(n, |u, v| upper[u][v - u - 1]);
    let calibration =
        Calibration { p: bit_flip_probability(eps), alpha: None, eps1: None, eps2: eps, complemented: false };
    Ok(SyntheticGraph::new(graph, None, calibration, Vec::new()))
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::AndOnly => "and",
            Variant::AndOr => "and-or",
        })
    }
}
