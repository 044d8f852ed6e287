use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::graph::DistanceMatrix;

/// What to do with pairs that have no path in the true graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnreachablePolicy {
    /// Score them with the cap (normally `T`) as their true distance.
    #[default]
    Cap,
    /// Leave them out of both metrics.
    Exclude,
}

impl fmt::Display for UnreachablePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnreachablePolicy::Cap => "cap",
            UnreachablePolicy::Exclude => "exclude",
        })
    }
}

impl FromStr for UnreachablePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cap" => Ok(UnreachablePolicy::Cap),
            "exclude" => Ok(UnreachablePolicy::Exclude),
            other => Err(Error::Config(format!("unknown unreachable policy {other:?} (cap|exclude)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    /// Mean relative absolute error over pairs (η₁).
    pub rmae: f64,
    /// Relative error of the mean distance (η₂).
    pub mre: f64,
    pub pairs: usize,
    pub policy: UnreachablePolicy,
}

/// Off-diagonal `(truth, estimate)` pairs after applying the cap rule.
/// Unreachable estimates (synthetic graphs can disconnect pairs) always
/// count as `cap`.
fn scored_pairs(
    truth: &DistanceMatrix,
    noisy: &DistanceMatrix,
    cap: f64,
    policy: UnreachablePolicy,
) -> Result<Vec<(f64, f64)>> {
    if truth.n() != noisy.n() {
        return domain(format!("matrix sizes differ: {} vs {}", truth.n(), noisy.n()));
    }
    if !truth.has_zero_diagonal() {
        return domain("truth matrix must have a zero diagonal");
    }
    let mut pairs = Vec::with_capacity(truth.n() * truth.n().saturating_sub(1));
    for (u, v, d) in truth.off_diagonal() {
        let d = match (d.is_finite(), policy) {
            (true, _) => d,
            (false, UnreachablePolicy::Cap) => cap,
            (false, UnreachablePolicy::Exclude) => continue,
        };
        if d == 0.0 {
            return domain(format!("true distance of pair ({u}, {v}) is zero"));
        }
        let estimate = noisy.get(u, v);
        pairs.push((d, if estimate.is_finite() { estimate } else { cap }));
    }
    if pairs.is_empty() {
        return domain("no vertex pairs to score");
    }
    Ok(pairs)
}

fn rmae_of(pairs: &[(f64, f64)]) -> f64 {
    pairs.iter().map(|&(d, e)| (e - d).abs() / d.abs()).sum::<f64>() / pairs.len() as f64
}

fn mre_of(pairs: &[(f64, f64)]) -> Result<f64> {
    let count = pairs.len() as f64;
    let truth_mean = pairs.iter().map(|p| p.0).sum::<f64>() / count;
    let noisy_mean = pairs.iter().map(|p| p.1).sum::<f64>() / count;
    if truth_mean == 0.0 {
        return domain("mean true distance is zero");
    }
    Ok((noisy_mean - truth_mean).abs() / truth_mean.abs())
}

/// `η₁ = (1/(n² − n)) Σ_{u≠v} |d′ − d| / |d|`, unreachable truths set to `cap`.
pub fn rmae(truth: &DistanceMatrix, noisy: &DistanceMatrix, cap: f64) -> Result<f64> {
    Ok(rmae_of(&scored_pairs(truth, noisy, cap, UnreachablePolicy::Cap)?))
}

/// `η₂ = |d̄′ − d̄| / |d̄|` over off-diagonal entries, unreachable truths set to `cap`.
pub fn mre(truth: &DistanceMatrix, noisy: &DistanceMatrix, cap: f64) -> Result<f64> {
    mre_of(&scored_pairs(truth, noisy, cap, UnreachablePolicy::Cap)?)
}

/// Both metrics under an explicit unreachable-pair policy.
pub fn evaluate(
    truth: &DistanceMatrix,
    noisy: &DistanceMatrix,
    cap: f64,
    policy: UnreachablePolicy,
) -> Result<MetricReport> {
    let pairs = scored_pairs(truth, noisy, cap, policy)?;
    Ok(MetricReport { rmae: rmae_of(&pairs), mre: mre_of(&pairs)?, pairs: pairs.len(), policy })
}
