use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::mechanisms::{check_budget, laplace_unchecked, resample_probability, RngStream, StreamRole};

/// Frequencies of the constants a far vertex's estimate is built from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum HistogramSpec {
    /// Every constant equally likely.
    #[default]
    Uniform,
    /// `a = (a₁, a₂, a₃)`: neighbors of the target at distance `t−1, t, t+1`
    /// from the source. `m[k−1] = m_k`: vertices `k` hops from the source,
    /// for `k = 1..T−1`.
    Explicit { a: [u64; 3], m: Vec<u64> },
}

/// Inputs of the `Y₁`/`Y₂` simulators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub n: usize,
    /// True distance between the two vertices.
    pub t: u32,
    pub threshold: u32,
    pub eps: f64,
    pub repeats: usize,
    #[serde(default)]
    pub histogram: HistogramSpec,
}

impl SimulationSpec {
    /// 10,000 vertices, true distance 4, `T = 6`, 1,000 repeats, uniform histogram.
    pub fn reference(eps: f64) -> Self {
        Self { n: 10_000, t: 4, threshold: 6, eps, repeats: 1_000, histogram: HistogramSpec::Uniform }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t < 2 || self.t + 2 > self.threshold {
            return domain(format!(
                "true distance t = {} must satisfy 2 <= t <= T - 2 (T = {})",
                self.t, self.threshold
            ));
        }
        if self.n < 3 {
            return domain("simulation needs n >= 3");
        }
        if self.repeats == 0 {
            return domain("repeats must be at least 1");
        }
        check_budget("eps", self.eps)?;
        if let HistogramSpec::Explicit { m, .. } = &self.histogram {
            if m.len() != self.threshold as usize - 1 {
                return domain(format!("expected {} hop counts m_1..m_(T-1), got {}", self.threshold - 1, m.len()));
            }
        }
        Ok(())
    }
}

/// Finite distribution over real values.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    pub values: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl DiscreteDistribution {
    fn from_counts(values: Vec<f64>, counts: &[f64]) -> Self {
        let total: f64 = counts.iter().sum();
        let probabilities = counts.iter().map(|c| if total > 0.0 { c / total } else { 0.0 }).collect();
        Self { values, probabilities }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.probabilities).map(|(v, p)| v * p).sum()
    }

    pub fn min_support(&self) -> Option<f64> {
        self.values
            .iter()
            .zip(&self.probabilities)
            .filter(|(_, &p)| p > 0.0)
            .map(|(&v, _)| v)
            .reduce(f64::min)
    }
}

/// `W` and its two disjoint parts: `W₂` (constants reached through a
/// neighbor of the target) and `W₁` (constants `T + k`).
#[derive(Debug, Clone, PartialEq)]
pub struct WHistograms {
    pub w: DiscreteDistribution,
    pub w1: DiscreteDistribution,
    pub w2: DiscreteDistribution,
    /// Probability that a draw of `W` lands in the support of `W₂`.
    pub w2_share: f64,
    /// Raw counts `(value, count, in W₂)` in explicit mode.
    counts: Option<Vec<(f64, u64, bool)>>,
}

pub fn build_w_histograms(spec: &SimulationSpec) -> Result<WHistograms> {
    spec.validate()?;
    let t = spec.t as u64;
    let big_t = spec.threshold as u64;
    let near: Vec<f64> = (0..3).map(|i| (t + i) as f64).collect();
    let far: Vec<f64> = (1..big_t).map(|k| (big_t + k) as f64).collect();

    match &spec.histogram {
        HistogramSpec::Uniform => {
            let support = (near.len() + far.len()) as f64;
            let w_values: Vec<f64> = near.iter().chain(&far).copied().collect();
            Ok(WHistograms {
                w: DiscreteDistribution::from_counts(w_values, &vec![1.0; support as usize]),
                w1: DiscreteDistribution::from_counts(far.clone(), &vec![1.0; far.len()]),
                w2: DiscreteDistribution::from_counts(near.clone(), &vec![1.0; near.len()]),
                w2_share: near.len() as f64 / support,
                counts: None,
            })
        }
        HistogramSpec::Explicit { a, m } => {
            let mut far_counts = Vec::with_capacity(far.len());
            for k in 1..big_t {
                let correction = if k + 1 == t {
                    a[0]
                } else if k == t {
                    a[1] + 1
                } else if k == t + 1 {
                    a[2]
                } else {
                    0
                };
                let base = m[(k - 1) as usize];
                match base.checked_sub(correction) {
                    Some(c) => far_counts.push(c),
                    None => {
                        return domain(format!(
                            "count for constant T+{k} is negative ({base} - {correction})"
                        ))
                    }
                }
            }
            let total: u64 = a.iter().sum::<u64>() + far_counts.iter().sum::<u64>();
            if total != spec.n as u64 - 2 {
                return domain(format!("histogram counts total {total}, expected n - 2 = {}", spec.n - 2));
            }
            let near_f: Vec<f64> = a.iter().map(|&c| c as f64).collect();
            let far_f: Vec<f64> = far_counts.iter().map(|&c| c as f64).collect();
            let w_values: Vec<f64> = near.iter().chain(&far).copied().collect();
            let w_counts: Vec<f64> = near_f.iter().chain(&far_f).copied().collect();
            let counts = near
                .iter()
                .zip(a.iter())
                .map(|(&v, &c)| (v, c, true))
                .chain(far.iter().zip(&far_counts).map(|(&v, &c)| (v, c, false)))
                .collect();
            Ok(WHistograms {
                w: DiscreteDistribution::from_counts(w_values, &w_counts),
                w1: DiscreteDistribution::from_counts(far, &far_f),
                w2: DiscreteDistribution::from_counts(near, &near_f),
                w2_share: a.iter().sum::<u64>() as f64 / total as f64,
                counts: Some(counts),
            })
        }
    }
}

/// Samples of `Y₁`, raw and with values below 1 raised to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Y1Samples {
    pub raw: Vec<f64>,
    pub clamped: Vec<f64>,
}

/// Calls `visit(w, in_w2)` once for each of the `n − 2` constants of a trial.
/// Uniform mode draws each constant from `W`; explicit mode replays the
/// counted multiset.
fn for_each_constant(
    hist: &WHistograms,
    draws: usize,
    rng: &mut RngStream,
    mut visit: impl FnMut(f64, bool, &mut RngStream),
) {
    match &hist.counts {
        Some(counts) => {
            for &(value, count, near) in counts {
                for _ in 0..count {
                    visit(value, near, rng);
                }
            }
        }
        None => {
            let values = &hist.w.values;
            let near_len = hist.w2.values.len();
            for _ in 0..draws {
                let index = rng.random_range(0..values.len());
                visit(values[index], index < near_len, rng);
            }
        }
    }
}

fn run_trials(spec: &SimulationSpec, rng: &RngStream, trial: impl Fn(&mut RngStream) -> f64 + Sync) -> Vec<f64> {
    (0..spec.repeats)
        .into_par_iter()
        .map(|k| trial(&mut rng.substream(StreamRole::Simulation, k as u64)))
        .collect()
}

/// `Y₁ = min(T, min over n−2 draws of W + X)` with `X ~ Laplace(0, (T−1)/ε)`.
pub fn simulate_y1(spec: &SimulationSpec, rng: &RngStream) -> Result<Y1Samples> {
    let hist = build_w_histograms(spec)?;
    let cap = spec.threshold as f64;
    let scale = (cap - 1.0) / spec.eps;
    let raw = run_trials(spec, rng, |stream| {
        let mut best = cap;
        for_each_constant(&hist, spec.n - 2, stream, |w, _, s| {
            let x = if scale == 0.0 { 0.0 } else { laplace_unchecked(scale, s) };
            best = best.min(w + x);
        });
        best
    });
    let clamped = raw.iter().map(|&y| y.max(1.0)).collect();
    Ok(Y1Samples { raw, clamped })
}

/// `Y₂ = min(T, min W₁ + X₁, min W₂ + X₂)`.
///
/// With `q = (T−2)/(T−1) · p` and `p = T/(e^ε + T − 1)`: `X₁` is 0 with
/// probability `1 − q`, else uniform on `{1−T, …, −1}`; `X₂` is 0 with
/// probability `1 − q`, else uniform on `{1, …, T−1}`.
pub fn simulate_y2(spec: &SimulationSpec, rng: &RngStream) -> Result<Vec<f64>> {
    let hist = build_w_histograms(spec)?;
    let big_t = spec.threshold as i64;
    let cap = big_t as f64;
    let p = resample_probability(spec.eps, spec.threshold);
    let q = (big_t - 2) as f64 / (big_t - 1) as f64 * p;
    Ok(run_trials(spec, rng, |stream| {
        let mut best = cap;
        for_each_constant(&hist, spec.n - 2, stream, |w, near, s| {
            let x = if q > 0.0 && s.random::<f64>() < q {
                let magnitude = s.random_range(1..big_t) as f64;
                if near {
                    magnitude
                } else {
                    -magnitude
                }
            } else {
                0.0
            };
            best = best.min(w + x);
        });
        best
    }))
}

/// Mean, standard deviation and nearest-rank 5th/95th percentiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub p05: f64,
    pub p95: f64,
}

pub fn summarize(samples: &[f64]) -> Summary {
    let count = samples.len();
    if count == 0 {
        return Summary { count, mean: f64::NAN, sd: f64::NAN, p05: f64::NAN, p95: f64::NAN };
    }
    let mean = samples.iter().sum::<f64>() / count as f64;
    let sd = if count > 1 {
        (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = |q: f64| sorted[((q * count as f64).ceil() as usize).clamp(1, count) - 1];
    Summary { count, mean, sd, p05: rank(0.05), p95: rank(0.95) }
}
