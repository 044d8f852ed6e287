//! Randomness primitives and privacy accounting.
//!
//! Every sampler here is a pure function of its input and an [`RngStream`].
//! Streams are keyed by `(seed, stream id)`, so each vertex can own an
//! independent stream and vertex-level work can run in any order without
//! changing results.
//!
//! A budget of `f64::INFINITY` is accepted everywhere and means "no noise":
//! flip and resample probabilities become zero and Laplace scales vanish.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::graph_agg::NeighborBits;
use crate::neigh_agg::DistanceVector;

/// Deterministic random stream identified by a seed and a stream id.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

/// What a derived stream is used for. Vertices get one stream per role so
/// that, for example, degree noise never shares draws with neighbor reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamRole {
    DegreeNoise,
    NeighborReport,
    DistanceReport,
    Curator,
    Trial,
    Simulation,
}

impl StreamRole {
    fn tag(self) -> u64 {
        let index = match self {
            StreamRole::DegreeNoise => 1,
            StreamRole::NeighborReport => 2,
            StreamRole::DistanceReport => 3,
            StreamRole::Curator => 4,
            StreamRole::Trial => 5,
            StreamRole::Simulation => 6,
        };
        index << 56
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    /// Root stream for a master seed.
    pub fn from_seed(seed: u64) -> Self {
        Self::new(seed, 0)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    /// Independent child stream for `(role, index)`, derived only from this
    /// stream's identity (not its position), so derivation order is irrelevant.
    pub fn substream(&self, role: StreamRole, index: u64) -> RngStream {
        debug_assert!(index < 1 << 56);
        let child_seed = splitmix64(self.seed ^ splitmix64(self.stream));
        RngStream::new(child_seed, role.tag() | index)
    }

    /// The curator's stream for this run.
    pub fn curator(&self) -> RngStream {
        self.substream(StreamRole::Curator, 0)
    }

    /// Uniform draw in the open interval `(0, 1)`.
    fn open_unit(&mut self) -> f64 {
        loop {
            let u: f64 = self.rng.random();
            if u > 0.0 {
                return u;
            }
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Perturbation applied to initial distance vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mechanism {
    Laplace,
    #[default]
    #[serde(alias = "rr")]
    RandomizedResponse,
}

/// Protocols whose end-to-end budget [`total_budget`] knows how to account.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    /// Noisy degrees (`eps1`) then full neighbor-list RR (`eps2`).
    GraphAgg,
    /// One perturbed distance vector per vertex (`eps`).
    NeighAgg,
    /// Neighbor aggregation preceded by a noisy degree round: `eps1` for the
    /// degrees, `eps2` for the distance vectors.
    NeighAggWithDegreeRound,
}

pub const DEFAULT_THRESHOLD: u32 = 6;

/// Privacy budgets and the distance threshold `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyParams {
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    pub eps: Option<f64>,
    pub threshold: u32,
    pub mechanism: Mechanism,
}

impl Default for PrivacyParams {
    fn default() -> Self {
        Self { eps1: None, eps2: None, eps: None, threshold: DEFAULT_THRESHOLD, mechanism: Mechanism::default() }
    }
}

impl PrivacyParams {
    /// Parameters for neighbor aggregation with budget `eps` per vector.
    pub fn neighbor(eps: f64, threshold: u32, mechanism: Mechanism) -> Self {
        Self { eps: Some(eps), threshold, mechanism, ..Self::default() }
    }

    /// Parameters for graph aggregation. `eps2` may be left to calibration.
    pub fn graph(eps1: f64, eps2: Option<f64>) -> Self {
        Self { eps1: Some(eps1), eps2, ..Self::default() }
    }

    pub fn eps(&self) -> Result<f64> {
        required("eps", self.eps)
    }

    pub fn eps1(&self) -> Result<f64> {
        required("eps1", self.eps1)
    }

    pub fn eps2(&self) -> Result<f64> {
        required("eps2", self.eps2)
    }

    pub fn check_threshold(&self) -> Result<u32> {
        if self.threshold < 1 {
            return domain("distance threshold T must be at least 1");
        }
        Ok(self.threshold)
    }
}

fn required(name: &str, value: Option<f64>) -> Result<f64> {
    match value {
        Some(v) => check_budget(name, v),
        None => domain(format!("privacy budget {name} is not set")),
    }
}

/// Accepts any strictly positive budget, including `+∞` (noise disabled).
pub fn check_budget(name: &str, value: f64) -> Result<f64> {
    if value > 0.0 {
        Ok(value)
    } else {
        domain(format!("privacy budget {name} must be positive, got {value}"))
    }
}

/// Flip probability of binary randomized response, `1 / (1 + e^ε)`.
pub fn bit_flip_probability(eps: f64) -> f64 {
    1.0 / (1.0 + eps.exp())
}

/// Inverse of [`bit_flip_probability`]: the budget that flips with probability `p`.
pub fn budget_for_flip_probability(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 0.5) {
        return domain(format!("flip probability {p} must lie in (0, 1/2)"));
    }
    Ok((1.0 / p - 1.0).ln())
}

/// Resampling probability of distance-domain randomized response,
/// `T / (e^ε + T - 1)`.
pub fn resample_probability(eps: f64, threshold: u32) -> f64 {
    let t = threshold as f64;
    t / (eps.exp() + t - 1.0)
}

/// One draw from Laplace(0, `scale`) by inverting the CDF at a single uniform.
pub fn laplace_sample(scale: f64, rng: &mut RngStream) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite()) {
        return domain(format!("Laplace scale must be positive and finite, got {scale}"));
    }
    Ok(laplace_unchecked(scale, rng))
}

pub(crate) fn laplace_unchecked(scale: f64, rng: &mut RngStream) -> f64 {
    let centered = rng.open_unit() - 0.5;
    -scale * centered.signum() * (1.0 - 2.0 * centered.abs()).ln()
}

/// Binary randomized response: returns `!bit` with probability `1/(1+e^ε)`.
pub fn rr_bit(bit: bool, eps: f64, rng: &mut RngStream) -> bool {
    let p = bit_flip_probability(eps);
    if p > 0.0 && rng.random::<f64>() < p {
        !bit
    } else {
        bit
    }
}

/// Distance-domain randomized response on `{1, ..., T}`: keeps `x` with
/// probability `1 - p`, otherwise returns a uniform draw from the whole range
/// (which may be `x` again).
pub fn rr_distance(x: u32, eps: f64, threshold: u32, rng: &mut RngStream) -> Result<u32> {
    if x < 1 || x > threshold {
        return domain(format!("distance {x} outside [1, {threshold}]"));
    }
    check_budget("eps", eps)?;
    Ok(rr_distance_unchecked(x, resample_probability(eps, threshold), threshold, rng))
}

fn rr_distance_unchecked(x: u32, p: f64, threshold: u32, rng: &mut RngStream) -> u32 {
    if p > 0.0 && rng.random::<f64>() < p {
        rng.random_range(1..=threshold)
    } else {
        x
    }
}

/// Randomized response on every position of a neighbor row, the diagonal
/// included.
pub fn perturb_neighbor_bits(bits: &NeighborBits, eps: f64, rng: &mut RngStream) -> NeighborBits {
    NeighborBits {
        owner: bits.owner,
        bits: bits.bits.iter().map(|&b| rr_bit(b, eps, rng)).collect(),
    }
}

/// Perturbs an initial distance vector with the configured mechanism.
///
/// Laplace adds `((T-1)/ε)·Lap(1)` to every non-self entry; randomized
/// response passes every non-self entry through [`rr_distance`]. The owner's
/// own entry stays 0.
pub fn perturb_distance_vector(
    vector: &DistanceVector,
    params: &PrivacyParams,
    rng: &mut RngStream,
) -> Result<DistanceVector> {
    let eps = params.eps()?;
    let threshold = params.check_threshold()?;
    let t = threshold as f64;
    let owner = vector.owner;
    if vector.round != 0 {
        return domain("only round-0 distance vectors can be perturbed");
    }
    let initial_form = vector
        .entries
        .iter()
        .enumerate()
        .all(|(j, &d)| if j == owner { d == 0.0 } else { d == 1.0 || d == t });
    if !initial_form {
        return domain(format!("vector of vertex {owner} is not in initial form (0 self, 1 or T elsewhere)"));
    }

    let entries = match params.mechanism {
        Mechanism::Laplace => {
            let scale = (t - 1.0) / eps;
            vector
                .entries
                .iter()
                .enumerate()
                .map(|(j, &d)| if j == owner || scale == 0.0 { d } else { d + laplace_unchecked(scale, rng) })
                .collect()
        }
        Mechanism::RandomizedResponse => {
            let p = resample_probability(eps, threshold);
            vector
                .entries
                .iter()
                .enumerate()
                .map(|(j, &d)| if j == owner { d } else { rr_distance_unchecked(d as u32, p, threshold, rng) as f64 })
                .collect()
        }
    };
    Ok(DistanceVector { owner, round: 0, entries })
}

/// Degree plus `(2/ε₁)·Lap(1)`.
pub fn noisy_degree(degree: usize, eps1: f64, rng: &mut RngStream) -> Result<f64> {
    check_budget("eps1", eps1)?;
    let noise = laplace_unchecked(1.0, rng);
    let scale = 2.0 / eps1;
    Ok(degree as f64 + if scale == 0.0 { 0.0 } else { scale * noise })
}

/// Per-edge privacy loss of a full protocol run under sequential composition.
/// Each edge is reported by both endpoints, hence the factor 2.
pub fn total_budget(protocol: Protocol, params: &PrivacyParams) -> Result<f64> {
    match protocol {
        Protocol::GraphAgg | Protocol::NeighAggWithDegreeRound => {
            Ok(2.0 * (params.eps1()? + params.eps2()?))
        }
        Protocol::NeighAgg => Ok(2.0 * params.eps()?),
    }
}
