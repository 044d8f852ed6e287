use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::mechanisms::{laplace_unchecked, RngStream, StreamRole};

pub const MIN_MONTE_CARLO_TRIALS: usize = 1_000_000;
const CHUNK: usize = 10_000;

/// How to evaluate `E[min of n i.i.d. Laplace(0, b)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MinLaplaceMethod {
    /// Exact value from integrating the survival function of the minimum.
    ExactSeries,
    /// Sample mean over `trials` minima (at least [`MIN_MONTE_CARLO_TRIALS`]).
    MonteCarlo { trials: usize, seed: u64 },
    /// `b · ln(1/2 − 1/(n+1))`, defined for `n > 1`. Kept for comparison; it
    /// does not agree with the other two methods.
    PaperClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Standard error, for sampled estimates.
    pub std_error: Option<f64>,
}

/// Expected minimum of `n` i.i.d. Laplace(0, `b`) variables.
///
/// The exact route uses
/// `E = b/(n·2ⁿ) − b · Σ_{k=1..n} (1 − 2⁻ᵏ)/k`,
/// which equals the alternating binomial series
/// `b/(n·2ⁿ) − b · Σ C(n,k)(−1)^{k+1}/(k·2ᵏ)` but stays stable for large `n`.
pub fn min_laplace_expectation(n: usize, b: f64, method: MinLaplaceMethod) -> Result<Estimate> {
    if n == 0 {
        return domain("minimum of zero variables");
    }
    if !(b > 0.0 && b.is_finite()) {
        return domain(format!("Laplace scale must be positive, got {b}"));
    }
    match method {
        MinLaplaceMethod::ExactSeries => {
            let positive_part = b / (n as f64 * 2f64.powi(n.min(i32::MAX as usize) as i32));
            let negative_part: f64 = (1..=n).map(|k| (1.0 - 0.5f64.powi(k as i32)) / k as f64).sum();
            Ok(Estimate { value: positive_part - b * negative_part, std_error: None })
        }
        MinLaplaceMethod::PaperClosedForm => {
            if n < 2 {
                return domain("closed form b·ln(1/2 − 1/(n+1)) needs n > 1");
            }
            Ok(Estimate { value: b * (0.5 - 1.0 / (n as f64 + 1.0)).ln(), std_error: None })
        }
        MinLaplaceMethod::MonteCarlo { trials, seed } => {
            if trials < MIN_MONTE_CARLO_TRIALS {
                return domain(format!("Monte Carlo needs at least {MIN_MONTE_CARLO_TRIALS} trials, got {trials}"));
            }
            let root = RngStream::from_seed(seed);
            let chunks = trials.div_ceil(CHUNK);
            let (sum, sum_sq) = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = root.substream(StreamRole::Simulation, c as u64);
                    let size = CHUNK.min(trials - c * CHUNK);
                    let mut acc = (0.0, 0.0);
                    for _ in 0..size {
                        let y = (0..n).map(|_| laplace_unchecked(b, &mut rng)).fold(f64::INFINITY, f64::min);
                        acc.0 += y;
                        acc.1 += y * y;
                    }
                    acc
                })
                .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
            let count = trials as f64;
            let mean = sum / count;
            let variance = (sum_sq - count * mean * mean) / (count - 1.0);
            Ok(Estimate { value: mean, std_error: Some((variance / count).sqrt()) })
        }
    }
}
