//! Error metrics and the simulators used to study the distance estimators.
//!
//! * [`metrics`]: RMAE (`η₁`) and MRE (`η₂`) between a true and an estimated
//!   distance matrix.
//! * [`simulation`]: the random variables `Y₁` (Laplace) and `Y₂` (randomized
//!   response) that model the final estimate for a non-adjacent pair, built on
//!   the constant histograms `W`, `W₁`, `W₂`.
//! * [`order_stats`]: the expected minimum of `n` Laplace variables, which
//!   explains why the Laplace variant drifts towards 1.

pub mod metrics;
pub mod order_stats;
pub mod simulation;

pub use metrics::{evaluate, mre, rmae, MetricReport, UnreachablePolicy};
pub use order_stats::{min_laplace_expectation, Estimate, MinLaplaceMethod, MIN_MONTE_CARLO_TRIALS};
pub use simulation::{
    build_w_histograms, simulate_y1, simulate_y2, summarize, DiscreteDistribution, HistogramSpec, SimulationSpec,
    Summary, WHistograms, Y1Samples,
};
