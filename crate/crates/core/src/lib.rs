//! Distance queries on a graph whose edges are protected by edge local
//! differential privacy.
//!
//! Every vertex knows only its own neighbor list. Two protocols let an
//! untrusted curator estimate all pairwise distances:
//!
//! * [`graph_agg`] collects randomized neighbor lists, combines the two
//!   reports of each pair into a synthetic graph and runs BFS on it. A noisy
//!   degree round first estimates the density so the flip probability can be
//!   calibrated to keep the synthetic graph about as dense as the real one.
//! * [`neigh_agg`] perturbs one distance vector per vertex and then refines
//!   the vectors by `T − 1` rounds of min-plus-one exchange with neighbors.
//!
//! [`mechanisms`] holds the randomizers and privacy accounting, [`analysis`]
//! the error metrics and simulators, and [`harness`] the experiment driver
//! used by the `ldp-distance` binary.
//!
//! ```
//! use ldp_distance::graph::{exact_all_pairs, Graph};
//! use ldp_distance::mechanisms::{Mechanism, PrivacyParams, RngStream};
//! use ldp_distance::neigh_agg::run_neigh_agg;
//!
//! let g = Graph::path(4);
//! let params = PrivacyParams::neighbor(f64::INFINITY, 6, Mechanism::RandomizedResponse);
//! let estimate = run_neigh_agg(&g, &params, &RngStream::from_seed(7)).unwrap();
//! assert_eq!(estimate, exact_all_pairs(&g, Some(6)));
//! ```

pub mod analysis;
pub mod error;
pub mod graph;
pub mod graph_agg;
pub mod harness;
pub mod mechanisms;
pub mod neigh_agg;

pub use error::{Error, Result};
pub use graph::{DistanceMatrix, Graph};
pub use mechanisms::{Mechanism, PrivacyParams, RngStream};
