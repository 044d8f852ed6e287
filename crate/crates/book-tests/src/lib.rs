//! Compiles the guide's code listings as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/graphs.md")]
pub mod graphs {}
#[doc = include_str!("../../../book/src/mechanisms.md")]
pub mod mechanisms {}
#[doc = include_str!("../../../book/src/graph-aggregation.md")]
pub mod graph_aggregation {}
#[doc = include_str!("../../../book/src/neighbor-aggregation.md")]
pub mod neighbor_aggregation {}
#[doc = include_str!("../../../book/src/analysis.md")]
pub mod analysis {}
#[doc = include_str!("../../../book/src/harness.md")]
pub mod harness {}
