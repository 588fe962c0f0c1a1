//! Persistent homology of multi-channel time series.
//!
//! Two filtrations feed one analysis layer:
//!
//! * sliding-window embedding of each channel into a point cloud, then a
//!   Vietoris-Rips filtration with H0/H1/H2 diagrams ([`embedding`], [`rips`]);
//! * positively gated correlation graphs over the channels of a network, then
//!   a graph filtration with H0/H1 diagrams ([`graph`]).
//!
//! Diagrams are compared with exact Wasserstein and bottleneck distances
//! ([`distances`]), assembled into inter-subject and inter-ROI matrices,
//! tested with the Wilcoxon rank-sum test, reduced to lifespan features
//! ([`analytics`]) and classified ([`classify`]). [`pipeline`] wires the
//! stages together and writes deterministic output trees.

pub mod analytics;
pub mod barcode;
pub mod classify;
pub mod diagram;
pub mod distances;
pub mod embedding;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod pipeline;
pub mod rips;

pub use diagram::{PersistenceDiagram, PersistencePair};
pub use error::{Error, Result};

/// Shortest decimal form that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v:?}")
}
