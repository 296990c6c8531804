//! Measuring collectiveness of moving crowds with node clique learning.
//!
//! The crate builds K-nearest-neighbour motion graphs, learns a clique for
//! every node, turns clique overlap into a coherence matrix and averages it
//! into per-node and per-graph collectiveness. A self-driven particle
//! simulator and evaluation metrics are included for validation.

pub mod cluster;
pub mod error;
pub mod experiment;
pub mod fmt;
pub mod graph;
pub mod metrics;
pub mod ncl;
pub mod sdp;
pub mod trajectory;

pub use cluster::{threshold_cluster, ClusterLabeling, ClusterStats};
pub use error::{Error, Result};
pub use graph::{build_knn_graph, Metric, NodeId, Vec2, WeightedDigraph};
pub use metrics::{AucRow, AucTable, MetricsReport, RunMetrics};
pub use ncl::{
    coherence, graph_collectiveness, learn_clique, learn_cliques, measure, node_collectiveness,
    CliqueMatrix, CoherenceMatrix, CollectivenessReport, NclConfig, PrivilegeUpdate, Scheme,
    Strategy, Variant,
};
pub use sdp::{FrameRecord, SdpParams, SdpState, SdpTrace};
pub use trajectory::{Category, ClipMeta, TrajectoryClip, TrajectoryFrame};
