//! Community detection in weighted bipartite networks with the generalized
//! bipartite modularity density.
//!
//! The objective scores a co-clustering of a two-class graph as
//!
//! ```text
//! Q_bg = (1/F) Σ_c (m_c − q_c d_c / F) · ρ_c^χ
//! ```
//!
//! where `m_c` is the weight inside co-cluster `c`, `q_c` and `d_c` are the
//! summed strengths of its red and blue nodes, `F` is the total weight and
//! `ρ_c` is the internal link density. With `χ = 0` this is Barber's bipartite
//! modularity; raising `χ` rewards dense co-clusters and exposes finer levels
//! of a hierarchy, lowering it below zero favours coarse ones.
//!
//! The crate is organised as:
//!
//! * [`graph`], [`partition`]: the immutable graph and co-cluster assignments.
//! * [`objective`]: `Q_b` / `Q_bg` evaluation and O(1) single-node move deltas.
//! * [`optimizer`]: a Louvain-style maximizer plus an exhaustive oracle.
//! * [`sweep`]: resolution sweeps, plateaus, transitions and fixed-partition curves.
//! * [`generators`]: clique ring, two-clique benchmark and hierarchical networks.
//! * [`analytic`]: closed-form merge/split criteria and phase diagrams.
//! * [`io`]: edge lists, biadjacency matrices, run records and exports.
//!
//! ```
//! use qbg_core::generators::{gen_ring, RingSpec};
//! use qbg_core::objective::evaluate_qb;
//!
//! let ring = gen_ring(RingSpec { n: 4, k: 2 }).unwrap();
//! let split = evaluate_qb(&ring.graph, &ring.split).unwrap();
//! assert!((split.total - 0.55).abs() < 1e-12);
//! ```

pub mod analytic;
pub mod generators;
pub mod graph;
pub mod io;
mod numerics;
pub mod objective;
pub mod optimizer;
pub mod partition;
pub mod sweep;

pub use graph::{BipartiteGraph, GraphError, Side};
pub use objective::{DensityMode, ObjectiveError, ObjectiveValue, Resolution};
pub use optimizer::{detect, exhaustive_detect, DetectionResult, OptimizerConfig};
pub use partition::Partition;

// Book chapters are compiled as doc-tests so the snippets cannot drift.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/objective.md")]
    mod objective {}
    #[doc = include_str!("../../../book/src/resolution-limit.md")]
    mod resolution_limit {}
    #[doc = include_str!("../../../book/src/optimizer.md")]
    mod optimizer {}
    #[doc = include_str!("../../../book/src/hierarchy.md")]
    mod hierarchy {}
    #[doc = include_str!("../../../book/src/file-formats.md")]
    mod file_formats {}
}
