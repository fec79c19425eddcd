//! Barber's bipartite modularity `Q_b` and the generalized bipartite
//! modularity density `Q_bg`.
//!
//! Every co-cluster contributes
//!
//! ```text
//! (1/F) · (m_c − q_c d_c / F) · ρ_c^χ
//! ```
//!
//! with `ρ_c = m_c / (n_r n_b)` ([`DensityMode::Unweighted`]) or
//! `ρ_c = m_c / (n_r n_b w_max)` ([`DensityMode::Weighted`]). Conventions for
//! the cases the formula leaves open:
//!
//! * `ρ_c = 0` when the co-cluster has no red–blue pair (`n_r n_b = 0`).
//! * `0^0 = 1`, so `χ = 0` reproduces `Q_b` exactly, term by term.
//! * with `χ > 0` a zero-density co-cluster contributes nothing.
//! * with `χ < 0` a zero-density co-cluster is an error
//!   ([`ObjectiveError::DegenerateDensity`]); such partitions are not valid
//!   candidates for negative resolutions.
//! * an edgeless graph scores 0.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{BipartiteGraph, Side};
use crate::numerics::compensated_sum;
use crate::partition::{community_stats, CommunityStats, Partition, PartitionError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObjectiveError {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("co-cluster {community} has zero internal density, undefined for chi = {chi}")]
    DegenerateDensity { community: usize, chi: f64 },
    #[error("resolution parameter must be finite, got {0}")]
    NonFiniteChi(f64),
    #[error("move target {target} does not exist (partition has {communities} co-clusters)")]
    InvalidTarget { target: usize, communities: usize },
}

/// How `ρ_c` is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityMode {
    /// `m_c / (n_r n_b)`
    Unweighted,
    /// `m_c / (n_r n_b w_max)`
    Weighted,
}

impl DensityMode {
    /// Weighted when any edge weight differs from 1, unweighted otherwise.
    pub fn default_for(graph: &BipartiteGraph) -> Self {
        if graph.is_unit_weighted() {
            DensityMode::Unweighted
        } else {
            DensityMode::Weighted
        }
    }
}

impl std::str::FromStr for DensityMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "unweighted" => Ok(DensityMode::Unweighted),
            "weighted" => Ok(DensityMode::Weighted),
            other => Err(format!("unknown density mode '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub chi: f64,
    pub density_mode: DensityMode,
}

impl Resolution {
    pub fn new(chi: f64, density_mode: DensityMode) -> Self {
        Self { chi, density_mode }
    }

    /// `chi` with the graph's default density mode.
    pub fn for_graph(chi: f64, graph: &BipartiteGraph) -> Self {
        Self::new(chi, DensityMode::default_for(graph))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue {
    pub total: f64,
    pub per_community: Vec<f64>,
}

/// `ρ_c` for one co-cluster; zero when it has no red–blue pair.
pub fn internal_density(stats: &CommunityStats, mode: DensityMode, max_weight: f64) -> f64 {
    let pairs = stats.pair_count();
    if pairs == 0.0 {
        return 0.0;
    }
    match mode {
        DensityMode::Unweighted => stats.internal_weight / pairs,
        DensityMode::Weighted => stats.internal_weight / (pairs * max_weight),
    }
}

/// Per-graph constants for scoring co-clusters from raw aggregates.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TermContext {
    total_weight: f64,
    density_norm: f64,
    chi: f64,
}

impl TermContext {
    pub(crate) fn new(graph: &BipartiteGraph, resolution: Resolution) -> Result<Self, ObjectiveError> {
        if !resolution.chi.is_finite() {
            return Err(ObjectiveError::NonFiniteChi(resolution.chi));
        }
        let density_norm = match resolution.density_mode {
            DensityMode::Unweighted => 1.0,
            DensityMode::Weighted if graph.max_weight() > 0.0 => graph.max_weight(),
            // edgeless graph, every score is zero anyway
            DensityMode::Weighted => 1.0,
        };
        Ok(Self {
            total_weight: graph.total_weight(),
            density_norm,
            chi: resolution.chi,
        })
    }

    /// Contribution of a co-cluster with the given aggregates, or `None` when
    /// its density is zero and `χ < 0`.
    pub(crate) fn contribution(
        &self,
        internal: f64,
        red_strength: f64,
        blue_strength: f64,
        red_count: usize,
        blue_count: usize,
    ) -> Option<f64> {
        let f = self.total_weight;
        if f <= 0.0 || (red_count == 0 && blue_count == 0) {
            return Some(0.0);
        }
        let pairs = red_count as f64 * blue_count as f64;
        // Incremental updates can leave rounding residue where the exact
        // value is zero.
        let internal = if pairs == 0.0 || internal <= f * 1e-14 {
            0.0
        } else {
            internal
        };
        let base = (internal - red_strength * blue_strength / f) / f;
        if self.chi == 0.0 {
            return Some(base);
        }
        if internal == 0.0 {
            return if self.chi > 0.0 { Some(0.0) } else { None };
        }
        let density = internal / (pairs * self.density_norm);
        Some(base * density.powf(self.chi))
    }

    pub(crate) fn stats_contribution(&self, s: &CommunityStats) -> Option<f64> {
        self.contribution(
            s.internal_weight,
            s.red_strength,
            s.blue_strength,
            s.red_count,
            s.blue_count,
        )
    }
}

fn evaluate_stats(ctx: &TermContext, stats: &[CommunityStats]) -> Result<ObjectiveValue, ObjectiveError> {
    let per_community = stats
        .iter()
        .enumerate()
        .map(|(c, s)| {
            ctx.stats_contribution(s)
                .ok_or(ObjectiveError::DegenerateDensity {
                    community: c,
                    chi: ctx.chi,
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ObjectiveValue {
        total: compensated_sum(per_community.iter().copied()),
        per_community,
    })
}

/// Barber's bipartite modularity.
pub fn evaluate_qb(graph: &BipartiteGraph, partition: &Partition) -> Result<ObjectiveValue, ObjectiveError> {
    evaluate_qbg(graph, partition, Resolution::new(0.0, DensityMode::Unweighted))
}

/// Generalized bipartite modularity density at the given resolution.
pub fn evaluate_qbg(
    graph: &BipartiteGraph,
    partition: &Partition,
    resolution: Resolution,
) -> Result<ObjectiveValue, ObjectiveError> {
    let stats = community_stats(graph, partition)?;
    let ctx = TermContext::new(graph, resolution)?;
    evaluate_stats(&ctx, &stats)
}

/// Change in `Q_bg` when `node` moves to `target`.
///
/// `stats` must be [`community_stats`] of `partition`. A `target` equal to
/// the number of co-clusters means a fresh, empty co-cluster. Only the two
/// affected co-clusters are re-scored.
pub fn move_delta(
    graph: &BipartiteGraph,
    partition: &Partition,
    stats: &[CommunityStats],
    node: usize,
    target: usize,
    resolution: Resolution,
) -> Result<f64, ObjectiveError> {
    partition.check_covers(graph)?;
    let k = partition.num_communities();
    if target > k {
        return Err(ObjectiveError::InvalidTarget {
            target,
            communities: k,
        });
    }
    let source = partition.community_of(node);
    if target == source {
        return Ok(0.0);
    }
    let ctx = TermContext::new(graph, resolution)?;
    let degenerate = |community| ObjectiveError::DegenerateDensity {
        community,
        chi: resolution.chi,
    };

    let mut to_source = 0.0;
    let mut to_target = 0.0;
    for (v, w) in graph.neighbors(node) {
        let c = partition.community_of(v);
        if c == source {
            to_source += w;
        } else if c == target {
            to_target += w;
        }
    }
    let strength = graph.strength(node);
    let (dr, db, dq, dd) = match graph.side_of(node) {
        Side::Red => (1, 0, strength, 0.0),
        Side::Blue => (0, 1, 0.0, strength),
    };

    let a = &stats[source];
    let empty = CommunityStats::default();
    let b = if target == k { &empty } else { &stats[target] };

    let before_a = ctx.stats_contribution(a).ok_or_else(|| degenerate(source))?;
    let before_b = ctx.stats_contribution(b).ok_or_else(|| degenerate(target))?;
    let after_a = ctx
        .contribution(
            a.internal_weight - to_source,
            a.red_strength - dq,
            a.blue_strength - dd,
            a.red_count - dr,
            a.blue_count - db,
        )
        .ok_or_else(|| degenerate(source))?;
    let after_b = ctx
        .contribution(
            b.internal_weight + to_target,
            b.red_strength + dq,
            b.blue_strength + dd,
            b.red_count + dr,
            b.blue_count + db,
        )
        .ok_or_else(|| degenerate(target))?;
    Ok((after_a - before_a) + (after_b - before_b))
}
