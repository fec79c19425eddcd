//! Co-cluster assignments and per-co-cluster aggregates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{BipartiteGraph, Side};
use crate::numerics::Accumulator;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error("partition covers {partition} nodes but the graph has {graph}")]
    PartitionMismatch { partition: usize, graph: usize },
    #[error("partitions cover different node universes ({left} vs {right})")]
    UniverseMismatch { left: usize, right: usize },
}

/// Assignment of every node (flat index, both classes) to a co-cluster.
///
/// Ids are always canonical: contiguous from zero and numbered in order of
/// first appearance, so two partitions that differ only by relabelling compare
/// equal with `==`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", from = "Vec<usize>")]
pub struct Partition {
    assignment: Vec<usize>,
    num_communities: usize,
}

impl Partition {
    /// Canonicalizes arbitrary labels.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut remap = std::collections::HashMap::new();
        let assignment: Vec<usize> = labels
            .iter()
            .map(|l| {
                let next = remap.len();
                *remap.entry(*l).or_insert(next)
            })
            .collect();
        Self {
            assignment,
            num_communities: remap.len(),
        }
    }

    pub fn singletons(node_count: usize) -> Self {
        Self {
            assignment: (0..node_count).collect(),
            num_communities: node_count,
        }
    }

    pub fn whole(node_count: usize) -> Self {
        Self {
            assignment: vec![0; node_count],
            num_communities: usize::from(node_count > 0),
        }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn num_communities(&self) -> usize {
        self.num_communities
    }

    pub fn community_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Nodes of each community, in ascending order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_communities];
        for (node, &c) in self.assignment.iter().enumerate() {
            out[c].push(node);
        }
        out
    }

    /// Copy with `node` moved to `target`; `target == num_communities` opens a
    /// new community.
    pub fn with_move(&self, node: usize, target: usize) -> Self {
        let mut labels = self.assignment.clone();
        labels[node] = target;
        Self::from_labels(&labels)
    }

    pub fn check_covers(&self, graph: &BipartiteGraph) -> Result<(), PartitionError> {
        if self.len() != graph.node_count() {
            return Err(PartitionError::PartitionMismatch {
                partition: self.len(),
                graph: graph.node_count(),
            });
        }
        Ok(())
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.assignment
    }
}

impl From<Vec<usize>> for Partition {
    fn from(labels: Vec<usize>) -> Self {
        Partition::from_labels(&labels)
    }
}

/// True iff both partitions group the nodes identically, ignoring ids.
pub fn partition_equal(a: &Partition, b: &Partition) -> Result<bool, PartitionError> {
    if a.len() != b.len() {
        return Err(PartitionError::UniverseMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.assignment == b.assignment)
}

/// Aggregates of one co-cluster.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CommunityStats {
    /// `m_c`, weight of edges with both ends inside.
    pub internal_weight: f64,
    /// `q_c`, summed strength of the red members.
    pub red_strength: f64,
    /// `d_c`, summed strength of the blue members.
    pub blue_strength: f64,
    pub red_count: usize,
    pub blue_count: usize,
}

impl CommunityStats {
    /// Number of red–blue pairs inside the co-cluster.
    pub fn pair_count(&self) -> f64 {
        self.red_count as f64 * self.blue_count as f64
    }

    pub fn is_empty(&self) -> bool {
        self.red_count == 0 && self.blue_count == 0
    }
}

/// One [`CommunityStats`] per community id of `partition`.
pub fn community_stats(
    graph: &BipartiteGraph,
    partition: &Partition,
) -> Result<Vec<CommunityStats>, PartitionError> {
    partition.check_covers(graph)?;
    let k = partition.num_communities();
    let mut stats = vec![CommunityStats::default(); k];
    let mut internal = vec![Accumulator::default(); k];
    let mut red = vec![Accumulator::default(); k];
    let mut blue = vec![Accumulator::default(); k];
    for node in 0..graph.node_count() {
        let c = partition.community_of(node);
        match graph.side_of(node) {
            Side::Red => {
                stats[c].red_count += 1;
                red[c].add(graph.strength(node));
            }
            Side::Blue => {
                stats[c].blue_count += 1;
                blue[c].add(graph.strength(node));
            }
        }
    }
    let red_count = graph.red_count();
    for e in graph.edges() {
        let c = partition.community_of(e.red);
        if c == partition.community_of(red_count + e.blue) {
            internal[c].add(e.weight);
        }
    }
    for (c, s) in stats.iter_mut().enumerate() {
        s.internal_weight = internal[c].value();
        s.red_strength = red[c].value();
        s.blue_strength = blue[c].value();
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k22() -> BipartiteGraph {
        BipartiteGraph::new(2, 2, [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]).unwrap()
    }

    #[test]
    fn labels_are_canonicalized() {
        let p = Partition::from_labels(&[7, 7, 3, 9]);
        assert_eq!(p.assignment(), &[0, 0, 1, 2]);
        assert_eq!(p.num_communities(), 3);
        assert_eq!(p.members(), vec![vec![0, 1], vec![2], vec![3]]);
    }

    #[test]
    fn equality_ignores_relabelling() {
        let a = Partition::from_labels(&[0, 1, 0, 2]);
        let b = Partition::from_labels(&[5, 3, 5, 4]);
        assert!(partition_equal(&a, &b).unwrap());
        let c = Partition::from_labels(&[0, 1, 1, 2]);
        assert!(!partition_equal(&a, &c).unwrap());
        assert!(!partition_equal(&Partition::singletons(2), &Partition::whole(2)).unwrap());
        assert!(matches!(
            partition_equal(&a, &Partition::whole(3)),
            Err(PartitionError::UniverseMismatch { .. })
        ));
    }

    #[test]
    fn whole_k22_stats() {
        let s = community_stats(&k22(), &Partition::whole(4)).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].internal_weight, 4.0);
        assert_eq!(s[0].red_strength, 4.0);
        assert_eq!(s[0].blue_strength, 4.0);
        assert_eq!((s[0].red_count, s[0].blue_count), (2, 2));
    }

    #[test]
    fn singleton_k22_stats() {
        let s = community_stats(&k22(), &Partition::singletons(4)).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|c| c.internal_weight == 0.0));
    }

    #[test]
    fn mismatch_is_reported() {
        assert!(matches!(
            community_stats(&k22(), &Partition::whole(3)),
            Err(PartitionError::PartitionMismatch { partition: 3, graph: 4 })
        ));
    }

    #[test]
    fn moves_open_new_communities() {
        let p = Partition::whole(3).with_move(1, 1);
        assert_eq!(p.assignment(), &[0, 1, 0]);
        let q = p.with_move(1, 0);
        assert_eq!(q, Partition::whole(3));
    }
}
