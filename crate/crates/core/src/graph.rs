//! Immutable weighted bipartite graph.
//!
//! Nodes are identified by their class and a dense index within that class.
//! Where a single index space is convenient (partitions, optimizer state) red
//! node `i` maps to flat index `i` and blue node `j` to `red_count + j`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::compensated_sum;

/// The two node classes of a bipartite graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Red,
    Blue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub red: usize,
    pub blue: usize,
    pub weight: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("edge ({red}, {blue}) is out of bounds for a {red_count}x{blue_count} graph")]
    OutOfBounds {
        red: usize,
        blue: usize,
        red_count: usize,
        blue_count: usize,
    },
    #[error("duplicate edge ({red}, {blue})")]
    DuplicateEdge { red: usize, blue: usize },
    #[error("edge ({red}, {blue}) has non-positive or non-finite weight {weight}")]
    NonPositiveWeight { red: usize, blue: usize, weight: f64 },
}

#[derive(Debug, Clone)]
pub struct BipartiteGraph {
    red_count: usize,
    blue_count: usize,
    edges: Vec<Edge>,
    total_weight: f64,
    max_weight: f64,
    red_strengths: Vec<f64>,
    blue_strengths: Vec<f64>,
    // adjacency lists of (opposite-class index, weight)
    red_adj: Vec<Vec<(usize, f64)>>,
    blue_adj: Vec<Vec<(usize, f64)>>,
}

impl BipartiteGraph {
    /// Builds a graph from `(red, blue, weight)` triples.
    ///
    /// Parallel edges are rejected rather than merged, and every weight must be
    /// strictly positive and finite.
    pub fn new<I>(red_count: usize, blue_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut seen = HashSet::new();
        let mut list = Vec::new();
        let mut red_adj = vec![Vec::new(); red_count];
        let mut blue_adj = vec![Vec::new(); blue_count];
        for (red, blue, weight) in edges {
            if red >= red_count || blue >= blue_count {
                return Err(GraphError::OutOfBounds {
                    red,
                    blue,
                    red_count,
                    blue_count,
                });
            }
            if !(weight > 0.0 && weight.is_finite()) {
                return Err(GraphError::NonPositiveWeight { red, blue, weight });
            }
            if !seen.insert((red, blue)) {
                return Err(GraphError::DuplicateEdge { red, blue });
            }
            red_adj[red].push((blue, weight));
            blue_adj[blue].push((red, weight));
            list.push(Edge { red, blue, weight });
        }

        let total_weight = compensated_sum(list.iter().map(|e| e.weight));
        let max_weight = list.iter().map(|e| e.weight).fold(0.0, f64::max);
        let red_strengths = red_adj
            .iter()
            .map(|adj| compensated_sum(adj.iter().map(|&(_, w)| w)))
            .collect();
        let blue_strengths = blue_adj
            .iter()
            .map(|adj| compensated_sum(adj.iter().map(|&(_, w)| w)))
            .collect();

        Ok(Self {
            red_count,
            blue_count,
            edges: list,
            total_weight,
            max_weight,
            red_strengths,
            blue_strengths,
            red_adj,
            blue_adj,
        })
    }

    pub fn red_count(&self) -> usize {
        self.red_count
    }

    pub fn blue_count(&self) -> usize {
        self.blue_count
    }

    /// Number of nodes over both classes.
    pub fn node_count(&self) -> usize {
        self.red_count + self.blue_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// `F`, the sum of all edge weights.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// `w_max`, zero for an edgeless graph.
    pub fn max_weight(&self) -> f64 {
        self.max_weight
    }

    pub fn red_strengths(&self) -> &[f64] {
        &self.red_strengths
    }

    pub fn blue_strengths(&self) -> &[f64] {
        &self.blue_strengths
    }

    /// True when every edge has weight exactly 1.
    pub fn is_unit_weighted(&self) -> bool {
        self.edges.iter().all(|e| e.weight == 1.0)
    }

    pub fn side_of(&self, node: usize) -> Side {
        if node < self.red_count {
            Side::Red
        } else {
            Side::Blue
        }
    }

    /// Flat index of a node given its class and class-local index.
    pub fn flat_index(&self, side: Side, index: usize) -> usize {
        match side {
            Side::Red => index,
            Side::Blue => self.red_count + index,
        }
    }

    /// Inverse of [`flat_index`](Self::flat_index).
    pub fn split_index(&self, node: usize) -> (Side, usize) {
        if node < self.red_count {
            (Side::Red, node)
        } else {
            (Side::Blue, node - self.red_count)
        }
    }

    /// Weighted degree of a flat node.
    pub fn strength(&self, node: usize) -> f64 {
        match self.split_index(node) {
            (Side::Red, i) => self.red_strengths[i],
            (Side::Blue, j) => self.blue_strengths[j],
        }
    }

    /// Neighbours of a flat node as `(flat neighbour, weight)`.
    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (side, idx) = self.split_index(node);
        let offset = match side {
            Side::Red => self.red_count,
            Side::Blue => 0,
        };
        let adj = match side {
            Side::Red => &self.red_adj[idx],
            Side::Blue => &self.blue_adj[idx],
        };
        adj.iter().map(move |&(other, w)| (other + offset, w))
    }

    /// Same topology with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, GraphError> {
        Self::new(
            self.red_count,
            self.blue_count,
            self.edges.iter().map(|e| (e.red, e.blue, e.weight * factor)),
        )
    }

    /// Connected components over flat node indices, labelled in order of the
    /// lowest node in each component.
    pub fn connected_components(&self) -> Vec<usize> {
        let n = self.node_count();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for (v, _) in self.neighbors(u) {
                    if label[v] == usize::MAX {
                        label[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        label
    }
}
