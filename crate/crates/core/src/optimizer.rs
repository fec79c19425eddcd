//! Maximization of `Q_bg` at a fixed resolution.
//!
//! The search is a Louvain-style two-phase heuristic:
//!
//! 1. sweeps of single-unit moves in a seeded random order, each unit going
//!    to the neighbouring co-cluster (or a fresh one) with the best gain;
//! 2. collapse of co-clusters into super-units and recursion.
//!
//! Unlike plain modularity, `ρ_c` depends on how many original red and blue
//! nodes a co-cluster holds, so super-units carry their node counts and
//! internal weight along with their strengths. After the aggregation phase a
//! polishing sweep over original nodes considers every co-cluster as a
//! target, which makes the returned partition stable under all single-node
//! moves.
//!
//! Every other restart at `χ > 0` starts from a `χ = 0` optimum instead of
//! singletons. For `χ < 0` a co-cluster without internal weight is not
//! scoreable, so the search never creates one. Starting points are the
//! connected components and the `χ = 0` optimum with zero-density co-clusters
//! folded into their neighbours.
//!
//! Graphs small enough for [`exhaustive_detect`] are solved exactly.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{BipartiteGraph, Side};
use crate::numerics::compensated_sum;
use crate::objective::{evaluate_qbg, ObjectiveError, ObjectiveValue, Resolution, TermContext};
use crate::partition::Partition;

/// Largest node count [`exhaustive_detect`] accepts (Bell(12) ≈ 4.2 million
/// partitions).
pub const EXHAUSTIVE_NODE_LIMIT: usize = 12;

// Outer rounds of (node moves, aggregation, polish).
const MAX_ROUNDS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("{nodes} nodes exceed the exhaustive enumeration limit of {limit}")]
    TooLarge { nodes: usize, limit: usize },
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub seed: u64,
    pub restarts: usize,
    /// Cap on node-move sweeps per level.
    pub max_passes: usize,
    /// Minimum gain for a move to be taken.
    pub tolerance: f64,
    /// Graphs with fewer nodes than this are solved by enumeration.
    pub allow_exhaustive_below: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 8,
            max_passes: 100,
            tolerance: 1e-10,
            allow_exhaustive_below: 10,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        if self.restarts < 1 {
            return Err(OptimizeError::InvalidConfig("restarts must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(OptimizeError::InvalidConfig("tolerance must be positive".into()));
        }
        if self.max_passes < 1 {
            return Err(OptimizeError::InvalidConfig("max_passes must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub partition: Partition,
    pub objective: ObjectiveValue,
    pub chi: f64,
    pub restarts_used: usize,
    pub passes_used: usize,
    /// Set when the result comes from exhaustive enumeration.
    pub exact: bool,
}

impl DetectionResult {
    pub fn num_communities(&self) -> usize {
        self.partition.num_communities()
    }
}

/// Best partition found over `config.restarts` seeded runs.
pub fn detect(
    graph: &BipartiteGraph,
    resolution: Resolution,
    config: &OptimizerConfig,
) -> Result<DetectionResult, OptimizeError> {
    detect_with_starts(graph, resolution, config, &[])
}

/// [`detect`] with extra runs started from the given partitions, e.g. the
/// optimum of a neighbouring resolution. Extra runs never replace the cold
/// restarts.
pub fn detect_with_starts(
    graph: &BipartiteGraph,
    resolution: Resolution,
    config: &OptimizerConfig,
    warm_starts: &[Partition],
) -> Result<DetectionResult, OptimizeError> {
    config.validate()?;
    let n = graph.node_count();
    if n == 0 {
        return Err(OptimizeError::EmptyGraph);
    }
    for p in warm_starts {
        p.check_covers(graph).map_err(ObjectiveError::from)?;
    }
    if n < config.allow_exhaustive_below && n <= EXHAUSTIVE_NODE_LIMIT {
        return exhaustive_detect(graph, resolution);
    }

    let ctx = TermContext::new(graph, resolution)?;
    let level0 = Level::from_graph(graph);
    let negative = resolution.chi < 0.0 && graph.total_weight() > 0.0;

    // Each run draws from its own random stream. Cold restart `i` always uses
    // stream `i`, so raising `restarts` only adds runs.
    let mut starts: Vec<(u64, Start)> = (0..config.restarts).map(|i| (i as u64, Start::Cold)).collect();
    if negative {
        starts.push((u64::MAX, Start::Components));
    }
    starts.extend(
        warm_starts
            .iter()
            .enumerate()
            .map(|(j, p)| (u64::MAX - 1 - j as u64, Start::Warm(p.clone()))),
    );

    let zero_ctx = TermContext::new(graph, Resolution::new(0.0, resolution.density_mode))?;
    let runs: Vec<(Vec<usize>, usize)> = starts
        .par_iter()
        .map(|(i, start)| {
            let i = *i;
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i);
            let mut passes = 0;
            let init = match start {
                Start::Cold if !negative && (resolution.chi == 0.0 || i % 2 == 0) => (0..n).collect(),
                Start::Cold => {
                    // Odd restarts continue from the zero-resolution optimum.
                    // For negative resolutions it is the only cold start, once
                    // its empty-density co-clusters are folded away.
                    let singletons: Vec<usize> = (0..n).collect();
                    let (a, p) = optimize_from(&level0, &zero_ctx, singletons, &mut rng, config);
                    passes += p;
                    if negative {
                        repair_degenerate(&level0, &ctx, a)
                    } else {
                        a
                    }
                }
                Start::Components => repair_degenerate(&level0, &ctx, graph.connected_components()),
                Start::Warm(p) if negative => repair_degenerate(&level0, &ctx, p.assignment().to_vec()),
                Start::Warm(p) => p.assignment().to_vec(),
            };
            let (assign, p) = optimize_from(&level0, &ctx, init, &mut rng, config);
            (assign, passes + p)
        })
        .collect();

    let mut best: Option<(Partition, ObjectiveValue)> = None;
    let mut passes_used = 0;
    for (assign, passes) in runs {
        passes_used += passes;
        let partition = Partition::from_labels(&assign);
        let value = evaluate_qbg(graph, &partition, resolution)?;
        if best.as_ref().map_or(true, |(_, b)| value.total > b.total) {
            best = Some((partition, value));
        }
    }
    let (partition, objective) = best.expect("at least one restart");
    Ok(DetectionResult {
        partition,
        objective,
        chi: resolution.chi,
        restarts_used: starts.len(),
        passes_used,
        exact: false,
    })
}

/// Global optimum by enumerating every set partition of the node set.
/// Partitions that are not scoreable at a negative resolution are skipped;
/// among equal optima the first in enumeration order wins.
pub fn exhaustive_detect(graph: &BipartiteGraph, resolution: Resolution) -> Result<DetectionResult, OptimizeError> {
    let n = graph.node_count();
    if n == 0 {
        return Err(OptimizeError::EmptyGraph);
    }
    if n > EXHAUSTIVE_NODE_LIMIT {
        return Err(OptimizeError::TooLarge {
            nodes: n,
            limit: EXHAUSTIVE_NODE_LIMIT,
        });
    }
    let mut best: Option<(Partition, ObjectiveValue)> = None;
    let mut seen = 0;
    for labels in SetPartitions::new(n) {
        seen += 1;
        let partition = Partition::from_labels(&labels);
        match evaluate_qbg(graph, &partition, resolution) {
            Ok(value) => {
                if best.as_ref().map_or(true, |(_, b)| value.total > b.total) {
                    best = Some((partition, value));
                }
            }
            Err(ObjectiveError::DegenerateDensity { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    // The whole node set is scoreable whenever F > 0, and every partition
    // scores zero when F = 0, so `best` is always set.
    let (partition, objective) = best.expect("a scoreable partition exists");
    Ok(DetectionResult {
        partition,
        objective,
        chi: resolution.chi,
        restarts_used: seen,
        passes_used: 0,
        exact: true,
    })
}

/// All set partitions of `0..n` as restricted growth strings, in
/// lexicographic order. There are Bell(n) of them.
#[derive(Debug, Clone)]
pub struct SetPartitions {
    labels: Vec<usize>,
    prefix_max: Vec<usize>,
    done: bool,
}

impl SetPartitions {
    pub fn new(n: usize) -> Self {
        Self {
            labels: vec![0; n],
            prefix_max: vec![0; n],
            done: false,
        }
    }
}

impl Iterator for SetPartitions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.labels.clone();
        let n = self.labels.len();
        // rightmost position that can still grow
        let mut i = n;
        loop {
            if i <= 1 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.labels[i] <= self.prefix_max[i - 1] {
                self.labels[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.labels[i]);
                for j in i + 1..n {
                    self.labels[j] = 0;
                    self.prefix_max[j] = self.prefix_max[i];
                }
                break;
            }
        }
        Some(out)
    }
}

#[derive(Debug, Clone)]
enum Start {
    Cold,
    Components,
    Warm(Partition),
}

/// Aggregates of a unit or a co-cluster.
#[derive(Debug, Clone, Copy, Default)]
struct Agg {
    internal: f64,
    red_strength: f64,
    blue_strength: f64,
    red_count: usize,
    blue_count: usize,
}

impl Agg {
    fn is_empty(&self) -> bool {
        self.red_count == 0 && self.blue_count == 0
    }

    fn score(&self, ctx: &TermContext) -> Option<f64> {
        ctx.contribution(
            self.internal,
            self.red_strength,
            self.blue_strength,
            self.red_count,
            self.blue_count,
        )
    }

    /// `self` with `unit` added; `link` is the weight between them.
    fn plus(&self, unit: &Agg, link: f64) -> Agg {
        Agg {
            internal: self.internal + unit.internal + link,
            red_strength: self.red_strength + unit.red_strength,
            blue_strength: self.blue_strength + unit.blue_strength,
            red_count: self.red_count + unit.red_count,
            blue_count: self.blue_count + unit.blue_count,
        }
    }

    fn minus(&self, unit: &Agg, link: f64) -> Agg {
        let red_count = self.red_count - unit.red_count;
        let blue_count = self.blue_count - unit.blue_count;
        if red_count == 0 && blue_count == 0 {
            return Agg::default();
        }
        Agg {
            internal: (self.internal - unit.internal - link).max(0.0),
            red_strength: (self.red_strength - unit.red_strength).max(0.0),
            blue_strength: (self.blue_strength - unit.blue_strength).max(0.0),
            red_count,
            blue_count,
        }
    }
}

/// Weighted graph over units (original nodes or collapsed co-clusters).
#[derive(Debug, Clone)]
struct Level {
    units: Vec<Agg>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl Level {
    fn from_graph(graph: &BipartiteGraph) -> Self {
        let units = (0..graph.node_count())
            .map(|v| {
                let s = graph.strength(v);
                match graph.side_of(v) {
                    Side::Red => Agg {
                        red_strength: s,
                        red_count: 1,
                        ..Agg::default()
                    },
                    Side::Blue => Agg {
                        blue_strength: s,
                        blue_count: 1,
                        ..Agg::default()
                    },
                }
            })
            .collect();
        let adj = (0..graph.node_count()).map(|v| graph.neighbors(v).collect()).collect();
        Self { units, adj }
    }

    fn len(&self) -> usize {
        self.units.len()
    }

    /// Collapses units by a canonical assignment with `k` labels.
    fn aggregate(&self, assign: &[usize], k: usize) -> Level {
        let mut units = vec![Agg::default(); k];
        for (u, &c) in assign.iter().enumerate() {
            units[c] = units[c].plus(&self.units[u], 0.0);
        }
        let mut links: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); k];
        for (u, nbrs) in self.adj.iter().enumerate() {
            let cu = assign[u];
            for &(v, w) in nbrs {
                let cv = assign[v];
                if cu == cv {
                    // each internal link is seen from both ends
                    units[cu].internal += 0.5 * w;
                } else {
                    *links[cu].entry(cv).or_insert(0.0) += w;
                }
            }
        }
        let adj = links.into_iter().map(|m| m.into_iter().collect()).collect();
        Level { units, adj }
    }
}

/// Relabels to contiguous ids in order of first appearance.
fn canonical(assign: &[usize]) -> (Vec<usize>, usize) {
    let p = Partition::from_labels(assign);
    let k = p.num_communities();
    (p.into(), k)
}

fn objective_of(level: &Level, ctx: &TermContext, assign: &[usize]) -> Option<f64> {
    let (assign, k) = canonical(assign);
    let level1 = level.aggregate(&assign, k);
    let parts = level1
        .units
        .iter()
        .map(|a| a.score(ctx))
        .collect::<Option<Vec<_>>>()?;
    Some(compensated_sum(parts))
}

/// Louvain rounds from `init` (an assignment over the units of `level0`).
fn optimize_from(
    level0: &Level,
    ctx: &TermContext,
    init: Vec<usize>,
    rng: &mut ChaCha8Rng,
    config: &OptimizerConfig,
) -> (Vec<usize>, usize) {
    let (mut assign, _) = canonical(&init);
    let mut passes = 0;
    let mut current = objective_of(level0, ctx, &assign).unwrap_or(f64::NEG_INFINITY);
    for _ in 0..MAX_ROUNDS {
        let mut next = assign.clone();
        passes += local_moves(level0, ctx, &mut next, rng, config, false).1;

        let (mut mapping, k) = canonical(&next);
        let mut level = level0.aggregate(&mapping, k);
        loop {
            let mut sub: Vec<usize> = (0..level.len()).collect();
            let (moved, p) = local_moves(&level, ctx, &mut sub, rng, config, false);
            passes += p;
            if !moved {
                break;
            }
            let (sub, k) = canonical(&sub);
            for c in mapping.iter_mut() {
                *c = sub[*c];
            }
            level = level.aggregate(&sub, k);
        }

        passes += local_moves(level0, ctx, &mut mapping, rng, config, true).1;
        let (mapping, _) = canonical(&mapping);
        let value = objective_of(level0, ctx, &mapping).unwrap_or(f64::NEG_INFINITY);
        if value > current {
            let improved = value > current + config.tolerance;
            assign = mapping;
            current = value;
            if improved {
                continue;
            }
        }
        break;
    }
    (assign, passes)
}

/// Sweeps of single-unit moves until no move gains more than the tolerance.
///
/// With `all_targets` every nonempty co-cluster is a candidate, otherwise
/// only those adjacent to the unit. A fresh co-cluster is always a candidate
/// when the unit can stand alone. Returns whether anything moved and the
/// number of sweeps.
fn local_moves(
    level: &Level,
    ctx: &TermContext,
    assign: &mut [usize],
    rng: &mut ChaCha8Rng,
    config: &OptimizerConfig,
    all_targets: bool,
) -> (bool, usize) {
    let n = level.len();
    let slots = n.max(assign.iter().copied().max().map_or(0, |m| m + 1));
    let mut comms = vec![Agg::default(); slots];
    for (u, &c) in assign.iter().enumerate() {
        comms[c] = comms[c].plus(&level.units[u], 0.0);
    }
    for (u, nbrs) in level.adj.iter().enumerate() {
        for &(v, w) in nbrs {
            if assign[u] == assign[v] {
                comms[assign[u]].internal += 0.5 * w;
            }
        }
    }
    let mut empty: BTreeSet<usize> = (0..slots).filter(|&c| comms[c].is_empty()).collect();
    let mut nonempty: BTreeSet<usize> = (0..slots).filter(|&c| !comms[c].is_empty()).collect();

    let mut link = vec![0.0_f64; slots];
    let mut touched: Vec<usize> = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    let mut moved_any = false;
    let mut passes = 0;

    while passes < config.max_passes {
        passes += 1;
        order.shuffle(rng);
        let mut moved = false;
        for &u in &order {
            let unit = &level.units[u];
            let source = assign[u];
            for &(v, w) in &level.adj[u] {
                let c = assign[v];
                if link[c] == 0.0 {
                    touched.push(c);
                }
                link[c] += w;
            }

            let best = best_move(
                ctx,
                &comms,
                unit,
                source,
                &link,
                &touched,
                &nonempty,
                &empty,
                all_targets,
                config.tolerance,
            );

            for &c in &touched {
                link[c] = 0.0;
            }
            touched.clear();

            if let Some((target, to_source, to_target)) = best {
                comms[source] = comms[source].minus(unit, to_source);
                comms[target] = comms[target].plus(unit, to_target);
                assign[u] = target;
                if comms[source].is_empty() {
                    nonempty.remove(&source);
                    empty.insert(source);
                }
                empty.remove(&target);
                nonempty.insert(target);
                moved = true;
            }
        }
        if !moved {
            break;
        }
        moved_any = true;
    }
    (moved_any, passes)
}

/// Target with the largest gain above `tolerance`, as
/// `(target, weight to source, weight to target)`. Ties go to the lowest id.
#[allow(clippy::too_many_arguments)]
fn best_move(
    ctx: &TermContext,
    comms: &[Agg],
    unit: &Agg,
    source: usize,
    link: &[f64],
    touched: &[usize],
    nonempty: &BTreeSet<usize>,
    empty: &BTreeSet<usize>,
    all_targets: bool,
    tolerance: f64,
) -> Option<(usize, f64, f64)> {
    let to_source = link[source];
    let before = comms[source].score(ctx)?;
    let remainder = comms[source].minus(unit, to_source);
    let leave_gain = remainder.score(ctx)? - before;

    let mut best: Option<(usize, f64)> = None;
    let mut consider = |c: usize| {
        if c == source {
            return;
        }
        let target = &comms[c];
        let (Some(before), Some(after)) = (target.score(ctx), target.plus(unit, link[c]).score(ctx)) else {
            return;
        };
        let gain = leave_gain + after - before;
        match best {
            Some((bc, bg)) if gain < bg || (gain == bg && c > bc) => {}
            _ => best = Some((c, gain)),
        }
    };
    if all_targets {
        nonempty.iter().for_each(|&c| consider(c));
    } else {
        touched.iter().for_each(|&c| consider(c));
    }
    if !remainder.is_empty() {
        if let Some(&fresh) = empty.iter().next() {
            consider(fresh);
        }
    }

    best.filter(|&(_, gain)| gain > tolerance)
        .map(|(c, _)| (c, to_source, link[c]))
}

/// Folds co-clusters that cannot be scored (zero internal weight at `χ < 0`)
/// into the neighbour they share the most weight with, or into the heaviest
/// co-cluster when they have no neighbour.
fn repair_degenerate(level0: &Level, ctx: &TermContext, assign: Vec<usize>) -> Vec<usize> {
    let (mut assign, _) = canonical(&assign);
    loop {
        let (canon, k) = canonical(&assign);
        assign = canon;
        if k <= 1 {
            return assign;
        }
        let level = level0.aggregate(&assign, k);
        let Some(bad) = (0..k).find(|&c| level.units[c].score(ctx).is_none()) else {
            return assign;
        };
        let target = level.adj[bad]
            .iter()
            .fold(None::<(usize, f64)>, |acc, &(c, w)| match acc {
                Some((_, bw)) if w <= bw => acc,
                _ => Some((c, w)),
            })
            .map(|(c, _)| c)
            .unwrap_or_else(|| {
                (0..k)
                    .filter(|&c| c != bad)
                    .fold((usize::MAX, f64::NEG_INFINITY), |acc, c| {
                        let w = level.units[c].internal;
                        if w > acc.1 {
                            (c, w)
                        } else {
                            acc
                        }
                    })
                    .0
            });
        for c in assign.iter_mut() {
            if *c == bad {
                *c = target;
            }
        }
    }
}
