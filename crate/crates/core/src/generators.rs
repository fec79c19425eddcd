//! Synthetic benchmarks with planted partitions.
//!
//! * [`gen_ring`]: a ring of `n` complete `K_{k,k}` cliques, the standard
//!   resolution-limit testbed.
//! * [`gen_benchmark`]: two complete cliques, their interconnection, and a
//!   weakly attached external component.
//! * [`gen_hierarchy`]: cliques of cliques of cliques, with link weight
//!   falling at every level.
//!
//! Node layouts are documented on each generator; flat indices follow
//! [`BipartiteGraph`] (reds first, then blues).

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::NondimParams;
use crate::graph::{BipartiteGraph, GraphError};
use crate::partition::Partition;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("infeasible generator spec: {0}")]
    Infeasible(String),
    #[error("a merged ring partition pairs adjacent cliques and needs an even clique count, got {0}")]
    OddMergeRequest(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingSpec {
    /// Number of cliques, at least 3.
    pub n: usize,
    /// Side length of each `K_{k,k}`.
    pub k: usize,
}

#[derive(Debug, Clone)]
pub struct RingInstance {
    pub spec: RingSpec,
    pub graph: BipartiteGraph,
    /// One co-cluster per clique.
    pub split: Partition,
}

impl RingInstance {
    /// Adjacent cliques `(0,1), (2,3), …` joined.
    pub fn merged(&self) -> Result<Partition, GenError> {
        let RingSpec { n, k } = self.spec;
        if n % 2 != 0 {
            return Err(GenError::OddMergeRequest(n));
        }
        let labels: Vec<usize> = (0..2 * n * k).map(|v| (v % (n * k)) / k / 2).collect();
        Ok(Partition::from_labels(&labels))
    }
}

/// Clique `i` owns reds and blues `i·k .. (i+1)·k`, all joined with weight 1.
/// Its first blue node links to the first red node of clique `i+1 (mod n)`,
/// so every clique has exactly one red and one blue ring endpoint.
pub fn gen_ring(spec: RingSpec) -> Result<RingInstance, GenError> {
    let RingSpec { n, k } = spec;
    if n < 3 || k < 1 {
        return Err(GenError::InvalidSpec(format!("ring needs n >= 3 and k >= 1, got n={n}, k={k}")));
    }
    let mut edges = Vec::with_capacity(n * k * k + n);
    for c in 0..n {
        for r in 0..k {
            for b in 0..k {
                edges.push((c * k + r, c * k + b, 1.0));
            }
        }
        edges.push((((c + 1) % n) * k, c * k, 1.0));
    }
    let graph = BipartiteGraph::new(n * k, n * k, edges)?;
    let labels: Vec<usize> = (0..2 * n * k).map(|v| (v % (n * k)) / k).collect();
    Ok(RingInstance {
        spec,
        graph,
        split: Partition::from_labels(&labels),
    })
}

/// Two-clique benchmark.
///
/// Clique 1 has `n_r1 × n_b1` nodes, clique 2 has `n_r2 × n_b2`, both complete
/// with unit weights. The remaining totals are spread over distinct red–blue
/// pairs as unit links plus one fractional link for a non-integer total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkSpec {
    pub n_r1: usize,
    pub n_b1: usize,
    pub n_r2: usize,
    pub n_b2: usize,
    /// Total weight between the cliques.
    pub m12: f64,
    /// Total weight between clique 1 and the external component.
    pub m1a: f64,
    /// Total weight between clique 2 and the external component.
    pub m2a: f64,
    /// Total weight inside the external component.
    pub m_a: f64,
    /// External node count; `None` takes the fewest nodes that can hold the
    /// external links.
    pub n_a: Option<usize>,
    /// Weight of each external link (except a fractional remainder).
    pub external_link_weight: f64,
    /// Upper bound on `m1a / (n_r1 n_b1)` and `m2a / (n_r2 n_b2)`.
    pub weak_coupling: f64,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        Self {
            n_r1: 10,
            n_b1: 10,
            n_r2: 10,
            n_b2: 10,
            m12: 0.0,
            m1a: 0.0,
            m2a: 0.0,
            m_a: 0.0,
            n_a: None,
            external_link_weight: 1.0,
            weak_coupling: 0.05,
        }
    }
}

impl BenchmarkSpec {
    /// Square cliques of sides `side1 ≤ side2` with link totals chosen to
    /// realize inter-clique density `d` and external influence `t`.
    pub fn from_nondim(side1: usize, side2: usize, d: f64, t: f64) -> Self {
        let scale = (side1 * side1) as f64 * (side2 * side2) as f64;
        let scale = scale.sqrt();
        Self {
            n_r1: side1,
            n_b1: side1,
            n_r2: side2,
            n_b2: side2,
            m12: d * scale,
            m_a: t * scale,
            ..Self::default()
        }
    }

    fn clique_sizes(&self) -> (f64, f64) {
        (
            self.n_r1 as f64 * self.n_b1 as f64,
            self.n_r2 as f64 * self.n_b2 as f64,
        )
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let (a1, a2) = self.clique_sizes();
        if a1 == 0.0 || a2 == 0.0 {
            return Err(GenError::InvalidSpec("clique sides must be positive".into()));
        }
        if a2 < a1 {
            return Err(GenError::InvalidSpec(
                "clique 2 must be at least as large as clique 1 (n_r2 n_b2 >= n_r1 n_b1)".into(),
            ));
        }
        for (name, v) in [("m12", self.m12), ("m1a", self.m1a), ("m2a", self.m2a), ("m_a", self.m_a)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(GenError::InvalidSpec(format!("{name} must be finite and non-negative")));
            }
        }
        if !(self.external_link_weight > 0.0 && self.external_link_weight.is_finite()) {
            return Err(GenError::InvalidSpec("external_link_weight must be positive".into()));
        }
        if self.m1a > self.weak_coupling * a1 || self.m2a > self.weak_coupling * a2 {
            return Err(GenError::InvalidSpec(format!(
                "attachment weights must satisfy m1a <= {w} n_r1 n_b1 and m2a <= {w} n_r2 n_b2",
                w = self.weak_coupling
            )));
        }
        if self.m12 > (a1 * a2).sqrt() * (1.0 + 1e-12) {
            return Err(GenError::InvalidSpec("m12 exceeds sqrt(n_r1 n_b1 n_r2 n_b2), so d > 1".into()));
        }
        Ok(())
    }

    /// External node count used for generation.
    pub fn external_nodes(&self) -> usize {
        if let Some(n) = self.n_a {
            return n;
        }
        let links = link_count(self.m_a / self.external_link_weight);
        if links == 0 {
            return 0;
        }
        let mut n: usize = 2;
        while (n / 2) * n.div_ceil(2) < links {
            n += 1;
        }
        n
    }

    /// `(d, t, p, r)` of this spec.
    pub fn nondim(&self) -> NondimParams {
        let (a1, a2) = self.clique_sizes();
        let scale = (a1 * a2).sqrt();
        NondimParams::new((a1 / a2).sqrt(), self.m12 / scale, self.m_a / scale)
    }
}

/// Coordinates of a [`BenchmarkSpec`] in the nondimensional parameter space.
pub fn nondim_coordinates(spec: &BenchmarkSpec) -> NondimParams {
    spec.nondim()
}

#[derive(Debug, Clone)]
pub struct BenchmarkInstance {
    pub graph: BipartiteGraph,
    /// Cliques apart, external component as one co-cluster.
    pub split: Partition,
    /// Cliques together, external component as one co-cluster.
    pub merged: Partition,
}

fn link_count(total: f64) -> usize {
    // tolerate representation noise such as 104.00000000000001
    let rounded = total.round();
    if (total - rounded).abs() <= 1e-9 * total.max(1.0) {
        rounded as usize
    } else {
        total.ceil() as usize
    }
}

/// Unit weights plus a fractional remainder adding up to `total`, each
/// scaled by `unit`.
fn link_weights(total: f64, unit: f64) -> Vec<f64> {
    let units = total / unit;
    let count = link_count(units);
    let whole = units.floor().min(count as f64) as usize;
    let mut w = vec![unit; whole.min(count)];
    if w.len() < count {
        w.push(total - unit * w.len() as f64);
    }
    w
}

/// Picks `count` distinct pairs out of `reds_a × blues_b ∪ reds_b × blues_a`.
fn sample_cross_pairs(
    rng: &mut ChaCha8Rng,
    reds_a: std::ops::Range<usize>,
    blues_a: std::ops::Range<usize>,
    reds_b: std::ops::Range<usize>,
    blues_b: std::ops::Range<usize>,
    count: usize,
    what: &str,
) -> Result<Vec<(usize, usize)>, GenError> {
    let first = reds_a.len() * blues_b.len();
    let available = first + reds_b.len() * blues_a.len();
    if count > available {
        return Err(GenError::Infeasible(format!(
            "{what}: {count} links requested but only {available} pairs exist"
        )));
    }
    Ok(index::sample(rng, available, count)
        .into_iter()
        .map(|i| {
            if i < first {
                (reds_a.start + i / blues_b.len(), blues_b.start + i % blues_b.len())
            } else {
                let j = i - first;
                (reds_b.start + j / blues_a.len(), blues_a.start + j % blues_a.len())
            }
        })
        .collect())
}

/// Layout: reds are clique 1, clique 2, then external; blues likewise. The
/// external nodes split as `ceil(n_a/2)` reds and `floor(n_a/2)` blues.
pub fn gen_benchmark(spec: &BenchmarkSpec, seed: u64) -> Result<BenchmarkInstance, GenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_a = spec.external_nodes();
    let (ext_r, ext_b) = (n_a.div_ceil(2), n_a / 2);
    let r1 = 0..spec.n_r1;
    let r2 = spec.n_r1..spec.n_r1 + spec.n_r2;
    let ra = r2.end..r2.end + ext_r;
    let b1 = 0..spec.n_b1;
    let b2 = spec.n_b1..spec.n_b1 + spec.n_b2;
    let ba = b2.end..b2.end + ext_b;

    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for (rs, bs) in [(&r1, &b1), (&r2, &b2)] {
        for r in rs.clone() {
            for b in bs.clone() {
                edges.push((r, b, 1.0));
            }
        }
    }

    let mut place = |rng: &mut ChaCha8Rng,
                     total: f64,
                     ra_: &std::ops::Range<usize>,
                     ba_: &std::ops::Range<usize>,
                     rb_: &std::ops::Range<usize>,
                     bb_: &std::ops::Range<usize>,
                     what: &str|
     -> Result<(), GenError> {
        let weights = link_weights(total, 1.0);
        let pairs = sample_cross_pairs(rng, ra_.clone(), ba_.clone(), rb_.clone(), bb_.clone(), weights.len(), what)?;
        edges.extend(pairs.into_iter().zip(weights).map(|((r, b), w)| (r, b, w)));
        Ok(())
    };
    place(&mut rng, spec.m12, &r1, &b1, &r2, &b2, "m12")?;
    place(&mut rng, spec.m1a, &r1, &b1, &ra, &ba, "m1a")?;
    place(&mut rng, spec.m2a, &r2, &b2, &ra, &ba, "m2a")?;
    edges.extend(external_component(&mut rng, spec, ra.clone(), ba.clone())?);

    let graph = BipartiteGraph::new(ra.end, ba.end, edges)?;
    let red_total = ra.end;
    let label = |v: usize, merged: bool| -> usize {
        let (idx, c1, c2) = if v < red_total {
            (v, &r1, &r2)
        } else {
            (v - red_total, &b1, &b2)
        };
        if c1.contains(&idx) {
            0
        } else if c2.contains(&idx) {
            if merged {
                0
            } else {
                1
            }
        } else {
            2
        }
    };
    let n = graph.node_count();
    let split = Partition::from_labels(&(0..n).map(|v| label(v, false)).collect::<Vec<_>>());
    let merged = Partition::from_labels(&(0..n).map(|v| label(v, true)).collect::<Vec<_>>());
    Ok(BenchmarkInstance { graph, split, merged })
}

/// Random connected bipartite graph on the given ranges with total weight
/// `spec.m_a`: a random spanning tree plus uniformly chosen extra pairs.
fn external_component(
    rng: &mut ChaCha8Rng,
    spec: &BenchmarkSpec,
    reds: std::ops::Range<usize>,
    blues: std::ops::Range<usize>,
) -> Result<Vec<(usize, usize, f64)>, GenError> {
    let n = reds.len() + blues.len();
    let weights = link_weights(spec.m_a, spec.external_link_weight);
    if n == 0 {
        return if weights.is_empty() {
            Ok(Vec::new())
        } else {
            Err(GenError::Infeasible("m_a > 0 but the external component has no nodes".into()))
        };
    }
    if n == 1 && weights.is_empty() {
        return Ok(Vec::new());
    }
    if reds.is_empty() || blues.is_empty() {
        return Err(GenError::Infeasible("external component needs nodes of both classes".into()));
    }
    let capacity = reds.len() * blues.len();
    if weights.len() > capacity {
        return Err(GenError::Infeasible(format!(
            "m_a needs {} links but the external component only has {capacity} pairs",
            weights.len()
        )));
    }
    if weights.len() < n - 1 {
        return Err(GenError::Infeasible(format!(
            "m_a gives {} links, too few to connect {n} external nodes",
            weights.len()
        )));
    }

    // spanning tree: every new node attaches to a placed node of the other class
    let mut order: Vec<(bool, usize)> = reds.clone().map(|r| (true, r)).chain(blues.clone().map(|b| (false, b))).collect();
    order.shuffle(rng);
    let first_red = order.iter().position(|x| x.0).expect("has reds");
    let first_blue = order.iter().position(|x| !x.0).expect("has blues");
    let (i, j) = (first_red.min(first_blue), first_red.max(first_blue));
    order.swap(0, i);
    order.swap(1, j);
    let mut placed_r = Vec::new();
    let mut placed_b = Vec::new();
    let mut in_tree = std::collections::HashSet::new();
    for (is_red, v) in order {
        if is_red {
            if let Some(&b) = placed_b.get(rng.gen_range(0..placed_b.len().max(1))) {
                in_tree.insert((v, b));
            }
            placed_r.push(v);
        } else {
            if let Some(&r) = placed_r.get(rng.gen_range(0..placed_r.len().max(1))) {
                in_tree.insert((r, v));
            }
            placed_b.push(v);
        }
    }
    let mut pairs: Vec<(usize, usize)> = in_tree.iter().copied().collect();
    pairs.sort_unstable();
    let rest: Vec<(usize, usize)> = reds
        .clone()
        .flat_map(|r| blues.clone().map(move |b| (r, b)))
        .filter(|p| !in_tree.contains(p))
        .collect();
    let extra = weights.len() - pairs.len();
    pairs.extend(index::sample(rng, rest.len(), extra).into_iter().map(|i| rest[i]));
    Ok(pairs.into_iter().zip(weights).map(|((r, b), w)| (r, b, w)).collect())
}

/// Hierarchical clique-of-cliques network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchySpec {
    pub levels: usize,
    pub base_red: usize,
    pub base_blue: usize,
    /// Blocks per block of the next level.
    pub branching: usize,
    /// Link weight per level, strictly decreasing; `alpha[0]` is inside the
    /// base cliques.
    pub alpha: Vec<f64>,
}

impl HierarchySpec {
    /// `levels` levels with `alpha_k = levels + 1 - k`, e.g. `4, 3, 2, 1`.
    pub fn linear(levels: usize, base: usize, branching: usize) -> Self {
        Self {
            levels,
            base_red: base,
            base_blue: base,
            branching,
            alpha: (1..=levels).map(|k| (levels + 1 - k) as f64).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.levels < 1 || self.base_red < 1 || self.base_blue < 1 {
            return Err(GenError::InvalidSpec("levels and base sides must be at least 1".into()));
        }
        if self.levels > 1 && self.branching < 2 {
            return Err(GenError::InvalidSpec("branching must be at least 2".into()));
        }
        if self.alpha.len() != self.levels {
            return Err(GenError::InvalidSpec(format!(
                "expected {} level weights, got {}",
                self.levels,
                self.alpha.len()
            )));
        }
        if self.alpha.iter().any(|a| !(*a > 0.0 && a.is_finite())) || self.alpha.windows(2).any(|w| w[1] >= w[0]) {
            return Err(GenError::InvalidSpec("level weights must be positive and strictly decreasing".into()));
        }
        Ok(())
    }

    fn block_size(&self, level: usize, base: usize) -> usize {
        base * self.branching.pow(level as u32 - 1)
    }
}

#[derive(Debug, Clone)]
pub struct HierarchyInstance {
    pub graph: BipartiteGraph,
    /// `levels[j]` groups nodes by their level-`(j+1)` block; the last entry is
    /// the whole graph.
    pub levels: Vec<Partition>,
}

/// Red `i` belongs to level-`j` block `i / (base_red · branching^(j-1))`,
/// blues likewise. A red–blue pair whose lowest common block is at level `j`
/// is linked with weight `alpha[j-1]`; every pair shares the top block, so
/// the graph is complete bipartite.
pub fn gen_hierarchy(spec: &HierarchySpec) -> Result<HierarchyInstance, GenError> {
    spec.validate()?;
    let reds = spec.block_size(spec.levels, spec.base_red);
    let blues = spec.block_size(spec.levels, spec.base_blue);
    let level_of = |r: usize, b: usize| -> usize {
        (1..=spec.levels)
            .find(|&j| r / spec.block_size(j, spec.base_red) == b / spec.block_size(j, spec.base_blue))
            .expect("top block is shared")
    };
    let mut edges = Vec::with_capacity(reds * blues);
    for r in 0..reds {
        for b in 0..blues {
            edges.push((r, b, spec.alpha[level_of(r, b) - 1]));
        }
    }
    let graph = BipartiteGraph::new(reds, blues, edges)?;
    let levels = (1..=spec.levels)
        .map(|j| {
            let labels: Vec<usize> = (0..reds)
                .map(|r| r / spec.block_size(j, spec.base_red))
                .chain((0..blues).map(|b| b / spec.block_size(j, spec.base_blue)))
                .collect();
            Partition::from_labels(&labels)
        })
        .collect();
    Ok(HierarchyInstance { graph, levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::community_stats;

    #[test]
    fn ring_structure() {
        let ring = gen_ring(RingSpec { n: 3, k: 1 }).unwrap();
        assert_eq!(ring.graph.node_count(), 6);
        assert_eq!(ring.graph.edge_count(), 6);
        assert!(matches!(ring.merged(), Err(GenError::OddMergeRequest(3))));
        assert!(gen_ring(RingSpec { n: 2, k: 2 }).is_err());
    }

    #[test]
    fn ring_total_weight() {
        let ring = gen_ring(RingSpec { n: 4, k: 2 }).unwrap();
        assert_eq!(ring.graph.total_weight(), 20.0);
        for (n, k) in [(3, 1), (6, 3), (12, 2)] {
            let ring = gen_ring(RingSpec { n, k }).unwrap();
            assert_eq!(ring.graph.total_weight(), (n * k * k + n) as f64);
        }
    }

    #[test]
    fn ring_split_stats_match_closed_form() {
        // brute-force recount over the generated edges
        let (n, k) = (4, 2);
        let ring = gen_ring(RingSpec { n, k }).unwrap();
        let stats = community_stats(&ring.graph, &ring.split).unwrap();
        assert_eq!(stats.len(), n);
        for (c, s) in stats.iter().enumerate() {
            let members: Vec<usize> = (0..ring.graph.node_count()).filter(|&v| ring.split.community_of(v) == c).collect();
            let internal: f64 = ring
                .graph
                .edges()
                .iter()
                .filter(|e| members.contains(&e.red) && members.contains(&(e.blue + n * k)))
                .map(|e| e.weight)
                .sum();
            assert_eq!(s.internal_weight, internal);
            assert_eq!(internal, (k * k) as f64);
            assert_eq!(s.red_strength * s.blue_strength, ((k * k + 1) * (k * k + 1)) as f64);
        }
        let merged = community_stats(&ring.graph, &ring.merged().unwrap()).unwrap();
        assert!(merged.iter().all(|s| s.internal_weight == (2 * k * k + 1) as f64));
    }

    #[test]
    fn benchmark_without_links_has_three_components() {
        let spec = BenchmarkSpec {
            m_a: 30.0,
            ..BenchmarkSpec::default()
        };
        let inst = gen_benchmark(&spec, 1).unwrap();
        let comps = inst.graph.connected_components();
        let distinct: std::collections::BTreeSet<usize> = comps.into_iter().collect();
        assert_eq!(distinct.len(), 3);
        assert_eq!(inst.split.num_communities(), 3);
        assert_eq!(inst.merged.num_communities(), 2);
    }

    #[test]
    fn benchmark_totals_are_exact() {
        let spec = BenchmarkSpec {
            m12: 37.5,
            m1a: 2.25,
            m2a: 3.0,
            m_a: 50.5,
            ..BenchmarkSpec::default()
        };
        let inst = gen_benchmark(&spec, 7).unwrap();
        let g = &inst.graph;
        let (nr, nb) = (spec.n_r1, spec.n_b1);
        let mut totals = [0.0f64; 4]; // m12, m1a, m2a, m_a
        for e in g.edges() {
            let rc = if e.red < nr { 0 } else if e.red < 2 * nr { 1 } else { 2 };
            let bc = if e.blue < nb { 0 } else if e.blue < 2 * nb { 1 } else { 2 };
            match (rc.min(bc), rc.max(bc)) {
                (0, 1) => totals[0] += e.weight,
                (0, 2) => totals[1] += e.weight,
                (1, 2) => totals[2] += e.weight,
                (2, 2) => totals[3] += e.weight,
                _ => {}
            }
        }
        assert_eq!(totals, [37.5, 2.25, 3.0, 50.5]);
        assert_eq!(g.total_weight(), 200.0 + 37.5 + 2.25 + 3.0 + 50.5);
    }

    #[test]
    fn benchmark_is_deterministic() {
        let spec = BenchmarkSpec {
            m12: 20.0,
            m_a: 40.0,
            ..BenchmarkSpec::default()
        };
        let a = gen_benchmark(&spec, 3).unwrap();
        let b = gen_benchmark(&spec, 3).unwrap();
        assert_eq!(a.graph.edges(), b.graph.edges());
    }

    #[test]
    fn benchmark_external_component_is_connected() {
        let spec = BenchmarkSpec {
            m_a: 12.0,
            ..BenchmarkSpec::default()
        };
        let inst = gen_benchmark(&spec, 11).unwrap();
        let comps = inst.graph.connected_components();
        let external: std::collections::BTreeSet<usize> = (0..inst.graph.node_count())
            .filter(|&v| inst.split.community_of(v) == 2)
            .map(|v| comps[v])
            .collect();
        assert_eq!(external.len(), 1);
    }

    #[test]
    fn benchmark_rejects_bad_specs() {
        let too_big = BenchmarkSpec {
            m12: 101.0,
            ..BenchmarkSpec::default()
        };
        assert!(matches!(gen_benchmark(&too_big, 0), Err(GenError::InvalidSpec(_))));
        let order = BenchmarkSpec {
            n_r1: 11,
            ..BenchmarkSpec::default()
        };
        assert!(matches!(gen_benchmark(&order, 0), Err(GenError::InvalidSpec(_))));
        let strong = BenchmarkSpec {
            m_a: 10.0,
            m1a: 6.0,
            ..BenchmarkSpec::default()
        };
        assert!(matches!(gen_benchmark(&strong, 0), Err(GenError::InvalidSpec(_))));
        let crowded = BenchmarkSpec {
            m_a: 10.0,
            n_a: Some(4),
            ..BenchmarkSpec::default()
        };
        assert!(matches!(gen_benchmark(&crowded, 0), Err(GenError::Infeasible(_))));
    }

    #[test]
    fn full_interconnection_reaches_d_one() {
        let spec = BenchmarkSpec {
            m12: 100.0,
            ..BenchmarkSpec::default()
        };
        assert_eq!(spec.nondim().d, 1.0);
        assert!(gen_benchmark(&spec, 0).is_ok());
    }

    #[test]
    fn nondim_examples() {
        let spec = BenchmarkSpec {
            m12: 50.0,
            m_a: 1e4,
            ..BenchmarkSpec::default()
        };
        let p = nondim_coordinates(&spec);
        assert_eq!((p.p, p.d, p.t, p.r), (1.0, 0.5, 100.0, 2.0));
        let uneven = BenchmarkSpec {
            n_r1: 2,
            n_b1: 2,
            n_r2: 8,
            n_b2: 8,
            ..BenchmarkSpec::default()
        };
        let p = uneven.nondim();
        assert_eq!(p.p, 0.25);
        assert_eq!(p.r, 4.25);
        assert_eq!(p.d, 0.0);
    }

    #[test]
    fn hierarchy_single_level() {
        let spec = HierarchySpec {
            levels: 1,
            base_red: 3,
            base_blue: 3,
            branching: 5,
            alpha: vec![2.5],
        };
        let h = gen_hierarchy(&spec).unwrap();
        assert_eq!(h.graph.edge_count(), 9);
        assert!(h.graph.edges().iter().all(|e| e.weight == 2.5));
    }

    #[test]
    fn hierarchy_two_levels_counts() {
        let spec = HierarchySpec {
            levels: 2,
            base_red: 2,
            base_blue: 2,
            branching: 3,
            alpha: vec![2.0, 1.0],
        };
        let h = gen_hierarchy(&spec).unwrap();
        assert_eq!((h.graph.red_count(), h.graph.blue_count()), (6, 6));
        // enumerate pairs explicitly
        let mut intra = 0;
        let mut inter = 0;
        for r in 0..6 {
            for b in 0..6 {
                if r / 2 == b / 2 {
                    intra += 1;
                } else {
                    inter += 1;
                }
            }
        }
        let heavy = h.graph.edges().iter().filter(|e| e.weight == 2.0).count();
        let light = h.graph.edges().iter().filter(|e| e.weight == 1.0).count();
        assert_eq!((heavy, light), (intra, inter));
        assert_eq!((heavy, light), (12, 24));
    }

    #[test]
    fn hierarchy_levels_are_nested() {
        let h = gen_hierarchy(&HierarchySpec::linear(3, 2, 3)).unwrap();
        assert_eq!(h.levels.len(), 3);
        assert_eq!(h.levels[0].num_communities(), 9);
        assert_eq!(h.levels[1].num_communities(), 3);
        assert_eq!(h.levels[2].num_communities(), 1);
        for w in h.levels.windows(2) {
            for u in 0..h.graph.node_count() {
                for v in 0..h.graph.node_count() {
                    if w[0].community_of(u) == w[0].community_of(v) {
                        assert_eq!(w[1].community_of(u), w[1].community_of(v));
                    }
                }
            }
        }
    }

    #[test]
    fn hierarchy_rejects_increasing_weights() {
        let spec = HierarchySpec {
            levels: 2,
            base_red: 2,
            base_blue: 2,
            branching: 3,
            alpha: vec![1.0, 2.0],
        };
        assert!(matches!(gen_hierarchy(&spec), Err(GenError::InvalidSpec(_))));
    }
}
