//! Resolution sweeps.
//!
//! Detection is repeated over a grid of `χ` values. Grid points whose optimal
//! partitions coincide (up to relabelling) form plateaus; adjacent points with
//! different partitions bracket a transition, which can be refined by
//! bisection.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::BipartiteGraph;
use crate::numerics::{bisect, linspace};
use crate::objective::{evaluate_qbg, DensityMode, ObjectiveError, Resolution};
use crate::optimizer::{detect_with_starts, DetectionResult, OptimizeError, OptimizerConfig};
use crate::partition::{partition_equal, Partition, PartitionError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("a sweep needs at least 2 grid points, got {0}")]
    TooFewSteps(usize),
    #[error("chi range [{min}, {max}] is empty or not finite")]
    InvalidRange { min: f64, max: f64 },
    #[error("chi grid must be strictly increasing")]
    UnorderedGrid,
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub optimizer: OptimizerConfig,
    /// `None` picks [`DensityMode::default_for`] the graph.
    pub density_mode: Option<DensityMode>,
    /// Adds the previous grid point's optimum as an extra start.
    pub warm_start: bool,
    /// Bisect every transition down to this `χ` width; `None` skips refinement.
    pub refine_tolerance: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::default(),
            density_mode: None,
            warm_start: true,
            refine_tolerance: None,
        }
    }
}

/// Outcome at one grid point. Failures are recorded, never fatal to the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub chi: f64,
    pub result: Option<DetectionResult>,
    pub error: Option<String>,
}

impl SweepPoint {
    pub fn num_communities(&self) -> Option<usize> {
        self.result.as_ref().map(|r| r.num_communities())
    }
}

/// Maximal run of consecutive grid points sharing one partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub first: usize,
    pub last: usize,
    pub chi_start: f64,
    pub chi_end: f64,
    pub num_communities: usize,
}

/// A change of optimal partition between two resolutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    /// Last resolution known to give the left partition.
    pub chi_below: f64,
    /// First resolution known to give a different partition.
    pub chi_above: f64,
    pub communities_below: usize,
    pub communities_above: usize,
}

impl Transition {
    pub fn chi(&self) -> f64 {
        0.5 * (self.chi_below + self.chi_above)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionProfile {
    pub chi_grid: Vec<f64>,
    pub points: Vec<SweepPoint>,
    pub plateaus: Vec<Plateau>,
    pub transitions: Vec<Transition>,
    pub density_mode: DensityMode,
}

impl ResolutionProfile {
    /// `(χ, community count)` rows for the grid points that succeeded.
    pub fn community_counts(&self) -> Vec<(f64, usize)> {
        self.points
            .iter()
            .filter_map(|p| p.num_communities().map(|k| (p.chi, k)))
            .collect()
    }

    /// Grid indices where the community count drops as `χ` grows.
    pub fn non_monotone_points(&self) -> Vec<usize> {
        let counts: Vec<Option<usize>> = self.points.iter().map(|p| p.num_communities()).collect();
        (1..counts.len())
            .filter(|&i| matches!((counts[i - 1], counts[i]), (Some(a), Some(b)) if b < a))
            .collect()
    }
}

/// Detection on `steps` evenly spaced resolutions from `chi_min` to `chi_max`.
pub fn sweep_chi(
    graph: &BipartiteGraph,
    chi_min: f64,
    chi_max: f64,
    steps: usize,
    config: &SweepConfig,
) -> Result<ResolutionProfile, SweepError> {
    if steps < 2 {
        return Err(SweepError::TooFewSteps(steps));
    }
    if !(chi_min < chi_max) || !chi_min.is_finite() || !chi_max.is_finite() {
        return Err(SweepError::InvalidRange {
            min: chi_min,
            max: chi_max,
        });
    }
    sweep_grid(graph, &linspace(chi_min, chi_max, steps), config)
}

/// [`sweep_chi`] over an explicit, strictly increasing grid.
pub fn sweep_grid(
    graph: &BipartiteGraph,
    chi_grid: &[f64],
    config: &SweepConfig,
) -> Result<ResolutionProfile, SweepError> {
    if chi_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(SweepError::UnorderedGrid);
    }
    config.optimizer.validate()?;
    let mode = config.density_mode.unwrap_or_else(|| DensityMode::default_for(graph));

    let mut points: Vec<SweepPoint> = Vec::with_capacity(chi_grid.len());
    let mut previous: Option<Partition> = None;
    for &chi in chi_grid {
        let warm: Vec<Partition> = if config.warm_start {
            previous.iter().cloned().collect()
        } else {
            Vec::new()
        };
        let point = match detect_with_starts(graph, Resolution::new(chi, mode), &config.optimizer, &warm) {
            Ok(result) => {
                previous = Some(result.partition.clone());
                SweepPoint {
                    chi,
                    result: Some(result),
                    error: None,
                }
            }
            Err(e) => SweepPoint {
                chi,
                result: None,
                error: Some(e.to_string()),
            },
        };
        points.push(point);
    }

    let plateaus = plateaus(&points);
    let mut transitions = Vec::new();
    for w in plateaus.windows(2) {
        let (left, right) = (&points[w[0].last], &points[w[1].first]);
        let (Some(a), Some(b)) = (&left.result, &right.result) else {
            continue;
        };
        let t = match config.refine_tolerance {
            Some(tol) => refine_transition(graph, mode, &config.optimizer, left.chi, a, right.chi, b, tol)?,
            None => Transition {
                chi_below: left.chi,
                chi_above: right.chi,
                communities_below: a.num_communities(),
                communities_above: b.num_communities(),
            },
        };
        transitions.push(t);
    }

    Ok(ResolutionProfile {
        chi_grid: chi_grid.to_vec(),
        points,
        plateaus,
        transitions,
        density_mode: mode,
    })
}

fn plateaus(points: &[SweepPoint]) -> Vec<Plateau> {
    let mut out: Vec<Plateau> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let Some(result) = &p.result else {
            continue;
        };
        if let Some(last) = out.last_mut() {
            if last.last + 1 == i {
                if let Some(prev) = &points[last.last].result {
                    if prev.partition == result.partition {
                        last.last = i;
                        last.chi_end = p.chi;
                        continue;
                    }
                }
            }
        }
        out.push(Plateau {
            first: i,
            last: i,
            chi_start: p.chi,
            chi_end: p.chi,
            num_communities: result.num_communities(),
        });
    }
    out
}

/// Narrows the interval between two resolutions with different optima until
/// it is at most `tolerance` wide. Midpoints matching the left optimum move
/// the lower bound, anything else moves the upper bound, so the first change
/// above `chi_below` is located.
#[allow(clippy::too_many_arguments)]
pub fn refine_transition(
    graph: &BipartiteGraph,
    mode: DensityMode,
    config: &OptimizerConfig,
    mut chi_below: f64,
    below: &DetectionResult,
    mut chi_above: f64,
    above: &DetectionResult,
    tolerance: f64,
) -> Result<Transition, SweepError> {
    let mut communities_above = above.num_communities();
    let mut warm = vec![below.partition.clone(), above.partition.clone()];
    while chi_above - chi_below > tolerance {
        let mid = 0.5 * (chi_below + chi_above);
        let r = detect_with_starts(graph, Resolution::new(mid, mode), config, &warm)?;
        if partition_equal(&r.partition, &below.partition)? {
            chi_below = mid;
        } else {
            chi_above = mid;
            communities_above = r.num_communities();
            warm[1] = r.partition;
        }
    }
    Ok(Transition {
        chi_below,
        chi_above,
        communities_below: below.num_communities(),
        communities_above,
    })
}

/// `Q_bg` of one fixed partition over a resolution grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionCurve {
    pub reference_partition: Partition,
    pub chi_grid: Vec<f64>,
    /// `None` where the partition is not scoreable (zero density, `χ < 0`).
    pub values: Vec<Option<f64>>,
}

pub fn evaluate_curve(
    graph: &BipartiteGraph,
    reference_partition: &Partition,
    chi_grid: &[f64],
    mode: DensityMode,
) -> Result<PartitionCurve, SweepError> {
    reference_partition.check_covers(graph)?;
    let values = chi_grid
        .iter()
        .map(|&chi| match evaluate_qbg(graph, reference_partition, Resolution::new(chi, mode)) {
            Ok(v) => Ok(Some(v.total)),
            Err(ObjectiveError::DegenerateDensity { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PartitionCurve {
        reference_partition: reference_partition.clone(),
        chi_grid: chi_grid.to_vec(),
        values,
    })
}

/// Resolution in `[lo, hi]` where two fixed partitions score equally, found
/// by bisection. `None` when their difference does not change sign over the
/// interval.
pub fn curve_crossing(
    graph: &BipartiteGraph,
    a: &Partition,
    b: &Partition,
    lo: f64,
    hi: f64,
    mode: DensityMode,
    tolerance: f64,
) -> Result<Option<f64>, SweepError> {
    let diff = |chi: f64| -> Result<f64, ObjectiveError> {
        let r = Resolution::new(chi, mode);
        Ok(evaluate_qbg(graph, a, r)?.total - evaluate_qbg(graph, b, r)?.total)
    };
    let (f_lo, f_hi) = (diff(lo)?, diff(hi)?);
    if (f_lo < 0.0) == (f_hi < 0.0) && f_lo != 0.0 && f_hi != 0.0 {
        return Ok(None);
    }
    // Both endpoints evaluated fine; interior points share the same
    // partitions so errors there cannot arise for chi of the same sign.
    let mut failure = None;
    let root = bisect(
        |chi| match diff(chi) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        lo,
        hi,
        tolerance,
    );
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(Some(root)),
    }
}
