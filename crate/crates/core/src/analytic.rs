//! Closed-form resolution-limit analysis.
//!
//! The two-clique benchmark is described by four nondimensional numbers:
//!
//! * `p = sqrt(n_r1 n_b1) / sqrt(n_r2 n_b2)`, the clique size ratio in `(0, 1]`;
//! * `d = m12 / sqrt(n_r1 n_b1 n_r2 n_b2)`, the inter-clique density in `[0, 1]`;
//! * `t = m_a / sqrt(n_r1 n_b1 n_r2 n_b2)`, the external influence;
//! * `r = p + 1/p ≥ 2`.
//!
//! The sign of `Q(merged) − Q(split)` decides the phase: positive means the
//! cliques are merged (M), otherwise they stay split (S). The formulas are
//! asymptotic (weak coupling to the exterior), so only their signs and roots
//! are meaningful, not their magnitudes.

use serde::{Deserialize, Serialize};

use crate::numerics::bisect;

/// Bisection width for critical densities.
pub const ROOT_TOLERANCE: f64 = 1e-12;

// Lower end of the d bracket; d = 0 itself is excluded.
const D_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NondimParams {
    pub p: f64,
    pub d: f64,
    pub t: f64,
    pub r: f64,
}

impl NondimParams {
    pub fn new(p: f64, d: f64, t: f64) -> Self {
        Self { p, d, t, r: p + 1.0 / p }
    }
}

/// Which objective a phase computation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    Qb,
    Qbg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "M")]
    Merged,
    #[serde(rename = "S")]
    Split,
}

impl Phase {
    pub fn symbol(self) -> &'static str {
        match self {
            Phase::Merged => "M",
            Phase::Split => "S",
        }
    }

    /// M iff the merged-minus-split difference is positive.
    pub fn from_delta(delta: f64) -> Self {
        if delta > 0.0 {
            Phase::Merged
        } else {
            Phase::Split
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    QbgNumeric,
    QbgAsymptotic,
    QbClosed,
    QbNumeric,
    Expected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalDensity {
    pub delta: f64,
    pub kind: CriticalKind,
}

impl CriticalDensity {
    /// A user-supplied expected critical density for comparison.
    pub fn expected(delta: f64) -> Self {
        Self {
            delta,
            kind: CriticalKind::Expected,
        }
    }

    /// True when the objective resolves every pair the expectation says
    /// should stay apart, i.e. `δ ≥ δ_exp`.
    pub fn resolves(&self, expected: &CriticalDensity) -> bool {
        self.delta >= expected.delta
    }
}

/// `Q_bg(merged) − Q_bg(split)` up to a positive factor:
///
/// ```text
/// ((d+r)/(r+2))^χ · (d + r − (d+r)²/(r+t+d)) − (r − (r d + r² − 2)/(r+t+d))
/// ```
pub fn delta_qbg_formula(params: &NondimParams, chi: f64) -> f64 {
    let NondimParams { d, t, r, .. } = *params;
    let denom = r + t + d;
    let density = (d + r) / (r + 2.0);
    let merged = d + r - (d + r) * (d + r) / denom;
    let split = r - (r * d + r * r - 2.0) / denom;
    let factor = if chi == 0.0 { 1.0 } else { density.powf(chi) };
    factor * merged - split
}

/// `Q_b(merged) − Q_b(split)` up to a positive factor:
/// `d − (2 + r d + d²)/(r + d + t)`.
pub fn delta_qb_formula(params: &NondimParams) -> f64 {
    let NondimParams { d, t, r, .. } = *params;
    d - (2.0 + r * d + d * d) / (r + d + t)
}

fn root_in_unit_interval<F: FnMut(f64) -> f64>(mut f: F) -> f64 {
    let (lo, hi) = (f(D_FLOOR), f(1.0));
    if lo > 0.0 {
        // merged already as d -> 0+
        0.0
    } else if hi <= 0.0 {
        // split everywhere
        1.0
    } else {
        bisect(f, D_FLOOR, 1.0, ROOT_TOLERANCE)
    }
}

/// Root in `d ∈ [0, 1]` of [`delta_qbg_formula`]; `1` when the cliques stay
/// split for every `d`, `0` when they merge already at vanishing `d`.
pub fn critical_density_qbg(p: f64, t: f64, chi: f64) -> CriticalDensity {
    let delta = root_in_unit_interval(|d| delta_qbg_formula(&NondimParams::new(p, d, t), chi));
    CriticalDensity {
        delta,
        kind: CriticalKind::QbgNumeric,
    }
}

/// Large-`t` limit of [`critical_density_qbg`]:
/// `r ((1 + 2/r)^(χ/(χ+1)) − 1)`. Defined for `χ ≥ 0`; `None` otherwise.
pub fn critical_density_qbg_asymptotic(p: f64, chi: f64) -> Option<CriticalDensity> {
    if !(chi >= 0.0) {
        return None;
    }
    let r = p + 1.0 / p;
    let exponent = if chi.is_infinite() { 1.0 } else { chi / (chi + 1.0) };
    Some(CriticalDensity {
        delta: r * ((1.0 + 2.0 / r).powf(exponent) - 1.0),
        kind: CriticalKind::QbgAsymptotic,
    })
}

/// `δ = 2/t`, clamped to `[0, 1]`.
pub fn critical_density_qb(t: f64) -> CriticalDensity {
    let delta = if t <= 2.0 { 1.0 } else { 2.0 / t };
    CriticalDensity {
        delta,
        kind: CriticalKind::QbClosed,
    }
}

/// Root of [`delta_qb_formula`] by bisection, for cross-checking the closed form.
pub fn critical_density_qb_numeric(p: f64, t: f64) -> CriticalDensity {
    let delta = root_in_unit_interval(|d| delta_qb_formula(&NondimParams::new(p, d, t)));
    CriticalDensity {
        delta,
        kind: CriticalKind::QbNumeric,
    }
}

/// Clique side that a ring of `n` cliques must exceed for bipartite
/// modularity to prefer the split partition: `sqrt((n − 2)/2)`.
pub fn ring_threshold(n: usize) -> f64 {
    ((n as f64 - 2.0) / 2.0).sqrt()
}

/// `k > sqrt((n − 2)/2)`, compared exactly as `2k² > n − 2`.
pub fn ring_is_resolution_free(n: usize, k: usize) -> bool {
    2 * k * k + 2 > n
}

/// Closed forms of `Q_b` for the split and pair-merged ring partitions.
pub fn ring_modularity(n: usize, k: usize) -> (f64, f64) {
    let (n, k2) = (n as f64, (k * k) as f64);
    let f = n * k2 + n;
    let split = n / f * (k2 - (k2 + 1.0) * (k2 + 1.0) / f);
    let merged = n / (2.0 * f) * (2.0 * k2 + 1.0 - 4.0 * (k2 + 1.0) * (k2 + 1.0) / f);
    (split, merged)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub objective: ObjectiveKind,
    pub chi: f64,
    pub t: f64,
    pub p_axis: Vec<f64>,
    pub d_axis: Vec<f64>,
    /// `labels[i][j]` is the phase at `(p_axis[i], d_axis[j])`.
    pub labels: Vec<Vec<Phase>>,
}

impl PhaseGrid {
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, Phase)> + '_ {
        self.p_axis.iter().enumerate().flat_map(move |(i, &p)| {
            self.d_axis.iter().enumerate().map(move |(j, &d)| (p, d, self.labels[i][j]))
        })
    }

    pub fn all(&self, phase: Phase) -> bool {
        self.cells().all(|(_, _, ph)| ph == phase)
    }
}

/// Labels every `(p, d)` cell M or S. `chi` is ignored for `Q_b`.
pub fn phase_grid(objective: ObjectiveKind, chi: f64, t: f64, p_axis: &[f64], d_axis: &[f64]) -> PhaseGrid {
    let labels = p_axis
        .iter()
        .map(|&p| {
            d_axis
                .iter()
                .map(|&d| {
                    let params = NondimParams::new(p, d, t);
                    Phase::from_delta(match objective {
                        ObjectiveKind::Qb => delta_qb_formula(&params),
                        ObjectiveKind::Qbg => delta_qbg_formula(&params, chi),
                    })
                })
                .collect()
        })
        .collect();
    PhaseGrid {
        objective,
        chi: if objective == ObjectiveKind::Qb { 0.0 } else { chi },
        t,
        p_axis: p_axis.to_vec(),
        d_axis: d_axis.to_vec(),
        labels,
    }
}
