//! Source-to-all distance preserver that survives one failing color class.
//!
//! For unit-weight graphs the builder keeps, per hitting-set level, the last
//! edge of every canonical path from a level vertex (rule R1) and the last
//! edge of every replacement path whose failing color appears near the end of
//! the fault-free path (rule R2). The level thresholds shrink geometrically
//! from `(n/σ)·ln n` down to 1, so each level's hitting set lands on the tail
//! of any sufficiently long replacement path and the rules splice its suffix
//! back together from a nearby restart.

use std::collections::{BTreeMap, BTreeSet};

use crate::exec;
use crate::graph::{Color, ColoredGraph, EdgeId, FaultSet, Subgraph, Vertex};
use crate::hitting::{build_hitting_family, FamilyScope, HittingFamily, HittingMode};
use crate::metric::{sp_tree, Dir, MetricError, TieBrokenMetric};
use crate::BuildError;

/// Tolerance for snapping a computed threshold to an adjacent integer before
/// rounding; real thresholds sit far from integers or exactly on them.
const SNAP_EPS: f64 = 1e-9;

pub(crate) fn snap(d: f64) -> f64 {
    let nearest = d.round();
    if (d - nearest).abs() < SNAP_EPS {
        nearest
    } else {
        d
    }
}

/// Geometric threshold ladder `∞ = d_0 > d_1 > … > 1`, with the interior
/// values `base^(1 − i/(Δ+1))` clamped to `[1, n]` and duplicates collapsed.
#[derive(Debug, Clone)]
pub struct ThresholdSchedule {
    pub delta: usize,
    pub base: f64,
    /// `values[0] = ∞`, last value `1`, strictly decreasing throughout.
    pub values: Vec<f64>,
}

impl ThresholdSchedule {
    /// Ladder for an `n`-vertex graph with `sigma` sources and class-size
    /// bound `delta`; the base is `(n/sigma)·ln n`.
    pub fn new(n: usize, sigma: usize, delta: usize) -> Self {
        let nf = n.max(1) as f64;
        let base = (nf / sigma.max(1) as f64) * nf.ln();
        Self::from_base(n, delta, base)
    }

    /// Ladder from an explicit base, used directly by tests.
    pub fn from_base(n: usize, delta: usize, base: f64) -> Self {
        let mut values = vec![f64::INFINITY];
        for i in 1..=delta {
            let exp = 1.0 - i as f64 / (delta as f64 + 1.0);
            values.push(snap(base.powf(exp)).clamp(1.0, n.max(1) as f64));
        }
        values.push(1.0);
        values.dedup();
        ThresholdSchedule { delta, base, values }
    }

    /// `(threshold, suffix length)` pairs for the interior levels, in ladder
    /// order; the suffix length is the threshold rounded up.
    pub fn hitting_levels(&self) -> Vec<(f64, usize)> {
        self.values[1..self.values.len() - 1]
            .iter()
            .map(|&d| (d, self.suffix_len(d)))
            .collect()
    }

    /// Edge count of a `d`-suffix: `⌈d⌉`. Values within 1e-9 of an integer
    /// snap to it first, so `base^(2/3)` for a cube base stays exact.
    pub fn suffix_len(&self, d: f64) -> usize {
        debug_assert!(d.is_finite());
        (snap(d).ceil() as usize).max(1)
    }

    /// Suffix length the splice rule uses at level `i`: the next (smaller)
    /// threshold in the ladder, rounded up.
    pub fn splice_suffix(&self, i: usize) -> usize {
        self.suffix_len(self.values[i + 1])
    }

    /// Number of levels carrying a hitting set (the source level included).
    pub fn num_levels(&self) -> usize {
        self.values.len() - 1
    }
}

/// The built preserver plus its construction ledger.
#[derive(Debug)]
pub struct CftBuild {
    pub h: Subgraph,
    pub schedule: ThresholdSchedule,
    pub family: HittingFamily,
    /// Fault-free last edges added (one per reachable (level vertex, target)).
    pub r1_attempts: usize,
    /// Replacement-path queries made (per (level vertex, target, suffix color)).
    pub r2_attempts: usize,
}

impl CftBuild {
    /// Closed-form cap on rule applications:
    /// `Σ_i |A_i| · n · (1 + splice_suffix(i))`.
    pub fn addition_bound(&self, n: usize) -> usize {
        self.family
            .levels
            .iter()
            .enumerate()
            .map(|(i, lvl)| lvl.set.len() * n * (1 + self.schedule.splice_suffix(i)))
            .sum()
    }
}

/// Builds the preserver: every source-to-target distance survives the loss of
/// any single color class. Requires unit weights; directed graphs are fine.
pub fn build_1cft_sourcewise(
    g: &ColoredGraph,
    metric: &TieBrokenMetric,
    sources: &[Vertex],
    mode: HittingMode,
) -> Result<CftBuild, BuildError> {
    if !g.is_unit() {
        return Err(BuildError::RequiresUnitWeights);
    }
    if sources.is_empty() {
        return Err(BuildError::NoSources);
    }
    if let Some(&v) = sources.iter().find(|&&v| v >= g.n()) {
        return Err(BuildError::VertexOutOfRange(v));
    }

    let sigma = {
        let mut s = sources.to_vec();
        s.sort_unstable();
        s.dedup();
        s.len()
    };
    let schedule = ThresholdSchedule::new(g.n(), sigma, g.delta());
    let family = build_hitting_family(
        g,
        metric,
        sources,
        &schedule.hitting_levels(),
        mode,
        metric.seed(),
        FamilyScope::Colors,
    )?;
    debug_assert_eq!(family.levels.len(), schedule.num_levels());

    // One job per (level vertex, splice suffix): R1 and R2 for that vertex.
    let mut jobs: Vec<(Vertex, usize)> = Vec::new();
    for (i, lvl) in family.levels.iter().enumerate() {
        let suffix = schedule.splice_suffix(i);
        jobs.extend(lvl.set.iter().map(|&a| (a, suffix)));
    }

    let per_vertex = exec::map_vec(jobs, |(a, suffix)| rules_from(g, metric, a, suffix));

    let mut h = Subgraph::empty(g);
    let mut r1_attempts = 0;
    let mut r2_attempts = 0;
    for res in per_vertex {
        let (edges, r1, r2) = res?;
        for e in edges {
            h.insert(e);
        }
        r1_attempts += r1;
        r2_attempts += r2;
    }
    Ok(CftBuild { h, schedule, family, r1_attempts, r2_attempts })
}

/// R1 and R2 for one level vertex `a`: keep the fault-free last edge to every
/// target, then for each color on the `suffix`-edge tail of the fault-free
/// path keep the last edge of the corresponding replacement path.
fn rules_from(
    g: &ColoredGraph,
    metric: &TieBrokenMetric,
    a: Vertex,
    suffix: usize,
) -> Result<(BTreeSet<EdgeId>, usize, usize), MetricError> {
    let mut edges = BTreeSet::new();
    let mut r1 = 0;
    let mut r2 = 0;

    let tree = sp_tree(&g.view(), metric, a, Dir::Out)?;
    let mut targets_by_color: BTreeMap<Color, Vec<Vertex>> = BTreeMap::new();
    for t in 0..g.n() {
        if t == a {
            continue;
        }
        if let Some(e) = tree.last_edge_to(t) {
            edges.insert(e);
            r1 += 1;
            for se in tree.suffix_edges(t, suffix) {
                if let Some(c) = g.edge(se).color {
                    targets_by_color.entry(c).or_default().push(t);
                }
            }
        }
    }

    for (c, mut targets) in targets_by_color {
        targets.sort_unstable();
        targets.dedup();
        let fault = FaultSet::single_color(c);
        let view = g.view_minus(&fault);
        let replacement = sp_tree(&view, metric, a, Dir::Out)?;
        for t in targets {
            r2 += 1;
            if let Some(e) = replacement.last_edge_to(t) {
                edges.insert(e);
            }
        }
    }
    Ok((edges, r1, r2))
}
