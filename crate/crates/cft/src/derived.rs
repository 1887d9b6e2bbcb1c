//! Pairwise distance preservers and +2 additive spanners, both reductions to
//! the sourcewise color-fault builder.
//!
//! The pairwise builder splits (pair, fault) triplets by the hop length of
//! the surviving canonical path. Long paths are hit by a small vertex set
//! whose sourcewise preservers splice exact distances through the hit vertex;
//! short paths are collected directly over many rounds of random color
//! faults, and a coverage ledger proves post hoc that every short triplet got
//! a round that faulted its color but nothing on its path — so the randomness
//! only affects size, never correctness.
//!
//! The spanner builder splits vertices by color degree: every edge at a
//! "dull" vertex (fewer than `cutoff` distinct incident colors) is kept
//! wholesale, while each "colorful" vertex is anchored by two edges of
//! different colors into an anchor set; whichever anchor edge survives a
//! color fault reroutes the path with additive stretch two.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::exec;
use crate::graph::{
    Color, ColoredGraph, EdgeId, FaultMode, FaultSet, Subgraph, Vertex,
};
use crate::hitting::{greedy_cover, HittingMode};
use crate::metric::{shortest_path, MetricError, TieBrokenMetric};
use crate::sourcewise_cft::{build_1cft_sourcewise, snap};
use crate::BuildError;

/// Round multiplier for the short-path collection phase.
const ROUND_FACTOR: f64 = 40.0;
/// Resamplings of the round set allowed before the builder gives up.
const ROUND_RETRY_CAP: usize = 5;
/// Salt separating the reverse-orientation metric from the forward one.
const REVERSE_METRIC_SALT: u64 = 0xA076_1D64_78BD_642F;
/// Salt separating per-round color sampling streams.
const ROUND_SALT: u64 = 0x9E37_79B9_7F4A_7C15;
/// Salt separating reseed attempts of the whole round set.
const RESEED_SALT: u64 = 0xD6E8_FEB8_6659_FD93;

/// Deduplicated ordered vertex pairs whose distances a preserver must keep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSet {
    pairs: Vec<(Vertex, Vertex)>,
}

impl PairSet {
    pub fn new(
        n: usize,
        pairs: impl IntoIterator<Item = (Vertex, Vertex)>,
    ) -> Result<Self, BuildError> {
        let mut pairs: Vec<(Vertex, Vertex)> = pairs.into_iter().collect();
        pairs.sort_unstable();
        pairs.dedup();
        for &(s, t) in &pairs {
            if s >= n {
                return Err(BuildError::VertexOutOfRange(s));
            }
            if t >= n {
                return Err(BuildError::VertexOutOfRange(t));
            }
        }
        Ok(PairSet { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(Vertex, Vertex)] {
        &self.pairs
    }
}

/// Hop cutoff separating long from short replacement paths:
/// `⌈(n²/p)^((Δ+1)/(2Δ+3))⌉` for `p` pairs, at least 1.
pub fn pairwise_cutoff(n: usize, num_pairs: usize, delta: usize) -> usize {
    assert!(num_pairs > 0, "the cutoff needs at least one pair");
    let d = delta as f64;
    let expo = (d + 1.0) / (2.0 * d + 3.0);
    let nf = n as f64;
    let raw = (nf * nf / num_pairs as f64).powf(expo);
    (snap(raw).ceil() as usize).max(1)
}

/// Distinct-color cutoff separating colorful from dull vertices:
/// `⌈(n·ln n)^(1−1/(Δ+2))⌉`, floored at 2 so that a colorful vertex always
/// offers two distinctly-colored edges.
pub fn spanner_cutoff(n: usize, delta: usize) -> usize {
    let d = delta as f64;
    let expo = 1.0 - 1.0 / (d + 2.0);
    let nf = (n as f64).max(2.0);
    let raw = (nf * nf.ln()).powf(expo);
    (snap(raw).ceil() as usize).max(2)
}

/// A (pair, fault) triplet whose surviving path is long: it is routed through
/// a hitting-set vertex and covered by the sourcewise preservers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LongTriplet {
    pub s: Vertex,
    pub t: Vertex,
    /// `None` is the fault-free triplet.
    pub color: Option<Color>,
    /// Hop length of the surviving canonical path.
    pub hops: usize,
    /// A hitting-set vertex on that path.
    pub hit: Vertex,
}

/// A (pair, fault) triplet whose surviving path is short, with the round
/// that covered it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShortTriplet {
    pub s: Vertex,
    pub t: Vertex,
    pub color: Option<Color>,
    pub hops: usize,
    /// First round whose color set contains the triplet's color but misses
    /// every color of the surviving path.
    pub round: usize,
}

/// The random color rounds of the short-path phase plus the coverage ledger
/// that makes their guarantee deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortTripletRounds {
    /// Seed that produced the accepted rounds (differs from the caller's
    /// seed after reseeds).
    pub seed: u64,
    /// Sampled color set per round; each color is kept independently with
    /// probability `1/cutoff`.
    pub faults: Vec<Vec<Color>>,
    /// Every short triplet with the round that covered it.
    pub ledger: Vec<ShortTriplet>,
}

/// Result of [`build_1cft_pairwise`], carrying the full coverage accounting.
#[derive(Debug, Clone)]
pub struct PairwiseBuild {
    pub h: Subgraph,
    /// Hop cutoff (0 when the pair set is empty).
    pub cutoff: usize,
    /// Hitting set for long surviving paths, the sources of the sourcewise
    /// preservers.
    pub hitting_set: Vec<Vertex>,
    pub long_ledger: Vec<LongTriplet>,
    pub rounds: ShortTripletRounds,
    /// Failed round samplings before the accepted one.
    pub reseeds: usize,
}

/// Builds a subgraph preserving `dist(s,t|c)` for every pair in `pairs` and
/// every single color fault (including none) of an unweighted graph.
///
/// Long and short triplets are handled by different mechanisms and the split
/// is exact: each live triplet appears in exactly one of the two ledgers.
pub fn build_1cft_pairwise(
    g: &ColoredGraph,
    metric: &TieBrokenMetric,
    pairs: &PairSet,
    seed: u64,
) -> Result<PairwiseBuild, BuildError> {
    if !g.is_unit() {
        return Err(BuildError::RequiresUnitWeights);
    }
    for &(s, t) in pairs.pairs() {
        if s >= g.n() {
            return Err(BuildError::VertexOutOfRange(s));
        }
        if t >= g.n() {
            return Err(BuildError::VertexOutOfRange(t));
        }
    }
    if pairs.is_empty() {
        return Ok(PairwiseBuild {
            h: Subgraph::empty(g),
            cutoff: 0,
            hitting_set: Vec::new(),
            long_ledger: Vec::new(),
            rounds: ShortTripletRounds { seed, faults: Vec::new(), ledger: Vec::new() },
            reseeds: 0,
        });
    }
    let cutoff = pairwise_cutoff(g.n(), pairs.len(), g.delta());

    // Canonical surviving path per (pair, fault) triplet; faults range over
    // no-fault plus every palette color.
    let mut jobs: Vec<(Vertex, Vertex, Option<Color>)> = Vec::new();
    for &(s, t) in pairs.pairs() {
        if s == t {
            continue;
        }
        jobs.push((s, t, None));
        for c in g.all_colors() {
            jobs.push((s, t, Some(c)));
        }
    }
    let paths = exec::map_vec(jobs.clone(), |(s, t, c)| {
        let fault = c.map_or(FaultSet::empty(FaultMode::Color), FaultSet::single_color);
        shortest_path(g, metric, s, t, &fault)
    });
    let mut triplets = Vec::new();
    for ((s, t, c), path) in jobs.into_iter().zip(paths) {
        if let Some(p) = path? {
            triplets.push((s, t, c, p));
        }
    }

    // Long phase: hit every long surviving path, then preserve all distances
    // from and to the hitting set. Orientation matters on directed graphs,
    // so the "to" preserver is built on the reversed graph (edge ids are
    // shared, so its output unions directly).
    let members: Vec<Vec<Vertex>> = triplets
        .iter()
        .filter(|(_, _, _, p)| p.len() >= cutoff)
        .map(|(_, _, _, p)| {
            let mut vs = p.vertices(g);
            vs.sort_unstable();
            vs.dedup();
            vs
        })
        .collect();
    let hitting_set = greedy_cover(&members)?;
    let mut h = Subgraph::empty(g);
    if !hitting_set.is_empty() {
        h.union_with(&build_1cft_sourcewise(g, metric, &hitting_set, HittingMode::Greedy)?.h);
        if g.directed() {
            let rev = g.reversed();
            let rev_metric = TieBrokenMetric::new(&rev, metric.seed() ^ REVERSE_METRIC_SALT);
            h.union_with(
                &build_1cft_sourcewise(&rev, &rev_metric, &hitting_set, HittingMode::Greedy)?.h,
            );
        }
    }
    let mut long_ledger = Vec::new();
    let mut shorts = Vec::new();
    for (s, t, c, p) in &triplets {
        if p.len() >= cutoff {
            let hit = p
                .vertices(g)
                .into_iter()
                .find(|v| hitting_set.binary_search(v).is_ok())
                .expect("the hitting set covers every long path");
            long_ledger.push(LongTriplet { s: *s, t: *t, color: *c, hops: p.len(), hit });
        } else {
            shorts.push((*s, *t, *c, p.len(), p.colors(g)));
        }
    }

    // Short phase: sample color rounds until every short triplet has a good
    // round, then add every short surviving path of every round.
    let r = round_count(g.n(), cutoff);
    let mut reseeds = 0;
    loop {
        let round_seed = seed ^ (reseeds as u64).wrapping_mul(RESEED_SALT);
        let faults = sample_rounds(g, r, cutoff, round_seed);
        if let Some(ledger) = cover_short_triplets(&shorts, &faults) {
            let added = exec::map_vec(faults.clone(), |f| {
                round_paths(g, metric, pairs, cutoff, &f)
            });
            for edges in added {
                for e in edges? {
                    h.insert(e);
                }
            }
            return Ok(PairwiseBuild {
                h,
                cutoff,
                hitting_set,
                long_ledger,
                rounds: ShortTripletRounds { seed: round_seed, faults, ledger },
                reseeds,
            });
        }
        reseeds += 1;
        if reseeds > ROUND_RETRY_CAP {
            return Err(BuildError::RetryCapExceeded { retries: ROUND_RETRY_CAP });
        }
    }
}

fn round_count(n: usize, cutoff: usize) -> usize {
    (ROUND_FACTOR * cutoff as f64 * (n as f64).ln()).ceil() as usize
}

fn sample_rounds(g: &ColoredGraph, r: usize, cutoff: usize, seed: u64) -> Vec<Vec<Color>> {
    let p = 1.0 / cutoff as f64;
    (0..r)
        .map(|i| {
            let mut rng =
                ChaCha12Rng::seed_from_u64(seed ^ (i as u64 + 1).wrapping_mul(ROUND_SALT));
            g.all_colors().filter(|_| rng.gen::<f64>() < p).collect()
        })
        .collect()
}

/// Finds, for every short triplet, a round that faults the triplet's color
/// while keeping its whole path alive. `None` if any triplet lacks one.
fn cover_short_triplets(
    shorts: &[(Vertex, Vertex, Option<Color>, usize, Vec<Color>)],
    faults: &[Vec<Color>],
) -> Option<Vec<ShortTriplet>> {
    let sets: Vec<BTreeSet<Color>> =
        faults.iter().map(|f| f.iter().copied().collect()).collect();
    let mut ledger = Vec::with_capacity(shorts.len());
    for (s, t, c, hops, path_colors) in shorts {
        let round = sets.iter().position(|f| {
            c.map_or(true, |c| f.contains(&c)) && path_colors.iter().all(|pc| !f.contains(pc))
        })?;
        ledger.push(ShortTriplet { s: *s, t: *t, color: *c, hops: *hops, round });
    }
    Some(ledger)
}

fn round_paths(
    g: &ColoredGraph,
    metric: &TieBrokenMetric,
    pairs: &PairSet,
    cutoff: usize,
    colors: &[Color],
) -> Result<Vec<EdgeId>, MetricError> {
    let fault = FaultSet::colors(colors.iter().copied(), colors.len())
        .expect("sampled colors fit their own count");
    let mut edges = Vec::new();
    for &(s, t) in pairs.pairs() {
        if s == t {
            continue;
        }
        if let Some(p) = shortest_path(g, metric, s, t, &fault)? {
            if p.len() < cutoff {
                edges.extend(p.edges.iter().copied());
            }
        }
    }
    Ok(edges)
}

/// Distinct-color key of an incident edge: colored edges share by class,
/// uncolored edges each count alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum ColorKey {
    Class(Color),
    Lone(EdgeId),
}

fn color_key(g: &ColoredGraph, e: EdgeId) -> ColorKey {
    match g.edge(e).color {
        Some(c) => ColorKey::Class(c),
        None => ColorKey::Lone(e),
    }
}

/// Result of [`build_1cft_plus2_spanner`].
#[derive(Debug, Clone)]
pub struct SpannerBuild {
    pub h: Subgraph,
    /// Distinct-color cutoff for the colorful/dull split.
    pub cutoff: usize,
    /// Vertices with at least `cutoff` distinct incident colors.
    pub colorful: Vec<Vertex>,
    /// Anchor set: every colorful vertex keeps two distinctly-colored edges
    /// into it.
    pub anchors: Vec<Vertex>,
    /// Edges kept wholesale because they touch a dull vertex.
    pub dull_edge_count: usize,
    /// The greedy anchor set carries no size guarantee; this flags builds
    /// where it exceeded `4·(n/cutoff)·ln n`, the size a sampling argument
    /// would give.
    pub oversize_anchors: bool,
}

/// Builds a subgraph with `dist_H(u,v|c) ≤ dist_G(u,v|c) + 2` for every
/// vertex pair and every single color fault (including none) of an
/// unweighted undirected graph.
pub fn build_1cft_plus2_spanner(
    g: &ColoredGraph,
    metric: &TieBrokenMetric,
) -> Result<SpannerBuild, BuildError> {
    if !g.is_unit() {
        return Err(BuildError::RequiresUnitWeights);
    }
    if g.directed() {
        return Err(BuildError::RequiresUndirected);
    }
    let n = g.n();
    let cutoff = spanner_cutoff(n, g.delta());

    let mut colorful = Vec::new();
    let mut dull = BTreeSet::new();
    for v in 0..n {
        let keys: BTreeSet<ColorKey> =
            g.out_edges(v).iter().map(|&e| color_key(g, e)).collect();
        if keys.len() >= cutoff {
            colorful.push(v);
        } else {
            // A dull vertex sees fewer than `cutoff` distinct keys and each
            // key stands for at most max(Δ,1) incident edges.
            assert!(
                g.out_edges(v).len() <= cutoff * g.delta().max(1),
                "dull vertex degree exceeds its color budget"
            );
            dull.extend(g.out_edges(v).iter().copied());
        }
    }
    let dull_edge_count = dull.len();
    let mut h = Subgraph::empty(g);
    for &e in &dull {
        h.insert(e);
    }

    // Anchors: scan colorful vertices in order, extending the set until each
    // has two distinctly-colored edges into it. The set only grows, so
    // earlier vertices stay covered.
    let mut anchor_set: BTreeSet<Vertex> = BTreeSet::new();
    for &x in &colorful {
        let mut covered: BTreeSet<ColorKey> = g
            .out_edges(x)
            .iter()
            .filter(|&&e| anchor_set.contains(&g.other_endpoint(e, x)))
            .map(|&e| color_key(g, e))
            .collect();
        if covered.len() >= 2 {
            continue;
        }
        for &e in g.out_edges(x) {
            let k = color_key(g, e);
            if covered.contains(&k) {
                continue;
            }
            anchor_set.insert(g.other_endpoint(e, x));
            covered.insert(k);
            if covered.len() >= 2 {
                break;
            }
        }
        debug_assert!(
            covered.len() >= 2,
            "colorful vertices offer at least two distinct colors"
        );
    }
    let anchors: Vec<Vertex> = anchor_set.into_iter().collect();
    if !anchors.is_empty() {
        h.union_with(&build_1cft_sourcewise(g, metric, &anchors, HittingMode::Greedy)?.h);
    }
    let bound =
        (4.0 * (n as f64 / cutoff as f64) * (n as f64).max(2.0).ln()).ceil() as usize;
    let oversize_anchors = anchors.len() > bound;
    Ok(SpannerBuild { h, cutoff, colorful, anchors, dull_edge_count, oversize_anchors })
}
