//! Canonical shortest paths via seeded weight perturbation.
//!
//! Every edge gets a perturbed weight w'_e = w_e + r_e·δ where r_e = k_e/2^64
//! with k_e a seeded 64-bit key, and δ = 1/(2·L·n·(m+1)) with L the common
//! weight scale. δ is small enough that the total perturbation along any path
//! is below the minimum gap (1/L) between distinct unperturbed path weights,
//! so comparing perturbed weights is exactly the lexicographic comparison of
//! (unperturbed scaled sum, key sum). Both components are additive integers,
//! which keeps all arithmetic exact; `perturbed_weight` exposes the underlying
//! rational for cross-checks.
//!
//! Uniqueness of the minimizer is a property of the drawn keys. The search
//! detects any tie among shortest paths it explores and reports it as an
//! error, signalling that the metric must be reseeded.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::graph::{ColoredGraph, EdgeId, FaultSet, LiveView, Path, Vertex};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("tie between shortest paths from {root} at vertex {vertex}; reseed the metric")]
    UniquenessViolation { root: Vertex, vertex: Vertex },
    #[error("no collision-free seed found after {attempts} attempts")]
    RetriesExhausted { attempts: usize },
}

/// Additive path cost: (scaled unperturbed weight, perturbation key sum).
/// Lexicographic order on these pairs equals the order of exact perturbed
/// path weights.
pub type Cost = (u128, u128);

pub const ZERO_COST: Cost = (0, 0);

/// Component-wise sum of two lexicographic costs.
pub fn cost_sum(a: Cost, b: Cost) -> Cost {
    (a.0 + b.0, a.1 + b.1)
}

#[derive(Clone, Debug)]
pub struct TieBrokenMetric {
    seed: u64,
    keys: Vec<u64>,
    /// Set once a caller has verified uniqueness over its whole query scope
    /// (all-pairs at desk scale); individual queries still self-check.
    pub uniqueness_verified: bool,
}

impl TieBrokenMetric {
    pub fn new(g: &ColoredGraph, seed: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let keys = (0..g.m()).map(|_| rng.next_u64()).collect();
        TieBrokenMetric { seed, keys, uniqueness_verified: false }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn key(&self, e: EdgeId) -> u64 {
        self.keys[e]
    }

    pub fn edge_cost(&self, g: &ColoredGraph, e: EdgeId) -> Cost {
        (g.scaled_weight(e) as u128, self.keys[e] as u128)
    }

    /// Exact perturbed weight of an edge as (numerator, denominator) of a
    /// rational with the global denominator 2^64·2·L·n·(m+1). Intended for
    /// tests that compare the lexicographic order against exact arithmetic.
    pub fn perturbed_weight_parts(&self, g: &ColoredGraph, e: EdgeId) -> (u128, u128) {
        let l = g.weight_scale() as u128;
        let n = g.n() as u128;
        let m = g.m() as u128;
        let denom_over_l = (1u128 << 64) * 2 * n * (m + 1);
        // w_e + (k_e/2^64)·δ with δ = 1/(2·L·n·(m+1)):
        let num = g.scaled_weight(e) as u128 * denom_over_l + self.keys[e] as u128;
        (num, l * denom_over_l)
    }
}

/// Search direction: `Out` follows edges forward from the source, `In`
/// follows them backward, yielding distances *to* the source.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Dir {
    Out,
    In,
}

/// Shortest-path tree of canonical (tie-broken) paths from one root.
#[derive(Clone, Debug)]
pub struct SpTree {
    pub source: Vertex,
    pub dir: Dir,
    dist: Vec<Option<Cost>>,
    parent_edge: Vec<Option<EdgeId>>,
    /// Tree neighbor toward the root, for walking paths without re-resolving
    /// edge endpoints.
    pred: Vec<Vertex>,
}

impl SpTree {
    pub fn reachable(&self, v: Vertex) -> bool {
        self.dist[v].is_some()
    }

    pub fn cost(&self, v: Vertex) -> Option<Cost> {
        self.dist[v]
    }

    /// Unperturbed distance in units of the graph's weight scale.
    pub fn scaled_dist(&self, v: Vertex) -> Option<u128> {
        self.dist[v].map(|c| c.0)
    }

    /// Hop count distance; meaningful on unit-weight graphs where the scale
    /// is 1 and every edge contributes exactly 1.
    pub fn hop_dist(&self, v: Vertex) -> Option<u128> {
        self.scaled_dist(v)
    }

    pub fn parent_edge(&self, v: Vertex) -> Option<EdgeId> {
        self.parent_edge[v]
    }

    /// Edges of the tree (the union of all canonical paths from the root).
    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.parent_edge.iter().filter_map(|pe| *pe)
    }

    /// Canonical path between the root and `v`: from the root to `v` for
    /// `Dir::Out`, from `v` to the root for `Dir::In`. `None` if unreachable.
    pub fn path(&self, v: Vertex) -> Option<Path> {
        self.dist[v]?;
        let mut edges = Vec::new();
        let mut cur = v;
        while let Some(e) = self.parent_edge[cur] {
            edges.push(e);
            cur = self.pred[cur];
        }
        debug_assert_eq!(cur, self.source);
        match self.dir {
            Dir::Out => {
                edges.reverse();
                Some(Path { from: self.source, to: v, edges })
            }
            Dir::In => Some(Path { from: v, to: self.source, edges }),
        }
    }

    /// Last edge of the canonical path root→v (`Dir::Out` trees): the tree
    /// parent edge of `v`. `None` when `v` is the root or unreachable.
    pub fn last_edge_to(&self, v: Vertex) -> Option<EdgeId> {
        self.parent_edge[v]
    }

    /// Walks up to `len` tree edges from `v` toward the root, returning the
    /// traversed edge ids (nearest to `v` first). On an `Out` tree these are
    /// the last `len` edges of the canonical path to `v`.
    pub fn suffix_edges(&self, v: Vertex, len: usize) -> Vec<EdgeId> {
        let mut out = Vec::new();
        let mut cur = v;
        while out.len() < len {
            match self.parent_edge[cur] {
                Some(e) => {
                    out.push(e);
                    cur = self.pred[cur];
                }
                None => break,
            }
        }
        out
    }

    /// Vertices of the `len`-edge suffix of the canonical path to `v`
    /// (including `v` itself and the far endpoint of the last suffix edge).
    pub fn suffix_vertices(&self, v: Vertex, len: usize) -> Vec<Vertex> {
        let mut out = vec![v];
        let mut cur = v;
        let mut steps = 0;
        while steps < len {
            match self.parent_edge[cur] {
                Some(_) => {
                    cur = self.pred[cur];
                    out.push(cur);
                    steps += 1;
                }
                None => break,
            }
        }
        out
    }
}

impl SpTree {
    fn new(source: Vertex, dir: Dir, n: usize) -> Self {
        SpTree {
            source,
            dir,
            dist: vec![None; n],
            parent_edge: vec![None; n],
            pred: vec![usize::MAX; n],
        }
    }
}

/// Runs the tie-broken Dijkstra over a live view. Any tie among explored
/// shortest paths is reported as a uniqueness violation.
pub fn sp_tree(
    view: &LiveView<'_>,
    metric: &TieBrokenMetric,
    source: Vertex,
    dir: Dir,
) -> Result<SpTree, MetricError> {
    let g = view.graph();
    let n = g.n();
    let mut tree = SpTree::new(source, dir, n);
    let mut settled = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(Cost, Vertex)>> = BinaryHeap::new();
    tree.dist[source] = Some(ZERO_COST);
    heap.push(Reverse((ZERO_COST, source)));

    while let Some(Reverse((cost, u))) = heap.pop() {
        if settled[u] {
            continue;
        }
        settled[u] = true;
        debug_assert_eq!(tree.dist[u], Some(cost));
        let adjacency = match dir {
            Dir::Out => g.out_edges(u),
            Dir::In => g.in_edges(u),
        };
        for &e in adjacency {
            if !view.alive(e) {
                continue;
            }
            let v = g.other_endpoint(e, u);
            if v == u {
                continue; // self-loops never improve a path
            }
            let (w, k) = metric.edge_cost(g, e);
            let cand = (cost.0 + w, cost.1 + k);
            match tree.dist[v] {
                None => {
                    tree.dist[v] = Some(cand);
                    tree.parent_edge[v] = Some(e);
                    tree.pred[v] = u;
                    heap.push(Reverse((cand, v)));
                }
                Some(d) => {
                    if cand < d {
                        tree.dist[v] = Some(cand);
                        tree.parent_edge[v] = Some(e);
                        tree.pred[v] = u;
                        heap.push(Reverse((cand, v)));
                    } else if cand == d {
                        // Two distinct shortest paths with identical perturbed
                        // weight reach v: the tie-breaking failed here.
                        return Err(MetricError::UniquenessViolation { root: source, vertex: v });
                    }
                }
            }
        }
    }
    Ok(tree)
}

/// Canonical shortest path u→v in `g` minus `fault`. `Ok(None)` when v is
/// unreachable; the trivial empty path when u == v.
pub fn shortest_path(
    g: &ColoredGraph,
    metric: &TieBrokenMetric,
    u: Vertex,
    v: Vertex,
    fault: &FaultSet,
) -> Result<Option<Path>, MetricError> {
    let view = g.view_minus(fault);
    let tree = sp_tree(&view, metric, u, Dir::Out)?;
    Ok(tree.path(v))
}

/// Last edge of the canonical path u→v in `g` minus `fault`; `None` when
/// u == v or v is unreachable.
pub fn last_edge(
    g: &ColoredGraph,
    metric: &TieBrokenMetric,
    u: Vertex,
    v: Vertex,
    fault: &FaultSet,
) -> Result<Option<EdgeId>, MetricError> {
    let view = g.view_minus(fault);
    let tree = sp_tree(&view, metric, u, Dir::Out)?;
    Ok(tree.last_edge_to(v))
}
