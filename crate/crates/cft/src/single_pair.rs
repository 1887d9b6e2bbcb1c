//! Single-pair distance preservers for weighted undirected graphs.
//!
//! After any k edge failures in an undirected weighted graph, each new
//! shortest path interleaves at most k+1 original shortest paths with at
//! most k edges — provided original shortest paths are unique, which the
//! perturbation metric guarantees. The preserver for a pair (s,t) therefore
//! needs only two shortest-path trees, the interleaving edges of each
//! color's replacement path, and a plain (non-fault-tolerant) pairwise
//! preserver for the interior segment endpoints.

use std::collections::BTreeSet;

use crate::exec;
use crate::graph::{Color, ColoredGraph, EdgeId, FaultMode, FaultSet, Path, Subgraph, Vertex};
use crate::metric::{
    cost_sum, shortest_path, sp_tree, Dir, MetricError, TieBrokenMetric, ZERO_COST,
};
use crate::BuildError;

/// Reseeds allowed while searching for a perturbation with all-pairs unique
/// shortest paths.
const PERTURB_RETRY_CAP: usize = 8;
/// Salt separating perturbation attempts.
const PERTURB_SALT: u64 = 0x2545_F491_4F6C_DD1D;

/// Builds a tie-broken metric and verifies exhaustively that every pair of
/// vertices has a unique shortest path under it, reseeding on collision.
pub fn perturb_weights(g: &ColoredGraph, seed: u64) -> Result<TieBrokenMetric, BuildError> {
    if g.directed() {
        return Err(BuildError::RequiresUndirected);
    }
    'attempts: for attempt in 0..=PERTURB_RETRY_CAP {
        let metric =
            TieBrokenMetric::new(g, seed ^ (attempt as u64).wrapping_mul(PERTURB_SALT));
        // A tie anywhere shows up as an equal-cost relaxation in some
        // single-source run, so scanning all roots is a complete check.
        for root in 0..g.n() {
            match sp_tree(&g.view(), &metric, root, Dir::Out) {
                Ok(_) => {}
                Err(MetricError::UniquenessViolation { .. }) => continue 'attempts,
                Err(e) => return Err(e.into()),
            }
        }
        return Ok(metric);
    }
    Err(BuildError::RetryCapExceeded { retries: PERTURB_RETRY_CAP })
}

/// Union of the unique shortest paths of `pairs` — exact distances for the
/// pairs, no fault tolerance.
pub fn build_pairwise_dp(
    g: &ColoredGraph,
    metric: &TieBrokenMetric,
    pairs: &[(Vertex, Vertex)],
) -> Result<Subgraph, BuildError> {
    for &(x, y) in pairs {
        if x >= g.n() {
            return Err(BuildError::VertexOutOfRange(x));
        }
        if y >= g.n() {
            return Err(BuildError::VertexOutOfRange(y));
        }
    }
    let no_fault = FaultSet::empty(FaultMode::Color);
    let results = exec::map_vec(pairs.to_vec(), |(x, y)| {
        if x == y {
            return Ok(Vec::new());
        }
        shortest_path(g, metric, x, y, &no_fault)
            .map(|p| p.map_or(Vec::new(), |p| p.edges))
    });
    let mut h = Subgraph::empty(g);
    for edges in results {
        for e in edges? {
            h.insert(e);
        }
    }
    Ok(h)
}

/// A replacement path rewritten as an alternation of original shortest-path
/// segments and single interleaving edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    /// Segment endpoints `(v_i, u_i)`; a segment may be trivial (`v_i = u_i`).
    pub segments: Vec<(Vertex, Vertex)>,
    /// Interleaving edges, one between each consecutive pair of segments.
    pub between: Vec<EdgeId>,
}

impl Decomposition {
    pub fn num_segments(&self) -> usize {
        self.segments.len()
    }

    /// The interleaving edge set.
    pub fn interleaving(&self) -> &[EdgeId] {
        &self.between
    }

    /// Interior segment endpoints — everything except the first and last
    /// segments, which hang off the two endpoint trees instead.
    pub fn interior_pairs(&self) -> &[(Vertex, Vertex)] {
        if self.segments.len() <= 2 {
            &[]
        } else {
            &self.segments[1..self.segments.len() - 1]
        }
    }

    /// Reassembles the decomposition back into an edge sequence: each
    /// segment's canonical shortest path, interleaved with the edges.
    pub fn reassemble(
        &self,
        g: &ColoredGraph,
        metric: &TieBrokenMetric,
    ) -> Result<Vec<EdgeId>, MetricError> {
        let no_fault = FaultSet::empty(FaultMode::Color);
        let mut edges = Vec::new();
        for (i, &(v, u)) in self.segments.iter().enumerate() {
            if v != u {
                let p = shortest_path(g, metric, v, u, &no_fault)?
                    .expect("segment endpoints lie on one path");
                edges.extend(p.edges);
            }
            if let Some(&e) = self.between.get(i) {
                edges.push(e);
            }
        }
        Ok(edges)
    }
}

/// Greedy maximal-prefix decomposition of a replacement path into original
/// shortest-path segments and interleaving edges.
///
/// Under all-pairs uniqueness, a walked prefix is an original shortest path
/// exactly when its cost matches the source's tree distance, and prefixes of
/// shortest paths are shortest — so cutting at the first violation yields
/// the maximal prefix, making the greedy decomposition canonical. Errors
/// when more than `max_between` interleaving edges are needed, which signals
/// a uniqueness violation or an input that is not a replacement path for a
/// fault of that size.
pub fn restoration_decompose(
    g: &ColoredGraph,
    metric: &TieBrokenMetric,
    path: &Path,
    max_between: usize,
) -> Result<Decomposition, BuildError> {
    let verts = path.vertices(g);
    let mut segments = Vec::new();
    let mut between = Vec::new();
    let mut seg_start = path.from;
    let mut seg_end = path.from;
    let mut tree = sp_tree(&g.view(), metric, seg_start, Dir::Out)?;
    let mut walked = ZERO_COST;
    for (i, &e) in path.edges.iter().enumerate() {
        let w = verts[i + 1];
        let cand = cost_sum(walked, metric.edge_cost(g, e));
        if tree.cost(w) == Some(cand) {
            seg_end = w;
            walked = cand;
        } else {
            segments.push((seg_start, seg_end));
            between.push(e);
            if between.len() > max_between {
                return Err(BuildError::RestorationTooLong {
                    edges: between.len(),
                    budget: max_between,
                });
            }
            seg_start = w;
            seg_end = w;
            walked = ZERO_COST;
            tree = sp_tree(&g.view(), metric, seg_start, Dir::Out)?;
        }
    }
    segments.push((seg_start, seg_end));
    Ok(Decomposition { segments, between })
}

/// Result of [`build_1cft_single_pair`] with its full accounting.
#[derive(Debug, Clone)]
pub struct SinglePairBuild {
    pub h: Subgraph,
    pub s: Vertex,
    pub t: Vertex,
    /// Colors appearing on the fault-free canonical path.
    pub path_colors: Vec<Color>,
    /// Decomposition of each color's replacement path (colors that
    /// disconnect the pair are absent).
    pub decompositions: Vec<(Color, Decomposition)>,
    /// Deduplicated interior pairs handed to the plain pairwise builder.
    pub dp_pairs: Vec<(Vertex, Vertex)>,
    /// Edges contributed by the two endpoint trees.
    pub tree_edges: usize,
    /// Edges contributed by the plain pairwise preserver.
    pub dp_edges: usize,
}

/// Builds a subgraph preserving `dist(s,t|c)` for every single color fault
/// (including none) of a weighted undirected graph.
///
/// The metric must have all-pairs unique shortest paths; use
/// [`perturb_weights`] to obtain one.
pub fn build_1cft_single_pair(
    g: &ColoredGraph,
    metric: &TieBrokenMetric,
    s: Vertex,
    t: Vertex,
) -> Result<SinglePairBuild, BuildError> {
    if g.directed() {
        return Err(BuildError::RequiresUndirected);
    }
    if s >= g.n() {
        return Err(BuildError::VertexOutOfRange(s));
    }
    if t >= g.n() {
        return Err(BuildError::VertexOutOfRange(t));
    }

    let mut h = Subgraph::empty(g);
    let tree_s = sp_tree(&g.view(), metric, s, Dir::Out)?;
    let tree_t = sp_tree(&g.view(), metric, t, Dir::Out)?;
    for e in tree_s.edges().chain(tree_t.edges()) {
        h.insert(e);
    }
    let tree_edges = h.len();

    let path_colors = tree_s.path(t).map(|p| p.colors(g)).unwrap_or_default();

    // One replacement path per on-path color, decomposed against the
    // fault-free metric; the fault budget is the exact class size.
    let replacements = exec::map_vec(path_colors.clone(), |c| {
        shortest_path(g, metric, s, t, &FaultSet::single_color(c))
            .map(|opt| opt.map(|p| (c, p)))
    });
    let mut decompositions = Vec::new();
    let mut dp_set: BTreeSet<(Vertex, Vertex)> = BTreeSet::new();
    let mut between_total = 0;
    for r in replacements {
        let Some((c, p)) = r? else { continue };
        let d = restoration_decompose(g, metric, &p, g.class(c).len())?;
        for &e in d.interleaving() {
            h.insert(e);
        }
        between_total += d.interleaving().len();
        dp_set.extend(d.interior_pairs().iter().copied());
        decompositions.push((c, d));
    }
    let dp_pairs: Vec<(Vertex, Vertex)> = dp_set.into_iter().collect();
    let dp = build_pairwise_dp(g, metric, &dp_pairs)?;
    let dp_edges = dp.len();
    h.union_with(&dp);

    // Builder accounting: the union can only be smaller than its parts.
    assert!(
        h.len() <= tree_edges + between_total + dp_edges,
        "single-pair accounting identity violated"
    );
    Ok(SinglePairBuild {
        h,
        s,
        t,
        path_colors,
        decompositions,
        dp_pairs,
        tree_edges,
        dp_edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeSpec, LiveView};
    use crate::instances::{random_colored_graph, RandomGraphCfg, WeightKind};
    use num_rational::Ratio;

    fn weighted_cfg(n: usize, m: usize, delta: usize) -> RandomGraphCfg {
        let mut cfg = RandomGraphCfg::unit(n, m, delta);
        cfg.weights = WeightKind::Integers { max: 9 };
        cfg
    }

    fn dist(
        g: &ColoredGraph,
        metric: &TieBrokenMetric,
        mask: Option<&[bool]>,
        fault: Option<&FaultSet>,
        s: Vertex,
        t: Vertex,
    ) -> Option<u128> {
        let view = match mask {
            Some(m) => LiveView::masked(g, m, fault),
            None => match fault {
                Some(f) => g.view_minus(f),
                None => g.view(),
            },
        };
        sp_tree(&view, metric, s, Dir::Out).unwrap().scaled_dist(t)
    }

    /// Every simple path between two vertices, as edge lists.
    fn all_simple_paths(g: &ColoredGraph, s: Vertex, t: Vertex) -> Vec<Vec<EdgeId>> {
        fn go(
            g: &ColoredGraph,
            cur: Vertex,
            t: Vertex,
            seen: &mut Vec<bool>,
            trail: &mut Vec<EdgeId>,
            out: &mut Vec<Vec<EdgeId>>,
        ) {
            if cur == t {
                out.push(trail.clone());
                return;
            }
            seen[cur] = true;
            for &e in g.out_edges(cur) {
                let next = g.other_endpoint(e, cur);
                if seen[next] {
                    continue;
                }
                trail.push(e);
                go(g, next, t, seen, trail, out);
                trail.pop();
            }
            seen[cur] = false;
        }
        let mut out = Vec::new();
        go(g, s, t, &mut vec![false; g.n()], &mut Vec::new(), &mut out);
        out
    }

    fn path_cost(g: &ColoredGraph, metric: &TieBrokenMetric, edges: &[EdgeId]) -> (u128, u128) {
        edges.iter().fold(ZERO_COST, |acc, &e| cost_sum(acc, metric.edge_cost(g, e)))
    }

    #[test]
    fn perturbed_clique_has_unique_paths() {
        let specs = vec![
            EdgeSpec::unit(0, 1, None),
            EdgeSpec::unit(0, 2, None),
            EdgeSpec::unit(0, 3, None),
            EdgeSpec::unit(1, 2, None),
            EdgeSpec::unit(1, 3, None),
            EdgeSpec::unit(2, 3, None),
        ];
        let g = ColoredGraph::from_parts(4, false, false, specs, None).unwrap();
        let metric = perturb_weights(&g, 11).unwrap();
        for s in 0..4 {
            for t in 0..4 {
                if s == t {
                    continue;
                }
                let best = all_simple_paths(&g, s, t)
                    .into_iter()
                    .map(|p| path_cost(&g, &metric, &p))
                    .min()
                    .unwrap();
                let ties = all_simple_paths(&g, s, t)
                    .into_iter()
                    .filter(|p| path_cost(&g, &metric, p) == best)
                    .count();
                assert_eq!(ties, 1, "pair ({s},{t}) has a tied minimum");
            }
        }
    }

    #[test]
    fn tree_paths_survive_perturbation() {
        // A weighted star: every pair's shortest path is forced through the
        // hub, and perturbation must not change that.
        let specs = vec![
            EdgeSpec::weighted(0, 1, Ratio::new(3, 2), None),
            EdgeSpec::weighted(0, 2, Ratio::new(5, 2), None),
            EdgeSpec::weighted(0, 3, Ratio::new(1, 2), None),
        ];
        let g = ColoredGraph::from_parts(4, false, true, specs, None).unwrap();
        let metric = perturb_weights(&g, 3).unwrap();
        let p = shortest_path(&g, &metric, 1, 2, &FaultSet::empty(FaultMode::Color))
            .unwrap()
            .unwrap();
        assert_eq!(p.edges, vec![0, 1]);
    }

    #[test]
    fn four_cycle_breaks_exactly_one_way() {
        let specs = vec![
            EdgeSpec::unit(0, 1, None),
            EdgeSpec::unit(1, 2, None),
            EdgeSpec::unit(2, 3, None),
            EdgeSpec::unit(3, 0, None),
        ];
        let g = ColoredGraph::from_parts(4, false, false, specs, None).unwrap();
        let metric = perturb_weights(&g, 7).unwrap();
        let upper = path_cost(&g, &metric, &[0, 1]);
        let lower = path_cost(&g, &metric, &[3, 2]);
        assert_ne!(upper, lower, "perturbation must break the tie");
        let p = shortest_path(&g, &metric, 0, 2, &FaultSet::empty(FaultMode::Color))
            .unwrap()
            .unwrap();
        let expect = if upper < lower { vec![0, 1] } else { vec![3, 2] };
        assert_eq!(p.edges, expect);
    }

    #[test]
    fn dp_builder_unions_exact_paths() {
        let g = random_colored_graph(&weighted_cfg(40, 110, 2), 5);
        let metric = perturb_weights(&g, 19).unwrap();
        let pairs: Vec<(Vertex, Vertex)> =
            (0..40).map(|i| ((i * 7) % 40, (i * 13 + 5) % 40)).collect();
        let h = build_pairwise_dp(&g, &metric, &pairs).unwrap();
        let mask = h.mask(&g);
        for &(x, y) in &pairs {
            assert_eq!(
                dist(&g, &metric, Some(&mask), None, x, y),
                dist(&g, &metric, None, None, x, y),
                "pair ({x},{y})"
            );
        }
        // A single pair is exactly its path.
        let one = build_pairwise_dp(&g, &metric, &pairs[..1]).unwrap();
        let p = shortest_path(&g, &metric, pairs[0].0, pairs[0].1, &FaultSet::empty(FaultMode::Color))
            .unwrap()
            .unwrap();
        let want: BTreeSet<EdgeId> = p.edges.iter().copied().collect();
        let got: BTreeSet<EdgeId> = one.iter().collect();
        assert_eq!(got, want);
    }

    #[test]
    fn fault_free_paths_decompose_to_one_segment() {
        let g = random_colored_graph(&weighted_cfg(20, 45, 2), 8);
        let metric = perturb_weights(&g, 2).unwrap();
        let p = shortest_path(&g, &metric, 0, 11, &FaultSet::empty(FaultMode::Color))
            .unwrap()
            .unwrap();
        let d = restoration_decompose(&g, &metric, &p, 0).unwrap();
        assert_eq!(d.segments, vec![(0, 11)]);
        assert!(d.between.is_empty());
        assert_eq!(d.reassemble(&g, &metric).unwrap(), p.edges);
    }

    #[test]
    fn detour_decomposes_into_two_segments_and_one_edge() {
        // Path 0–1–2–3 with the middle edge colored, plus a detour 1–4–2.
        let specs = vec![
            EdgeSpec::unit(0, 1, None),
            EdgeSpec::unit(1, 2, Some(Color(0))),
            EdgeSpec::unit(2, 3, None),
            EdgeSpec::unit(1, 4, None),
            EdgeSpec::unit(4, 2, None),
        ];
        let g =
            ColoredGraph::from_parts(5, false, false, specs, Some(vec!["mid".into()])).unwrap();
        let metric = perturb_weights(&g, 1).unwrap();
        let p = shortest_path(&g, &metric, 0, 3, &FaultSet::single_color(Color(0)))
            .unwrap()
            .unwrap();
        assert_eq!(p.edges, vec![0, 3, 4, 2]);
        let d = restoration_decompose(&g, &metric, &p, 1).unwrap();
        assert_eq!(d.segments, vec![(0, 4), (2, 3)]);
        assert_eq!(d.between, vec![4]);
        assert_eq!(d.reassemble(&g, &metric).unwrap(), p.edges);
        // With a zero budget the same path must be rejected.
        assert!(matches!(
            restoration_decompose(&g, &metric, &p, 0),
            Err(BuildError::RestorationTooLong { edges: 1, budget: 0 })
        ));
    }

    #[test]
    fn replacement_paths_respect_the_class_budget() {
        let g = random_colored_graph(&weighted_cfg(26, 60, 2), 31);
        let metric = perturb_weights(&g, 23).unwrap();
        for c in g.all_colors() {
            for (s, t) in [(0, 19), (7, 23)] {
                let Some(p) =
                    shortest_path(&g, &metric, s, t, &FaultSet::single_color(c)).unwrap()
                else {
                    continue;
                };
                let d = restoration_decompose(&g, &metric, &p, g.class(c).len()).unwrap();
                assert!(d.between.len() <= g.class(c).len());
                assert_eq!(d.num_segments(), d.between.len() + 1);
                assert_eq!(d.reassemble(&g, &metric).unwrap(), p.edges);
            }
        }
    }

    #[test]
    fn single_pair_preserver_is_oracle_exact() {
        for seed in [4u64, 29] {
            let g = random_colored_graph(&weighted_cfg(30, 75, 3), seed);
            let metric = perturb_weights(&g, seed ^ 0xBEEF).unwrap();
            let (s, t) = (0, 17);
            let built = build_1cft_single_pair(&g, &metric, s, t).unwrap();
            let mask = built.h.mask(&g);
            let faults: Vec<Option<Color>> =
                std::iter::once(None).chain(g.all_colors().map(Some)).collect();
            for c in faults {
                let fault = c.map(FaultSet::single_color);
                assert_eq!(
                    dist(&g, &metric, Some(&mask), fault.as_ref(), s, t),
                    dist(&g, &metric, None, fault.as_ref(), s, t),
                    "fault {c:?}"
                );
            }
        }
    }

    #[test]
    fn decomposition_components_are_contained() {
        let g = random_colored_graph(&weighted_cfg(28, 70, 3), 12);
        let metric = perturb_weights(&g, 40).unwrap();
        let built = build_1cft_single_pair(&g, &metric, 2, 21).unwrap();
        let no_fault = FaultSet::empty(FaultMode::Color);
        for (c, d) in &built.decompositions {
            for &e in d.interleaving() {
                assert!(built.h.contains(e), "interleaving edge of {c:?} missing");
            }
            for &(v, u) in &d.segments {
                if v == u {
                    continue;
                }
                let p = shortest_path(&g, &metric, v, u, &no_fault).unwrap().unwrap();
                for e in p.edges {
                    assert!(built.h.contains(e), "segment edge of {c:?} missing");
                }
            }
        }
        // Interior pairs went to the plain preserver.
        for (_, d) in &built.decompositions {
            for pr in d.interior_pairs() {
                assert!(built.dp_pairs.contains(pr));
            }
        }
    }

    #[test]
    fn uncolored_pair_needs_only_the_trees() {
        let mut cfg = weighted_cfg(22, 50, 1);
        cfg.uncolored_pct = 100;
        let g = random_colored_graph(&cfg, 3);
        let metric = perturb_weights(&g, 9).unwrap();
        let built = build_1cft_single_pair(&g, &metric, 1, 18).unwrap();
        assert!(built.path_colors.is_empty());
        assert!(built.decompositions.is_empty());
        assert_eq!(built.h.len(), built.tree_edges);
        assert_eq!(built.dp_edges, 0);
    }

    #[test]
    fn rejects_directed_graphs() {
        let mut cfg = weighted_cfg(10, 24, 1);
        cfg.directed = true;
        let g = random_colored_graph(&cfg, 2);
        assert!(matches!(perturb_weights(&g, 0), Err(BuildError::RequiresUndirected)));
        let metric = TieBrokenMetric::new(&g, 0);
        assert!(matches!(
            build_1cft_single_pair(&g, &metric, 0, 5),
            Err(BuildError::RequiresUndirected)
        ));
    }
}
