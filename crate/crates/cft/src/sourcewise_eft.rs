//! Source-to-all distance preserver that survives up to `f` failing edges.
//!
//! The builder splits fault sets by where they sit relative to the target.
//! Fault sets whose edges all cluster near the end of the evolving
//! replacement path ("near" sets) are enumerated outright by a generation
//! process, and the last edge of each replacement path is kept. Everything
//! else is "far": some hitting-set vertex `a` lands on the tail of the
//! replacement path, and a recursively built preserver with a smaller fault
//! budget — rooted at that hitting set — already protects the path from `a`
//! onward. Thresholds square-root their way down from `(n/σ)·ln n`, one per
//! remaining fault.

use std::collections::{BTreeMap, BTreeSet};

use crate::combinatorics::{for_each_subset, permutations};
use crate::exec;
use crate::graph::{ColoredGraph, EdgeId, FaultSet, Path, Subgraph, Vertex};
use crate::hitting::{
    build_hitting_family, sample_vertices, FamilyScope, HittingMode,
};
use crate::metric::{shortest_path, sp_tree, Dir, MetricError, TieBrokenMetric};
use crate::sourcewise_cft::snap;
use crate::BuildError;

/// Largest fault budget for which the hitting-set families are enumerated and
/// verified exhaustively; larger budgets fall back to unverified sampling.
pub const EXHAUSTIVE_FAMILY_BUDGET: usize = 2;

/// Threshold ladder `d_i = base^(1/2^i)` for `i = 1..=budget`, clamped to
/// `[1, n]`; strictly decreasing whenever the base exceeds 1.
#[derive(Debug, Clone)]
pub struct EftThresholds {
    pub budget: usize,
    pub base: f64,
    /// `values[i] = d_{i+1}`; empty when the budget is 0.
    pub values: Vec<f64>,
}

impl EftThresholds {
    pub fn new(n: usize, sigma: usize, budget: usize) -> Self {
        let nf = n.max(1) as f64;
        let base = (nf / sigma.max(1) as f64) * nf.ln();
        Self::from_base(n, budget, base)
    }

    pub fn from_base(n: usize, budget: usize, base: f64) -> Self {
        let mut values = Vec::with_capacity(budget);
        let mut exp = 0.5;
        for _ in 0..budget {
            values.push(snap(base.powf(exp)).clamp(1.0, n.max(1) as f64));
            exp /= 2.0;
        }
        EftThresholds { budget, base, values }
    }

    /// `(threshold, suffix length)` pairs for the hitting families. The
    /// suffix is `⌊d⌋` edges: a vertex within `d` hops of the target sits at
    /// an integer hop count, so rounding the suffix up would admit vertices
    /// strictly beyond `d` and break the far-case splice.
    pub fn family_levels(&self) -> Vec<(f64, usize)> {
        self.values.iter().map(|&d| (d, (snap(d).floor() as usize).max(1))).collect()
    }

    /// Edge pool for position `i` (0-based) of the generation process: the
    /// `⌈d_{i+1}⌉`-edge tail of the current replacement path.
    pub fn gen_suffix(&self, i: usize) -> usize {
        (snap(self.values[i]).ceil() as usize).max(1)
    }

    /// Closed-form cap on fault sets the generation process can emit for one
    /// `(s, t)` pair: `Σ_{k≤f} k! · Π_{j≤k} ⌈d_j⌉`.
    pub fn generation_bound(&self) -> usize {
        let mut total = 1usize; // k = 0
        for k in 1..=self.values.len() {
            let kfact: usize = (1..=k).product();
            let prod: usize = (0..k).map(|j| self.gen_suffix(j)).product();
            total = total.saturating_add(kfact.saturating_mul(prod));
        }
        total
    }
}

/// One fault set emitted by the generation process, in generation order,
/// together with the threshold permutation that produced it.
#[derive(Debug, Clone)]
pub struct GeneratedFaults {
    pub faults: Vec<EdgeId>,
    /// 1-based threshold index used at each position.
    pub perm: Vec<usize>,
}

/// Everything the generation process produced for one `(s, t)` pair.
#[derive(Debug)]
pub struct NearGeneration {
    pub s: Vertex,
    pub t: Vertex,
    /// Set-deduplicated fault sets, the empty set first.
    pub sets: Vec<GeneratedFaults>,
    /// Last edges of the replacement paths of all generated fault sets.
    pub near_edges: BTreeSet<EdgeId>,
}

fn memo_path(
    g: &ColoredGraph,
    metric: &TieBrokenMetric,
    s: Vertex,
    t: Vertex,
    faults: &[EdgeId],
    memo: &mut BTreeMap<Vec<EdgeId>, Option<Path>>,
) -> Result<Option<Path>, MetricError> {
    let mut key = faults.to_vec();
    key.sort_unstable();
    if let Some(p) = memo.get(&key) {
        return Ok(p.clone());
    }
    let fault = FaultSet::edges(key.iter().copied(), key.len()).expect("faults fit their budget");
    let p = shortest_path(g, metric, s, t, &fault)?;
    memo.insert(key, p.clone());
    Ok(p)
}

#[allow(clippy::too_many_arguments)]
fn gen_dfs(
    g: &ColoredGraph,
    metric: &TieBrokenMetric,
    s: Vertex,
    t: Vertex,
    th: &EftThresholds,
    perm: &[usize],
    prefix: &mut Vec<EdgeId>,
    memo: &mut BTreeMap<Vec<EdgeId>, Option<Path>>,
    seen: &mut BTreeSet<Vec<EdgeId>>,
    sets: &mut Vec<GeneratedFaults>,
) -> Result<(), MetricError> {
    let pos = prefix.len();
    if pos == perm.len() {
        let mut sorted = prefix.clone();
        sorted.sort_unstable();
        if seen.insert(sorted) {
            sets.push(GeneratedFaults { faults: prefix.clone(), perm: perm.to_vec() });
        }
        return Ok(());
    }
    let Some(path) = memo_path(g, metric, s, t, prefix, memo)? else {
        return Ok(()); // the prefix already disconnects t: prune
    };
    let pool_len = th.gen_suffix(perm[pos] - 1);
    let start = path.edges.len().saturating_sub(pool_len);
    let pool: Vec<EdgeId> = path.edges[start..].to_vec();
    for e in pool {
        debug_assert!(!prefix.contains(&e), "replacement paths avoid prior faults");
        prefix.push(e);
        gen_dfs(g, metric, s, t, th, perm, prefix, memo, seen, sets)?;
        prefix.pop();
    }
    Ok(())
}

/// Runs the generation process for one `(s, t)` pair: for every fault count
/// `k ≤ budget` and every permutation of the first `k` thresholds, repeatedly
/// fault an edge from the permuted-threshold tail of the current replacement
/// path. Records the last edge of every generated fault set's replacement.
pub fn generate_near_sets(
    g: &ColoredGraph,
    metric: &TieBrokenMetric,
    s: Vertex,
    t: Vertex,
    th: &EftThresholds,
) -> Result<NearGeneration, MetricError> {
    let mut memo: BTreeMap<Vec<EdgeId>, Option<Path>> = BTreeMap::new();
    let mut seen: BTreeSet<Vec<EdgeId>> = BTreeSet::new();
    let mut sets: Vec<GeneratedFaults> = Vec::new();

    seen.insert(Vec::new());
    sets.push(GeneratedFaults { faults: Vec::new(), perm: Vec::new() });

    for k in 1..=th.values.len() {
        let idxs: Vec<usize> = (1..=k).collect();
        for perm in permutations(&idxs) {
            let mut prefix = Vec::with_capacity(k);
            gen_dfs(g, metric, s, t, th, &perm, &mut prefix, &mut memo, &mut seen, &mut sets)?;
        }
    }

    let mut near_edges = BTreeSet::new();
    for gf in &sets {
        if let Some(p) = memo_path(g, metric, s, t, &gf.faults, &mut memo)? {
            if let Some(e) = p.last_edge() {
                near_edges.insert(e);
            }
        }
    }
    Ok(NearGeneration { s, t, sets, near_edges })
}

/// The built preserver plus its construction ledger.
#[derive(Debug)]
pub struct EftBuild {
    pub h: Subgraph,
    pub budget: usize,
    pub thresholds: EftThresholds,
    /// Hitting sets `A_1..A_f` of this level (children keep their own).
    pub hitting_sets: Vec<Vec<Vertex>>,
    /// True when any level (here or below) sampled its hitting sets without
    /// exhaustive family verification (fault budgets above
    /// [`EXHAUSTIVE_FAMILY_BUDGET`]).
    pub unverified_hitting: bool,
    /// Fault sets generated across this level's `(s, t)` pairs.
    pub generated_sets: usize,
    /// `(s, t)` pair count times the per-pair generation bound.
    pub generation_bound: usize,
}

/// Builds the preserver: every source-to-target distance survives any set of
/// at most `budget` edge faults. Requires unit weights; directed is fine.
pub fn build_feft_sourcewise(
    g: &ColoredGraph,
    metric: &TieBrokenMetric,
    sources: &[Vertex],
    budget: usize,
    mode: HittingMode,
) -> Result<EftBuild, BuildError> {
    if !g.is_unit() {
        return Err(BuildError::RequiresUnitWeights);
    }
    if sources.is_empty() {
        return Err(BuildError::NoSources);
    }
    if let Some(&v) = sources.iter().find(|&&v| v >= g.n()) {
        return Err(BuildError::VertexOutOfRange(v));
    }
    let mut srcs = sources.to_vec();
    srcs.sort_unstable();
    srcs.dedup();

    let thresholds = EftThresholds::new(g.n(), srcs.len(), budget);

    if budget == 0 {
        // No faults to survive: the union of shortest-path trees is exact.
        let trees = exec::map_vec(srcs.clone(), |s| {
            sp_tree(&g.view(), metric, s, Dir::Out).map(|t| t.edges().collect::<Vec<_>>())
        });
        let mut h = Subgraph::empty(g);
        for tree in trees {
            for e in tree? {
                h.insert(e);
            }
        }
        return Ok(EftBuild {
            h,
            budget,
            thresholds,
            hitting_sets: Vec::new(),
            unverified_hitting: false,
            generated_sets: 1, // the empty fault set
            generation_bound: 1,
        });
    }

    // Near fault sets, one generation per (s, t) pair.
    let mut jobs: Vec<(Vertex, Vertex)> = Vec::new();
    for &s in &srcs {
        jobs.extend((0..g.n()).filter(|&t| t != s).map(|t| (s, t)));
    }
    let pair_count = jobs.len();
    let gens = exec::map_vec(jobs, |(s, t)| generate_near_sets(g, metric, s, t, &thresholds));

    let mut h = Subgraph::empty(g);
    let mut generated_sets = 0;
    for gen in gens {
        let gen = gen?;
        generated_sets += gen.sets.len();
        for e in gen.near_edges {
            h.insert(e);
        }
    }
    let generation_bound = pair_count * thresholds.generation_bound();

    // Hitting sets A_1..A_f, exhaustively verified at small budgets.
    let (hitting_sets, mut unverified_hitting) = if budget <= EXHAUSTIVE_FAMILY_BUDGET {
        let family = build_hitting_family(
            g,
            metric,
            &srcs,
            &thresholds.family_levels(),
            mode,
            metric.seed(),
            FamilyScope::EdgeSets { budget },
        )?;
        let sets: Vec<Vec<Vertex>> = family.interior().iter().map(|l| l.set.clone()).collect();
        (sets, false)
    } else {
        let sets: Vec<Vec<Vertex>> = thresholds
            .values
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                sample_vertices(
                    g.n(),
                    d,
                    metric.seed() ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                )
            })
            .collect();
        (sets, true)
    };

    // Far fault sets: recurse with a smaller budget from each hitting set.
    for (i, a_set) in hitting_sets.iter().enumerate() {
        if a_set.is_empty() {
            continue;
        }
        let child = build_feft_sourcewise(g, metric, a_set, budget - (i + 1), mode)?;
        h.union_with(&child.h);
        unverified_hitting |= child.unverified_hitting;
    }

    Ok(EftBuild {
        h,
        budget,
        thresholds,
        hitting_sets,
        unverified_hitting,
        generated_sets,
        generation_bound,
    })
}

/// Independent classification of one fault set for one `(s, t)` pair, used to
/// cross-check the generation process.
#[derive(Debug)]
pub struct FaultClassification {
    /// No strict subset yields the same replacement path.
    pub minimal: bool,
    /// Defined for minimal sets: every fault can be matched to a distinct
    /// threshold at least its distance-to-target.
    pub near: bool,
    /// Canonical order (minimal sets only): position `i` holds the last
    /// faulty edge on the replacement path for the first `i` entries.
    pub canonical: Vec<EdgeId>,
    /// Hop distance from each canonical edge to `t` after its predecessors
    /// fail; `None` when `t` became unreachable from the edge.
    pub deltas: Vec<Option<u128>>,
}

/// Hop distance from `e` to `t` once `fault` fails: one step along `e` (in
/// any direction the graph allows) plus the remaining distance to `t`.
fn edge_target_dist(
    g: &ColoredGraph,
    metric: &TieBrokenMetric,
    e: EdgeId,
    t: Vertex,
    fault: &FaultSet,
) -> Result<Option<u128>, MetricError> {
    let view = g.view_minus(fault);
    let tree = sp_tree(&view, metric, t, Dir::In)?;
    let edge = g.edge(e);
    let via_head = tree.hop_dist(edge.head);
    let exit = if g.directed() {
        via_head
    } else {
        match (via_head, tree.hop_dist(edge.tail)) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    };
    Ok(exit.map(|d| d + 1))
}

/// Classifies `faults` for `(s, t)`: `Ok(None)` when the faults disconnect
/// `t` (such sets never contribute a last edge), otherwise minimality, the
/// canonical order, per-edge target distances, and nearness.
pub fn classify_fault_set(
    g: &ColoredGraph,
    metric: &TieBrokenMetric,
    s: Vertex,
    t: Vertex,
    faults: &[EdgeId],
    th: &EftThresholds,
) -> Result<Option<FaultClassification>, MetricError> {
    let k = faults.len();
    assert!(k <= th.values.len(), "fault set exceeds the threshold budget");
    let full_fault =
        FaultSet::edges(faults.iter().copied(), k).expect("fault list fits its own size");
    let Some(full_path) = shortest_path(g, metric, s, t, &full_fault)? else {
        return Ok(None);
    };
    if k == 0 {
        // The empty set has no strict subsets and nothing to match against
        // the thresholds, so it is minimal and near by definition.
        return Ok(Some(FaultClassification {
            minimal: true,
            near: true,
            canonical: Vec::new(),
            deltas: Vec::new(),
        }));
    }

    // Minimality: no strict subset may reproduce the same path.
    let mut minimal = true;
    for_each_subset(k, k.saturating_sub(1), |idxs| {
        if !minimal {
            return;
        }
        let sub: Vec<EdgeId> = idxs.iter().map(|&i| faults[i]).collect();
        let fs = FaultSet::edges(sub.iter().copied(), k).expect("subset fits budget");
        if let Ok(Some(p)) = shortest_path(g, metric, s, t, &fs) {
            if p == full_path {
                minimal = false;
            }
        }
    });
    if !minimal {
        return Ok(Some(FaultClassification {
            minimal: false,
            near: false,
            canonical: Vec::new(),
            deltas: Vec::new(),
        }));
    }

    // Canonical order: e_i is the last remaining fault on the replacement
    // path for {e_1..e_{i-1}}.
    let mut canonical: Vec<EdgeId> = Vec::with_capacity(k);
    let mut deltas: Vec<Option<u128>> = Vec::with_capacity(k);
    for _ in 0..k {
        let prefix_fault = FaultSet::edges(canonical.iter().copied(), k)
            .expect("prefix stays within the fault budget");
        let path = shortest_path(g, metric, s, t, &prefix_fault)?
            .expect("subsets of a surviving fault set keep t reachable");
        let next = path
            .edges
            .iter()
            .rev()
            .copied()
            .find(|e| faults.contains(e) && !canonical.contains(e))
            .expect("minimal fault sets keep a fault on every prefix path");
        deltas.push(edge_target_dist(g, metric, next, t, &prefix_fault)?);
        canonical.push(next);
    }

    // Nearness: sort distances descending and match them to the thresholds
    // in order; feasible iff the i-th largest fits under the i-th threshold.
    let mut sorted: Vec<Option<u128>> = deltas.clone();
    sorted.sort_by(|a, b| match (a, b) {
        (None, None) => std::cmp::Ordering::Equal,
        (None, Some(_)) => std::cmp::Ordering::Less,
        (Some(_), None) => std::cmp::Ordering::Greater,
        (Some(x), Some(y)) => y.cmp(x),
    });
    let near = sorted.iter().enumerate().all(|(j, d)| match d {
        Some(d) => (*d as f64) <= th.values[j],
        None => false,
    });

    Ok(Some(FaultClassification { minimal: true, near, canonical, deltas }))
}

/// Brute-force enumeration of every minimal near fault set for `(s, t)` with
/// at most `budget` edges, as sorted edge lists. The generation process must
/// produce a superset of these.
pub fn enumerate_minimal_near_sets(
    g: &ColoredGraph,
    metric: &TieBrokenMetric,
    s: Vertex,
    t: Vertex,
    th: &EftThresholds,
    budget: usize,
) -> Result<Vec<Vec<EdgeId>>, MetricError> {
    let mut out = Vec::new();
    let mut first_err: Option<MetricError> = None;
    for_each_subset(g.m(), budget, |idxs| {
        if first_err.is_some() {
            return;
        }
        match classify_fault_set(g, metric, s, t, idxs, th) {
            Ok(Some(c)) if c.minimal && c.near => out.push(idxs.to_vec()),
            Ok(_) => {}
            Err(e) => first_err = Some(e),
        }
    });
    match first_err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// For a far minimal fault set, checks the splice property the recursion
/// relies on: for every prefix of the distance-sorted faults that witnesses
/// farness, removing that prefix leaves the replacement path from any vertex
/// on the corresponding tail of `π(s,t|F)` unchanged.
pub fn check_far_splice(
    g: &ColoredGraph,
    metric: &TieBrokenMetric,
    s: Vertex,
    t: Vertex,
    class: &FaultClassification,
    th: &EftThresholds,
) -> Result<bool, MetricError> {
    assert!(class.minimal && !class.near, "splice check applies to far minimal sets");
    let k = class.canonical.len();
    let full_fault = FaultSet::edges(class.canonical.iter().copied(), k)
        .expect("fault list fits its own size");
    let Some(full_path) = shortest_path(g, metric, s, t, &full_fault)? else {
        return Ok(true); // t unreachable: nothing to splice
    };

    // τ sorts canonical positions by delta, descending, None (∞) first.
    let mut tau: Vec<usize> = (0..k).collect();
    tau.sort_by(|&a, &b| match (&class.deltas[a], &class.deltas[b]) {
        (None, None) => a.cmp(&b),
        (None, Some(_)) => std::cmp::Ordering::Less,
        (Some(_), None) => std::cmp::Ordering::Greater,
        (Some(x), Some(y)) => y.cmp(x).then(a.cmp(&b)),
    });

    for j in 1..=k {
        let witnesses_far = match class.deltas[tau[j - 1]] {
            None => true,
            Some(d) => (d as f64) > th.values[j - 1],
        };
        if !witnesses_far {
            continue;
        }
        let removed: BTreeSet<EdgeId> = tau[..j].iter().map(|&i| class.canonical[i]).collect();
        let kept: Vec<EdgeId> =
            class.canonical.iter().copied().filter(|e| !removed.contains(e)).collect();
        let kept_fault = FaultSet::edges(kept.iter().copied(), k)
            .expect("subsets stay within the fault budget");

        let d_j = th.values[j - 1];
        let tail = (snap(d_j).floor() as usize).min(full_path.edges.len());
        let verts = full_path.vertices(g);
        for &a in &verts[verts.len() - 1 - tail..] {
            let with_all = shortest_path(g, metric, a, t, &full_fault)?;
            let with_kept = shortest_path(g, metric, a, t, &kept_fault)?;
            if with_all != with_kept {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeSpec, LiveView};
    use crate::instances::{random_colored_graph, RandomGraphCfg};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn threshold_examples() {
        let th = EftThresholds::from_base(1000, 2, 16.0);
        assert!(close(th.values[0], 4.0) && close(th.values[1], 2.0));
        let th = EftThresholds::from_base(1000, 3, 256.0);
        assert!(close(th.values[0], 16.0) && close(th.values[1], 4.0) && close(th.values[2], 2.0));
        assert!(EftThresholds::from_base(1000, 0, 16.0).values.is_empty());
        // Clamped ladders may tie at 1 but never rise.
        let th = EftThresholds::new(2, 2, 2);
        assert!(th.values.windows(2).all(|w| w[0] >= w[1]));
        assert!(th.values.iter().all(|&d| (1.0..=2.0).contains(&d)));
    }

    fn four_path() -> ColoredGraph {
        let specs =
            vec![EdgeSpec::unit(0, 1, None), EdgeSpec::unit(1, 2, None), EdgeSpec::unit(2, 3, None)];
        ColoredGraph::from_parts(4, false, false, specs, None).unwrap()
    }

    #[test]
    fn generation_on_a_path_matches_hand_enumeration() {
        let g = four_path();
        let metric = TieBrokenMetric::new(&g, 2);
        let th = EftThresholds::from_base(4, 1, 4.0); // d_1 = 2
        let gen = generate_near_sets(&g, &metric, 0, 3, &th).unwrap();
        let mut got: Vec<Vec<EdgeId>> = gen.sets.iter().map(|s| {
            let mut f = s.faults.clone();
            f.sort_unstable();
            f
        }).collect();
        got.sort();
        // Empty set plus the two edges on the 2-edge tail of 0–1–2–3.
        assert_eq!(got, vec![vec![], vec![1], vec![2]]);
        // Faulting either tail edge disconnects t, so only the fault-free
        // last edge survives into the kept set.
        assert_eq!(gen.near_edges.iter().copied().collect::<Vec<_>>(), vec![2]);
        assert!(gen.sets.len() <= th.generation_bound());
    }

    #[test]
    fn zero_budget_generation_keeps_the_last_edge() {
        let g = four_path();
        let metric = TieBrokenMetric::new(&g, 2);
        let th = EftThresholds::from_base(4, 0, 4.0);
        let gen = generate_near_sets(&g, &metric, 0, 3, &th).unwrap();
        assert_eq!(gen.sets.len(), 1);
        assert_eq!(gen.near_edges.iter().copied().collect::<Vec<_>>(), vec![2]);
    }

    #[test]
    fn zero_budget_build_is_the_tree_union() {
        let g = random_colored_graph(&RandomGraphCfg::unit(20, 45, 2), 3);
        let metric = TieBrokenMetric::new(&g, 3);
        let built = build_feft_sourcewise(&g, &metric, &[0, 5], 0, HittingMode::Greedy).unwrap();
        let mut want = BTreeSet::new();
        for s in [0, 5] {
            want.extend(sp_tree(&g.view(), &metric, s, Dir::Out).unwrap().edges());
        }
        assert_eq!(built.h.iter().collect::<BTreeSet<_>>(), want);
        assert!(!built.unverified_hitting);
    }

    /// Exhaustively checks the subgraph against the graph for every fault set
    /// of at most `budget` edges.
    fn assert_eft_preserves(
        g: &ColoredGraph,
        metric: &TieBrokenMetric,
        h: &Subgraph,
        sources: &[Vertex],
        budget: usize,
    ) {
        let mask = h.mask(g);
        for_each_subset(g.m(), budget, |idxs| {
            let fault = FaultSet::edges(idxs.iter().copied(), budget).unwrap();
            for &s in sources {
                let full = sp_tree(&g.view_minus(&fault), metric, s, Dir::Out).unwrap();
                let sub_view = LiveView::masked(g, &mask, Some(&fault));
                let sub = sp_tree(&sub_view, metric, s, Dir::Out).unwrap();
                for t in 0..g.n() {
                    assert_eq!(
                        full.scaled_dist(t),
                        sub.scaled_dist(t),
                        "distance changed: s={s} t={t} faults={idxs:?}"
                    );
                }
            }
        });
    }

    #[test]
    fn single_fault_preserver_is_oracle_exact() {
        for seed in [1u64, 2] {
            let g = random_colored_graph(&RandomGraphCfg::unit(25, 60, 2), seed);
            let metric = TieBrokenMetric::new(&g, seed);
            let built = build_feft_sourcewise(&g, &metric, &[0, 1], 1, HittingMode::Greedy).unwrap();
            assert_eft_preserves(&g, &metric, &built.h, &[0, 1], 1);
            assert!(!built.unverified_hitting);
            assert!(built.generated_sets <= built.generation_bound);
        }
    }

    #[test]
    fn double_fault_preserver_is_oracle_exact() {
        let g = random_colored_graph(&RandomGraphCfg::unit(16, 36, 2), 4);
        let metric = TieBrokenMetric::new(&g, 4);
        let built = build_feft_sourcewise(&g, &metric, &[0], 2, HittingMode::Greedy).unwrap();
        assert_eft_preserves(&g, &metric, &built.h, &[0], 2);
    }

    #[test]
    fn generation_covers_every_minimal_near_set() {
        let g = random_colored_graph(&RandomGraphCfg::unit(14, 30, 2), 6);
        let metric = TieBrokenMetric::new(&g, 6);
        let th = EftThresholds::new(g.n(), 1, 2);
        for t in 1..g.n() {
            let wanted = enumerate_minimal_near_sets(&g, &metric, 0, t, &th, 2).unwrap();
            let gen = generate_near_sets(&g, &metric, 0, t, &th).unwrap();
            let have: BTreeSet<Vec<EdgeId>> = gen
                .sets
                .iter()
                .map(|s| {
                    let mut f = s.faults.clone();
                    f.sort_unstable();
                    f
                })
                .collect();
            for f in wanted {
                assert!(have.contains(&f), "minimal near set {f:?} not generated for t={t}");
            }
        }
    }

    #[test]
    fn far_minimal_sets_satisfy_the_splice_property() {
        let g = random_colored_graph(&RandomGraphCfg::unit(14, 30, 2), 9);
        let metric = TieBrokenMetric::new(&g, 9);
        let th = EftThresholds::new(g.n(), 1, 2);
        let mut far_seen = 0;
        for t in 1..g.n() {
            for_each_subset(g.m(), 2, |idxs| {
                if idxs.is_empty() {
                    return;
                }
                let class = classify_fault_set(&g, &metric, 0, t, idxs, &th).unwrap();
                if let Some(c) = class {
                    if c.minimal && !c.near {
                        far_seen += 1;
                        assert!(
                            check_far_splice(&g, &metric, 0, t, &c, &th).unwrap(),
                            "splice failed for faults {idxs:?} t={t}"
                        );
                    }
                }
            });
        }
        assert!(far_seen > 0, "instance produced no far sets; pick another seed");
    }

    #[test]
    fn rebuild_is_deterministic() {
        let g = random_colored_graph(&RandomGraphCfg::unit(18, 40, 2), 12);
        let metric = TieBrokenMetric::new(&g, 12);
        let a = build_feft_sourcewise(&g, &metric, &[0, 2], 1, HittingMode::Greedy).unwrap();
        let b = build_feft_sourcewise(&g, &metric, &[0, 2], 1, HittingMode::Greedy).unwrap();
        assert_eq!(a.h.iter().collect::<Vec<_>>(), b.h.iter().collect::<Vec<_>>());
    }

    #[test]
    fn large_budget_samples_and_flags() {
        let g = random_colored_graph(&RandomGraphCfg::unit(12, 26, 2), 15);
        let metric = TieBrokenMetric::new(&g, 15);
        let built = build_feft_sourcewise(&g, &metric, &[0], 3, HittingMode::Greedy).unwrap();
        assert!(built.unverified_hitting);
        assert_eft_preserves(&g, &metric, &built.h, &[0], 3);
    }
}
