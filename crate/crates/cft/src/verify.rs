//! Brute-force verification oracles.
//!
//! Every checker here enumerates fault sets exhaustively and recomputes the
//! quantity under test (distance, reachability, disjoint-path count) with a
//! plain textbook algorithm. Nothing in this module shares code with the
//! builders' tie-broken shortest-path machinery — the oracle keeps its own
//! Dijkstra and BFS so a bug in the construction side cannot hide itself.
//!
//! Checkers never sample: either the full enumeration fits under the check
//! cap and the verdict is `Pass`/`Fail` with explicit counterexamples, or the
//! report is `Inconclusive` and says so up front.

use std::collections::BTreeMap;
use std::collections::VecDeque;
use std::fmt;
use std::time::{Duration, Instant};

use crate::combinatorics::{for_each_subset, subsets_up_to};
use crate::derived::PairSet;
use crate::exec::map_vec;
use crate::graph::{
    Color, ColoredGraph, EdgeId, FaultMode, FaultSet, LiveView, Subgraph, Vertex,
};
use crate::lowerbounds::{
    ColoredTreeInstance, Demand, LowerBoundInstance, PreserveMode, TreeShape,
};

/// Ceiling on `fault sets × demand pairs` before a checker refuses to run.
/// Beyond this the report comes back `Inconclusive`; results are never
/// silently sampled down.
pub const DEFAULT_CHECK_CAP: u128 = 10_000_000;

/// Outcome of a verification run.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Status {
    Pass,
    Fail,
    /// The enumeration would exceed the check cap; nothing was tested.
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        })
    }
}

/// A measured value in a counterexample. Distances are in the parent graph's
/// integer weight scale (`None` = unreachable); counts are disjoint-path
/// counts; `Holds` wraps yes/no properties such as "this edge is mandatory".
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Quantity {
    Dist(Option<u128>),
    Reach(bool),
    Count(usize),
    Holds(bool),
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Dist(Some(d)) => write!(f, "{d}"),
            Quantity::Dist(None) => f.write_str("inf"),
            Quantity::Reach(true) => f.write_str("reachable"),
            Quantity::Reach(false) => f.write_str("unreachable"),
            Quantity::Count(k) => write!(f, "{k}"),
            Quantity::Holds(true) => f.write_str("holds"),
            Quantity::Holds(false) => f.write_str("violated"),
        }
    }
}

/// One concrete failure: under `fault`, the pair (`source`, `target`) shows
/// `observed` where `expected` was required.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Counterexample {
    pub source: Vertex,
    pub target: Vertex,
    pub fault: FaultSet,
    pub expected: Quantity,
    pub observed: Quantity,
}

/// The result of one verification run. `counterexamples` is complete for the
/// enumerated space, not truncated, and is ordered deterministically (fault
/// sets by size then lexicographically, demand pairs in input order).
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub status: Status,
    /// Number of (fault set, pair) comparisons actually performed.
    pub checks_run: usize,
    pub counterexamples: Vec<Counterexample>,
    pub elapsed: Duration,
}

impl VerificationReport {
    pub fn pass(&self) -> bool {
        self.status == Status::Pass
    }

    /// Two-part CSV: a summary row, then one row per counterexample. The
    /// fault column is quoted because color names may repeat the separator.
    /// Timing is deliberately left out so identical runs serialize
    /// byte-identically; read `elapsed` programmatically instead.
    pub fn to_csv(&self, g: &ColoredGraph) -> String {
        let mut out = String::new();
        out.push_str("status,checks_run,counterexamples\n");
        out.push_str(&format!(
            "{},{},{}\n",
            self.status,
            self.checks_run,
            self.counterexamples.len()
        ));
        out.push_str("source,target,fault,expected,observed\n");
        for ce in &self.counterexamples {
            out.push_str(&format!(
                "{},{},\"{}\",{},{}\n",
                ce.source,
                ce.target,
                ce.fault.describe(g),
                ce.expected,
                ce.observed
            ));
        }
        out
    }
}

fn finish(start: Instant, checks_run: usize, counterexamples: Vec<Counterexample>) -> VerificationReport {
    let status = if counterexamples.is_empty() { Status::Pass } else { Status::Fail };
    VerificationReport { status, checks_run, counterexamples, elapsed: start.elapsed() }
}

fn inconclusive(start: Instant) -> VerificationReport {
    VerificationReport {
        status: Status::Inconclusive,
        checks_run: 0,
        counterexamples: Vec::new(),
        elapsed: start.elapsed(),
    }
}

/// Plain single-source shortest distances over the live edges of `view`, in
/// the parent graph's integer weight scale. Hop BFS when every weight is 1,
/// binary-heap Dijkstra otherwise. No perturbation, no tie-breaking: this is
/// the ground truth the builders are judged against.
fn oracle_dists(view: &LiveView<'_>, src: Vertex) -> Vec<Option<u128>> {
    let g = view.graph();
    let mut dist: Vec<Option<u128>> = vec![None; g.n()];
    dist[src] = Some(0);
    if g.is_unit() {
        let mut queue = VecDeque::from([src]);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v].expect("queued vertices have distances");
            for &e in g.out_edges(v) {
                if !view.alive(e) {
                    continue;
                }
                let w = other_endpoint(g, e, v);
                if dist[w].is_none() {
                    dist[w] = Some(dv + 1);
                    queue.push_back(w);
                }
            }
        }
        return dist;
    }
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(std::cmp::Reverse((0u128, src)));
    while let Some(std::cmp::Reverse((dv, v))) = heap.pop() {
        if dist[v] != Some(dv) {
            continue;
        }
        for &e in g.out_edges(v) {
            if !view.alive(e) {
                continue;
            }
            let w = other_endpoint(g, e, v);
            let dw = dv + u128::from(g.scaled_weight(e));
            if dist[w].map_or(true, |cur| dw < cur) {
                dist[w] = Some(dw);
                heap.push(std::cmp::Reverse((dw, w)));
            }
        }
    }
    dist
}

/// Which vertices `src` reaches over the live edges of `view`.
fn oracle_reach(view: &LiveView<'_>, src: Vertex) -> Vec<bool> {
    let g = view.graph();
    let mut seen = vec![false; g.n()];
    seen[src] = true;
    let mut queue = VecDeque::from([src]);
    while let Some(v) = queue.pop_front() {
        for &e in g.out_edges(v) {
            if !view.alive(e) {
                continue;
            }
            let w = other_endpoint(g, e, v);
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

fn other_endpoint(g: &ColoredGraph, e: EdgeId, v: Vertex) -> Vertex {
    let edge = g.edge(e);
    if edge.tail == v { edge.head } else { edge.tail }
}

/// Runs `job` on every fault set of the given mode with at most `f` members,
/// the empty set included. Fault sets are enumerated by size, then
/// lexicographically; jobs run in parallel but outputs come back concatenated
/// in enumeration order, so the merge is deterministic without sorting.
fn scan_fault_sets<R: Send>(
    g: &ColoredGraph,
    mode: FaultMode,
    f: usize,
    job: impl Fn(FaultSet) -> R + Sync + Send,
) -> Vec<R> {
    let universe = match mode {
        FaultMode::Color => g.num_colors(),
        FaultMode::Edge => g.m(),
    };
    const CHUNK: usize = 4096;
    let mut pending: Vec<FaultSet> = Vec::with_capacity(CHUNK);
    let mut out: Vec<R> = Vec::new();
    for_each_subset(universe, f, |ids| {
        // Ids arrive sorted and distinct, so the constructors cannot fail.
        let fault = match mode {
            FaultMode::Color => {
                FaultSet::colors(ids.iter().map(|&i| Color(i as u32)), f).expect("within budget")
            }
            FaultMode::Edge => FaultSet::edges(ids.iter().copied(), f).expect("within budget"),
        };
        pending.push(fault);
        if pending.len() == CHUNK {
            out.extend(map_vec(std::mem::take(&mut pending), &job));
        }
    });
    if !pending.is_empty() {
        out.extend(map_vec(pending, &job));
    }
    out
}

fn fault_universe(g: &ColoredGraph, mode: FaultMode) -> usize {
    match mode {
        FaultMode::Color => g.num_colors(),
        FaultMode::Edge => g.m(),
    }
}

/// Checks that `h` preserves, for every demand pair and every fault set of at
/// most `f` colors (or edges), the exact shortest-path distance of the parent
/// graph under the same fault. Unreachable-on-both-sides counts as agreement.
///
/// Requires `h` to be a subgraph of `g`; distances are compared in the exact
/// integer scale, so weighted graphs need no tolerance.
pub fn verify_distance_preserver(
    g: &ColoredGraph,
    h: &Subgraph,
    pairs: &PairSet,
    f: usize,
    mode: FaultMode,
    cap: u128,
) -> VerificationReport {
    let start = Instant::now();
    let num_faults = subsets_up_to(fault_universe(g, mode), f);
    if num_faults.saturating_mul(pairs.pairs().len() as u128) > cap {
        return inconclusive(start);
    }
    let hmask = h.mask(g);

    let per_fault = scan_fault_sets(g, mode, f, |fault| {
        let mut checks = 0usize;
        let mut cexs: Vec<Counterexample> = Vec::new();
        // One Dijkstra pair per distinct source under this fault.
        let mut cache: BTreeMap<Vertex, (Vec<Option<u128>>, Vec<Option<u128>>)> = BTreeMap::new();
        for &(s, t) in pairs.pairs() {
            let (dg, dh) = cache.entry(s).or_insert_with(|| {
                (
                    oracle_dists(&g.view_minus(&fault), s),
                    oracle_dists(&LiveView::masked(g, &hmask, Some(&fault)), s),
                )
            });
            checks += 1;
            if dg[t] != dh[t] {
                cexs.push(Counterexample {
                    source: s,
                    target: t,
                    fault: fault.clone(),
                    expected: Quantity::Dist(dg[t]),
                    observed: Quantity::Dist(dh[t]),
                });
            }
        }
        (checks, cexs)
    });

    let mut checks_run = 0usize;
    let mut counterexamples = Vec::new();
    for (checks, mut cexs) in per_fault {
        checks_run += checks;
        counterexamples.append(&mut cexs);
    }
    // The enumeration is exhaustive by construction; keep it honest.
    assert_eq!(
        checks_run as u128,
        num_faults * pairs.pairs().len() as u128,
        "fault enumeration lost or duplicated a subset"
    );
    finish(start, checks_run, counterexamples)
}

/// Checks that `h` reaches, from `source` and under every fault set of at
/// most `f` colors, exactly the vertices the parent graph still reaches.
pub fn verify_reachability_preserver(
    g: &ColoredGraph,
    h: &Subgraph,
    source: Vertex,
    f: usize,
    cap: u128,
) -> VerificationReport {
    let start = Instant::now();
    let num_faults = subsets_up_to(g.num_colors(), f);
    if num_faults.saturating_mul(g.n() as u128) > cap {
        return inconclusive(start);
    }
    let hmask = h.mask(g);

    let per_fault = scan_fault_sets(g, FaultMode::Color, f, |fault| {
        let rg = oracle_reach(&g.view_minus(&fault), source);
        let rh = oracle_reach(&LiveView::masked(g, &hmask, Some(&fault)), source);
        let mut cexs = Vec::new();
        for t in 0..g.n() {
            if rg[t] != rh[t] {
                cexs.push(Counterexample {
                    source,
                    target: t,
                    fault: fault.clone(),
                    expected: Quantity::Reach(rg[t]),
                    observed: Quantity::Reach(rh[t]),
                });
            }
        }
        (g.n(), cexs)
    });

    let mut checks_run = 0usize;
    let mut counterexamples = Vec::new();
    for (checks, mut cexs) in per_fault {
        checks_run += checks;
        counterexamples.append(&mut cexs);
    }
    assert_eq!(checks_run as u128, num_faults * g.n() as u128);
    finish(start, checks_run, counterexamples)
}

/// Maximum number of edge-disjoint paths from `s` to `t` over the live edges
/// of `view`, clipped at `cap`. Undirected edges may carry one path in either
/// direction. By convention `s == t` returns `cap` (a vertex trivially
/// reaches itself any number of times), so flow demands at the source are
/// never binding.
///
/// Unit-capacity augmenting BFS: at most `cap` augmentations plus one failed
/// search, each linear in the live edge count.
pub fn max_disjoint_paths(view: &LiveView<'_>, s: Vertex, t: Vertex, cap: usize) -> usize {
    if s == t {
        return cap;
    }
    let g = view.graph();
    let n = g.n();

    // Residual arcs in pairs: arc 2k forward with capacity 1, arc 2k+1 its
    // reverse with capacity 0. An undirected edge contributes both
    // orientations; flow cancellation keeps the count correct.
    let mut arc_to: Vec<Vertex> = Vec::new();
    let mut arc_cap: Vec<u8> = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let add_arc = |from: Vertex, toward: Vertex, arc_to: &mut Vec<Vertex>, arc_cap: &mut Vec<u8>, adj: &mut Vec<Vec<usize>>| {
        let a = arc_to.len();
        arc_to.push(toward);
        arc_cap.push(1);
        adj[from].push(a);
        arc_to.push(from);
        arc_cap.push(0);
        adj[toward].push(a + 1);
    };
    for e in 0..g.m() {
        if !view.alive(e) {
            continue;
        }
        let edge = g.edge(e);
        if edge.tail == edge.head {
            continue; // self-loops never extend an s-t path
        }
        add_arc(edge.tail, edge.head, &mut arc_to, &mut arc_cap, &mut adj);
        if !g.directed() {
            add_arc(edge.head, edge.tail, &mut arc_to, &mut arc_cap, &mut adj);
        }
    }

    let mut flow = 0usize;
    let mut prev_arc: Vec<Option<usize>> = vec![None; n];
    while flow < cap {
        for p in prev_arc.iter_mut() {
            *p = None;
        }
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        'bfs: while let Some(v) = queue.pop_front() {
            for &a in &adj[v] {
                if arc_cap[a] == 0 {
                    continue;
                }
                let w = arc_to[a];
                if seen[w] {
                    continue;
                }
                seen[w] = true;
                prev_arc[w] = Some(a);
                if w == t {
                    break 'bfs;
                }
                queue.push_back(w);
            }
        }
        if prev_arc[t].is_none() {
            break;
        }
        let mut v = t;
        while v != s {
            let a = prev_arc[v].expect("augmenting path reaches back to s");
            arc_cap[a] -= 1;
            arc_cap[a ^ 1] += 1;
            v = arc_to[a ^ 1];
        }
        flow += 1;
    }
    flow
}

/// Checks that `h` keeps, from `source` to every vertex and under every fault
/// set of at most `f` colors, at least `min(α, lambda)` edge-disjoint paths,
/// where `α` is what the parent graph has left under the same fault.
///
/// Only meaningful for unweighted directed graphs; asserts both.
pub fn verify_flow_preserver(
    g: &ColoredGraph,
    h: &Subgraph,
    source: Vertex,
    f: usize,
    lambda: usize,
    cap: u128,
) -> VerificationReport {
    assert!(g.directed(), "disjoint-path demands are defined on directed graphs");
    assert!(g.is_unit(), "disjoint-path demands ignore weights; graph must be unit");
    let start = Instant::now();
    let num_faults = subsets_up_to(g.num_colors(), f);
    if num_faults.saturating_mul(g.n() as u128) > cap {
        return inconclusive(start);
    }
    let hmask = h.mask(g);

    let per_fault = scan_fault_sets(g, FaultMode::Color, f, |fault| {
        let gv = g.view_minus(&fault);
        let hv = LiveView::masked(g, &hmask, Some(&fault));
        let mut cexs = Vec::new();
        for t in 0..g.n() {
            let alpha = max_disjoint_paths(&gv, source, t, lambda + 1);
            let need = alpha.min(lambda);
            let have = max_disjoint_paths(&hv, source, t, lambda);
            if have < need {
                cexs.push(Counterexample {
                    source,
                    target: t,
                    fault: fault.clone(),
                    expected: Quantity::Count(need),
                    observed: Quantity::Count(have),
                });
            }
        }
        (g.n(), cexs)
    });

    let mut checks_run = 0usize;
    let mut counterexamples = Vec::new();
    for (checks, mut cexs) in per_fault {
        checks_run += checks;
        counterexamples.append(&mut cexs);
    }
    assert_eq!(checks_run as u128, num_faults * g.n() as u128);
    finish(start, checks_run, counterexamples)
}

/// True when dropping `edge` breaks the demand under `fault`, relative to
/// what the full graph achieves under the same fault — i.e. every valid
/// output must keep `edge`. Distances must not grow, reachable targets must
/// stay reachable, and disjoint-path counts must not drop below the
/// threshold-clipped baseline.
pub fn probe_edge_mandatory(
    g: &ColoredGraph,
    demand: &Demand,
    mode: PreserveMode,
    edge: EdgeId,
    fault: &FaultSet,
) -> bool {
    let mut mask = vec![true; g.m()];
    mask[edge] = false;
    let full = g.view_minus(fault);
    let cut = LiveView::masked(g, &mask, Some(fault));

    let source_targets: Vec<(Vertex, Vec<Vertex>)> = match demand {
        Demand::Sources(sources) => {
            sources.iter().map(|&s| (s, (0..g.n()).collect())).collect()
        }
        Demand::Pair(u, v) => vec![(*u, vec![*v])],
    };

    match mode {
        PreserveMode::Distance => source_targets.iter().any(|(s, targets)| {
            let df = oracle_dists(&full, *s);
            let dc = oracle_dists(&cut, *s);
            targets.iter().any(|&t| df[t] != dc[t])
        }),
        PreserveMode::Reachability => source_targets.iter().any(|(s, targets)| {
            let rf = oracle_reach(&full, *s);
            let rc = oracle_reach(&cut, *s);
            targets.iter().any(|&t| rf[t] && !rc[t])
        }),
        PreserveMode::Flow(lambda) => source_targets.iter().any(|(s, targets)| {
            targets.iter().any(|&t| {
                let alpha = max_disjoint_paths(&full, *s, t, lambda + 1);
                max_disjoint_paths(&cut, *s, t, lambda) < alpha.min(lambda)
            })
        }),
    }
}

/// Confirms that every advertised mandatory edge of a hard instance really is
/// mandatory: dropping it under its witness fault changes a demanded
/// quantity. Also cross-checks the advertised count against the list length.
/// Counterexample rows carry the edge's endpoints as (source, target).
pub fn verify_mandatory_edges(instance: &LowerBoundInstance) -> VerificationReport {
    let start = Instant::now();
    let g = &instance.graph;

    let items: Vec<(EdgeId, FaultSet)> = instance
        .mandatory
        .iter()
        .map(|me| (me.edge, me.witness.clone()))
        .collect();
    let verdicts = map_vec(items, |(edge, witness)| {
        (
            edge,
            witness.clone(),
            probe_edge_mandatory(g, &instance.demand, instance.mode, edge, &witness),
        )
    });

    let mut counterexamples = Vec::new();
    let mut checks_run = 0usize;
    for (edge, witness, holds) in verdicts {
        checks_run += 1;
        if !holds {
            counterexamples.push(Counterexample {
                source: g.edge(edge).tail,
                target: g.edge(edge).head,
                fault: witness,
                expected: Quantity::Holds(true),
                observed: Quantity::Holds(false),
            });
        }
    }

    // The closed-form count must match the list the builder actually emitted.
    checks_run += 1;
    if instance.expected_mandatory != instance.mandatory.len() {
        counterexamples.push(Counterexample {
            source: 0,
            target: 0,
            fault: FaultSet::empty(FaultMode::Color),
            expected: Quantity::Count(instance.expected_mandatory),
            observed: Quantity::Count(instance.mandatory.len()),
        });
    }
    finish(start, checks_run, counterexamples)
}

/// Re-derives every guarantee a survivor tree advertises: leaf and edge
/// counts, acyclicity, depth bounds, per-leaf color-class sizes, and the
/// survivor property itself — failing a leaf's color leaves that leaf as the
/// unique nearest surviving leaf (q-way shape) or as the only surviving leaf
/// (binary shape). All distances come from this module's own BFS.
pub fn verify_tree_properties(tree: &ColoredTreeInstance) -> VerificationReport {
    let start = Instant::now();
    let g = &tree.graph;
    let root = tree.root;
    let empty = FaultSet::empty(FaultMode::Color);
    let mut counterexamples = Vec::new();
    let mut checks_run = 0usize;

    // Structural counts.
    checks_run += 1;
    if tree.leaves.len() != tree.expected_leaves {
        counterexamples.push(Counterexample {
            source: root,
            target: root,
            fault: empty.clone(),
            expected: Quantity::Count(tree.expected_leaves),
            observed: Quantity::Count(tree.leaves.len()),
        });
    }
    checks_run += 1;
    if g.m() != tree.expected_edges {
        counterexamples.push(Counterexample {
            source: root,
            target: root,
            fault: empty.clone(),
            expected: Quantity::Count(tree.expected_edges),
            observed: Quantity::Count(g.m()),
        });
    }
    // A connected graph on n vertices with n-1 edges is a tree.
    let depth = oracle_dists(&g.view(), root);
    checks_run += 1;
    if g.n() != g.m() + 1 || depth.iter().any(Option::is_none) {
        counterexamples.push(Counterexample {
            source: root,
            target: root,
            fault: empty.clone(),
            expected: Quantity::Holds(true),
            observed: Quantity::Holds(false),
        });
    }

    let delta = match tree.shape {
        TreeShape::NearestSurvivor { delta, .. } => delta,
        TreeShape::SoleSurvivor { delta } => delta,
    };
    let exact_classes = matches!(tree.shape, TreeShape::SoleSurvivor { .. });

    let leaf_jobs: Vec<(Vertex, Color)> = tree
        .leaves
        .iter()
        .map(|&v| (v, *tree.leaf_color.get(&v).expect("every leaf owns a color")))
        .collect();
    let per_leaf = map_vec(leaf_jobs, |(v, c)| {
        let mut checks = 0usize;
        let mut cexs = Vec::new();

        // Depth bounds.
        checks += 1;
        let (lo, hi) = tree.depth_bounds;
        let dv = depth[v].map(|d| d as usize);
        if dv.map_or(true, |d| d < lo || d > hi) {
            cexs.push(Counterexample {
                source: root,
                target: v,
                fault: empty.clone(),
                expected: Quantity::Holds(true),
                observed: Quantity::Holds(false),
            });
        }

        // Class size: at most delta edges share the leaf's color; exactly
        // delta in the binary shape.
        checks += 1;
        let size = g.class(c).len();
        let size_ok = if exact_classes { size == delta } else { size <= delta };
        if !size_ok {
            cexs.push(Counterexample {
                source: root,
                target: v,
                fault: FaultSet::single_color(c),
                expected: Quantity::Count(delta),
                observed: Quantity::Count(size),
            });
        }

        // Survivor property under the leaf's own color fault.
        checks += 1;
        let fault = FaultSet::single_color(c);
        let dists = oracle_dists(&g.view_minus(&fault), root);
        let survives = dists[v].is_some();
        let ok = match tree.shape {
            TreeShape::SoleSurvivor { .. } => {
                survives
                    && tree.leaves.iter().all(|&w| w == v || dists[w].is_none())
            }
            TreeShape::NearestSurvivor { .. } => {
                survives
                    && tree.leaves.iter().all(|&w| {
                        w == v || dists[w].map_or(true, |dw| dw > dists[v].unwrap())
                    })
            }
        };
        if !ok {
            cexs.push(Counterexample {
                source: root,
                target: v,
                fault,
                expected: Quantity::Holds(true),
                observed: Quantity::Holds(false),
            });
        }
        (checks, cexs)
    });

    for (checks, mut cexs) in per_leaf {
        checks_run += checks;
        counterexamples.append(&mut cexs);
    }
    finish(start, checks_run, counterexamples)
}
