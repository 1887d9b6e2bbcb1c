//! Worst-case instance generators.
//!
//! The heart of the module is a pair of recursive *survivor tree* families:
//! edge-colored trees in which failing one leaf's color exposes exactly that
//! leaf — either as the unique surviving leaf closest to the root, or as the
//! only leaf still connected at all. Stacking a bipartite gadget on top of
//! the leaves turns either family into an instance where any fault-tolerant
//! preserver provably must keep a near-quadratic set of edges. Every builder
//! returns that set explicitly, edge by edge, each paired with the fault set
//! witnessing why the edge cannot be dropped.

use std::collections::BTreeMap;

use num_rational::Ratio;
use thiserror::Error;

use crate::derived::PairSet;
use crate::graph::{
    Color, ColoredGraph, EdgeId, EdgeSpec, FaultSet, GraphError, LiveView, Vertex,
};
use crate::metric::{sp_tree, Dir, MetricError, TieBrokenMetric};

/// Base seed for the throwaway tie-breaking metrics used to measure exact
/// distances; the measured distances never depend on it.
const DIST_SEED: u64 = 0x853C_49E6_748F_EA9B;
/// Per-retry salt mixed into [`DIST_SEED`] when a draw happens to collide.
const DIST_SALT: u64 = 0xBF58_476D_1CE4_E5B9;
/// Retries before giving up on finding a collision-free measurement salt.
const DIST_RETRY_CAP: usize = 8;

#[derive(Error, Debug)]
pub enum LowerBoundError {
    #[error("survivor trees need a branching factor of at least 2, got {q}")]
    BranchingTooSmall { q: usize },
    #[error("{name} must be at least {min}, got {got}")]
    ParamTooSmall { name: &'static str, min: usize, got: usize },
    #[error("the construction needs {needed} tree vertices, over the budget {budget}")]
    TreesTooLarge { needed: usize, budget: usize },
    #[error("the pair graph must be undirected")]
    RequiresUndirected,
    #[error("the pair graph must be uncolored")]
    RequiresUncolored,
    #[error("pair endpoint {v} does not exist in a graph on {n} vertices")]
    PairOutOfRange { v: Vertex, n: usize },
    #[error("vertices {u} and {v} are disconnected, so distances cannot be rescaled below one")]
    DisconnectedPair { u: Vertex, v: Vertex },
    #[error("instance weights do not fit the supported precision")]
    WeightOverflow,
    #[error("gave up measuring distances after {retries} tie-breaking reseeds")]
    RetryCapExceeded { retries: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Which guarantee an instance stresses.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PreserveMode {
    Distance,
    Reachability,
    /// Edge-disjoint path counts from the source, up to the given threshold.
    Flow(usize),
}

/// The demand side of an instance: preserve from every listed source to
/// every vertex, or between one fixed pair.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Demand {
    Sources(Vec<Vertex>),
    Pair(Vertex, Vertex),
}

/// One edge that every valid preserver must keep, with the fault set under
/// which dropping it changes a preserved quantity.
#[derive(Clone, Debug)]
pub struct MandatoryEdge {
    pub edge: EdgeId,
    pub witness: FaultSet,
}

/// A generated hard instance: the graph, its demand, and the explicit list
/// of edges no valid preserver can drop.
#[derive(Clone, Debug)]
pub struct LowerBoundInstance {
    pub graph: ColoredGraph,
    pub demand: Demand,
    pub mode: PreserveMode,
    pub mandatory: Vec<MandatoryEdge>,
    /// The count the construction guarantees; always equals
    /// `mandatory.len()` and is kept separate so tests pin the arithmetic.
    pub expected_mandatory: usize,
}

/// Construction parameters of a survivor tree.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TreeShape {
    /// `q`-way recursion with long uncolored runways: failing a leaf's color
    /// leaves that leaf as the unique surviving leaf of minimal depth.
    NearestSurvivor { delta: usize, q: usize },
    /// Binary recursion: failing a leaf's color disconnects every other
    /// leaf from the root.
    SoleSurvivor { delta: usize },
}

/// A survivor tree together with the data its guarantees refer to. The
/// closed-form counts are checked against the built graph on construction.
#[derive(Clone, Debug)]
pub struct ColoredTreeInstance {
    /// Undirected unit-weight tree.
    pub graph: ColoredGraph,
    pub root: Vertex,
    /// Leaves in construction order.
    pub leaves: Vec<Vertex>,
    /// The color whose failure exposes each leaf. Palette entries for leaves
    /// whose color never landed on an edge are retained as empty classes.
    pub leaf_color: BTreeMap<Vertex, Color>,
    pub shape: TreeShape,
    pub expected_leaves: usize,
    pub expected_edges: usize,
    /// Inclusive bounds every leaf depth must satisfy.
    pub depth_bounds: (usize, usize),
}

/// Incremental tree assembly: fresh vertices, fresh colors, unit edges.
struct TreeBuilder {
    specs: Vec<EdgeSpec>,
    next_vertex: usize,
    next_color: u32,
}

impl TreeBuilder {
    fn new() -> Self {
        TreeBuilder { specs: Vec::new(), next_vertex: 0, next_color: 0 }
    }

    fn fresh_vertex(&mut self) -> Vertex {
        self.next_vertex += 1;
        self.next_vertex - 1
    }

    fn fresh_color(&mut self) -> Color {
        self.next_color += 1;
        Color(self.next_color - 1)
    }

    /// Appends a path of `colors.len() ≥ 1` unit edges from `from` to `to`,
    /// creating the interior vertices; `colors[j]` lands on the j-th edge.
    /// Edges are written tail-to-head walking away from `from`, so directing
    /// the final graph orients every edge away from the root.
    fn connect(&mut self, from: Vertex, to: Vertex, colors: &[Option<Color>]) {
        assert!(!colors.is_empty(), "a connecting path needs at least one edge");
        let mut prev = from;
        for (j, color) in colors.iter().enumerate() {
            let next = if j + 1 == colors.len() { to } else { self.fresh_vertex() };
            self.specs.push(EdgeSpec::unit(prev, next, *color));
            prev = next;
        }
    }
}

/// A grown subtree: its root, and its leaves in construction order paired
/// with the color whose failure exposes each of them.
struct Grown {
    root: Vertex,
    leaves: Vec<(Vertex, Color)>,
}

/// Recursion for the `q`-way family. Level `delta` hangs `q` copies of
/// level `delta−1` below uncolored runways of sharply decreasing length
/// (copy `i` of `q` gets `2(q−i)·q^(delta−1)` runway edges), then joins the
/// runway tops by connector paths of `q^(delta−1)` edges. The connector
/// after copy `i` carries the leaf colors of copy `i`, one edge each, so a
/// color failure cuts off exactly the copies hanging further out while the
/// owning leaf keeps its original, strictly smallest, depth.
fn grow_nearest(b: &mut TreeBuilder, delta: usize, q: usize) -> Grown {
    if delta == 0 {
        let v = b.fresh_vertex();
        let c = b.fresh_color();
        return Grown { root: v, leaves: vec![(v, c)] };
    }
    let width = q.checked_pow(delta as u32 - 1).expect("tree width overflows usize");
    let copies: Vec<Grown> = (0..q).map(|_| grow_nearest(b, delta - 1, q)).collect();

    // Runway tops: entry[i] is where the path down to copy i begins. The
    // last copy's runway has zero edges, so its top is the copy's own root.
    let mut entry = Vec::with_capacity(q);
    for (i, copy) in copies.iter().enumerate() {
        let len = 2 * (q - 1 - i) * width;
        if len == 0 {
            entry.push(copy.root);
        } else {
            let top = b.fresh_vertex();
            b.connect(top, copy.root, &vec![None; len]);
            entry.push(top);
        }
    }

    for i in 0..q - 1 {
        let colors: Vec<Option<Color>> =
            copies[i].leaves.iter().map(|&(_, c)| Some(c)).collect();
        debug_assert_eq!(colors.len(), width);
        b.connect(entry[i], entry[i + 1], &colors);
    }

    Grown {
        root: entry[0],
        leaves: copies.into_iter().flat_map(|c| c.leaves).collect(),
    }
}

/// Recursion for the binary family. Level `delta` joins a new root to the
/// roots of two palette-disjoint copies of level `delta−1` by paths of
/// `2^(delta−1)` edges each; the path toward either copy carries the leaf
/// colors of the *other* copy, one edge each. A color failure therefore
/// severs the whole sibling subtree and, inductively, every cousin of the
/// owning leaf, leaving that leaf as the sole survivor.
fn grow_sole(b: &mut TreeBuilder, delta: usize) -> Grown {
    if delta == 0 {
        let v = b.fresh_vertex();
        let c = b.fresh_color();
        return Grown { root: v, leaves: vec![(v, c)] };
    }
    let left = grow_sole(b, delta - 1);
    let right = grow_sole(b, delta - 1);
    let root = b.fresh_vertex();
    let toward_left: Vec<Option<Color>> =
        right.leaves.iter().map(|&(_, c)| Some(c)).collect();
    let toward_right: Vec<Option<Color>> =
        left.leaves.iter().map(|&(_, c)| Some(c)).collect();
    debug_assert_eq!(toward_left.len(), 1 << (delta - 1));
    b.connect(root, left.root, &toward_left);
    b.connect(root, right.root, &toward_right);
    Grown {
        root,
        leaves: left.leaves.into_iter().chain(right.leaves).collect(),
    }
}

/// Hop depth of every vertex below `root`, skipping edges of the `avoid`
/// color; unreachable vertices stay `None`.
fn tree_depths(g: &ColoredGraph, root: Vertex, avoid: Option<Color>) -> Vec<Option<usize>> {
    let mut depth = vec![None; g.n()];
    depth[root] = Some(0);
    let mut frontier = vec![root];
    while let Some(v) = frontier.pop() {
        let d = depth[v].unwrap() + 1;
        for &e in g.out_edges(v) {
            if avoid.is_some() && g.edge(e).color == avoid {
                continue;
            }
            let w = g.other_endpoint(e, v);
            if depth[w].is_none() {
                depth[w] = Some(d);
                frontier.push(w);
            }
        }
    }
    depth
}

/// Seals a grown tree into an instance, checking it against the shape's
/// closed forms so nothing that leaves this module violates them.
fn finish_tree(b: TreeBuilder, grown: Grown, shape: TreeShape) -> ColoredTreeInstance {
    let (expected_leaves, expected_edges, class_bound) = match shape {
        TreeShape::NearestSurvivor { delta, q } => {
            let leaves = q.checked_pow(delta as u32).expect("leaf count overflows usize");
            let edges = if delta == 0 {
                0
            } else {
                let grown_pow = q.checked_pow(delta as u32 + 1).expect("edge count overflows");
                delta * (grown_pow - grown_pow / q / q)
            };
            (leaves, edges, delta)
        }
        TreeShape::SoleSurvivor { delta } => {
            let leaves = 1usize
                .checked_shl(delta as u32)
                .filter(|_| delta < usize::BITS as usize)
                .expect("leaf count overflows usize");
            (leaves, delta * leaves, delta)
        }
    };
    // The deepest leaf sits at twice the depth of the shallowest in the
    // q-way family, and all leaves are equally deep in the binary one.
    let depth_bounds = match shape {
        TreeShape::NearestSurvivor { .. } => (expected_leaves - 1, 2 * (expected_leaves - 1)),
        TreeShape::SoleSurvivor { .. } => (expected_leaves - 1, expected_leaves - 1),
    };

    let names = (0..b.next_color).map(|i| format!("c{i}")).collect();
    let graph = ColoredGraph::from_parts(b.next_vertex, false, false, b.specs, Some(names))
        .expect("survivor tree construction yields a valid graph");

    let leaves: Vec<Vertex> = grown.leaves.iter().map(|&(v, _)| v).collect();
    let leaf_color: BTreeMap<Vertex, Color> = grown.leaves.into_iter().collect();

    assert_eq!(leaves.len(), expected_leaves, "leaf count drifted from the closed form");
    assert_eq!(graph.m(), expected_edges, "edge count drifted from the closed form");
    assert_eq!(graph.n(), graph.m() + 1, "the construction must stay a tree");
    assert!(graph.delta() <= class_bound, "a color class outgrew its bound");

    let depth = tree_depths(&graph, grown.root, None);
    assert!(depth.iter().all(Option::is_some), "the tree must be connected");
    for &v in &leaves {
        let d = depth[v].unwrap();
        assert!(
            depth_bounds.0 <= d && d <= depth_bounds.1,
            "leaf depth {d} outside the closed-form bounds {depth_bounds:?}"
        );
    }

    ColoredTreeInstance {
        graph,
        root: grown.root,
        leaves,
        leaf_color,
        shape,
        expected_leaves,
        expected_edges,
        depth_bounds,
    }
}

/// Builds the `q`-way survivor tree: failing any leaf's color leaves that
/// leaf as the unique surviving leaf of minimal depth. The tree has `q^δ`
/// leaves, `δ(q^(δ+1) − q^(δ−1))` edges, leaf depths between `q^δ − 1` and
/// `2(q^δ − 1)`, and color classes of size at most `δ`.
pub fn build_nearest_survivor_tree(
    delta: usize,
    q: usize,
) -> Result<ColoredTreeInstance, LowerBoundError> {
    if q < 2 {
        return Err(LowerBoundError::BranchingTooSmall { q });
    }
    let mut b = TreeBuilder::new();
    let grown = grow_nearest(&mut b, delta, q);
    Ok(finish_tree(b, grown, TreeShape::NearestSurvivor { delta, q }))
}

/// Builds the binary survivor tree: failing any leaf's color disconnects
/// every other leaf from the root. The tree has `2^δ` leaves, `δ·2^δ`
/// edges, every leaf at depth `2^δ − 1`, and color classes of size at most
/// (in fact exactly, for `δ ≥ 1`) `δ`.
pub fn build_sole_survivor_tree(delta: usize) -> ColoredTreeInstance {
    let mut b = TreeBuilder::new();
    let grown = grow_sole(&mut b, delta);
    finish_tree(b, grown, TreeShape::SoleSurvivor { delta })
}

/// Largest branching factor whose trees still fit the vertex budget:
/// the biggest `q` with `q^(δ+1)·σ·δ ≤ n`.
fn largest_branching(sigma: usize, delta: usize, n: usize) -> Result<usize, LowerBoundError> {
    let fits = |q: usize| {
        q.checked_pow(delta as u32 + 1)
            .and_then(|p| p.checked_mul(sigma))
            .and_then(|p| p.checked_mul(delta))
            .is_some_and(|p| p <= n)
    };
    let mut q = 0;
    while fits(q + 1) {
        q += 1;
    }
    if q < 2 {
        return Err(LowerBoundError::BranchingTooSmall { q });
    }
    Ok(q)
}

/// Builds the sourcewise hard instance: `sigma` palette-disjoint q-way
/// survivor trees whose roots are the sources, with every leaf joined to
/// `n` fresh target vertices by uncolored edges. Each of those
/// `n·sigma·q^delta` bipartite edges is mandatory for any preserver that
/// tolerates one color failure: failing the leaf's color makes the route
/// through that leaf the unique shortest path from its root to the target.
pub fn build_sourcewise_lb(
    sigma: usize,
    delta: usize,
    n: usize,
) -> Result<LowerBoundInstance, LowerBoundError> {
    for (name, min, got) in [("sigma", 1, sigma), ("delta", 1, delta), ("n", 1, n)] {
        if got < min {
            return Err(LowerBoundError::ParamTooSmall { name, min, got });
        }
    }
    let q = largest_branching(sigma, delta, n)?;

    let mut b = TreeBuilder::new();
    let mut roots = Vec::with_capacity(sigma);
    let mut leaves = Vec::new();
    for _ in 0..sigma {
        // Sharing one builder keeps vertex ids unique and palettes disjoint.
        let grown = grow_nearest(&mut b, delta, q);
        roots.push(grown.root);
        leaves.extend(grown.leaves);
    }
    let tree_vertices = b.next_vertex;
    let num_colors = b.next_color;

    let mut specs = b.specs;
    let y0 = tree_vertices;
    let mut mandatory = Vec::with_capacity(leaves.len() * n);
    for &(x, c) in &leaves {
        for j in 0..n {
            mandatory.push(MandatoryEdge {
                edge: specs.len(),
                witness: FaultSet::single_color(c),
            });
            specs.push(EdgeSpec::unit(x, y0 + j, None));
        }
    }

    let total = tree_vertices + n;
    assert!(total <= 4 * n, "instance outgrew its vertex budget");
    let names = (0..num_colors).map(|i| format!("c{i}")).collect();
    let graph = ColoredGraph::from_parts(total, false, false, specs, Some(names))?;

    let expected = n * sigma * q.pow(delta as u32);
    assert_eq!(mandatory.len(), expected, "mandatory count drifted from the closed form");

    Ok(LowerBoundInstance {
        graph,
        demand: Demand::Sources(roots),
        mode: PreserveMode::Distance,
        mandatory,
        expected_mandatory: expected,
    })
}

/// Splits every color class among `specs` into at most `f` new classes,
/// round-robin by edge order within the class, renumbering colors from 0.
/// Returns the number of split colors and, per original color, the list of
/// classes it became.
fn split_classes(specs: &mut [EdgeSpec], f: usize) -> (u32, BTreeMap<Color, Vec<Color>>) {
    let mut by_color: BTreeMap<Color, Vec<usize>> = BTreeMap::new();
    for (idx, spec) in specs.iter().enumerate() {
        if let Some(c) = spec.color {
            by_color.entry(c).or_default().push(idx);
        }
    }
    let mut next: u32 = 0;
    let mut parts = BTreeMap::new();
    for (orig, members) in by_color {
        let count = members.len().min(f);
        let base = next;
        next += count as u32;
        for (rank, idx) in members.into_iter().enumerate() {
            specs[idx].color = Some(Color(base + (rank % f) as u32));
        }
        parts.insert(orig, (base..next).map(Color).collect());
    }
    (next, parts)
}

/// Shared scaffolding for the reachability and flow instances: `copies`
/// palette-disjoint binary survivor trees of parameter `f·delta`, classes
/// split into `f` parts of size ≤ `delta`, all edges oriented away from the
/// roots. Returns the specs, the roots, the split witness per leaf, and the
/// vertex count.
struct DirectedForest {
    specs: Vec<EdgeSpec>,
    roots: Vec<Vertex>,
    leaves: Vec<(Vertex, Vec<Color>)>,
    vertices: usize,
}

fn grow_directed_forest(copies: usize, delta: usize, f: usize) -> DirectedForest {
    let fd = f * delta;
    let mut b = TreeBuilder::new();
    let mut grown_copies = Vec::with_capacity(copies);
    for _ in 0..copies {
        grown_copies.push(grow_sole(&mut b, fd));
    }
    let vertices = b.next_vertex;
    let mut specs = b.specs;
    let (_, parts) = split_classes(&mut specs, f);

    let mut roots = Vec::with_capacity(copies);
    let mut leaves = Vec::new();
    for grown in grown_copies {
        roots.push(grown.root);
        for (v, c) in grown.leaves {
            leaves.push((v, parts.get(&c).cloned().unwrap_or_default()));
        }
    }
    DirectedForest { specs, roots, leaves, vertices }
}

/// Builds the single-source reachability hard instance: a binary survivor
/// tree of parameter `f·delta` with classes split into `f` parts of size
/// ≤ `delta`, directed away from the root, with every leaf joined to `n`
/// fresh targets. Each of the `2^(f·delta)·n` bipartite edges is mandatory
/// for any preserver tolerating `f` color failures: failing the leaf's
/// split classes leaves that leaf as the only one reachable from the root.
pub fn build_reachability_lb(
    n: usize,
    delta: usize,
    f: usize,
) -> Result<LowerBoundInstance, LowerBoundError> {
    if n < 1 {
        return Err(LowerBoundError::ParamTooSmall { name: "n", min: 1, got: n });
    }
    let needed = f
        .checked_mul(delta)
        .and_then(|fd| {
            if fd >= usize::BITS as usize { None } else { fd.checked_mul(1usize << fd) }
        })
        .unwrap_or(usize::MAX);
    if needed > n {
        return Err(LowerBoundError::TreesTooLarge { needed, budget: n });
    }
    let fd = f * delta;

    let forest = grow_directed_forest(1, delta, f);
    let mut specs = forest.specs;
    let s = forest.roots[0];
    let y0 = forest.vertices;

    let mut mandatory = Vec::new();
    for (x, witness_colors) in &forest.leaves {
        let witness = FaultSet::colors(witness_colors.iter().copied(), f.max(1))
            .expect("split parts fit the fault budget");
        for j in 0..n {
            mandatory.push(MandatoryEdge { edge: specs.len(), witness: witness.clone() });
            specs.push(EdgeSpec::unit(*x, y0 + j, None));
        }
    }

    let total = forest.vertices + n;
    assert!(total <= 4 * n, "instance outgrew its vertex budget");
    let graph = ColoredGraph::from_parts(total, true, false, specs, None)?;

    let expected = (1usize << fd).checked_mul(n).expect("mandatory count overflows");
    assert_eq!(mandatory.len(), expected, "mandatory count drifted from the closed form");

    Ok(LowerBoundInstance {
        graph,
        demand: Demand::Sources(vec![s]),
        mode: PreserveMode::Reachability,
        mandatory,
        expected_mandatory: expected,
    })
}

/// Builds the single-source bounded-flow hard instance: `lambda`
/// palette-disjoint split survivor trees, a source with exactly one edge
/// into each root, and every leaf joined to `n` fresh targets. Each of the
/// `lambda·2^(f·delta)·n` bipartite edges is mandatory: with its leaf's
/// classes failed, sustaining `lambda` edge-disjoint paths to the target
/// forces one path through that tree's sole surviving leaf.
pub fn build_flow_lb(
    n: usize,
    delta: usize,
    f: usize,
    lambda: usize,
) -> Result<LowerBoundInstance, LowerBoundError> {
    if lambda < 1 {
        return Err(LowerBoundError::ParamTooSmall { name: "lambda", min: 1, got: lambda });
    }
    if n < 1 {
        return Err(LowerBoundError::ParamTooSmall { name: "n", min: 1, got: n });
    }
    // max(f·delta, 1) keeps degenerate single-vertex trees from letting the
    // copy count outgrow the vertex budget.
    let needed = f
        .checked_mul(delta)
        .and_then(|fd| {
            if fd >= usize::BITS as usize {
                None
            } else {
                fd.max(1).checked_mul(1usize << fd)
            }
        })
        .and_then(|per_copy| per_copy.checked_mul(lambda))
        .unwrap_or(usize::MAX);
    if needed > n {
        return Err(LowerBoundError::TreesTooLarge { needed, budget: n });
    }
    let fd = f * delta;

    let forest = grow_directed_forest(lambda, delta, f);
    let mut specs = forest.specs;
    let s = forest.vertices;
    for &root in &forest.roots {
        specs.push(EdgeSpec::unit(s, root, None));
    }
    let y0 = forest.vertices + 1;

    let mut mandatory = Vec::new();
    for (x, witness_colors) in &forest.leaves {
        let witness = FaultSet::colors(witness_colors.iter().copied(), f.max(1))
            .expect("split parts fit the fault budget");
        for j in 0..n {
            mandatory.push(MandatoryEdge { edge: specs.len(), witness: witness.clone() });
            specs.push(EdgeSpec::unit(*x, y0 + j, None));
        }
    }

    let total = forest.vertices + 1 + n;
    assert!(total <= 4 * n, "instance outgrew its vertex budget");
    let graph = ColoredGraph::from_parts(total, true, false, specs, None)?;
    assert_eq!(graph.out_edges(s).len(), lambda, "the source must have exactly one edge per tree");

    let expected = lambda
        .checked_mul(1usize << fd)
        .and_then(|p| p.checked_mul(n))
        .expect("mandatory count overflows");
    assert_eq!(mandatory.len(), expected, "mandatory count drifted from the closed form");

    Ok(LowerBoundInstance {
        graph,
        demand: Demand::Sources(vec![s]),
        mode: PreserveMode::Flow(lambda),
        mandatory,
        expected_mandatory: expected,
    })
}

/// Exact shortest-path distances from `src` in units of the weight scale,
/// optionally with masked-out edges. The tie-breaking salt is redrawn until
/// the canonical order is collision-free; the distances themselves are
/// salt-independent.
fn exact_dists(
    g: &ColoredGraph,
    mask: Option<&[bool]>,
    src: Vertex,
) -> Result<Vec<Option<u128>>, LowerBoundError> {
    for attempt in 0..=DIST_RETRY_CAP {
        let metric = TieBrokenMetric::new(g, DIST_SEED ^ (attempt as u64).wrapping_mul(DIST_SALT));
        let view = match mask {
            Some(m) => LiveView::masked(g, m, None),
            None => g.view(),
        };
        match sp_tree(&view, &metric, src, Dir::Out) {
            Ok(tree) => return Ok((0..g.n()).map(|v| tree.scaled_dist(v)).collect()),
            Err(MetricError::UniquenessViolation { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(LowerBoundError::RetryCapExceeded { retries: DIST_RETRY_CAP })
}

/// Builds the single-pair hard instance from an uncolored, undirected,
/// weighted pair graph and its demand pairs. The pair graph is rescaled so
/// all its distances sit below one, then framed by two colored chains:
/// index `i` of either chain reaches the i-th pair's endpoint through an
/// uncolored connector of weight `n+1−i`, and consecutive chain vertices
/// share a tiny-weight edge pair forming color class `c_i` of size exactly
/// two. Failing `c_i` truncates both chains at index `i`, which makes every
/// shortest route between the chain heads cross the i-th pair; any pair-
/// graph edge lying on all shortest paths of some pair is therefore
/// mandatory, witnessed by that pair's chain color.
///
/// The connector weights decrease by exactly one per index, which keeps
/// every weight positive while preserving the separation argument: a route
/// through chain index `j < i` pays at least one full unit more than the
/// route through index `i`, and the rescaled pair-graph distances plus all
/// chain edges together stay below that unit.
pub fn build_singlepair_lb(
    gstar: &ColoredGraph,
    pstar: &PairSet,
) -> Result<LowerBoundInstance, LowerBoundError> {
    if gstar.directed() {
        return Err(LowerBoundError::RequiresUndirected);
    }
    if gstar.edges().iter().any(|e| e.color.is_some()) {
        return Err(LowerBoundError::RequiresUncolored);
    }
    let pairs = pstar.pairs();
    if pairs.is_empty() {
        return Err(LowerBoundError::ParamTooSmall { name: "pairs", min: 1, got: 0 });
    }
    let ns = gstar.n();
    for &(x, y) in pairs {
        for v in [x, y] {
            if v >= ns {
                return Err(LowerBoundError::PairOutOfRange { v, n: ns });
            }
        }
    }

    // Longest shortest-path distance anywhere in the pair graph; every
    // vertex pair must be connected for the rescale below one to exist.
    let mut maxd: u128 = 0;
    let mut full_dists: BTreeMap<Vertex, Vec<Option<u128>>> = BTreeMap::new();
    for src in 0..ns {
        let d = exact_dists(gstar, None, src)?;
        for (v, dv) in d.iter().enumerate() {
            match dv {
                Some(dv) => maxd = maxd.max(*dv),
                None => return Err(LowerBoundError::DisconnectedPair { u: src, v }),
            }
        }
        full_dists.insert(src, d);
    }

    // An edge is mandatory when removing it strictly lengthens some pair's
    // distance, i.e. it lies on every shortest path of that pair. Record
    // the first certifying pair; rescaling cannot change any of this.
    let ms = gstar.m();
    let mut witness_pair: Vec<Option<usize>> = vec![None; ms];
    let mut mask = vec![true; ms];
    for e in 0..ms {
        mask[e] = false;
        let mut masked_dists: BTreeMap<Vertex, Vec<Option<u128>>> = BTreeMap::new();
        for (i, &(x, y)) in pairs.iter().enumerate() {
            if !masked_dists.contains_key(&x) {
                masked_dists.insert(x, exact_dists(gstar, Some(&mask), x)?);
            }
            let base = full_dists[&x][y].expect("connectivity was verified above");
            let lengthened = match masked_dists[&x][y] {
                None => true,
                Some(dy) => dy > base,
            };
            if lengthened {
                witness_pair[e] = Some(i);
                break;
            }
        }
        mask[e] = true;
    }

    // Rescale so the largest pair-graph distance is exactly one half. A
    // zero maximum means no edge can lie on any shortest path, and the
    // weights can stay as they are.
    let denom = u64::try_from(2u128 * maxd).map_err(|_| LowerBoundError::WeightOverflow)?;
    let rescaled = |e: EdgeId| -> Ratio<u64> {
        if maxd == 0 {
            gstar.edge(e).weight
        } else {
            Ratio::new(gstar.scaled_weight(e), denom)
        }
    };

    let np = pairs.len();
    let u0 = ns; // chain u: ids u0 ..= u0+np
    let v0 = ns + np + 1; // chain v: ids v0 ..= v0+np
    let total = ns + 2 * (np + 1);
    let m_total = ms + 4 * np;
    let eps_denom = 4usize
        .checked_mul(np)
        .and_then(|p| p.checked_mul(m_total + 1))
        .and_then(|p| u64::try_from(p).ok())
        .ok_or(LowerBoundError::WeightOverflow)?;
    let eps = Ratio::new(1u64, eps_denom);

    let mut specs: Vec<EdgeSpec> = (0..ms)
        .map(|e| {
            let edge = gstar.edge(e);
            EdgeSpec::weighted(edge.tail, edge.head, rescaled(e), None)
        })
        .collect();
    for (i, &(x, y)) in pairs.iter().enumerate() {
        let w = Ratio::from_integer((np - i) as u64);
        let c = Color(i as u32);
        specs.push(EdgeSpec::weighted(u0 + i, x, w, None));
        specs.push(EdgeSpec::weighted(y, v0 + i, w, None));
        specs.push(EdgeSpec::weighted(u0 + i, u0 + i + 1, eps, Some(c)));
        specs.push(EdgeSpec::weighted(v0 + i, v0 + i + 1, eps, Some(c)));
    }

    let mandatory: Vec<MandatoryEdge> = witness_pair
        .iter()
        .enumerate()
        .filter_map(|(e, w)| {
            w.map(|i| MandatoryEdge {
                edge: e,
                witness: FaultSet::single_color(Color(i as u32)),
            })
        })
        .collect();

    let graph = ColoredGraph::from_parts(total, false, true, specs, None)?;
    assert_eq!(graph.delta(), 2, "every chain class must have exactly two edges");

    let expected = mandatory.len();
    Ok(LowerBoundInstance {
        graph,
        demand: Demand::Pair(u0, v0),
        mode: PreserveMode::Distance,
        mandatory,
        expected_mandatory: expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::FaultMode;

    /// Vertices reachable from `src` along live edges, honoring direction.
    fn reachable(g: &ColoredGraph, src: Vertex, fault: &FaultSet, skip: Option<EdgeId>) -> Vec<bool> {
        let mut seen = vec![false; g.n()];
        seen[src] = true;
        let mut frontier = vec![src];
        while let Some(v) = frontier.pop() {
            for &e in g.out_edges(v) {
                if Some(e) == skip || fault.kills(g, e) {
                    continue;
                }
                let w = g.other_endpoint(e, v);
                if !seen[w] {
                    seen[w] = true;
                    frontier.push(w);
                }
            }
        }
        seen
    }

    #[test]
    fn nearest_survivor_trees_match_the_closed_forms() {
        let base = build_nearest_survivor_tree(0, 5).unwrap();
        assert_eq!(base.graph.n(), 1);
        assert_eq!(base.graph.m(), 0);
        assert_eq!(base.leaves, vec![base.root]);

        let small = build_nearest_survivor_tree(1, 2).unwrap();
        assert_eq!(small.leaves.len(), 2);
        assert_eq!(small.graph.m(), 3);
        let depth = tree_depths(&small.graph, small.root, None);
        let mut leaf_depths: Vec<usize> =
            small.leaves.iter().map(|&v| depth[v].unwrap()).collect();
        leaf_depths.sort_unstable();
        assert_eq!(leaf_depths, vec![1, 2]);

        let big = build_nearest_survivor_tree(2, 3).unwrap();
        assert_eq!(big.leaves.len(), 9);
        assert_eq!(big.graph.m(), 48);
        assert_eq!(big.depth_bounds, (8, 16));
        assert!(big.graph.delta() <= 2);

        assert!(matches!(
            build_nearest_survivor_tree(1, 1),
            Err(LowerBoundError::BranchingTooSmall { q: 1 })
        ));
    }

    #[test]
    fn nearest_survivor_fault_exposes_unique_nearest_leaf() {
        for tree in [
            build_nearest_survivor_tree(2, 3).unwrap(),
            build_nearest_survivor_tree(1, 4).unwrap(),
        ] {
            let full = tree_depths(&tree.graph, tree.root, None);
            for &v in &tree.leaves {
                let c = tree.leaf_color[&v];
                let depth = tree_depths(&tree.graph, tree.root, Some(c));
                // The owning leaf survives at its original depth.
                assert_eq!(depth[v], full[v]);
                // Every other surviving leaf sits strictly deeper.
                for &w in &tree.leaves {
                    if w != v {
                        if let Some(dw) = depth[w] {
                            assert!(dw > depth[v].unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn sole_survivor_trees_match_the_closed_forms() {
        let base = build_sole_survivor_tree(0);
        assert_eq!((base.graph.n(), base.graph.m()), (1, 0));

        let one = build_sole_survivor_tree(1);
        assert_eq!((one.leaves.len(), one.graph.m()), (2, 2));

        let three = build_sole_survivor_tree(3);
        assert_eq!(three.leaves.len(), 8);
        assert_eq!(three.graph.m(), 24);
        assert_eq!(three.graph.delta(), 3);
        let depth = tree_depths(&three.graph, three.root, None);
        for &v in &three.leaves {
            assert_eq!(depth[v], Some(7));
        }
    }

    #[test]
    fn sole_survivor_fault_disconnects_every_other_leaf() {
        let tree = build_sole_survivor_tree(2);
        for &v in &tree.leaves {
            let depth = tree_depths(&tree.graph, tree.root, Some(tree.leaf_color[&v]));
            let survivors: Vec<Vertex> = tree
                .leaves
                .iter()
                .copied()
                .filter(|&w| depth[w].is_some())
                .collect();
            assert_eq!(survivors, vec![v]);
        }
    }

    #[test]
    fn sourcewise_instance_hits_the_expected_count() {
        let inst = build_sourcewise_lb(1, 1, 16).unwrap();
        assert_eq!(inst.expected_mandatory, 64);
        assert_eq!(inst.mandatory.len(), 64);
        assert_eq!(inst.mode, PreserveMode::Distance);
        assert!(matches!(&inst.demand, Demand::Sources(roots) if roots.len() == 1));
        assert!(!inst.graph.directed());
        assert!(inst.graph.is_unit());

        // A budget too small for branching factor 2 is rejected.
        assert!(matches!(
            build_sourcewise_lb(1, 1, 3),
            Err(LowerBoundError::BranchingTooSmall { .. })
        ));
    }

    #[test]
    fn sourcewise_mandatory_edges_probe_as_forced() {
        let inst = build_sourcewise_lb(1, 1, 4).unwrap();
        assert_eq!(inst.mandatory.len(), 8);
        let g = &inst.graph;
        let roots = match &inst.demand {
            Demand::Sources(r) => r.clone(),
            Demand::Pair(..) => unreachable!(),
        };
        for m in &inst.mandatory {
            let target = g.edge(m.edge).head;
            // Unit graph: hop counts are distances. With the witness color
            // failed, dropping the edge must lengthen (or sever) the route
            // from some source to the target.
            let with_edge = reachable(g, roots[0], &m.witness, None);
            assert!(with_edge[target]);
            let dist = |skip: Option<EdgeId>| -> Option<usize> {
                let mut depth = vec![None; g.n()];
                depth[roots[0]] = Some(0usize);
                let mut queue = std::collections::VecDeque::from([roots[0]]);
                while let Some(v) = queue.pop_front() {
                    for &e in g.out_edges(v) {
                        if Some(e) == skip || m.witness.kills(g, e) {
                            continue;
                        }
                        let w = g.other_endpoint(e, v);
                        if depth[w].is_none() {
                            depth[w] = Some(depth[v].unwrap() + 1);
                            queue.push_back(w);
                        }
                    }
                }
                depth[target]
            };
            let base = dist(None).unwrap();
            match dist(Some(m.edge)) {
                None => {}
                Some(longer) => assert!(longer > base),
            }
        }
    }

    #[test]
    fn sourcewise_copies_use_disjoint_palettes() {
        let inst = build_sourcewise_lb(2, 1, 8).unwrap();
        let g = &inst.graph;
        let roots = match &inst.demand {
            Demand::Sources(r) => r.clone(),
            Demand::Pair(..) => unreachable!(),
        };
        assert_eq!(roots.len(), 2);

        // Mask out the bipartite edges; the trees then split into one
        // component per source, and no color class may span two of them.
        let bipartite_start = g.m() - inst.mandatory.len();
        let tree_only: Vec<bool> = (0..g.m()).map(|e| e < bipartite_start).collect();
        let mut component = vec![usize::MAX; g.n()];
        for (idx, &root) in roots.iter().enumerate() {
            let mut frontier = vec![root];
            component[root] = idx;
            while let Some(v) = frontier.pop() {
                for &e in g.out_edges(v) {
                    if !tree_only[e] {
                        continue;
                    }
                    let w = g.other_endpoint(e, v);
                    if component[w] == usize::MAX {
                        component[w] = idx;
                        frontier.push(w);
                    }
                }
            }
        }
        for c in g.all_colors() {
            let owners: std::collections::BTreeSet<usize> =
                g.class(c).iter().map(|&e| component[g.edge(e).tail]).collect();
            assert!(owners.len() <= 1, "color {c:?} spans two trees");
        }
    }

    #[test]
    fn reachability_instance_hits_the_expected_count() {
        let inst = build_reachability_lb(8, 2, 1).unwrap();
        assert_eq!(inst.expected_mandatory, 32);
        assert_eq!(inst.mandatory.len(), 32);
        assert!(inst.graph.directed());
        assert_eq!(inst.mode, PreserveMode::Reachability);
        assert!(inst.graph.delta() <= 2);
        assert!(inst.mandatory.iter().all(|m| m.witness.len() == 1));

        // Splitting in two halves the class sizes and doubles the witness.
        let split = build_reachability_lb(8, 1, 2).unwrap();
        assert_eq!(split.expected_mandatory, 32);
        assert_eq!(split.graph.delta(), 1);
        assert!(split.mandatory.iter().all(|m| m.witness.len() == 2));

        assert!(matches!(
            build_reachability_lb(10, 2, 2),
            Err(LowerBoundError::TreesTooLarge { needed: 64, budget: 10 })
        ));
    }

    #[test]
    fn reachability_fault_leaves_one_live_leaf() {
        let inst = build_reachability_lb(8, 1, 2).unwrap();
        let g = &inst.graph;
        let s = match &inst.demand {
            Demand::Sources(r) => r[0],
            Demand::Pair(..) => unreachable!(),
        };
        let leaves: std::collections::BTreeSet<Vertex> =
            inst.mandatory.iter().map(|m| g.edge(m.edge).tail).collect();
        for m in &inst.mandatory {
            let x = g.edge(m.edge).tail;
            let y = g.edge(m.edge).head;
            let seen = reachable(g, s, &m.witness, None);
            let live: Vec<Vertex> =
                leaves.iter().copied().filter(|&w| seen[w]).collect();
            assert_eq!(live, vec![x], "exactly one leaf may survive its own fault");
            // Dropping the bipartite edge then severs the target.
            let without = reachable(g, s, &m.witness, Some(m.edge));
            assert!(!without[y]);
        }
    }

    #[test]
    fn flow_instance_hits_the_expected_count() {
        let inst = build_flow_lb(4, 1, 1, 2).unwrap();
        assert_eq!(inst.expected_mandatory, 16);
        assert_eq!(inst.mandatory.len(), 16);
        assert_eq!(inst.mode, PreserveMode::Flow(2));
        let s = match &inst.demand {
            Demand::Sources(r) => r[0],
            Demand::Pair(..) => unreachable!(),
        };
        assert_eq!(inst.graph.out_edges(s).len(), 2);

        assert!(build_flow_lb(3, 1, 1, 2).is_err());
        assert!(matches!(
            build_flow_lb(4, 1, 1, 0),
            Err(LowerBoundError::ParamTooSmall { name: "lambda", .. })
        ));
    }

    #[test]
    fn flow_fault_forces_the_route_through_its_tree() {
        let inst = build_flow_lb(4, 1, 1, 2).unwrap();
        let g = &inst.graph;
        let s = match &inst.demand {
            Demand::Sources(r) => r[0],
            Demand::Pair(..) => unreachable!(),
        };
        let roots: Vec<Vertex> = g.out_edges(s).iter().map(|&e| g.edge(e).head).collect();
        for m in &inst.mandatory {
            let x = g.edge(m.edge).tail;
            let y = g.edge(m.edge).head;
            // The target must stay reachable overall (the sibling tree is
            // untouched by the fault) ...
            let seen = reachable(g, s, &m.witness, None);
            assert!(seen[y]);
            // ... but the copy that owns `x` can only reach it through the
            // mandatory edge.
            let own_root = roots
                .iter()
                .copied()
                .find(|&r| reachable(g, r, &FaultSet::empty(FaultMode::Color), None)[x])
                .unwrap();
            let from_root = reachable(g, own_root, &m.witness, Some(m.edge));
            assert!(!from_root[y]);
        }
    }

    #[test]
    fn single_pair_instance_forces_every_critical_edge() {
        // A path graph: both edges lie on every shortest route of the pair.
        let gstar = ColoredGraph::from_parts(
            3,
            false,
            true,
            vec![
                EdgeSpec::weighted(0, 1, Ratio::from_integer(2), None),
                EdgeSpec::weighted(1, 2, Ratio::from_integer(3), None),
            ],
            None,
        )
        .unwrap();
        let pstar = PairSet::new(3, [(0, 2)]).unwrap();
        let inst = build_singlepair_lb(&gstar, &pstar).unwrap();

        assert_eq!(inst.mandatory.len(), 2);
        assert_eq!(inst.graph.delta(), 2);
        let (s, t) = match inst.demand {
            Demand::Pair(s, t) => (s, t),
            Demand::Sources(_) => unreachable!(),
        };

        for m in &inst.mandatory {
            let g = &inst.graph;
            let fault_mask: Vec<bool> = (0..g.m()).map(|e| !m.witness.kills(g, e)).collect();
            let base = exact_dists(g, Some(&fault_mask), s).unwrap()[t].unwrap();
            let mut probe_mask = fault_mask.clone();
            probe_mask[m.edge] = false;
            match exact_dists(g, Some(&probe_mask), s).unwrap()[t] {
                None => {}
                Some(longer) => assert!(longer > base),
            }
        }
    }

    #[test]
    fn single_pair_routes_respect_the_index_inequalities() {
        // Two nested pairs over a 4-path; every edge is critical for the
        // outer pair, the middle edge for both.
        let unit = Ratio::from_integer(1);
        let gstar = ColoredGraph::from_parts(
            4,
            false,
            true,
            vec![
                EdgeSpec::weighted(0, 1, unit, None),
                EdgeSpec::weighted(1, 2, unit, None),
                EdgeSpec::weighted(2, 3, unit, None),
            ],
            None,
        )
        .unwrap();
        let pstar = PairSet::new(4, [(0, 3), (1, 2)]).unwrap();
        let inst = build_singlepair_lb(&gstar, &pstar).unwrap();
        let g = &inst.graph;
        let np = 2;
        let (s, t) = match inst.demand {
            Demand::Pair(s, t) => (s, t),
            Demand::Sources(_) => unreachable!(),
        };

        for i in 1..=np {
            let fault = FaultSet::single_color(Color((i - 1) as u32));
            let fault_mask: Vec<bool> = (0..g.m()).map(|e| !fault.kills(g, e)).collect();
            let d = exact_dists(g, Some(&fault_mask), s).unwrap()[t].unwrap();
            let unit_bound = (2 * (np + 1 - i) + 1) as u128 * g.weight_scale() as u128;
            assert!(d < unit_bound, "the forced route must undercut the next index");

            // Forbidding index i's connectors forces a strictly costlier
            // route through an earlier index.
            let connectors = [gstar.m() + 4 * (i - 1), gstar.m() + 4 * (i - 1) + 1];
            let mut blocked = fault_mask.clone();
            for e in connectors {
                blocked[e] = false;
            }
            match exact_dists(g, Some(&blocked), s).unwrap()[t] {
                None => {}
                Some(detour) => assert!(detour >= unit_bound),
            }
        }
    }

    #[test]
    fn single_pair_rejects_bad_pair_graphs() {
        let directed = ColoredGraph::from_parts(
            2,
            true,
            true,
            vec![EdgeSpec::weighted(0, 1, Ratio::from_integer(1), None)],
            None,
        )
        .unwrap();
        let pairs = PairSet::new(2, [(0, 1)]).unwrap();
        assert!(matches!(
            build_singlepair_lb(&directed, &pairs),
            Err(LowerBoundError::RequiresUndirected)
        ));

        let colored = ColoredGraph::from_parts(
            2,
            false,
            true,
            vec![EdgeSpec::weighted(0, 1, Ratio::from_integer(1), Some(Color(0)))],
            None,
        )
        .unwrap();
        assert!(matches!(
            build_singlepair_lb(&colored, &pairs),
            Err(LowerBoundError::RequiresUncolored)
        ));

        let split = ColoredGraph::from_parts(2, false, true, vec![], None).unwrap();
        assert!(matches!(
            build_singlepair_lb(&split, &pairs),
            Err(LowerBoundError::DisconnectedPair { .. })
        ));
    }
}
