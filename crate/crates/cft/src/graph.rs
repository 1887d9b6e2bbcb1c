//! Edge-colored graphs, fault sets, and live (post-fault) views.
//!
//! A color groups edges that fail together (a shared-risk group); uncolored
//! edges fail only individually. All weights are strictly positive rationals,
//! kept exact: internally every weight is an integer numerator over one common
//! scale so that path weights compare without rounding.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use thiserror::Error;

pub type Vertex = usize;
pub type EdgeId = usize;

/// Dense color id. The graph keeps a printable name per color for I/O.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Color(pub u32);

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub id: EdgeId,
    pub tail: Vertex,
    pub head: Vertex,
    pub weight: Ratio<u64>,
    pub color: Option<Color>,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge {edge} endpoint {vertex} out of range (n = {n})")]
    EndpointOutOfRange { edge: usize, vertex: Vertex, n: usize },
    #[error("edge {edge} has non-positive weight")]
    NonPositiveWeight { edge: usize },
    #[error("edge {edge} weight overflows the common scale")]
    WeightScaleOverflow { edge: usize },
    #[error("unweighted graph has edge {edge} with weight != 1")]
    UnitWeightViolation { edge: usize },
    #[error("color id {color} has no name entry")]
    UnknownColor { color: u32 },
    #[error("fault set has {got} members, budget is {budget}")]
    FaultBudgetExceeded { got: usize, budget: usize },
    #[error("fault members are {members:?} faults but the query uses {query:?} mode")]
    FaultModeMismatch { members: FaultMode, query: FaultMode },
    #[error("subgraph references edge {edge} outside the parent graph (m = {m})")]
    ForeignEdge { edge: EdgeId, m: usize },
}

/// Edge description used when building a graph programmatically.
#[derive(Clone, Debug)]
pub struct EdgeSpec {
    pub tail: Vertex,
    pub head: Vertex,
    pub weight: Ratio<u64>,
    pub color: Option<Color>,
}

impl EdgeSpec {
    pub fn unit(tail: Vertex, head: Vertex, color: Option<Color>) -> Self {
        EdgeSpec { tail, head, weight: Ratio::from_integer(1), color }
    }

    pub fn weighted(tail: Vertex, head: Vertex, weight: Ratio<u64>, color: Option<Color>) -> Self {
        EdgeSpec { tail, head, weight, color }
    }
}

#[derive(Clone, Debug)]
pub struct ColoredGraph {
    n: usize,
    directed: bool,
    weighted: bool,
    edges: Vec<Edge>,
    /// weight[e] == scaled[e] / scale, exactly.
    scaled: Vec<u64>,
    scale: u64,
    unit: bool,
    out_adj: Vec<Vec<EdgeId>>,
    in_adj: Vec<Vec<EdgeId>>,
    classes: BTreeMap<Color, Vec<EdgeId>>,
    color_names: Vec<String>,
    delta: usize,
}

impl ColoredGraph {
    /// Builds a graph, validating endpoints and weights and computing the
    /// common weight scale, adjacency, color classes and Δ (max class size).
    ///
    /// `color_names`, when given, must cover every color id used; otherwise
    /// names are generated as `c<id>`.
    pub fn from_parts(
        n: usize,
        directed: bool,
        weighted: bool,
        specs: Vec<EdgeSpec>,
        color_names: Option<Vec<String>>,
    ) -> Result<Self, GraphError> {
        let mut edges = Vec::with_capacity(specs.len());
        let mut max_color: Option<u32> = None;
        for (id, s) in specs.into_iter().enumerate() {
            for v in [s.tail, s.head] {
                if v >= n {
                    return Err(GraphError::EndpointOutOfRange { edge: id, vertex: v, n });
                }
            }
            if s.weight.numer() == &0 {
                return Err(GraphError::NonPositiveWeight { edge: id });
            }
            if !weighted && s.weight != Ratio::from_integer(1) {
                return Err(GraphError::UnitWeightViolation { edge: id });
            }
            if let Some(c) = s.color {
                max_color = Some(max_color.map_or(c.0, |m| m.max(c.0)));
            }
            edges.push(Edge { id, tail: s.tail, head: s.head, weight: s.weight, color: s.color });
        }

        let color_names = match color_names {
            Some(names) => {
                if let Some(m) = max_color {
                    if (m as usize) >= names.len() {
                        return Err(GraphError::UnknownColor { color: m });
                    }
                }
                names
            }
            None => (0..max_color.map_or(0, |m| m as usize + 1)).map(|i| format!("c{i}")).collect(),
        };

        // Common denominator for exact comparisons of path weights.
        let mut scale: u64 = 1;
        for e in &edges {
            scale = scale.checked_mul(e.weight.denom() / scale.gcd(e.weight.denom()))
                .ok_or(GraphError::WeightScaleOverflow { edge: e.id })?;
        }
        let mut scaled = Vec::with_capacity(edges.len());
        for e in &edges {
            let s = e.weight.numer().checked_mul(scale / e.weight.denom())
                .ok_or(GraphError::WeightScaleOverflow { edge: e.id })?;
            scaled.push(s);
        }
        let unit = edges.iter().all(|e| e.weight == Ratio::from_integer(1));

        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        let mut classes: BTreeMap<Color, Vec<EdgeId>> = BTreeMap::new();
        for e in &edges {
            out_adj[e.tail].push(e.id);
            in_adj[e.head].push(e.id);
            if !directed && e.tail != e.head {
                out_adj[e.head].push(e.id);
                in_adj[e.tail].push(e.id);
            }
            if let Some(c) = e.color {
                classes.entry(c).or_default().push(e.id);
            }
        }
        let delta = classes.values().map(Vec::len).max().unwrap_or(0);

        Ok(ColoredGraph {
            n,
            directed,
            weighted,
            edges,
            scaled,
            scale,
            unit,
            out_adj,
            in_adj,
            classes,
            color_names,
            delta,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn weighted(&self) -> bool {
        self.weighted
    }

    /// True when every weight is exactly 1 (hop-count metric).
    pub fn is_unit(&self) -> bool {
        self.unit
    }

    /// Max color class size; 0 when no edge is colored.
    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn scaled_weight(&self, e: EdgeId) -> u64 {
        self.scaled[e]
    }

    /// Denominator shared by all scaled weights.
    pub fn weight_scale(&self) -> u64 {
        self.scale
    }

    pub fn out_edges(&self, v: Vertex) -> &[EdgeId] {
        &self.out_adj[v]
    }

    pub fn in_edges(&self, v: Vertex) -> &[EdgeId] {
        &self.in_adj[v]
    }

    pub fn other_endpoint(&self, e: EdgeId, v: Vertex) -> Vertex {
        let ed = &self.edges[e];
        if ed.tail == v {
            ed.head
        } else {
            ed.tail
        }
    }

    /// Number of color ids in the palette (some may be unused on edges).
    pub fn num_colors(&self) -> usize {
        self.color_names.len()
    }

    pub fn all_colors(&self) -> impl Iterator<Item = Color> {
        (0..self.color_names.len() as u32).map(Color)
    }

    pub fn color_name(&self, c: Color) -> &str {
        &self.color_names[c.0 as usize]
    }

    pub fn color_names(&self) -> &[String] {
        &self.color_names
    }

    /// Edges carrying color `c` (empty for unused palette entries).
    pub fn class(&self, c: Color) -> &[EdgeId] {
        self.classes.get(&c).map_or(&[], Vec::as_slice)
    }

    /// The same graph with every edge orientation flipped; ids, weights and
    /// colors are preserved, so subgraphs translate back 1:1.
    pub fn reversed(&self) -> ColoredGraph {
        let specs = self
            .edges
            .iter()
            .map(|e| EdgeSpec { tail: e.head, head: e.tail, weight: e.weight, color: e.color })
            .collect();
        ColoredGraph::from_parts(
            self.n,
            self.directed,
            self.weighted,
            specs,
            Some(self.color_names.clone()),
        )
        .expect("reversing cannot invalidate a graph")
    }

    /// Unrestricted live view.
    pub fn view(&self) -> LiveView<'_> {
        LiveView { g: self, fault: None, mask: None }
    }

    /// Live view of the graph minus a fault set.
    pub fn view_minus<'a>(&'a self, fault: &'a FaultSet) -> LiveView<'a> {
        LiveView { g: self, fault: Some(fault), mask: None }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FaultMode {
    Color,
    Edge,
}

/// A set of simultaneously failing colors or edges, capped by a budget.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum FaultSet {
    Colors(Vec<Color>),
    Edges(Vec<EdgeId>),
}

impl FaultSet {
    pub fn colors(members: impl IntoIterator<Item = Color>, budget: usize) -> Result<Self, GraphError> {
        let mut v: Vec<Color> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if v.len() > budget {
            return Err(GraphError::FaultBudgetExceeded { got: v.len(), budget });
        }
        Ok(FaultSet::Colors(v))
    }

    pub fn edges(members: impl IntoIterator<Item = EdgeId>, budget: usize) -> Result<Self, GraphError> {
        let mut v: Vec<EdgeId> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if v.len() > budget {
            return Err(GraphError::FaultBudgetExceeded { got: v.len(), budget });
        }
        Ok(FaultSet::Edges(v))
    }

    pub fn empty(mode: FaultMode) -> Self {
        match mode {
            FaultMode::Color => FaultSet::Colors(Vec::new()),
            FaultMode::Edge => FaultSet::Edges(Vec::new()),
        }
    }

    pub fn single_color(c: Color) -> Self {
        FaultSet::Colors(vec![c])
    }

    pub fn single_edge(e: EdgeId) -> Self {
        FaultSet::Edges(vec![e])
    }

    pub fn mode(&self) -> FaultMode {
        match self {
            FaultSet::Colors(_) => FaultMode::Color,
            FaultSet::Edges(_) => FaultMode::Edge,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            FaultSet::Colors(v) => v.len(),
            FaultSet::Edges(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True when edge `e` of `g` is killed by this fault set.
    pub fn kills(&self, g: &ColoredGraph, e: EdgeId) -> bool {
        match self {
            FaultSet::Colors(cs) => match g.edge(e).color {
                Some(c) => cs.binary_search(&c).is_ok(),
                None => false,
            },
            FaultSet::Edges(es) => es.binary_search(&e).is_ok(),
        }
    }

    pub fn color_members(&self) -> &[Color] {
        match self {
            FaultSet::Colors(v) => v,
            FaultSet::Edges(_) => &[],
        }
    }

    pub fn edge_members(&self) -> &[EdgeId] {
        match self {
            FaultSet::Colors(_) => &[],
            FaultSet::Edges(v) => v,
        }
    }

    pub fn describe(&self, g: &ColoredGraph) -> String {
        match self {
            FaultSet::Colors(v) if v.is_empty() => "-".to_string(),
            FaultSet::Edges(v) if v.is_empty() => "-".to_string(),
            FaultSet::Colors(v) => {
                v.iter().map(|c| g.color_name(*c).to_string()).collect::<Vec<_>>().join("+")
            }
            FaultSet::Edges(v) => {
                v.iter().map(|e| format!("e{e}")).collect::<Vec<_>>().join("+")
            }
        }
    }
}

/// Read-only view of a graph after removing faults (and, optionally, after
/// restricting to a subgraph's edges). The underlying graph is never mutated,
/// so any number of views can coexist.
#[derive(Clone, Copy)]
pub struct LiveView<'a> {
    g: &'a ColoredGraph,
    fault: Option<&'a FaultSet>,
    mask: Option<&'a [bool]>,
}

impl<'a> LiveView<'a> {
    pub fn masked(g: &'a ColoredGraph, mask: &'a [bool], fault: Option<&'a FaultSet>) -> Self {
        debug_assert_eq!(mask.len(), g.m());
        LiveView { g, fault, mask: Some(mask) }
    }

    pub fn graph(&self) -> &'a ColoredGraph {
        self.g
    }

    pub fn alive(&self, e: EdgeId) -> bool {
        if let Some(mask) = self.mask {
            if !mask[e] {
                return false;
            }
        }
        match self.fault {
            Some(f) => !f.kills(self.g, e),
            None => true,
        }
    }

    pub fn live_edge_count(&self) -> usize {
        (0..self.g.m()).filter(|&e| self.alive(e)).count()
    }
}

/// Edge subset of a parent graph, the output form of every builder.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Subgraph {
    edges: std::collections::BTreeSet<EdgeId>,
    parent_m: usize,
}

impl Subgraph {
    pub fn new(g: &ColoredGraph, edges: impl IntoIterator<Item = EdgeId>) -> Result<Self, GraphError> {
        let set: std::collections::BTreeSet<EdgeId> = edges.into_iter().collect();
        if let Some(&e) = set.iter().next_back() {
            if e >= g.m() {
                return Err(GraphError::ForeignEdge { edge: e, m: g.m() });
            }
        }
        Ok(Subgraph { edges: set, parent_m: g.m() })
    }

    pub fn empty(g: &ColoredGraph) -> Self {
        Subgraph { edges: Default::default(), parent_m: g.m() }
    }

    pub fn full(g: &ColoredGraph) -> Self {
        Subgraph { edges: (0..g.m()).collect(), parent_m: g.m() }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.contains(&e)
    }

    pub fn insert(&mut self, e: EdgeId) {
        self.edges.insert(e);
    }

    pub fn union_with(&mut self, other: &Subgraph) {
        self.edges.extend(other.edges.iter().copied());
        self.parent_m = self.parent_m.max(other.parent_m);
    }

    pub fn iter(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.iter().copied()
    }

    pub fn mask(&self, g: &ColoredGraph) -> Vec<bool> {
        let mut mask = vec![false; g.m()];
        for &e in &self.edges {
            mask[e] = true;
        }
        mask
    }

    pub fn is_superset_of(&self, other: &Subgraph) -> bool {
        other.edges.iter().all(|e| self.edges.contains(e))
    }
}

/// Ordered edge walk between two vertices. Empty iff the endpoints coincide
/// (the trivial path); an unreachable target is reported as the absence of a
/// path, never as an empty one.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Path {
    pub from: Vertex,
    pub to: Vertex,
    pub edges: Vec<EdgeId>,
}

impl Path {
    pub fn trivial(v: Vertex) -> Self {
        Path { from: v, to: v, edges: Vec::new() }
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn weight(&self, g: &ColoredGraph) -> Ratio<u128> {
        let num: u128 = self.edges.iter().map(|&e| g.scaled_weight(e) as u128).sum();
        Ratio::new(num, g.weight_scale() as u128)
    }

    /// Vertex sequence from `from` to `to`, resolving each edge against the
    /// current position (undirected edges may be traversed either way).
    pub fn vertices(&self, g: &ColoredGraph) -> Vec<Vertex> {
        let mut vs = Vec::with_capacity(self.edges.len() + 1);
        let mut cur = self.from;
        vs.push(cur);
        for &e in &self.edges {
            cur = g.other_endpoint(e, cur);
            vs.push(cur);
        }
        debug_assert_eq!(cur, self.to);
        vs
    }

    /// Distinct colors on the path, ignoring uncolored edges.
    pub fn colors(&self, g: &ColoredGraph) -> Vec<Color> {
        let mut cs: Vec<Color> = self.edges.iter().filter_map(|&e| g.edge(e).color).collect();
        cs.sort_unstable();
        cs.dedup();
        cs
    }

    pub fn last_edge(&self) -> Option<EdgeId> {
        self.edges.last().copied()
    }
}
