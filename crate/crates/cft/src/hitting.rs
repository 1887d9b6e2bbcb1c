//! Hitting sets for families of replacement-path suffixes.
//!
//! The sourcewise builders rely on small vertex sets that intersect the tail
//! of every sufficiently long replacement path. For each threshold `d` the
//! family contains — for every source `s`, target `t`, and fault in scope —
//! the vertex set of the last few edges of the canonical path from `s` to `t`
//! in the faulted graph, provided that path is long enough to qualify. A
//! hitting set for the family then lands on every such tail, which is what
//! lets the builders restart shortest-path trees close to each target.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::combinatorics::{for_each_subset, subsets_up_to};
use crate::exec;
use crate::graph::{ColoredGraph, FaultSet, Vertex};
use crate::metric::{sp_tree, Dir, MetricError, TieBrokenMetric};

/// Cap on `(fault, source)` shortest-path-tree computations during family
/// enumeration; exceeding it aborts instead of grinding.
pub const FAMILY_TREE_CAP: u128 = 2_000_000;

/// Retry budget for [`HittingMode::Sampled`] before giving up.
pub const SAMPLE_RETRY_CAP: usize = 8;

#[derive(Debug, Error)]
pub enum HittingError {
    #[error("family member {index} is empty and cannot be hit")]
    EmptyMember { index: usize },
    #[error("family member mentions vertex {vertex}, outside the sampling universe")]
    VertexOutOfRange { vertex: Vertex },
    #[error("sampled hitting set failed verification {attempts} times; giving up")]
    SampleRetriesExhausted { attempts: usize },
    #[error("family enumeration would need {trees} shortest-path trees (cap {cap})")]
    FamilyTooLarge { trees: u128, cap: u128 },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// How each hitting set is constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HittingMode {
    /// Deterministic maximum-coverage greedy over the enumerated family.
    Greedy,
    /// Random vertex sample of size `⌈4·(n/d)·ln n⌉`, verified against the
    /// enumerated family and resampled on failure.
    Sampled,
}

/// Which faults the suffix family ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyScope {
    /// One fault per color class; a path qualifies when its hop count is
    /// strictly above the level threshold.
    Colors,
    /// Every edge subset of size at most `budget`, the empty set included; a
    /// path qualifies when its hop count is at or above the threshold.
    EdgeSets { budget: usize },
}

impl FamilyScope {
    fn strict(self) -> bool {
        matches!(self, FamilyScope::Colors)
    }
}

/// The suffix sets one threshold level must hit. Members are sorted vertex
/// lists, deduplicated across sources, targets, and faults.
#[derive(Debug, Clone)]
pub struct SuffixFamily {
    pub threshold: f64,
    pub suffix_len: usize,
    pub members: Vec<Vec<Vertex>>,
}

/// One level of a [`HittingFamily`]: the chosen set and the family it hits.
#[derive(Debug, Clone)]
pub struct HittingLevel {
    pub threshold: f64,
    pub suffix_len: usize,
    /// Sorted hitting set for this level's suffix family.
    pub set: Vec<Vertex>,
    pub family_size: usize,
}

/// Level 0 is always the source set itself (threshold ∞); levels 1.. hit the
/// suffix families of their strictly decreasing thresholds.
#[derive(Debug, Clone)]
pub struct HittingFamily {
    pub mode: HittingMode,
    pub seed: u64,
    pub levels: Vec<HittingLevel>,
}

impl HittingFamily {
    /// The levels after the source level.
    pub fn interior(&self) -> &[HittingLevel] {
        &self.levels[1..]
    }
}

/// Enumerates, for each `(threshold, suffix_len)` level, the family of path
/// suffixes the level's hitting set must intersect. Thresholds compare
/// against hop counts of canonical paths, so this is meaningful for
/// unit-weight graphs (the only callers).
pub fn enumerate_suffix_families(
    g: &ColoredGraph,
    metric: &TieBrokenMetric,
    sources: &[Vertex],
    levels: &[(f64, usize)],
    scope: FamilyScope,
) -> Result<Vec<SuffixFamily>, HittingError> {
    let mut srcs: Vec<Vertex> = sources.to_vec();
    srcs.sort_unstable();
    srcs.dedup();

    if levels.is_empty() || srcs.is_empty() {
        return Ok(levels
            .iter()
            .map(|&(threshold, suffix_len)| SuffixFamily { threshold, suffix_len, members: Vec::new() })
            .collect());
    }

    let fault_count: u128 = match scope {
        FamilyScope::Colors => g.num_colors() as u128,
        FamilyScope::EdgeSets { budget } => subsets_up_to(g.m(), budget),
    };
    let trees = fault_count.saturating_mul(srcs.len() as u128);
    if trees > FAMILY_TREE_CAP {
        return Err(HittingError::FamilyTooLarge { trees, cap: FAMILY_TREE_CAP });
    }

    // `None` stands for the fault-free graph (edge scope only: the color
    // scope covers fault-free paths through colors absent from them).
    let faults: Vec<Option<FaultSet>> = match scope {
        FamilyScope::Colors => g.all_colors().map(|c| Some(FaultSet::single_color(c))).collect(),
        FamilyScope::EdgeSets { budget } => {
            let mut out = Vec::with_capacity(trees as usize / srcs.len().max(1));
            for_each_subset(g.m(), budget, |ids| {
                out.push(if ids.is_empty() {
                    None
                } else {
                    Some(FaultSet::edges(ids.iter().copied(), budget).expect("subset size within budget"))
                });
            });
            out
        }
    };

    let strict = scope.strict();
    let per_fault = exec::map_vec(faults, |fault| -> Result<Vec<BTreeSet<Vec<Vertex>>>, MetricError> {
        let view = match fault.as_ref() {
            Some(f) => g.view_minus(f),
            None => g.view(),
        };
        let mut acc: Vec<BTreeSet<Vec<Vertex>>> = vec![BTreeSet::new(); levels.len()];
        for &s in &srcs {
            let tree = sp_tree(&view, metric, s, Dir::Out)?;
            for t in 0..g.n() {
                if t == s {
                    continue;
                }
                let Some(hops) = tree.hop_dist(t) else { continue };
                let hops = hops as f64;
                for (li, &(d, suffix_len)) in levels.iter().enumerate() {
                    let qualifies = if strict { hops > d } else { hops >= d };
                    if qualifies {
                        let mut member = tree.suffix_vertices(t, suffix_len);
                        member.sort_unstable();
                        debug_assert!(member.len() <= suffix_len + 1);
                        acc[li].insert(member);
                    }
                }
            }
        }
        Ok(acc)
    });

    let mut merged: Vec<BTreeSet<Vec<Vertex>>> = vec![BTreeSet::new(); levels.len()];
    for res in per_fault {
        for (li, set) in res?.into_iter().enumerate() {
            merged[li].extend(set);
        }
    }
    Ok(levels
        .iter()
        .zip(merged)
        .map(|(&(threshold, suffix_len), set)| SuffixFamily {
            threshold,
            suffix_len,
            members: set.into_iter().collect(),
        })
        .collect())
}

/// Classic deterministic greedy: repeatedly take the vertex covering the most
/// still-unhit members, lowest vertex id on ties.
pub fn greedy_hitting_set(family: &SuffixFamily) -> Result<Vec<Vertex>, HittingError> {
    greedy_cover(&family.members)
}

/// Greedy max-coverage hitting set over arbitrary nonempty vertex sets, for
/// callers whose families are whole paths rather than suffixes.
pub fn greedy_cover(members: &[Vec<Vertex>]) -> Result<Vec<Vertex>, HittingError> {
    if members.is_empty() {
        return Ok(Vec::new());
    }
    let mut universe = 0;
    for (index, member) in members.iter().enumerate() {
        if member.is_empty() {
            return Err(HittingError::EmptyMember { index });
        }
        for &v in member {
            universe = universe.max(v + 1);
        }
    }
    let mut incidence: Vec<Vec<usize>> = vec![Vec::new(); universe];
    for (i, member) in members.iter().enumerate() {
        for &v in member {
            incidence[v].push(i);
        }
    }
    let mut hit = vec![false; members.len()];
    let mut remaining = members.len();
    let mut chosen = Vec::new();
    while remaining > 0 {
        let mut best_v = 0;
        let mut best_count = 0;
        for (v, inc) in incidence.iter().enumerate() {
            let count = inc.iter().filter(|&&i| !hit[i]).count();
            if count > best_count {
                best_count = count;
                best_v = v;
            }
        }
        debug_assert!(best_count > 0, "nonempty members always have a coverer");
        chosen.push(best_v);
        for &i in &incidence[best_v] {
            if !hit[i] {
                hit[i] = true;
                remaining -= 1;
            }
        }
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Index of the first member not intersected by `set` (which must be sorted),
/// or `None` when every member is hit.
pub fn first_unhit(members: &[Vec<Vertex>], set: &[Vertex]) -> Option<usize> {
    members
        .iter()
        .position(|member| !member.iter().any(|v| set.binary_search(v).is_ok()))
}

fn sampled_size(n: usize, d: f64) -> usize {
    let nf = n as f64;
    let raw = 4.0 * (nf / d.max(1.0)) * nf.max(2.0).ln();
    (raw.ceil() as usize).clamp(1, n)
}

/// `min(n, ⌈4·(n/d)·ln n⌉)` distinct vertices drawn without replacement,
/// sorted. The plain sample used when no enumerated family is available.
pub fn sample_vertices(n: usize, d: f64, seed: u64) -> Vec<Vertex> {
    let size = sampled_size(n, d);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut verts: Vec<Vertex> = (0..n).collect();
    verts.shuffle(&mut rng);
    verts.truncate(size);
    verts.sort_unstable();
    verts
}

/// Draws `⌈4·(n/d)·ln n⌉` distinct vertices and verifies they hit the family,
/// redrawing on failure. Returns the sorted set and the attempt count.
pub fn sampled_hitting_set(
    n: usize,
    family: &SuffixFamily,
    seed: u64,
    max_attempts: usize,
) -> Result<(Vec<Vertex>, usize), HittingError> {
    if family.members.is_empty() {
        return Ok((Vec::new(), 0));
    }
    for (index, member) in family.members.iter().enumerate() {
        if member.is_empty() {
            return Err(HittingError::EmptyMember { index });
        }
        if let Some(&v) = member.iter().find(|&&v| v >= n) {
            return Err(HittingError::VertexOutOfRange { vertex: v });
        }
    }
    for attempt in 1..=max_attempts {
        let verts = sample_vertices(
            n,
            family.threshold,
            seed ^ (attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        );
        if first_unhit(&family.members, &verts).is_none() {
            return Ok((verts, attempt));
        }
    }
    Err(HittingError::SampleRetriesExhausted { attempts: max_attempts })
}

/// Builds the full level structure: level 0 is the (sorted, deduplicated)
/// source set, and each interior level hits its enumerated suffix family.
/// Every returned set is re-verified against the family before return.
pub fn build_hitting_family(
    g: &ColoredGraph,
    metric: &TieBrokenMetric,
    sources: &[Vertex],
    levels: &[(f64, usize)],
    mode: HittingMode,
    seed: u64,
    scope: FamilyScope,
) -> Result<HittingFamily, HittingError> {
    debug_assert!(
        levels.windows(2).all(|w| w[0].0 >= w[1].0),
        "level thresholds must be non-increasing"
    );
    let families = enumerate_suffix_families(g, metric, sources, levels, scope)?;

    let mut srcs: Vec<Vertex> = sources.to_vec();
    srcs.sort_unstable();
    srcs.dedup();
    let mut out = Vec::with_capacity(levels.len() + 1);
    out.push(HittingLevel { threshold: f64::INFINITY, suffix_len: 0, set: srcs, family_size: 0 });

    for family in &families {
        let set = match mode {
            HittingMode::Greedy => greedy_hitting_set(family)?,
            HittingMode::Sampled => sampled_hitting_set(g.n(), family, seed, SAMPLE_RETRY_CAP)?.0,
        };
        debug_assert!(first_unhit(&family.members, &set).is_none());
        out.push(HittingLevel {
            threshold: family.threshold,
            suffix_len: family.suffix_len,
            set,
            family_size: family.members.len(),
        });
    }
    Ok(HittingFamily { mode, seed, levels: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Color, EdgeSpec};
    use crate::instances::{random_colored_graph, RandomGraphCfg};

    fn family(members: Vec<Vec<Vertex>>) -> SuffixFamily {
        SuffixFamily { threshold: 2.0, suffix_len: 2, members }
    }

    #[test]
    fn greedy_picks_common_element() {
        let set = greedy_hitting_set(&family(vec![vec![1, 2], vec![2, 3]])).unwrap();
        assert_eq!(set, vec![2]);
    }

    #[test]
    fn greedy_disjoint_members_need_one_each() {
        let set =
            greedy_hitting_set(&family(vec![vec![0, 1], vec![2, 3], vec![4, 5]])).unwrap();
        assert_eq!(set.len(), 3);
        assert!(first_unhit(&[vec![0, 1], vec![2, 3], vec![4, 5]], &set).is_none());
    }

    #[test]
    fn greedy_ties_break_to_lowest_vertex() {
        let set = greedy_hitting_set(&family(vec![vec![1, 2], vec![3, 4]])).unwrap();
        assert_eq!(set, vec![1, 3]);
    }

    #[test]
    fn greedy_edge_cases() {
        assert!(greedy_hitting_set(&family(vec![])).unwrap().is_empty());
        assert!(matches!(
            greedy_hitting_set(&family(vec![vec![1], vec![]])),
            Err(HittingError::EmptyMember { index: 1 })
        ));
    }

    fn path_graph_one_color() -> ColoredGraph {
        // 0–1–…–9 unit path; only edge (4,5) carries a color.
        let specs: Vec<EdgeSpec> = (0..9)
            .map(|i| EdgeSpec::unit(i, i + 1, if i == 4 { Some(Color(0)) } else { None }))
            .collect();
        ColoredGraph::from_parts(10, false, false, specs, None).unwrap()
    }

    #[test]
    fn color_scope_family_on_a_path() {
        let g = path_graph_one_color();
        let metric = TieBrokenMetric::new(&g, 11);
        let fams =
            enumerate_suffix_families(&g, &metric, &[0], &[(3.0, 3)], FamilyScope::Colors).unwrap();
        // Faulting the lone color keeps 0..=4 reachable; only the path to 4
        // exceeds three hops, and its 3-edge tail spans vertices 1..=4.
        assert_eq!(fams[0].members, vec![vec![1, 2, 3, 4]]);

        let fam = build_hitting_family(
            &g,
            &metric,
            &[0],
            &[(3.0, 3)],
            HittingMode::Greedy,
            11,
            FamilyScope::Colors,
        )
        .unwrap();
        assert_eq!(fam.levels[0].set, vec![0]);
        assert_eq!(fam.levels[1].set, vec![1]);
        assert_eq!(fam.levels[1].family_size, 1);
    }

    #[test]
    fn star_graph_gives_empty_family() {
        // Star with distinctly colored spokes: no path exceeds one hop.
        let specs: Vec<EdgeSpec> =
            (1..7).map(|i| EdgeSpec::unit(0, i, Some(Color(i as u32 - 1)))).collect();
        let g = ColoredGraph::from_parts(7, false, false, specs, None).unwrap();
        let metric = TieBrokenMetric::new(&g, 3);
        let fam = build_hitting_family(
            &g,
            &metric,
            &[0],
            &[(1.0, 1)],
            HittingMode::Greedy,
            3,
            FamilyScope::Colors,
        )
        .unwrap();
        assert!(fam.levels[1].set.is_empty());
        assert_eq!(fam.levels[1].family_size, 0);
        assert_eq!(fam.levels[0].set, vec![0]);
    }

    #[test]
    fn edge_scope_ranges_over_subsets_and_respects_bounds() {
        // Unit 4-cycle: any single edge fault leaves every target reachable.
        let specs =
            vec![EdgeSpec::unit(0, 1, None), EdgeSpec::unit(1, 2, None), EdgeSpec::unit(2, 3, None), EdgeSpec::unit(3, 0, None)];
        let g = ColoredGraph::from_parts(4, false, false, specs, None).unwrap();
        let metric = TieBrokenMetric::new(&g, 5);
        let fams = enumerate_suffix_families(
            &g,
            &metric,
            &[0],
            &[(2.0, 2)],
            FamilyScope::EdgeSets { budget: 1 },
        )
        .unwrap();
        assert!(!fams[0].members.is_empty());
        assert!(fams[0].members.iter().all(|m| m.len() <= 3));
        let set = greedy_hitting_set(&fams[0]).unwrap();
        assert!(first_unhit(&fams[0].members, &set).is_none());
    }

    #[test]
    fn sampled_mode_verifies_against_the_family() {
        let g = random_colored_graph(&RandomGraphCfg::unit(30, 70, 2), 7);
        let metric = TieBrokenMetric::new(&g, 7);
        let fam = build_hitting_family(
            &g,
            &metric,
            &[0, 1],
            &[(3.0, 3)],
            HittingMode::Sampled,
            42,
            FamilyScope::Colors,
        )
        .unwrap();
        let fams =
            enumerate_suffix_families(&g, &metric, &[0, 1], &[(3.0, 3)], FamilyScope::Colors)
                .unwrap();
        assert!(first_unhit(&fams[0].members, &fam.levels[1].set).is_none());
    }

    #[test]
    fn enumeration_cap_rejects_huge_edge_scopes() {
        let g = random_colored_graph(&RandomGraphCfg::unit(200, 2001, 2), 1);
        let metric = TieBrokenMetric::new(&g, 1);
        let err = enumerate_suffix_families(
            &g,
            &metric,
            &[0],
            &[(4.0, 4)],
            FamilyScope::EdgeSets { budget: 2 },
        )
        .unwrap_err();
        assert!(matches!(err, HittingError::FamilyTooLarge { .. }));
    }

    #[test]
    fn greedy_build_is_deterministic() {
        let g = random_colored_graph(&RandomGraphCfg::unit(25, 60, 3), 9);
        let metric = TieBrokenMetric::new(&g, 9);
        let build = || {
            build_hitting_family(
                &g,
                &metric,
                &[0, 3],
                &[(4.0, 4), (2.0, 2)],
                HittingMode::Greedy,
                9,
                FamilyScope::Colors,
            )
            .unwrap()
        };
        let (a, b) = (build(), build());
        for (la, lb) in a.levels.iter().zip(&b.levels) {
            assert_eq!(la.set, lb.set);
            assert_eq!(la.family_size, lb.family_size);
        }
    }
}
