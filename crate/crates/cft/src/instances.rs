//! Seeded random instances for tests and benchmarks.

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::graph::{Color, ColoredGraph, EdgeSpec};

#[derive(Clone, Copy, Debug)]
pub enum WeightKind {
    Unit,
    /// Uniform integers in 1..=max.
    Integers { max: u64 },
    /// Uniform p/q with p in 1..=max and q in 1..=den.
    Rationals { max: u64, den: u64 },
}

#[derive(Clone, Debug)]
pub struct RandomGraphCfg {
    pub n: usize,
    pub m: usize,
    /// Target max color class size; classes are filled up to this size.
    pub delta: usize,
    pub directed: bool,
    pub weights: WeightKind,
    /// Fraction of edges left uncolored, in percent.
    pub uncolored_pct: u32,
}

impl RandomGraphCfg {
    pub fn unit(n: usize, m: usize, delta: usize) -> Self {
        RandomGraphCfg { n, m, delta, directed: false, weights: WeightKind::Unit, uncolored_pct: 10 }
    }
}

/// Random multigraph-free graph with a random coloring whose classes have
/// size at most `delta` (and, when `m` is large enough, exactly `delta` for
/// at least one class, so the graph's Δ equals the target).
pub fn random_colored_graph(cfg: &RandomGraphCfg, seed: u64) -> ColoredGraph {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    assert!(cfg.n >= 2, "need at least two vertices");
    let max_m = if cfg.directed { cfg.n * (cfg.n - 1) } else { cfg.n * (cfg.n - 1) / 2 };
    let m = cfg.m.min(max_m);

    // Distinct vertex pairs, no self-loops.
    let mut seen = std::collections::HashSet::new();
    let mut ends = Vec::with_capacity(m);
    while ends.len() < m {
        let a = rng.gen_range(0..cfg.n);
        let b = rng.gen_range(0..cfg.n);
        if a == b {
            continue;
        }
        let key = if cfg.directed { (a, b) } else { (a.min(b), a.max(b)) };
        if seen.insert(key) {
            ends.push((a, b));
        }
    }

    // Pick which edges stay uncolored, then chunk the rest into classes.
    let mut ids: Vec<usize> = (0..m).collect();
    ids.shuffle(&mut rng);
    let uncolored = m * cfg.uncolored_pct as usize / 100;
    let mut color_of: Vec<Option<Color>> = vec![None; m];
    if cfg.delta > 0 {
        for (j, chunk) in ids[uncolored..].chunks(cfg.delta.max(1)).enumerate() {
            for &e in chunk {
                color_of[e] = Some(Color(j as u32));
            }
        }
    }

    let specs = ends
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let weight = match cfg.weights {
                WeightKind::Unit => Ratio::from_integer(1),
                WeightKind::Integers { max } => Ratio::from_integer(rng.gen_range(1..=max)),
                WeightKind::Rationals { max, den } => {
                    Ratio::new(rng.gen_range(1..=max), rng.gen_range(1..=den))
                }
            };
            EdgeSpec { tail: a, head: b, weight, color: color_of[i] }
        })
        .collect();
    let weighted = !matches!(cfg.weights, WeightKind::Unit);
    ColoredGraph::from_parts(cfg.n, cfg.directed, weighted, specs, None).unwrap()
}

/// Ring of `n` vertices plus `chords` random chords; unit weights, every edge
/// its own color (Δ = 1). Rings keep the diameter large enough that distance
/// thresholds actually bite, unlike uniform random graphs.
pub fn ring_with_chords(n: usize, chords: usize, seed: u64) -> ColoredGraph {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut specs: Vec<EdgeSpec> = (0..n)
        .map(|i| EdgeSpec::unit(i, (i + 1) % n, Some(Color(i as u32))))
        .collect();
    let mut seen = std::collections::HashSet::new();
    let mut added = 0;
    while added < chords {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b || (a + 1) % n == b || (b + 1) % n == a {
            continue;
        }
        if seen.insert((a.min(b), a.max(b))) {
            specs.push(EdgeSpec::unit(a, b, Some(Color((n + added) as u32))));
            added += 1;
        }
    }
    ColoredGraph::from_parts(n, false, false, specs, None).unwrap()
}
