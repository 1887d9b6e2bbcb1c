//! Parameter-grid size sweeps for the sourcewise preserver.
//!
//! Each grid cell builds one random unit-weight instance, runs the
//! single-color-fault sourcewise builder, and reports the output size against
//! the analytic bound `n^(2−1/(Δ+1)) · σ^(1/(Δ+1)) · Δ · ln n`. Cells run
//! concurrently; rows come back sorted by (n, σ, Δ) and contain no wall-clock
//! data, so the same grid and seed always produce byte-identical CSV.

use crate::exec;
use crate::graph::Vertex;
use crate::hitting::HittingMode;
use crate::instances::{random_colored_graph, RandomGraphCfg, WeightKind};
use crate::metric::{MetricError, TieBrokenMetric};
use crate::sourcewise_cft::build_1cft_sourcewise;
use crate::BuildError;

/// Edges per vertex in the random instances; dense enough to give the
/// builder real pruning work, sparse enough that the largest grid cells
/// finish in seconds.
const EDGE_FACTOR: usize = 6;

/// Distinct odd multipliers folding the cell coordinates into its seed, so
/// every cell draws an independent deterministic instance.
const CELL_SALT_N: u64 = 0x9E37_79B9_7F4A_7C15;
const CELL_SALT_SIGMA: u64 = 0xC2B2_AE3D_27D4_EB4F;
const CELL_SALT_DELTA: u64 = 0x165_667B1_9E37_79F9;

/// Reseed salt for metric retries after a tie-break collision.
const RESEED_SALT: u64 = 0x27D4_EB2F_1656_67C5;
const RESEED_CAP: usize = 8;

/// The parameter grid: every combination of the listed values becomes one
/// cell. The shared seed keeps the whole sweep reproducible.
#[derive(Clone, Debug)]
pub struct SweepGrid {
    pub ns: Vec<usize>,
    pub sigmas: Vec<usize>,
    pub deltas: Vec<usize>,
    pub seed: u64,
}

/// One measured cell: instance size in, preserver size out, and the ratio of
/// the output to the analytic size bound.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub n: usize,
    pub sigma: usize,
    pub delta: usize,
    /// Fault budget the builder's guarantee covers.
    pub f: usize,
    pub edges_in: usize,
    pub edges_out: usize,
    pub ratio: f64,
    /// The cell's derived instance seed, for replaying it in isolation.
    pub seed: u64,
}

/// The analytic size bound `n^(2−1/(Δ+1)) · σ^(1/(Δ+1)) · Δ · ln n` the ratio
/// column divides by. Requires `delta ≥ 1` and `n ≥ 2` so the bound is
/// positive.
pub fn size_bound_denominator(n: usize, sigma: usize, delta: usize) -> f64 {
    assert!(delta >= 1, "the size bound is defined for delta >= 1");
    assert!(n >= 2, "the size bound needs ln n > 0");
    let nf = n as f64;
    let exp = 1.0 / (delta as f64 + 1.0);
    nf.powf(2.0 - exp) * (sigma as f64).powf(exp) * delta as f64 * nf.ln()
}

fn cell_seed(grid_seed: u64, n: usize, sigma: usize, delta: usize) -> u64 {
    grid_seed
        ^ (n as u64).wrapping_mul(CELL_SALT_N)
        ^ (sigma as u64).wrapping_mul(CELL_SALT_SIGMA)
        ^ (delta as u64).wrapping_mul(CELL_SALT_DELTA)
}

/// Builds and measures one cell. The metric reseeds on tie-break collisions,
/// up to a fixed cap; any other builder error aborts the sweep.
pub fn run_cell(n: usize, sigma: usize, delta: usize, seed: u64) -> Result<SweepCell, BuildError> {
    let cfg = RandomGraphCfg {
        n,
        m: EDGE_FACTOR * n,
        delta,
        directed: false,
        weights: WeightKind::Unit,
        uncolored_pct: 10,
    };
    let g = random_colored_graph(&cfg, seed);
    let sources: Vec<Vertex> = (0..sigma.min(n)).collect();

    let mut attempt = 0usize;
    let build = loop {
        let metric = TieBrokenMetric::new(&g, seed ^ (attempt as u64).wrapping_mul(RESEED_SALT));
        match build_1cft_sourcewise(&g, &metric, &sources, HittingMode::Greedy) {
            Ok(build) => break build,
            Err(BuildError::Metric(MetricError::UniquenessViolation { .. }))
                if attempt < RESEED_CAP =>
            {
                attempt += 1;
            }
            Err(err) => return Err(err),
        }
    };

    Ok(SweepCell {
        n,
        sigma,
        delta,
        f: 1,
        edges_in: g.m(),
        edges_out: build.h.len(),
        ratio: build.h.len() as f64 / size_bound_denominator(n, sigma, delta),
        seed,
    })
}

/// Runs every cell of the grid concurrently and returns the rows sorted by
/// (n, σ, Δ).
pub fn run_sweep(grid: &SweepGrid) -> Result<Vec<SweepCell>, BuildError> {
    let mut coords = Vec::new();
    for &n in &grid.ns {
        for &sigma in &grid.sigmas {
            for &delta in &grid.deltas {
                coords.push((n, sigma, delta));
            }
        }
    }
    let results = exec::map_vec(coords, |(n, sigma, delta)| {
        run_cell(n, sigma, delta, cell_seed(grid.seed, n, sigma, delta))
    });
    let mut cells = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    cells.sort_by_key(|c| (c.n, c.sigma, c.delta));
    Ok(cells)
}

/// Plot-ready CSV, one row per cell. Contains no timing columns: identical
/// grids and seeds serialize byte-identically.
pub fn to_csv(cells: &[SweepCell]) -> String {
    let mut out = String::from("n,sigma,delta,f,edges_in,edges_out,ratio,seed\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.6},{}\n",
            c.n, c.sigma, c.delta, c.f, c.edges_in, c.edges_out, c.ratio, c.seed
        ));
    }
    out
}
