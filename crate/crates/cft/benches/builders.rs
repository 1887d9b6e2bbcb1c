//! Size and speed benchmarks for the builders and the verification oracle.
//!
//! Every benchmark id carries a `parallel` or `sequential` suffix reflecting
//! how the crate was compiled, so the two modes can be compared directly:
//!
//! ```text
//! cargo bench -p cft
//! cargo bench -p cft --no-default-features
//! ```

use criterion::{criterion_group, criterion_main, Criterion};

use cft::derived::PairSet;
use cft::exec::parallel_enabled;
use cft::graph::{FaultMode, Subgraph};
use cft::hitting::HittingMode;
use cft::instances::{random_colored_graph, RandomGraphCfg};
use cft::metric::TieBrokenMetric;
use cft::sourcewise_cft::build_1cft_sourcewise;
use cft::sweep::run_cell;
use cft::verify::{verify_distance_preserver, DEFAULT_CHECK_CAP};

fn mode() -> &'static str {
    if parallel_enabled() {
        "parallel"
    } else {
        "sequential"
    }
}

fn bench_sourcewise_build(c: &mut Criterion) {
    let g = random_colored_graph(&RandomGraphCfg::unit(192, 960, 2), 11);
    let metric = TieBrokenMetric::new(&g, 0x5EED);
    let sources = [0, 1, 2];
    c.bench_function(&format!("sourcewise-cft-build/{}", mode()), |b| {
        b.iter(|| {
            build_1cft_sourcewise(&g, &metric, &sources, HittingMode::Greedy)
                .expect("benchmark instance builds cleanly")
        })
    });
}

fn bench_distance_oracle(c: &mut Criterion) {
    let g = random_colored_graph(&RandomGraphCfg::unit(28, 84, 2), 23);
    let h = Subgraph::full(&g);
    let pairs = PairSet::new(g.n(), (1..g.n()).map(|t| (0, t))).expect("pairs in range");
    c.bench_function(&format!("distance-oracle-f1/{}", mode()), |b| {
        b.iter(|| {
            let report =
                verify_distance_preserver(&g, &h, &pairs, 1, FaultMode::Color, DEFAULT_CHECK_CAP);
            assert!(report.pass());
            report
        })
    });
}

fn bench_sweep_cell(c: &mut Criterion) {
    c.bench_function(&format!("sweep-cell-n128/{}", mode()), |b| {
        b.iter(|| run_cell(128, 1, 1, 42).expect("cell builds cleanly"))
    });
}

fn configured() -> Criterion {
    Criterion::default().sample_size(10)
}

criterion_group! {
    name = benches;
    config = configured();
    targets = bench_sourcewise_build, bench_distance_oracle, bench_sweep_cell
}
criterion_main!(benches);
