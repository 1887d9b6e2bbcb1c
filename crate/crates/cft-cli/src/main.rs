//! Command-line front end: build fault-tolerant subgraphs, generate hard
//! instances, verify either against the brute-force oracles, and sweep a
//! size-benchmark grid.
//!
//! Exit codes: 0 = pass, 1 = verification failure, 2 = invalid config or
//! input, 3 = enumeration cap exceeded (inconclusive). All outputs are UTF-8
//! with LF line endings, and identical configs with identical seeds produce
//! byte-identical files.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cft::derived::{build_1cft_pairwise, build_1cft_plus2_spanner, PairSet};
use cft::exec::cap_threads;
use cft::graph::{ColoredGraph, FaultMode, Subgraph, Vertex};
use cft::hitting::HittingMode;
use cft::io::{
    parse_graph, parse_manifest, parse_subgraph, sha256_hex, write_graph, write_manifest,
    write_subgraph,
};
use cft::lowerbounds::{
    build_flow_lb, build_reachability_lb, build_singlepair_lb, build_sourcewise_lb,
};
use cft::metric::{MetricError, TieBrokenMetric};
use cft::single_pair::{build_1cft_single_pair, perturb_weights};
use cft::sourcewise_cft::build_1cft_sourcewise;
use cft::sourcewise_eft::build_feft_sourcewise;
use cft::sweep::{run_sweep, to_csv as sweep_csv, SweepGrid};
use cft::verify::{
    verify_distance_preserver, verify_flow_preserver, verify_mandatory_edges,
    verify_reachability_preserver, Status, VerificationReport, DEFAULT_CHECK_CAP,
};
use cft::BuildError;

/// Salt between metric reseed attempts after a tie-break collision.
const RESEED_SALT: u64 = 0x94D0_49BB_1331_11EB;
const RESEED_CAP: usize = 8;

#[derive(Parser)]
#[command(
    name = "cft",
    version,
    about = "Sparse subgraphs of edge-colored graphs that survive color and edge faults"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a fault-tolerant subgraph of a cftg graph.
    Build(BuildArgs),
    /// Generate a hard instance (graph + manifest of mandatory edges).
    Gen(GenArgs),
    /// Verify a subgraph or instance by exhaustive fault enumeration.
    Verify(VerifyArgs),
    /// Sweep a parameter grid and report sizes against the analytic bound.
    Bench(BenchArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum BuildKind {
    /// Source-to-all distances survive any one color fault (unit weights).
    CftSourcewise,
    /// Source-to-all distances survive up to f edge faults (unit weights).
    EftSourcewise,
    /// Listed pair distances survive any one color fault (unit weights).
    CftPairwise,
    /// All distances stretch by at most +2 under any one color fault.
    Plus2Spanner,
    /// One pair's distance survives any one color fault (weighted ok).
    CftSinglePair,
}

#[derive(Args)]
struct BuildArgs {
    /// Which builder to run.
    #[arg(long, value_enum)]
    kind: BuildKind,
    /// Source vertices, comma separated (sourcewise builders).
    #[arg(long, value_delimiter = ',')]
    sources: Vec<usize>,
    /// Demand pairs as "u:v", comma separated (pairwise builder).
    #[arg(long, value_delimiter = ',')]
    pairs: Vec<String>,
    /// The demand pair as "u:v" (single-pair builder).
    #[arg(long)]
    pair: Option<String>,
    /// Edge-fault budget (edge-fault sourcewise builder).
    #[arg(long, default_value_t = 1)]
    f: usize,
    /// Tie-breaking seed; collisions reseed deterministically.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Parent graph file (cftg).
    input: PathBuf,
    /// Output subgraph file (cfth edge-id list).
    output: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum GenKind {
    /// Sourcewise distance instance: every bipartite edge is mandatory.
    SourcewiseLb,
    /// Directed reachability instance with multi-color witnesses.
    ReachabilityLb,
    /// Directed disjoint-path instance with a flow threshold.
    FlowLb,
    /// Single-pair distance instance wrapped around an input graph.
    SinglepairLb,
}

#[derive(Args)]
struct GenArgs {
    /// Which instance family to generate.
    #[arg(long, value_enum)]
    kind: GenKind,
    /// Number of sources (sourcewise-lb).
    #[arg(long)]
    sigma: Option<usize>,
    /// Color class size bound.
    #[arg(long)]
    delta: Option<usize>,
    /// Size parameter (target count per demand unit).
    #[arg(long)]
    n: Option<usize>,
    /// Fault budget (reachability-lb, flow-lb).
    #[arg(long, default_value_t = 1)]
    f: usize,
    /// Disjoint-path threshold (flow-lb).
    #[arg(long)]
    lambda: Option<usize>,
    /// Input graph the single-pair instance is built around (cftg,
    /// undirected, uncolored, connected).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Demand pairs of the input graph as "u:v", comma separated
    /// (singlepair-lb).
    #[arg(long, value_delimiter = ',')]
    pairs: Vec<String>,
    /// Output graph file (cftg).
    out_graph: PathBuf,
    /// Output manifest file (mandatory edges + witnesses).
    out_manifest: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum VerifyKind {
    /// Exact distances for the demand pairs under every fault set.
    Distance,
    /// Exact reachable set from the source under every color fault set.
    Reachability,
    /// Threshold-clipped disjoint-path counts under every color fault set.
    Flow,
    /// Every manifest edge is mandatory under its witness fault.
    Mandatory,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Fault sets range over color classes (uncolored edges never fail).
    Color,
    /// Fault sets range over individual edges.
    Edge,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which guarantee to check.
    #[arg(long, value_enum)]
    kind: VerifyKind,
    /// Fault budget: every fault set up to this size is enumerated.
    #[arg(long, default_value_t = 1)]
    f: usize,
    /// Fault universe for distance checks.
    #[arg(long, value_enum, default_value_t = ModeArg::Color)]
    mode: ModeArg,
    /// Demand pairs as "u:v", comma separated (distance).
    #[arg(long, value_delimiter = ',')]
    pairs: Vec<String>,
    /// Sources whose source-to-all demands are checked (distance).
    #[arg(long, value_delimiter = ',')]
    sources: Vec<usize>,
    /// Source vertex (reachability, flow).
    #[arg(long)]
    source: Option<usize>,
    /// Disjoint-path threshold (flow).
    #[arg(long, default_value_t = 1)]
    lambda: usize,
    /// Instance manifest (mandatory).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Check budget; larger enumerations come back inconclusive (exit 3).
    #[arg(long, default_value_t = DEFAULT_CHECK_CAP)]
    cap: u128,
    /// Write the report CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Parent graph file (cftg).
    graph: PathBuf,
    /// Subgraph file (cfth); unused by --kind mandatory.
    subgraph: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Vertex counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    ns: Vec<usize>,
    /// Source counts, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1])]
    sigmas: Vec<usize>,
    /// Class size bounds, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1])]
    deltas: Vec<usize>,
    /// Grid seed; every cell derives its own instance seed from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the sweep CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(raw) = std::env::var("CFT_THREADS") {
        match raw.parse::<usize>() {
            Ok(k) if k >= 1 => cap_threads(k),
            _ => {
                eprintln!("error: CFT_THREADS must be a positive integer, got '{raw}'");
                return ExitCode::from(2);
            }
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Build(args) => cmd_build(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn parse_pair_token(tok: &str) -> Result<(Vertex, Vertex)> {
    let (u, v) = tok
        .split_once(':')
        .ok_or_else(|| anyhow!("pair '{tok}' is not of the form u:v"))?;
    Ok((
        u.trim().parse().with_context(|| format!("bad vertex '{u}' in pair '{tok}'"))?,
        v.trim().parse().with_context(|| format!("bad vertex '{v}' in pair '{tok}'"))?,
    ))
}

fn parse_pair_list(toks: &[String]) -> Result<Vec<(Vertex, Vertex)>> {
    toks.iter().map(|t| parse_pair_token(t)).collect()
}

fn load_graph(path: &PathBuf) -> Result<(ColoredGraph, String)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let g = parse_graph(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok((g, sha256_hex(text.as_bytes())))
}

/// Runs a builder under a fresh tie-broken metric, reseeding on collisions up
/// to a fixed cap.
fn with_reseeds<T>(
    g: &ColoredGraph,
    seed: u64,
    mut build: impl FnMut(&TieBrokenMetric) -> Result<T, BuildError>,
) -> Result<T> {
    let mut attempt = 0usize;
    loop {
        let metric = TieBrokenMetric::new(g, seed ^ (attempt as u64).wrapping_mul(RESEED_SALT));
        match build(&metric) {
            Ok(v) => return Ok(v),
            Err(BuildError::Metric(MetricError::UniquenessViolation { .. }))
                if attempt < RESEED_CAP =>
            {
                attempt += 1;
            }
            Err(err) => return Err(err.into()),
        }
    }
}

fn cmd_build(args: BuildArgs) -> Result<ExitCode> {
    let (g, parent_hash) = load_graph(&args.input)?;

    let h: Subgraph = match args.kind {
        BuildKind::CftSourcewise => {
            if args.sources.is_empty() {
                bail!("--kind cft-sourcewise needs --sources");
            }
            with_reseeds(&g, args.seed, |m| {
                build_1cft_sourcewise(&g, m, &args.sources, HittingMode::Greedy)
            })?
            .h
        }
        BuildKind::EftSourcewise => {
            if args.sources.is_empty() {
                bail!("--kind eft-sourcewise needs --sources");
            }
            with_reseeds(&g, args.seed, |m| {
                build_feft_sourcewise(&g, m, &args.sources, args.f, HittingMode::Greedy)
            })?
            .h
        }
        BuildKind::CftPairwise => {
            if args.pairs.is_empty() {
                bail!("--kind cft-pairwise needs --pairs");
            }
            let pairs = PairSet::new(g.n(), parse_pair_list(&args.pairs)?)?;
            with_reseeds(&g, args.seed, |m| build_1cft_pairwise(&g, m, &pairs, args.seed))?.h
        }
        BuildKind::Plus2Spanner => {
            with_reseeds(&g, args.seed, |m| build_1cft_plus2_spanner(&g, m))?.h
        }
        BuildKind::CftSinglePair => {
            let tok = args.pair.as_deref().ok_or_else(|| anyhow!("--kind cft-single-pair needs --pair"))?;
            let (s, t) = parse_pair_token(tok)?;
            let metric = perturb_weights(&g, args.seed)?;
            build_1cft_single_pair(&g, &metric, s, t)?.h
        }
    };

    fs::write(&args.output, write_subgraph(&h, &parent_hash))
        .with_context(|| format!("writing {}", args.output.display()))?;
    println!("n {}", g.n());
    println!("edges_in {}", g.m());
    println!("edges_out {}", h.len());
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    let need = |name: &str, v: Option<usize>| -> Result<usize> {
        v.ok_or_else(|| anyhow!("this --kind needs --{name}"))
    };
    let inst = match args.kind {
        GenKind::SourcewiseLb => build_sourcewise_lb(
            need("sigma", args.sigma)?,
            need("delta", args.delta)?,
            need("n", args.n)?,
        )?,
        GenKind::ReachabilityLb => {
            build_reachability_lb(need("n", args.n)?, need("delta", args.delta)?, args.f)?
        }
        GenKind::FlowLb => build_flow_lb(
            need("n", args.n)?,
            need("delta", args.delta)?,
            args.f,
            need("lambda", args.lambda)?,
        )?,
        GenKind::SinglepairLb => {
            let input = args
                .input
                .as_ref()
                .ok_or_else(|| anyhow!("--kind singlepair-lb needs --input"))?;
            if args.pairs.is_empty() {
                bail!("--kind singlepair-lb needs --pairs");
            }
            let (gstar, _) = load_graph(input)?;
            let pairs = PairSet::new(gstar.n(), parse_pair_list(&args.pairs)?)?;
            build_singlepair_lb(&gstar, &pairs)?
        }
    };

    fs::write(&args.out_graph, write_graph(&inst.graph))
        .with_context(|| format!("writing {}", args.out_graph.display()))?;
    fs::write(&args.out_manifest, write_manifest(&inst))
        .with_context(|| format!("writing {}", args.out_manifest.display()))?;
    println!("n {}", inst.graph.n());
    println!("m {}", inst.graph.m());
    println!("mandatory {}", inst.mandatory.len());
    Ok(ExitCode::SUCCESS)
}

fn exit_for(report: &VerificationReport) -> ExitCode {
    match report.status {
        Status::Pass => ExitCode::SUCCESS,
        Status::Fail => ExitCode::from(1),
        Status::Inconclusive => ExitCode::from(3),
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let (g, graph_hash) = load_graph(&args.graph)?;

    let load_subgraph = || -> Result<Subgraph> {
        let path = args
            .subgraph
            .as_ref()
            .ok_or_else(|| anyhow!("this --kind needs a subgraph file argument"))?;
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(parse_subgraph(&text, &g, Some(&graph_hash))
            .with_context(|| format!("parsing {}", path.display()))?)
    };

    let report = match args.kind {
        VerifyKind::Distance => {
            let mut pairs = parse_pair_list(&args.pairs)?;
            for &s in &args.sources {
                pairs.extend((0..g.n()).map(|t| (s, t)));
            }
            if pairs.is_empty() {
                bail!("--kind distance needs --pairs and/or --sources");
            }
            let pairs = PairSet::new(g.n(), pairs)?;
            let mode = match args.mode {
                ModeArg::Color => FaultMode::Color,
                ModeArg::Edge => FaultMode::Edge,
            };
            verify_distance_preserver(&g, &load_subgraph()?, &pairs, args.f, mode, args.cap)
        }
        VerifyKind::Reachability => {
            let source = args.source.ok_or_else(|| anyhow!("--kind reachability needs --source"))?;
            if source >= g.n() {
                bail!("--source {source} out of range for {} vertices", g.n());
            }
            verify_reachability_preserver(&g, &load_subgraph()?, source, args.f, args.cap)
        }
        VerifyKind::Flow => {
            let source = args.source.ok_or_else(|| anyhow!("--kind flow needs --source"))?;
            if source >= g.n() {
                bail!("--source {source} out of range for {} vertices", g.n());
            }
            if !g.directed() || !g.is_unit() {
                bail!("--kind flow needs a directed unit-weight graph");
            }
            verify_flow_preserver(&g, &load_subgraph()?, source, args.f, args.lambda, args.cap)
        }
        VerifyKind::Mandatory => {
            let path = args
                .manifest
                .as_ref()
                .ok_or_else(|| anyhow!("--kind mandatory needs --manifest"))?;
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let parsed = parse_manifest(&text, &g)
                .with_context(|| format!("parsing {}", path.display()))?;
            verify_mandatory_edges(&parsed.into_instance(&g))
        }
    };

    let csv = report.to_csv(&g);
    match &args.out {
        Some(path) => {
            fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
            println!("{} checks {} counterexamples {}", report.status, report.checks_run, report.counterexamples.len());
        }
        None => print!("{csv}"),
    }
    Ok(exit_for(&report))
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    let grid = SweepGrid { ns: args.ns, sigmas: args.sigmas, deltas: args.deltas, seed: args.seed };
    let cells = run_sweep(&grid)?;
    let csv = sweep_csv(&cells);
    match &args.out {
        Some(path) => fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}
