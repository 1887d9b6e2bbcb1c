//! Line-based text formats: `cftg` graphs, `cfth` subgraphs, and instance
//! manifests. All files are UTF-8 with LF line endings; `#` starts a comment.
//!
//! A graph file looks like
//! ```text
//! cftg 1
//! n 3
//! directed 0
//! weighted 0
//! e 0 1 1 red
//! e 1 2 1 -
//! ```
//! with one `e <tail> <head> <weight> <color|->` line per edge; weights are
//! decimal integers or `p/q` rationals, `-` marks an uncolored edge.
//!
//! A subgraph file (`cfth`) stores the sorted edge ids of a parent graph and
//! pins the parent by content hash:
//! ```text
//! cfth 1 parent=<sha-256 of the parent cftg file>
//! 0
//! 4
//! ```

use std::collections::BTreeMap;

use num_rational::Ratio;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{Color, ColoredGraph, EdgeSpec, FaultSet, Subgraph};
use crate::lowerbounds::{Demand, LowerBoundInstance, MandatoryEdge, PreserveMode};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: graph error: {source}")]
    Graph { line: usize, source: crate::graph::GraphError },
    #[error("subgraph parent hash {got} does not match the graph file ({want})")]
    ParentHashMismatch { got: String, want: String },
}

fn err(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Malformed { line, msg: msg.into() }
}

/// Content lines with their 1-based numbers, comments and blanks stripped.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

fn parse_weight(tok: &str, line: usize) -> Result<Ratio<u64>, ParseError> {
    let parse_int = |s: &str| -> Result<u64, ParseError> {
        s.parse::<u64>().map_err(|_| err(line, format!("bad weight component '{s}'")))
    };
    if let Some((p, q)) = tok.split_once('/') {
        let (p, q) = (parse_int(p)?, parse_int(q)?);
        if q == 0 {
            return Err(err(line, "weight denominator is zero"));
        }
        Ok(Ratio::new(p, q))
    } else {
        Ok(Ratio::from_integer(parse_int(tok)?))
    }
}

pub fn parse_graph(text: &str) -> Result<ColoredGraph, ParseError> {
    let mut lines = content_lines(text);

    let (ln, header) = lines.next().ok_or_else(|| err(0, "empty file"))?;
    if header != "cftg 1" {
        return Err(err(ln, format!("expected 'cftg 1' header, found '{header}'")));
    }
    let mut expect_field = |name: &str| -> Result<(usize, String), ParseError> {
        let (ln, l) = lines.next().ok_or_else(|| err(0, format!("missing '{name}' line")))?;
        match l.split_once(' ') {
            Some((k, v)) if k == name => Ok((ln, v.trim().to_string())),
            _ => Err(err(ln, format!("expected '{name} <value>', found '{l}'"))),
        }
    };
    let (ln_n, n_str) = expect_field("n")?;
    let n: usize = n_str.parse().map_err(|_| err(ln_n, format!("bad vertex count '{n_str}'")))?;
    let parse_flag = |ln: usize, v: &str, name: &str| match v {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(err(ln, format!("{name} must be 0 or 1, found '{v}'"))),
    };
    let (ln_d, d_str) = expect_field("directed")?;
    let directed = parse_flag(ln_d, &d_str, "directed")?;
    let (ln_w, w_str) = expect_field("weighted")?;
    let weighted = parse_flag(ln_w, &w_str, "weighted")?;

    let mut specs = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut last_line = ln_w;
    for (ln, l) in lines {
        last_line = ln;
        let toks: Vec<&str> = l.split_ascii_whitespace().collect();
        if toks.len() != 5 || toks[0] != "e" {
            return Err(err(ln, format!("expected 'e <tail> <head> <weight> <color|->', found '{l}'")));
        }
        let vertex = |s: &str| -> Result<usize, ParseError> {
            s.parse().map_err(|_| err(ln, format!("bad vertex '{s}'")))
        };
        let tail = vertex(toks[1])?;
        let head = vertex(toks[2])?;
        let weight = parse_weight(toks[3], ln)?;
        let color = match toks[4] {
            "-" => None,
            name => {
                let id = match names.iter().position(|x| x == name) {
                    Some(i) => i,
                    None => {
                        names.push(name.to_string());
                        names.len() - 1
                    }
                };
                Some(Color(id as u32))
            }
        };
        specs.push(EdgeSpec { tail, head, weight, color });
    }

    ColoredGraph::from_parts(n, directed, weighted, specs, Some(names))
        .map_err(|source| ParseError::Graph { line: last_line, source })
}

pub fn write_graph(g: &ColoredGraph) -> String {
    let mut out = String::new();
    out.push_str("cftg 1\n");
    out.push_str(&format!("n {}\n", g.n()));
    out.push_str(&format!("directed {}\n", g.directed() as u8));
    out.push_str(&format!("weighted {}\n", g.weighted() as u8));
    for e in g.edges() {
        let w = if e.weight.is_integer() {
            e.weight.numer().to_string()
        } else {
            format!("{}/{}", e.weight.numer(), e.weight.denom())
        };
        let c = match e.color {
            Some(c) => g.color_name(c).to_string(),
            None => "-".to_string(),
        };
        out.push_str(&format!("e {} {} {} {}\n", e.tail, e.head, w, c));
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    format!("{:x}", h.finalize())
}

/// Serializes a subgraph against the hash of the parent graph's file bytes.
pub fn write_subgraph(sub: &Subgraph, parent_hash: &str) -> String {
    let mut out = format!("cfth 1 parent={parent_hash}\n");
    for e in sub.iter() {
        out.push_str(&format!("{e}\n"));
    }
    out
}

/// Parses a subgraph file, checking the recorded parent hash against the
/// actual parent file hash when one is supplied.
pub fn parse_subgraph(
    text: &str,
    g: &ColoredGraph,
    parent_hash: Option<&str>,
) -> Result<Subgraph, ParseError> {
    let mut lines = content_lines(text);
    let (ln, header) = lines.next().ok_or_else(|| err(0, "empty file"))?;
    let rest = header
        .strip_prefix("cfth 1 parent=")
        .ok_or_else(|| err(ln, format!("expected 'cfth 1 parent=<hash>' header, found '{header}'")))?;
    if let Some(want) = parent_hash {
        if rest != want {
            return Err(ParseError::ParentHashMismatch { got: rest.to_string(), want: want.to_string() });
        }
    }
    let mut ids = Vec::new();
    let mut last = ln;
    for (ln, l) in lines {
        last = ln;
        ids.push(l.parse::<usize>().map_err(|_| err(ln, format!("bad edge id '{l}'")))?);
    }
    Subgraph::new(g, ids).map_err(|source| ParseError::Graph { line: last, source })
}

/// A hard instance's sidecar data as read back from a manifest file: the
/// demand, the guarantee mode, the fault budget, and the mandatory edges with
/// their witnesses.
#[derive(Clone, Debug)]
pub struct ParsedManifest {
    pub demand: Demand,
    pub mode: PreserveMode,
    /// Maximum witness size; every parsed witness is checked against it.
    pub budget: usize,
    pub mandatory: Vec<MandatoryEdge>,
}

impl ParsedManifest {
    /// Reassembles a full instance around the graph the manifest was parsed
    /// against.
    pub fn into_instance(self, g: &ColoredGraph) -> LowerBoundInstance {
        let expected_mandatory = self.mandatory.len();
        LowerBoundInstance {
            graph: g.clone(),
            demand: self.demand,
            mode: self.mode,
            mandatory: self.mandatory,
            expected_mandatory,
        }
    }
}

/// Serializes an instance's sidecar manifest:
/// ```text
/// manifest 1
/// mode distance            # or "reachability" / "flow <lambda>"
/// budget 1
/// sources 0,5              # or "pair <u> <v>"
/// m 12 c3,c7               # mandatory edge 12, witness colors by name
/// ```
/// Witness colors are written by name. A name whose class is empty does not
/// survive graph serialization; readers treat such names as killing nothing,
/// which is exactly what an empty class does.
pub fn write_manifest(inst: &LowerBoundInstance) -> String {
    let g = &inst.graph;
    let mut out = String::from("manifest 1\n");
    out.push_str(&match inst.mode {
        PreserveMode::Distance => "mode distance\n".to_string(),
        PreserveMode::Reachability => "mode reachability\n".to_string(),
        PreserveMode::Flow(lambda) => format!("mode flow {lambda}\n"),
    });
    let budget = inst.mandatory.iter().map(|me| me.witness.len()).max().unwrap_or(0).max(1);
    out.push_str(&format!("budget {budget}\n"));
    match &inst.demand {
        Demand::Sources(sources) => {
            let list: Vec<String> = sources.iter().map(usize::to_string).collect();
            out.push_str(&format!("sources {}\n", list.join(",")));
        }
        Demand::Pair(u, v) => out.push_str(&format!("pair {u} {v}\n")),
    }
    for me in &inst.mandatory {
        let witness = match &me.witness {
            w if w.is_empty() => "-".to_string(),
            w => {
                let names: Vec<String> = w
                    .color_members()
                    .iter()
                    .map(|&c| g.color_name(c).to_string())
                    .collect();
                names.join(",")
            }
        };
        out.push_str(&format!("m {} {}\n", me.edge, witness));
    }
    out
}

/// Parses a manifest against the graph it describes. Witness color names not
/// present in the graph's palette are skipped: a color with no edges kills
/// nothing, so the parsed fault has the identical effect.
pub fn parse_manifest(text: &str, g: &ColoredGraph) -> Result<ParsedManifest, ParseError> {
    let mut lines = content_lines(text);
    let (ln, header) = lines.next().ok_or_else(|| err(0, "empty file"))?;
    if header != "manifest 1" {
        return Err(err(ln, format!("expected 'manifest 1' header, found '{header}'")));
    }

    let (ln_m, mode_line) = lines.next().ok_or_else(|| err(0, "missing 'mode' line"))?;
    let mode = match mode_line.split_ascii_whitespace().collect::<Vec<_>>()[..] {
        ["mode", "distance"] => PreserveMode::Distance,
        ["mode", "reachability"] => PreserveMode::Reachability,
        ["mode", "flow", lambda] => PreserveMode::Flow(
            lambda.parse().map_err(|_| err(ln_m, format!("bad flow threshold '{lambda}'")))?,
        ),
        _ => return Err(err(ln_m, format!("unrecognized mode line '{mode_line}'"))),
    };

    let (ln_b, budget_line) = lines.next().ok_or_else(|| err(0, "missing 'budget' line"))?;
    let budget: usize = budget_line
        .strip_prefix("budget ")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| err(ln_b, format!("expected 'budget <f>', found '{budget_line}'")))?;

    let (ln_d, demand_line) = lines.next().ok_or_else(|| err(0, "missing demand line"))?;
    let check_vertex = |v: usize| -> Result<usize, ParseError> {
        if v < g.n() {
            Ok(v)
        } else {
            Err(err(ln_d, format!("vertex {v} out of range for {} vertices", g.n())))
        }
    };
    let demand = if let Some(list) = demand_line.strip_prefix("sources ") {
        let mut sources = Vec::new();
        for tok in list.split(',') {
            let v: usize = tok
                .trim()
                .parse()
                .map_err(|_| err(ln_d, format!("bad source vertex '{tok}'")))?;
            sources.push(check_vertex(v)?);
        }
        Demand::Sources(sources)
    } else if let Some(rest) = demand_line.strip_prefix("pair ") {
        match rest.split_ascii_whitespace().collect::<Vec<_>>()[..] {
            [u, v] => {
                let parse = |s: &str| -> Result<usize, ParseError> {
                    s.parse().map_err(|_| err(ln_d, format!("bad pair vertex '{s}'")))
                };
                Demand::Pair(check_vertex(parse(u)?)?, check_vertex(parse(v)?)?)
            }
            _ => return Err(err(ln_d, format!("expected 'pair <u> <v>', found '{demand_line}'"))),
        }
    } else {
        return Err(err(ln_d, format!("expected 'sources …' or 'pair …', found '{demand_line}'")));
    };

    let by_name: BTreeMap<&str, Color> = g
        .color_names()
        .iter()
        .enumerate()
        .map(|(i, name)| (name.as_str(), Color(i as u32)))
        .collect();

    let mut mandatory = Vec::new();
    for (ln, l) in lines {
        let toks: Vec<&str> = l.split_ascii_whitespace().collect();
        if toks.len() != 3 || toks[0] != "m" {
            return Err(err(ln, format!("expected 'm <edge-id> <colors>', found '{l}'")));
        }
        let edge: usize =
            toks[1].parse().map_err(|_| err(ln, format!("bad edge id '{}'", toks[1])))?;
        if edge >= g.m() {
            return Err(err(ln, format!("edge {edge} out of range for {} edges", g.m())));
        }
        let colors: Vec<Color> = if toks[2] == "-" {
            Vec::new()
        } else {
            toks[2].split(',').filter_map(|name| by_name.get(name.trim()).copied()).collect()
        };
        let witness = FaultSet::colors(colors, budget)
            .map_err(|source| ParseError::Graph { line: ln, source })?;
        mandatory.push(MandatoryEdge { edge, witness });
    }

    Ok(ParsedManifest { demand, mode, budget, mandatory })
}
