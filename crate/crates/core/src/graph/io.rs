use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::Graph;
use crate::error::{Error, Result};

/// How an edge-list file is turned into a [`Graph`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Lines are arcs `u -> v`; the result keeps an edge if either arc exists.
    pub directed: bool,
    /// Return the complement of the parsed graph.
    pub take_complement: bool,
    /// Keep only the largest connected component (before complementing).
    pub largest_component: bool,
}

/// What ingestion saw and what it threw away.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub n: usize,
    pub m: usize,
    pub edge_lines: usize,
    pub comment_lines: usize,
    pub self_loops: usize,
    pub duplicate_edges: usize,
    /// Directed input only: arcs whose reverse arc was already present.
    pub reciprocal_arcs: usize,
}

impl fmt::Display for IngestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ingested n={} m={} edge_lines={} comments={} dropped_self_loops={} dropped_duplicates={} merged_reciprocal={}",
            self.n,
            self.m,
            self.edge_lines,
            self.comment_lines,
            self.self_loops,
            self.duplicate_edges,
            self.reciprocal_arcs
        )
    }
}

/// Parses a whitespace-separated edge list.
///
/// Every non-blank line not starting with `#` must begin with two integer
/// ids; further columns (weights, timestamps) are ignored. Raw ids are
/// compacted to `0..n` in order of first appearance.
pub fn load_edge_list<R: Read>(source: R, options: LoadOptions) -> Result<(Graph, IngestReport)> {
    let mut report = IngestReport::default();
    let mut ids: HashMap<i64, usize> = HashMap::new();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut edges = Vec::new();

    let mut compact = |raw: i64| {
        let next = ids.len();
        *ids.entry(raw).or_insert(next)
    };

    for (index, line) in BufReader::new(source).lines().enumerate() {
        let line_no = index + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            report.comment_lines += 1;
            continue;
        }
        let mut tokens = trimmed.split_ascii_whitespace();
        let mut endpoint = |name: &str| -> Result<i64> {
            let token = tokens.next().ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("missing {name} vertex id"),
            })?;
            token.parse::<i64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("{name} vertex id {token:?} is not an integer"),
            })
        };
        let raw_u = endpoint("source")?;
        let raw_v = endpoint("target")?;
        report.edge_lines += 1;

        let u = compact(raw_u);
        let v = compact(raw_v);
        if u == v {
            report.self_loops += 1;
            continue;
        }
        if options.directed {
            if !seen.insert((u, v)) {
                report.duplicate_edges += 1;
                continue;
            }
            if seen.contains(&(v, u)) {
                report.reciprocal_arcs += 1;
                continue;
            }
        } else if !seen.insert((u.min(v), u.max(v))) {
            report.duplicate_edges += 1;
            continue;
        }
        edges.push((u, v));
    }

    if report.edge_lines == 0 {
        return Err(Error::EmptyInput);
    }

    let mut graph = Graph::from_edges(ids.len(), edges)?;
    if options.largest_component {
        graph = graph.largest_component();
    }
    if options.take_complement {
        graph = graph.complement();
    }
    report.n = graph.n();
    report.m = graph.m();
    Ok((graph, report))
}

pub fn read_edge_list_file(path: &Path, options: LoadOptions) -> Result<(Graph, IngestReport)> {
    load_edge_list(File::open(path)?, options)
}

/// Writes one `u v` line per edge with `u < v`, preceded by `header` as a
/// `#` comment when given.
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W, header: Option<&str>) -> Result<()> {
    if let Some(header) = header {
        for line in header.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}
