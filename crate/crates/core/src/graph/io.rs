//! Edge-list text format.
//!
//! A graph file starts with a line `n m` followed by `m` lines `u v`; nodes
//! are `1..=n`. A mask file lists one retained input edge `u v` per line.
//! Writers emit edges sorted, so output is byte-deterministic.

use std::fmt::Write as _;

use super::{Graph, GraphError, NodeId, SupportedInstance};

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_pair(line: usize, text: &str) -> Result<(u64, u64), GraphError> {
    let mut parts = text.split_whitespace();
    let mut next = |what: &str| -> Result<u64, GraphError> {
        let tok = parts.next().ok_or_else(|| GraphError::Parse { line, msg: format!("missing {what}") })?;
        tok.parse().map_err(|_| GraphError::Parse { line, msg: format!("bad {what} `{tok}`") })
    };
    let pair = (next("first value")?, next("second value")?);
    if parts.next().is_some() {
        return Err(GraphError::Parse { line, msg: "expected exactly two values".into() });
    }
    Ok(pair)
}

pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut lines = data_lines(text);
    let (line, header) = lines.next().ok_or(GraphError::Parse { line: 1, msg: "empty file".into() })?;
    let (n, m) = parse_pair(line, header)?;
    let mut edges = Vec::with_capacity(m as usize);
    let mut last_line = line;
    for (line, text) in lines {
        edges.push(parse_pair(line, text)?);
        last_line = line;
    }
    if edges.len() as u64 != m {
        return Err(GraphError::Parse {
            line: last_line,
            msg: format!("header announces {m} edges, found {}", edges.len()),
        });
    }
    Graph::from_edges_n(n as usize, edges)
}

pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.m());
    for (u, v) in g.edge_ids() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

pub fn parse_mask(text: &str) -> Result<Vec<(NodeId, NodeId)>, GraphError> {
    data_lines(text).map(|(line, l)| parse_pair(line, l)).collect()
}

pub fn write_mask(inst: &SupportedInstance) -> String {
    let mut out = String::new();
    for (u, v) in inst.input_edge_ids() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}
