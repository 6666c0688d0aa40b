use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Graph, NodeId};
use crate::error::{Error, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses the text edge-list format: a `n m` header, then `m` lines `u v`.
/// Lines starting with `#` and blank lines are skipped.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut header: Option<(usize, usize)> = None;
    let mut pairs: Vec<(NodeId, NodeId)> = Vec::new();
    let mut seen = HashSet::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_err(line, format!("expected two fields, found {}", fields.len())));
        }
        let Some((n, m)) = header else {
            let n = fields[0]
                .parse()
                .map_err(|_| parse_err(line, format!("malformed header: bad node count `{}`", fields[0])))?;
            let m = fields[1]
                .parse()
                .map_err(|_| parse_err(line, format!("malformed header: bad edge count `{}`", fields[1])))?;
            header = Some((n, m));
            pairs.reserve(m);
            continue;
        };
        let id = |text: &str| -> Result<NodeId> {
            let v: u64 = text
                .parse()
                .map_err(|_| parse_err(line, format!("bad node id `{text}`")))?;
            if v as usize >= n {
                return Err(parse_err(line, format!("node id {v} >= n = {n}")));
            }
            Ok(v as NodeId)
        };
        let (u, v) = (id(fields[0])?, id(fields[1])?);
        if u == v {
            return Err(parse_err(line, format!("self-loop at node {u}")));
        }
        let key = (u.min(v), u.max(v));
        if !seen.insert(key) {
            return Err(parse_err(line, format!("duplicate edge {} {}", key.0, key.1)));
        }
        if pairs.len() == m {
            return Err(parse_err(line, format!("more than the {m} edges announced in the header")));
        }
        pairs.push(key);
    }
    let Some((n, m)) = header else {
        return Err(parse_err(last_line.max(1), "missing `n m` header"));
    };
    if pairs.len() != m {
        return Err(parse_err(
            last_line,
            format!("header announces {m} edges but {} were listed", pairs.len()),
        ));
    }
    pairs.sort_unstable();
    Ok(Graph::from_sorted_unique(n, &pairs))
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    parse_edge_list(&fs::read_to_string(path)?)
}

/// Writes the canonical form: header, then edges `u v` with `u < v` in lexicographic order.
pub fn write_edge_list<W: Write>(graph: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", graph.n(), graph.m())?;
    for (u, v) in graph.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}
