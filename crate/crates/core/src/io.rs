//! Plain-text edge-list format and DOT export.
//!
//! The edge-list format is one header line `N <n>` followed by one `u v` line
//! per edge with 0-based indices. Writing emits edges sorted with u < v, so
//! write ∘ read is the identity on graphs and canonicalizes any valid input.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Parses the edge-list format. Errors carry 1-based line numbers.
pub fn read_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "empty input".into() })?;
    let n: usize = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["N", count] => count.parse().map_err(|_| Error::Parse {
            line: 1,
            msg: format!("bad node count {count:?}"),
        })?,
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header \"N <n>\", got {header:?}"),
            })
        }
    };
    if n == 0 {
        return Err(Error::Parse { line: 1, msg: "node count must be positive".into() });
    }
    let mut g = Graph::empty(n)?;
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [u, v] = fields.as_slice() else {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected \"u v\", got {line:?}"),
            });
        };
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad node index {s:?}"),
            })
        };
        let (u, v) = (parse(u)?, parse(v)?);
        if u == v {
            return Err(Error::Parse { line: line_no, msg: format!("self-loop on node {u}") });
        }
        if u >= n || v >= n {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("index {} out of range for {n} nodes", u.max(v)),
            });
        }
        g.add_edge(u, v)?;
    }
    Ok(g)
}

/// Canonical edge-list text: header, then edges with u < v in sorted order.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("N {}\n", g.node_count());
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

/// Undirected DOT document with one edge statement per unordered pair.
/// Isolated nodes get bare node statements so the node count survives.
pub fn to_dot(g: &Graph) -> String {
    let mut out = String::from("graph G {\n");
    for u in 0..g.node_count() {
        if g.degree(u) == 0 {
            out.push_str(&format!("  {u};\n"));
        }
    }
    for (u, v) in g.edges() {
        out.push_str(&format!("  {u} -- {v};\n"));
    }
    out.push_str("}\n");
    out
}
