//! Plain-text mesh files.
//!
//! ```text
//! vtmesh 1
//! nodes N
//! x y            (N lines, meters)
//! elements M
//! i j k          (M lines, 0-based, counterclockwise)
//! boundary B
//! i j tag        (B lines, tag in left/right/top/bottom)
//! ```
//!
//! Tokens are whitespace-delimited and `#` starts a comment. Coordinates are
//! written in shortest round-trip form so a write/load cycle is bit-exact.

use std::fmt::Write as _;

use super::{signed_area, BoundaryEdge, Point, Side, TriMesh};
use crate::error::{Error, Result};

pub fn write_mesh(mesh: &TriMesh) -> String {
    let mut out = String::new();
    out.push_str("vtmesh 1\n");
    let _ = writeln!(out, "nodes {}", mesh.num_nodes());
    for p in mesh.nodes() {
        let _ = writeln!(out, "{} {}", p[0], p[1]);
    }
    let _ = writeln!(out, "elements {}", mesh.num_elements());
    for t in mesh.elements() {
        let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(out, "boundary {}", mesh.boundary_edges().len());
    for b in mesh.boundary_edges() {
        let _ = writeln!(out, "{} {} {}", b.nodes[0], b.nodes[1], b.side);
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-empty line with comments stripped, as (1-based line number, tokens).
    fn next_tokens(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (idx, raw) in self.inner.by_ref() {
            self.last = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = content.split_whitespace().collect();
            if !tokens.is_empty() {
                return Some((idx + 1, tokens));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        self.next_tokens().ok_or_else(|| Error::MeshParse {
            line: self.last + 1,
            message: format!("unexpected end of file, expected {what}"),
        })
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::MeshParse {
        line,
        message: message.into(),
    }
}

fn parse_count(lines: &mut Lines<'_>, keyword: &str) -> Result<usize> {
    let (line, toks) = lines.expect(&format!("`{keyword} <count>`"))?;
    if toks.len() != 2 || toks[0] != keyword {
        return Err(parse_err(line, format!("expected `{keyword} <count>`")));
    }
    toks[1]
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {keyword} count `{}`", toks[1])))
}

fn parse_index(tok: &str, line: usize, n_nodes: usize) -> Result<usize> {
    let v: usize = tok
        .parse()
        .map_err(|_| parse_err(line, format!("invalid node index `{tok}`")))?;
    if v >= n_nodes {
        return Err(parse_err(
            line,
            format!("node index {v} out of range (mesh has {n_nodes} nodes)"),
        ));
    }
    Ok(v)
}

pub fn load_mesh(text: &str) -> Result<TriMesh> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };

    let (line, toks) = lines.expect("header `vtmesh 1`")?;
    if toks != ["vtmesh", "1"] {
        return Err(parse_err(line, "expected header `vtmesh 1`"));
    }

    let n_nodes = parse_count(&mut lines, "nodes")?;
    let mut nodes: Vec<Point> = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (line, toks) = lines.expect("node coordinates")?;
        if toks.len() != 2 {
            return Err(parse_err(line, "expected `x y`"));
        }
        let mut p = [0.0; 2];
        for k in 0..2 {
            p[k] = toks[k]
                .parse()
                .map_err(|_| parse_err(line, format!("invalid coordinate `{}`", toks[k])))?;
        }
        nodes.push(p);
    }

    let n_elems = parse_count(&mut lines, "elements")?;
    let mut elements = Vec::with_capacity(n_elems);
    for _ in 0..n_elems {
        let (line, toks) = lines.expect("element connectivity")?;
        if toks.len() != 3 {
            return Err(parse_err(line, "expected `i j k`"));
        }
        let mut tri = [0usize; 3];
        for k in 0..3 {
            tri[k] = parse_index(toks[k], line, n_nodes)?;
        }
        let area = signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
        if area < 0.0 {
            return Err(parse_err(line, "inverted element (clockwise orientation)"));
        }
        if area == 0.0 {
            return Err(parse_err(line, "degenerate element (zero area)"));
        }
        elements.push(tri);
    }

    let n_bnd = parse_count(&mut lines, "boundary")?;
    let mut boundary = Vec::with_capacity(n_bnd);
    for _ in 0..n_bnd {
        let (line, toks) = lines.expect("boundary edge")?;
        if toks.len() != 3 {
            return Err(parse_err(line, "expected `i j tag`"));
        }
        let i = parse_index(toks[0], line, n_nodes)?;
        let j = parse_index(toks[1], line, n_nodes)?;
        let side: Side = toks[2].parse().map_err(|m: String| parse_err(line, m))?;
        boundary.push(BoundaryEdge { nodes: [i, j], side });
    }

    if let Some((line, _)) = lines.next_tokens() {
        return Err(parse_err(line, "trailing content after boundary section"));
    }

    TriMesh::new(nodes, elements, boundary)
}
