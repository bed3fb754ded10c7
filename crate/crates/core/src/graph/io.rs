//! Edge-list text format:
//!
//! ```text
//! # optional comments
//! n m d
//! u v        (m lines, u < v)
//! ```
//!
//! Anything after a `#` on a line is ignored, as are blank lines.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::{Graph, Vertex};
use crate::error::{Error, Result};

pub fn write_edge_list<W: Write>(g: &Graph, mut w: W) -> std::io::Result<()> {
    let mut buf = String::with_capacity(16 * (g.edge_count() + 1));
    let _ = writeln!(buf, "{} {} {}", g.n(), g.edge_count(), g.d_bound());
    for (u, v) in g.edges() {
        let _ = writeln!(buf, "{u} {v}");
    }
    w.write_all(buf.as_bytes())
}

pub fn save_graph(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io { path: path.to_path_buf(), source };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut w = std::io::BufWriter::new(file);
    write_edge_list(g, &mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_edge_list(&text)
}

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::Format { line, message: message.into() }
}

fn parse_fields<const N: usize>(line_no: usize, body: &str) -> Result<[usize; N]> {
    let mut out = [0usize; N];
    let mut fields = body.split_whitespace();
    for slot in out.iter_mut() {
        let tok = fields
            .next()
            .ok_or_else(|| format_err(line_no, format!("expected {N} integers, got {body:?}")))?;
        *slot = tok
            .parse()
            .map_err(|_| format_err(line_no, format!("not a non-negative integer: {tok:?}")))?;
    }
    if let Some(extra) = fields.next() {
        return Err(format_err(line_no, format!("unexpected trailing token {extra:?}")));
    }
    Ok(out)
}

/// Parses and validates the edge-list format. Every error carries the
/// 1-based line number it was detected on.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, raw)| (i + 1, raw.split('#').next().unwrap_or("").trim()))
        .filter(|(_, body)| !body.is_empty());

    let (header_line, header) = lines.next().ok_or_else(|| format_err(1, "missing `n m d` header"))?;
    let [n, m, d] = parse_fields::<3>(header_line, header)?;

    let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    let mut seen = 0usize;
    let mut last_line = header_line;
    for (line_no, body) in lines {
        last_line = line_no;
        let [u, v] = parse_fields::<2>(line_no, body)?;
        seen += 1;
        if seen > m {
            return Err(format_err(line_no, format!("more than the declared {m} edges")));
        }
        if u >= n || v >= n {
            return Err(format_err(line_no, format!("vertex {} out of range 0..{n}", u.max(v))));
        }
        if u == v {
            return Err(format_err(line_no, format!("self-loop at {u}")));
        }
        if u > v {
            return Err(format_err(line_no, format!("edge {u} {v} must be written with u < v")));
        }
        if adj[u].contains(&v) {
            return Err(format_err(line_no, format!("duplicate edge {u} {v}")));
        }
        for w in [u, v] {
            if adj[w].len() == d {
                return Err(format_err(
                    line_no,
                    format!("vertex {w} exceeds the declared degree bound {d}"),
                ));
            }
        }
        adj[u].push(v);
        adj[v].push(u);
    }
    if seen != m {
        return Err(format_err(last_line, format!("declared {m} edges but found {seen}")));
    }
    Graph::from_adjacency(adj, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_cycle, gen_random_regular};

    fn round_trip(g: &Graph) -> Graph {
        let mut buf = Vec::new();
        write_edge_list(g, &mut buf).unwrap();
        parse_edge_list(std::str::from_utf8(&buf).unwrap()).unwrap()
    }

    #[test]
    fn cycle_round_trip() {
        let g = gen_cycle(4).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "4 4 2\n0 1\n0 3\n1 2\n2 3\n");
        assert_eq!(round_trip(&g), g);
    }

    #[test]
    fn file_round_trip() {
        let g = gen_random_regular(50, 3, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.txt");
        save_graph(&g, &path).unwrap();
        assert_eq!(load_graph(&path).unwrap(), g);
    }

    #[test]
    fn single_isolated_vertex() {
        let g = parse_edge_list("1 0 0\n").unwrap();
        assert_eq!((g.n(), g.edge_count()), (1, 0));
    }

    #[test]
    fn comments_and_blank_lines() {
        let g = parse_edge_list("# header\n\n3 2 2 # n m d\n0 1\n# mid\n1 2\n").unwrap();
        assert_eq!(g.edge_count(), 2);
    }

    fn err_line(text: &str) -> usize {
        match parse_edge_list(text) {
            Err(Error::Format { line, .. }) => line,
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn rejections_carry_line_numbers() {
        assert_eq!(err_line("3 3 2\n0 1\n1 2\n0 2\n2 0\n"), 5); // too many edges
        assert_eq!(err_line("4 3 2\n0 1\n0 2\n0 3\n"), 4); // degree over bound
        assert_eq!(err_line("3 2 2\n0 1\n0 1\n"), 3); // duplicate
        assert_eq!(err_line("3 1 2\n1 0\n"), 2); // u > v
        assert_eq!(err_line("3 1 2\n1 1\n"), 2); // self-loop
        assert_eq!(err_line("3 1 2\n0 3\n"), 2); // out of range
        assert_eq!(err_line("3 1 2\n0 x\n"), 2);
        assert_eq!(err_line("3 1 2\n0 1 2\n"), 2);
        assert_eq!(err_line("3 2 2\n0 1\n"), 2); // too few edges
        assert_eq!(err_line("3 2\n"), 1);
        assert_eq!(err_line(""), 1);
    }
}
