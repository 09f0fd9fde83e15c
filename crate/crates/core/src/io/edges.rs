use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Parsed edge list, before deduplication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeList {
    pub n_nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

pub fn load_edge_list(path: &Path) -> Result<EdgeList> {
    let text = super::read_to_string(path)?;
    parse_edge_list(&text, path)
}

/// Parses edge-list text; `origin` only labels errors.
pub fn parse_edge_list(text: &str, origin: &Path) -> Result<EdgeList> {
    let mut header: Option<usize> = None;
    let mut edges = Vec::new();
    let mut max_index: Option<usize> = None;
    for (no, line) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let (a, b) = match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::parse_line(
                    origin,
                    line_no,
                    format!("expected two fields, got '{line}'"),
                ))
            }
        };
        if a == "N" {
            if header.is_some() || !edges.is_empty() {
                return Err(Error::parse_line(
                    origin,
                    line_no,
                    "node-count header must precede all edges",
                ));
            }
            header = Some(parse_index(b, origin, line_no)?);
            continue;
        }
        let u = parse_index(a, origin, line_no)?;
        let v = parse_index(b, origin, line_no)?;
        max_index = Some(max_index.map_or(u.max(v), |m: usize| m.max(u).max(v)));
        edges.push((u, v));
    }
    let implied = max_index.map_or(0, |m| m + 1);
    let n_nodes = match header {
        Some(n) if n < implied => {
            return Err(Error::parse_line(
                origin,
                1,
                format!(
                    "header declares {n} nodes but index {} appears",
                    implied - 1
                ),
            ))
        }
        Some(n) => n,
        None => implied,
    };
    Ok(EdgeList { n_nodes, edges })
}

/// Writes an edge list with an `N <count>` header, so trailing isolated nodes
/// survive a round trip.
pub fn save_edge_list(path: &Path, graph: &Graph) -> Result<()> {
    let mut s = String::with_capacity(16 + graph.n_edges() * 12);
    let _ = writeln!(s, "N {}", graph.n_nodes());
    for (u, v) in graph.edges() {
        let _ = writeln!(s, "{u} {v}");
    }
    super::write_atomic(path, s.as_bytes())
}

fn parse_index(tok: &str, origin: &Path, line_no: usize) -> Result<usize> {
    if tok.starts_with('-') {
        return Err(Error::parse_line(
            origin,
            line_no,
            format!("negative index '{tok}'"),
        ));
    }
    let v: u64 = tok
        .parse()
        .map_err(|e| Error::parse_line(origin, line_no, format!("invalid index '{tok}': {e}")))?;
    if v > u32::MAX as u64 {
        return Err(Error::parse_line(
            origin,
            line_no,
            format!("index {v} overflows"),
        ));
    }
    Ok(v as usize)
}

/// Loads an edge list whose node ids are arbitrary tokens, assigning dense
/// indices in order of first appearance. Returns the edges and the id of
/// every index.
pub fn load_edge_list_remapped(path: &Path) -> Result<(EdgeList, Vec<String>)> {
    let text = super::read_to_string(path)?;
    let mut ids: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut intern = |tok: &str| -> usize {
        if let Some(&i) = index.get(tok) {
            return i;
        }
        let i = ids.len();
        ids.push(tok.to_string());
        index.insert(tok.to_string(), i);
        i
    };
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::parse_line(
                path,
                no + 1,
                format!("expected two fields, got '{line}'"),
            ));
        }
        let u = intern(tokens[0]);
        let v = intern(tokens[1]);
        edges.push((u, v));
    }
    Ok((
        EdgeList {
            n_nodes: ids.len(),
            edges,
        },
        ids,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<EdgeList> {
        parse_edge_list(text, Path::new("test.edges"))
    }

    #[test]
    fn basic_and_comments() {
        let e = parse("0 1\n1 2").unwrap();
        assert_eq!(e.n_nodes, 3);
        assert_eq!(e.edges, vec![(0, 1), (1, 2)]);
        let e = parse("# header\n\n0\t1\n  # another\n1 2\n").unwrap();
        assert_eq!(e.edges, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn header_overrides_count() {
        let e = parse("N 5\n0 1").unwrap();
        assert_eq!(e.n_nodes, 5);
        assert!(parse("N 2\n0 4").is_err());
        assert!(parse("0 1\nN 5").is_err());
    }

    #[test]
    fn malformed_lines_carry_line_numbers() {
        for (text, line) in [
            ("0 1\n1\n", 2),
            ("0 1\n2 3 4", 2),
            ("0 -1", 1),
            ("x 1", 1),
            ("0 99999999999", 1),
        ] {
            match parse(text) {
                Err(Error::Parse { location, .. }) => assert_eq!(location, format!("line {line}")),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }
}
