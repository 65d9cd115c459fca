//! Whitespace-delimited graph files.
//!
//! ```text
//! # n 6
//! # kind regular 3
//! # seed 11
//! # sha256 <hex of the edge lines>
//! 0 3 1
//! ...
//! ```

use super::graph::{CouplingGraph, GraphKind};
use crate::error::{Error, Result};

pub(crate) fn canonical_body(graph: &CouplingGraph) -> String {
    let mut out = String::new();
    for e in graph.edges() {
        // `{:?}` on f64 is the shortest round-tripping form
        out.push_str(&format!("{} {} {:?}\n", e.i, e.j, e.coupling));
    }
    out
}

pub fn write_graph_text(graph: &CouplingGraph) -> String {
    let mut out = format!("# n {}\n# kind {}\n", graph.n(), graph.kind());
    if let Some(seed) = graph.seed() {
        out.push_str(&format!("# seed {seed}\n"));
    }
    out.push_str(&format!("# sha256 {}\n", graph.content_hash()));
    out.push_str(&canonical_body(graph));
    out
}

pub fn parse_graph_text(text: &str) -> Result<CouplingGraph> {
    let mut n = None;
    let mut kind = GraphKind::Custom;
    let mut seed = None;
    let mut hash = None;
    let mut edges = Vec::new();
    let bad = |line: &str| Error::Parse(format!("malformed line: {line:?}"));
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let mut tok = line.split_whitespace();
        if let Some(rest) = line.strip_prefix('#') {
            let mut tok = rest.split_whitespace();
            match tok.next() {
                Some("n") => n = Some(tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(line))?),
                Some("seed") => seed = Some(tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(line))?),
                Some("sha256") => hash = tok.next().map(str::to_owned),
                Some("kind") => {
                    kind = match (tok.next(), tok.next()) {
                        (Some("chain"), _) => GraphKind::Chain,
                        (Some("complete"), _) => GraphKind::Complete,
                        (Some("custom"), _) => GraphKind::Custom,
                        (Some("regular"), Some(d)) => GraphKind::Regular(d.parse().map_err(|_| bad(line))?),
                        (Some("square"), Some(l)) => GraphKind::SquareLattice { l: l.parse().map_err(|_| bad(line))? },
                        _ => return Err(bad(line)),
                    }
                }
                _ => {}
            }
            continue;
        }
        let i: usize = tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(line))?;
        let j: usize = tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(line))?;
        let c: f64 = tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(line))?;
        edges.push((i, j, c));
    }
    let n = n.ok_or_else(|| Error::Parse("missing `# n` header".into()))?;
    let graph = CouplingGraph::from_edges(n, edges, kind, seed)?;
    if let Some(h) = hash {
        if h != graph.content_hash() {
            return Err(Error::Parse("sha256 mismatch".into()));
        }
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_regular_graph, make_complete, CouplingModel};

    #[test]
    fn round_trip_regular_and_complete() {
        let g = generate_regular_graph(20, 3, 5).unwrap();
        assert_eq!(parse_graph_text(&write_graph_text(&g)).unwrap(), g);
        let g = make_complete(7, CouplingModel::Gaussian, 3).unwrap();
        assert_eq!(parse_graph_text(&write_graph_text(&g)).unwrap(), g);
    }

    #[test]
    fn tampered_file_fails_hash() {
        let g = generate_regular_graph(8, 3, 5).unwrap();
        let text = write_graph_text(&g).replacen(" 1.0\n", " 2.0\n", 1);
        assert!(parse_graph_text(&text).is_err());
    }
}
