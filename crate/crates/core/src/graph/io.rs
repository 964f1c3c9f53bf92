//! Graph serialization: JSON `{"n": .., "weights": [[..], ..]}` and CSV edge
//! lists `i,j,w` with 0-based vertex indices.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::WeightedDigraph;
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    weights: Vec<Vec<f64>>,
}

pub fn to_json(g: &WeightedDigraph) -> String {
    let doc = GraphJson {
        n: g.n_vertices(),
        weights: g.weights().to_rows(),
    };
    serde_json::to_string(&doc).expect("graph JSON serialization cannot fail")
}

pub fn from_json(text: &str) -> Result<WeightedDigraph> {
    let doc: GraphJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if doc.weights.len() != doc.n {
        return Err(Error::DimensionMismatch {
            expected: doc.n,
            got: doc.weights.len(),
        });
    }
    WeightedDigraph::from_rows(&doc.weights)
}

/// Writes one `i,j,w` line per present edge, preceded by an `i,j,w` header.
pub fn write_edge_csv<W: Write>(g: &WeightedDigraph, mut out: W) -> std::io::Result<()> {
    writeln!(out, "i,j,w")?;
    let n = g.n_vertices();
    for i in 0..n {
        for j in 0..n {
            if g.has_edge(i, j) {
                writeln!(out, "{i},{j},{}", g.weight(i, j))?;
            }
        }
    }
    Ok(())
}

/// Reads an edge list. The vertex count is `n` if given, else one more than
/// the largest index seen. A header line is optional.
pub fn read_edge_csv<R: Read>(input: R, n: Option<usize>) -> Result<WeightedDigraph> {
    let mut edges = Vec::new();
    for (lineno, line) in BufReader::new(input).lines().enumerate() {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with('i')) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("line {}: expected i,j,w", lineno + 1)));
        }
        let bad = |what: &str| Error::Parse(format!("line {}: bad {what}", lineno + 1));
        let i: usize = fields[0].parse().map_err(|_| bad("source index"))?;
        let j: usize = fields[1].parse().map_err(|_| bad("target index"))?;
        let w: f64 = fields[2].parse().map_err(|_| bad("weight"))?;
        edges.push((i, j, w));
    }
    let max_index = edges
        .iter()
        .map(|&(i, j, _)| i.max(j) + 1)
        .max()
        .unwrap_or(0);
    let n = n.unwrap_or(max_index);
    if max_index > n {
        return Err(Error::Parse(format!(
            "edge index {} out of range for {n} vertices",
            max_index - 1
        )));
    }
    let mut g = WeightedDigraph::empty(n)?;
    for (i, j, w) in edges {
        if i == j {
            return Err(Error::PreconditionViolated(format!(
                "self-loop at vertex {i}"
            )));
        }
        if !w.is_finite() {
            return Err(Error::NonFinite(w));
        }
        g.set_weight(i, j, w);
    }
    Ok(g)
}

pub fn save_json(g: &WeightedDigraph, path: &Path) -> Result<()> {
    fs::write(path, to_json(g)).map_err(|e| Error::io(path, e))
}

pub fn load_json(path: &Path) -> Result<WeightedDigraph> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}

pub fn save_edge_csv(g: &WeightedDigraph, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_edge_csv(g, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn load_edge_csv(path: &Path, n: Option<usize>) -> Result<WeightedDigraph> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_edge_csv(file, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> WeightedDigraph {
        let mut g = WeightedDigraph::empty(4).unwrap();
        g.set_weight(0, 1, 0.5);
        g.set_weight(1, 0, 0.25);
        g.set_weight(3, 2, 1.0 / 3.0);
        g
    }

    #[test]
    fn json_round_trip() {
        let g = sample();
        assert_eq!(from_json(&to_json(&g)).unwrap(), g);
    }

    #[test]
    fn csv_round_trip() {
        let g = sample();
        let mut buf = Vec::new();
        write_edge_csv(&g, &mut buf).unwrap();
        assert_eq!(read_edge_csv(buf.as_slice(), Some(4)).unwrap(), g);
    }

    #[test]
    fn csv_infers_vertex_count() {
        let g = read_edge_csv("0,2,1.5\n".as_bytes(), None).unwrap();
        assert_eq!(g.n_vertices(), 3);
        assert_eq!(g.weight(0, 2), 1.5);
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(from_json("{\"n\": 2}"), Err(Error::Parse(_))));
        assert!(from_json("{\"n\": 3, \"weights\": [[0,1],[1,0]]}").is_err());
        assert!(read_edge_csv("0,1\n".as_bytes(), None).is_err());
        assert!(read_edge_csv("0,5,1\n".as_bytes(), Some(3)).is_err());
        assert!(read_edge_csv("1,1,1\n".as_bytes(), None).is_err());
    }
}
