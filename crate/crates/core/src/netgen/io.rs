use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::graph::{Graph, NodeId};
use super::ModelSpec;
use crate::error::{Error, Result};

/// JSON header stored as the first comment line of saved edge lists.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct GraphHeader {
    pub spec: Option<ModelSpec>,
    pub seed: Option<u64>,
    pub n_nodes: usize,
    pub n_edges: usize,
}

/// An edge list loaded from disk, with original labels and dropped-line
/// counts retained.
#[derive(Debug)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// `labels[new_id]` is the id string as it appeared in the file.
    pub labels: Vec<String>,
    pub dropped_self_loops: usize,
    pub dropped_duplicates: usize,
}

/// Reads a whitespace-separated edge list; `#`-prefixed lines are comments.
/// Node ids are remapped to contiguous integers in order of first
/// appearance; duplicate edges and self-loops are dropped and counted.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<LoadedGraph> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let mut ids: HashMap<String, NodeId> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    let intern = |token: &str, labels: &mut Vec<String>, ids: &mut HashMap<String, NodeId>| {
        if let Some(&id) = ids.get(token) {
            id
        } else {
            let id = labels.len();
            ids.insert(token.to_string(), id);
            labels.push(token.to_string());
            id
        }
    };

    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (a, b) = match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected two node ids, got {trimmed:?}"),
                })
            }
        };
        let u = intern(a, &mut labels, &mut ids);
        let v = intern(b, &mut labels, &mut ids);
        edges.push((u, v));
    }

    let (graph, dropped_self_loops, dropped_duplicates) =
        Graph::from_edges_lenient(labels.len(), &edges)?;
    Ok(LoadedGraph {
        graph,
        labels,
        dropped_self_loops,
        dropped_duplicates,
    })
}

/// Writes a graph as an edge list with a JSON header comment line.
pub fn save_edge_list(g: &Graph, header: &GraphHeader, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let meta = serde_json::to_string(header)?;
    writeln!(w, "# {meta}").map_err(|e| Error::io(path, e))?;
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_simple_path() {
        let f = write_temp("0 1\n1 2\n");
        let loaded = load_edge_list(f.path()).unwrap();
        assert_eq!(loaded.graph.n_nodes(), 3);
        assert_eq!(loaded.graph.n_edges(), 2);
        assert_eq!(loaded.dropped_duplicates, 0);
    }

    #[test]
    fn drops_duplicates_and_self_loops_with_counts() {
        let f = write_temp("0 1\n1 0\n1 1\n");
        let loaded = load_edge_list(f.path()).unwrap();
        assert_eq!(loaded.graph.n_edges(), 1);
        assert_eq!(loaded.dropped_duplicates, 1);
        assert_eq!(loaded.dropped_self_loops, 1);
    }

    #[test]
    fn reports_malformed_line_number() {
        let f = write_temp("# header\n0 1\nbroken\n");
        match load_edge_list(f.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn save_then_load_preserves_structure() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ring.edges");
        let header = GraphHeader {
            spec: None,
            seed: Some(4),
            n_nodes: g.n_nodes(),
            n_edges: g.n_edges(),
        };
        save_edge_list(&g, &header, &path).unwrap();
        let loaded = load_edge_list(&path).unwrap();
        assert_eq!(loaded.graph.n_nodes(), 4);
        assert_eq!(loaded.graph.n_edges(), 4);
        let mut degrees: Vec<usize> = loaded.graph.node_ids().map(|u| loaded.graph.degree(u)).collect();
        degrees.sort_unstable();
        assert_eq!(degrees, vec![2, 2, 2, 2]);
    }
}
