//! Simple undirected graphs with bit-packed adjacency rows.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

const WORD: usize = 64;

/// A simple undirected graph on nodes `0..n`.
///
/// Rows are stored as `u64` bitsets so that neighborhood intersections cost
/// `O(n / 64)`. The matrix is symmetric with a zero diagonal; every
/// constructor enforces both.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edge_count())
            .finish()
    }
}

impl Graph {
    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(WORD).max(1);
        Graph {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in (u + 1)..n {
                g.set_edge(u, v);
            }
        }
        g
    }

    /// Builds a graph from an undirected edge list, rejecting self-loops,
    /// duplicates and out-of-range endpoints.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            g.try_add_edge(u, v)?;
        }
        Ok(g)
    }

    fn try_add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(Error::invalid(format!(
                "edge ({u}, {v}) out of range for {} nodes",
                self.n
            )));
        }
        if u == v {
            return Err(Error::invalid(format!("self-loop at node {u}")));
        }
        if self.has_edge(u, v) {
            return Err(Error::invalid(format!("duplicate edge ({u}, {v})")));
        }
        self.set_edge(u, v);
        Ok(())
    }

    /// Sets both `(u, v)` and `(v, u)`. Callers guarantee `u != v`.
    pub(crate) fn set_edge(&mut self, u: usize, v: usize) {
        debug_assert_ne!(u, v);
        self.bits[u * self.words + v / WORD] |= 1 << (v % WORD);
        self.bits[v * self.words + u / WORD] |= 1 << (u % WORD);
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Number of `u64` words per adjacency row.
    pub fn row_words(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words + v / WORD] >> (v % WORD) & 1 == 1
    }

    /// Bitset row of `u`.
    #[inline]
    pub fn row(&self, u: usize) -> &[u64] {
        &self.bits[u * self.words..(u + 1) * self.words]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.row(u).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|u| self.degree(u)).collect()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|u| self.degree(u)).sum::<usize>() / 2
    }

    /// Number of common neighbors of `u` and `v`.
    #[inline]
    pub fn common_neighbors(&self, u: usize, v: usize) -> usize {
        self.row(u)
            .iter()
            .zip(self.row(v))
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Neighbors of `u` in increasing order.
    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(u).iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + b)
            })
        })
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| self.neighbors(u).filter(move |&v| v > u).map(move |v| (u, v)))
    }

    /// Observed edge density: edges over `C(n, 2)`; 0 for graphs with fewer
    /// than two nodes.
    pub fn edge_density(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let pairs = (self.n * (self.n - 1) / 2) as f64;
        self.edge_count() as f64 / pairs
    }

    /// Subgraph induced by `nodes`, relabeled `0..nodes.len()` in the given
    /// order. Nodes must be distinct.
    pub fn induced(&self, nodes: &[usize]) -> Graph {
        let mut g = Graph::empty(nodes.len());
        for (a, &u) in nodes.iter().enumerate() {
            for (b, &v) in nodes.iter().enumerate().skip(a + 1) {
                if self.has_edge(u, v) {
                    g.set_edge(a, b);
                }
            }
        }
        g
    }

    /// Graph with node `u` renamed to `perm[u]`.
    pub fn relabel(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.n, "permutation length must equal node count");
        let mut g = Graph::empty(self.n);
        for (u, v) in self.edges() {
            g.set_edge(perm[u], perm[v]);
        }
        g
    }

    /// Reads the edge-list text format: a header `n <count>` followed by one
    /// `u v` pair per line (0-based, each undirected edge once). Blank lines
    /// and lines starting with `#` are ignored.
    pub fn read_edge_list<R: Read>(reader: R) -> Result<Graph> {
        let reader = BufReader::new(reader);
        let mut graph: Option<Graph> = None;
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut fields = trimmed.split_whitespace();
            let parse_err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            match graph.as_mut() {
                None => {
                    if fields.next() != Some("n") {
                        return Err(parse_err("expected header `n <node_count>`".into()));
                    }
                    let n: usize = fields
                        .next()
                        .ok_or_else(|| parse_err("missing node count".into()))?
                        .parse()
                        .map_err(|e| parse_err(format!("bad node count: {e}")))?;
                    if fields.next().is_some() {
                        return Err(parse_err("trailing tokens after node count".into()));
                    }
                    graph = Some(Graph::empty(n));
                }
                Some(g) => {
                    let mut endpoint = || -> Result<usize> {
                        fields
                            .next()
                            .ok_or_else(|| parse_err("expected `u v`".into()))?
                            .parse()
                            .map_err(|e| parse_err(format!("bad node index: {e}")))
                    };
                    let u = endpoint()?;
                    let v = endpoint()?;
                    if fields.next().is_some() {
                        return Err(parse_err("trailing tokens after edge".into()));
                    }
                    g.try_add_edge(u, v).map_err(|e| parse_err(e.to_string()))?;
                }
            }
        }
        graph.ok_or(Error::Parse {
            line: 0,
            message: "missing header `n <node_count>`".into(),
        })
    }

    pub fn write_edge_list<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        let mut out = String::with_capacity(16 + 12 * self.edge_count());
        let _ = writeln!(out, "n {}", self.n);
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        writer.write_all(out.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Graph> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Graph::read_edge_list(file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_edge_list(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }
}

/// Small builder used by samplers: accumulates edges without duplicate
/// checks when the caller guarantees each unordered pair is visited once.
pub(crate) struct GraphBuilder {
    graph: Graph,
}

impl GraphBuilder {
    pub(crate) fn new(n: usize) -> Self {
        GraphBuilder {
            graph: Graph::empty(n),
        }
    }

    #[inline]
    pub(crate) fn add(&mut self, u: usize, v: usize) {
        self.graph.set_edge(u, v);
    }

    pub(crate) fn finish(self) -> Graph {
        self.graph
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn symmetric_and_loop_free() {
        let g = path3();
        assert!(g.has_edge(0, 1) && g.has_edge(1, 0));
        assert!(!g.has_edge(0, 2));
        assert!((0..3).all(|u| !g.has_edge(u, u)));
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.degrees(), vec![1, 2, 1]);
        assert!((g.edge_density() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Graph::from_edges(3, &[(1, 1)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 3)]).is_err());
    }

    #[test]
    fn neighbors_cross_word_boundaries() {
        let g = Graph::from_edges(130, &[(0, 63), (0, 64), (0, 129)]).unwrap();
        assert_eq!(g.neighbors(0).collect::<Vec<_>>(), vec![63, 64, 129]);
        assert_eq!(g.common_neighbors(63, 129), 1);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::from_edges(5, &[(0, 4), (1, 2), (2, 3)]).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "n 5\n0 4\n1 2\n2 3\n");
        assert_eq!(Graph::read_edge_list(&buf[..]).unwrap(), g);
    }

    #[test]
    fn loader_reports_line_numbers() {
        let err = Graph::read_edge_list("n 3\n0 1\n2 2\n".as_bytes()).unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("self-loop"), "{message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
        let err = Graph::read_edge_list("n 3\n0 1\n1 0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = Graph::read_edge_list("n 3\n0 7\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(Graph::read_edge_list("0 1\n".as_bytes()).is_err());
        assert!(Graph::read_edge_list("n 3\n0 x\n".as_bytes()).is_err());
    }

    #[test]
    fn induced_and_relabel() {
        let g = path3();
        let h = g.induced(&[2, 1]);
        assert_eq!(h.node_count(), 2);
        assert!(h.has_edge(0, 1));
        let r = g.relabel(&[2, 0, 1]);
        assert!(r.has_edge(2, 0) && r.has_edge(0, 1) && !r.has_edge(2, 1));
    }
}
