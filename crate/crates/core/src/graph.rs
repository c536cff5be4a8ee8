//! Undirected graphs carrying the signals.
//!
//! Vertices are stored 0-based; edges are kept as `(n, m)` with `n < m`,
//! sorted lexicographically so every iteration over edges is deterministic.

use std::collections::VecDeque;

use crate::error::{DenoiseError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    is_chain: bool,
}

impl Graph {
    /// Builds a graph from an arbitrary edge list.
    ///
    /// Each pair is normalized to `(min, max)`. Self loops, duplicates,
    /// out-of-range endpoints and disconnected graphs are rejected.
    pub fn new(num_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if num_vertices == 0 {
            return Err(DenoiseError::InvalidSize("graph needs at least one vertex".into()));
        }
        let mut sorted = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= num_vertices || b >= num_vertices {
                return Err(DenoiseError::Index { index: a.max(b), len: num_vertices });
            }
            if a == b {
                return Err(DenoiseError::InvalidGraph(format!("self loop at vertex {a}")));
            }
            sorted.push((a.min(b), a.max(b)));
        }
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(DenoiseError::InvalidGraph(format!("duplicate edge {:?}", w[0])));
        }

        let mut adjacency = vec![Vec::new(); num_vertices];
        for (e, &(n, m)) in sorted.iter().enumerate() {
            adjacency[n].push(e);
            adjacency[m].push(e);
        }
        let is_chain = sorted.len() + 1 == num_vertices
            && sorted.iter().enumerate().all(|(i, &(n, m))| n == i && m == i + 1);

        let graph = Self { num_vertices, edges: sorted, adjacency, is_chain };
        if !graph.is_connected() {
            return Err(DenoiseError::InvalidGraph("graph is not connected".into()));
        }
        Ok(graph)
    }

    /// Path graph `0 - 1 - ... - (n-1)`.
    pub fn chain(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(DenoiseError::InvalidSize("chain length must be positive".into()));
        }
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &edges)
    }

    /// 4-neighbour grid with vertices in row-major order.
    pub fn grid(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(DenoiseError::InvalidSize(format!("grid {height}x{width} has a zero dimension")));
        }
        let mut edges = Vec::with_capacity(height * (width - 1) + width * (height - 1));
        for r in 0..height {
            for c in 0..width {
                let v = r * width + c;
                if c + 1 < width {
                    edges.push((v, v + 1));
                }
                if r + 1 < height {
                    edges.push((v, v + width));
                }
            }
        }
        Self::new(height * width, &edges)
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Indices of the edges incident to `n`.
    pub fn incident_edges(&self, n: usize) -> Result<&[usize]> {
        self.adjacency
            .get(n)
            .map(Vec::as_slice)
            .ok_or(DenoiseError::Index { index: n, len: self.num_vertices })
    }

    /// Number of distinct neighbours of vertex `n` (the ν_n of the Tikhonov update).
    pub fn neighbor_count(&self, n: usize) -> Result<usize> {
        self.incident_edges(n).map(<[usize]>::len)
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// True when the edge set is exactly `{(i, i+1)}`.
    pub fn is_chain(&self) -> bool {
        self.is_chain
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.num_vertices];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &e in &self.adjacency[v] {
                let (a, b) = self.edges[e];
                let w = if a == v { b } else { a };
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.num_vertices
    }
}

/// Textual description of the supported topologies: `chain:N` or `grid:HxW`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphSpec {
    Chain(usize),
    Grid { height: usize, width: usize },
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph> {
        match *self {
            GraphSpec::Chain(n) => Graph::chain(n),
            GraphSpec::Grid { height, width } => Graph::grid(height, width),
        }
    }

    pub fn num_vertices(&self) -> usize {
        match *self {
            GraphSpec::Chain(n) => n,
            GraphSpec::Grid { height, width } => height * width,
        }
    }
}

impl std::fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GraphSpec::Chain(n) => write!(f, "chain:{n}"),
            GraphSpec::Grid { height, width } => write!(f, "grid:{height}x{width}"),
        }
    }
}

impl std::str::FromStr for GraphSpec {
    type Err = DenoiseError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || DenoiseError::Parameter(format!("unrecognized graph spec `{s}` (expected chain:N or grid:HxW)"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "chain" => rest.parse().map(GraphSpec::Chain).map_err(|_| bad()),
            "grid" => {
                let (h, w) = rest.split_once('x').ok_or_else(bad)?;
                Ok(GraphSpec::Grid { height: h.parse().map_err(|_| bad())?, width: w.parse().map_err(|_| bad())? })
            }
            _ => Err(bad()),
        }
    }
}
