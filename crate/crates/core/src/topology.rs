//! Communication graph among buildings.
//!
//! A [`Graph`] is an undirected simple graph on nodes `0..n`. Generators cover
//! the usual fixed families plus Erdős–Rényi sampling, which retries with an
//! incremented seed until it draws a connected graph.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Maximum number of Erdős–Rényi draws before giving up.
pub const MAX_GENERATION_ATTEMPTS: usize = 1000;

/// Family of graph produced by [`generate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TopologyKind {
    Ring,
    Path,
    Complete,
    ErdosRenyi {
        p: f64,
    },
    /// Row-major grid, `ceil(sqrt(n))` columns, last row possibly partial.
    Grid2d,
}

impl TopologyKind {
    pub fn name(&self) -> &'static str {
        match self {
            TopologyKind::Ring => "ring",
            TopologyKind::Path => "path",
            TopologyKind::Complete => "complete",
            TopologyKind::ErdosRenyi { .. } => "erdos_renyi",
            TopologyKind::Grid2d => "grid2d",
        }
    }

    /// Parses a kind name; `p` is only consulted for `erdos_renyi`.
    pub fn from_name(name: &str, p: Option<f64>) -> Result<Self> {
        match name {
            "ring" => Ok(TopologyKind::Ring),
            "path" => Ok(TopologyKind::Path),
            "complete" => Ok(TopologyKind::Complete),
            "grid2d" => Ok(TopologyKind::Grid2d),
            "erdos_renyi" => match p {
                Some(p) => Ok(TopologyKind::ErdosRenyi { p }),
                None => Err(Error::Argument(
                    "erdos_renyi requires an edge probability".into(),
                )),
            },
            other => Err(Error::Argument(format!("unknown topology kind `{other}`"))),
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyKind::ErdosRenyi { p } => write!(f, "erdos_renyi({p})"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(inner) = s
            .strip_prefix("erdos_renyi(")
            .and_then(|rest| rest.strip_suffix(')'))
        {
            let p = inner
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Argument(format!("bad edge probability `{inner}`")))?;
            return Ok(TopologyKind::ErdosRenyi { p });
        }
        TopologyKind::from_name(s, None)
    }
}

/// Undirected simple graph. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an edge list. Edges are normalized to `(min, max)`
    /// and sorted; self-loops, out-of-range endpoints and duplicates are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument("graph needs at least one node".into()));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::Argument(format!("self-loop on node {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::Argument(format!(
                    "edge ({a},{b}) out of range for {n} nodes"
                )));
            }
            let e = (a.min(b), a.max(b));
            if !set.insert(e) {
                return Err(Error::Argument(format!("duplicate edge ({},{})", e.0, e.1)));
            }
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in &edges {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Self {
            n,
            edges,
            neighbors,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges as sorted `(i, j)` pairs with `i < j`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }
}

/// Generates a connected graph of the given family.
pub fn generate(kind: TopologyKind, n: usize, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::Argument(format!(
            "graph generation needs n >= 2, got {n}"
        )));
    }
    match kind {
        TopologyKind::Ring => {
            let mut edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
            if n > 2 {
                edges.push((0, n - 1));
            }
            Graph::new(n, edges)
        }
        TopologyKind::Path => Graph::new(n, (0..n - 1).map(|i| (i, i + 1))),
        TopologyKind::Complete => {
            Graph::new(n, (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))))
        }
        TopologyKind::Grid2d => {
            let cols = (n as f64).sqrt().ceil() as usize;
            let mut edges = Vec::new();
            for i in 0..n {
                if (i + 1) % cols != 0 && i + 1 < n {
                    edges.push((i, i + 1));
                }
                if i + cols < n {
                    edges.push((i, i + cols));
                }
            }
            Graph::new(n, edges)
        }
        TopologyKind::ErdosRenyi { p } => {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::Argument(format!(
                    "edge probability must be in (0, 1], got {p}"
                )));
            }
            for attempt in 0..MAX_GENERATION_ATTEMPTS {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
                let mut edges = Vec::new();
                for i in 0..n {
                    for j in (i + 1)..n {
                        if rng.gen::<f64>() < p {
                            edges.push((i, j));
                        }
                    }
                }
                let g = Graph::new(n, edges)?;
                if is_connected(&g) {
                    return Ok(g);
                }
            }
            Err(Error::Generation {
                kind: kind.to_string(),
                attempts: MAX_GENERATION_ATTEMPTS,
            })
        }
    }
}

/// Breadth-first reachability from node 0.
pub fn is_connected(g: &Graph) -> bool {
    let mut seen = vec![false; g.n()];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                reached += 1;
                queue.push_back(v);
            }
        }
    }
    reached == g.n()
}

/// Combinatorial Laplacian `D - A`.
pub fn laplacian<S: Scalar>(g: &Graph) -> Matrix<S> {
    let mut l = Matrix::zeros(g.n());
    for i in 0..g.n() {
        l[(i, i)] = S::of_count(g.degree(i));
    }
    for &(a, b) in g.edges() {
        l[(a, b)] = -S::one();
        l[(b, a)] = -S::one();
    }
    l
}
